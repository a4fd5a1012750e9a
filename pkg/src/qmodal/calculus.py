"""Sequent calculus: rule instances, forward saturation, derivation checking.

The calculus has two axiom schemas (identity and the membership axiom for
boxed formulas) and ten rules: weakening, cut, three conjunction rules, four
negation rules, and the modal rule K.  Saturation works forward inside a
fixed finite formula universe closed under subformulas:

  * sequents are kept as a subsumption antichain (only componentwise-minimal
    derivable sequents are stored; weakening is recovered by superset tests,
    never generated);
  * rules are applied to antichain members only; every rule commutes with
    weakening in the sense that the conclusion from a subsuming premise
    subsumes the conclusion from the weakened one, so nothing is lost;
  * the membership axiom is seeded with an empty antecedent; cut is applied
    between all recorded pairs with the cut formula ranging over both sides'
    shared formulas.

Internally sequents are pairs of bitmasks over the universe index; the
engine records, for every inserted sequent, the rule instance and the
specific supporting members, so a derivation tree can be rebuilt and then
re-verified by a checker that shares no code with the engine.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .formula import (
    And,
    Atom,
    Box,
    Formula,
    Not,
    Sequent,
    admissible_closure,
    enumerate_formula,
    formula_key,
    render_sequent,
    parse_sequent,
    sorted_formulas,
    subformulas,
)

__all__ = [
    "RULES",
    "RULE_ARITY",
    "RuleInstance",
    "DerivationNode",
    "DerivableSet",
    "UniverseError",
    "rule_conclusions",
    "saturate",
    "extract_derivation",
    "check_rule_application",
    "check_derivation",
    "derivation_to_text",
    "parse_derivation",
    "derivation_size",
    "universe_at_stage",
]

RULES = (
    "AX", "MEM", "WKN", "CUT",
    "AND_L1", "AND_L2", "AND_R",
    "NEG_L", "NEG_R", "NEG_NEG_L", "NEG_NEG_R",
    "K",
)

RULE_ARITY = {
    "AX": 0, "MEM": 0,
    "WKN": 1, "CUT": 2,
    "AND_L1": 1, "AND_L2": 1, "AND_R": 2,
    "NEG_L": 1, "NEG_R": 1, "NEG_NEG_L": 1, "NEG_NEG_R": 1,
    "K": 1,
}

_MAX_UNIVERSE = 62  # sequent sides are int64 bitmasks over the universe


class UniverseError(ValueError):
    """A sequent mentions formulas outside the saturation universe."""


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    premises: tuple[Sequent, ...]
    conclusion: Sequent
    principal: tuple[Formula, ...] = ()


@dataclass(frozen=True)
class DerivationNode:
    """A derivation tree node; children's conclusions are the premises."""

    rule: str
    conclusion: Sequent
    children: tuple["DerivationNode", ...] = ()


def derivation_size(node: DerivationNode) -> int:
    return 1 + sum(derivation_size(c) for c in node.children)


# ---------------------------------------------------------------------------
# Rule instantiation over concrete premises (used by tests and by callers
# that want to explore the calculus; the saturation engine below has its own
# bitmask implementation of the same schemas)
# ---------------------------------------------------------------------------


def _check_premises(premises, universe):
    for p in premises:
        if not p.formulas <= universe:
            raise UniverseError(f"premise {p} not within the universe")


def rule_conclusions(
    rule: str,
    premises: Iterable[Sequent],
    universe: frozenset[Formula],
) -> list[RuleInstance]:
    """All instantiations of the rule on the given premises whose conclusion
    stays within the universe.

    Weakening yields single-formula proper extensions only (iterated
    weakening is the antichain's job); the membership axiom is produced with
    an empty antecedent only (larger antecedents are weakenings).
    """
    premises = tuple(premises)
    if rule not in RULE_ARITY:
        raise ValueError(f"unknown rule {rule!r}")
    if len(premises) != RULE_ARITY[rule]:
        raise ValueError(f"{rule} takes {RULE_ARITY[rule]} premises, got {len(premises)}")
    _check_premises(premises, universe)
    out: list[RuleInstance] = []
    seen: set[Sequent] = set()

    def add(conclusion: Sequent, principal: tuple[Formula, ...]):
        if conclusion not in seen:
            seen.add(conclusion)
            out.append(RuleInstance(rule, premises, conclusion, principal))

    uni = sorted_formulas(universe)
    if rule == "AX":
        for a in uni:
            add(Sequent({a}, {a}), (a,))
    elif rule == "MEM":
        for f in uni:
            if isinstance(f, Box) and Not(f) in universe:
                add(Sequent((), {f, Not(f)}), (f.inner,))
    elif rule == "WKN":
        (p,) = premises
        for f in uni:
            if f not in p.antecedent:
                add(Sequent(p.antecedent | {f}, p.succedent), (f,))
            if f not in p.succedent:
                add(Sequent(p.antecedent, p.succedent | {f}), (f,))
    elif rule == "CUT":
        p1, p2 = premises
        for a in sorted_formulas(p1.succedent & p2.antecedent):
            for d1 in (p1.succedent - {a}, p1.succedent):
                for g2 in (p2.antecedent - {a}, p2.antecedent):
                    add(Sequent(p1.antecedent | g2, d1 | p2.succedent), (a,))
    elif rule in ("AND_L1", "AND_L2"):
        (p,) = premises
        for f in uni:
            if not isinstance(f, And):
                continue
            a = f.left if rule == "AND_L1" else f.right
            if a not in p.antecedent:
                continue
            for g in (p.antecedent - {a}, p.antecedent):
                add(Sequent(g | {f}, p.succedent), (f.left, f.right))
    elif rule == "AND_R":
        p1, p2 = premises
        if p1.antecedent == p2.antecedent:
            for f in uni:
                if not isinstance(f, And):
                    continue
                a, b = f.left, f.right
                if a not in p1.succedent or b not in p2.succedent:
                    continue
                for d1 in (p1.succedent - {a}, p1.succedent):
                    for d2 in (p2.succedent - {b}, p2.succedent):
                        if d1 == d2:
                            add(Sequent(p1.antecedent, d1 | {f}), (a, b))
    elif rule == "NEG_L":
        (p,) = premises
        for a in sorted_formulas(p.succedent):
            if Not(a) not in universe:
                continue
            for d in (p.succedent - {a}, p.succedent):
                add(Sequent(p.antecedent | {Not(a)}, d), (a,))
    elif rule == "NEG_R":
        (p,) = premises
        if len(p.antecedent) == 1:
            (a,) = p.antecedent
            if Not(a) in universe and all(Not(d) in universe for d in p.succedent):
                add(Sequent({Not(d) for d in p.succedent}, {Not(a)}), (a,))
    elif rule == "NEG_NEG_L":
        (p,) = premises
        for a in sorted_formulas(p.antecedent):
            if Not(Not(a)) not in universe:
                continue
            for g in (p.antecedent - {a}, p.antecedent):
                add(Sequent(g | {Not(Not(a))}, p.succedent), (a,))
    elif rule == "NEG_NEG_R":
        (p,) = premises
        for a in sorted_formulas(p.succedent):
            if Not(Not(a)) not in universe:
                continue
            for d in (p.succedent - {a}, p.succedent):
                add(Sequent(p.antecedent, d | {Not(Not(a))}), (a,))
    elif rule == "K":
        (p,) = premises
        if len(p.succedent) == 1:
            (a,) = p.succedent
            if Box(a) in universe and all(Box(g) in universe for g in p.antecedent):
                add(Sequent({Box(g) for g in p.antecedent}, {Box(a)}), (a,))
    return out


# ---------------------------------------------------------------------------
# Independent schema checker (no shared code with the saturation engine)
# ---------------------------------------------------------------------------


def check_rule_application(
    rule: str, premises: tuple[Sequent, ...], conclusion: Sequent
) -> bool:
    """Whether conclusion is a literal schema instance of the rule on the
    given premises.  Weakening may add any number of formulas on both sides
    in one step; the membership axiom allows any antecedent."""
    if rule not in RULE_ARITY or len(premises) != RULE_ARITY[rule]:
        return False
    g, d = conclusion.antecedent, conclusion.succedent
    if rule == "AX":
        return len(g) == 1 and g == d
    if rule == "MEM":
        return any(
            isinstance(f, Box) and d == frozenset((f, Not(f))) for f in d)
    if rule == "WKN":
        return premises[0].is_subsequent_of(conclusion)
    if rule == "CUT":
        p1, p2 = premises
        for a in p1.succedent & p2.antecedent:
            for d1 in (p1.succedent - {a}, p1.succedent):
                for g2 in (p2.antecedent - {a}, p2.antecedent):
                    if g == p1.antecedent | g2 and d == d1 | p2.succedent:
                        return True
        return False
    if rule in ("AND_L1", "AND_L2"):
        (p,) = premises
        if p.succedent != d:
            return False
        for f in g:
            if not isinstance(f, And):
                continue
            a = f.left if rule == "AND_L1" else f.right
            for base in (g - {f}, g):
                if p.antecedent == base | {a}:
                    return True
        return False
    if rule == "AND_R":
        p1, p2 = premises
        if p1.antecedent != g or p2.antecedent != g:
            return False
        for f in d:
            if not isinstance(f, And):
                continue
            for base in (d - {f}, d):
                if p1.succedent == base | {f.left} and p2.succedent == base | {f.right}:
                    return True
        return False
    if rule == "NEG_L":
        (p,) = premises
        for f in g:
            if not isinstance(f, Not):
                continue
            for base in (g - {f}, g):
                if p.antecedent == base and p.succedent == d | {f.inner}:
                    return True
        return False
    if rule == "NEG_R":
        (p,) = premises
        if len(p.antecedent) != 1:
            return False
        (a,) = p.antecedent
        return g == frozenset(Not(x) for x in p.succedent) and d == frozenset((Not(a),))
    if rule == "NEG_NEG_L":
        (p,) = premises
        if p.succedent != d:
            return False
        for f in g:
            if isinstance(f, Not) and isinstance(f.inner, Not):
                for base in (g - {f}, g):
                    if p.antecedent == base | {f.inner.inner}:
                        return True
        return False
    if rule == "NEG_NEG_R":
        (p,) = premises
        if p.antecedent != g:
            return False
        for f in d:
            if isinstance(f, Not) and isinstance(f.inner, Not):
                for base in (d - {f}, d):
                    if p.succedent == base | {f.inner.inner}:
                        return True
        return False
    if rule == "K":
        (p,) = premises
        if len(p.succedent) != 1:
            return False
        (a,) = p.succedent
        return (
            g == frozenset(Box(x) for x in p.antecedent)
            and d == frozenset((Box(a),))
        )
    return False


def check_derivation(node) -> bool:
    """Re-verify every node of a derivation tree against the rule schemas.

    Returns False (never raises) on malformed trees.  Independent of the
    saturation engine.
    """
    try:
        if not isinstance(node, DerivationNode):
            return False
        if not all(check_derivation(c) for c in node.children):
            return False
        return check_rule_application(
            node.rule, tuple(c.conclusion for c in node.children), node.conclusion)
    except Exception:
        return False


# ---------------------------------------------------------------------------
# Derivation text format: one node per line, children indented two spaces
# ---------------------------------------------------------------------------


def derivation_to_text(node: DerivationNode) -> str:
    lines: list[str] = []

    def walk(n: DerivationNode, depth: int):
        lines.append("  " * depth + f"{n.rule}: {render_sequent(n.conclusion)}")
        for c in n.children:
            walk(c, depth + 1)

    walk(node, 0)
    return "\n".join(lines)


def parse_derivation(text: str) -> DerivationNode:
    entries: list[tuple[int, str, Sequent]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2:
            raise ValueError(f"line {lineno}: odd indentation")
        rule, sep, seq_text = raw.strip().partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: missing ':' after rule name")
        entries.append((indent // 2, rule.strip(), parse_sequent(seq_text.strip())))
    if not entries:
        raise ValueError("empty derivation text")

    def build(start: int, depth: int) -> tuple[DerivationNode, int]:
        d, rule, seq = entries[start]
        if d != depth:
            raise ValueError("inconsistent indentation")
        children = []
        i = start + 1
        while i < len(entries) and entries[i][0] > depth:
            child, i = build(i, depth + 1)
            children.append(child)
        return DerivationNode(rule, seq, tuple(children)), i

    root, end = build(0, 0)
    if end != len(entries):
        raise ValueError("multiple roots in derivation text")
    return root


# ---------------------------------------------------------------------------
# Saturation engine
# ---------------------------------------------------------------------------


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Tables:
    """Structural index of the universe, for bitmask rule application."""

    def __init__(self, formulas: list[Formula]):
        self.formulas = formulas
        index = {f: i for i, f in enumerate(formulas)}
        self.index = index
        n = len(formulas)
        self.neg_of = [index.get(Not(f), -1) for f in formulas]
        self.box_of = [index.get(Box(f), -1) for f in formulas]
        self.and_left = []
        self.and_right = []
        self.and_pairs = []
        self.negneg = []
        self.mem_pairs = []
        for i, f in enumerate(formulas):
            if isinstance(f, And):
                self.and_left.append((index[f.left], i))
                self.and_right.append((index[f.right], i))
                self.and_pairs.append((index[f.left], index[f.right], i))
            elif isinstance(f, Not) and isinstance(f.inner, Not):
                self.negneg.append((index[f.inner.inner], i))
            elif isinstance(f, Box) and self.neg_of[i] >= 0:
                self.mem_pairs.append((i, self.neg_of[i]))

    def neg_mask(self, mask: int) -> int | None:
        out = 0
        for b in _iter_bits(mask):
            nb = self.neg_of[b]
            if nb < 0:
                return None
            out |= 1 << nb
        return out

    def box_mask(self, mask: int) -> int | None:
        out = 0
        for b in _iter_bits(mask):
            bb = self.box_of[b]
            if bb < 0:
                return None
            out |= 1 << bb
        return out


@dataclass(frozen=True)
class _Instance:
    """Provenance record in bitmask form: the literal schema premises and,
    for each, the recorded minimal member that subsumes it."""

    rule: str
    premises: tuple[tuple[int, int], ...]
    support: tuple[tuple[int, int], ...]
    principal: tuple[int, ...] = ()


_DEAD = 1 << 62  # sentinel bit outside any universe position


class DerivableSet:
    """Saturation result: minimal derivable sequents over a finite universe.

    A sequent is derivable iff some recorded member is componentwise
    contained in it (weakening closure).  Immutable once returned by
    saturate(); queries are thread-safe.
    """

    def __init__(self, formulas: list[Formula], reached_fixpoint: bool, steps_used: int,
                 gs: np.ndarray, ds: np.ndarray, count: int,
                 provenance: dict[tuple[int, int], _Instance]):
        self._formulas = formulas
        self._index = {f: i for i, f in enumerate(formulas)}
        self.reached_fixpoint = reached_fixpoint
        self.steps_used = steps_used
        self._gs = gs[:count]
        self._ds = ds[:count]
        self._provenance = provenance

    @property
    def universe(self) -> frozenset[Formula]:
        return frozenset(self._formulas)

    def _to_masks(self, seq: Sequent) -> tuple[int, int]:
        g = d = 0
        try:
            for f in seq.antecedent:
                g |= 1 << self._index[f]
            for f in seq.succedent:
                d |= 1 << self._index[f]
        except KeyError as e:
            raise UniverseError(f"formula {e.args[0]} outside the universe") from e
        return g, d

    def _to_sequent(self, g: int, d: int) -> Sequent:
        fs = self._formulas
        return Sequent(
            (fs[b] for b in _iter_bits(g)),
            (fs[b] for b in _iter_bits(d)),
        )

    def _first_subsumer(self, g: int, d: int) -> int:
        hits = ((self._gs & ~g) | (self._ds & ~d)) == 0
        if not hits.any():
            return -1
        return int(np.argmax(hits))

    def contains(self, seq: Sequent) -> bool:
        """Derivability of seq (within the universe) via weakening closure."""
        g, d = self._to_masks(seq)
        return self._first_subsumer(g, d) >= 0

    def minimal_sequents(self) -> list[Sequent]:
        """The antichain, in insertion order."""
        out = []
        for i in range(len(self._gs)):
            if int(self._gs[i]) & _DEAD:
                continue
            out.append(self._to_sequent(int(self._gs[i]), int(self._ds[i])))
        return out

    @property
    def minimal(self) -> frozenset[Sequent]:
        return frozenset(self.minimal_sequents())

    def extract_derivation(self, seq: Sequent) -> DerivationNode:
        """Rebuild a derivation tree for a derivable sequent from recorded
        provenance, appending a final weakening when seq is a proper
        weakening of the recorded member."""
        g, d = self._to_masks(seq)
        row = self._first_subsumer(g, d)
        if row < 0:
            raise ValueError(f"{seq} is not recorded as derivable")
        memo: dict[tuple[int, int], DerivationNode] = {}

        def build(m: tuple[int, int]) -> DerivationNode:
            node = memo.get(m)
            if node is not None:
                return node
            inst = self._provenance[m]
            children = []
            for premise, support in zip(inst.premises, inst.support):
                child = build(support)
                if support != premise:
                    child = DerivationNode("WKN", self._to_sequent(*premise), (child,))
                children.append(child)
            node = DerivationNode(inst.rule, self._to_sequent(*m), tuple(children))
            memo[m] = node
            return node

        member = (int(self._gs[row]), int(self._ds[row]))
        node = build(member)
        if member != (g, d):
            node = DerivationNode("WKN", self._to_sequent(g, d), (node,))
        return node


class _Saturator:
    def __init__(self, tables: _Tables, budget: Optional[int]):
        self.t = tables
        self.budget = budget
        self.steps = 0
        cap = 64
        self.gs = np.full(cap, _DEAD, dtype=np.int64)
        self.ds = np.zeros(cap, dtype=np.int64)
        self.count = 0
        self.alive: list[bool] = []
        self.provenance: dict[tuple[int, int], _Instance] = {}
        # Unary work drains before binary work, so provenance follows the
        # cheap single-premise chains and cut only contributes what they
        # cannot reach.
        self.unary_work: deque[int] = deque()
        self.binary_work: deque[int] = deque()
        self.out_of_budget = False

    def _grow(self):
        cap = len(self.gs) * 2
        gs = np.full(cap, _DEAD, dtype=np.int64)
        ds = np.zeros(cap, dtype=np.int64)
        gs[: self.count] = self.gs[: self.count]
        ds[: self.count] = self.ds[: self.count]
        self.gs, self.ds = gs, ds

    def spend(self) -> bool:
        """Account one candidate; False when the budget just ran out."""
        self.steps += 1
        if self.budget is not None and self.steps > self.budget:
            self.out_of_budget = True
            return False
        return True

    def insert(self, g: int, d: int, inst: _Instance) -> None:
        n = self.count
        view_g, view_d = self.gs[:n], self.ds[:n]
        if n and bool((((view_g & ~g) | (view_d & ~d)) == 0).any()):
            return  # subsumed by an existing member
        if n:
            dead = ((g & ~view_g) | (d & ~view_d)) == 0
            for row in np.flatnonzero(dead):
                view_g[row] = _DEAD
                view_d[row] = 0
                self.alive[row] = False
        if n == len(self.gs):
            self._grow()
        self.gs[n] = g
        self.ds[n] = d
        self.alive.append(True)
        self.count += 1
        self.provenance[(g, d)] = inst
        self.unary_work.append(n)
        self.binary_work.append(n)

    # -- rule generation on one member (g, d) ------------------------------

    def unary_rules(self, g: int, d: int):
        t = self.t
        m = (g, d)
        for a in _iter_bits(d):  # NEG_L
            na = t.neg_of[a]
            if na < 0:
                continue
            if not self.spend():
                return
            self.insert(g | 1 << na, d & ~(1 << a),
                        _Instance("NEG_L", (m,), (m,), (a,)))
        for a, andi in t.and_left:  # AND_L1
            if not g >> a & 1:
                continue
            if not self.spend():
                return
            self.insert((g & ~(1 << a)) | 1 << andi, d,
                        _Instance("AND_L1", (m,), (m,), (andi,)))
        for b, andi in t.and_right:  # AND_L2
            if not g >> b & 1:
                continue
            if not self.spend():
                return
            self.insert((g & ~(1 << b)) | 1 << andi, d,
                        _Instance("AND_L2", (m,), (m,), (andi,)))
        for a, nn in t.negneg:  # NEG_NEG_L / NEG_NEG_R
            if g >> a & 1:
                if not self.spend():
                    return
                self.insert((g & ~(1 << a)) | 1 << nn, d,
                            _Instance("NEG_NEG_L", (m,), (m,), (a,)))
            if d >> a & 1:
                if not self.spend():
                    return
                self.insert(g, (d & ~(1 << a)) | 1 << nn,
                            _Instance("NEG_NEG_R", (m,), (m,), (a,)))
        if g.bit_count() <= 1:  # NEG_R (singleton antecedent schema)
            nd = t.neg_mask(d)
            if nd is not None:
                if g:
                    (a,) = _iter_bits(g)
                    targets = [a] if t.neg_of[a] >= 0 else []
                else:
                    targets = [a for a in range(len(t.formulas)) if t.neg_of[a] >= 0]
                for a in targets:
                    if not self.spend():
                        return
                    premise = (1 << a, d)  # weakening of m when g is empty
                    self.insert(nd, 1 << t.neg_of[a],
                                _Instance("NEG_R", (premise,), (m,), (a,)))
        if d.bit_count() <= 1:  # K (singleton succedent schema)
            bg = t.box_mask(g)
            if bg is not None:
                if d:
                    (a,) = _iter_bits(d)
                    targets = [a] if t.box_of[a] >= 0 else []
                else:
                    targets = [a for a in range(len(t.formulas)) if t.box_of[a] >= 0]
                for a in targets:
                    if not self.spend():
                        return
                    premise = (g, 1 << a)
                    self.insert(bg, 1 << t.box_of[a],
                                _Instance("K", (premise,), (m,), (a,)))

    def binary_rules(self, p1: tuple[int, int], p2: tuple[int, int]):
        t = self.t
        g1, d1 = p1
        g2, d2 = p2
        for a in _iter_bits(d1 & g2):  # CUT
            if not self.spend():
                return
            self.insert(g1 | (g2 & ~(1 << a)), (d1 & ~(1 << a)) | d2,
                        _Instance("CUT", (p1, p2), (p1, p2), (a,)))
        for a, b, andi in t.and_pairs:  # AND_R
            if not (d1 >> a & 1 and d2 >> b & 1):
                continue
            if not self.spend():
                return
            gg = g1 | g2
            dd = (d1 & ~(1 << a)) | (d2 & ~(1 << b))
            prem1 = (gg, dd | 1 << a)
            prem2 = (gg, dd | 1 << b)
            self.insert(gg, dd | 1 << andi,
                        _Instance("AND_R", (prem1, prem2), (p1, p2), (andi,)))

    def run(self):
        t = self.t
        n_formulas = len(t.formulas)
        for a in range(n_formulas):  # AX seeds
            if not self.spend():
                return
            self.insert(1 << a, 1 << a, _Instance("AX", (), (), (a,)))
        for box_i, negbox_i in t.mem_pairs:  # MEM seeds, empty antecedent
            if not self.spend():
                return
            self.insert(0, (1 << box_i) | (1 << negbox_i),
                        _Instance("MEM", (), (), (box_i,)))
        while self.unary_work or self.binary_work:
            if self.out_of_budget:
                return
            if self.unary_work:
                row = self.unary_work.popleft()
                if not self.alive[row]:
                    continue
                self.unary_rules(int(self.gs[row]), int(self.ds[row]))
                continue
            row = self.binary_work.popleft()
            if not self.alive[row]:
                continue
            g, d = int(self.gs[row]), int(self.ds[row])
            # binary rules against every currently recorded member, both
            # orders; pairs with members inserted later are handled when
            # those members are processed
            for other in range(self.count):
                if not self.alive[other]:
                    continue
                if not self.alive[row]:
                    break  # this member was just subsumed away
                og, od = int(self.gs[other]), int(self.ds[other])
                self.binary_rules((g, d), (og, od))
                if self.out_of_budget:
                    return
                if (og, od) != (g, d):
                    self.binary_rules((og, od), (g, d))
                    if self.out_of_budget:
                        return


def saturate(universe: Iterable[Formula], budget: Optional[int] = None) -> DerivableSet:
    """Forward-saturate the calculus within a subformula-closed universe.

    Seeds all identity axioms and all empty-antecedent membership axioms,
    then applies every rule to the antichain until fixpoint or until the
    step budget (number of generated candidate conclusions) runs out; the
    result records whether the fixpoint was reached.
    """
    fs = frozenset(universe)
    for f in fs:
        missing = subformulas(f) - fs
        if missing:
            raise ValueError(
                f"universe not closed under subformulas: missing {sorted_formulas(missing)[0]}")
    formulas = sorted_formulas(fs)
    if len(formulas) > _MAX_UNIVERSE:
        raise ValueError(f"universe too large ({len(formulas)} > {_MAX_UNIVERSE})")
    sat = _Saturator(_Tables(formulas), budget)
    sat.run()
    return DerivableSet(
        formulas,
        reached_fixpoint=not sat.out_of_budget,
        steps_used=sat.steps,
        gs=sat.gs,
        ds=sat.ds,
        count=sat.count,
        provenance=sat.provenance,
    )


def extract_derivation(ds: DerivableSet, seq: Sequent) -> DerivationNode:
    return ds.extract_derivation(seq)


# ---------------------------------------------------------------------------
# Universe growth schedule
# ---------------------------------------------------------------------------


def universe_at_stage(seq: Sequent, stage: int) -> frozenset[Formula]:
    """Universe for proof search at a given stage.

    Stage 0 is the admissible closure of the goal's formulas.  Each later
    stage adds the next formula (over the goal's atoms, in canonical
    enumeration order) not yet present, plus the negation of every boxed
    formula present (enabling membership axioms), re-closing admissibly.
    The schedule is deterministic, monotone, and exhaustive in the limit.
    """
    u = admissible_closure(seq.formulas)
    atoms = tuple(sorted(seq.atoms())) or ("p",)
    idx = 0
    for _ in range(stage):
        while True:
            f = enumerate_formula(atoms, idx)
            idx += 1
            if f not in u:
                break
        u = admissible_closure(u | {f})
        u = admissible_closure(u | {Not(f) for f in u if isinstance(f, Box)})
    return u
