"""Formula syntax: AST, concrete grammar, canonical enumeration, admissible closure.

The AST has exactly four constructors: atoms, conjunction, negation, and
necessity.  Disjunction and possibility exist only in the concrete syntax and
are desugared at parse time::

    a | b   ->   ~(~a & ~b)
    <> a    ->   ~[]~a

Grammar (precedence low to high, whitespace insignificant)::

    sequent  := formulas? "|-" formulas?
    formulas := formula ("," formula)*
    formula  := disj
    disj     := conj ("|" conj)*
    conj     := unary ("&" unary)*
    unary    := ("~" | "!" | "[]" | "<>") unary | atom | "(" formula ")"
    atom     := [a-z][a-z0-9_]*
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

__all__ = [
    "Atom",
    "And",
    "Not",
    "Box",
    "Formula",
    "Sequent",
    "ParseError",
    "parse",
    "parse_sequent",
    "render",
    "render_sequent",
    "size",
    "atoms_of",
    "subformulas",
    "admissible_closure",
    "enumerate_formula",
    "formula_key",
    "sorted_formulas",
]


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    inner: "Formula"


@dataclass(frozen=True)
class Box:
    inner: "Formula"


Formula = Union[Atom, And, Not, Box]

# Constructor rank used for the canonical ordering: Atom < Not < Box < And.
_RANK = {Atom: 0, Not: 1, Box: 2, And: 3}


def size(f: Formula) -> int:
    """Number of AST nodes."""
    if isinstance(f, Atom):
        return 1
    if isinstance(f, And):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.inner)


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset((f.name,))
    if isinstance(f, And):
        return atoms_of(f.left) | atoms_of(f.right)
    return atoms_of(f.inner)


def subformulas(f: Formula) -> frozenset[Formula]:
    """All subformulas of f, including f itself."""
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        if isinstance(g, And):
            stack.append(g.left)
            stack.append(g.right)
        elif isinstance(g, (Not, Box)):
            stack.append(g.inner)
    return frozenset(out)


def admissible_closure(seed: Iterable[Formula]) -> frozenset[Formula]:
    """Smallest superset of seed closed under subformulas and under negation
    of atomic members."""
    out: set[Formula] = set()
    for f in seed:
        out |= subformulas(f)
    for f in list(out):
        if isinstance(f, Atom):
            out.add(Not(f))
    return frozenset(out)


def formula_key(f: Formula):
    """Total-order key: size first, then constructor rank, then contents.

    Used everywhere a deterministic formula order is needed (set rendering,
    truth-profile columns, universe indexing).
    """
    if isinstance(f, Atom):
        return (1, 0, f.name)
    if isinstance(f, And):
        return (size(f), 3, formula_key(f.left), formula_key(f.right))
    rank = 1 if isinstance(f, Not) else 2
    return (size(f), rank, formula_key(f.inner))


def sorted_formulas(fs: Iterable[Formula]) -> list[Formula]:
    return sorted(fs, key=formula_key)


# ---------------------------------------------------------------------------
# Sequents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sequent:
    """A pair of finite formula sets; both sides have set semantics."""

    antecedent: frozenset[Formula]
    succedent: frozenset[Formula]

    def __init__(self, antecedent: Iterable[Formula] = (), succedent: Iterable[Formula] = ()):
        object.__setattr__(self, "antecedent", frozenset(antecedent))
        object.__setattr__(self, "succedent", frozenset(succedent))

    @property
    def formulas(self) -> frozenset[Formula]:
        return self.antecedent | self.succedent

    def atoms(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for f in self.formulas:
            out |= atoms_of(f)
        return out

    def is_subsequent_of(self, other: "Sequent") -> bool:
        """Componentwise inclusion; `other` is a weakening of self."""
        return self.antecedent <= other.antecedent and self.succedent <= other.succedent

    def __str__(self) -> str:
        return render_sequent(self)


# ---------------------------------------------------------------------------
# Rendering (minimal parenthesization; the inverse of parse)
# ---------------------------------------------------------------------------


def _render_tight(f: Formula) -> str:
    # Operand position of a unary operator: conjunctions need parens.
    if isinstance(f, And):
        return "(" + render(f) + ")"
    return render(f)


def render(f: Formula) -> str:
    """Concrete syntax for f with minimal parenthesization.

    parse(render(f)) is structurally equal to f.  Desugared disjunctions and
    diamonds are not re-sugared.
    """
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "~" + _render_tight(f.inner)
    if isinstance(f, Box):
        return "[]" + _render_tight(f.inner)
    # "&" is left-associative, so only a right And child needs parens.
    left = render(f.left)
    right = _render_tight(f.right) if isinstance(f.right, And) else render(f.right)
    return f"{left} & {right}"


def render_sequent(seq: Sequent) -> str:
    left = ", ".join(render(f) for f in sorted_formulas(seq.antecedent))
    right = ", ".join(render(f) for f in sorted_formulas(seq.succedent))
    if left and right:
        return f"{left} |- {right}"
    if left:
        return f"{left} |-"
    if right:
        return f"|- {right}"
    return "|-"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<atom>[a-z][a-z0-9_]*)
  | (?P<turnstile>\|-)
  | (?P<box>\[\])
  | (?P<diamond><>)
  | (?P<neg>[~!])
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<comma>,)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        return self.disj()

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "or":
            self.next()
            g = self.conj()
            f = Not(And(Not(f), Not(g)))
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "and":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, text, pos = self.tokens[self.i]
        if kind == "neg":
            self.next()
            return Not(self.unary())
        if kind == "box":
            self.next()
            return Box(self.unary())
        if kind == "diamond":
            self.next()
            return Not(Box(Not(self.unary())))
        if kind == "atom":
            self.next()
            return Atom(text)
        if kind == "lpar":
            self.next()
            f = self.formula()
            self.expect("rpar")
            return f
        raise ParseError(f"expected a formula, found {text or 'end of input'!r}", pos)

    def formula_list(self) -> list[Formula]:
        out = [self.formula()]
        while self.peek() == "comma":
            self.next()
            out.append(self.formula())
        return out

    def sequent(self) -> Sequent:
        antecedent: list[Formula] = []
        if self.peek() not in ("turnstile", "end"):
            antecedent = self.formula_list()
        self.expect("turnstile")
        succedent: list[Formula] = []
        if self.peek() != "end":
            succedent = self.formula_list()
        return Sequent(antecedent, succedent)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.expect("end")
    return f


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    seq = p.sequent()
    p.expect("end")
    return seq


# ---------------------------------------------------------------------------
# Canonical enumeration of all formulas over a fixed atom list
# ---------------------------------------------------------------------------

_COUNT_CACHE: dict[tuple[int, int], int] = {}


def _count(num_atoms: int, n: int) -> int:
    """Number of formulas of exactly n AST nodes over num_atoms atoms."""
    if n < 1:
        return 0
    if n == 1:
        return num_atoms
    key = (num_atoms, n)
    cached = _COUNT_CACHE.get(key)
    if cached is not None:
        return cached
    total = 2 * _count(num_atoms, n - 1)
    for ls in range(1, n - 1):
        total += _count(num_atoms, ls) * _count(num_atoms, n - 1 - ls)
    _COUNT_CACHE[key] = total
    return total


def _unrank(atoms: tuple[str, ...], n: int, i: int) -> Formula:
    # Within a size class the blocks come in constructor order:
    # atoms (n = 1 only), then Not, then Box, then And by left-subtree size.
    if n == 1:
        return Atom(atoms[i])
    c = _count(len(atoms), n - 1)
    if i < c:
        return Not(_unrank(atoms, n - 1, i))
    i -= c
    if i < c:
        return Box(_unrank(atoms, n - 1, i))
    i -= c
    for ls in range(1, n - 1):
        rs = n - 1 - ls
        block = _count(len(atoms), ls) * _count(len(atoms), rs)
        if i < block:
            rc = _count(len(atoms), rs)
            return And(_unrank(atoms, ls, i // rc), _unrank(atoms, rs, i % rc))
        i -= block
    raise AssertionError("unrank index out of block range")


def enumerate_formula(atoms: Iterable[str], index: int) -> Formula:
    """The index-th formula in the canonical numbering over the given atoms.

    The numbering is total, injective, and exhaustive: ordered by AST size,
    then by constructor (Atom < Not < Box < And), then recursively.  Index 0
    is the first atom.
    """
    atom_tuple = tuple(atoms)
    if not atom_tuple:
        raise ValueError("atom list must be non-empty")
    if index < 0:
        raise ValueError("index must be >= 0")
    n = 1
    while True:
        c = _count(len(atom_tuple), n)
        if index < c:
            return _unrank(atom_tuple, n, index)
        index -= c
        n += 1


def enumerate_formulas(atoms: Iterable[str]) -> Iterator[Formula]:
    """Infinite stream of all formulas in canonical order."""
    atom_tuple = tuple(atoms)
    i = 0
    while True:
        yield enumerate_formula(atom_tuple, i)
        i += 1
