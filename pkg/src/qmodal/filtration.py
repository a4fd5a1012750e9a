"""Collapse of a structure by truth-agreement on an admissible formula set.

Worlds agreeing on the truth of every member of an admissible set sigma are
identified; the quotient carries

  * rq*: classes related iff some members are,
  * rm*: [i] rm* [l] iff every boxed member []a of sigma true at i has a
    true at l (computed from class representatives; well-definedness is
    asserted, not assumed),
  * valuation*: the classes of worlds in the source valuation, for atoms in
    sigma; other atoms denote the empty set.

The quotient of a valid structure is again a valid structure, has at most
2^|sigma| worlds, and preserves the truth of every sigma member; these three
facts are what verify_collapse checks on an instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formula import Box, Atom, Formula, admissible_closure, sorted_formulas
from .semantics import evaluate, sat_vector
from .structure import QuantumModalStructure, validate, Violation

__all__ = [
    "Collapse",
    "CollapseReport",
    "NotAdmissibleError",
    "truth_profiles",
    "collapse",
    "verify_collapse",
]


class NotAdmissibleError(ValueError):
    """sigma must be closed under subformulas and negation of its atoms."""


def truth_profiles(
    s: QuantumModalStructure, sigma: frozenset[Formula]
) -> dict[int, tuple[bool, ...]]:
    """Per-world truth profile over sigma in canonical formula order.

    Worlds with equal profiles form the classes of the collapse; with an
    empty sigma all worlds share the empty profile.
    """
    order = sorted_formulas(sigma)
    memo: dict = {}
    vectors = [sat_vector(s, f, memo) for f in order]
    return {
        w: tuple(bool(v[w]) for v in vectors)
        for w in range(s.world_count)
    }


@dataclass(frozen=True)
class Collapse:
    source: QuantumModalStructure
    sigma: frozenset[Formula]
    class_of: tuple[int, ...]  # world -> class index
    result: QuantumModalStructure

    def class_members(self, c: int) -> list[int]:
        return [w for w, cw in enumerate(self.class_of) if cw == c]


def collapse(s: QuantumModalStructure, sigma: frozenset[Formula]) -> Collapse:
    """Quotient s by truth-agreement on sigma (which must be admissible).

    Class indices follow the least source world of each class.
    """
    sigma = frozenset(sigma)
    if sigma != admissible_closure(sigma):
        raise NotAdmissibleError(
            "sigma is not admissible (not closed under subformulas and atom negation)")
    profiles = truth_profiles(s, sigma)
    class_index: dict[tuple[bool, ...], int] = {}
    class_of = []
    for w in range(s.world_count):
        p = profiles[w]
        if p not in class_index:
            class_index[p] = len(class_index)
        class_of.append(class_index[p])
    n = len(class_index)
    reps = [min(w for w in range(s.world_count) if class_of[w] == c) for c in range(n)]

    rq_star = np.zeros((n, n), dtype=bool)
    for i in range(s.world_count):
        for j in range(s.world_count):
            if s.rq[i, j]:
                rq_star[class_of[i], class_of[j]] = True

    boxed = [f for f in sorted_formulas(sigma) if isinstance(f, Box)]
    # Well-definedness check: the defining clause quantifies over a class
    # through one member, so all members must agree on each boxed formula.
    for c in range(n):
        members = [w for w in range(s.world_count) if class_of[w] == c]
        for f in boxed:
            truths = {evaluate(s, w, f) for w in members}
            if len(truths) != 1:
                raise AssertionError(
                    f"class {c} members disagree on {f}; collapse ill-defined")
    rm_star = np.zeros((n, n), dtype=bool)
    for ci in range(n):
        for cl in range(n):
            rm_star[ci, cl] = all(
                evaluate(s, reps[cl], f.inner)
                for f in boxed
                if evaluate(s, reps[ci], f)
            )

    valuation: dict[str, set[int]] = {}
    for f in sigma:
        if isinstance(f, Atom):
            valuation[f.name] = {
                class_of[w] for w in s.valuation.get(f.name, frozenset())}
    result = QuantumModalStructure(n, rq_star, rm_star, valuation)
    return Collapse(source=s, sigma=sigma, class_of=tuple(class_of), result=result)


@dataclass(frozen=True)
class CollapseReport:
    result_valid: bool
    size_bound_ok: bool
    truth_preserved: bool
    violations: tuple[Violation, ...]
    mismatches: tuple[tuple[Formula, int], ...]  # (formula, source world)

    @property
    def ok(self) -> bool:
        return self.result_valid and self.size_bound_ok and self.truth_preserved


def verify_collapse(c: Collapse) -> CollapseReport:
    """Check the three collapse facts on an instance: the result validates,
    |W*| <= 2^|sigma|, and every sigma member keeps its truth value at every
    source world's class."""
    violations = tuple(validate(c.result))
    size_ok = c.result.world_count <= 2 ** len(c.sigma)
    mismatches = []
    for f in sorted_formulas(c.sigma):
        for w in range(c.source.world_count):
            if evaluate(c.result, c.class_of[w], f) != evaluate(c.source, w, f):
                mismatches.append((f, w))
    return CollapseReport(
        result_valid=not violations,
        size_bound_ok=size_ok,
        truth_preserved=not mismatches,
        violations=violations,
        mismatches=tuple(mismatches),
    )
