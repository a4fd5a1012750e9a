"""Truth evaluation over quantum modal structures.

The truth clauses at a world i:

  a) atoms through the valuation,
  b) a conjunction holds iff both conjuncts hold,
  c) a negation ~a holds iff every R_Q-neighbour of i falsifies a,
  d) a necessity []a holds iff every R_M-successor of i satisfies a.

Two evaluators live here: `evaluate` is a direct scalar recursion on the
clauses (the reference used to re-verify witnesses), and `sat_vector` /
`sat_set` compute whole satisfaction sets bottom-up with numpy.  The
accelerated grid kernels are a third, independent path; tests tie all three
together.

Sequents are read POINTWISE: at each world, satisfying the whole antecedent
requires satisfying some succedent member.  Under the alternative literal
reading (some single succedent member follows from the antecedent across all
worlds) the membership axiom for boxed formulas is not valid, so the literal
reading is only exposed as an opt-in mode.
"""

from __future__ import annotations

import numpy as np

from .formula import And, Atom, Box, Formula, Not, Sequent
from .structure import QuantumModalStructure

__all__ = [
    "evaluate",
    "sat_set",
    "sat_vector",
    "holds_at",
    "holds_in",
    "find_failing_world",
]


def evaluate(s: QuantumModalStructure, world: int, f: Formula) -> bool:
    """Truth of f at a world, by direct recursion on the truth clauses."""
    if world < 0 or world >= s.world_count:
        raise IndexError(f"world {world} out of range")
    if isinstance(f, Atom):
        return world in s.valuation.get(f.name, frozenset())
    if isinstance(f, And):
        return evaluate(s, world, f.left) and evaluate(s, world, f.right)
    if isinstance(f, Not):
        return all(
            not evaluate(s, j, f.inner)
            for j in range(s.world_count)
            if s.rq[world, j]
        )
    if isinstance(f, Box):
        return all(
            evaluate(s, l, f.inner)
            for l in range(s.world_count)
            if s.rm[world, l]
        )
    raise TypeError(f"not a formula: {f!r}")


def sat_vector(s: QuantumModalStructure, f: Formula, _memo: dict | None = None) -> np.ndarray:
    """Boolean satisfaction vector over all worlds, computed bottom-up."""
    memo = {} if _memo is None else _memo
    got = memo.get(f)
    if got is not None:
        return got
    if isinstance(f, Atom):
        v = s.val_vector(f.name)
    elif isinstance(f, And):
        v = sat_vector(s, f.left, memo) & sat_vector(s, f.right, memo)
    elif isinstance(f, Not):
        inner = sat_vector(s, f.inner, memo)
        v = ~(s.rq & inner).any(axis=1)
    elif isinstance(f, Box):
        inner = sat_vector(s, f.inner, memo)
        v = ~(s.rm & ~inner).any(axis=1)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = v
    return v


def sat_set(s: QuantumModalStructure, f: Formula) -> frozenset[int]:
    """The worlds at which f is true."""
    return frozenset(int(w) for w in np.flatnonzero(sat_vector(s, f)))


def _failing_vector(s: QuantumModalStructure, seq: Sequent) -> np.ndarray:
    """Worlds where the whole antecedent holds and every succedent member
    fails (the pointwise failure set)."""
    memo: dict = {}
    fail = np.ones(s.world_count, dtype=bool)
    for g in seq.antecedent:
        fail &= sat_vector(s, g, memo)
    for d in seq.succedent:
        fail &= ~sat_vector(s, d, memo)
    return fail


def holds_at(s: QuantumModalStructure, world: int, seq: Sequent) -> bool:
    """Pointwise sequent truth at one world: antecedent satisfaction implies
    satisfaction of some succedent member.  An empty antecedent counts as
    satisfied; an empty succedent as unsatisfiable."""
    if world < 0 or world >= s.world_count:
        raise IndexError(f"world {world} out of range")
    if not all(evaluate(s, world, g) for g in seq.antecedent):
        return True
    return any(evaluate(s, world, d) for d in seq.succedent)


def holds_in(s: QuantumModalStructure, seq: Sequent, literal: bool = False) -> bool:
    """Sequent truth across the whole structure.

    Pointwise (default): holds_at is true at every world.  Literal mode:
    some single succedent member follows from the antecedent at every world.
    """
    if literal:
        memo: dict = {}
        gamma = np.ones(s.world_count, dtype=bool)
        for g in seq.antecedent:
            gamma &= sat_vector(s, g, memo)
        return any(
            bool(np.all(~gamma | sat_vector(s, d, memo)))
            for d in seq.succedent
        )
    return not _failing_vector(s, seq).any()


def find_failing_world(s: QuantumModalStructure, seq: Sequent) -> int | None:
    """Least world at which the sequent fails pointwise, or None."""
    fail = np.flatnonzero(_failing_vector(s, seq))
    return int(fail[0]) if len(fail) else None
