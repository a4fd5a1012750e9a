"""Top-level decision procedure.

A sequent is decided by running two searches as interleaved units (a strict
round-robin realization of two parallel procedures):

  * proof search: forward saturation over a growing formula universe (one
    saturation per stage), returning a checkable derivation;
  * countermodel search: exhaustive scan of all finite structures over the
    goal's atoms, by increasing world count, returning a structure and world
    falsifying the goal.

The first conclusive branch wins.  Both kinds of witness are re-verified
through independent code paths before being returned: derivations through
the schema checker, countermodels through the scalar reference evaluator.
If both budgets run out the verdict is an honest Unknown.

When the goal is a single formula (empty antecedent, singleton succedent),
exhausting the model search up to 2^n worlds (n the admissible-closure size)
certifies validity outright: any countermodel collapses to one of at most
2^n worlds.  The model branch then stops and only the proof object is still
searched for.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

from . import kernels
from .calculus import (
    DerivationNode,
    check_derivation,
    saturate,
    universe_at_stage,
)
from .formula import Formula, Sequent, admissible_closure, sorted_formulas
from .semantics import find_failing_world, holds_at
from .structure import (
    QuantumModalStructure,
    closed_masks,
    column_patterns,
    enumerate_structures,
    iter_rq_bits,
    rm_matrix_from_index,
    row_masks,
    rq_components,
    rq_matrix_from_bits,
    validate,
    valuation_from_index,
)

__all__ = [
    "Budgets",
    "Report",
    "CountermodelWitness",
    "Theorem",
    "NonTheorem",
    "Unknown",
    "Verdict",
    "fmp_bound",
    "prove",
    "refute",
    "refute_literal",
    "decide",
]


@dataclass(frozen=True)
class Budgets:
    """Resource limits for decide(); all searches stay within them."""

    max_stage: int = 2
    max_worlds: int = 4
    step_limit: Optional[int] = 200_000  # per saturation stage
    wall_clock: Optional[float] = None  # seconds, checked between units

    def __post_init__(self):
        if self.max_stage < 0 or self.max_worlds < 0:
            raise ValueError("budgets must be >= 0")


@dataclass(frozen=True)
class Report:
    """What was tried; attached to every verdict."""

    stages_completed: int = 0
    worlds_exhausted: int = 0
    fmp_bound: Optional[int] = None
    fmp_certified: bool = False
    fixpoints: tuple[bool, ...] = ()
    timed_out: bool = False


@dataclass(frozen=True)
class CountermodelWitness:
    structure: QuantumModalStructure
    world: int
    target: Sequent  # the (sub)sequent this witness falsifies


@dataclass(frozen=True)
class Theorem:
    derivation: DerivationNode
    report: Report
    exit_code = 0
    kind = "theorem"


@dataclass(frozen=True)
class NonTheorem:
    witnesses: tuple[CountermodelWitness, ...]
    report: Report
    exit_code = 1
    kind = "non-theorem"

    @property
    def witness(self) -> CountermodelWitness:
        return self.witnesses[0]


@dataclass(frozen=True)
class Unknown:
    report: Report
    exit_code = 2
    kind = "unknown"


Verdict = Theorem | NonTheorem | Unknown


def fmp_bound(seq: Sequent) -> int:
    """2^n for n the size of the admissible closure of the goal's formulas:
    the world count at which model search becomes exhaustive for a
    single-formula goal."""
    return 2 ** len(admissible_closure(seq.formulas))


def _is_single_formula_goal(seq: Sequent) -> bool:
    return not seq.antecedent and len(seq.succedent) == 1


# ---------------------------------------------------------------------------
# Proof branch
# ---------------------------------------------------------------------------


def _prove_stage(
    seq: Sequent, stage: int, step_limit: Optional[int]
) -> tuple[Optional[DerivationNode], bool]:
    universe = universe_at_stage(seq, stage)
    ds = saturate(universe, step_limit)
    if ds.contains(seq):
        node = ds.extract_derivation(seq)
        if not check_derivation(node):
            raise AssertionError(f"extracted derivation failed the checker:\n{node}")
        if node.conclusion != seq:
            raise AssertionError("extracted derivation does not end in the goal")
        return node, ds.reached_fixpoint
    return None, ds.reached_fixpoint


def prove(seq: Sequent, budgets: Budgets = Budgets()) -> Optional[DerivationNode]:
    """Search successive universe stages for a derivation of seq; the result
    has passed the independent checker."""
    for stage in range(budgets.max_stage + 1):
        node, _ = _prove_stage(seq, stage, budgets.step_limit)
        if node is not None:
            return node
    return None


# ---------------------------------------------------------------------------
# Model branch
# ---------------------------------------------------------------------------


def _refute_at(
    seq: Sequent, k: int, atom_order: tuple[str, ...]
) -> Optional[tuple[QuantumModalStructure, int]]:
    """First countermodel with exactly k worlds, in canonical enumeration
    order, or None.  Scans the (rm, valuation) grid per frame with the
    accelerated kernels; the hit is re-verified with the reference
    evaluator before being returned."""
    program = kernels.compile_program(sorted_formulas(seq.formulas), atom_order)
    gamma, delta = kernels.sequent_slots(program, seq)
    for bits in iter_rq_bits(k):
        rq = rq_matrix_from_bits(bits, k)
        neighbors = row_masks(rq)
        hit = kernels.scan_rq_block(neighbors, rq, program, gamma, delta,
                                    use_rm=program.has_box)
        if hit is None:
            continue
        m_idx, v_idx, world = hit
        col_pats = column_patterns(rq_components(neighbors))
        rm = rm_matrix_from_index(m_idx, col_pats, k)
        closed = closed_masks(neighbors)
        valuation = valuation_from_index(v_idx, closed, list(atom_order), k)
        s = QuantumModalStructure(k, rq, rm, valuation)
        _verify_witness(s, world, seq)
        return s, world
    return None


def _verify_witness(s: QuantumModalStructure, world: int, seq: Sequent) -> None:
    violations = validate(s)
    if violations:
        raise AssertionError(f"countermodel fails validation: {violations[0]}")
    if holds_at(s, world, seq):
        raise AssertionError(f"countermodel does not falsify {seq} at world {world}")
    if find_failing_world(s, seq) != world:
        raise AssertionError("countermodel world is not the least failing world")


def refute(
    seq: Sequent,
    max_worlds: int,
    dedup: bool = False,
    atoms: Optional[tuple[str, ...]] = None,
) -> Optional[tuple[QuantumModalStructure, int]]:
    """First (structure, world) falsifying seq among all structures with up
    to max_worlds worlds over the goal's atoms, in canonical enumeration
    order; None when the search space is exhausted.

    With dedup=True only isomorphism-class representatives are scanned
    (through the plain enumeration stream; a correctness-preserving but
    slower performance lever).
    """
    atom_order = tuple(sorted(atoms if atoms is not None else seq.atoms()))
    for k in range(1, max_worlds + 1):
        if dedup:
            for s in enumerate_structures(k, atom_order, dedup=True):
                w = find_failing_world(s, seq)
                if w is not None:
                    return s, w
        else:
            hit = _refute_at(seq, k, atom_order)
            if hit is not None:
                return hit
    return None


def refute_literal(
    seq: Sequent, max_worlds: int, dedup: bool = False
) -> Optional[tuple[CountermodelWitness, ...]]:
    """Refutation under the literal succedent reading: one countermodel per
    succedent member (each refuting antecedent |- member), all required.

    An empty succedent is vacuously refuted (no member can follow), with an
    empty witness tuple.
    """
    witnesses = []
    for d in sorted_formulas(seq.succedent):
        sub = Sequent(seq.antecedent, (d,))
        hit = refute(sub, max_worlds, dedup=dedup)
        if hit is None:
            return None
        witnesses.append(CountermodelWitness(hit[0], hit[1], sub))
    return tuple(witnesses)


# ---------------------------------------------------------------------------
# The interleaved procedure
# ---------------------------------------------------------------------------


def decide(
    seq: Sequent,
    budgets: Budgets = Budgets(),
    literal_delta: bool = False,
    dedup: bool = False,
) -> Verdict:
    """Decide seq by strict round-robin between one proof-search unit (a
    saturation stage) and one model-search unit (a world count); the first
    conclusive branch wins.  Unknown reports the exhausted budgets."""
    start = time.monotonic()
    bound = fmp_bound(seq) if _is_single_formula_goal(seq) else None
    report = Report(fmp_bound=bound)
    atom_order = tuple(sorted(seq.atoms()))
    pending_literal: dict[Formula, CountermodelWitness] = {}

    def timed_out() -> bool:
        return budgets.wall_clock is not None and time.monotonic() - start > budgets.wall_clock

    def refute_unit(k: int) -> Optional[NonTheorem]:
        nonlocal report
        if literal_delta:
            for d in sorted_formulas(seq.succedent):
                if d in pending_literal:
                    continue
                sub = Sequent(seq.antecedent, (d,))
                hit = (_refute_at(sub, k, tuple(sorted(sub.atoms()))) if not dedup
                       else _dedup_refute_at(sub, k))
                if hit is not None:
                    pending_literal[d] = CountermodelWitness(hit[0], hit[1], sub)
            report = replace(report, worlds_exhausted=k)
            if len(pending_literal) == len(seq.succedent):
                ordered = tuple(pending_literal[d] for d in sorted_formulas(seq.succedent))
                return NonTheorem(ordered, report)
            return None
        hit = _refute_at(seq, k, atom_order) if not dedup else _dedup_refute_at(seq, k)
        if hit is not None:
            return NonTheorem((CountermodelWitness(hit[0], hit[1], seq),), report)
        report = replace(report, worlds_exhausted=k)
        return None

    def _dedup_refute_at(target: Sequent, k: int):
        for s in enumerate_structures(k, tuple(sorted(target.atoms())), dedup=True):
            w = find_failing_world(s, target)
            if w is not None:
                return s, w
        return None

    stages = list(range(budgets.max_stage + 1))
    worlds = list(range(1, budgets.max_worlds + 1))
    fixpoints: list[bool] = []
    while stages or worlds:
        if timed_out():
            return Unknown(replace(report, fixpoints=tuple(fixpoints), timed_out=True))
        if stages:
            stage = stages.pop(0)
            node, fixed = _prove_stage(seq, stage, budgets.step_limit)
            fixpoints.append(fixed)
            report = replace(report, stages_completed=stage + 1, fixpoints=tuple(fixpoints))
            if node is not None:
                return Theorem(node, report)
        if timed_out():
            return Unknown(replace(report, timed_out=True))
        if worlds:
            if report.fmp_certified:
                worlds.clear()
                continue
            k = worlds.pop(0)
            result = refute_unit(k)
            if result is not None:
                return result
            if bound is not None and report.worlds_exhausted >= bound:
                # Exhaustive up to the collapse bound: valid, keep searching
                # only for the proof object.
                report = replace(report, fmp_certified=True)
    return Unknown(replace(report, fixpoints=tuple(fixpoints)))
