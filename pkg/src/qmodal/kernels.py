"""Accelerated grid evaluation for the countermodel search.

The model search scans, for each reflexive-symmetric frame (rq), the full
grid of (rm choice) x (valuation choice) in canonical enumeration order and
looks for the first world falsifying a sequent.  Formulas are compiled to a
small postfix program over boolean world-vectors; the grid scan is the hot
numeric loop of the whole package.

Two interchangeable backends implement the scan:

  * "numba": explicit loops under @numba.njit (default when numba imports);
  * "numpy": the same scan vectorized over the whole grid chunk.

Select with the QMODAL_BACKEND environment variable or set_backend(); both
return bit-identical results (the first failure in scan order).  See
benchmarks/bench_backends.py for a timing comparison.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .formula import And, Atom, Box, Formula, Not, Sequent
from .structure import (
    closed_masks,
    column_patterns,
    rq_components,
)

__all__ = [
    "Program",
    "compile_program",
    "sequent_slots",
    "scan_grid",
    "scan_rq_block",
    "get_backend",
    "set_backend",
    "available_backends",
]

_OP_ATOM = 0
_OP_AND = 1
_OP_NOT = 2
_OP_BOX = 3
_OP_FALSE = 4  # atom absent from the atom order: empty valuation

# Upper bound on scratch bytes per numpy chunk (slots x cells x worlds).
_CHUNK_BYTES = 1 << 26


# ---------------------------------------------------------------------------
# Backend selection
# ---------------------------------------------------------------------------

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

_VALID_BACKENDS = ("numba", "numpy")


def available_backends() -> tuple[str, ...]:
    return _VALID_BACKENDS if _HAVE_NUMBA else ("numpy",)


def _initial_backend() -> str:
    choice = os.environ.get("QMODAL_BACKEND", "").strip().lower()
    if choice:
        if choice not in _VALID_BACKENDS:
            raise ValueError(f"QMODAL_BACKEND must be one of {_VALID_BACKENDS}, got {choice!r}")
        if choice == "numba" and not _HAVE_NUMBA:
            raise ImportError("QMODAL_BACKEND=numba but numba is not installed")
        return choice
    return "numba" if _HAVE_NUMBA else "numpy"


_BACKEND = _initial_backend()


def get_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in _VALID_BACKENDS:
        raise ValueError(f"backend must be one of {_VALID_BACKENDS}, got {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not installed")
    _BACKEND = name


# ---------------------------------------------------------------------------
# Formula compilation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    """A formula set compiled to postfix ops over the subformula DAG."""

    ops: np.ndarray  # int64 opcodes
    arg1: np.ndarray  # int64: atom index / operand slot
    arg2: np.ndarray  # int64: second operand slot (AND only)
    slot_of: dict  # Formula -> slot
    atom_order: tuple[str, ...]
    has_box: bool


def compile_program(formulas: Iterable[Formula], atom_order: Sequence[str]) -> Program:
    atom_idx = {a: i for i, a in enumerate(atom_order)}
    slot_of: dict[Formula, int] = {}
    ops: list[int] = []
    arg1: list[int] = []
    arg2: list[int] = []

    def emit(f: Formula) -> int:
        slot = slot_of.get(f)
        if slot is not None:
            return slot
        if isinstance(f, Atom):
            idx = atom_idx.get(f.name, -1)
            op, a, b = (_OP_ATOM, idx, -1) if idx >= 0 else (_OP_FALSE, -1, -1)
        elif isinstance(f, And):
            op, a, b = _OP_AND, emit(f.left), emit(f.right)
        elif isinstance(f, Not):
            op, a, b = _OP_NOT, emit(f.inner), -1
        elif isinstance(f, Box):
            op, a, b = _OP_BOX, emit(f.inner), -1
        else:
            raise TypeError(f"not a formula: {f!r}")
        slot = len(ops)
        ops.append(op)
        arg1.append(a)
        arg2.append(b)
        slot_of[f] = slot
        return slot

    for f in formulas:
        emit(f)
    return Program(
        ops=np.asarray(ops, dtype=np.int64),
        arg1=np.asarray(arg1, dtype=np.int64),
        arg2=np.asarray(arg2, dtype=np.int64),
        slot_of=slot_of,
        atom_order=tuple(atom_order),
        has_box=any(o == _OP_BOX for o in ops),
    )


def sequent_slots(program: Program, seq: Sequent) -> tuple[np.ndarray, np.ndarray]:
    gamma = np.asarray(sorted(program.slot_of[f] for f in seq.antecedent), dtype=np.int64)
    delta = np.asarray(sorted(program.slot_of[f] for f in seq.succedent), dtype=np.int64)
    return gamma, delta


# ---------------------------------------------------------------------------
# Scan kernels: first (rm, valuation, world) falsifying the sequent
# ---------------------------------------------------------------------------


def _scan_loops(rq, rm_stack, vals, ops, arg1, arg2, gamma, delta):
    n_rm, k, _ = rm_stack.shape
    n_val = vals.shape[0]
    n_ops = ops.shape[0]
    buf = np.empty((n_ops, k), np.bool_)
    for m in range(n_rm):
        rm = rm_stack[m]
        for v in range(n_val):
            for t in range(n_ops):
                o = ops[t]
                if o == 0:  # atom
                    a = arg1[t]
                    for i in range(k):
                        buf[t, i] = vals[v, a, i]
                elif o == 1:  # and
                    a = arg1[t]
                    b = arg2[t]
                    for i in range(k):
                        buf[t, i] = buf[a, i] and buf[b, i]
                elif o == 2:  # not: no rq-neighbour satisfies the operand
                    a = arg1[t]
                    for i in range(k):
                        ok = True
                        for j in range(k):
                            if rq[i, j] and buf[a, j]:
                                ok = False
                                break
                        buf[t, i] = ok
                elif o == 3:  # box: every rm-successor satisfies the operand
                    a = arg1[t]
                    for i in range(k):
                        ok = True
                        for l in range(k):
                            if rm[i, l] and not buf[a, l]:
                                ok = False
                                break
                        buf[t, i] = ok
                else:  # false
                    for i in range(k):
                        buf[t, i] = False
            for w in range(k):
                refuted = True
                for gi in range(gamma.shape[0]):
                    if not buf[gamma[gi], w]:
                        refuted = False
                        break
                if refuted:
                    for di in range(delta.shape[0]):
                        if buf[delta[di], w]:
                            refuted = False
                            break
                if refuted:
                    return (m * n_val + v) * k + w
    return -1


_scan_compiled = None


def _scan_numba(*args):
    global _scan_compiled
    if _scan_compiled is None:
        _scan_compiled = numba.njit(cache=True)(_scan_loops)
    return _scan_compiled(*args)


def _scan_numpy(rq, rm_stack, vals, ops, arg1, arg2, gamma, delta):
    n_rm, k, _ = rm_stack.shape
    n_val = vals.shape[0]
    rq_u8 = rq.astype(np.uint8)
    rm_u8 = rm_stack.astype(np.uint8)
    sat: list[np.ndarray] = []
    for t in range(len(ops)):
        o = ops[t]
        if o == _OP_ATOM:
            v = np.broadcast_to(vals[:, arg1[t], :], (n_rm, n_val, k))
        elif o == _OP_AND:
            v = sat[arg1[t]] & sat[arg2[t]]
        elif o == _OP_NOT:
            hits = np.einsum("mvj,ij->mvi", sat[arg1[t]].astype(np.uint8), rq_u8)
            v = hits == 0
        elif o == _OP_BOX:
            viol = np.einsum("mvj,mij->mvi", (~sat[arg1[t]]).astype(np.uint8), rm_u8)
            v = viol == 0
        else:
            v = np.zeros((n_rm, n_val, k), dtype=bool)
        sat.append(v)
    fail = np.ones((n_rm, n_val, k), dtype=bool)
    for g in gamma:
        fail &= sat[g]
    for d in delta:
        fail &= ~sat[d]
    hits = np.flatnonzero(fail.reshape(-1))
    return int(hits[0]) if len(hits) else -1


def scan_grid(rq, rm_stack, vals, program: Program, gamma, delta) -> int:
    """First failing flat index ((m * n_val + v) * k + w) in the chunk, or -1.

    Scan order is rm-major, then valuation, then world, matching the
    canonical enumeration; both backends return the same index.
    """
    rq = np.ascontiguousarray(rq, dtype=bool)
    rm_stack = np.ascontiguousarray(rm_stack, dtype=bool)
    vals = np.ascontiguousarray(vals, dtype=bool)
    if _BACKEND == "numba":
        return int(_scan_numba(rq, rm_stack, vals, program.ops, program.arg1,
                               program.arg2, gamma, delta))
    return _scan_numpy(rq, rm_stack, vals, program.ops, program.arg1,
                       program.arg2, gamma, delta)


# ---------------------------------------------------------------------------
# Per-frame scan with chunking
# ---------------------------------------------------------------------------


def build_val_table(closed: Sequence[int], n_atoms: int, k: int) -> np.ndarray:
    """(n_val, n_atoms, k) membership table of all valuation choices.

    Valuation index digits are base len(closed), first atom most
    significant; digit order follows the ascending closed-mask order.
    """
    n_closed = len(closed)
    n_val = n_closed ** n_atoms
    pattern = np.zeros((n_closed, k), dtype=bool)
    for c, mask in enumerate(closed):
        for i in range(k):
            pattern[c, i] = bool(mask >> i & 1)
    table = np.zeros((n_val, max(n_atoms, 1), k), dtype=bool)
    if n_atoms == 0:
        return table[:1]
    idx = np.arange(n_val)
    for a in range(n_atoms):
        digits = (idx // n_closed ** (n_atoms - 1 - a)) % n_closed
        table[:, a, :] = pattern[digits]
    return table


def build_rm_chunk(col_patterns: Sequence[int], k: int, start: int, stop: int) -> np.ndarray:
    """(stop-start, k, k) stack of rm matrices for a flat-index range.

    rm index digits are base len(col_patterns), column 0 most significant;
    each digit selects a union of rq-components as column l of the matrix.
    """
    b = len(col_patterns)
    pattern = np.zeros((b, k), dtype=bool)
    for c, mask in enumerate(col_patterns):
        for i in range(k):
            pattern[c, i] = bool(mask >> i & 1)
    idx = np.arange(start, stop, dtype=np.int64)
    cols = np.empty((len(idx), k, k), dtype=bool)  # (m, l, i)
    for l in range(k):
        digits = (idx // b ** (k - 1 - l)) % b
        cols[:, l, :] = pattern[digits]
    return np.ascontiguousarray(np.transpose(cols, (0, 2, 1)))  # (m, i, l)


def scan_rq_block(
    neighbors: list[int],
    rq: np.ndarray,
    program: Program,
    gamma: np.ndarray,
    delta: np.ndarray,
    use_rm: bool,
) -> tuple[int, int, int] | None:
    """Scan all (rm, valuation) grid cells of one frame; first failure as
    (rm_index, val_index, world) or None.

    With use_rm=False only rm index 0 (the empty relation) is scanned: for a
    box-free sequent truth is rm-invariant, so the first failure of the full
    grid necessarily occurs at rm index 0.
    """
    k = len(neighbors)
    comps = rq_components(neighbors)
    col_pats = column_patterns(comps)
    closed = closed_masks(neighbors)
    n_atoms = len(program.atom_order)
    n_rm = len(col_pats) ** k if use_rm else 1
    vals = build_val_table(closed, n_atoms, k)
    n_val = vals.shape[0]
    if n_rm * n_val * k >= 1 << 62:
        raise ValueError("search space too large to scan")
    chunk = max(1, _CHUNK_BYTES // max(1, n_val * k * len(program.ops)))
    start = 0
    while start < n_rm:
        stop = min(n_rm, start + chunk)
        rm_stack = build_rm_chunk(col_pats, k, start, stop)
        flat = scan_grid(rq, rm_stack, vals, program, gamma, delta)
        if flat >= 0:
            w = flat % k
            v = (flat // k) % n_val
            m = flat // (k * n_val) + start
            return (m, v, w)
        start = stop
    return None
