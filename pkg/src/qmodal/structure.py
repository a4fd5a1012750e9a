"""Finite quantum modal structures.

A structure is a quadruple (W, R_Q, R_M, valuation) where W = {0..k-1},
R_Q is reflexive and symmetric, R_M is forced by R_Q
(R_M(i,l) implies R_M(j,l) for every R_Q-neighbour j of i), and every
valuation value is an R_Q-closed set of worlds, X = X^perp-perp, with

    X^perp = { j | j has no R_Q-neighbour in X }.

Relations are stored as dense boolean incidence matrices (world counts at
desk scale are <= ~8); world sets cross the public API as frozensets of
indices and are bitmask integers internally.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "QuantumModalStructure",
    "MalformedModelError",
    "Violation",
    "validate",
    "ortho_complement",
    "ortho_closure",
    "closed_sets",
    "closed_masks",
    "column_patterns",
    "rq_components",
    "row_masks",
    "iter_rq_bits",
    "rq_matrix_from_bits",
    "rm_matrix_from_index",
    "valuation_from_index",
    "enumerate_structures",
    "count_structures",
    "canonical_encoding",
    "load_model",
    "model_to_dict",
    "dump_model",
    "model_to_dot",
]


class MalformedModelError(ValueError):
    """Out-of-range indices or an unreadable model file.

    Distinct from a semantic Violation: a malformed input cannot even be
    represented as a structure.
    """


@dataclass(frozen=True)
class Violation:
    """One failed defining condition, with a witness tuple."""

    condition: str  # reflexivity | symmetry | forcing | valuation-closed
    witness: tuple
    message: str

    def __str__(self) -> str:
        return self.message


class QuantumModalStructure:
    """Immutable finite structure; worlds are indices 0..world_count-1.

    The constructor checks shapes and index ranges (raising
    MalformedModelError) but not the semantic conditions; use validate() to
    check reflexivity, symmetry, forcing, and valuation closedness, so that
    deliberately broken structures can be built for testing.
    """

    __slots__ = ("world_count", "rq", "rm", "valuation")

    def __init__(
        self,
        world_count: int,
        rq: np.ndarray,
        rm: np.ndarray,
        valuation: Mapping[str, Iterable[int]],
    ):
        if world_count < 1:
            raise MalformedModelError("world_count must be >= 1")
        rq = np.array(rq, dtype=bool)
        rm = np.array(rm, dtype=bool)
        if rq.shape != (world_count, world_count) or rm.shape != (world_count, world_count):
            raise MalformedModelError("relation matrices must be world_count x world_count")
        val: dict[str, frozenset[int]] = {}
        for atom, worlds in valuation.items():
            ws = frozenset(int(w) for w in worlds)
            if any(w < 0 or w >= world_count for w in ws):
                raise MalformedModelError(f"valuation of {atom!r} has out-of-range world")
            val[atom] = ws
        rq.flags.writeable = False
        rm.flags.writeable = False
        object.__setattr__(self, "world_count", int(world_count))
        object.__setattr__(self, "rq", rq)
        object.__setattr__(self, "rm", rm)
        object.__setattr__(self, "valuation", val)

    def __setattr__(self, name, value):
        raise AttributeError("QuantumModalStructure is immutable")

    @classmethod
    def build(
        cls,
        world_count: int,
        rq_pairs: Iterable[tuple[int, int]] = (),
        rm_pairs: Iterable[tuple[int, int]] = (),
        valuation: Mapping[str, Iterable[int]] | None = None,
        complete: bool = True,
    ) -> "QuantumModalStructure":
        """Build from edge lists.  With complete=True (the default) the
        reflexive and symmetric completion of rq_pairs is taken."""
        rq = np.zeros((world_count, world_count), dtype=bool)
        rm = np.zeros((world_count, world_count), dtype=bool)
        for i, j in rq_pairs:
            if not (0 <= i < world_count and 0 <= j < world_count):
                raise MalformedModelError(f"rq pair {(i, j)} out of range")
            rq[i, j] = True
            if complete:
                rq[j, i] = True
        if complete:
            np.fill_diagonal(rq, True)
        for i, l in rm_pairs:
            if not (0 <= i < world_count and 0 <= l < world_count):
                raise MalformedModelError(f"rm pair {(i, l)} out of range")
            rm[i, l] = True
        return cls(world_count, rq, rm, valuation or {})

    def val_vector(self, atom: str) -> np.ndarray:
        """Boolean membership vector of the atom's valuation; atoms absent
        from the valuation denote the empty set (which is always closed)."""
        v = np.zeros(self.world_count, dtype=bool)
        for w in self.valuation.get(atom, ()):
            v[w] = True
        return v

    def rq_neighbor_masks(self) -> list[int]:
        """Per-world bitmask of R_Q-neighbours."""
        return [_row_mask(self.rq[i]) for i in range(self.world_count)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantumModalStructure):
            return NotImplemented
        return (
            self.world_count == other.world_count
            and np.array_equal(self.rq, other.rq)
            and np.array_equal(self.rm, other.rm)
            and self.valuation == other.valuation
        )

    def __hash__(self) -> int:
        return hash((self.world_count, self.rq.tobytes(), self.rm.tobytes(),
                     tuple(sorted(self.valuation.items()))))

    def __repr__(self) -> str:
        return (
            f"QuantumModalStructure(worlds={self.world_count}, "
            f"rq={sorted(map(tuple, np.argwhere(self.rq).tolist()))}, "
            f"rm={sorted(map(tuple, np.argwhere(self.rm).tolist()))}, "
            f"valuation={{{', '.join(f'{a!r}: {sorted(ws)}' for a, ws in sorted(self.valuation.items()))}}})"
        )


# ---------------------------------------------------------------------------
# Bitmask helpers (shared with the enumeration kernels in decision/kernels)
# ---------------------------------------------------------------------------


def _row_mask(row: np.ndarray) -> int:
    m = 0
    for j in np.flatnonzero(row):
        m |= 1 << int(j)
    return m


def row_masks(matrix: np.ndarray) -> list[int]:
    """Per-row bitmasks of a boolean incidence matrix."""
    return [_row_mask(matrix[i]) for i in range(matrix.shape[0])]


def _mask_of(worlds: Iterable[int], world_count: int) -> int:
    m = 0
    for w in worlds:
        w = int(w)
        if w < 0 or w >= world_count:
            raise MalformedModelError(f"world index {w} out of range")
        m |= 1 << w
    return m


def _set_of(mask: int, world_count: int) -> frozenset[int]:
    return frozenset(w for w in range(world_count) if mask >> w & 1)


def complement_mask(x: int, neighbors: list[int]) -> int:
    """Bitmask form of X^perp given per-world neighbour masks."""
    m = 0
    for j, nb in enumerate(neighbors):
        if nb & x == 0:
            m |= 1 << j
    return m


def closed_masks(neighbors: list[int]) -> list[int]:
    """All R_Q-closed sets as bitmasks, sorted ascending.

    Every closed set is an intersection of single-world complements
    (C = C^perp-perp and D^perp = /\\ {i}^perp for i in D), so closing
    {W} u {{i}^perp} under intersection enumerates exactly the fixpoints
    without scanning all 2^k subsets.
    """
    k = len(neighbors)
    full = (1 << k) - 1
    base = {full}
    for i in range(k):
        base.add(complement_mask(1 << i, neighbors))
    work = list(base)
    out = set(base)
    while work:
        a = work.pop()
        for b in list(out):
            c = a & b
            if c not in out:
                out.add(c)
                work.append(c)
    return sorted(out)


def rq_components(neighbors: list[int]) -> list[int]:
    """Masks of R_Q-connected components, ordered by least member."""
    k = len(neighbors)
    seen = 0
    comps = []
    for start in range(k):
        if seen >> start & 1:
            continue
        comp = 1 << start
        frontier = 1 << start
        while frontier:
            nxt = 0
            for j in range(k):
                if frontier >> j & 1:
                    nxt |= neighbors[j]
            frontier = nxt & ~comp
            comp |= nxt
        comps.append(comp)
        seen |= comp
    return comps


# ---------------------------------------------------------------------------
# Orthocomplement machinery
# ---------------------------------------------------------------------------


def ortho_complement(x: Iterable[int], s: QuantumModalStructure) -> frozenset[int]:
    """X^perp: the worlds with no R_Q-neighbour in X."""
    mask = _mask_of(x, s.world_count)
    result = complement_mask(mask, s.rq_neighbor_masks())
    return _set_of(result, s.world_count)


def ortho_closure(x: Iterable[int], s: QuantumModalStructure) -> frozenset[int]:
    """X^perp-perp; X is R_Q-closed iff it equals its closure."""
    neighbors = s.rq_neighbor_masks()
    mask = _mask_of(x, s.world_count)
    result = complement_mask(complement_mask(mask, neighbors), neighbors)
    return _set_of(result, s.world_count)


def closed_sets(s: QuantumModalStructure) -> list[frozenset[int]]:
    """All R_Q-closed subsets, deterministically ordered (ascending bitmask
    with world 0 as the low bit).  Always contains the empty set and W."""
    return [_set_of(m, s.world_count) for m in closed_masks(s.rq_neighbor_masks())]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(s: QuantumModalStructure) -> list[Violation]:
    """Check the four defining conditions; empty list means valid.

    Returns one Violation per failed condition with a witness: reflexivity
    and symmetry of rq, the forcing of rm by rq, and closedness of every
    valuation value.
    """
    out: list[Violation] = []
    k = s.world_count
    for i in range(k):
        if not s.rq[i, i]:
            out.append(Violation("reflexivity", (i,), f"rq not reflexive at {i}"))
            break
    asym = np.argwhere(s.rq != s.rq.T)
    if len(asym):
        i, j = (int(v) for v in asym[0])
        out.append(Violation("symmetry", (i, j), f"rq not symmetric at ({i}, {j})"))
    done = False
    for i in range(k):
        for l in range(k):
            if not s.rm[i, l]:
                continue
            for j in range(k):
                if s.rq[i, j] and not s.rm[j, l]:
                    out.append(Violation(
                        "forcing", (i, l, j),
                        f"rm({i},{l}) not forced through rq-neighbor {j}"))
                    done = True
                    break
            if done:
                break
        if done:
            break
    neighbors = s.rq_neighbor_masks()
    for atom in sorted(s.valuation):
        mask = _mask_of(s.valuation[atom], k)
        if complement_mask(complement_mask(mask, neighbors), neighbors) != mask:
            out.append(Violation(
                "valuation-closed", (atom,),
                f"valuation of {atom!r} not R_Q-closed"))
    return out


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------
#
# Canonical enumeration order (shared with the accelerated countermodel
# search, which scans the same space in the same order):
#
#   * rq ranges over all reflexive symmetric relations; the upper-triangle
#     bits in row-major pair order form a tuple enumerated lexicographically
#     (first pair = most significant), so the identity-only relation comes
#     first.
#   * rm is enumerated per target world l: { i | rm(i,l) } must be a union of
#     rq-connected components (this parameterizes exactly the relations
#     satisfying the forcing condition).  Column choices are digits of a
#     single index, column 0 most significant; choice bits select components
#     in least-member order.
#   * each atom's valuation ranges over closed_sets in ascending-mask order,
#     first atom most significant.


def _upper_pairs(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def rq_matrix_from_bits(bits: int, k: int) -> np.ndarray:
    pairs = _upper_pairs(k)
    n = len(pairs)
    rq = np.eye(k, dtype=bool)
    for idx, (i, j) in enumerate(pairs):
        if bits >> (n - 1 - idx) & 1:
            rq[i, j] = rq[j, i] = True
    return rq


def iter_rq_bits(k: int) -> range:
    return range(1 << (k * (k - 1) // 2))


def column_patterns(components: list[int]) -> list[int]:
    """All component unions as bitmasks, in choice-index order."""
    c = len(components)
    out = []
    for choice in range(1 << c):
        m = 0
        for b in range(c):
            if choice >> b & 1:
                m |= components[b]
        out.append(m)
    return out


def rm_matrix_from_index(index: int, col_patterns: list[int], k: int) -> np.ndarray:
    """The index-th rm matrix in canonical order: digits base
    len(col_patterns), column 0 most significant."""
    b = len(col_patterns)
    rm = np.zeros((k, k), dtype=bool)
    for l in range(k):
        digit = (index // b ** (k - 1 - l)) % b
        col = col_patterns[digit]
        for i in range(k):
            if col >> i & 1:
                rm[i, l] = True
    return rm


def valuation_from_index(val_idx: int, closed: list[int], atom_list: list[str], k: int) -> dict[str, frozenset[int]]:
    """The val_idx-th valuation in canonical order: digits base len(closed)
    over the ascending closed-mask list, first atom most significant."""
    valuation = {}
    rem = val_idx
    for a in reversed(atom_list):
        valuation[a] = _set_of(closed[rem % len(closed)], k)
        rem //= len(closed)
    return valuation


def _structure_encoding(s: QuantumModalStructure, perm: tuple[int, ...], atoms: list[str]) -> tuple:
    """Encoding of the world-relabelled structure, for isomorphism tests.

    perm maps new world index -> old world index.
    """
    k = s.world_count
    rq_bits = tuple(
        1 if s.rq[perm[i], perm[j]] else 0 for i, j in _upper_pairs(k))
    rm_bits = tuple(
        1 if s.rm[perm[i], perm[l]] else 0 for i in range(k) for l in range(k))
    val_bits = tuple(
        1 if perm[i] in s.valuation.get(a, frozenset()) else 0
        for a in atoms for i in range(k))
    return (rq_bits, rm_bits, val_bits)


def canonical_encoding(s: QuantumModalStructure, atoms: Iterable[str] | None = None) -> tuple:
    """Lexicographically least encoding over all world permutations.

    Two structures are isomorphic (world bijection preserving rq, rm, and
    every atom's valuation) iff their canonical encodings agree.
    """
    atom_list = sorted(atoms) if atoms is not None else sorted(s.valuation)
    return min(
        _structure_encoding(s, perm, atom_list)
        for perm in itertools.permutations(range(s.world_count)))


def enumerate_structures(
    world_count: int,
    atoms: Iterable[str],
    dedup: bool = False,
) -> Iterator[QuantumModalStructure]:
    """Every valid structure with the given world count and valuations over
    exactly the given atoms, in the canonical order described above.

    With dedup=True only isomorphism-class representatives are yielded (the
    member whose own encoding equals the class's canonical encoding).
    """
    if world_count < 1:
        raise ValueError("world_count must be >= 1")
    atom_list = sorted(atoms)
    k = world_count
    for bits in iter_rq_bits(k):
        rq = rq_matrix_from_bits(bits, k)
        neighbors = [_row_mask(rq[i]) for i in range(k)]
        comps = rq_components(neighbors)
        col_pats = column_patterns(comps)
        cs = closed_masks(neighbors)
        rm_total = len(col_pats) ** k
        val_total = len(cs) ** len(atom_list)
        for rm_idx in range(rm_total):
            rm = rm_matrix_from_index(rm_idx, col_pats, k)
            for val_idx in range(val_total):
                valuation = valuation_from_index(val_idx, cs, atom_list, k)
                s = QuantumModalStructure(k, rq, rm, valuation)
                if dedup:
                    own = _structure_encoding(s, tuple(range(k)), atom_list)
                    if own != canonical_encoding(s, atom_list):
                        continue
                yield s


def count_structures(world_count: int, atoms: Iterable[str]) -> int:
    """Closed-form count of the enumeration stream (dedup off)."""
    k = world_count
    n_atoms = len(list(atoms))
    total = 0
    for bits in iter_rq_bits(k):
        rq = rq_matrix_from_bits(bits, k)
        neighbors = [_row_mask(rq[i]) for i in range(k)]
        comps = rq_components(neighbors)
        rm_count = (1 << len(comps)) ** k
        total += rm_count * len(closed_masks(neighbors)) ** n_atoms
    return total


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------
#
# {"worlds": k, "rq": [[i,j],...], "rm": [[i,l],...],
#  "valuation": {"p": [w,...], ...}}
#
# rq pairs may omit reflexive/symmetric completions; the loader completes
# them and then validates.


def load_model(source: str | Path | dict, validate_model: bool = True) -> QuantumModalStructure:
    """Load a model file (path, JSON text, or already-parsed dict).

    Raises MalformedModelError for unreadable input or out-of-range indices,
    and ValueError listing violations if the completed structure is invalid
    (suppressed with validate_model=False).
    """
    if isinstance(source, dict):
        data = source
    else:
        if isinstance(source, Path):
            text = source.read_text()
        elif source.lstrip().startswith("{"):
            text = source
        else:
            text = Path(source).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedModelError(f"not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise MalformedModelError("model must be a JSON object")
    try:
        worlds = int(data["worlds"])
    except (KeyError, TypeError, ValueError):
        raise MalformedModelError("missing or non-integer 'worlds'")
    rq_pairs = [(int(i), int(j)) for i, j in data.get("rq", [])]
    rm_pairs = [(int(i), int(j)) for i, j in data.get("rm", [])]
    valuation = {str(a): [int(w) for w in ws] for a, ws in data.get("valuation", {}).items()}
    s = QuantumModalStructure.build(worlds, rq_pairs, rm_pairs, valuation, complete=True)
    if validate_model:
        violations = validate(s)
        if violations:
            raise ValueError(
                "model fails validation: " + "; ".join(str(v) for v in violations))
    return s


def model_to_dict(s: QuantumModalStructure) -> dict:
    """Serializable form; rq is written as strict-upper-triangle pairs (the
    loader restores reflexivity and symmetry)."""
    rq_pairs = [[i, j] for i, j in _upper_pairs(s.world_count) if s.rq[i, j]]
    rm_pairs = sorted((int(i), int(l)) for i, l in np.argwhere(s.rm).tolist())
    return {
        "worlds": s.world_count,
        "rq": rq_pairs,
        "rm": [list(p) for p in rm_pairs],
        "valuation": {a: sorted(ws) for a, ws in sorted(s.valuation.items())},
    }


def dump_model(s: QuantumModalStructure) -> str:
    return json.dumps(model_to_dict(s), sort_keys=True)


def model_to_dot(s: QuantumModalStructure, name: str = "model") -> str:
    """GraphViz rendering: R_Q as undirected edges (self-loops omitted), R_M
    as directed edges, valuations as node labels."""
    lines = [f"graph {name} {{"]
    for w in range(s.world_count):
        true_atoms = sorted(a for a, ws in s.valuation.items() if w in ws)
        label = f"w{w}" + (r"\n{" + ",".join(true_atoms) + "}" if true_atoms else "")
        lines.append(f'  w{w} [label="{label}"];')
    for i, j in _upper_pairs(s.world_count):
        if s.rq[i, j]:
            lines.append(f"  w{i} -- w{j};")
    for i, l in np.argwhere(s.rm).tolist():
        lines.append(f"  w{i} -- w{l} [dir=forward, style=dashed];")
    lines.append("}")
    return "\n".join(lines)
