"""Shared test utilities: seeded random structures/formulas and a brute-force
derivability reference that stores every derivable sequent explicitly."""

from __future__ import annotations

import itertools
import random

import numpy as np

from qmodal.formula import And, Atom, Box, Formula, Not, Sequent
from qmodal.structure import (
    QuantumModalStructure,
    complement_mask,
    row_masks,
    rq_components,
    rq_matrix_from_bits,
)


def random_structure(rng: random.Random, max_worlds: int = 6,
                     atoms: tuple[str, ...] = ("p", "q", "r")) -> QuantumModalStructure:
    """A pseudo-random valid structure: random frame, rm columns drawn as
    component unions, valuations as ortho-closures of random sets."""
    k = rng.randint(1, max_worlds)
    rq = rq_matrix_from_bits(rng.getrandbits(k * (k - 1) // 2), k)
    neighbors = row_masks(rq)
    comps = rq_components(neighbors)
    rm = np.zeros((k, k), dtype=bool)
    for l in range(k):
        col = 0
        for c in comps:
            if rng.random() < 0.4:
                col |= c
        for i in range(k):
            if col >> i & 1:
                rm[i, l] = True
    valuation = {}
    for a in atoms:
        raw = rng.getrandbits(k)
        closed = complement_mask(complement_mask(raw, neighbors), neighbors)
        valuation[a] = frozenset(i for i in range(k) if closed >> i & 1)
    return QuantumModalStructure(k, rq, rm, valuation)


def random_formula(rng: random.Random, atoms: tuple[str, ...], size: int) -> Formula:
    """Uniform-ish random formula of exactly the given AST size."""
    if size <= 1:
        return Atom(rng.choice(atoms))
    choices = ["not", "box"] if size < 3 else ["not", "box", "and", "and"]
    c = rng.choice(choices)
    if c == "not":
        return Not(random_formula(rng, atoms, size - 1))
    if c == "box":
        return Box(random_formula(rng, atoms, size - 1))
    left = rng.randint(1, size - 2)
    return And(random_formula(rng, atoms, left),
               random_formula(rng, atoms, size - 1 - left))


# ---------------------------------------------------------------------------
# Brute-force derivability: explicit storage, explicit weakening, membership
# axioms with arbitrary antecedents.  Independent of the antichain engine.
# ---------------------------------------------------------------------------


def brute_force_derivable(universe: frozenset[Formula]) -> set[Sequent]:
    fs = sorted(universe, key=repr)
    subsets = [frozenset(c) for r in range(len(fs) + 1)
               for c in itertools.combinations(fs, r)]
    derivable: set[tuple[frozenset, frozenset]] = set()
    for a in fs:
        derivable.add((frozenset((a,)), frozenset((a,))))
    for f in fs:
        if isinstance(f, Box) and Not(f) in universe:
            for g in subsets:
                derivable.add((g, frozenset((f, Not(f)))))

    ands = [f for f in fs if isinstance(f, And)]
    while True:
        new = set()

        def add(g, d):
            if (g, d) not in derivable:
                new.add((g, d))

        items = list(derivable)
        for g, d in items:
            for f in fs:  # WKN, one formula at a time
                add(g | {f}, d)
                add(g, d | {f})
            for f in ands:  # AND_L1 / AND_L2
                if f.left in g:
                    add((g - {f.left}) | {f}, d)
                if f.right in g:
                    add((g - {f.right}) | {f}, d)
            for a in d:  # NEG_L
                if Not(a) in universe:
                    add(g | {Not(a)}, d - {a})
            if len(g) == 1:  # NEG_R
                (a,) = g
                if Not(a) in universe and all(Not(x) in universe for x in d):
                    add(frozenset(Not(x) for x in d), frozenset((Not(a),)))
            for a in g:  # NEG_NEG_L
                if Not(Not(a)) in universe:
                    add((g - {a}) | {Not(Not(a))}, d)
            for a in d:  # NEG_NEG_R
                if Not(Not(a)) in universe:
                    add(g, (d - {a}) | {Not(Not(a))})
            if len(d) == 1:  # K
                (a,) = d
                if Box(a) in universe and all(Box(x) in universe for x in g):
                    add(frozenset(Box(x) for x in g), frozenset((Box(a),)))
        for (g1, d1), (g2, d2) in itertools.product(items, items):
            for a in d1 & g2:  # CUT
                add(g1 | (g2 - {a}), (d1 - {a}) | d2)
            if g1 == g2:  # AND_R
                for f in ands:
                    for a in d1:
                        for b in d2:
                            if f.left == a and f.right == b and d1 - {a} == d2 - {b}:
                                add(g1, (d1 - {a}) | {f})
        if not new:
            break
        derivable |= new
    return {Sequent(g, d) for g, d in derivable}
