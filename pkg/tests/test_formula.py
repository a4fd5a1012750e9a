import pytest
from hypothesis import given, strategies as st

from qmodal.formula import (
    And,
    Atom,
    Box,
    Not,
    ParseError,
    Sequent,
    admissible_closure,
    enumerate_formula,
    formula_key,
    parse,
    parse_sequent,
    render,
    render_sequent,
    size,
    subformulas,
)

P, Q = Atom("p"), Atom("q")


def test_parse_box_conjunction():
    assert parse("[] (p & ~q)") == Box(And(P, Not(Q)))


def test_parse_desugars_disjunction():
    assert parse("p | q") == Not(And(Not(P), Not(Q)))


def test_parse_desugars_diamond():
    assert parse("<> p") == Not(Box(Not(P)))


def test_parse_bang_alias_and_precedence():
    assert parse("!p & q") == And(Not(P), Q)
    assert parse("~p & q | q") == parse("(~p & q) | q")
    assert parse("[]p & q") == And(Box(P), Q)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse("p & ")
    assert e.value.position == 4
    with pytest.raises(ParseError):
        parse("p @ q")
    with pytest.raises(ParseError):
        parse("P")  # atoms are lowercase
    with pytest.raises(ParseError):
        parse("p q")


def test_parse_sequent_forms():
    seq = parse_sequent("p, q |- p & q")
    assert seq.antecedent == frozenset((P, Q))
    assert seq.succedent == frozenset((And(P, Q),))
    assert parse_sequent("|-") == Sequent()
    assert parse_sequent("p |-") == Sequent((P,), ())
    assert parse_sequent("|- p") == Sequent((), (P,))
    with pytest.raises(ParseError):
        parse_sequent("p")  # a bare formula is not a sequent


def test_render_examples():
    assert render(Box(And(P, Not(Q)))) == "[](p & ~q)"
    assert render(P) == "p"
    assert render(Not(Not(P))) == "~~p"
    assert render(And(And(P, Q), P)) == "p & q & p"
    assert render(And(P, And(Q, P))) == "p & (q & p)"


def test_render_sequent_sorted_and_reparseable():
    seq = parse_sequent("q, p |- ~p, p & q")
    text = render_sequent(seq)
    assert parse_sequent(text) == seq


@st.composite
def formulas(draw, atoms=("p", "q", "r")):
    return draw(st.recursive(
        st.sampled_from([Atom(a) for a in atoms]),
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(Box, sub),
            st.builds(And, sub, sub),
        ),
        max_leaves=12,
    ))


@given(formulas())
def test_parse_render_round_trip(f):
    assert parse(render(f)) == f


def test_round_trip_over_enumeration_prefix():
    for i in range(10_000):
        f = enumerate_formula(("p", "q"), i)
        assert parse(render(f)) == f


def test_admissible_closure_examples():
    assert admissible_closure({Box(P)}) == frozenset((Box(P), P, Not(P)))
    assert admissible_closure({And(P, Q)}) == frozenset(
        (And(P, Q), P, Q, Not(P), Not(Q)))
    assert admissible_closure({Not(P)}) == frozenset((Not(P), P))


@given(st.sets(formulas(), max_size=4))
def test_admissible_closure_idempotent(fs):
    c = admissible_closure(fs)
    assert admissible_closure(c) == c


@given(st.sets(formulas(), max_size=3), st.sets(formulas(), max_size=3))
def test_admissible_closure_monotone(a, b):
    assert admissible_closure(a) <= admissible_closure(a | b)


@given(formulas())
def test_admissible_closure_size_bound(f):
    assert len(admissible_closure({f})) <= 2 * size(f)


def test_enumeration_first_elements():
    assert enumerate_formula(("p",), 0) == P
    assert enumerate_formula(("p",), 1) == Not(P)
    assert enumerate_formula(("p",), 2) == Box(P)
    assert enumerate_formula(("p", "q"), 0) == P
    assert enumerate_formula(("p", "q"), 1) == Q


def test_enumeration_injective():
    seen = {enumerate_formula(("p",), i) for i in range(1001)}
    assert len(seen) == 1001
    seen2 = {enumerate_formula(("p", "q"), i) for i in range(1001)}
    assert len(seen2) == 1001


def test_enumeration_sizes_nondecreasing():
    sizes = [size(enumerate_formula(("p",), i)) for i in range(200)]
    assert sizes == sorted(sizes)


def _all_formulas_of_size(atoms, n):
    if n == 1:
        return [Atom(a) for a in atoms]
    out = []
    for g in _all_formulas_of_size(atoms, n - 1):
        out.append(Not(g))
    for g in _all_formulas_of_size(atoms, n - 1):
        out.append(Box(g))
    for ls in range(1, n - 1):
        for l in _all_formulas_of_size(atoms, ls):
            for r in _all_formulas_of_size(atoms, n - 1 - ls):
                out.append(And(l, r))
    return out


def test_enumeration_exhaustive_to_size_five():
    # 1 + 2 + 5 + 14 + 42 formulas of sizes 1..5 over one atom
    expected = set()
    for n in range(1, 6):
        expected |= set(_all_formulas_of_size(("p",), n))
    assert len(expected) == 64
    enumerated = {enumerate_formula(("p",), i) for i in range(64)}
    assert enumerated == expected


def test_formula_key_total_order():
    fs = [enumerate_formula(("p", "q"), i) for i in range(300)]
    keys = [formula_key(f) for f in fs]
    assert sorted(keys) == keys  # enumeration respects the canonical order
    assert len(set(keys)) == len(keys)


def test_sequent_atoms_and_subsequent():
    seq = parse_sequent("p & q |- []r")
    assert seq.atoms() == {"p", "q", "r"}
    assert parse_sequent("p |- q").is_subsequent_of(parse_sequent("p, r |- q, p"))
    assert not parse_sequent("p, r |- q").is_subsequent_of(parse_sequent("p |- q"))


def test_subformulas():
    f = parse("[](p & ~q)")
    assert subformulas(f) == {f, And(P, Not(Q)), P, Not(Q), Q}
