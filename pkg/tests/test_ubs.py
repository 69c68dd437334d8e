import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeubs.errors import InputError, PreconditionError
from cubeubs.family import CorrigendumRule, GridRule, PairKind, Ref, TableTailRule, realize_truncation
from cubeubs.generators import corrigendum_alternative, gen_random_wallspace
from cubeubs.hypset import HypSet, Row
from cubeubs.ubs import (
    almost_containment_poset,
    almost_equivalent,
    certify,
    check_facing_triple_free,
    check_unidirectional,
    find_chain,
    inseparable_closure,
    is_chain,
    is_inextensible,
    is_minimal_ubs,
    prec,
    tied,
)
from cubeubs.wallspace import nested_chain, tripod

from conftest import bf_min_inseparable_superset, bf_separates, wallspaces

H = Ref
COR = CorrigendumRule()
GRID2 = GridRule(2)


def fam(system, f, start=0):
    return HypSet.family(system, f, start)


# -- chains --------------------------------------------------------------------


def test_family_in_order_is_a_chain():
    assert is_chain([H(0, i) for i in range(10)], COR)


def test_scrambled_family_is_not_a_chain():
    assert not is_chain([H(0, i) for i in (3, 0, 7, 1, 9, 2)], COR)


def test_column_prefix_is_a_chain_in_the_realization():
    seq = [H(n, 1) for n in range(4)]
    assert is_chain(seq, COR)
    r = realize_truncation(COR, 4)
    ws = r.wallspace
    names = [str(x) for x in seq]
    assert is_chain(names, ws)


def test_is_chain_input_errors():
    with pytest.raises(InputError):
        is_chain([H(0, 0), H(0, 1)], COR)
    with pytest.raises(InputError):
        is_chain([H(0, 0), H(0, 1), H(0, 0)], COR)


def test_find_chain_single_family():
    c = find_chain(fam(GRID2, 0), 10)
    assert len(c) == 10 and is_chain(c.elements, GRID2)


def test_find_chain_stays_in_one_family():
    c = find_chain(HypSet.full(GRID2), 10)
    assert len({x.family for x in c.elements}) == 1
    assert is_chain(c.elements, GRID2)
    # maximal: no member of the truncation extends it at either end
    rest = [x for x in HypSet.full(GRID2).members_below(10) if x not in c.elements]
    for y in rest:
        assert not GRID2.separates(c.elements[-1], c.elements[-2], y)
        assert not GRID2.separates(c.elements[0], c.elements[1], y)


def test_find_chain_recovers_planted_chain_in_finite_wallspace():
    ws = nested_chain(6)
    S = HypSet.of(ws, ws.wall_ids)
    c = find_chain(S, 0)
    assert len(c) >= 6 and is_chain(c.elements, ws)


def test_find_chain_precondition_witness():
    ws = tripod()
    with pytest.raises(PreconditionError) as e:
        find_chain(HypSet.of(ws, ws.wall_ids), 0, check=True)
    assert set(e.value.witness) == {"x", "y", "z"}


def test_inextensible_examples():
    V = HypSet.full(GRID2)
    assert is_inextensible(find_chain(fam(GRID2, 0), 10), V, 10)
    c = find_chain(fam(COR, 0, 5), 20)
    assert not is_inextensible(c, fam(COR, 0, 4), 20)
    for h in (20, 50, 100):
        assert is_inextensible(find_chain(fam(COR, 0), h), HypSet.full(COR), h)


# -- closure ----------------------------------------------------------------------


def test_closure_adds_the_wall_between():
    ws = nested_chain(3)
    cl = inseparable_closure(HypSet.of(ws, ["w0", "w2"]), 0)
    assert cl.members_below(0) == ["w0", "w1", "w2"]


def test_closure_of_a_family_chain_is_itself():
    S = HypSet.of(GRID2, [H(0, i) for i in range(8)])
    cl = inseparable_closure(S, 8)
    assert set(cl.members_below(8)) == set(S.members_below(8))


def test_closure_matches_exhaustive_search():
    for seed in range(6):
        ws = gen_random_wallspace(6, 10, seed=seed).ambient
        for a, b in itertools.combinations(ws.wall_ids[:5], 2):
            got = set(inseparable_closure(HypSet.of(ws, [a, b]), 0).members_below(0))
            want = bf_min_inseparable_superset(ws, {a, b})
            assert want == [frozenset(got)]


@settings(max_examples=40, deadline=None)
@given(wallspaces(max_walls=7), st.data())
def test_closure_idempotent_monotone(ws, data):
    ids = list(ws.wall_ids)
    S = data.draw(st.sets(st.sampled_from(ids), min_size=1))
    extra = data.draw(st.sets(st.sampled_from(ids)))
    c1 = inseparable_closure(HypSet.of(ws, S), 0)
    c2 = inseparable_closure(c1, 0)
    big = inseparable_closure(HypSet.of(ws, S | extra), 0)
    m1 = set(c1.members_below(0))
    assert m1 == set(c2.members_below(0))
    assert m1 <= set(big.members_below(0))
    for a, b in itertools.combinations(m1, 2):
        for w in ids:
            if w not in m1:
                assert not bf_separates(ws, w, a, b)


# -- certificates -------------------------------------------------------------------


def test_unidirectional_examples():
    assert check_unidirectional(fam(COR, 0), 20) == (True, None)
    mirrored = TableTailRule(2, 0, {(0, 1): PairKind("none")})
    ok, w = check_unidirectional(HypSet.full(mirrored), 10)
    assert not ok and w == H(0, 0)
    for h in (10, 20, 40):
        assert check_unidirectional(HypSet.full(COR), h)[0]


def test_facing_triple_examples():
    ws = tripod()
    ok, w = check_facing_triple_free(HypSet.of(ws, ws.wall_ids), 0)
    assert not ok and set(w) == {"x", "y", "z"}
    assert check_facing_triple_free(fam(COR, 2), 20) == (True, None)
    assert check_facing_triple_free(HypSet.full(COR), 20) == (True, None)


def test_corrigendum_full_system_is_a_ubs():
    for h in (10, 16):
        assert certify(HypSet.full(COR), h).is_ubs


# -- almost-crossing -----------------------------------------------------------------


def test_grid_families_are_tied():
    A, B = fam(GRID2, 0), fam(GRID2, 1)
    assert prec(A, B) and prec(B, A) and tied(A, B)


def test_corrigendum_families_are_strict():
    A, B = fam(COR, 0), fam(COR, 5)
    assert prec(A, B) is True
    assert prec(B, A) is False
    assert tied(A, B) is False


def test_prec_with_finite_b():
    A = fam(COR, 0)
    B = HypSet.of(COR, [H(2, 0), H(3, 1), H(1, 7)])
    assert prec(A, B)


def test_tied_with_itself():
    A = fam(COR, 3)
    assert tied(A, A)


def test_prec_undecided_on_unknown_pairs():
    s = TableTailRule(2)
    assert prec(fam(s, 0), fam(s, 1)) is None


def test_almost_equivalence_examples():
    A = fam(COR, 0)
    assert almost_equivalent(A, fam(COR, 0, 7))
    assert not almost_equivalent(A, fam(COR, 1))
    vprime, _ = corrigendum_alternative(COR)
    for f in range(5):
        assert not almost_equivalent(vprime, fam(COR, f))
        assert len([m for m in vprime.members_below(30) if m in fam(COR, f)]) == 1


def test_minimality_examples():
    assert is_minimal_ubs(fam(COR, 0), 16)
    assert not is_minimal_ubs(HypSet.full(GRID2), 16)


def test_poset_examples():
    A = fam(COR, 0)
    B = A.union(fam(COR, 1))
    p = almost_containment_poset([A, B])
    assert p.leq == frozenset({(0, 1)})
    vprime, _ = corrigendum_alternative(COR)
    sets = [fam(COR, f) for f in range(4)] + [vprime, HypSet.full(COR)]
    p = almost_containment_poset(sets)
    top = len(sets) - 1
    for k in range(top):
        assert (k, top) in p.leq
        for l in range(top):
            if l != k:
                assert not p.comparable(k, l)
    assert len(almost_containment_poset([A, fam(COR, 0, 3)]).reps) == 1


# -- properties ------------------------------------------------------------------------

rows = st.builds(lambda f, s: (f, s), st.integers(0, 4), st.integers(0, 6))


@settings(max_examples=60, deadline=None)
@given(rows, rows, rows)
def test_almost_equivalence_is_an_equivalence(a, b, c):
    X, Y, Z = (fam(COR, *t) for t in (a, b, c))
    assert almost_equivalent(X, X)
    assert almost_equivalent(X, Y) == almost_equivalent(Y, X)
    if almost_equivalent(X, Y) and almost_equivalent(Y, Z):
        assert almost_equivalent(X, Z)


@settings(max_examples=60, deadline=None)
@given(rows, rows, st.integers(0, 5))
def test_prec_invariant_under_almost_equivalence(a, b, cut):
    A, B = fam(COR, *a), fam(COR, *b)
    A2 = HypSet.symbolic(COR, [Row(a[0], a[1] + cut)], plus=[(a[0], a[1] + cut + 3)])
    assert almost_equivalent(A, A2)
    assert prec(A, B) == prec(A2, B)
    # replacing B by an almost-equivalent subset keeps the verdict
    B2 = fam(COR, b[0], b[1] + cut)
    if prec(A, B):
        assert prec(A, B2)
