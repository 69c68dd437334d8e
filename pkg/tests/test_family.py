import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeubs.errors import InputError, RealizationError, Undecided
from cubeubs.family import (
    CorrigendumRule,
    GridRule,
    PairKind,
    Ref,
    TableTailRule,
    pocset_conflict,
    realize_truncation,
)
from cubeubs.generators import planted_rule

from conftest import bf_crosses, bf_separates

H = Ref


def test_corrigendum_crossing_examples():
    s = CorrigendumRule()
    assert s.crosses(H(5, 2), H(0, 7))
    assert not s.crosses(H(5, 2), H(0, 3))
    assert not s.crosses(H(3, 1), H(3, 4))


def test_corrigendum_rule_exhaustive_small():
    s = CorrigendumRule()
    for m, n in itertools.permutations(range(5), 2):
        for i, j in itertools.product(range(8), repeat=2):
            lo, hi = min(m, n), max(m, n)
            idx_lo = j if n == lo else i
            assert s.crosses(H(m, i), H(n, j)) == (idx_lo > hi)


def test_grid_crossing():
    g = GridRule(2)
    assert g.crosses(H(0, 3), H(1, 8))
    assert not g.crosses(H(0, 3), H(0, 8))


def test_out_of_bounds_refs_rejected():
    with pytest.raises(InputError):
        GridRule(2).crosses(H(2, 0), H(0, 0))
    with pytest.raises(InputError):
        CorrigendumRule(3).separates(H(0, 1), H(0, 0), H(5, 0))
    with pytest.raises(InputError):
        CorrigendumRule().crosses(H(-1, 0), H(0, 0))


def test_same_family_separation():
    s = CorrigendumRule()
    assert s.separates(H(1, 4), H(1, 2), H(1, 9))
    assert not s.separates(H(1, 2), H(1, 4), H(1, 9))


def test_crossing_excludes_separation_in_rules():
    s = CorrigendumRule()
    assert s.crosses(H(0, 7), H(5, 2))
    assert not s.separates(H(0, 7), H(5, 2), H(0, 1))


def test_cofinitely_crosses_examples():
    s = CorrigendumRule()
    assert s.cofinitely_crosses(H(2, 1), 0)
    assert not s.cofinitely_crosses(H(0, 2), 5)
    g = GridRule(2)
    assert g.cofinitely_crosses(H(1, 17), 0)
    with pytest.raises(InputError):
        s.cofinitely_crosses(H(0, 2), 0)


def test_corrigendum_asymmetry():
    s = CorrigendumRule()
    for n, m in itertools.combinations(range(6), 2):
        for i in range(10):
            assert s.cofinitely_crosses(H(m, i), n)
        for j in range(m + 1):
            assert not s.cofinitely_crosses(H(n, j), m)


def test_grid_realization_is_a_square_grid():
    r = realize_truncation(GridRule(2), 3)
    assert len(r.wallspace.walls) == 6
    assert len(r.wallspace.points) == 16
    g = r.wallspace.crossing_graph()
    assert nx.is_isomorphic(g, nx.complete_bipartite_graph(3, 3))


def test_corrigendum_two_families_realization():
    s = CorrigendumRule(2)
    r = realize_truncation(s, 4)
    ws = r.wallspace
    assert len(ws.walls) == 8
    got = {frozenset((r.ref_of(a), r.ref_of(b))) for a, b in ws.crossing_graph().edges}
    want = {frozenset((H(1, i), H(0, j))) for i in range(4) for j in range(4) if j > 1}
    assert got == want


def test_single_chain_realization_is_a_path():
    r = realize_truncation(GridRule(1), 6)
    assert len(r.wallspace.points) == 7
    assert r.wallspace.crossing_graph().number_of_edges() == 0


def test_realization_matches_rules_brute_force():
    systems = [CorrigendumRule(3), CorrigendumRule(), GridRule(3),
               TableTailRule(2, 0, {(0, 1): PairKind("stair", 1)})]
    for s in systems:
        r = realize_truncation(s, 4)
        ws = r.wallspace
        for a, b in itertools.permutations(r.refs, 2):
            assert bf_crosses(ws, str(a), str(b)) == s.crosses(a, b)
        for w, a, b in itertools.permutations(r.refs, 3):
            assert bf_separates(ws, str(w), str(a), str(b)) == s.separates(w, a, b)


def test_unrealizable_rule_reports_conflict():
    s = planted_rule({"families": 3, "plants": [
        {"type": "stair_rev", "families": [0, 1], "param": 0},
        {"type": "stair", "families": [0, 2], "param": 3},
        {"type": "stair_rev", "families": [1, 2], "param": 2},
    ]})
    conflict = pocset_conflict(s, 6)
    assert conflict == (H(0, 0), H(1, 1), H(2, 0))
    with pytest.raises(RealizationError) as e:
        realize_truncation(s, 6)
    assert e.value.conflict == conflict


def test_table_unknown_pairs_are_undecided():
    s = TableTailRule(2)
    with pytest.raises(Undecided):
        s.crosses(H(0, 0), H(1, 0))


def test_table_matrix_overrides_prefix():
    s = TableTailRule(2, 2, {(0, 1): PairKind("all")}, matrix=[((0, 1), (1, 0)), ((0, 1), (1, 1))])
    assert not s.crosses(H(0, 0), H(1, 0))
    assert s.crosses(H(0, 1), H(1, 0))
    assert s.crosses(H(0, 5), H(1, 0))


@pytest.mark.parametrize("s", [CorrigendumRule(), CorrigendumRule(4), GridRule(3)])
def test_families_are_chains(s):
    for f in range(3):
        for i in range(1, 12):
            assert s.separates(H(f, i), H(f, i - 1), H(f, i + 1))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 15), st.integers(0, 15))
def test_corrigendum_crossing_symmetric(m, n, i, j):
    s = CorrigendumRule()
    if (m, i) != (n, j):
        assert s.crosses(H(m, i), H(n, j)) == s.crosses(H(n, j), H(m, i))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 10), st.integers(0, 4))
def test_cofinite_count_stabilises(m, i, f):
    s = CorrigendumRule()
    if m == f:
        return
    h = H(m, i)
    counts = [sum(1 for j in range(T) if not s.crosses(h, H(f, j))) for T in (20, 40, 80)]
    if s.cofinitely_crosses(h, f):
        assert counts[0] == counts[1] == counts[2]
    else:
        assert counts[0] < counts[1] < counts[2]
