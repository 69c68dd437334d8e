import itertools

import networkx as nx
import pytest
from hypothesis import given, settings

from cubeubs.dual import (
    CubeComplexSkeleton,
    dimension,
    dimension_report,
    dual_complex,
    median_check,
    orientations,
)
from cubeubs.errors import InputError, ResourceError
from cubeubs.family import CorrigendumRule, GridRule, realize_truncation
from cubeubs.generators import gen_random_wallspace
from cubeubs.wallspace import crossing_walls, nested_chain, tripod

from conftest import halves, wallspaces


def bf_orientations(ws):
    """Every choice of halfspaces with pairwise nonempty intersections."""
    ids = ws.wall_ids
    hs = [halves(ws, w) for w in ids]  # (positive, negative)
    out = set()
    for bits in itertools.product((0, 1), repeat=len(ids)):
        chosen = [hs[i][0] if b else hs[i][1] for i, b in enumerate(bits)]
        if all(x & y for x, y in itertools.combinations(chosen, 2)):
            out.add(bits)
    return out


def test_square():
    skel = dual_complex(crossing_walls(2))
    assert len(skel.vertices) == 4 and len(skel.edges) == 4
    assert skel.cube_count_by_dim == {0: 4, 1: 4, 2: 1}
    assert median_check(skel).ok


def test_three_cube():
    skel = dual_complex(crossing_walls(3))
    assert skel.cube_count_by_dim == {0: 8, 1: 12, 2: 6, 3: 1}
    assert median_check(skel).ok


@pytest.mark.parametrize("n", range(1, 11))
def test_n_crossing_walls_give_the_n_cube(n):
    skel = dual_complex(crossing_walls(n))
    assert len(skel.vertices) == 2 ** n
    assert skel.dimension == n


@pytest.mark.parametrize("k", range(1, 16))
def test_chain_gives_a_path(k):
    skel = dual_complex(nested_chain(k))
    g = skel.graph()
    assert len(skel.vertices) == k + 1
    assert nx.is_isomorphic(g, nx.path_graph(k + 1))


def test_tripod_is_a_star():
    skel = dual_complex(tripod())
    assert len(skel.vertices) == 4
    assert nx.is_isomorphic(skel.graph(), nx.star_graph(3))
    assert median_check(skel).ok


def test_orientations_match_brute_force():
    for seed in range(5):
        ws = gen_random_wallspace(6, 8, seed=seed).ambient
        got, _ = orientations(ws)
        assert set(got) == bf_orientations(ws)


def test_wall_budget():
    with pytest.raises(ResourceError):
        dual_complex(nested_chain(21))
    with pytest.raises(ResourceError):
        orientations(crossing_walls(6), max_vertices=10)


def test_corrupted_edges_fail_the_median_check():
    skel = dual_complex(crossing_walls(3))
    edges = list(skel.edges)
    # add a diagonal across one square
    extra = next((a, b) for a in range(8) for b in range(8)
                 if a < b and sum(x != y for x, y in zip(skel.vertices[a], skel.vertices[b])) == 2)
    bad = CubeComplexSkeleton(skel.walls, skel.vertices, tuple(edges + [extra]), skel.cube_count_by_dim)
    v = median_check(bad)
    assert not v.ok and v.triple is not None
    dropped = CubeComplexSkeleton(skel.walls, skel.vertices, tuple(edges[1:]), skel.cube_count_by_dim)
    v2 = median_check(dropped)
    assert not v2.ok and v2.triple is not None


def test_k23_is_not_median():
    g = nx.complete_bipartite_graph(2, 3)
    skel = CubeComplexSkeleton(("a",), tuple((1,) * 1 for _ in range(5)), tuple(sorted(g.edges)), {0: 5})
    v = median_check(skel)
    assert not v.ok
    a, b, c = v.triple
    assert v.median_count != 1


def test_disconnected_skeleton():
    skel = CubeComplexSkeleton(("a",), ((1,), (-1,)), (), {0: 2})
    assert median_check(skel).reason == "disconnected"


def test_dimension_examples():
    assert dimension(realize_truncation(GridRule(2), 4).wallspace) == 2
    assert dimension(nested_chain(6)) == 1
    d, wit = dimension(CorrigendumRule(4), 8, witness=True)
    assert d == 4 and len(wit) == 4
    with pytest.raises(InputError):
        dimension(CorrigendumRule(3))


@pytest.mark.parametrize("F", range(2, 7))
def test_corrigendum_dimension_equals_family_count(F):
    s = CorrigendumRule(F)
    d, wit = dimension(s, F + 2, witness=True)
    assert d == F
    assert all(s.crosses(a, b) for a, b in itertools.combinations(wit, 2))
    assert dimension_report(s, [F + 2, 2 * F + 4])["stable"]


def test_realized_grid_dual():
    r = realize_truncation(GridRule(3), 2)
    skel = dual_complex(r.wallspace)
    assert skel.cube_count_by_dim == {0: 27, 1: 54, 2: 36, 3: 8}
    assert median_check(skel).ok


def test_realized_corrigendum_dual():
    r = realize_truncation(CorrigendumRule(3), 4)
    skel = dual_complex(r.wallspace)
    assert skel.dimension == dimension(r.wallspace) == 3
    assert median_check(skel).ok


@settings(max_examples=40, deadline=None)
@given(wallspaces(max_points=6, max_walls=7))
def test_generated_duals_are_median(ws):
    skel = dual_complex(ws)
    assert median_check(skel).ok
    assert skel.dimension == dimension(ws)
    # every wall is flipped by at least one edge
    flipped = {next(i for i, (x, y) in enumerate(zip(skel.vertices[a], skel.vertices[b])) if x != y)
               for a, b in skel.edges}
    assert flipped == set(range(len(ws.walls)))
    assert set(tuple(1 if s > 0 else 0 for s in v) for v in skel.vertices) == bf_orientations(ws)
