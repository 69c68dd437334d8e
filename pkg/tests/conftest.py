"""Shared oracles and strategies.

The oracles here work on raw point sets and never call the package's own
relations, so they are an independent reference.
"""

import itertools

import pytest
from hypothesis import strategies as st

from cubeubs.wallspace import FiniteWallspace, Wall


def halves(ws, w):
    pos, neg = ws.halfspaces(w)
    return set(pos), set(neg)


def bf_crosses(ws, a, b):
    return all(x & y for x in halves(ws, a) for y in halves(ws, b))


def bf_side(ws, w, a):
    """+1/-1: the halfspace of ``w`` that contains a whole halfspace of ``a``; 0 if crossing."""
    if bf_crosses(ws, a, w):
        return 0
    wp, wn = halves(ws, w)
    for h in halves(ws, a):
        if h <= wp:
            return 1
    return -1


def bf_separates(ws, w, a, b):
    sa, sb = bf_side(ws, w, a), bf_side(ws, w, b)
    return sa * sb == -1


def bf_facing(ws, a, b, c):
    trip = (a, b, c)
    if any(bf_crosses(ws, x, y) for x, y in itertools.combinations(trip, 2)):
        return False
    return not any(bf_separates(ws, trip[i], *[t for t in trip if t != trip[i]]) for i in range(3))


def bf_min_inseparable_superset(ws, S):
    """Smallest inseparable superset of ``S`` by exhaustive search over supersets."""
    ids = list(ws.wall_ids)
    rest = [w for w in ids if w not in S]
    for k in range(len(rest) + 1):
        hits = []
        for extra in itertools.combinations(rest, k):
            T = set(S) | set(extra)
            ok = all(not bf_separates(ws, w, a, b)
                     for a, b in itertools.combinations(T, 2) for w in ids if w not in (a, b) and w not in T)
            if ok:
                hits.append(frozenset(T))
        if hits:
            return hits
    return []


@st.composite
def wallspaces(draw, min_points=3, max_points=7, max_walls=8):
    """Random duplicate-free wallspaces described by bitmasks."""
    n = draw(st.integers(min_points, max_points))
    limit = 2 ** (n - 1) - 1
    masks = draw(st.lists(st.integers(1, limit), min_size=1, max_size=min(max_walls, limit), unique=True))
    pts = tuple(f"p{k}" for k in range(n))
    return FiniteWallspace(pts, tuple(
        Wall(f"w{j}", frozenset(p for k, p in enumerate(pts) if m >> k & 1)) for j, m in enumerate(masks)))


@pytest.fixture
def square():
    return FiniteWallspace.from_sides("pqrs", {"A": "pq", "B": "pr"})


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE = {}


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
