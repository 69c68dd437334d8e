"""The dual cube complex of a finite wallspace, at desk scale.

Vertices are orientations choosing one halfspace per wall with every pair
of choices meeting; edges flip one wall.  For a finite wallspace these are
exactly the vertices of the Sageev dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import InputError, ResourceError
from .family import FamilySystem

DEFAULT_MAX_WALLS = 20
DEFAULT_MAX_VERTICES = 1 << 20
DEFAULT_MEDIAN_BUDGET = 4096


@dataclass(frozen=True)
class CubeComplexSkeleton:
    """Vertices as sign tuples over ``walls``; edges as index pairs."""

    walls: tuple
    vertices: tuple
    edges: tuple
    cube_count_by_dim: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return max(self.cube_count_by_dim, default=0)

    def graph(self):
        g = nx.Graph()
        g.add_nodes_from(range(len(self.vertices)))
        g.add_edges_from(self.edges)
        return g

    def vertex_label(self, k):
        return "".join("+" if s > 0 else "-" for s in self.vertices[k])

    def describe(self):
        return {
            "walls": list(self.walls),
            "vertex_count": len(self.vertices),
            "edge_count": len(self.edges),
            "cube_count_by_dim": {str(d): n for d, n in sorted(self.cube_count_by_dim.items())},
            "dimension": self.dimension,
        }


def _compat(ws):
    """``ok[i, si, j, sj]``: halfspace ``si`` of wall i meets halfspace ``sj`` of wall j."""
    ids = ws.wall_ids
    full = ws._full
    halves = [(full ^ ws._mask(w), ws._mask(w)) for w in ids]  # index 0 is the negative side
    n = len(ids)
    ok = np.ones((n, 2, n, 2), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j:
                for si in range(2):
                    for sj in range(2):
                        ok[i, si, j, sj] = bool(halves[i][si] & halves[j][sj])
    return ok


def orientations(ws, max_walls=DEFAULT_MAX_WALLS, max_vertices=DEFAULT_MAX_VERTICES):
    """All consistent orientations, as tuples of 0/1 (1 = positive side)."""
    n = len(ws.walls)
    if n > max_walls:
        raise ResourceError(f"{n} walls exceed the enumeration limit of {max_walls}")
    ok = _compat(ws)
    out = []
    choice = []

    def extend(i):
        if i == n:
            out.append(tuple(choice))
            if len(out) > max_vertices:
                raise ResourceError(f"more than {max_vertices} orientations")
            return
        for s in (0, 1):
            if all(ok[i, s, j, choice[j]] for j in range(i)):
                choice.append(s)
                extend(i + 1)
                choice.pop()

    extend(0)
    return out, ok


def dual_complex(ws, max_walls=DEFAULT_MAX_WALLS, max_vertices=DEFAULT_MAX_VERTICES):
    """Build the 1-skeleton and cube histogram of the dual cube complex.

    Each cube is counted once, at its corner choosing the negative side of
    every wall it spans.
    """
    verts, ok = orientations(ws, max_walls, max_vertices)
    n = len(ws.walls)
    index = {v: k for k, v in enumerate(verts)}
    edges = []
    hist = {}
    for k, v in enumerate(verts):
        hist[0] = hist.get(0, 0) + 1
        for i in range(n):
            if v[i] == 0:
                u = v[:i] + (1,) + v[i + 1:]
                if u in index:
                    edges.append((k, index[u]))
        # grow spanning sets at the lowest corner; flips stay consistent
        # exactly when the flipped walls pairwise cross and each flip is legal
        free = [i for i in range(n) if v[i] == 0 and
                all(ok[i, 1, j, v[j]] for j in range(n) if j != i)]

        def grow(chosen, start):
            for t in range(start, len(free)):
                i = free[t]
                if all(ok[i, 1, j, 1] for j in chosen):
                    d = len(chosen) + 1
                    hist[d] = hist.get(d, 0) + 1
                    grow(chosen + [i], t + 1)

        grow([], 0)
    edges.sort()
    vs = tuple(tuple(1 if s else -1 for s in v) for v in verts)
    return CubeComplexSkeleton(ws.wall_ids, vs, tuple(edges), dict(sorted(hist.items())))


def max_clique(g):
    """A maximum clique of ``g`` as a sorted list (empty graph gives [])."""
    if g.number_of_nodes() == 0:
        return []
    clique, _ = nx.max_weight_clique(g, weight=None)
    return sorted(clique)


def dimension(ambient, horizon=None, witness=False):
    """Largest set of pairwise crossing hyperplanes.

    A family system is evaluated on its truncation at ``horizon``.
    """
    if isinstance(ambient, FamilySystem):
        if horizon is None:
            raise InputError("a family system needs a horizon for its dimension")
        g = ambient.crossing_graph(horizon)
    else:
        g = ambient.crossing_graph()
    c = max_clique(g)
    d = max(len(c), 1) if g.number_of_nodes() else 0
    return (d, c) if witness else d


def dimension_report(system, horizons):
    """Dimension per horizon, with witnesses and whether the last two agree."""
    rows = []
    for h in horizons:
        d, c = dimension(system, h, witness=True)
        rows.append({"horizon": h, "dimension": d, "witness": [str(x) for x in c]})
    stable = len(rows) >= 2 and rows[-1]["dimension"] == rows[-2]["dimension"]
    return {"per_horizon": rows, "stable": stable}


# -- median check ---------------------------------------------------------------


@dataclass(frozen=True)
class MedianVerdict:
    ok: bool
    reason: str = ""
    triple: tuple | None = None
    median_count: int | None = None

    def describe(self):
        return {"ok": self.ok, "reason": self.reason,
                "triple": list(self.triple) if self.triple else None,
                "median_count": self.median_count}


def _distances(n, edges):
    """All-pairs graph distances by level-synchronous BFS on the adjacency matrix."""
    adj = np.zeros((n, n), dtype=np.float32)
    for a, b in edges:
        adj[a, b] = adj[b, a] = 1
    dist = np.full((n, n), -1, dtype=np.int32)
    np.fill_diagonal(dist, 0)
    frontier = np.eye(n, dtype=np.float32)
    level = 0
    while frontier.any():
        level += 1
        nxt = (frontier @ adj > 0) & (dist < 0)
        dist[nxt] = level
        frontier = nxt.astype(np.float32)
    return dist


def _codes(skel):
    return np.array([sum(1 << i for i, s in enumerate(v) if s > 0) for v in skel.vertices],
                    dtype=np.int64 if len(skel.walls) > 30 else np.int32)


def _hamming_fast_path(skel, dist, chunk=256):
    """Median check when graph distance equals Hamming distance of the labels.

    Then intervals are coordinate boxes, so a triple has a unique median
    exactly when its coordinatewise majority is a vertex.  Returns None
    when the metrics differ.
    """
    codes = _codes(skel)
    ham = np.bitwise_count(codes[:, None] ^ codes[None, :])
    if not np.array_equal(ham, dist):
        return None
    n = len(codes)
    present = np.zeros(1 << len(skel.walls), dtype=bool)
    present[codes] = True
    for a in range(n - 2):
        b = codes[a + 1:]
        for i in range(0, len(b) - 1, chunk):
            bi = b[i:i + chunk, None]
            c = b[i + 1:]
            maj = (codes[a] & (bi | c)) | (bi & c)
            # row r holds b = b[i + r]; only columns past it are triples
            miss = np.argwhere(~present[maj] & (np.arange(len(c)) >= np.arange(len(bi))[:, None]))
            if len(miss):
                r, j = map(int, miss[0])
                return MedianVerdict(False, "median count", (a, a + 1 + i + r, a + 2 + i + j), 0)
    return MedianVerdict(True, "every triple has a unique median")


def _generic(n, dist, chunk):
    # I[a, b] = {x : d(a, x) + d(x, b) = d(a, b)}
    inside = dist[:, None, :] + dist.T[None, :, :] == dist[:, :, None]
    packed = np.packbits(inside, axis=2, bitorder="little")
    pad = (-packed.shape[2]) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(packed.shape[:2] + (pad,), np.uint8)], axis=2)
    bits = packed.view(np.uint64)
    for a in range(n):
        for b0 in range(a + 1, n, chunk):
            bs = np.arange(b0, min(b0 + chunk, n))
            # rows: b, columns: c; only c > b is inspected
            m = bits[a, bs][:, None, :] & bits[a][None, :, :] & bits[bs]
            counts = np.bitwise_count(m).sum(axis=2)
            counts[np.arange(n)[None, :] <= bs[:, None]] = 1
            bad = np.argwhere(counts != 1)
            if len(bad):
                i, c = map(int, bad[0])
                return MedianVerdict(False, "median count", (a, int(bs[i]), c), int(counts[i, c]))
    return MedianVerdict(True, "every triple has a unique median")


def median_check(skel, budget=DEFAULT_MEDIAN_BUDGET, chunk=64):
    """Check that every vertex triple has exactly one median.

    When the graph metric is the Hamming metric of the vertex labels, the
    majority vote is the only candidate and is looked up directly.
    Otherwise intervals ``I(a, b)`` are packed bitsets and a triple's
    medians are the popcount of three ANDed rows.
    """
    n = len(skel.vertices)
    if n > budget:
        raise ResourceError(f"{n} vertices exceed the median-check budget of {budget}")
    if n == 0:
        return MedianVerdict(True, "empty")
    dist = _distances(n, skel.edges)
    if (dist < 0).any():
        a, b = map(int, np.argwhere(dist < 0)[0])
        return MedianVerdict(False, "disconnected", (a, b, b), 0)
    if len(skel.walls) <= 24:
        verdict = _hamming_fast_path(skel, dist)
        if verdict is not None:
            return verdict
    return _generic(n, dist, chunk)
