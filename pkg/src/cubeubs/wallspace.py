"""Finite wallspaces: walls as bipartitions of a finite point set.

Everything here is computed directly from the point sets, which makes this
module the brute-force reference that the symbolic rules are checked against.
Walls and hyperplanes are the same thing throughout the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .errors import InputError


@dataclass(frozen=True)
class Wall:
    id: str
    positive_side: frozenset


@dataclass(frozen=True)
class FiniteWallspace:
    """A finite set of points together with a list of walls.

    Point and wall order is construction order and is used for every
    iteration, so results are deterministic.
    """

    points: tuple
    walls: tuple
    _index: dict = field(init=False, repr=False, compare=False)
    _masks: dict = field(init=False, repr=False, compare=False)
    _full: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(self.points)
        walls = tuple(self.walls)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "walls", walls)
        if len(set(points)) != len(points):
            raise InputError("duplicate point id")
        bit = {p: 1 << k for k, p in enumerate(points)}
        full = (1 << len(points)) - 1
        index, masks, seen = {}, {}, {}
        for w in walls:
            if w.id in index:
                raise InputError(f"duplicate wall id {w.id!r}")
            unknown = set(w.positive_side) - bit.keys()
            if unknown:
                raise InputError(f"wall {w.id!r} uses unknown points {sorted(unknown)}")
            m = 0
            for p in w.positive_side:
                m |= bit[p]
            if m == 0 or m == full:
                raise InputError(f"wall {w.id!r} does not split the point set")
            key = min(m, full ^ m)
            if key in seen:
                raise InputError(f"walls {seen[key]!r} and {w.id!r} define the same bipartition")
            seen[key] = w.id
            index[w.id] = w
            masks[w.id] = m
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_masks", masks)
        object.__setattr__(self, "_full", full)

    @classmethod
    def from_sides(cls, points, sides):
        """Build from a mapping ``wall id -> iterable of positive points``."""
        return cls(tuple(points), tuple(Wall(k, frozenset(v)) for k, v in sides.items()))

    # -- ambient protocol -------------------------------------------------

    @property
    def wall_ids(self):
        return tuple(w.id for w in self.walls)

    def hyperplanes(self, horizon=None):
        """All wall ids; the horizon is irrelevant for a finite wallspace."""
        return self.wall_ids

    def __contains__(self, wid):
        return wid in self._index

    def _mask(self, wid):
        try:
            return self._masks[wid]
        except KeyError:
            raise InputError(f"unknown wall id {wid!r}") from None

    def halfspaces(self, wid):
        """Return ``(positive, negative)`` point sets of a wall."""
        m = self._mask(wid)
        pos = frozenset(p for k, p in enumerate(self.points) if m >> k & 1)
        return pos, frozenset(self.points) - pos

    def crosses(self, a, b):
        if a == b:
            raise InputError(f"a wall does not cross itself ({a!r})")
        ma, mb = self._mask(a), self._mask(b)
        na, nb = self._full ^ ma, self._full ^ mb
        return bool(ma & mb and ma & nb and na & mb and na & nb)

    def side(self, w, a):
        """The halfspace of ``w`` (``+1`` or ``-1``) containing wall ``a``.

        Returns 0 when the walls cross.  A non-crossing wall lies in the
        halfspace of ``w`` that contains one of its own halfspaces.
        """
        if w == a:
            raise InputError(f"side of a wall relative to itself ({w!r})")
        mw, ma = self._mask(w), self._mask(a)
        if self.crosses(w, a):
            return 0
        na = self._full ^ ma
        if ma & ~mw & self._full == 0 or na & ~mw & self._full == 0:
            return 1
        return -1

    def separates(self, w, a, b):
        if len({w, a, b}) < 3:
            raise InputError("separates needs three distinct walls")
        sa = self.side(w, a)
        sb = self.side(w, b)
        return sa != 0 and sb != 0 and sa != sb

    def facing_triple(self, a, b, c):
        if len({a, b, c}) < 3:
            raise InputError("facing_triple needs three distinct walls")
        if self.crosses(a, b) or self.crosses(a, c) or self.crosses(b, c):
            return False
        return not (self.separates(a, b, c) or self.separates(b, a, c) or self.separates(c, a, b))

    def relation(self, a, b):
        """Classify a pair: ``cross``, ``a_in_b``, ``b_in_a``, ``disjoint`` or ``cover``.

        ``a_in_b`` means the positive side of a is inside the positive side
        of b; ``disjoint`` means the positive sides do not meet; ``cover``
        means the negative sides do not meet.
        """
        if self.crosses(a, b):
            return "cross"
        ma, mb = self._mask(a), self._mask(b)
        if ma & mb == 0:
            return "disjoint"
        if (ma | mb) == self._full:
            return "cover"
        if ma & ~mb == 0:
            return "a_in_b"
        return "b_in_a"

    def crossing_graph(self):
        g = nx.Graph()
        g.add_nodes_from(self.wall_ids)
        for a, b in itertools.combinations(self.wall_ids, 2):
            if self.crosses(a, b):
                g.add_edge(a, b)
        return g

    def dimension(self):
        from .dual import dimension

        return dimension(self)


def tripod():
    """Three pairwise disjoint walls around a centre point (a facing triple)."""
    return FiniteWallspace.from_sides("oxyz", {"x": "x", "y": "y", "z": "z"})


def nested_chain(k):
    """``k`` nested walls on a path of ``k + 1`` points."""
    points = [f"p{i}" for i in range(k + 1)]
    return FiniteWallspace.from_sides(points, {f"w{i}": points[i + 1:] for i in range(k)})


def crossing_walls(n):
    """``n`` pairwise crossing walls: the coordinate walls of the ``n``-cube."""
    points = ["".join(bits) for bits in itertools.product("01", repeat=n)]
    return FiniteWallspace.from_sides(
        points, {f"c{i}": [p for p in points if p[i] == "1"] for i in range(n)}
    )
