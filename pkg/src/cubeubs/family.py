"""Symbolic systems of countably many hyperplanes arranged in chain families.

A hyperplane is a :class:`Ref` ``(family, index)``.  Inside a family the index
order is a chain.  Each rule only has to say, for a hyperplane ``a`` and a
family ``n``, which members of ``n`` it crosses; that set is always an
interval of indices.  Crossing, separation and cofiniteness all follow:

* ``a`` crosses ``(n, j)`` iff ``j`` lies in the interval;
* a hyperplane that crosses part of a family lies, relative to every other
  member, on the side facing the crossed part; one that crosses none of the
  family lies on the low side of every member;
* ``a`` crosses all but finitely many members of ``n`` iff the interval is
  unbounded above.

Rules also publish a stability bound: relations between a hyperplane and a
set of anchors are constant along any family past index ``stable_bound(M)``
and along any fixed index past family ``stable_bound(M)``, where ``M`` is the
largest coordinate among the anchors.  That is what turns "all but finitely
many" into finite checks elsewhere in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError, RealizationError, ResourceError, Undecided
from .wallspace import FiniteWallspace, Wall

UNBOUNDED = None


class Ref(NamedTuple):
    family: int
    index: int

    def __str__(self):
        return f"H{self.family}_{self.index}"


def ref_name(ref):
    return str(Ref(*ref))


class FamilySystem:
    """Base class for rule-described hyperplane systems."""

    family_count = UNBOUNDED
    rule_name = "abstract"

    def interval(self, a, family):
        """Indices of ``family`` crossed by ``a``: ``(lo, hi)``, ``hi`` may be None.

        Returns None when ``a`` crosses no member of the family.  Only called
        with ``family != a.family``.
        """
        raise NotImplementedError

    def stable_bound(self, m):
        raise NotImplementedError

    def params(self):
        return {}

    # -- validation ---------------------------------------------------------

    def check_ref(self, ref):
        f, i = ref
        if f < 0 or i < 0:
            raise InputError(f"negative coordinate in {ref_name(ref)}")
        if self.family_count is not None and f >= self.family_count:
            raise InputError(f"{ref_name(ref)}: family out of range (family_count={self.family_count})")
        return Ref(f, i)

    def check_family(self, family):
        if family < 0 or (self.family_count is not None and family >= self.family_count):
            raise InputError(f"family {family} out of range")
        return family

    @property
    def bounded(self):
        return self.family_count is not None

    def family_range(self, horizon):
        """Families of the truncation: all of them when bounded, else those below the horizon."""
        return range(horizon if self.family_count is None else self.family_count)

    # -- derived relations -------------------------------------------------

    def hyperplanes(self, horizon):
        """All refs with family and index below the horizon, in (family, index) order."""
        return tuple(Ref(f, i) for f in self.family_range(horizon) for i in range(horizon))

    def crosses(self, a, b):
        a, b = self.check_ref(a), self.check_ref(b)
        if a == b:
            raise InputError(f"{a} does not cross itself")
        if a.family == b.family:
            return False
        iv = self.interval(a, b.family)
        return iv is not None and iv[0] <= b.index and (iv[1] is None or b.index <= iv[1])

    def side(self, w, a):
        """Halfspace of ``w`` (+1 / -1) containing ``a``; 0 if they cross."""
        w, a = self.check_ref(w), self.check_ref(a)
        if w == a:
            raise InputError(f"side of {w} relative to itself")
        if w.family == a.family:
            return 1 if a.index > w.index else -1
        iv = self.interval(a, w.family)
        if iv is None:
            return -1
        lo, hi = iv
        if w.index < lo:
            return 1
        if hi is not None and w.index > hi:
            return -1
        return 0

    def separates(self, w, a, b):
        if len({tuple(w), tuple(a), tuple(b)}) < 3:
            raise InputError("separates needs three distinct hyperplanes")
        sa, sb = self.side(w, a), self.side(w, b)
        return sa != 0 and sb != 0 and sa != sb

    def facing_triple(self, a, b, c):
        if self.crosses(a, b) or self.crosses(a, c) or self.crosses(b, c):
            return False
        return not (self.separates(a, b, c) or self.separates(b, a, c) or self.separates(c, a, b))

    def cofinitely_crosses(self, h, family):
        """Does ``h`` cross all but finitely many members of ``family``?"""
        h = self.check_ref(h)
        self.check_family(family)
        if h.family == family:
            raise InputError(f"{h} belongs to family {family}")
        iv = self.interval(h, family)
        return iv is not None and iv[1] is None

    def crossing_graph(self, horizon):
        import networkx as nx

        refs = self.hyperplanes(horizon)
        g = nx.Graph()
        g.add_nodes_from(refs)
        for a, b in itertools.combinations(refs, 2):
            if self.crosses(a, b):
                g.add_edge(a, b)
        return g

    def describe(self):
        return {"rule": self.rule_name, **self.params()}


@dataclass(frozen=True)
class GridRule(FamilySystem):
    """Standard cubulation of Euclidean ``d``-space: ``d`` pairwise crossing families."""

    d: int
    rule_name = "grid"

    def __post_init__(self):
        if self.d < 1:
            raise InputError("grid dimension must be positive")

    @property
    def family_count(self):
        return self.d

    def interval(self, a, family):
        return (0, None)

    def stable_bound(self, m):
        return m + 2

    def params(self):
        return {"d": self.d}


@dataclass(frozen=True)
class CorrigendumRule(FamilySystem):
    """Families ``H^n``; for ``n < m``, ``H^m_i`` crosses ``H^n_j`` exactly when ``j > m``.

    ``families=None`` gives the unbounded system with one family per integer.
    """

    families: int | None = None
    rule_name = "corrigendum"

    def __post_init__(self):
        if self.families is not None and self.families < 1:
            raise InputError("family count must be positive")

    @property
    def family_count(self):
        return self.families

    def interval(self, a, family):
        m, i = a
        if family < m:
            return (m + 1, None)
        # a sits in the lower family; every member of the higher one crosses a iff i > family
        return (0, None) if i > family else None

    def stable_bound(self, m):
        return m + 2

    def params(self):
        return {"families": self.families}


PAIR_KINDS = (
    "all", "none", "first_above", "second_above", "first_atmost",
    "second_atmost", "stair", "stair_rev", "unknown",
)


@dataclass(frozen=True)
class PairKind:
    """Eventual crossing behaviour of two families ``p < q``.

    With ``i`` the index in ``p`` and ``j`` the index in ``q``:
    ``first_above t``: cross iff ``i > t``; ``second_above t``: iff ``j > t``;
    ``first_atmost t``: iff ``i <= t``; ``second_atmost t``: iff ``j <= t``;
    ``stair k``: iff ``j >= i + k``; ``stair_rev k``: iff ``i >= j + k``.
    ``unknown`` leaves the pair undeclared.
    """

    kind: str
    param: int = 0

    def __post_init__(self):
        if self.kind not in PAIR_KINDS:
            raise InputError(f"unknown pair kind {self.kind!r}")

    def crosses(self, i, j):
        k, t = self.kind, self.param
        if k == "all":
            return True
        if k == "none":
            return False
        if k == "first_above":
            return i > t
        if k == "second_above":
            return j > t
        if k == "first_atmost":
            return i <= t
        if k == "second_atmost":
            return j <= t
        if k == "stair":
            return j >= i + t
        if k == "stair_rev":
            return i >= j + t
        raise Undecided("pair behaviour not declared")

    def first_interval(self, i):
        """Indices ``j`` of the second family crossed by member ``i`` of the first."""
        k, t = self.kind, self.param
        if k == "all":
            return (0, None)
        if k == "none":
            return None
        if k == "first_above":
            return (0, None) if i > t else None
        if k == "second_above":
            return (max(t + 1, 0), None)
        if k == "first_atmost":
            return (0, None) if i <= t else None
        if k == "second_atmost":
            return (0, t) if t >= 0 else None
        if k == "stair":
            return (max(0, i + t), None)
        if k == "stair_rev":
            return (0, i - t) if i - t >= 0 else None
        raise Undecided("pair behaviour not declared")

    def second_interval(self, j):
        """Indices ``i`` of the first family crossed by member ``j`` of the second."""
        k, t = self.kind, self.param
        if k == "all":
            return (0, None)
        if k == "none":
            return None
        if k == "first_above":
            return (max(t + 1, 0), None)
        if k == "second_above":
            return (0, None) if j > t else None
        if k == "first_atmost":
            return (0, t) if t >= 0 else None
        if k == "second_atmost":
            return (0, None) if j <= t else None
        if k == "stair":
            return (0, j - t) if j - t >= 0 else None
        if k == "stair_rev":
            return (max(0, j + t), None)
        raise Undecided("pair behaviour not declared")


@dataclass(frozen=True)
class TableTailRule(FamilySystem):
    """Finitely many families with an explicit crossing table below ``cutoff``.

    ``pairs`` maps ``(p, q)`` with ``p < q`` to a :class:`PairKind` fixing the
    behaviour everywhere the table does not reach.  ``matrix``, when given,
    is the set of crossing pairs ``frozenset({ref, ref})`` among refs with
    index below the cutoff; pairs absent from it do not cross.
    """

    families: int
    cutoff: int = 0
    pairs: dict = field(default_factory=dict)
    matrix: frozenset | None = None
    rule_name = "table"

    def __post_init__(self):
        if self.families < 1:
            raise InputError("family count must be positive")
        norm = {}
        for (p, q), kind in self.pairs.items():
            if p == q or not (0 <= p < self.families and 0 <= q < self.families):
                raise InputError(f"bad family pair {(p, q)}")
            if not isinstance(kind, PairKind):
                kind = PairKind(*kind) if isinstance(kind, tuple) else PairKind(kind)
            if p > q:
                kind = _swap(kind)
                p, q = q, p
            norm[(p, q)] = kind
        for p, q in itertools.combinations(range(self.families), 2):
            norm.setdefault((p, q), PairKind("unknown"))
        object.__setattr__(self, "pairs", norm)
        if self.matrix is not None:
            m = frozenset(frozenset(Ref(*r) for r in pair) for pair in self.matrix)
            for pair in m:
                a, b = sorted(pair)
                if a.family == b.family or max(a.index, b.index) >= self.cutoff:
                    raise InputError(f"matrix entry {a}-{b} outside the table")
                self.check_ref(a), self.check_ref(b)
            object.__setattr__(self, "matrix", m)
            self._validate_intervals()

    @property
    def family_count(self):
        return self.families

    def _base_interval(self, a, family):
        p, i = a
        if p < family:
            return self.pairs[(p, family)].first_interval(i)
        return self.pairs[(family, p)].second_interval(i)

    def interval(self, a, family):
        if self.matrix is None or a.index >= self.cutoff:
            return self._base_interval(a, family)
        hits = [j for j in range(self.cutoff)
                if frozenset((Ref(*a), Ref(family, j))) in self.matrix]
        base = self._base_interval(a, family)
        tail = None
        if base is not None and (base[1] is None or base[1] >= self.cutoff):
            tail = (max(base[0], self.cutoff), base[1])
        if not hits:
            return tail
        lo, hi = min(hits), max(hits)
        if hits != list(range(lo, hi + 1)) or (tail is not None and (hi != self.cutoff - 1 or tail[0] != self.cutoff)):
            raise InputError(f"{Ref(*a)} crosses a non-convex set of family {family}")
        return (lo, hi) if tail is None else (lo, tail[1])

    def _validate_intervals(self):
        for f in range(self.families):
            for i in range(self.cutoff):
                for g in range(self.families):
                    if g != f:
                        try:
                            self.interval(Ref(f, i), g)
                        except Undecided:
                            pass

    def stable_bound(self, m):
        shift = max((abs(k.param) for k in self.pairs.values()), default=0)
        return m + self.cutoff + shift + 2

    def params(self):
        out = {
            "families": self.families,
            "cutoff": self.cutoff,
            "pairs": [
                {"families": [p, q], "kind": k.kind, "param": k.param}
                for (p, q), k in sorted(self.pairs.items())
            ],
        }
        if self.matrix is not None:
            out["matrix"] = sorted(
                [list(map(list, sorted(pair))) for pair in self.matrix]
            )
        return out


def _swap(kind):
    swapped = {
        "first_above": "second_above", "second_above": "first_above",
        "first_atmost": "second_atmost", "second_atmost": "first_atmost",
        "stair": "stair_rev", "stair_rev": "stair",
    }
    return PairKind(swapped.get(kind.kind, kind.kind), kind.param)


# -- realization ----------------------------------------------------------------


@dataclass(frozen=True)
class Realization:
    """A finite wallspace reproducing a symbolic system below a horizon."""

    system: FamilySystem
    horizon: int
    wallspace: FiniteWallspace
    refs: tuple

    def wall_of(self, ref):
        return ref_name(ref)

    def ref_of(self, wid):
        return self._by_name[wid]

    @property
    def _by_name(self):
        return {ref_name(r): r for r in self.refs}


def consistent_orientations(refs, crosses, side, limit=200_000):
    """Enumerate orientations of ``refs`` in which no two chosen halfspaces are disjoint.

    For non-crossing ``a, b`` the halfspaces facing away from each other,
    ``a^{-side(a,b)}`` and ``b^{-side(b,a)}``, are the disjoint pair; an
    orientation choosing both is inconsistent.
    """
    n = len(refs)
    forbid = [dict() for _ in range(n)]
    for x, y in itertools.combinations(range(n), 2):
        a, b = refs[x], refs[y]
        if crosses(a, b):
            continue
        forbid[y][x] = (-side(a, b), -side(b, a))
    out = []
    choice = [0] * n

    def extend(k):
        if k == n:
            out.append(tuple(choice))
            if len(out) > limit:
                raise ResourceError(f"more than {limit} consistent orientations")
            return
        for s in (-1, 1):
            ok = True
            for x, (sx, sy) in forbid[k].items():
                if choice[x] == sx and s == sy:
                    ok = False
                    break
            if ok:
                choice[k] = s
                extend(k + 1)
        choice[k] = 0

    extend(0)
    return out


def _realize(system, refs, limit):
    orients = consistent_orientations(refs, system.crosses, system.side, limit)
    points = tuple(f"v{k}" for k in range(len(orients)))
    walls = tuple(
        Wall(ref_name(r), frozenset(p for p, o in zip(points, orients) if o[x] == 1))
        for x, r in enumerate(refs)
    )
    ws = FiniteWallspace(points, walls)
    for a, b in itertools.permutations(refs, 2):
        if system.side(a, b) != ws.side(ref_name(a), ref_name(b)):
            raise InputError(f"{a}/{b} not reproduced")
    return ws


def _find_conflict(system, refs, limit):
    for size in (2, 3, 4):
        for sub in itertools.combinations(refs, size):
            try:
                _realize(system, sub, limit)
            except InputError:
                return sub
    return tuple(refs)


def pocset_conflict(system, horizon):
    """First failure of the halfspace order below the horizon, or None.

    A non-crossing pair ``a, b`` with ``s = side(a, b)`` and
    ``t = side(b, a)`` declares ``a^{-s} <= b^{t}`` (and its complement
    form).  The truncation is realizable exactly when these inclusions are
    transitively closed, never put a halfspace below its complement, and
    never relate two crossing hyperplanes.  One boolean matrix product
    finds the first offending triple ``(a, b, c)``.
    """
    refs = system.hyperplanes(horizon)
    n = len(refs)
    # node 2k is the negative halfspace of refs[k], 2k + 1 the positive one
    le = np.zeros((2 * n, 2 * n), dtype=bool)
    for x, y in itertools.permutations(range(n), 2):
        s = system.side(refs[x], refs[y])
        if s:
            t = system.side(refs[y], refs[x])
            le[2 * x + (s < 0), 2 * y + (t > 0)] = True
    two = (le.astype(np.int32) @ le.astype(np.int32)) > 0
    np.fill_diagonal(two, False)
    bad = two & ~le
    if not bad.any():
        return None
    p, r = map(int, np.argwhere(bad)[0])
    q = int(np.flatnonzero(le[p] & le[:, r])[0])
    return refs[p // 2], refs[q // 2], refs[r // 2]


def realize_truncation(system, horizon, limit=200_000):
    """Synthesize a finite wallspace for all refs below ``horizon``.

    Points are the consistent orientations of the truncated system, so the
    realization exists exactly when the rule's crossing and side data are
    compatible; otherwise a :class:`RealizationError` names a minimal
    conflicting tuple of hyperplanes.
    """
    if horizon < 2:
        raise InputError("horizon must be at least 2")
    refs = system.hyperplanes(horizon)
    conflict = pocset_conflict(system, horizon)
    if conflict is not None:
        raise RealizationError(
            f"rule {system.rule_name} is not realizable at horizon {horizon}", conflict=conflict)
    try:
        ws = _realize(system, refs, limit)
    except InputError:
        conflict = _find_conflict(system, refs, limit)
        raise RealizationError(
            f"rule {system.rule_name} is not realizable at horizon {horizon}",
            conflict=conflict,
        ) from None
    return Realization(system, horizon, ws, refs)
