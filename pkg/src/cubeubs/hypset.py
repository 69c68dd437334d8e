"""Hyperplane sets: explicit finite sets and symbolic "families and tails" sets.

A symbolic set is a finite union of regions plus finite corrections:

``Row(f, s)``   members ``(f, i)`` with ``i >= s`` (a family tail)
``Col(c, s)``   members ``(f, c)`` with ``f >= s`` (one index across families)
``Block(f, s)`` members ``(g, i)`` with ``g >= f`` and ``i >= s``

Columns and blocks only make sense when the family count is unbounded;
with finitely many families they are rewritten into rows and finite sets.
The region list is the normal form used for almost-equivalence: two
symbolic sets differ by finitely many hyperplanes exactly when each
region of one is almost covered by the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InputError
from .family import FamilySystem, Ref


class Row(NamedTuple):
    family: int
    start: int

    kind = "row"

    def contains(self, ref):
        return ref[0] == self.family and ref[1] >= self.start

    def members_below(self, horizon, families=None):
        if self.family >= (horizon if families is None else families):
            return []
        return [Ref(self.family, i) for i in range(self.start, horizon)]

    def far_members(self, k):
        return [Ref(self.family, max(k, self.start))]

    @property
    def extent(self):
        return max(self.family, self.start)

    def describe(self):
        return {"family": self.family, "from": self.start}


class Col(NamedTuple):
    index: int
    start: int

    kind = "col"

    def contains(self, ref):
        return ref[1] == self.index and ref[0] >= self.start

    def members_below(self, horizon, families=None):
        if self.index >= horizon:
            return []
        return [Ref(f, self.index) for f in range(self.start, horizon if families is None else families)]

    def far_members(self, k):
        return [Ref(max(k, self.start), self.index)]

    @property
    def extent(self):
        return max(self.index, self.start)

    def describe(self):
        return {"column": self.index, "from": self.start}


class Block(NamedTuple):
    family: int
    start: int

    kind = "block"

    def contains(self, ref):
        return ref[0] >= self.family and ref[1] >= self.start

    def members_below(self, horizon, families=None):
        top = horizon if families is None else families
        return [Ref(f, i) for f in range(self.family, top) for i in range(self.start, horizon)]

    def far_members(self, k):
        """Representatives of every infinite direction of the block past ``k``.

        Each row below ``k`` contributes its member at index ``k``, each
        index below ``k`` its member at family ``k``, plus the corner.
        """
        k = max(k, self.family, self.start)
        out = [Ref(f, k) for f in range(self.family, k)]
        out += [Ref(k, i) for i in range(self.start, k)]
        out.append(Ref(k, k))
        return out

    @property
    def extent(self):
        return max(self.family, self.start)

    def describe(self):
        return {"block": self.family, "from": self.start}


REGION_ORDER = {"row": 0, "col": 1, "block": 2}


def region_key(r):
    return (REGION_ORDER[r.kind], tuple(r))


def make_region(kind, a, b):
    return {"row": Row, "col": Col, "block": Block}[kind](a, b)


@dataclass(frozen=True)
class HypSet:
    """A set of hyperplanes of an ambient.

    Explicit sets list their members (wall ids or refs).  Symbolic sets are
    ``regions`` plus the finite corrections ``plus`` and ``minus``; only
    family systems carry symbolic sets.
    """

    ambient: object
    regions: tuple = ()
    plus: frozenset = frozenset()
    minus: frozenset = frozenset()
    explicit: bool = False
    label: str | None = field(default=None, compare=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def of(cls, ambient, members, label=None):
        members = list(members)
        if isinstance(ambient, FamilySystem):
            members = [ambient.check_ref(m) for m in members]
        else:
            for m in members:
                if m not in ambient:
                    raise InputError(f"unknown hyperplane {m!r}")
        if len(set(members)) != len(members):
            raise InputError("explicit hyperplane set has duplicates")
        return cls(ambient, (), frozenset(members), frozenset(), True, label)

    @classmethod
    def symbolic(cls, system, regions=(), plus=(), minus=(), label=None):
        if not isinstance(system, FamilySystem):
            raise InputError("symbolic sets need a family system")
        return _normalize(system, list(regions), set(plus), set(minus), label)

    @classmethod
    def family(cls, system, f, start=0, label=None):
        system.check_family(f)
        return cls.symbolic(system, [Row(f, start)], label=label)

    @classmethod
    def full(cls, system, label="V"):
        """Every hyperplane of the system."""
        if system.bounded:
            return cls.symbolic(system, [Row(f, 0) for f in range(system.family_count)], label=label)
        return cls.symbolic(system, [Block(0, 0)], label=label)

    def relabel(self, label):
        return HypSet(self.ambient, self.regions, self.plus, self.minus, self.explicit, label)

    # -- queries -----------------------------------------------------------

    @property
    def is_symbolic(self):
        return not self.explicit

    @property
    def infinite(self):
        return bool(self.regions)

    def __contains__(self, h):
        if self.explicit:
            return h in self.plus
        h = Ref(*h)
        if h in self.minus:
            return False
        return h in self.plus or any(r.contains(h) for r in self.regions)

    def members_below(self, horizon):
        """Members with both coordinates below the horizon, in canonical order."""
        if self.explicit:
            if isinstance(self.ambient, FamilySystem):
                return sorted(self.plus)
            order = {w: k for k, w in enumerate(self.ambient.hyperplanes())}
            return sorted(self.plus, key=order.__getitem__)
        # a bounded system keeps every family; the horizon cuts indices only
        fam = self.ambient.family_count if self.ambient.bounded else horizon
        out = set(m for m in self.plus if m[0] < fam and m[1] < horizon)
        for r in self.regions:
            out.update(r.members_below(horizon, fam))
        out -= self.minus
        return sorted(out)

    def finite_members(self):
        if self.infinite:
            raise InputError("set is infinite")
        return self.members_below(10**9) if self.explicit else sorted(self.plus - self.minus)

    @property
    def extent(self):
        """Largest coordinate mentioned in the normal form."""
        ext = [r.extent for r in self.regions]
        ext += [max(m) for m in self.plus | self.minus] if not self.explicit else []
        return max(ext, default=0)

    # -- algebra -----------------------------------------------------------

    def union(self, other, label=None):
        _same_ambient(self, other)
        if self.explicit and other.explicit:
            return HypSet(self.ambient, (), self.plus | other.plus, frozenset(), True, label)
        a, b = _as_symbolic(self), _as_symbolic(other)
        minus = {m for m in a.minus | b.minus if m not in a and m not in b}
        return _normalize(self.ambient, list(a.regions) + list(b.regions),
                          set(a.plus) | set(b.plus), minus, label)

    def difference(self, other, label=None):
        _same_ambient(self, other)
        if self.explicit:
            return HypSet(self.ambient, (), frozenset(m for m in self.plus if m not in other),
                          frozenset(), True, label)
        o = _as_symbolic(other)
        pieces, leftovers = list(self.regions), set()
        for q in o.regions:
            nxt = []
            for r in pieces:
                rest, fin = _subtract(r, q)
                nxt.extend(rest)
                leftovers |= fin
            pieces = nxt
        minus = set(self.minus) | {m for m in o.plus if m not in o.minus}
        for r in pieces:
            for q in o.regions:
                pt = _transverse_point(r, q)
                if pt is not None:
                    minus.add(pt)
        # members o removes from its own regions stay in the difference
        plus = {m for m in leftovers | set(self.plus) | set(o.minus) if m in self and m not in o}
        minus = {m for m in minus if m not in plus}
        return _normalize(self.ambient, pieces, plus, minus, label)

    def intersection_below(self, other, horizon):
        return [m for m in self.members_below(horizon) if m in other]

    # -- normal form -------------------------------------------------------

    def canonical(self):
        """Hashable normal form."""
        if self.explicit:
            return ("explicit", tuple(sorted(map(str, self.plus))))
        return (
            tuple((r.kind, *r) for r in self.regions),
            tuple(sorted(self.plus)),
            tuple(sorted(self.minus)),
        )

    def describe(self):
        if self.explicit:
            return {"explicit": [str(m) if not isinstance(m, str) else m
                                 for m in self.members_below(10**9)]}
        return {
            "regions": [r.describe() for r in self.regions],
            "plus": [str(m) for m in sorted(self.plus)],
            "minus": [str(m) for m in sorted(self.minus)],
        }

    def __str__(self):
        if self.explicit:
            return "{" + ", ".join(map(str, self.members_below(10**9))) + "}"
        parts = []
        for r in self.regions:
            if r.kind == "row":
                parts.append(f"H{r.family}_[{r.start}..)")
            elif r.kind == "col":
                parts.append(f"H[{r.start}..)_{r.index}")
            else:
                parts.append(f"H[{r.family}..)_[{r.start}..)")
        parts += [f"+{m}" for m in sorted(self.plus)]
        parts += [f"-{m}" for m in sorted(self.minus)]
        return " ".join(parts) if parts else "{}"


def _same_ambient(a, b):
    if a.ambient != b.ambient:
        raise InputError("hyperplane sets live in different ambients")


def _as_symbolic(s):
    if not s.explicit:
        return s
    if not isinstance(s.ambient, FamilySystem):
        raise InputError("explicit wallspace set used where a symbolic set is required")
    return HypSet(s.ambient, (), s.plus, frozenset(), False, s.label)


def _subtract(r, q):
    """``r - q`` for two regions: ``(regions, finite members)``."""
    if r.kind == "row":
        f, s = r
        if q.kind == "row":
            if q.family != f:
                return [r], set()
            if q.start <= s:
                return [], set()
            return [], {Ref(f, i) for i in range(s, q.start)}
        if q.kind == "col":
            # one member removed; handled through the minus set by the caller
            return [r], set()
        if f < q.family:
            return [r], set()
        if q.start <= s:
            return [], set()
        return [], {Ref(f, i) for i in range(s, q.start)}
    if r.kind == "col":
        c, s = r
        if q.kind == "row":
            return [r], set()
        if q.kind == "col":
            if q.index != c:
                return [r], set()
            if q.start <= s:
                return [], set()
            return [], {Ref(f, c) for f in range(s, q.start)}
        if c < q.start:
            return [r], set()
        if q.family <= s:
            return [], set()
        return [], {Ref(f, c) for f in range(s, q.family)}
    f0, s = r
    if q.kind == "row":
        f, s2 = q
        if f < f0:
            return [r], set()
        out = [Row(g, s) for g in range(f0, f)] + [Block(f + 1, s)]
        return out, {Ref(f, i) for i in range(s, s2)}
    if q.kind == "col":
        c, f1 = q
        if c < s:
            return [r], set()
        top = max(f0, f1)
        out = [Row(g, s) for g in range(f0, top)]
        out += [Col(i, top) for i in range(s, c)]
        out.append(Block(top, c + 1))
        return out, set()
    g0, s2 = q
    out = [Row(g, s) for g in range(f0, g0)]
    top = max(f0, g0)
    out += [Col(i, top) for i in range(s, s2)]
    return out, set()


def _transverse_point(r, q):
    """The single common member of a row and a column, if any."""
    if r.kind == "row" and q.kind == "col":
        row, col = r, q
    elif r.kind == "col" and q.kind == "row":
        row, col = q, r
    else:
        return None
    if col.index >= row.start and row.family >= col.start:
        return Ref(row.family, col.index)
    return None


def _expand(system, regions):
    """Rewrite columns and blocks for bounded systems; drop empty regions."""
    out, fin = [], set()
    for r in regions:
        if not system.bounded:
            out.append(r)
            continue
        n = system.family_count
        if r.kind == "row":
            if r.family < n:
                out.append(r)
        elif r.kind == "col":
            fin |= {Ref(f, r.index) for f in range(r.start, n)}
        else:
            out += [Row(f, r.start) for f in range(r.family, n)]
    return out, fin


def _normalize(system, regions, plus, minus, label):
    regions, fin = _expand(system, regions)
    plus = {Ref(*m) for m in plus} | fin
    minus = {Ref(*m) for m in minus}
    for m in plus | minus:
        system.check_ref(m)
    # merge rows of the same family, columns of the same index
    best = {}
    blocks = []
    for r in regions:
        if r.kind == "block":
            blocks.append(r)
            continue
        key = (r.kind, r[0])
        if key not in best or r[1] < best[key][1]:
            best[key] = r
    blocks = sorted(set(blocks))
    blocks = [b for b in blocks if not any(
        c != b and b.family >= c.family and b.start >= c.start for c in blocks)]
    regions = [r for r in best.values() if not any(
        r.kind == "row" and r.family >= b.family and r.start >= b.start
        or r.kind == "col" and r.index >= b.start and r.start >= b.family
        for b in blocks)] + blocks

    def in_regions(m):
        return any(r.contains(m) for r in regions)

    minus = {m for m in minus if in_regions(m) and m not in plus}
    plus = {m for m in plus if not in_regions(m)}
    # advance row starts past removed prefixes
    changed = True
    while changed:
        changed = False
        for k, r in enumerate(regions):
            if r.kind != "row":
                continue
            head = Ref(r.family, r.start)
            others = [q for q in regions if q is not r]
            if head in minus and not any(q.contains(head) for q in others):
                regions[k] = Row(r.family, r.start + 1)
                minus.discard(head)
                changed = True
            elif r.start > 0 and Ref(r.family, r.start - 1) in plus:
                # extend a row backwards over finite members just below it
                regions[k] = Row(r.family, r.start - 1)
                plus.discard(Ref(r.family, r.start - 1))
                changed = True
    regions.sort(key=region_key)
    return HypSet(system, tuple(regions), frozenset(plus), frozenset(minus), False, label)


def lift(system, members, horizon, label=None):
    """Recover a symbolic set from its members below a horizon.

    A family whose members fill a run ending at the horizon of length at
    least half the horizon becomes a row from the start of that run; the
    same for columns when families are unbounded.  Everything else is kept
    as finite corrections.  Lifting is a horizon heuristic; callers check
    stability by lifting again at a larger horizon.
    """
    present = set(Ref(*m) for m in members)
    regions = []
    need = max(2, horizon // 2)
    for f in system.family_range(horizon):
        s = horizon
        while s > 0 and Ref(f, s - 1) in present:
            s -= 1
        if horizon - s >= need:
            regions.append(Row(f, s))
    if not system.bounded:
        for c in range(horizon):
            s = horizon
            while s > 0 and Ref(s - 1, c) in present:
                s -= 1
            if horizon - s >= need:
                regions.append(Col(c, s))
        rows = [r for r in regions if r.kind == "row"]
        # many full rows near the horizon read as a block
        if len(rows) >= need and rows[-1].family == horizon - 1:
            starts = {r.start for r in rows}
            f0 = horizon
            while f0 > 0 and any(r.family == f0 - 1 for r in rows):
                f0 -= 1
            if len(starts) == 1 and horizon - f0 >= need:
                s = starts.pop()
                regions = [r for r in regions if not (r.kind == "row" and r.family >= f0)]
                regions.append(Block(f0, s))
    covered = set()
    for r in regions:
        covered.update(r.members_below(horizon, system.family_count if system.bounded else None))
    plus = present - covered
    minus = covered - present
    return _normalize(system, regions, plus, minus, label)
