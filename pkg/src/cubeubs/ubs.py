"""Chains, closures, certificates and the almost-crossing relation.

Predicates about infinite sets take a horizon.  For symbolic sets the
"infinitely many on this side" and "all but finitely many" parts are decided
exactly from the rule's stability bound; only the scan over members (which
hyperplane is bidirectional, which triple is facing, which wall separates)
is limited to members below the horizon.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, PreconditionError, Undecided
from .family import FamilySystem, Ref
from .hypset import Col, HypSet, Row, lift


def _key_str(k):
    return k if isinstance(k, str) else str(Ref(*k))


# -- chains ---------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    """A finite run of a chain, optionally with the region its tail follows."""

    elements: tuple
    tail: object = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def describe(self):
        out = {"elements": [_key_str(e) for e in self.elements]}
        if self.tail is not None:
            out["tail"] = self.tail.describe()
        return out


def is_chain(seq, ambient):
    """Each interior element separates its two neighbours."""
    seq = list(seq)
    if len(seq) < 3:
        raise InputError("a chain needs at least three elements")
    if len(set(seq)) != len(seq):
        raise InputError("chain has duplicate elements")
    return all(ambient.separates(seq[i], seq[i - 1], seq[i + 1]) for i in range(1, len(seq) - 1))


def candidate_order(ambient, members, seed=None):
    """Canonical order of members, or a seeded family-level shuffle of it."""
    members = list(members)
    if seed is None:
        return members
    rng = random.Random(seed)
    if isinstance(ambient, FamilySystem):
        fams = sorted({m[0] for m in members})
        rng.shuffle(fams)
        rank = {f: k for k, f in enumerate(fams)}
        return sorted(members, key=lambda m: (rank[m[0]], m[1]))
    rng.shuffle(members)
    return members


def _step(x, y):
    if x[0] == y[0] and y[1] == x[1] + 1:
        return "row"
    if x[1] == y[1] and y[0] == x[0] + 1:
        return "col"
    return None


def _regular_cut(chain, min_run=4):
    """Cut a chain of refs after its first long regular run.

    A regular run moves along one row or one column in unit steps.
    Returns ``(elements, tail region)``; the tail is None when there is no
    run of ``min_run`` elements.  Greedy chains can turn a corner at the
    horizon, and only the part up to the corner is kept.
    """
    if len(chain) < min_run or not isinstance(chain[0], tuple):
        return tuple(chain), None
    k = 0
    while k < len(chain) - 1:
        d = _step(chain[k], chain[k + 1])
        j = k + 1
        while d is not None and j < len(chain) - 1 and _step(chain[j], chain[j + 1]) == d:
            j += 1
        if d is not None and j - k + 1 >= min_run:
            start = chain[k]
            tail = Row(start[0], start[1]) if d == "row" else Col(start[1], start[0])
            return tuple(chain[:j + 1]), tail
        k = j if d is not None else k + 1
    return tuple(chain), None


def find_chain(S, horizon, seed=None, check=False):
    """Greedy chain among the members of ``S`` below the horizon.

    Starts from the first member in canonical (or seeded) order, appends
    every later member that extends the chain at its end, then prepends
    members that extend it at the front.  Returns None if the longest chain
    found has fewer than three elements.
    """
    amb = S.ambient
    if check:
        ok, w = check_facing_triple_free(S, horizon)
        if not ok:
            raise PreconditionError("set contains a facing triple", witness=w)
        ok, w = check_unidirectional(S, horizon)
        if not ok:
            raise PreconditionError("set is not unidirectional", witness=w)
    cands = candidate_order(amb, S.members_below(horizon), seed)
    if len(cands) < 3:
        return None
    chain = [cands[0]]
    for y in cands[1:]:
        if len(chain) == 1:
            if not amb.crosses(chain[0], y):
                chain.append(y)
        elif amb.separates(chain[-1], chain[-2], y):
            chain.append(y)
    if len(chain) < 2:
        return None
    used = set(chain)
    for y in cands:
        if y not in used and amb.separates(chain[0], chain[1], y):
            chain.insert(0, y)
            used.add(y)
    if len(chain) < 3:
        return None
    return Chain(*_regular_cut(chain))


def _far(amb, region, *anchors):
    m = max([region.extent] + [max(a) for a in anchors])
    return region.far_members(amb.stable_bound(m))


def chain_extenders(chain, V, horizon):
    """Members of ``V`` below the horizon with the whole chain in one halfspace."""
    amb = V.ambient
    out = []
    for w in V.members_below(horizon):
        if w in chain.elements:
            continue
        pts = list(chain.elements)
        if chain.tail is not None and isinstance(amb, FamilySystem):
            pts += [p for p in _far(amb, chain.tail, w, *chain.elements) if p != w]
        sides = {amb.side(w, x) for x in pts if x != w}
        if len(sides) == 1 and 0 not in sides:
            out.append(w)
    return out


def is_inextensible(chain, V, horizon):
    """No hyperplane of ``V`` has every chain element in one of its halfspaces."""
    for x in chain.elements:
        if x not in V:
            raise InputError(f"chain element {_key_str(x)} is not in the set")
    return not chain_extenders(chain, V, horizon)


# -- closure ------------------------------------------------------------------


def inseparable_closure(S, horizon, within=None):
    """Least superset of ``S`` containing every separating hyperplane.

    Candidates are the members of ``within`` (default: the whole ambient)
    below the horizon.  Returns an explicit set.
    """
    amb = S.ambient
    pool = within.members_below(horizon) if within is not None else list(amb.hyperplanes(horizon))
    current = list(S.members_below(horizon))
    inside = set(current)
    cands = [w for w in pool if w not in inside]
    seen = {w: set() for w in cands}
    fresh = current
    while fresh:
        added = []
        for w in cands:
            if w in inside:
                continue
            signs = seen[w]
            for x in fresh:
                s = amb.side(w, x)
                if s:
                    signs.add(s)
                    if len(signs) == 2:
                        break
            if len(signs) == 2:
                added.append(w)
                inside.add(w)
        fresh = added
    order = {w: k for k, w in enumerate(pool)}
    members = sorted(inside, key=lambda w: order.get(w, -1))
    return HypSet(amb, (), frozenset(members), frozenset(), True)


def symbolic_closure(S, horizon, within=None, label=None):
    """Closure at the horizon, lifted back to a symbolic set."""
    c = inseparable_closure(S, horizon, within)
    return lift(S.ambient, c.members_below(horizon), horizon, label)


# -- certificates ---------------------------------------------------------------


def side_matrix(amb, keys):
    n = len(keys)
    m = np.zeros((n, n), dtype=np.int8)
    for i, w in enumerate(keys):
        for j, a in enumerate(keys):
            if i != j:
                m[i, j] = amb.side(w, a)
    return m


def check_facing_triple_free(S, horizon):
    """``(True, None)`` or ``(False, (a, b, c))`` for a facing triple below the horizon."""
    keys = S.members_below(horizon)
    if len(keys) < 3:
        return True, None
    m = side_matrix(S.ambient, keys)
    nc = m != 0
    for a in range(len(keys)):
        ra = m[a]
        e1 = (ra[:, None] == ra[None, :]) & (ra[:, None] != 0)
        e2 = m[:, a][:, None] == m
        cond = e1 & e2 & e2.T & nc
        cond[a, :] = False
        cond[:, a] = False
        hit = np.argwhere(np.triu(cond, 1))
        if len(hit):
            b, c = hit[0]
            return False, (keys[a], keys[b], keys[c])
    return True, None


def eventual_sides(amb, h, S):
    """Sides of ``h`` holding infinitely many members of the symbolic set ``S``."""
    signs = set()
    for r in S.regions:
        for far in _far(amb, r, h):
            if far != h:
                s = amb.side(h, far)
                if s:
                    signs.add(s)
    return signs


def check_unidirectional(S, horizon):
    """``(True, None)`` or ``(False, h)`` with ``h`` having infinitely many members on both sides.

    Finite sets are trivially unidirectional.
    """
    if S.explicit or not S.infinite:
        return True, None
    amb = S.ambient
    for h in S.members_below(horizon):
        if len(eventual_sides(amb, h, S)) == 2:
            return False, h
    return True, None


def check_inseparable(S, horizon):
    """``(True, None)`` or ``(False, (w, a, b))`` with ``w`` outside ``S`` separating ``a, b``."""
    amb = S.ambient
    members = S.members_below(horizon)
    for w in amb.hyperplanes(horizon):
        if w in S:
            continue
        first = {}
        for x in members:
            s = amb.side(w, x)
            if s and s not in first:
                first[s] = x
                if len(first) == 2:
                    return False, (w, first[1], first[-1])
    return True, None


@dataclass(frozen=True)
class UBSCertificate:
    subject: HypSet
    infinite: bool
    unidirectional: bool
    inseparable: bool
    facing_triple_free: bool
    horizon_checked: int
    witnesses: dict = field(default_factory=dict)

    @property
    def is_ubs(self):
        return self.infinite and self.unidirectional and self.inseparable and self.facing_triple_free

    def describe(self):
        return {
            "subject": str(self.subject),
            "infinite": self.infinite,
            "unidirectional": self.unidirectional,
            "inseparable": self.inseparable,
            "facing_triple_free": self.facing_triple_free,
            "horizon_checked": self.horizon_checked,
            "is_ubs": self.is_ubs,
            "witnesses": {k: _describe_witness(v) for k, v in sorted(self.witnesses.items())},
        }


def _describe_witness(w):
    if isinstance(w, tuple) and w and isinstance(w[0], (tuple, str)) and not isinstance(w, Ref):
        return [_key_str(x) for x in w]
    return _key_str(w)


def certify(S, horizon):
    """Check the four UBS conditions at the horizon."""
    wit = {}
    uni, w = check_unidirectional(S, horizon)
    if not uni:
        wit["bidirectional"] = w
    ins, w = check_inseparable(S, horizon)
    if not ins:
        wit["separator"] = w
    ftf, w = check_facing_triple_free(S, horizon)
    if not ftf:
        wit["facing_triple"] = w
    return UBSCertificate(S, S.infinite, uni, ins, ftf, horizon, wit)


# -- almost-crossing --------------------------------------------------------------


def _cofinite_set(amb, x, A):
    """Does ``x`` cross all but finitely many members of the symbolic set ``A``?"""
    for r in A.regions:
        for far in _far(amb, r, x):
            if far == x or not amb.crosses(x, far):
                return False
    return True


def _sample_members(amb, B, anchor_extent):
    """Members of ``B`` that decide a statement quantified over all of ``B``.

    Everything up to the stability bound explicitly, plus the far members
    standing for the constant behaviour beyond it.
    """
    out = set(m for m in B.plus)
    for r in B.regions:
        k = amb.stable_bound(max(anchor_extent, B.extent))
        if r.kind == "row":
            out.update(Ref(r.family, i) for i in range(r.start, k + 1))
        elif r.kind == "col":
            out.update(Ref(f, r.index) for f in range(r.start, k + 1))
        else:
            out.update(Ref(f, i) for f in range(r.family, k + 1) for i in range(r.start, k + 1))
        out.update(r.far_members(k))
    return sorted(m for m in out if m in B)


def prec(A, B):
    """``A ≺ B``: every member of ``B`` crosses all but finitely many members of ``A``.

    Returns None when the rule cannot decide it.
    """
    if A.ambient != B.ambient:
        raise InputError("prec needs a shared ambient")
    if A.explicit or not A.infinite:
        return True
    amb = A.ambient
    try:
        members = B.finite_members() if not B.infinite else _sample_members(amb, B, A.extent)
        return all(_cofinite_set(amb, x, A) for x in members)
    except Undecided:
        return None


def tied(A, B):
    if A.canonical() == B.canonical():
        return True
    p, q = prec(A, B), prec(B, A)
    if p is False or q is False:
        return False
    if p is None or q is None:
        return None
    return True


def almost_contained(A, B):
    """``A - B`` is finite."""
    if A.ambient != B.ambient:
        raise InputError("sets live in different ambients")
    if A.explicit or not A.infinite:
        return True
    return not A.difference(B).infinite


def almost_equivalent(A, B):
    return almost_contained(A, B) and almost_contained(B, A)


def is_minimal_ubs(U, horizon, certificate=None):
    """Minimal UBS test.

    Symbolic sets: a certified UBS whose normal form is a single row or
    column.  Explicit sets: every greedy chain's closure covers every member
    lying on some chain, which is only a horizon approximation.
    """
    if U.is_symbolic:
        cert = certificate or certify(U, horizon)
        single = len(U.regions) == 1 and U.regions[0].kind in ("row", "col")
        return cert.is_ubs and single
    members = U.members_below(horizon)
    chains = []
    for x in members:
        rest = [x] + [y for y in members if y != x]
        sub = HypSet(U.ambient, (), frozenset(rest), frozenset(), True)
        c = find_chain(_Ordered(sub, rest), horizon)
        if c is not None:
            chains.append(c)
    if not chains:
        return False
    chainable = set().union(*(set(c.elements) for c in chains))
    for c in chains:
        cl = inseparable_closure(HypSet(U.ambient, (), frozenset(c.elements), frozenset(), True),
                                 horizon, within=U)
        if not chainable <= set(cl.members_below(horizon)):
            return False
    return True


class _Ordered:
    """A set view with a prescribed member order (for chain starts)."""

    def __init__(self, base, order):
        self.ambient = base.ambient
        self._order = order

    def members_below(self, horizon):
        return list(self._order)


# -- poset ------------------------------------------------------------------------


@dataclass(frozen=True)
class Poset:
    """Almost-containment order on almost-equivalence classes.

    ``classes[k]`` lists the input positions in class ``k``; ``reps[k]`` is
    its first member; ``leq`` holds pairs ``(k, l)`` with class ``k`` strictly
    below class ``l``.
    """

    reps: tuple
    classes: tuple
    leq: frozenset

    def comparable(self, k, l):
        return k == l or (k, l) in self.leq or (l, k) in self.leq

    def hasse(self):
        return sorted(
            (a, b) for a, b in self.leq
            if not any((a, c) in self.leq and (c, b) in self.leq for c in range(len(self.reps)))
        )

    def describe(self):
        return {
            "classes": [list(c) for c in self.classes],
            "representatives": [str(r) for r in self.reps],
            "below": sorted([list(p) for p in self.leq]),
            "hasse": [list(p) for p in self.hasse()],
        }


def almost_containment_poset(sets):
    sets = list(sets)
    reps, classes = [], []
    for pos, s in enumerate(sets):
        for k, r in enumerate(reps):
            if almost_equivalent(s, r):
                classes[k].append(pos)
                break
        else:
            reps.append(s)
            classes.append([pos])
    leq = frozenset(
        (k, l) for k, l in itertools.permutations(range(len(reps)), 2)
        if almost_contained(reps[k], reps[l])
    )
    return Poset(tuple(reps), tuple(tuple(c) for c in classes), leq)
