"""Decomposing a UBS into minimal UBSs ordered by almost-crossing.

The recursion: take a chain, close it up to get a minimal piece ``U1``,
split the rest into the part that crosses almost all of ``U1`` and the part
that does not, absorb whichever part is finite into ``U1``, and recurse on
the infinite parts.  Every step re-checks the facts the argument relies on
and raises :class:`ConsistencyError` when one fails at the horizon.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import networkx as nx

from .errors import ConsistencyError, CycleError, InputError, PreconditionError, Undecided
from .family import FamilySystem, Ref
from .hypset import Block, Col, HypSet, Row
from .ubs import (
    Chain,
    _cofinite_set,
    _key_str,
    almost_equivalent,
    certify,
    chain_extenders,
    check_inseparable,
    find_chain,
    is_minimal_ubs,
    prec,
    symbolic_closure,
)


def default_cert_horizon(horizon):
    return min(horizon, 16)


# -- extraction ---------------------------------------------------------------------


def extract_minimal(V, horizon, seed=None, cert_horizon=None, check_input=True):
    """Return ``(U1, C1)``: a minimal UBS inside ``V`` and a chain whose closure it is."""
    if not V.is_symbolic:
        raise InputError("decomposition needs a symbolic set")
    ch = cert_horizon or default_cert_horizon(horizon)
    if check_input:
        cert = certify(V, ch)
        if not cert.is_ubs:
            raise PreconditionError(f"{V} is not a UBS at horizon {ch}", witness=cert.witnesses)
    chain = find_chain(V, horizon, seed=seed)
    if chain is None or chain.tail is None:
        raise ConsistencyError(f"no regular chain found in {V} below horizon {horizon}; try a larger horizon")
    amb = V.ambient
    U1 = symbolic_closure(HypSet.of(amb, chain.elements), horizon, within=V)
    if len(U1.regions) != 1:
        # the closure of the whole chain is too big; restart from the chain's tail
        tail = tuple(x for x in chain.elements if chain.tail.contains(x))
        chain = Chain(tail, chain.tail)
        U1 = symbolic_closure(HypSet.of(amb, tail), horizon, within=V)
    if len(U1.regions) != 1:
        raise ConsistencyError(f"closure of a chain is not a single region: {U1}", witness=chain.elements)
    chain = Chain(tuple(x for x in chain.elements if x in U1), chain.tail)
    return make_inextensible(V, U1, chain, horizon)


def make_inextensible(V, U1, chain, horizon):
    """Prepend extenders until the chain is inextensible in ``V``.

    Extenders are taken in canonical order and kept only when the current
    first element separates them from the second.  ``U1`` becomes the
    closure of the longer chain, which differs from the old one by
    finitely many hyperplanes.  Extenders that cannot be prepended stay
    outside and are reported by :func:`split`.
    """
    amb = V.ambient
    elements = list(chain.elements)
    grew = False
    while True:
        ext = chain_extenders(Chain(tuple(elements), chain.tail), V, horizon)
        front = next((x for x in ext if amb.separates(elements[0], x, elements[1])), None)
        if front is None:
            break
        elements.insert(0, front)
        grew = True
    if not grew:
        return U1, chain
    closed = symbolic_closure(HypSet.of(amb, elements), horizon, within=V)
    if len(closed.regions) != 1:
        return U1, chain
    return closed, Chain(tuple(elements), chain.tail)


# -- split --------------------------------------------------------------------------


def partition(S, predicate, anchor_extent):
    """Split a symbolic set by a predicate that is eventually constant on regions.

    ``anchor_extent`` bounds the coordinates of whatever the predicate refers
    to; past the rule's stability bound it is constant along each region
    direction, so those parts move as whole regions and the rest is decided
    member by member.
    """
    amb = S.ambient
    k = amb.stable_bound(max(anchor_extent, S.extent))
    sides = {True: ([], set()), False: ([], set())}

    def put_region(r, sample):
        sides[bool(predicate(sample))][0].append(r)

    def put(m):
        if m in S:
            sides[bool(predicate(m))][1].add(m)

    for m in S.plus:
        put(m)
    for r in S.regions:
        if r.kind == "row":
            lo = max(k, r.start)
            for i in range(r.start, lo):
                put(Ref(r.family, i))
            put_region(Row(r.family, lo), Ref(r.family, lo))
        elif r.kind == "col":
            lo = max(k, r.start)
            for f in range(r.start, lo):
                put(Ref(f, r.index))
            put_region(Col(r.index, lo), Ref(lo, r.index))
        else:
            kk = max(k, r.family, r.start)
            for f in range(r.family, kk):
                for i in range(r.start, kk):
                    put(Ref(f, i))
                put_region(Row(f, kk), Ref(f, kk))
            for i in range(r.start, kk):
                put_region(Col(i, kk), Ref(kk, i))
            put_region(Block(kk, kk), Ref(kk, kk))
    out = []
    for flag in (True, False):
        regions, plus = sides[flag]
        out.append(HypSet.symbolic(amb, regions, plus, S.minus))
    return tuple(out)


@dataclass(frozen=True)
class SplitResult:
    U1: HypSet
    Vplus: HypSet
    Vminus: HypSet
    case: int
    extenders: tuple = ()
    absorbed: tuple = ()
    closure_grew: bool = False

    def describe(self):
        return {
            "U1": str(self.U1),
            "Vplus": str(self.Vplus),
            "Vminus": str(self.Vminus),
            "case": self.case,
            "extenders": [_key_str(x) for x in self.extenders],
            "absorbed": [_key_str(x) for x in self.absorbed],
            "closure_grew": self.closure_grew,
        }


def split(V, U1, C1, horizon, cert_horizon=None):
    """Split ``V - U1`` into the part crossing almost all of ``U1`` and the rest.

    Case 0: both parts finite; 1: only ``Vminus`` finite; 2: only ``Vplus``
    finite; 3: both infinite.  Finite parts are absorbed into ``U1`` in cases
    0-2 (and the closure recomputed).  Raises :class:`ConsistencyError` with
    the violating hyperplanes when a property the argument relies on fails.
    """
    amb = V.ambient
    ch = cert_horizon or default_cert_horizon(horizon)
    V1 = V.difference(U1)
    Vplus, Vminus = partition(V1, lambda x: _cofinite_set(amb, x, U1), U1.extent)
    extenders = tuple(chain_extenders(C1, V, horizon))
    u0 = C1.elements[0]
    for x in Vminus.members_below(horizon):
        if x in extenders:
            continue
        if not amb.crosses(x, u0):
            raise ConsistencyError(f"{_key_str(x)} is in V1- but misses U0={_key_str(u0)}", witness=(x, u0))
    for name, part in (("V1-", Vminus), ("V1+", Vplus)):
        if part.infinite:
            ok, w = check_inseparable(part, ch)
            if not ok:
                raise ConsistencyError(f"{name} is not inseparable", witness=w)
    plus_inf, minus_inf = Vplus.infinite, Vminus.infinite
    if plus_inf and minus_inf:
        return SplitResult(U1, Vplus, Vminus, 3, extenders)
    if plus_inf:
        case, finite = 1, Vminus
    elif minus_inf:
        case, finite = 2, Vplus
    else:
        case, finite = 0, V1
    absorbed = tuple(finite.members_below(10**9) if finite.explicit else finite.finite_members())
    grew = False
    if absorbed:
        enlarged = U1.union(finite)
        closed = symbolic_closure(enlarged, horizon, within=V)
        grew = not almost_equivalent(closed, enlarged) or closed.canonical() != enlarged.canonical()
        U1 = closed
    empty = HypSet.symbolic(amb)
    if case == 1:
        Vplus, Vminus = V.difference(U1), empty
    elif case == 2:
        Vplus, Vminus = empty, V.difference(U1)
    else:
        Vplus = Vminus = empty
    return SplitResult(U1, Vplus, Vminus, case, extenders, absorbed, grew)


# -- f map ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FMapResult:
    values: dict
    fibers: dict
    growth: dict
    finite_fibers: bool
    prec_verdict: object

    @property
    def ok(self):
        return self.finite_fibers and self.prec_verdict is True

    def describe(self):
        return {
            "values": {_key_str(k): v for k, v in sorted(self.values.items())},
            "fibers": {str(j): len(v) for j, v in sorted(self.fibers.items(), key=lambda kv: str(kv[0]))},
            "growth": {str(j): list(v) for j, v in sorted(self.growth.items())},
            "finite_fibers": self.finite_fibers,
            "prec": self.prec_verdict,
        }


def _chain_run(chain, horizon):
    run = list(chain.elements)
    if chain.tail is not None:
        seen = set(run)
        extra = [x for x in chain.tail.members_below(horizon) if x not in seen]
        last = run[-1]
        extra = [x for x in extra if tuple(x) > tuple(last)] if chain.tail.kind == "row" else [
            x for x in extra if x[0] > last[0]]
        run += extra
    return run


def f_map_check(Vminus, C1, horizon, U1=None, skip=()):
    """Largest crossed chain index for each member of ``Vminus``, fibre growth, and ``Vminus ≺ U1``.

    Fibres are counted at the horizon and at twice the horizon; a fibre below
    half the horizon that gains members signals a non-unidirectional input.
    Fibres near the horizon are skipped since the chain run is cut there.
    """
    amb = Vminus.ambient
    counts = {}
    values = {}
    fibers = {}
    for t in (horizon, 2 * horizon):
        run = _chain_run(C1, t)
        cnt = {}
        for x in Vminus.members_below(t):
            if x in skip:
                continue
            hits = [j for j, u in enumerate(run) if amb.crosses(x, u)]
            f = max(hits) if hits else None
            cnt[f] = cnt.get(f, 0) + 1
            if t == horizon:
                values[x] = f
                fibers.setdefault(f, []).append(x)
        counts[t] = cnt
    growth = {
        j: (n, counts[2 * horizon].get(j, 0))
        for j, n in counts[horizon].items()
        if j is not None and j < horizon // 2 and counts[2 * horizon].get(j, 0) > n > 0
    }
    if U1 is None and C1.tail is not None:
        U1 = HypSet.symbolic(amb, [C1.tail])
    verdict = True if not Vminus.infinite else (prec(Vminus, U1) if U1 is not None else None)
    return FMapResult(values, fibers, growth, not growth, verdict)


# -- the decomposition ------------------------------------------------------------------


@dataclass
class Decomposition:
    """Minimal components, finite residue, the ≺ graph and its linear order."""

    source: HypSet
    components: list
    residue: HypSet
    continuation: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    minimal: list = field(default_factory=list)
    prec_graph: nx.DiGraph | None = None
    linear_order: list | None = None
    trace: list = field(default_factory=list)
    horizon: int = 0
    cert_horizon: int = 0
    ambient_dimension: int | None = None
    seed: int | None = None

    @property
    def k(self):
        return len(self.components)

    @property
    def truncated(self):
        return bool(self.continuation)

    @property
    def ordered_components(self):
        return [self.components[i] for i in self.linear_order]

    def describe(self):
        g = self.prec_graph
        return {
            "horizon": self.horizon,
            "cert_horizon": self.cert_horizon,
            "seed": self.seed,
            "source": str(self.source),
            "k": self.k,
            "ambient_dimension": self.ambient_dimension,
            "components": [
                {"index": i, "set": str(c), "canonical": c.describe(),
                 "ubs": cert.is_ubs, "minimal": mini}
                for i, (c, cert, mini) in enumerate(zip(self.components, self.certificates, self.minimal))
            ],
            "residue": [_key_str(x) for x in self.residue.finite_members()],
            "continuation": [str(c) for c in self.continuation],
            "gamma_edges": sorted([list(e) for e in g.edges()]) if g is not None else [],
            "gamma_unknown": sorted([list(e) for e in g.graph.get("unknown", [])]) if g is not None else [],
            "linear_order": self.linear_order,
            "trace": self.trace,
        }


def _ambient_dimension(system, cert_horizon):
    from .dual import dimension

    if not system.bounded:
        return None
    return dimension(system, horizon=max(cert_horizon, system.family_count + 2, 4))


def decompose(V, horizon, max_components=None, seed=None, cert_horizon=None, check_input=True):
    """Decompose a UBS into minimal UBSs.

    For systems with unboundedly many families, ``max_components`` is
    required; the part left when it is reached is reported as the
    continuation.
    """
    if horizon < 2:
        raise InputError("horizon must be at least 2")
    amb = V.ambient
    if not isinstance(amb, FamilySystem) or not V.is_symbolic:
        raise InputError("decompose needs a symbolic set in a family system")
    if not amb.bounded and max_components is None:
        raise InputError("max_components is required for unbounded family systems")
    ch = cert_horizon or default_cert_horizon(horizon)
    if check_input:
        cert = certify(V, ch)
        if not cert.is_ubs:
            raise PreconditionError(f"{V} is not a UBS at horizon {ch}", witness=cert.witnesses)

    d = Decomposition(V, [], HypSet.symbolic(amb), horizon=horizon, cert_horizon=ch, seed=seed)
    residue = set()

    def run(part, depth):
        if not part.infinite:
            residue.update(part.finite_members())
            return
        if max_components is not None and len(d.components) >= max_components:
            d.continuation.append(part)
            return
        U1, C1 = extract_minimal(part, horizon, seed=seed, cert_horizon=ch, check_input=False)
        s = split(part, U1, C1, horizon, cert_horizon=ch)
        fm = f_map_check(s.Vminus, C1, horizon, U1=s.U1, skip=s.extenders) if s.case == 3 else None
        if fm is not None and not fm.finite_fibers:
            raise ConsistencyError("f-map fibre grows with the horizon", witness=fm.growth)
        step = {
            "depth": depth,
            "part": str(part),
            "chain": C1.describe(),
            "closure": str(U1),
            "split": s.describe(),
        }
        if fm is not None:
            step["f_map"] = {"finite_fibers": fm.finite_fibers, "prec": fm.prec_verdict}
        d.trace.append(step)
        cert = certify(s.U1, ch)
        d.components.append(s.U1.relabel(f"U{len(d.components)}"))
        d.certificates.append(cert)
        d.minimal.append(is_minimal_ubs(s.U1, ch, cert))
        if s.case == 1:
            run(s.Vplus, depth + 1)
        elif s.case == 2:
            run(s.Vminus, depth + 1)
        elif s.case == 3:
            run(s.Vminus, depth + 1)
            run(s.Vplus, depth + 1)

    run(V, 0)
    d.residue = HypSet.symbolic(amb, plus=residue)
    d.prec_graph = build_prec_graph(d.components)
    d.linear_order = topo_order(d.prec_graph)
    d.ambient_dimension = _ambient_dimension(amb, ch)
    return d


def from_components(V, components, continuation=(), horizon=0, cert_horizon=None):
    """Wrap a hand-made list of components as a :class:`Decomposition`."""
    amb = V.ambient
    ch = cert_horizon or default_cert_horizon(horizon)
    d = Decomposition(V, list(components), HypSet.symbolic(amb), list(continuation),
                      horizon=horizon, cert_horizon=ch)
    covered = HypSet.symbolic(amb)
    for c in list(components) + list(continuation):
        covered = covered.union(c)
    rest = V.difference(covered)
    if rest.infinite:
        raise InputError(f"components leave an infinite part uncovered: {rest}")
    d.residue = HypSet.symbolic(amb, plus=rest.finite_members())
    d.certificates = [certify(c, ch) for c in d.components]
    d.minimal = [is_minimal_ubs(c, ch, cert) for c, cert in zip(d.components, d.certificates)]
    d.prec_graph = build_prec_graph(d.components)
    try:
        d.linear_order = topo_order(d.prec_graph)
    except (CycleError, Undecided):
        d.linear_order = None
    d.ambient_dimension = _ambient_dimension(amb, ch)
    return d


# -- Γ and its order ---------------------------------------------------------------------


def build_prec_graph(components):
    """Directed graph with ``i -> j`` when ``U_i ≺ U_j`` but not ``U_j ≺ U_i``."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(components)))
    unknown = []
    for i, j in itertools.combinations(range(len(components)), 2):
        p, q = prec(components[i], components[j]), prec(components[j], components[i])
        if p is None or q is None:
            unknown.append((i, j))
        elif p and not q:
            g.add_edge(i, j)
        elif q and not p:
            g.add_edge(j, i)
    g.graph["unknown"] = unknown
    return g


def topo_order(g):
    """Topological order, smallest available vertex first."""
    if g.graph.get("unknown"):
        raise Undecided(f"prec undecided for pairs {g.graph['unknown']}")
    indeg = {v: g.in_degree(v) for v in g.nodes}
    ready = [v for v, n in indeg.items() if n == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        v = heapq.heappop(ready)
        out.append(v)
        for w in g.successors(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(out) != g.number_of_nodes():
        cycle = [u for u, _ in nx.find_cycle(g.subgraph(set(g.nodes) - set(out)))]
        raise CycleError("the prec graph has a directed cycle", cycle)
    return out


# -- comparison ------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    verdict: bool
    matching: tuple
    unmatched_first: tuple
    unmatched_second: tuple
    finite_dimensional: bool
    truncated: bool

    @property
    def theorem_violation(self):
        return self.finite_dimensional and not self.truncated and not self.verdict

    def describe(self, d1=None, d2=None):
        def name(d, i):
            return str(d.components[i]) if d is not None else i

        return {
            "verdict": self.verdict,
            "matching": [[name(d1, i), name(d2, j)] for i, j in self.matching],
            "unmatched_first": [name(d1, i) for i in self.unmatched_first],
            "unmatched_second": [name(d2, j) for j in self.unmatched_second],
            "finite_dimensional": self.finite_dimensional,
            "truncated": self.truncated,
            "theorem_violation": self.theorem_violation,
        }


def compare_decompositions(d1, d2):
    """Match components by almost-equivalence with a maximum bipartite matching."""
    if d1.source.ambient != d2.source.ambient:
        raise InputError("decompositions of different ambients")
    g = nx.Graph()
    left = [("a", i) for i in range(d1.k)]
    right = [("b", j) for j in range(d2.k)]
    g.add_nodes_from(left, bipartite=0)
    g.add_nodes_from(right, bipartite=1)
    for i, j in itertools.product(range(d1.k), range(d2.k)):
        if almost_equivalent(d1.components[i], d2.components[j]):
            g.add_edge(("a", i), ("b", j))
    m = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    pairs = tuple(sorted((i, m[("a", i)][1]) for i in range(d1.k) if ("a", i) in m))
    un1 = tuple(i for i in range(d1.k) if ("a", i) not in m)
    un2 = tuple(j for j in range(d2.k) if ("b", j) not in m)
    verdict = d1.k == d2.k and not un1 and not un2
    fin = d1.ambient_dimension is not None
    return Comparison(verdict, pairs, un1, un2, fin, d1.truncated or d2.truncated)


# -- post-hoc verification ---------------------------------------------------------------


def verify_decomposition(d, horizons=None):
    """Re-check every invariant of a decomposition with independent predicate calls."""
    V = d.source
    T = d.horizon
    horizons = horizons or (T, 2 * T)
    comps = d.components
    checks = {}
    disjoint = True
    cover = True
    for t in horizons:
        seen = {}
        parts = list(comps) + list(d.continuation) + [d.residue]
        for idx, part in enumerate(parts):
            for m in part.members_below(t):
                if m in seen:
                    disjoint = False
                seen[m] = idx
        if set(seen) != set(V.members_below(t)):
            cover = False
    checks["disjoint"] = disjoint
    checks["cover"] = cover
    checks["components_ubs"] = all(c.is_ubs for c in d.certificates)
    checks["components_minimal"] = all(d.minimal)
    g = d.prec_graph
    edges_ok = True
    for i, j in itertools.permutations(range(len(comps)), 2):
        want = prec(comps[i], comps[j]) is True and prec(comps[j], comps[i]) is False
        if want != g.has_edge(i, j):
            edges_ok = False
    checks["gamma_edges"] = edges_ok
    pos = {v: k for k, v in enumerate(d.linear_order or [])}
    checks["topological"] = d.linear_order is not None and all(pos[u] < pos[v] for u, v in g.edges())
    checks["first_conclusion"] = all(
        prec(comps[i], comps[j]) or prec(comps[j], comps[i])
        for i, j in itertools.combinations(range(len(comps)), 2)
    )
    if d.ambient_dimension is not None and not d.truncated:
        checks["k_le_dim"] = d.k <= d.ambient_dimension
        order = d.linear_order or []
        checks["ordered_prec"] = all(
            prec(comps[order[a]], comps[order[b]]) is True
            for a, b in itertools.combinations(range(len(order)), 2)
        )
    return checks
