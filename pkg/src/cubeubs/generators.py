"""Deterministic instance factories.

Every generator is a pure function of its parameters and seed.  An
:class:`Instance` bundles the ambient, the designated hyperplane set ``V``
and, when the truncation is small enough, a realized finite wallspace so
symbolic answers can be checked against brute force.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from .errors import InputError, RealizationError
from .family import CorrigendumRule, FamilySystem, GridRule, PairKind, TableTailRule, _swap, pocset_conflict, realize_truncation
from .hypset import Col, HypSet, Row
from .wallspace import FiniteWallspace, Wall

GENERATOR_KINDS = ("grid", "corrigendum", "table", "random", "planted")
REALIZE_WALL_BUDGET = 20
# table rules with parameters below 4 repeat well before this horizon
POCSET_HORIZON = 16


@dataclass(frozen=True)
class Instance:
    kind: str
    params: dict
    ambient: object
    V: HypSet | None = None
    realization: object = None
    notes: tuple = ()
    declared: dict = field(default_factory=dict)

    def describe(self):
        out = {"kind": self.kind, "params": self.params}
        if isinstance(self.ambient, FamilySystem):
            out["system"] = self.ambient.describe()
        else:
            out["points"] = list(self.ambient.points)
            out["walls"] = {w.id: sorted(w.positive_side) for w in self.ambient.walls}
        if self.V is not None:
            out["V"] = str(self.V)
        if self.realization is not None:
            out["realized_walls"] = len(self.realization.refs)
            out["realized_points"] = len(self.realization.wallspace.points)
        if self.declared:
            out["declared"] = self.declared
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_bytes(self):
        return json.dumps(self.describe(), sort_keys=True, default=str).encode()


def _realize_within_budget(system, horizon):
    """Realize the truncation when it has at most the wall budget, else None."""
    if horizon is None:
        return None
    h = horizon
    while h >= 2 and len(system.hyperplanes(h)) > REALIZE_WALL_BUDGET:
        h -= 1
    if h < 2:
        return None
    return realize_truncation(system, h)


def gen_grid(d, horizon=None):
    """``d`` chain families, every pair crossing everywhere (the cubulation of E^d)."""
    if d < 1:
        raise InputError("grid dimension must be at least 1")
    sys_ = GridRule(d)
    return Instance("grid", {"d": d, "horizon": horizon}, sys_, HypSet.full(sys_),
                    _realize_within_budget(sys_, horizon), declared={"dimension": d})


def gen_corrigendum(families, horizon=None):
    """The counterexample system with ``families`` families (None: unbounded)."""
    if families is not None and families < 2:
        raise InputError("the counterexample needs at least two families")
    sys_ = CorrigendumRule(families)
    real = _realize_within_budget(sys_, horizon) if families is not None else None
    declared = {"dimension": families} if families is not None else {}
    return Instance("corrigendum", {"families": families, "horizon": horizon}, sys_,
                    HypSet.full(sys_), real, declared=declared)


def corrigendum_alternative(system, tails=None):
    """The second decomposition of the counterexample: one column plus row tails.

    ``V'`` is index 0 of every family and the tails start at index 1, so
    the parts partition the whole system.  Needs unboundedly many families;
    ``tails`` caps how many row tails are listed.
    """
    if not isinstance(system, CorrigendumRule) or system.bounded:
        raise InputError("the alternative decomposition needs the counterexample with unboundedly many families")
    vprime = HypSet.symbolic(system, [Col(0, 0)], label="V'")
    rows = [HypSet.symbolic(system, [Row(f, 1)], label=f"T{f}") for f in range(tails or 0)]
    return vprime, rows


def gen_table(families, cutoff=0, pairs=None, matrix=None, horizon=None):
    sys_ = TableTailRule(families, cutoff, dict(pairs or {}), matrix)
    return Instance("table", {"families": families, "cutoff": cutoff,
                              "pairs": {f"{p},{q}": [k.kind, k.param] for (p, q), k in sys_.pairs.items()},
                              "horizon": horizon},
                    sys_, HypSet.full(sys_), _realize_within_budget(sys_, horizon))


def gen_random_wallspace(points, walls, seed=0):
    """``walls`` distinct random bipartitions of ``points`` points."""
    if points < 2:
        raise InputError("need at least two points")
    limit = 2 ** (points - 1) - 1
    if walls < 0 or walls > limit:
        raise InputError(f"{walls} distinct walls do not fit on {points} points (at most {limit})")
    rng = random.Random(seed)
    # masks avoiding the last point name each bipartition exactly once
    masks = rng.sample(range(1, limit + 1), walls)
    pts = tuple(f"p{k}" for k in range(points))
    ws = FiniteWallspace(pts, tuple(
        Wall(f"w{n}", frozenset(p for k, p in enumerate(pts) if m >> k & 1))
        for n, m in enumerate(masks)))
    return Instance("random", {"points": points, "walls": walls, "seed": seed}, ws)


# -- planted -------------------------------------------------------------------------

PLANT_TYPES = {
    # (low, high, param) -> PairKind for the pair (low, high)
    "tied": lambda j: PairKind("all"),
    "crossing_up_to": lambda j: PairKind("first_atmost", j),
    "stair": lambda j: PairKind("stair", j),
    "stair_rev": lambda j: PairKind("stair_rev", j),
    "disjoint": lambda j: PairKind("none"),
}


def planted_rule(spec):
    """A table rule from ``{"families": n, "plants": [...]}``.

    Each plant is ``{"type": t, "families": [p, q], "param": j}``.  For
    ``crossing_up_to`` family ``q`` crosses exactly ``H^p_0 .. H^p_j``; for
    ``stair`` ``H^q_j`` crosses ``H^p_i`` iff ``j >= i + param``.  Pairs
    without a plant cross everywhere, so an empty plant is the grid.
    """
    try:
        n = int(spec["families"])
    except (KeyError, TypeError, ValueError):
        raise InputError("planted spec needs an integer 'families'") from None
    pairs = {pq: PairKind("all") for pq in itertools.combinations(range(n), 2)}
    for k, plant in enumerate(spec.get("plants", ())):
        t = plant.get("type")
        if t not in PLANT_TYPES:
            raise InputError(f"plant {k}: unknown type {t!r}", position=("plants", k))
        try:
            p, q = map(int, plant["families"])
        except (KeyError, TypeError, ValueError):
            raise InputError(f"plant {k}: needs two families", position=("plants", k)) from None
        if not (0 <= p < n and 0 <= q < n) or p == q:
            raise InputError(f"plant {k}: bad families {p}, {q}", position=("plants", k))
        kind = PLANT_TYPES[t](int(plant.get("param", 0)))
        if p > q:
            p, q = q, p
            kind = _swap(kind)
        pairs[(p, q)] = kind
    return TableTailRule(n, 0, pairs)


def gen_planted(spec, horizon=None, cert_horizon=12):
    """Planted instance; the full set is certified and the truncation realized.

    The declared dimension is the clique number of the crossing graph at
    the certificate horizon.

    An inconsistent spec (its halfspace order fails below ``POCSET_HORIZON``)
    raises :class:`RealizationError`.
    Specs whose full set is not a UBS are kept, and the certificate says so.
    """
    from .dual import dimension
    from .ubs import certify

    sys_ = planted_rule(spec)
    conflict = pocset_conflict(sys_, POCSET_HORIZON)
    if conflict is not None:
        raise RealizationError("planted spec is not realizable", conflict=conflict)
    real = _realize_within_budget(sys_, horizon if horizon is not None else 6)
    V = HypSet.full(sys_)
    cert = certify(V, cert_horizon)
    notes = () if cert.is_ubs else (f"full set is not a UBS: {cert.witnesses}",)
    dim = dimension(sys_, max(cert_horizon, sys_.family_count + 2))
    return Instance("planted", {"spec": spec, "horizon": horizon}, sys_, V, real, notes,
                    declared={"ubs": cert.is_ubs, "dimension": dim})


def random_planted_spec(seed, max_families=5):
    """A random planted spec whose pair behaviours are drawn from ties and staircases."""
    rng = random.Random(seed)
    n = rng.randint(2, max_families)
    plants = []
    for p, q in itertools.combinations(range(n), 2):
        t = rng.choice(["tied", "tied", "stair", "stair_rev"])
        if t != "tied":
            plants.append({"type": t, "families": [p, q], "param": rng.randint(0, 3)})
    return {"families": n, "plants": plants}


def gen_random_planted(seed, horizon=None, max_families=5, attempts=50):
    """First certified UBS among seeded random planted specs."""
    for k in range(attempts):
        spec = random_planted_spec(seed * 1000 + k, max_families)
        try:
            inst = gen_planted(spec, horizon)
        except RealizationError:
            continue
        if inst.declared["ubs"]:
            return inst
    raise InputError(f"no certified planted instance for seed {seed} in {attempts} attempts")


# -- dispatch ------------------------------------------------------------------------


def parse_gen(text):
    """Parse ``kind:param[,param...]`` as used on the command line."""
    kind, _, rest = text.partition(":")
    if kind not in GENERATOR_KINDS:
        raise InputError(f"unknown generator {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}")
    args = [a for a in rest.split(",") if a] if rest else []
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise InputError(f"generator parameters must be integers: {rest!r}") from None
    return kind, nums


def generate(kind, params, horizon=None, seed=0):
    if kind == "grid":
        return gen_grid(params[0] if params else 2, horizon)
    if kind == "corrigendum":
        return gen_corrigendum(params[0] if params else None, horizon)
    if kind == "random":
        pts, walls = (params + [6, 5][len(params):])[:2]
        return gen_random_wallspace(pts, walls, seed)
    if kind == "planted":
        return gen_random_planted(seed, horizon, params[0] if params else 5)
    if kind == "table":
        if not params:
            raise InputError("table generator needs a family count")
        return gen_table(params[0], horizon=horizon)
    raise InputError(f"unknown generator {kind!r}")
