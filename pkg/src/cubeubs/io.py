"""Instance files (YAML).

One document describes one ambient plus optional named sets::

    points: [a, b, c, d]              # a finite wallspace ...
    walls:
      - {id: x, positive: [a, b]}

    rule: corrigendum                 # ... or a family system
    families: 5                       # omit for unboundedly many
    sets:
      V: full
      tail: {family: 0, from: 3}
      W: {regions: [{column: 0, from: 0}], plus: [[1, 0]], minus: [[2, 0]]}
      E: [[0, 1], [1, 1]]             # explicit refs

    generate: corrigendum:5           # or build the ambient from a generator

Table rules take ``families``, ``cutoff``, ``pairs`` (a list of
``{families: [p, q], kind: k, param: t}``) and ``matrix`` (crossing pairs
of refs below the cutoff).  Every error raised while reading a file carries
the line and column of the offending node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import InputError
from .family import PAIR_KINDS, CorrigendumRule, FamilySystem, GridRule, PairKind, TableTailRule
from .generators import Instance, generate, parse_gen
from .hypset import HypSet, make_region
from .wallspace import FiniteWallspace, Wall


_SCALARS = yaml.constructor.SafeConstructor()


@dataclass
class Node:
    """A plain YAML value with the position of every sub-node."""

    value: object
    line: int
    column: int

    @property
    def pos(self):
        return (self.line, self.column)


def _wrap(node):
    pos = (node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _wrap(k)
            if not isinstance(key.value, (str, int)):
                raise InputError("mapping keys must be scalars", key.pos)
            if key.value in out:
                raise InputError(f"duplicate key {key.value!r}", key.pos)
            out[key.value] = _wrap(v)
        return Node(out, *pos)
    if isinstance(node, yaml.SequenceNode):
        return Node([_wrap(v) for v in node.value], *pos)
    return Node(_SCALARS.construct_object(node), *pos)


def parse_text(text):
    """Parse a YAML document into a :class:`Node` tree."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        pos = (mark.line + 1, mark.column + 1) if mark else None
        raise InputError(f"not valid YAML: {getattr(e, 'problem', e)}", pos) from None
    if root is None:
        raise InputError("empty document", (1, 1))
    tree = _wrap(root)
    if not isinstance(tree.value, dict):
        raise InputError("the document must be a mapping", tree.pos)
    return tree


def plain(node):
    if isinstance(node.value, dict):
        return {k: plain(v) for k, v in node.value.items()}
    if isinstance(node.value, list):
        return [plain(v) for v in node.value]
    return node.value


def _int(node, what, minimum=0):
    v = node.value
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{what} must be an integer", node.pos)
    if v < minimum:
        raise InputError(f"{what} must be at least {minimum}", node.pos)
    return v


def _list(node, what):
    if not isinstance(node.value, list):
        raise InputError(f"{what} must be a list", node.pos)
    return node.value


def _map(node, what):
    if not isinstance(node.value, dict):
        raise InputError(f"{what} must be a mapping", node.pos)
    return node.value


def _ref(node):
    items = _list(node, "a hyperplane reference")
    if len(items) != 2:
        raise InputError("a hyperplane reference is [family, index]", node.pos)
    return (_int(items[0], "family"), _int(items[1], "index"))


# -- ambients ----------------------------------------------------------------------------


def read_wallspace(tree):
    doc = tree.value
    points = [p.value for p in _list(doc["points"], "points")]
    seen = {}
    for p in _list(doc["points"], "points"):
        if not isinstance(p.value, (str, int)):
            raise InputError("point ids must be scalars", p.pos)
        if p.value in seen:
            raise InputError(f"duplicate point id {p.value!r}", p.pos)
        seen[p.value] = p
    if "walls" not in doc:
        raise InputError("a wallspace needs 'walls'", tree.pos)
    walls, ids = [], {}
    for w in _list(doc["walls"], "walls"):
        m = _map(w, "a wall")
        if "id" not in m or "positive" not in m:
            raise InputError("a wall needs 'id' and 'positive'", w.pos)
        wid = m["id"].value
        if wid in ids:
            raise InputError(f"duplicate wall id {wid!r}", m["id"].pos)
        ids[wid] = w
        pos = []
        for p in _list(m["positive"], "positive"):
            if p.value not in seen:
                raise InputError(f"wall {wid!r}: unknown point {p.value!r}", p.pos)
            pos.append(p.value)
        walls.append(Wall(wid, frozenset(pos)))
    try:
        return FiniteWallspace(tuple(points), tuple(walls))
    except InputError as e:
        # duplicate bipartitions and non-splitting walls are found by the constructor
        raise InputError(str(e), doc["walls"].pos) from None


def read_system(tree):
    doc = tree.value
    rule = doc["rule"].value
    if rule == "grid":
        if "d" not in doc:
            raise InputError("grid needs 'd'", tree.pos)
        return GridRule(_int(doc["d"], "d", 1))
    if rule == "corrigendum":
        fam = doc.get("families")
        if fam is None or fam.value is None:
            return CorrigendumRule()
        return CorrigendumRule(_int(fam, "families", 2))
    if rule == "table":
        if "families" not in doc:
            raise InputError("table needs 'families'", tree.pos)
        n = _int(doc["families"], "families", 1)
        cutoff = _int(doc["cutoff"], "cutoff") if "cutoff" in doc else 0
        pairs = {}
        for item in _list(doc["pairs"], "pairs") if "pairs" in doc else []:
            m = _map(item, "a pair")
            if "families" not in m or "kind" not in m:
                raise InputError("a pair needs 'families' and 'kind'", item.pos)
            fs = _list(m["families"], "families")
            if len(fs) != 2:
                raise InputError("a pair names two families", m["families"].pos)
            p, q = _int(fs[0], "family"), _int(fs[1], "family")
            kind = m["kind"].value
            if kind not in PAIR_KINDS:
                raise InputError(f"unknown pair kind {kind!r}", m["kind"].pos)
            param = _int(m["param"], "param") if "param" in m else 0
            if (p, q) in pairs or (q, p) in pairs:
                raise InputError(f"pair {p}, {q} given twice", item.pos)
            pairs[(p, q)] = PairKind(kind, param)
        matrix = None
        if "matrix" in doc:
            matrix = []
            for entry in _list(doc["matrix"], "matrix"):
                ends = _list(entry, "a matrix entry")
                if len(ends) != 2:
                    raise InputError("a matrix entry is a pair of refs", entry.pos)
                matrix.append((_ref(ends[0]), _ref(ends[1])))
        try:
            return TableTailRule(n, cutoff, pairs, matrix)
        except InputError as e:
            raise InputError(str(e), tree.pos) from None
    raise InputError(f"unknown rule {rule!r}; expected grid, corrigendum or table", doc["rule"].pos)


# -- sets -----------------------------------------------------------------------------------

REGION_KEYS = {"family": "row", "column": "col", "block": "block"}


def _region(node):
    m = _map(node, "a region")
    keys = [k for k in REGION_KEYS if k in m]
    if len(keys) != 1:
        raise InputError("a region has exactly one of 'family', 'column', 'block'", node.pos)
    k = keys[0]
    start = _int(m["from"], "from") if "from" in m else 0
    return make_region(REGION_KEYS[k], _int(m[k], k), start)


def read_set(node, ambient, name=None):
    """A set literal: ``full``, a region, ``{regions, plus, minus}`` or a list."""
    v = node.value
    if v == "full":
        if not isinstance(ambient, FamilySystem):
            return HypSet.of(ambient, ambient.wall_ids, label=name)
        return HypSet.full(ambient, label=name)
    if isinstance(v, list):
        if isinstance(ambient, FamilySystem):
            members = [_ref(x) for x in v]
        else:
            members = [x.value for x in v]
        try:
            return HypSet.of(ambient, members, label=name)
        except InputError as e:
            raise InputError(str(e), node.pos) from None
    m = _map(node, "a set")
    if not isinstance(ambient, FamilySystem):
        raise InputError("symbolic sets need a family system", node.pos)
    if any(k in m for k in REGION_KEYS):
        regions = [_region(node)]
        plus = minus = ()
    else:
        unknown = set(m) - {"regions", "plus", "minus"}
        if unknown:
            raise InputError(f"unknown set keys {sorted(unknown)}", node.pos)
        regions = [_region(r) for r in _list(m["regions"], "regions")] if "regions" in m else []
        plus = [_ref(x) for x in _list(m["plus"], "plus")] if "plus" in m else []
        minus = [_ref(x) for x in _list(m["minus"], "minus")] if "minus" in m else []
    try:
        return HypSet.symbolic(ambient, regions, plus, minus, label=name)
    except InputError as e:
        raise InputError(str(e), node.pos) from None


# -- documents --------------------------------------------------------------------------------


@dataclass
class Document:
    ambient: object
    sets: dict = field(default_factory=dict)
    instance: Instance | None = None
    raw: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)


def load_text(text, horizon=None, seed=0):
    tree = parse_text(text)
    doc = tree.value
    kinds = [k for k in ("points", "rule", "generate") if k in doc]
    if len(kinds) != 1:
        raise InputError("give exactly one of 'points', 'rule' or 'generate'", tree.pos)
    instance = None
    if "points" in doc:
        ambient = read_wallspace(tree)
    elif "rule" in doc:
        ambient = read_system(tree)
    else:
        g = doc["generate"]
        try:
            if isinstance(g.value, str):
                kind, params = parse_gen(g.value)
            else:
                m = _map(g, "generate")
                kind, params = m["kind"].value, [x.value for x in _list(m["params"], "params")] if "params" in m else []
            gseed = _int(doc["seed"], "seed") if "seed" in doc else seed
            instance = generate(kind, params, horizon, gseed)
        except InputError as e:
            raise InputError(str(e).split(" (line")[0], g.pos) from None
        ambient = instance.ambient
    sets, nodes = {}, {}
    if "sets" in doc:
        for name, node in _map(doc["sets"], "sets").items():
            sets[name] = read_set(node, ambient, str(name))
            nodes[name] = node
    return Document(ambient, sets, instance, plain(tree), nodes)


def load_file(path, horizon=None, seed=0):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return load_text(text, horizon, seed)


# -- writing ------------------------------------------------------------------------------------


def dump_wallspace(ws):
    return yaml.safe_dump({
        "points": list(ws.points),
        "walls": [{"id": w.id, "positive": sorted(w.positive_side, key=ws.points.index)} for w in ws.walls],
    }, sort_keys=False)


def dump_system(system):
    """YAML for a family system; :func:`load_text` reads it back."""
    return yaml.safe_dump(system.describe(), sort_keys=False)


def set_literal(S):
    if S.explicit:
        return [list(m) if isinstance(m, tuple) else m for m in S.members_below(10**9)]
    out = {"regions": [r.describe() for r in S.regions]}
    if S.plus:
        out["plus"] = [list(m) for m in sorted(S.plus)]
    if S.minus:
        out["minus"] = [list(m) for m in sorted(S.minus)]
    return out
