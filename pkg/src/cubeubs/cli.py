"""Command-line front end.

Exit status: 0 success, 1 a certificate or verdict came out false, 2 bad
input, 3 a horizon or resource limit was hit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report
from .decomposition import (
    compare_decompositions,
    decompose,
    from_components,
    verify_decomposition,
)
from .dual import DEFAULT_MAX_WALLS, dimension_report, dual_complex, median_check
from .errors import (
    ConsistencyError,
    CycleError,
    InputError,
    PreconditionError,
    RealizationError,
    ResourceError,
    Undecided,
)
from .family import CorrigendumRule, FamilySystem, realize_truncation
from .generators import corrigendum_alternative, generate, parse_gen
from .hypset import HypSet
from .io import dump_system, dump_wallspace, load_file
from .ubs import almost_containment_poset, certify

EXIT_OK, EXIT_FALSIFIED, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3
COMMANDS = ("certify", "decompose", "compare", "dual", "poset", "gen")


def build_parser():
    p = argparse.ArgumentParser(prog="cubeubs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp, needs_input=True):
        if needs_input:
            src = sp.add_mutually_exclusive_group(required=True)
            src.add_argument("input", nargs="?", help="instance file (YAML)")
            src.add_argument("--gen", metavar="KIND:PARAMS", help="generate the instance, e.g. corrigendum:5")
        sp.add_argument("--horizon", type=int, default=50, help="truncation horizon (default 50)")
        sp.add_argument("--seed", type=int, default=None, help="tie-break / generator seed")
        sp.add_argument("--format", choices=("text", "structured", "dot"), default="text")
        sp.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
        sp.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
        sp.add_argument("--set", dest="set_name", default="V", help="named set from the file (default V)")

    common(sub.add_parser("certify", help="certify that a set is a UBS"))
    sp = sub.add_parser("decompose", help="decompose a UBS into minimal UBSs")
    common(sp)
    sp.add_argument("--max-components", type=int, default=None)
    sp.add_argument("--cert-horizon", type=int, default=None)
    sp = sub.add_parser("compare", help="compare two decompositions of the same UBS")
    common(sp)
    sp.add_argument("--max-components", type=int, default=None)
    sp.add_argument("--seed2", type=int, default=1, help="seed of the second decomposition")
    sp.add_argument("--alternative", action="store_true",
                    help="compare against the column-and-tails decomposition of the counterexample")
    common(sub.add_parser("dual", help="dual cube complex of a wallspace or a realized truncation"))
    common(sub.add_parser("poset", help="almost-containment poset of the named sets"))
    sp = sub.add_parser("gen", help="print a generated instance")
    sp.add_argument("kind", metavar="KIND:PARAMS")
    common(sp, needs_input=False)
    return p


# -- loading -----------------------------------------------------------------------------


class Loaded:
    def __init__(self, ambient, sets, instance=None):
        self.ambient = ambient
        self.sets = sets
        self.instance = instance

    def get(self, name):
        if name in self.sets:
            return self.sets[name]
        if name == "V":
            if isinstance(self.ambient, FamilySystem):
                return HypSet.full(self.ambient)
            return HypSet.of(self.ambient, self.ambient.wall_ids, label="V")
        raise InputError(f"no set named {name!r}; known: {sorted(self.sets)}")


def load(args):
    if args.input is not None:
        doc = load_file(args.input, args.horizon, args.seed or 0)
        return Loaded(doc.ambient, doc.sets, doc.instance)
    kind, params = parse_gen(args.gen)
    inst = generate(kind, params, args.horizon, args.seed or 0)
    return Loaded(inst.ambient, {"V": inst.V} if inst.V is not None else {}, inst)


# -- commands -----------------------------------------------------------------------------


def cmd_certify(args, loaded, out):
    S = loaded.get(args.set_name)
    cert = certify(S, args.horizon)
    out.payload = cert.describe()
    out.dot = _crossing_dot(loaded.ambient, args.horizon)
    return EXIT_OK if cert.is_ubs else EXIT_FALSIFIED


def cmd_decompose(args, loaded, out):
    V = loaded.get(args.set_name)
    d = decompose(V, args.horizon, max_components=args.max_components, seed=args.seed,
                  cert_horizon=args.cert_horizon)
    checks = verify_decomposition(d)
    out.payload = {"decomposition": d.describe(), "checks": checks}
    out.dot = report.gamma_dot(d)
    if args.figures:
        out.figures.append(report.plot_gamma(d, Path(args.figures) / "gamma.png"))
    return EXIT_OK if all(checks.values()) else EXIT_FALSIFIED


def cmd_compare(args, loaded, out):
    V = loaded.get(args.set_name)
    amb = V.ambient
    alternative = args.alternative or (isinstance(amb, CorrigendumRule) and not amb.bounded)
    if alternative:
        k = args.max_components or 5
        d1 = decompose(V, args.horizon, max_components=k, seed=args.seed)
        vprime, tails = corrigendum_alternative(amb, k)
        rest = V.difference(vprime)
        for t in tails:
            rest = rest.difference(t)
        d2 = from_components(V, [*tails, vprime], [rest], horizon=args.horizon)
    else:
        d1 = decompose(V, args.horizon, max_components=args.max_components, seed=args.seed)
        d2 = decompose(V, args.horizon, max_components=args.max_components, seed=args.seed2)
    c = compare_decompositions(d1, d2)
    out.payload = {
        "first": d1.describe(),
        "second": d2.describe(),
        "comparison": c.describe(d1, d2),
        "second_certificates": [cert.describe() for cert in d2.certificates],
    }
    out.dot = report.gamma_dot(d1) + report.gamma_dot(d2)
    if args.figures:
        out.figures.append(report.plot_gamma(d1, Path(args.figures) / "gamma_first.png"))
        out.figures.append(report.plot_gamma(d2, Path(args.figures) / "gamma_second.png"))
    return EXIT_OK if c.verdict else EXIT_FALSIFIED


def cmd_dual(args, loaded, out):
    amb = loaded.ambient
    payload = {}
    if isinstance(amb, FamilySystem):
        walls = len(amb.hyperplanes(args.horizon))
        if walls > DEFAULT_MAX_WALLS:
            raise ResourceError(f"the truncation at horizon {args.horizon} has {walls} walls; "
                                f"the dual is built for at most {DEFAULT_MAX_WALLS}")
        real = realize_truncation(amb, args.horizon)
        ws = real.wallspace
        payload["truncation"] = {"horizon": args.horizon, "walls": len(ws.walls), "points": len(ws.points)}
        payload["dimension_report"] = dimension_report(amb, [args.horizon, 2 * args.horizon])
    else:
        ws = amb
    skel = dual_complex(ws)
    verdict = median_check(skel)
    payload["skeleton"] = skel.describe()
    payload["median_check"] = verdict.describe()
    payload["dimension"] = ws.dimension()
    out.payload = payload
    out.dot = report.skeleton_dot(skel)
    if args.figures:
        out.figures.append(report.plot_cube_histogram(skel, Path(args.figures) / "cubes.png"))
    ok = verdict.ok and skel.dimension == payload["dimension"]
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_poset(args, loaded, out):
    sets = dict(loaded.sets)
    amb = loaded.ambient
    if not sets or list(sets) == ["V"]:
        if not isinstance(amb, FamilySystem):
            raise InputError("poset needs named sets in the instance file")
        sets = {"V": loaded.get("V")}
        for f in amb.family_range(min(args.horizon, 8)):
            sets[f"F{f}"] = HypSet.family(amb, f, label=f"F{f}")
    names = list(sets)
    poset = almost_containment_poset([sets[n] for n in names])
    desc = poset.describe()
    desc["names"] = names
    desc["classes_named"] = [[names[i] for i in cls] for cls in poset.classes]
    out.payload = desc
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(range(len(poset.reps)))
    g.add_edges_from(poset.hasse())
    out.dot = report.graph_dot(g, "poset", {k: "=".join(desc["classes_named"][k]) for k in g.nodes})
    return EXIT_OK


def cmd_gen(args, out):
    kind, params = parse_gen(args.kind)
    inst = generate(kind, params, args.horizon, args.seed or 0)
    out.payload = inst.describe()
    if isinstance(inst.ambient, FamilySystem):
        out.text = dump_system(inst.ambient)
    else:
        out.text = dump_wallspace(inst.ambient)
    if inst.realization is not None:
        out.dot = report.graph_dot(inst.realization.wallspace.crossing_graph(), "crossing")
    if args.figures and inst.realization is not None:
        real = inst.realization
        out.figures.append(report.plot_crossing_matrix(
            real.wallspace, list(real.wallspace.wall_ids), Path(args.figures) / "crossing.png"))
    return EXIT_OK


def _crossing_dot(amb, horizon):
    if isinstance(amb, FamilySystem):
        return report.graph_dot(amb.crossing_graph(min(horizon, 12)), "crossing")
    return report.graph_dot(amb.crossing_graph(), "crossing")


# -- driver -------------------------------------------------------------------------------------


class Output:
    def __init__(self):
        self.payload = None
        self.dot = None
        self.text = None
        self.figures = []


def _error_payload(e):
    out = {"error": type(e).__name__, "message": str(e)}
    for attr in ("position", "witness", "conflict", "cycle"):
        v = getattr(e, attr, None)
        if v is not None:
            out[attr] = v
    return out


def run(argv=None, stdout=None):
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.horizon < 2:
        print("cubeubs: --horizon must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    out = Output()
    status = EXIT_OK
    try:
        if args.command == "gen":
            status = cmd_gen(args, out)
        else:
            loaded = load(args)
            status = {"certify": cmd_certify, "decompose": cmd_decompose, "compare": cmd_compare,
                      "dual": cmd_dual, "poset": cmd_poset}[args.command](args, loaded, out)
    except (InputError, PreconditionError, RealizationError) as e:
        status, out.payload = EXIT_INPUT, _error_payload(e)
    except (ResourceError, ConsistencyError, Undecided) as e:
        status, out.payload = EXIT_LIMIT, _error_payload(e)
    except CycleError as e:
        status, out.payload = EXIT_FALSIFIED, _error_payload(e)
    label = {EXIT_OK: "ok", EXIT_FALSIFIED: "falsified", EXIT_INPUT: "input-error", EXIT_LIMIT: "limit"}[status]
    env = report.envelope(args.command, out.payload, args.horizon, args.seed, label)
    if out.figures:
        env["figures"] = out.figures
    if args.format == "structured":
        text = report.to_json(env)
    elif args.format == "dot" and out.dot is not None and status in (EXIT_OK, EXIT_FALSIFIED):
        text = out.dot
    elif args.command == "gen" and out.text is not None and status == EXIT_OK:
        text = out.text
    else:
        text = report.to_text(env)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    if status in (EXIT_INPUT, EXIT_LIMIT):
        print(f"cubeubs: {out.payload['message']}", file=sys.stderr)
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
