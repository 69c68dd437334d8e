"""Report rendering: structured JSON, plain text, DOT and PNG figures.

Structured reports are plain dicts wrapped in an envelope carrying the
schema version, command, horizon and seed.  JSON output sorts keys and has
no timestamps, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

SCHEMA_VERSION = "1.0"


def envelope(command, payload, horizon=None, seed=None, status="ok"):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "horizon": horizon,
        "seed": seed,
        "status": status,
        "result": payload,
    }


def _jsonable(x):
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return str(x)


def to_json(report):
    return json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n"


def to_text(report):
    """Indented ``key: value`` lines; lists of scalars stay on one line."""
    lines = []

    def emit(key, value, depth):
        pad = "  " * depth
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            for k in value:
                emit(k, value[k], depth + 1)
        elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
            lines.append(f"{pad}{key}:")
            for k, v in enumerate(value):
                emit(f"[{k}]", v, depth + 1)
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: " + ", ".join(str(v) for v in value))
        else:
            lines.append(f"{pad}{key}: {value}")

    for k in report:
        emit(k, report[k], 0)
    return "\n".join(lines) + "\n"


# -- DOT ---------------------------------------------------------------------------


def _q(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_dot(g, name="G", labels=None):
    """DOT text for a networkx graph; node and edge order is sorted."""
    directed = g.is_directed()
    head = "digraph" if directed else "graph"
    arrow = "->" if directed else "--"
    labels = labels or {}
    out = [f"{head} {_q(name)} {{"]
    for n in sorted(g.nodes, key=str):
        out.append(f"  {_q(n)} [label={_q(labels.get(n, n))}];")
    for a, b in sorted(g.edges, key=lambda e: (str(e[0]), str(e[1]))):
        out.append(f"  {_q(a)} {arrow} {_q(b)};")
    out.append("}")
    return "\n".join(out) + "\n"


def gamma_dot(decomposition):
    g = decomposition.prec_graph
    labels = {i: f"U{i}: {decomposition.components[i]}" for i in g.nodes}
    return graph_dot(g, "Gamma", labels)


def skeleton_dot(skel):
    g = skel.graph()
    return graph_dot(g, "skeleton", {k: skel.vertex_label(k) for k in g.nodes})


# -- figures ------------------------------------------------------------------------


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return str(path)


def plot_gamma(decomposition, path):
    """Components left to right in the linear order, Γ edges as arcs."""
    g = decomposition.prec_graph
    order = decomposition.linear_order or sorted(g.nodes)
    pos = {n: (k, 0.0) for k, n in enumerate(order)}
    fig, ax = plt.subplots(figsize=(max(4, 1.4 * len(order)), 2.6))
    nx.draw_networkx_nodes(g, pos, ax=ax, node_color="#dde6f0", edgecolors="#33485e", node_size=700)
    nx.draw_networkx_labels(g, pos, {n: f"U{n}" for n in g.nodes}, ax=ax, font_size=9)
    nx.draw_networkx_edges(g, pos, ax=ax, arrows=True, connectionstyle="arc3,rad=-0.35",
                           edge_color="#33485e", node_size=700)
    ax.set_title(f"almost-crossing graph, horizon {decomposition.horizon}", fontsize=10)
    ax.set_axis_off()
    ax.set_ylim(-1, 1)
    return _save(fig, path)


def plot_cube_histogram(skel, path):
    dims = sorted(skel.cube_count_by_dim)
    counts = [skel.cube_count_by_dim[d] for d in dims]
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.bar(dims, counts, color="#5b7fa3", edgecolor="#33485e")
    for d, c in zip(dims, counts):
        ax.annotate(str(c), (d, c), ha="center", va="bottom", fontsize=8)
    ax.set_xlabel("cube dimension")
    ax.set_ylabel("count")
    ax.set_xticks(dims)
    ax.set_title(f"dual complex, {len(skel.walls)} walls", fontsize=10)
    ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    return _save(fig, path)


def plot_crossing_matrix(ambient, refs, path, title="crossing matrix"):
    """Black cells mark crossing pairs."""
    import numpy as np

    n = len(refs)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if ambient.crosses(refs[i], refs[j]):
                m[i, j] = m[j, i] = 1
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.imshow(m, cmap="Greys", interpolation="nearest")
    ticks = list(range(0, n, max(1, n // 12)))
    ax.set_xticks(ticks, [str(refs[t]) for t in ticks], rotation=90, fontsize=6)
    ax.set_yticks(ticks, [str(refs[t]) for t in ticks], fontsize=6)
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    return _save(fig, path)
