"""PNG renderings of the report chart data.

Every renderer takes one of the chart-data structures from
:mod:`agroisa.reports` and draws it onto a fresh figure, so the numbers
in a report bundle and the pictures next to it always come from the
same computation.  matplotlib is imported lazily and pinned to the Agg
backend: importing this module (or the package) never touches a
display, and rendering works the same on headless machines.
"""

from __future__ import annotations

import math
import os

from .errors import ReportError
from .indicators import CATEGORIES, SUSTAINABILITY_LIMIT, ScoredRecord
from .reports.aggregate import AggregateReport, aggregate
from .reports.charts import (
    RADAR_VIEWS,
    AreaTreeData,
    RadarData,
    SankeyGraph,
    ScatterData,
    area_tree_data,
    cfs_bar_data,
    radar_data,
    scatter_data,
    word_frequencies,
)
from .reports.filters import FilterCriteria, filter_records

_DPI = 150

_CATEGORY_COLORS = {"Low": "#c0392b", "Medium": "#e67e22", "High": "#27ae60"}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI)
    _pyplot().close(fig)


def _wrap(label: str, width: int = 14) -> str:
    """Break a long axis label onto multiple lines at word boundaries."""
    words = label.split()
    lines, line = [], ""
    for w in words:
        if line and len(line) + 1 + len(w) > width:
            lines.append(line)
            line = w
        else:
            line = f"{line} {w}".strip()
    lines.append(line)
    return "\n".join(lines)


def render_radar(data: RadarData, path) -> None:
    """Polar chart of one radar view with the sustainability limit ring."""
    plt = _pyplot()
    n = len(data.axes)
    if n < 3:
        raise ReportError("radar chart needs at least three axes")
    angles = [2.0 * math.pi * k / n for k in range(n)]
    closed = angles + angles[:1]
    values = list(data.values) + [data.values[0]]
    limit = list(data.limit) + [data.limit[0]]

    fig, ax = plt.subplots(figsize=(6.4, 6.4), subplot_kw={"projection": "polar"})
    ax.set_theta_offset(math.pi / 2.0)
    ax.set_theta_direction(-1)
    ax.plot(closed, limit, color="#888888", linestyle="--", linewidth=1.2,
            label=f"limit {SUSTAINABILITY_LIMIT:g}")
    ax.plot(closed, values, color="#2c7fb8", linewidth=1.8, label="mean")
    ax.fill(closed, values, color="#2c7fb8", alpha=0.18)
    ax.set_xticks(angles)
    ax.set_xticklabels([_wrap(a) for a in data.axes], fontsize=8)
    ax.set_ylim(0.0, 1.0)
    ax.set_yticks([0.2, 0.4, 0.6, 0.8, 1.0])
    ax.tick_params(axis="y", labelsize=7)
    ax.set_title(f"{data.view} radar", pad=18)
    ax.legend(loc="lower right", bbox_to_anchor=(1.15, -0.08), fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_boxes(report: AggregateReport, path) -> None:
    """Box plot of the seven sub-indexes plus the sustainability index."""
    plt = _pyplot()
    stats = list(report.box_subindexes) + [report.box_si]
    labels = [f"S{k}" for k in range(1, len(report.box_subindexes) + 1)] + ["SI"]
    boxes = [
        {
            "label": lab,
            "whislo": s.minimum,
            "q1": s.q1,
            "med": s.median,
            "q3": s.q3,
            "whishi": s.maximum,
        }
        for lab, s in zip(labels, stats)
    ]
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    ax.bxp(boxes, showfliers=False, patch_artist=True,
           boxprops={"facecolor": "#a6cee3"}, medianprops={"color": "#1f3b57"})
    ax.axhline(SUSTAINABILITY_LIMIT, color="#888888", linestyle="--", linewidth=1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("score")
    ax.set_title("sub-index and SI distribution")
    fig.tight_layout()
    _save(fig, path)


def render_scatter(data: ScatterData, path) -> None:
    """Per-record scatter of two axes, colored by sustainability category."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    for cat in CATEGORIES:
        xs = [x for _, x, y, c in data.points if c == cat]
        ys = [y for _, x, y, c in data.points if c == cat]
        if xs:
            ax.scatter(xs, ys, s=14, alpha=0.6, linewidths=0.0,
                       color=_CATEGORY_COLORS[cat], label=cat)
    ax.axhline(SUSTAINABILITY_LIMIT, color="#bbbbbb", linestyle="--", linewidth=0.9)
    ax.axvline(SUSTAINABILITY_LIMIT, color="#bbbbbb", linestyle="--", linewidth=0.9)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel(data.x_id)
    ax.set_ylabel(data.y_id)
    ax.set_title(f"{data.y_id} vs {data.x_id}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_area(data: AreaTreeData, path) -> None:
    """Area-weighted bars: width is the property's share of total area."""
    plt = _pyplot()
    if not data.rectangles:
        raise ReportError("no records with a usable property area")
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    left = 0.0
    cmap = plt.get_cmap("YlGn")
    for _, _, value, weight in data.rectangles:
        ax.bar(left, value, width=weight, align="edge",
               color=cmap(0.15 + 0.8 * value), edgecolor="white", linewidth=0.4)
        left += weight
    ax.axhline(SUSTAINABILITY_LIMIT, color="#888888", linestyle="--", linewidth=1.0)
    ax.set_xlim(0.0, max(left, 1e-9))
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("share of total area (each bar is one property)")
    ax.set_ylabel(data.value_id)
    ax.set_title(f"{data.value_id} weighted by property area")
    fig.tight_layout()
    _save(fig, path)


def render_words(words, path, top: int = 25) -> None:
    """Horizontal bars for the most frequent free-text words."""
    plt = _pyplot()
    head = list(words)[:top]
    if not head:
        raise ReportError("no words to plot")
    head.reverse()  # largest bar on top
    labels = [w for w, _ in head]
    counts = [c for _, c in head]
    fig, ax = plt.subplots(figsize=(6.4, max(3.2, 0.28 * len(head) + 1.2)))
    ax.barh(range(len(head)), counts, color="#2c7fb8")
    ax.set_yticks(range(len(head)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel("occurrences")
    ax.set_title("free-text word frequencies")
    fig.tight_layout()
    _save(fig, path)


def render_selection(bars, path) -> None:
    """Per-attribute relevance bars from a selection result."""
    plt = _pyplot()
    bars = list(bars)
    if not bars:
        raise ReportError("no attribute scores to plot")
    names = [n for n, _ in bars]
    scores = [s for _, s in bars]
    fig, ax = plt.subplots(figsize=(max(4.8, 0.32 * len(bars) + 1.6), 4.0))
    ax.bar(range(len(bars)), scores, color="#2c7fb8")
    ax.set_xticks(range(len(bars)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("relevance to class")
    ax.set_title("attribute relevance")
    fig.tight_layout()
    _save(fig, path)


def _node_layers(graph: SankeyGraph) -> dict[str, int]:
    """Longest-path layer per node; class nodes share the last layer."""
    layer = {n.node_id: 0 for n in graph.nodes}
    for _ in range(len(graph.nodes)):
        changed = False
        for link in graph.links:
            want = layer[link.source] + 1
            if layer[link.target] < want:
                layer[link.target] = want
                changed = True
        if not changed:
            break
    last = max(layer.values(), default=0)
    for n in graph.nodes:
        if n.kind == "class":
            layer[n.node_id] = max(last, 1)
    return layer


def render_rule_flow(graph: SankeyGraph, path) -> None:
    """Left-to-right flow of rule conjuncts into their outcome classes.

    Link width is proportional to the number of records still satisfied
    at that point of the conjunct chain.
    """
    plt = _pyplot()
    if not graph.links:
        raise ReportError("rule graph has no links to draw")
    layers = _node_layers(graph)
    n_layers = max(layers.values()) + 1
    columns: dict[int, list] = {}
    for node in graph.nodes:
        columns.setdefault(layers[node.node_id], []).append(node)
    pos: dict[str, tuple[float, float]] = {}
    for col, nodes in columns.items():
        nodes.sort(key=lambda n: (n.kind, n.label))
        x = col / max(n_layers - 1, 1)
        for i, node in enumerate(nodes):
            pos[node.node_id] = (x, (i + 1) / (len(nodes) + 1))

    max_w = max(link.weight for link in graph.links)
    fig, ax = plt.subplots(figsize=(8.0, 0.75 * max(len(v) for v in columns.values()) + 2.5))
    for link in graph.links:
        (x0, y0), (x1, y1) = pos[link.source], pos[link.target]
        lw = 0.8 + 8.0 * (link.weight / max_w if max_w else 0.0)
        ax.plot([x0, x1], [y0, y1], color="#2c7fb8", alpha=0.45,
                linewidth=lw, solid_capstyle="round", zorder=1)
        ax.annotate(str(link.weight), ((x0 + x1) / 2.0, (y0 + y1) / 2.0),
                    fontsize=7, color="#1f3b57", ha="center", va="bottom", zorder=3)
    for node in graph.nodes:
        x, y = pos[node.node_id]
        face = _CATEGORY_COLORS.get(node.label, "#f0f0f0") if node.kind == "class" else "#ffffff"
        color = "white" if node.kind == "class" else "#1f3b57"
        ax.annotate(node.label, (x, y), fontsize=8, ha="center", va="center",
                    color=color, zorder=2,
                    bbox={"boxstyle": "round,pad=0.35", "facecolor": face,
                          "edgecolor": "#1f3b57", "linewidth": 0.8})
    ax.set_xlim(-0.12, 1.12)
    ax.set_ylim(0.0, 1.0)
    ax.set_axis_off()
    ax.set_title("rule condition flow (link labels count matching records)")
    fig.tight_layout()
    _save(fig, path)


def render_figures(
    out_dir,
    records: list[ScoredRecord],
    *,
    criteria: FilterCriteria | None = None,
    scatter_axes=("I12", "SI"),
    area_axis="SI",
    rules=None,
    rules_dataset=None,
    selection=None,
    stopwords=None,
) -> dict:
    """Render the figure set matching a report bundle into ``out_dir``.

    Takes the same arguments as the bundle writer and returns a mapping
    of figure name to file name.  Figures whose data family is empty
    (no words, no usable areas) are skipped rather than failing the
    whole report.
    """
    from .reports.charts import sankey_from_rules

    if criteria is not None:
        records = filter_records(records, criteria)
    if not records:
        raise ReportError("no records match the report criteria")
    os.makedirs(out_dir, exist_ok=True)
    report = aggregate(records)
    files: dict[str, str] = {}

    def emit(name: str, draw) -> None:
        fname = f"{name}.png"
        draw(os.path.join(out_dir, fname))
        files[name] = fname

    for view in RADAR_VIEWS:
        data = radar_data(report, view)
        emit(f"radar_{view}", lambda p, d=data: render_radar(d, p))
    emit("box_stats", lambda p: render_boxes(report, p))
    emit("scatter", lambda p: render_scatter(
        scatter_data(records, scatter_axes[0], scatter_axes[1]), p))
    area = area_tree_data(records, value_axis=area_axis)
    if area.rectangles:
        emit("area", lambda p: render_area(area, p))
    words = word_frequencies(records, stopwords=stopwords)
    if words:
        emit("words", lambda p: render_words(words, p))
    if rules is not None and rules_dataset is not None:
        graph = sankey_from_rules(rules, rules_dataset)
        if graph.links:
            emit("rules_flow", lambda p: render_rule_flow(graph, p))
    if selection is not None:
        emit("selection_bars", lambda p: render_selection(cfs_bar_data(selection), p))
    return files
