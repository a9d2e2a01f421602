"""Text report for a single property and the multi-file report bundle."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path

from ..errors import ReportError
from ..indicators import (
    SUSTAINABILITY_LIMIT,
    ScoredRecord,
    indicator_names,
    subindex_names,
)
from .aggregate import MONETARY_ITEMS, aggregate
from .charts import (
    RADAR_VIEWS,
    area_tree_data,
    cfs_bar_data,
    radar_data,
    sankey_from_rules,
    scatter_data,
    word_frequencies,
)
from .filters import FilterCriteria, filter_records

BUNDLE_VERSION = 1

_FLAG = "** below limit"


def property_report(record: ScoredRecord) -> str:
    """Byte-stable single-property report with below-limit flags."""
    q = record.questionnaire
    h = q.header
    ind_names = indicator_names()
    sub_names = subindex_names()
    width = max(len(n) for n in (*ind_names, *sub_names)) + 2

    def line(tag: str, name: str, value: float) -> str:
        flag = f"  {_FLAG}" if value < SUSTAINABILITY_LIMIT else ""
        return f"  {tag:<4} {name:<{width}} {value:.3f}{flag}"

    lines = [
        "SUSTAINABILITY REPORT",
        "=====================",
        f"Property:     {h.property_code}",
        f"Interview:    {h.interview_date.isoformat()}",
        f"Municipality: {h.municipality}" + (f" ({h.state})" if h.state else ""),
        f"Project:      {h.project_id}",
        f"Main income:  {h.main_income}",
        "",
        f"Indicators (limit {SUSTAINABILITY_LIMIT:.2f})",
    ]
    for i, name in enumerate(ind_names, start=1):
        lines.append(line(f"I{i}", name, record.indicators.by_id(i)))
    lines.append("")
    lines.append("Sub-indexes")
    for i, name in enumerate(sub_names, start=1):
        lines.append(line(f"S{i}", name, record.subindexes.by_id(i)))
    lines.append("")
    si = record.score.si
    flag = f"  {_FLAG}" if si < SUSTAINABILITY_LIMIT else ""
    lines.append(f"Sustainability Index: {si:.3f}  ({record.score.category}){flag}")
    return "\n".join(lines) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _criteria_dict(criteria: FilterCriteria) -> dict:
    doc = {}
    for key, value in asdict(criteria).items():
        if value is None:
            continue
        doc[key] = sorted(value) if isinstance(value, frozenset) else value
    return doc


def write_report_bundle(out_dir, records, *, criteria: FilterCriteria | None = None,
                        scatter_axes=("I12", "SI"), area_axis="SI",
                        rules=None, rules_dataset=None, selection=None,
                        stopwords=None) -> dict:
    """Write the chart-data files for a filtered record set.

    Returns the manifest (also written as ``manifest.json``).  ``rules``
    with ``rules_dataset`` adds the rule-flow files; ``selection`` adds
    the attribute-relevance bars.
    """
    criteria = criteria or FilterCriteria()
    matched = filter_records(records, criteria)
    if not matched:
        raise ReportError("no records match the report criteria")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = aggregate(matched)
    files: dict[str, str] = {}

    def emit(name: str, text: str) -> None:
        (out / name).write_text(text, encoding="utf-8")
        files[name] = "csv"

    rows = [("record_count", str(report.count)), ("mean_si", f"{report.mean_si:.6f}")]
    rows += [(key, f"{report.monetary_sums[key]:.2f}") for key, _ in MONETARY_ITEMS]
    emit("aggregate.csv", _csv_text(("metric", "value"), rows))

    emit("indicator_means.csv", _csv_text(
        ("indicator", "name", "mean"),
        [(f"I{i}", name, f"{v:.6f}") for i, (name, v) in
         enumerate(zip(indicator_names(), report.mean_indicators), start=1)],
    ))
    emit("subindex_means.csv", _csv_text(
        ("subindex", "name", "mean"),
        [(f"S{i}", name, f"{v:.6f}") for i, (name, v) in
         enumerate(zip(subindex_names(), report.mean_subindexes), start=1)],
    ))
    box_rows = [
        (f"S{i}", f"{b.minimum:.6f}", f"{b.q1:.6f}", f"{b.median:.6f}",
         f"{b.q3:.6f}", f"{b.maximum:.6f}")
        for i, b in enumerate(report.box_subindexes, start=1)
    ]
    b = report.box_si
    box_rows.append(("SI", f"{b.minimum:.6f}", f"{b.q1:.6f}", f"{b.median:.6f}",
                     f"{b.q3:.6f}", f"{b.maximum:.6f}"))
    emit("box_stats.csv", _csv_text(
        ("series", "min", "q1", "median", "q3", "max"), box_rows))

    for view in RADAR_VIEWS:
        data = radar_data(report, view)
        emit(f"radar_{view}.csv", _csv_text(
            ("axis", "mean", "limit"),
            [(a, f"{v:.6f}", f"{l:.2f}") for a, v, l in
             zip(data.axes, data.values, data.limit)],
        ))

    sc = scatter_data(matched, *scatter_axes)
    emit("scatter.csv", _csv_text(
        ("property", sc.x_id, sc.y_id, "category"),
        [(p, f"{x:.6f}", f"{y:.6f}", c) for p, x, y, c in sc.points],
    ))

    area = area_tree_data(matched, area_axis)
    emit("area.csv", _csv_text(
        ("property", "area_ha", area.value_id, "weight"),
        [(p, f"{a:.4f}", f"{v:.6f}", f"{w:.6f}") for p, a, v, w in area.rectangles],
    ))

    words = word_frequencies(matched, stopwords)
    emit("words.csv", _csv_text(("token", "count"), [(t, str(c)) for t, c in words]))

    emit("properties.csv", _csv_text(
        ("property", "year", "si", "category"),
        [(r.questionnaire.header.property_code,
          str(r.questionnaire.header.interview_date.year),
          f"{r.score.si:.6f}", r.score.category) for r in matched],
    ))

    if rules is not None:
        if rules_dataset is None:
            raise ReportError("rule-flow output needs the matching dataset")
        graph = sankey_from_rules(rules, rules_dataset)
        emit("rules_nodes.csv", _csv_text(
            ("node", "label", "kind"),
            [(n.node_id, n.label, n.kind) for n in graph.nodes],
        ))
        emit("rules_links.csv", _csv_text(
            ("source", "target", "weight"),
            [(l.source, l.target, str(l.weight)) for l in graph.links],
        ))
        emit("rules_coverage.csv", _csv_text(
            ("rule", "coverage"),
            [(str(i), f"{c:.6f}") for i, c in enumerate(graph.rule_coverage)],
        ))

    if selection is not None:
        bars = cfs_bar_data(selection)
        emit("selection_bars.csv", _csv_text(
            ("attribute", "class_correlation"),
            [(name, f"{score:.6f}") for name, score in bars],
        ))

    manifest = {
        "version": BUNDLE_VERSION,
        "record_count": report.count,
        "filter": _criteria_dict(criteria),
        "warnings": list(area.warnings),
        "files": dict(sorted(files.items())),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest
