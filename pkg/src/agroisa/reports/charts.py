"""Chart-data builders: radar, Sankey, selection bars, scatter, area, words.

Each builder returns a plain dataclass that the CLI serializes as a
delimited file (and optionally renders).  Nothing here draws; the
builders only compute the numbers behind each view.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..dataset import Dataset
from ..errors import ReportError, SelectionError
from ..featsel import SelectionResult
from ..indicators import (
    SUSTAINABILITY_LIMIT,
    ScoredRecord,
    indicator_names,
    subindex_names,
)
from ..classify.ripper import RuleSetModel, format_condition
from ..qschema import load_field_registry
from .aggregate import AggregateReport

RADAR_VIEWS = ("subindexes", "socioeconomic", "environmental")

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


# --------------------------------------------------------------------------
# radar


@dataclass(frozen=True)
class RadarData:
    view: str
    axes: tuple[str, ...]
    values: tuple[float, ...]
    limit: tuple[float, ...]


def radar_data(report: AggregateReport, view: str) -> RadarData:
    """Axis labels, mean values, and the constant 0.7 limit series."""
    if view == "subindexes":
        axes = subindex_names()
        values = report.mean_subindexes
    elif view == "socioeconomic":
        axes = indicator_names()[:11]
        values = report.mean_indicators[:11]
    elif view == "environmental":
        axes = indicator_names()[11:]
        values = report.mean_indicators[11:]
    else:
        raise ReportError(f"unknown radar view {view!r}; expected one of {RADAR_VIEWS}")
    return RadarData(
        view=view,
        axes=tuple(axes),
        values=tuple(values),
        limit=(SUSTAINABILITY_LIMIT,) * len(axes),
    )


# --------------------------------------------------------------------------
# Sankey over an induced rule set


@dataclass(frozen=True)
class SankeyNode:
    node_id: str
    label: str
    kind: str  # "condition" | "class"


@dataclass(frozen=True)
class SankeyLink:
    source: str
    target: str
    weight: int


@dataclass(frozen=True)
class SankeyGraph:
    nodes: tuple[SankeyNode, ...]
    links: tuple[SankeyLink, ...]
    rule_coverage: tuple[float, ...]


def sankey_from_rules(model: RuleSetModel, ds: Dataset) -> SankeyGraph:
    """Flow graph of the rule conjuncts over a dataset.

    One node per distinct conjunct (shared conjuncts are merged) and one
    per outcome class.  Each rule contributes a chain of links whose
    weights count the records satisfying the rule's condition prefix, so
    weights never increase along a chain.  Rule coverage is measured
    against the rule's class total in ``ds``.
    """
    model.check_compatible(ds)
    X, y = ds.X, ds.y
    nodes: dict[str, SankeyNode] = {}
    links: list[SankeyLink] = []
    coverages: list[float] = []

    def class_node(code: int) -> str:
        node_id = f"class:{model.class_values[code]}"
        nodes.setdefault(node_id, SankeyNode(node_id, model.class_values[code], "class"))
        return node_id

    for rule in model.rules:
        sat = None
        prev = None
        class_total = int((y == rule["cls"]).sum())
        for cond in rule["conds"]:
            attr, op, value = cond
            node_id = f"cond:{attr}:{op}:{value!r}"
            nodes.setdefault(node_id, SankeyNode(node_id, format_condition(model, cond), "condition"))
            col = X[:, attr]
            if op == "<=":
                hit = col <= value
            elif op == ">=":
                hit = col >= value
            else:
                hit = col == value
            sat = hit if sat is None else (sat & hit)
            if prev is not None:
                links.append(SankeyLink(prev, node_id, int(sat.sum())))
            prev = node_id
        covered = int(sat.sum()) if sat is not None else len(ds)
        if prev is not None:
            links.append(SankeyLink(prev, class_node(rule["cls"]), covered))
        else:
            class_node(rule["cls"])
        coverages.append(covered / class_total if class_total else 0.0)

    class_node(model.default_class)
    return SankeyGraph(tuple(nodes.values()), tuple(links), tuple(coverages))


# --------------------------------------------------------------------------
# selection bars


def cfs_bar_data(sel: SelectionResult) -> tuple[tuple[str, float], ...]:
    """(attribute, class-correlation) bars for a CFS selection, best first."""
    if sel.method != "cfs":
        raise SelectionError(f"bar chart needs a cfs selection, got {sel.method!r}")
    chosen = set(sel.selected)
    return tuple((name, score) for name, score in sel.ranking if name in chosen)


# --------------------------------------------------------------------------
# scatter & area


def _axis_accessor(axis_id: str):
    """Accessor for an axis id: I1..I21, S1..S7, or SI."""
    token = axis_id.strip().upper()
    if token == "SI":
        return "SI", lambda r: r.score.si
    m = re.fullmatch(r"I([0-9]{1,2})", token)
    if m and 1 <= int(m.group(1)) <= 21:
        k = int(m.group(1))
        return f"I{k}", lambda r: r.indicators.by_id(k)
    m = re.fullmatch(r"S([0-9])", token)
    if m and 1 <= int(m.group(1)) <= 7:
        k = int(m.group(1))
        return f"S{k}", lambda r: r.subindexes.by_id(k)
    raise ReportError(
        f"unknown axis {axis_id!r}; expected I1..I21, S1..S7, or SI"
    )


@dataclass(frozen=True)
class ScatterData:
    x_id: str
    y_id: str
    #: (property_code, x, y, category) per record
    points: tuple[tuple[str, float, float, str], ...]


def scatter_data(records: list[ScoredRecord], x: str, y: str) -> ScatterData:
    """One labeled point per record for any indicator/sub-index/SI pair."""
    x_id, fx = _axis_accessor(x)
    y_id, fy = _axis_accessor(y)
    points = tuple(
        (r.questionnaire.header.property_code, fx(r), fy(r), r.score.category)
        for r in records
    )
    return ScatterData(x_id, y_id, points)


@dataclass(frozen=True)
class AreaTreeData:
    value_id: str
    #: (property_code, area_ha, value, normalized weight) per usable record
    rectangles: tuple[tuple[str, float, float, float], ...]
    warnings: tuple[str, ...]


def _total_area_ha(record: ScoredRecord) -> float:
    """Property area: contiguous parcels, else current land-use total."""
    values = record.questionnaire.values
    for code, column in (("Q7.2", "area_ha"), ("Q10.2", "current_area_ha")):
        rows = values.get(code) or []
        total = sum(float(row.get(column, 0.0) or 0.0) for row in rows)
        if total > 0:
            return total
    return 0.0


def area_tree_data(records: list[ScoredRecord], value_axis: str = "SI") -> AreaTreeData:
    """Rectangles (area vs. score) for the proportional-area comparison.

    Records without a usable (positive) total area are skipped with a
    warning instead of failing the whole view.
    """
    value_id, fv = _axis_accessor(value_axis)
    usable = []
    warnings = []
    for r in records:
        area = _total_area_ha(r)
        code = r.questionnaire.header.property_code
        if area <= 0:
            warnings.append(f"{code}: no usable area fields; skipped")
            continue
        usable.append((code, area, float(fv(r))))
    total = sum(a for _, a, _ in usable)
    rects = tuple(
        (code, area, value, area / total if total else 0.0)
        for code, area, value in usable
    )
    return AreaTreeData(value_id, rects, tuple(warnings))


# --------------------------------------------------------------------------
# word frequencies


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    path = resources.files("agroisa.data").joinpath("stopwords_pt.txt")
    words = set()
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if token and not token.startswith("#"):
                words.add(token.casefold())
    return frozenset(words)


@lru_cache(maxsize=1)
def _free_text_codes() -> tuple[str, ...]:
    registry = load_field_registry()
    return tuple(c for c, spec in registry.fields.items() if spec.kind == "free_text")


def word_frequencies(records, stopwords=None) -> list[tuple[str, int]]:
    """Token counts over all free-text answers, most frequent first.

    Tokens are case-folded letter runs; ties sort lexicographically.
    ``stopwords=None`` applies the bundled Portuguese list; pass an empty
    collection to keep everything.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    else:
        stopwords = {w.casefold() for w in stopwords}
    counts: Counter[str] = Counter()
    for record in records:
        q = record.questionnaire if isinstance(record, ScoredRecord) else record
        for code in _free_text_codes():
            text = q.values.get(code)
            if not text:
                continue
            for token in _WORD_RE.findall(str(text).casefold()):
                if token not in stopwords:
                    counts[token] += 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
