"""Indicator scoring: 21 indicators, 7 sub-indexes and the sustainability index.

Every indicator is the unweighted mean of its component scores; every
component is a documented mapping of one or more questionnaire fields to
[0,1], defined by the versioned scoring table shipped in
``data/scoring_table.json``.  The sustainability index (SI) is the
unweighted mean of the 21 indicator scores and is classified against the
0.7 sustainability limit:

* ``Low``    for SI in [0.0, 0.5)
* ``Medium`` for SI in [0.5, 0.7)
* ``High``   for SI in [0.7, 1.0]

Intervals are closed on the left and open on the right, except that High
is closed at 1.0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import RegistryError, ScoringError
from .qschema import Questionnaire, load_field_registry

SUSTAINABILITY_LIMIT = 0.7

CATEGORIES = ("Low", "Medium", "High")

TRI_SCORES = {"insufficient": 0.0, "partial": 0.5, "sufficient": 1.0}


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    kind: str
    codes: tuple[str, ...]
    params: dict


@dataclass(frozen=True)
class IndicatorSpec:
    id: int
    name: str
    components: tuple[ComponentSpec, ...]


@dataclass(frozen=True)
class SubIndexSpec:
    id: int
    name: str
    indicators: tuple[int, ...]


@dataclass(frozen=True)
class ScoringTable:
    version: str
    indicators: tuple[IndicatorSpec, ...]
    subindexes: tuple[SubIndexSpec, ...]

    def indicator(self, indicator_id: int) -> IndicatorSpec:
        return self.indicators[indicator_id - 1]

    def component_ids(self) -> tuple[str, ...]:
        return tuple(c.id for ind in self.indicators for c in ind.components)


@lru_cache(maxsize=1)
def load_scoring_table() -> ScoringTable:
    """Load the shipped scoring table and cross-check it against the registry."""
    with resources.files("agroisa.data").joinpath("scoring_table.json").open(
        "r", encoding="utf-8"
    ) as fh:
        raw = json.load(fh)
    registry = load_field_registry()
    indicators = []
    seen_components = set()
    for pos, entry in enumerate(raw["indicators"], start=1):
        if entry["id"] != pos:
            raise RegistryError(f"scoring table indicators out of order at {entry['id']}")
        components = []
        for c in entry["components"]:
            if c["id"] in seen_components:
                raise RegistryError(f"duplicate component id {c['id']}")
            seen_components.add(c["id"])
            for code in c["codes"]:
                if code not in registry:
                    raise RegistryError(f"component {c['id']} references unknown code {code}")
            kind = c["kind"]
            spec_kinds = {registry[code].kind for code in c["codes"]}
            if kind == "tri" and spec_kinds != {"tri_level"}:
                raise RegistryError(f"component {c['id']}: tri mapping on non tri_level field")
            if kind in ("activity_ratio", "sample_params", "max_risk") and spec_kinds != {"table"}:
                raise RegistryError(f"component {c['id']}: table mapping on non-table field")
            components.append(
                ComponentSpec(id=c["id"], kind=kind, codes=tuple(c["codes"]), params=c.get("params", {}))
            )
        indicators.append(IndicatorSpec(id=pos, name=entry["name"], components=tuple(components)))
    if len(indicators) != 21:
        raise RegistryError(f"expected 21 indicators, found {len(indicators)}")

    subindexes = []
    covered: set[int] = set()
    for entry in raw["subindexes"]:
        ids = tuple(entry["indicators"])
        if covered & set(ids):
            raise RegistryError("sub-index partition overlaps")
        covered.update(ids)
        subindexes.append(SubIndexSpec(id=entry["id"], name=entry["name"], indicators=ids))
    if covered != set(range(1, 22)):
        raise RegistryError("sub-index partition does not cover indicators 1..21")
    return ScoringTable(
        version=raw["version"], indicators=tuple(indicators), subindexes=tuple(subindexes)
    )


def indicator_names() -> tuple[str, ...]:
    return tuple(ind.name for ind in load_scoring_table().indicators)


def subindex_names() -> tuple[str, ...]:
    return tuple(s.name for s in load_scoring_table().subindexes)


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def linear_score(x: float, best: float, worst: float) -> float:
    """Piecewise-linear mapping: 1 at ``best``, 0 at ``worst``, clamped."""
    return clamp01((x - worst) / (best - worst))


def _missing(q: Questionnaire, codes) -> list[str]:
    return [c for c in codes if c not in q.values]


def score_component(q: Questionnaire, comp: ComponentSpec) -> float:
    """Score one component of one indicator on a questionnaire.

    Raises
    ------
    ScoringError
        When any referenced field is missing or the field content cannot
        be mapped (unknown category token, empty mandatory table).
    """
    missing = _missing(q, comp.codes)
    if missing:
        raise ScoringError(
            f"component {comp.id}: missing field(s) {', '.join(missing)}", codes=missing
        )
    kind = comp.kind
    params = comp.params
    if kind == "tri":
        return TRI_SCORES[q.values[comp.codes[0]]]
    if kind == "category":
        token = q.values[comp.codes[0]]
        table = params["map"]
        if token not in table:
            raise ScoringError(
                f"component {comp.id}: no score for category {token!r}", codes=comp.codes
            )
        return float(table[token])
    if kind == "linear":
        return linear_score(q.values[comp.codes[0]], params["best"], params["worst"])
    if kind == "max_linear":
        value = max(q.values[c] for c in comp.codes)
        return linear_score(value, params["best"], params["worst"])
    if kind == "fraction":
        den = q.values[params["den"]]
        if den <= 0:
            if "zero_den_score" in params:
                return float(params["zero_den_score"])
            raise ScoringError(
                f"component {comp.id}: denominator {params['den']} is zero", codes=(params["den"],)
            )
        total = sum(w * q.values[c] for c, w in params["num"])
        return clamp01(total / (params["scale"] * den))
    if kind == "activity_ratio":
        rows = q.values[comp.codes[0]]
        scores = []
        for row in rows:
            base = row.get("region_productivity", 0.0) * row.get("region_price", 0.0)
            if base <= 0:
                continue
            scores.append(clamp01(row.get("productivity", 0.0) * row.get("price", 0.0) / base))
        if not scores:
            raise ScoringError(
                f"component {comp.id}: no usable activity rows in {comp.codes[0]}",
                codes=comp.codes,
            )
        return sum(scores) / len(scores)
    if kind == "sample_params":
        rows = q.values[comp.codes[0]]
        if not rows:
            raise ScoringError(
                f"component {comp.id}: no sample rows in {comp.codes[0]}", codes=comp.codes
            )
        columns = params["columns"]
        row_scores = []
        for i, row in enumerate(rows):
            cell_scores = []
            for name, p in columns.items():
                if name not in row:
                    raise ScoringError(
                        f"component {comp.id}: row {i} misses column {name!r}", codes=comp.codes
                    )
                cell_scores.append(linear_score(row[name], p["best"], p["worst"]))
            row_scores.append(sum(cell_scores) / len(cell_scores))
        return sum(row_scores) / len(row_scores)
    if kind == "max_risk":
        rows = q.values[comp.codes[0]]
        if not rows:
            return float(params["empty_score"])
        column = params["column"]
        try:
            worst = max(int(row[column]) for row in rows)
        except KeyError:
            raise ScoringError(
                f"component {comp.id}: applications lack the {column!r} class", codes=comp.codes
            ) from None
        return (3 - worst) / 2.0
    raise RegistryError(f"unhandled component kind {kind}")


def component_scores(q: Questionnaire) -> dict[str, float]:
    """All component scores keyed by component id.

    Raises ScoringError (with the indicator id attached) on the first
    indicator whose data is missing or unusable.
    """
    out: dict[str, float] = {}
    for ind in load_scoring_table().indicators:
        for comp in ind.components:
            try:
                out[comp.id] = score_component(q, comp)
            except ScoringError as exc:
                raise ScoringError(str(exc), codes=exc.codes, indicator=ind.id) from None
    return out


def score_indicator(q: Questionnaire, indicator_id: int) -> float:
    """Score one indicator (1..21) as the mean of its component scores."""
    spec = load_scoring_table().indicator(indicator_id)
    try:
        scores = [score_component(q, comp) for comp in spec.components]
    except ScoringError as exc:
        raise ScoringError(str(exc), codes=exc.codes, indicator=indicator_id) from None
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class IndicatorVector:
    """The 21 indicator scores of one questionnaire, in canonical order."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != 21:
            raise ValueError(f"expected 21 indicator values, got {len(self.values)}")
        for i, v in enumerate(self.values, start=1):
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"indicator {i} value {v!r} outside [0, 1]")

    def by_id(self, indicator_id: int) -> float:
        return self.values[indicator_id - 1]


@dataclass(frozen=True)
class SubIndexVector:
    """The 7 thematic sub-index scores, in scoring-table order."""

    values: tuple[float, ...]

    def by_id(self, subindex_id: int) -> float:
        return self.values[subindex_id - 1]


def compute_indicator_vector(q: Questionnaire) -> IndicatorVector:
    """Score all 21 indicators of a questionnaire."""
    comps = component_scores(q)
    table = load_scoring_table()
    values = []
    for ind in table.indicators:
        scores = [comps[c.id] for c in ind.components]
        values.append(sum(scores) / len(scores))
    return IndicatorVector(values=tuple(values))


def indicator_vector_from_components(comps: dict[str, float]) -> IndicatorVector:
    """Aggregate precomputed component scores into an indicator vector."""
    table = load_scoring_table()
    values = []
    for ind in table.indicators:
        scores = [comps[c.id] for c in ind.components]
        values.append(sum(scores) / len(scores))
    return IndicatorVector(values=tuple(values))


def compute_subindexes(iv: IndicatorVector) -> SubIndexVector:
    """Aggregate indicators into the 7 sub-indexes (unweighted means)."""
    table = load_scoring_table()
    values = []
    for sub in table.subindexes:
        scores = [iv.by_id(i) for i in sub.indicators]
        values.append(sum(scores) / len(scores))
    return SubIndexVector(values=tuple(values))


def compute_si(iv: IndicatorVector) -> float:
    """Sustainability index: unweighted mean of the 21 indicators."""
    return sum(iv.values) / 21.0


def categorize(si: float) -> str:
    """Map an SI value to Low/Medium/High.

    Boundaries are left-closed: 0.5 is Medium and 0.7 is High; 1.0 is
    High.  Values outside [0,1] raise ValueError.
    """
    if not (math.isfinite(si) and 0.0 <= si <= 1.0):
        raise ValueError(f"SI {si!r} outside [0, 1]")
    if si < 0.5:
        return "Low"
    if si < SUSTAINABILITY_LIMIT:
        return "Medium"
    return "High"


@dataclass(frozen=True)
class SustainabilityScore:
    si: float
    category: str


@dataclass(frozen=True)
class ScoredRecord:
    """A questionnaire together with everything derived from it."""

    questionnaire: Questionnaire
    components: dict[str, float]
    indicators: IndicatorVector
    subindexes: SubIndexVector
    score: SustainabilityScore


def score_record(q: Questionnaire) -> ScoredRecord:
    """Score a questionnaire end to end (components, indicators, SI)."""
    comps = component_scores(q)
    iv = indicator_vector_from_components(comps)
    si = compute_si(iv)
    return ScoredRecord(
        questionnaire=q,
        components=comps,
        indicators=iv,
        subindexes=compute_subindexes(iv),
        score=SustainabilityScore(si=si, category=categorize(si)),
    )
