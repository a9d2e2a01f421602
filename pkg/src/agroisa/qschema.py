"""Questionnaire schema: field registry, parsing, validation, canonical files.

A questionnaire is a header (identification of the property and interview)
plus a flat mapping of field codes to values.  Field codes follow the ISA
field catalogue: ``Q*`` for interview fields, ``G*`` for geoprocessing
fields and ``I*`` for indicator component fields.  The registry shipped in
``data/field_registry.json`` is the single source of truth for codes,
kinds, labels and validation bounds.

The canonical on-disk form is a UTF-8 JSON text document with a
``schema_version`` field, sorted keys and a trailing newline, so that
semantically equal questionnaires serialize to identical bytes.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources

from .errors import QuestionnaireParseError, RegistryError

SCHEMA_VERSION = "isa-1"

TRI_LEVELS = ("insufficient", "partial", "sufficient")

_HEADER_STR_KEYS = (
    "property_code",
    "project_id",
    "institution_id",
    "municipality",
    "water_basin",
    "main_income",
    "state",
    "meso_region",
    "micro_region",
)


@dataclass(frozen=True)
class ColumnSpec:
    """One column of a table field."""

    name: str
    kind: str  # "numeric" | "text" | "category"
    allowed: tuple[str, ...] = ()
    min: float | None = None
    max: float | None = None


@dataclass(frozen=True)
class FieldSpec:
    """Registered definition of a single questionnaire field."""

    code: str
    label: str
    kind: str  # "numeric" | "tri_level" | "categorical" | "free_text" | "table"
    section: str
    required: bool
    unit: str = ""
    allowed: tuple[str, ...] = ()
    min: float | None = None
    max: float | None = None
    integer: bool = False
    columns: tuple[ColumnSpec, ...] = ()
    min_rows: int = 0


@dataclass(frozen=True)
class FieldRegistry:
    """Immutable view of the shipped field catalogue."""

    version: str
    fields: dict[str, FieldSpec]

    def __contains__(self, code: str) -> bool:
        return code in self.fields

    def __getitem__(self, code: str) -> FieldSpec:
        return self.fields[code]

    def codes(self) -> tuple[str, ...]:
        return tuple(self.fields)

    def required_codes(self, prefix: str = "") -> tuple[str, ...]:
        return tuple(
            c for c, s in self.fields.items() if s.required and c.startswith(prefix)
        )


@dataclass
class QuestionnaireHeader:
    """Identification block of a questionnaire."""

    property_code: str
    interview_date: _dt.date
    project_id: str = ""
    institution_id: str = ""
    municipality: str = ""
    water_basin: str = ""
    latitude: float | None = None
    longitude: float | None = None
    main_income: str = ""
    state: str = ""
    meso_region: str = ""
    micro_region: str = ""

    @property
    def year(self) -> int:
        return self.interview_date.year


@dataclass
class Questionnaire:
    """A parsed questionnaire: header plus code -> value mapping.

    ``values`` only ever holds registered codes; codes present in a
    document but absent from the registry are preserved verbatim in
    ``extras`` so that unknown fields survive a round trip.
    """

    header: QuestionnaireHeader
    values: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    severity: str  # "error" | "warning"
    message: str


def _load_json_resource(name: str):
    with resources.files("agroisa.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


@lru_cache(maxsize=1)
def load_field_registry() -> FieldRegistry:
    """Load and index the shipped field registry.

    Returns
    -------
    FieldRegistry
        Fields keyed by code, in catalogue order.

    Raises
    ------
    RegistryError
        If the shipped file contains duplicate codes or malformed specs.
    """
    raw = _load_json_resource("field_registry.json")
    fields: dict[str, FieldSpec] = {}
    for entry in raw["fields"]:
        code = entry["code"]
        if code in fields:
            raise RegistryError(f"duplicate field code in registry: {code}")
        kind = entry["kind"]
        if kind not in ("numeric", "tri_level", "categorical", "free_text", "table"):
            raise RegistryError(f"unknown field kind {kind!r} for {code}")
        columns = tuple(
            ColumnSpec(
                name=c["name"],
                kind=c["kind"],
                allowed=tuple(c.get("allowed", ())),
                min=c.get("min"),
                max=c.get("max"),
            )
            for c in entry.get("columns", ())
        )
        if kind == "table" and not columns:
            raise RegistryError(f"table field {code} has no columns")
        if kind == "categorical" and not entry.get("allowed"):
            raise RegistryError(f"categorical field {code} has no allowed values")
        fields[code] = FieldSpec(
            code=code,
            label=entry["label"],
            kind=kind,
            section=entry.get("section", ""),
            required=bool(entry.get("required", False)),
            unit=entry.get("unit", ""),
            allowed=tuple(entry.get("allowed", ())),
            min=entry.get("min"),
            max=entry.get("max"),
            integer=bool(entry.get("integer", False)),
            columns=columns,
            min_rows=int(entry.get("min_rows", 0)),
        )
    return FieldRegistry(version=raw["version"], fields=fields)


def _coerce_number(value, code: str) -> float:
    """Accept int/float or a decimal-comma string; reject everything else."""
    if isinstance(value, bool):
        raise QuestionnaireParseError(f"{code}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(value.replace(".", "").replace(",", ".")) if ("," in value) else float(value)
        except ValueError:
            raise QuestionnaireParseError(f"{code}: cannot read {value!r} as a number") from None
    else:
        raise QuestionnaireParseError(f"{code}: expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise QuestionnaireParseError(f"{code}: non-finite number")
    return out


def _coerce_value(spec: FieldSpec, value):
    code = spec.code
    if spec.kind == "numeric":
        return _coerce_number(value, code)
    if spec.kind in ("tri_level", "categorical", "free_text"):
        if not isinstance(value, str):
            raise QuestionnaireParseError(
                f"{code}: expected a {spec.kind} string, got {type(value).__name__}"
            )
        if spec.kind == "tri_level" and value not in TRI_LEVELS:
            raise QuestionnaireParseError(
                f"{code}: {value!r} is not one of {'/'.join(TRI_LEVELS)}"
            )
        return value
    if spec.kind == "table":
        if not isinstance(value, list):
            raise QuestionnaireParseError(f"{code}: expected a list of rows")
        cols = {c.name: c for c in spec.columns}
        rows = []
        for i, row in enumerate(value):
            if not isinstance(row, dict):
                raise QuestionnaireParseError(f"{code}: row {i} is not an object")
            out = {}
            for name, cell in row.items():
                if name not in cols:
                    raise QuestionnaireParseError(f"{code}: row {i} has unknown column {name!r}")
                col = cols[name]
                if col.kind == "numeric":
                    out[name] = _coerce_number(cell, f"{code}[{i}].{name}")
                else:
                    if not isinstance(cell, str):
                        raise QuestionnaireParseError(
                            f"{code}: row {i} column {name!r} must be text"
                        )
                    out[name] = cell
            rows.append(out)
        return rows
    raise RegistryError(f"unhandled kind {spec.kind}")


def _parse_date(raw, where: str) -> _dt.date:
    if not isinstance(raw, str):
        raise QuestionnaireParseError(f"{where}: expected an ISO date string")
    try:
        return _dt.date.fromisoformat(raw)
    except ValueError:
        raise QuestionnaireParseError(f"{where}: {raw!r} is not a valid ISO date") from None


def parse_questionnaire(text: str) -> Questionnaire:
    """Parse a canonical questionnaire document.

    Parameters
    ----------
    text : str
        UTF-8 JSON document with ``schema_version``, ``header`` and
        ``values`` sections.  Numeric strings using a decimal comma
        (``"3,5"``) are normalized to floats.

    Raises
    ------
    QuestionnaireParseError
        On malformed documents (byte offset attached when available),
        unsupported schema versions, or field-type mismatches.  Unknown
        field codes do *not* raise; they are preserved under ``extras``
        and reported as warnings by :func:`validate`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QuestionnaireParseError(
            f"malformed document at byte offset {exc.pos}: {exc.msg}", offset=exc.pos
        ) from None
    if not isinstance(doc, dict):
        raise QuestionnaireParseError("top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise QuestionnaireParseError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})"
        )
    raw_header = doc.get("header")
    if not isinstance(raw_header, dict):
        raise QuestionnaireParseError("missing header section")
    kwargs = {}
    for key in _HEADER_STR_KEYS:
        raw = raw_header.get(key, "")
        if not isinstance(raw, str):
            raise QuestionnaireParseError(f"header.{key}: expected a string")
        kwargs[key] = raw
    for key in ("latitude", "longitude"):
        raw = raw_header.get(key)
        kwargs[key] = None if raw is None else _coerce_number(raw, f"header.{key}")
    header = QuestionnaireHeader(
        interview_date=_parse_date(raw_header.get("interview_date"), "header.interview_date"),
        **kwargs,
    )

    raw_values = doc.get("values", {})
    if not isinstance(raw_values, dict):
        raise QuestionnaireParseError("values section must be an object")
    registry = load_field_registry()
    values: dict = {}
    extras: dict = {}
    for code, raw in raw_values.items():
        if code in registry:
            values[code] = _coerce_value(registry[code], raw)
        else:
            extras[code] = raw
    return Questionnaire(header=header, values=values, extras=extras)


def _canonical_value(spec: FieldSpec | None, value):
    """Normalize a value for serialization (numerics to float)."""
    if spec is None:
        return value
    if spec.kind == "numeric":
        return float(value)
    if spec.kind == "table":
        cols = {c.name: c for c in spec.columns}
        return [
            {
                name: (float(cell) if cols[name].kind == "numeric" else cell)
                for name, cell in row.items()
            }
            for row in value
        ]
    return value


def serialize_questionnaire(q: Questionnaire) -> str:
    """Serialize to the canonical byte-stable text form.

    Keys are sorted, numeric field values are normalized to floats,
    unknown extras are re-emitted verbatim, and the text ends with a
    newline.  ``parse_questionnaire`` of the result reproduces ``q``
    field for field.
    """
    registry = load_field_registry()
    values = {}
    for code, value in q.values.items():
        spec = registry[code] if code in registry else None
        values[code] = _canonical_value(spec, value)
    values.update(q.extras)
    h = q.header
    doc = {
        "schema_version": SCHEMA_VERSION,
        "header": {
            "property_code": h.property_code,
            "project_id": h.project_id,
            "institution_id": h.institution_id,
            "interview_date": h.interview_date.isoformat(),
            "municipality": h.municipality,
            "water_basin": h.water_basin,
            "latitude": None if h.latitude is None else float(h.latitude),
            "longitude": None if h.longitude is None else float(h.longitude),
            "main_income": h.main_income,
            "state": h.state,
            "meso_region": h.meso_region,
            "micro_region": h.micro_region,
        },
        "values": values,
    }
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check_numeric(issues, code, spec_min, spec_max, integer, value, unit=""):
    suffix = f" {unit}".rstrip()
    if spec_min is not None and value < spec_min:
        issues.append(ValidationIssue(code, "error", f"value {value:g} below minimum {spec_min:g}{suffix}"))
    if spec_max is not None and value > spec_max:
        issues.append(ValidationIssue(code, "error", f"value {value:g} above maximum {spec_max:g}{suffix}"))
    if integer and value != int(value):
        issues.append(ValidationIssue(code, "error", f"value {value:g} must be a whole number"))


def validate(q: Questionnaire) -> list[ValidationIssue]:
    """Check a questionnaire against the registry and header invariants.

    Returns the full list of issues sorted by (code, severity, message);
    an empty list means the questionnaire is valid.  Unknown codes are
    warnings, every other reported problem is an error.
    """
    registry = load_field_registry()
    issues: list[ValidationIssue] = []

    h = q.header
    if not h.property_code:
        issues.append(ValidationIssue("header.property_code", "error", "property code is empty"))
    if h.latitude is not None and not -90.0 <= h.latitude <= 90.0:
        issues.append(ValidationIssue("header.latitude", "error", f"latitude {h.latitude:g} outside [-90, 90]"))
    if h.longitude is not None and not -180.0 <= h.longitude <= 180.0:
        issues.append(ValidationIssue("header.longitude", "error", f"longitude {h.longitude:g} outside [-180, 180]"))

    for code in registry.required_codes():
        if code not in q.values:
            issues.append(ValidationIssue(code, "error", "required field missing"))

    for code, value in q.values.items():
        spec = registry[code]
        if spec.kind == "numeric":
            _check_numeric(issues, code, spec.min, spec.max, spec.integer, value, spec.unit)
        elif spec.kind == "categorical":
            if value not in spec.allowed:
                issues.append(ValidationIssue(code, "error", f"{value!r} not in allowed values {'/'.join(spec.allowed)}"))
        elif spec.kind == "tri_level":
            if value not in TRI_LEVELS:
                issues.append(ValidationIssue(code, "error", f"{value!r} is not one of {'/'.join(TRI_LEVELS)}"))
        elif spec.kind == "table":
            if len(value) < spec.min_rows:
                issues.append(ValidationIssue(code, "error", f"table needs at least {spec.min_rows} row(s)"))
            for i, row in enumerate(value):
                for col in spec.columns:
                    if col.name not in row:
                        continue
                    cell = row[col.name]
                    if col.kind == "numeric":
                        _check_numeric(issues, f"{code}[{i}].{col.name}", col.min, col.max, False, cell)
                    elif col.kind == "category" and cell not in col.allowed:
                        issues.append(ValidationIssue(
                            f"{code}[{i}].{col.name}", "error",
                            f"{cell!r} not in allowed values {'/'.join(col.allowed)}"))

    for code in q.extras:
        issues.append(ValidationIssue(code, "warning", "unknown field code (preserved, not scored)"))

    issues.sort(key=lambda it: (it.code, it.severity, it.message))
    return issues


def is_valid(q: Questionnaire) -> bool:
    """True when validate() reports no errors (warnings are allowed)."""
    return not any(i.severity == "error" for i in validate(q))


def copy_questionnaire(q: Questionnaire) -> Questionnaire:
    """Deep-enough copy for mutation in callers (rows are copied)."""
    values = {
        code: ([dict(r) for r in v] if isinstance(v, list) else v)
        for code, v in q.values.items()
    }
    return Questionnaire(header=replace(q.header), values=values, extras=dict(q.extras))
