"""Directory-backed questionnaire store with adequation plans.

Layout::

    <root>/index                      one "property_code<TAB>year" line per entry
    <root>/<property_code>/<year>.isa canonical questionnaire document
    <root>/<property_code>/<year>.plan adequation plan (JSON), if attached

Every write lands through a temporary file in the destination directory
followed by :func:`os.replace`, so readers never observe a partial file
and concurrent writers follow last-writer-wins semantics.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..errors import StoreError
from ..qschema import Questionnaire, parse_questionnaire, serialize_questionnaire

_PLAN_VERSION = 1


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True, order=True)
class RecordRef:
    """Identity of one stored questionnaire: property and survey year."""

    property_code: str
    year: int


@dataclass(frozen=True)
class AdequationPlan:
    """Per-indicator recommendations a technician attaches to a property.

    ``recommendations`` holds one free-text slot per indicator (21); empty
    strings mean "no action needed".
    """

    ref: RecordRef
    recommendations: tuple[str, ...]
    author: str
    date: str  # ISO date

    def __post_init__(self):
        if len(self.recommendations) != 21:
            raise StoreError(
                f"a plan needs 21 recommendation slots, got {len(self.recommendations)}"
            )


def ref_of(q: Questionnaire) -> RecordRef:
    return RecordRef(q.header.property_code, q.header.interview_date.year)


class QuestionnaireStore:
    """Filesystem store for questionnaires and their adequation plans."""

    def __init__(self, root):
        self.root = Path(root)

    # -- paths -----------------------------------------------------------
    def _record_path(self, ref: RecordRef) -> Path:
        return self.root / ref.property_code / f"{ref.year}.isa"

    def _plan_path(self, ref: RecordRef) -> Path:
        return self.root / ref.property_code / f"{ref.year}.plan"

    # -- questionnaires ---------------------------------------------------
    def put(self, q: Questionnaire) -> RecordRef:
        """Write a questionnaire (replacing any previous version)."""
        ref = ref_of(q)
        _atomic_write(self._record_path(ref), serialize_questionnaire(q))
        refs = set(self.refs())
        refs.add(ref)
        self._write_index(refs)
        return ref

    def get(self, property_code: str, year: int) -> Questionnaire:
        ref = RecordRef(property_code, int(year))
        path = self._record_path(ref)
        if not path.exists():
            raise StoreError(f"no questionnaire for {property_code}/{year}")
        return parse_questionnaire(path.read_text(encoding="utf-8"))

    def refs(self) -> list[RecordRef]:
        """All stored references, sorted by (property_code, year)."""
        index = self.root / "index"
        if not index.exists():
            return []
        out = []
        for line in index.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            code, _, year = line.partition("\t")
            out.append(RecordRef(code, int(year)))
        return sorted(out)

    def load_all(self) -> list[Questionnaire]:
        return [self.get(r.property_code, r.year) for r in self.refs()]

    def _write_index(self, refs) -> None:
        lines = [f"{r.property_code}\t{r.year}" for r in sorted(refs)]
        _atomic_write(self.root / "index", "\n".join(lines) + ("\n" if lines else ""))

    def rebuild_index(self) -> int:
        """Regenerate the index from the files on disk; returns the count."""
        refs = []
        if self.root.exists():
            for record in sorted(self.root.glob("*/*.isa")):
                refs.append(RecordRef(record.parent.name, int(record.stem)))
        self._write_index(refs)
        return len(refs)

    # -- adequation plans --------------------------------------------------
    def attach_plan(self, plan: AdequationPlan) -> None:
        """Attach (or replace) the plan for its referenced questionnaire."""
        if not self._record_path(plan.ref).exists():
            raise StoreError(
                f"cannot attach a plan: no questionnaire for "
                f"{plan.ref.property_code}/{plan.ref.year}"
            )
        doc = {
            "version": _PLAN_VERSION,
            "property_code": plan.ref.property_code,
            "year": plan.ref.year,
            "author": plan.author,
            "date": plan.date,
            "recommendations": list(plan.recommendations),
        }
        _atomic_write(self._plan_path(plan.ref),
                      json.dumps(doc, ensure_ascii=False, indent=1) + "\n")

    def read_plan(self, property_code: str, year: int) -> AdequationPlan:
        ref = RecordRef(property_code, int(year))
        path = self._plan_path(ref)
        if not path.exists():
            raise StoreError(f"no adequation plan for {property_code}/{year}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return AdequationPlan(
            ref=RecordRef(doc["property_code"], int(doc["year"])),
            recommendations=tuple(doc["recommendations"]),
            author=doc["author"],
            date=doc["date"],
        )
