"""Record filtering over questionnaire header fields.

All criteria are optional; an empty :class:`FilterCriteria` matches
everything.  Set-valued criteria (municipalities, water basins) match if
the record's value is any member; the criteria themselves combine
conjunctively.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..indicators import ScoredRecord
from ..qschema import Questionnaire, QuestionnaireHeader


@dataclass(frozen=True)
class FilterCriteria:
    project: str | None = None
    year: int | None = None
    main_income: str | None = None
    state: str | None = None
    meso_region: str | None = None
    micro_region: str | None = None
    municipalities: frozenset[str] | None = None
    water_basins: frozenset[str] | None = None

    def matches(self, header: QuestionnaireHeader) -> bool:
        if self.project is not None and header.project_id != self.project:
            return False
        if self.year is not None and header.interview_date.year != self.year:
            return False
        if self.main_income is not None and header.main_income != self.main_income:
            return False
        if self.state is not None and header.state != self.state:
            return False
        if self.meso_region is not None and header.meso_region != self.meso_region:
            return False
        if self.micro_region is not None and header.micro_region != self.micro_region:
            return False
        if self.municipalities is not None and header.municipality not in self.municipalities:
            return False
        if self.water_basins is not None and header.water_basin not in self.water_basins:
            return False
        return True


def _header(record) -> QuestionnaireHeader:
    if isinstance(record, ScoredRecord):
        return record.questionnaire.header
    if isinstance(record, Questionnaire):
        return record.header
    return record.header  # anything header-shaped


def filter_records(records, criteria: FilterCriteria) -> list:
    """The records matching all set criteria, ordered by (property, year)."""
    kept = [r for r in records if criteria.matches(_header(r))]
    kept.sort(key=lambda r: (_header(r).property_code, _header(r).interview_date))
    return kept
