"""Agroecosystem sustainability assessment toolkit.

Scores ISA questionnaires (21 indicators, 7 sub-indexes, sustainability
index), builds learning datasets from them, runs feature selection and a
set of from-scratch classifiers under stratified cross-validation, and
emits report/chart data with rendered figures.
"""

__version__ = "0.1.0"

from .indicators import (  # noqa: F401
    SUSTAINABILITY_LIMIT,
    IndicatorVector,
    SubIndexVector,
    SustainabilityScore,
    categorize,
    compute_indicator_vector,
    compute_si,
    compute_subindexes,
    score_record,
)
from .qschema import (  # noqa: F401
    FieldRegistry,
    Questionnaire,
    QuestionnaireHeader,
    ValidationIssue,
    load_field_registry,
    parse_questionnaire,
    serialize_questionnaire,
    validate,
)
