"""Filtering, aggregation, chart data, and the questionnaire store."""

from .aggregate import MONETARY_ITEMS, AggregateReport, BoxStats, aggregate
from .charts import (
    RADAR_VIEWS,
    AreaTreeData,
    RadarData,
    SankeyGraph,
    SankeyLink,
    SankeyNode,
    ScatterData,
    area_tree_data,
    cfs_bar_data,
    default_stopwords,
    radar_data,
    sankey_from_rules,
    scatter_data,
    word_frequencies,
)
from .documents import BUNDLE_VERSION, property_report, write_report_bundle
from .filters import FilterCriteria, filter_records
from .store import AdequationPlan, QuestionnaireStore, RecordRef, ref_of

__all__ = [
    "MONETARY_ITEMS",
    "AggregateReport",
    "BoxStats",
    "aggregate",
    "RADAR_VIEWS",
    "AreaTreeData",
    "RadarData",
    "SankeyGraph",
    "SankeyLink",
    "SankeyNode",
    "ScatterData",
    "area_tree_data",
    "cfs_bar_data",
    "default_stopwords",
    "radar_data",
    "sankey_from_rules",
    "scatter_data",
    "word_frequencies",
    "BUNDLE_VERSION",
    "property_report",
    "write_report_bundle",
    "FilterCriteria",
    "filter_records",
    "AdequationPlan",
    "QuestionnaireStore",
    "RecordRef",
    "ref_of",
]
