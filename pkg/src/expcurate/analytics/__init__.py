from expcurate.analytics.agreement import AgreementResult, agreement, pair_label_vectors
from expcurate.analytics.bulletin import (
    BULLETIN_STRUCTURE,
    BulletinResult,
    compile_bulletin,
    experiment_events,
)
from expcurate.analytics.cluster import KMeansResult, agglomerative, kmeans
from expcurate.analytics.export import export_results
from expcurate.analytics.filters import (
    ItemView,
    parse_filter,
    query_items,
    scope_item_views,
)
from expcurate.analytics.histogram import (
    DEFAULT_EDGES,
    REVIEW_THRESHOLD,
    ConfidenceHistogram,
    confidence_histogram,
)
from expcurate.analytics.seismic import (
    DEFAULT_VP_KM_S,
    DEFAULT_VS_KM_S,
    EpicenterSolution,
    EventResult,
    PhasePick,
    forward_model_picks,
    locate_epicenter,
    record_event,
    sp_distance_km,
    sta_lta_detect,
)
from expcurate.analytics.stats import (
    CorrelationResult,
    DescribeResult,
    aggregate,
    correlate,
    describe,
    zscore_anomalies,
)
from expcurate.analytics.tables import ResultTable

__all__ = [
    "AgreementResult",
    "BULLETIN_STRUCTURE",
    "BulletinResult",
    "ConfidenceHistogram",
    "CorrelationResult",
    "DEFAULT_EDGES",
    "DEFAULT_VP_KM_S",
    "DEFAULT_VS_KM_S",
    "DescribeResult",
    "EpicenterSolution",
    "EventResult",
    "ItemView",
    "KMeansResult",
    "PhasePick",
    "REVIEW_THRESHOLD",
    "ResultTable",
    "agglomerative",
    "aggregate",
    "agreement",
    "compile_bulletin",
    "confidence_histogram",
    "correlate",
    "describe",
    "experiment_events",
    "export_results",
    "forward_model_picks",
    "kmeans",
    "locate_epicenter",
    "pair_label_vectors",
    "parse_filter",
    "query_items",
    "record_event",
    "scope_item_views",
    "sp_distance_km",
    "sta_lta_detect",
    "zscore_anomalies",
]
