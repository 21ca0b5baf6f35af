from expcurate.ingest.enrich import (
    EnrichmentReport,
    EnrichmentRules,
    ReliabilityRule,
    enrich,
    rules_from_params,
    rules_to_params,
)
from expcurate.ingest.geotemporal import (
    GeoTemporalRule,
    Resolution,
    RuleTable,
    default_rule_table,
    load_rule_table,
    resolve_geopoint,
    resolve_geotemporal,
    rules_from_entries,
)
from expcurate.ingest.loader import (
    LoadResult,
    create_dataset,
    load_release,
    prepare_release,
    release_table,
    release_texts,
    release_trace,
    size_bucket,
)
from expcurate.ingest.profile import (
    infer_type,
    profile_column,
    profile_signal,
    profile_table,
    profile_texts,
)
from expcurate.ingest.signal import AXES, SignalTrace, read_xsac, write_xsac
from expcurate.ingest.tabular import (
    DedupeReport,
    StagedTable,
    clean_dedupe,
    extract_tabular,
    payload_to_table,
    table_to_csv,
    table_to_payload,
)

__all__ = [
    "AXES",
    "DedupeReport",
    "EnrichmentReport",
    "EnrichmentRules",
    "GeoTemporalRule",
    "LoadResult",
    "ReliabilityRule",
    "Resolution",
    "RuleTable",
    "SignalTrace",
    "StagedTable",
    "clean_dedupe",
    "create_dataset",
    "default_rule_table",
    "enrich",
    "extract_tabular",
    "infer_type",
    "load_release",
    "load_rule_table",
    "payload_to_table",
    "prepare_release",
    "profile_column",
    "profile_signal",
    "profile_table",
    "profile_texts",
    "read_xsac",
    "release_table",
    "release_texts",
    "release_trace",
    "resolve_geopoint",
    "resolve_geotemporal",
    "rules_from_entries",
    "rules_from_params",
    "rules_to_params",
    "size_bucket",
    "table_to_csv",
    "table_to_payload",
    "write_xsac",
]
