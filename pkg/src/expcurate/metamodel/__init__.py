from expcurate.metamodel.encoding import (
    canonical_encode,
    content_hash,
    decode_canonical,
    format_decimal,
    format_timestamp,
    new_id,
    parse_timestamp,
    utc_now,
)
from expcurate.metamodel.lineage import LineageGraph, build_lineage, lineage_ancestors
from expcurate.metamodel.types import (
    Action,
    Annotation,
    Artefact,
    CatalogueAssignment,
    ColumnProfile,
    Dataset,
    Experiment,
    ExperimentSettings,
    Item,
    Member,
    Pipeline,
    PipelineStep,
    Profile,
    Provenance,
    Release,
    RunRecord,
    StepRecord,
    Tag,
    ValidationRecord,
    record_from_body,
    validate_entity,
)

__all__ = [
    "Action",
    "Annotation",
    "Artefact",
    "CatalogueAssignment",
    "ColumnProfile",
    "Dataset",
    "Experiment",
    "ExperimentSettings",
    "Item",
    "LineageGraph",
    "Member",
    "Pipeline",
    "PipelineStep",
    "Profile",
    "Provenance",
    "Release",
    "RunRecord",
    "StepRecord",
    "Tag",
    "ValidationRecord",
    "build_lineage",
    "canonical_encode",
    "content_hash",
    "decode_canonical",
    "format_decimal",
    "format_timestamp",
    "lineage_ancestors",
    "new_id",
    "parse_timestamp",
    "record_from_body",
    "utc_now",
    "validate_entity",
]
