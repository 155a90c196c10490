"""Sprint test-quality metrics: PCL, TAR and the Product Backlog Rating."""

from pbr.metrics import (
    InterpretationBand,
    ItemMetrics,
    SprintMetrics,
    compare_teams,
    compute_pbr,
    compute_pcl,
    compute_tar,
    interpret,
    trend,
    truncate2,
)
from pbr.model import (
    FactorCatalog,
    FactorDefinition,
    FactorKind,
    PblItem,
    PclScore,
    Sprint,
    TarScore,
    Task,
    TaskEvent,
    TaskStatus,
    Team,
    default_catalog,
    validate_item,
    validate_sprint,
)

__all__ = [
    "FactorCatalog", "FactorDefinition", "FactorKind", "InterpretationBand", "ItemMetrics",
    "PblItem", "PclScore", "Sprint", "SprintMetrics", "TarScore", "Task", "TaskEvent",
    "TaskStatus", "Team", "compare_teams", "compute_pbr", "compute_pcl", "compute_tar",
    "default_catalog", "interpret", "trend", "truncate2", "validate_item", "validate_sprint",
]
