"""Test case aging analysis for Creation-Execution-Outcome test logs."""

from .ceo import (
    CeoDataset,
    CeoError,
    CreationRecord,
    DatasetError,
    ExecutionRecord,
    InferMode,
    Outcome,
    OutcomeMapPolicy,
    RowError,
    filter_allfail_sessions,
    infer_creations,
    load_dataset,
    map_outcomes,
    parse_creations,
    parse_executions,
    validate_dataset,
)
from .curves import (
    RatePoint,
    RateSeries,
    activation_series,
    apply_min_support,
    hazard_series,
    wallclock_series,
    yearly_failure_rates,
)
from .lifespan import (
    AlivenessSummary,
    LifeSpan,
    age_at,
    age_distribution,
    aliveness_summary,
    determine_death,
    growth_curve,
)
from .regfit import (
    FitError,
    FitModel,
    HalfLife,
    fit_exponential,
    fit_polynomial,
    fit_report,
    half_life,
    predict,
)
from .smoothing import SmoothConfig, SmoothedCurve, smooth
from .synth import GroundTruth, SynthProfile, generate

__version__ = "0.1.0"

__all__ = [
    "activation_series",
    "age_at",
    "age_distribution",
    "aliveness_summary",
    "AlivenessSummary",
    "apply_min_support",
    "CeoDataset",
    "CeoError",
    "CreationRecord",
    "DatasetError",
    "determine_death",
    "ExecutionRecord",
    "filter_allfail_sessions",
    "fit_exponential",
    "fit_polynomial",
    "fit_report",
    "FitError",
    "FitModel",
    "generate",
    "GroundTruth",
    "growth_curve",
    "half_life",
    "HalfLife",
    "hazard_series",
    "infer_creations",
    "InferMode",
    "LifeSpan",
    "load_dataset",
    "map_outcomes",
    "Outcome",
    "OutcomeMapPolicy",
    "parse_creations",
    "parse_executions",
    "predict",
    "RatePoint",
    "RateSeries",
    "RowError",
    "smooth",
    "SmoothConfig",
    "SmoothedCurve",
    "SynthProfile",
    "validate_dataset",
    "wallclock_series",
    "yearly_failure_rates",
]
