"""Simulation and evaluation toolkit for cyclic (feedback-augmented) delay-based PUFs."""

from .core import (
    EnvCondition,
    NOMINAL,
    PufCategory,
    PufInstance,
    VariationModel,
    eval_acyclic,
    eval_batch,
    sample_instance,
)
from .cyclic import (
    Crm,
    FeedbackConfig,
    ModeKind,
    ResponseMode,
    Trajectory,
    classify_mode,
    collect_crm,
    effective_challenge,
    simulate_trajectory,
)
from .errors import ConfigError, UsageError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Crm",
    "EnvCondition",
    "FeedbackConfig",
    "ModeKind",
    "NOMINAL",
    "PufCategory",
    "PufInstance",
    "ResponseMode",
    "Trajectory",
    "UsageError",
    "VariationModel",
    "classify_mode",
    "collect_crm",
    "effective_challenge",
    "eval_acyclic",
    "eval_batch",
    "sample_instance",
    "simulate_trajectory",
]
