"""Data models for catamp."""

from src.models.data import (
    CheckResult,
    ExperimentConfig,
    GainParam,
    Mode,
    PostSelectKind,
    PostSelectMode,
    Quadrature,
    QuadratureSpec,
    SignalMoments,
    Stage,
    ValidationReport,
    VarianceComparison,
    VisibilityResult,
    WhichPathReport,
)

__all__ = [
    "GainParam",
    "QuadratureSpec",
    "Mode",
    "Quadrature",
    "Stage",
    "PostSelectKind",
    "PostSelectMode",
    "ExperimentConfig",
    "VisibilityResult",
    "WhichPathReport",
    "SignalMoments",
    "VarianceComparison",
    "CheckResult",
    "ValidationReport",
]
