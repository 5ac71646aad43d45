"""Data models for catamp.

This module defines the value types shared by the engines, the experiment
pipeline and the command line: amplifier gain, quadrature selectors, the
description of one interferometer run, and the result records that the
sweeps and the validation suite produce.

All result records support serialization to dictionaries and JSON so the
command line can write them as summaries without extra glue. Complex numbers
are serialized as ``[re, im]`` pairs.

Classes:
    Mode: Optical mode of the amplifier (signal or idler).
    Quadrature: Quadrature selector (x or p).
    Stage: Point in the interferometer at which a state is inspected.
    PostSelectKind: How the analyzer output is post-selected.
    GainParam: Amplifier gain g and its squeeze parameter r.
    QuadratureSpec: Mode plus quadrature.
    PostSelectMode: Post-selection kind plus homodyne threshold.
    ExperimentConfig: Full description of one interferometer run.
    VisibilityResult: Theta sweep of the post-selection probability.
    WhichPathReport: Idler displacement versus branch overlap.
    SignalMoments: Signal moments of the post-selected state.
    VarianceComparison: Naive versus exact post-selected variance.
    CheckResult: Outcome of one validation check.
    ValidationReport: Outcome of a validation run.

Example:
    >>> from src.models.data import ExperimentConfig, GainParam
    >>>
    >>> config = ExperimentConfig(alpha0=2.0, gain=GainParam.from_gain(1.1))
    >>> config.resolved_dims()
    (47, 47)
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

# Cat components closer than this are not treated as orthogonal.
CAT_OVERLAP_LIMIT = 1e-6


class Mode(Enum):
    """Optical mode of the two-mode amplifier."""

    SIGNAL = "signal"
    IDLER = "idler"


class Quadrature(Enum):
    """Quadrature selector.

    Attributes:
        X: x = (a + a†)/√2, called q on the idler.
        P: p = (a − a†)/(√2 i), called π on the idler.
    """

    X = "x"
    P = "p"


class Stage(Enum):
    """Point in the interferometer at which a state is inspected."""

    PREP = "prep"
    POST_AMPLIFIER = "post_amplifier"
    POST_ANALYZER = "post_analyzer"


class PostSelectKind(Enum):
    """Post-selection applied after the analyzer.

    Attributes:
        BRANCH_DROP: Keep only the two branches whose phase shifts cancel.
        HOMODYNE_WINDOW: Keep the events whose signal x lies above a threshold.
    """

    BRANCH_DROP = "branch_drop"
    HOMODYNE_WINDOW = "homodyne_window"


def _complex_pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def default_dims(alpha0: complex, g: float) -> tuple[int, int]:
    """Truncation per mode for an amplified coherent amplitude.

    N = ceil(|gα₀|² + 8|gα₀| + 20 + 20(g² − 1)) for both modes. The last
    term covers the thermal spread the amplifier adds to each mode.
    """
    amplitude = abs(g * alpha0)
    n = math.ceil(amplitude * amplitude + 8.0 * amplitude + 20.0 + 20.0 * (g * g - 1.0))
    return n, n


@dataclass(frozen=True)
class GainParam:
    """Amplifier gain.

    The voltage gain g and the squeeze parameter r are tied by g = cosh r.
    Build instances with :meth:`from_gain` or :meth:`from_squeeze` so the
    two always agree to machine precision.

    Attributes:
        g: Voltage gain, at least 1.
        r: Squeeze parameter, at least 0.
    """

    g: float
    r: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.g) and math.isfinite(self.r)):
            raise ValueError(f"gain must be finite (got g={self.g}, r={self.r})")
        if self.g < 1.0:
            raise ValueError(f"g must be ≥ 1 (got {self.g})")
        if self.r < 0.0:
            raise ValueError(f"r must be ≥ 0 (got {self.r})")

    @classmethod
    def from_gain(cls, g: float) -> "GainParam":
        """Create from the voltage gain g ≥ 1."""
        g = float(g)
        if not g >= 1.0:
            raise ValueError(f"g must be ≥ 1 (got {g})")
        return cls(g=g, r=math.acosh(g))

    @classmethod
    def from_squeeze(cls, r: float) -> "GainParam":
        """Create from the squeeze parameter r ≥ 0."""
        r = float(r)
        if not r >= 0.0:
            raise ValueError(f"r must be ≥ 0 (got {r})")
        return cls(g=math.cosh(r), r=r)

    @property
    def coupling(self) -> float:
        """√(g² − 1), equal to sinh r."""
        return math.sinh(self.r)

    @property
    def transmission(self) -> float:
        """√(g² − 1)/g, equal to tanh r."""
        return math.tanh(self.r)

    @property
    def epsilon(self) -> float:
        """Excess gain ε = g − 1."""
        return self.g - 1.0

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {"g": self.g, "r": self.r}


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature of one mode.

    Under the x = (a + a†)/√2 convention the vacuum second moment of every
    quadrature is 1/2.
    """

    mode: Mode = Mode.SIGNAL
    which: Quadrature = Quadrature.X


@dataclass(frozen=True)
class PostSelectMode:
    """Post-selection mode with its homodyne threshold.

    The threshold is only meaningful for ``HOMODYNE_WINDOW``; events with
    signal x above it are accepted.
    """

    kind: PostSelectKind = PostSelectKind.BRANCH_DROP
    threshold: float = 0.0

    @classmethod
    def branch_drop(cls) -> "PostSelectMode":
        return cls(PostSelectKind.BRANCH_DROP)

    @classmethod
    def homodyne_window(cls, threshold: float = 0.0) -> "PostSelectMode":
        return cls(PostSelectKind.HOMODYNE_WINDOW, float(threshold))

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        data: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is PostSelectKind.HOMODYNE_WINDOW:
            data["threshold"] = self.threshold
        return data


@dataclass(frozen=True)
class ExperimentConfig:
    """Description of one interferometer run.

    The input coherent amplitude α₀ is split into the cat components
    e^{±iφ}α₀ by the conditional phase shift, amplified with gain g, and
    recombined by the analyzer with interferometer phase θ.

    Attributes:
        alpha0: Input coherent amplitude.
        phi: Conditional phase shift in radians.
        theta: Analyzer interferometer phase in radians.
        gain: Amplifier gain.
        dims: Truncation (signal, idler); None selects :func:`default_dims`.
        postselect_mode: Post-selection applied after the analyzer.
        normalize_outputs: Report moments of the renormalized post-selected state.
    """

    alpha0: complex = 1.0 + 0.0j
    phi: float = math.pi / 2
    theta: float = 0.0
    gain: GainParam = field(default_factory=lambda: GainParam.from_gain(1.0))
    dims: tuple[int, int] | None = None
    postselect_mode: PostSelectMode = field(default_factory=PostSelectMode.branch_drop)
    normalize_outputs: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        if self.dims is not None:
            object.__setattr__(self, "dims", (int(self.dims[0]), int(self.dims[1])))
        self.validate()

    def validate(self) -> None:
        """Validate the configuration.

        Raises:
            ValueError: If any value is non-finite or out of range.
        """
        alpha = self.alpha0
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
            raise ValueError(f"alpha0 must be finite (got {alpha})")
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite (got {self.phi})")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite (got {self.theta})")
        if self.dims is not None and min(self.dims) < 1:
            raise ValueError(f"dims must be positive (got {self.dims})")
        if not math.isfinite(self.postselect_mode.threshold):
            raise ValueError("threshold must be finite")

    @property
    def alpha0_magnitude(self) -> float:
        return abs(self.alpha0)

    def resolved_dims(self) -> tuple[int, int]:
        """Return the configured dims or the default sizing for this gain."""
        if self.dims is not None:
            return self.dims
        return default_dims(self.alpha0, self.gain.g)

    def cat_overlap(self) -> float:
        """Modulus of ⟨e^{iφ}α₀|e^{−iφ}α₀⟩ = exp(−2|α₀|² sin²φ)."""
        return math.exp(-2.0 * abs(self.alpha0) ** 2 * math.sin(self.phi) ** 2)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "alpha0": _complex_pair(self.alpha0),
            "phi": self.phi,
            "theta": self.theta,
            "g": self.gain.g,
            "dims": list(self.resolved_dims()),
            "mode": self.postselect_mode.to_dict(),
            "normalize_outputs": self.normalize_outputs,
        }


@dataclass
class VisibilityResult:
    """Theta sweep of the post-selection probability.

    ``visibility`` is (p_max − p_min)/(p_max + p_min), or 0 when both are 0.
    ``reference_visibility`` is the closed-form value for the same gain,
    amplitude and phase.
    """

    samples: list[tuple[float, float]]
    p_max: float
    p_min: float
    visibility: float
    reference_visibility: float
    mode: PostSelectMode

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "samples": [[theta, p] for theta, p in self.samples],
            "p_max": self.p_max,
            "p_min": self.p_min,
            "visibility": self.visibility,
            "reference_visibility": self.reference_visibility,
            "mode": self.mode.to_dict(),
        }

    def to_json(self) -> str:
        """Serialize to JSON string."""
        return json.dumps(self.to_dict())


@dataclass
class WhichPathReport:
    """Which-path information carried by the idler.

    Attributes:
        idler_displacement: √(g² − 1)|α₀|, separation imprinted on the idler.
        branch_overlap: |⟨b₁|b₂⟩| of the two accepted branches.
        signal_shift: (g − 1)|α₀|, change of the signal amplitude.
    """

    idler_displacement: float
    branch_overlap: float
    signal_shift: float

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "idler_displacement": self.idler_displacement,
            "branch_overlap": self.branch_overlap,
            "signal_shift": self.signal_shift,
        }


@dataclass
class SignalMoments:
    """Signal moments of the post-selected state at one analyzer phase.

    With ``normalized`` the moments are those of the renormalized state and
    ``variance_x`` is set; otherwise they are ⟨ψ|·|ψ⟩ of the unnormalized
    amplitude, whose squared norm is the acceptance probability.
    """

    theta: float
    norm_squared: float
    mean_x: float
    second_x: float
    photon_number: float
    normalized: bool
    variance_x: float | None = None

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "theta": self.theta,
            "norm_squared": self.norm_squared,
            "mean_x": self.mean_x,
            "second_x": self.second_x,
            "photon_number": self.photon_number,
            "normalized": self.normalized,
            "variance_x": self.variance_x,
        }


@dataclass
class VarianceComparison:
    """Naive and exact post-selected signal variance over theta.

    Theta values whose post-selected state has zero norm are left out of
    every list.
    """

    theta_samples: list[float]
    naive_variance: list[float]
    exact_variance: list[float]
    naive_modulation_ratio: float
    exact_modulation_ratio: float
    disagreement: bool = False

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "theta_samples": list(self.theta_samples),
            "naive_variance": list(self.naive_variance),
            "exact_variance": list(self.exact_variance),
            "naive_modulation_ratio": self.naive_modulation_ratio,
            "exact_modulation_ratio": self.exact_modulation_ratio,
            "disagreement": self.disagreement,
        }

    def to_json(self) -> str:
        """Serialize to JSON string."""
        return json.dumps(self.to_dict())


@dataclass
class CheckResult:
    """Outcome of one validation check."""

    name: str
    description: str
    passed: bool
    measured: float
    limit: float
    seconds: float = 0.0
    detail: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "name": self.name,
            "description": self.description,
            "status": self.status,
            "measured": self.measured,
            "limit": self.limit,
            "seconds": self.seconds,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    """Outcome of a validation run."""

    checks: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "all_passed": self.all_passed,
            "checks": [check.to_dict() for check in self.checks],
        }

    def to_json(self) -> str:
        """Serialize to JSON string."""
        return json.dumps(self.to_dict(), indent=2)
