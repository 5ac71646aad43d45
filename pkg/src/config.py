"""Run configuration for catamp.

A :class:`RunSpec` is filled in three layers: dataclass defaults, then an
optional ``--config`` file of ``key = value`` lines, then command-line flags.
Values that depend on the subcommand (amplitude, phase, sweep size) are
resolved after all layers are applied, and every value is validated before
any computation starts.

Keys are the long flag names without dashes; ``-`` and ``_`` are
interchangeable. Complex values are written ``re,im``; angles are radians or
multiples of ``pi`` such as ``pi/2``, ``3pi/4`` or ``-pi/4``.
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import structlog

from src.models.data import (
    ExperimentConfig,
    GainParam,
    PostSelectKind,
    PostSelectMode,
    Stage,
)

logger = structlog.get_logger(__name__)

CHECK_NAMES = ("eq5", "eq23", "oracle", "tmsv", "eq26", "eq3", "eq33", "engines", "modes")

MIN_DIM = 4
MIN_GRID = 2
MIN_VISIBILITY_STEPS = 32


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing."""

    pass


class Subcommand(Enum):
    VALIDATE = "validate"
    VISIBILITY = "visibility"
    QGRID = "qgrid"
    VARIANCE = "variance"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class InputState(Enum):
    """Input state of a Q grid: the prepared cat or the bare coherent state."""

    CAT = "cat"
    COHERENT = "coherent"


_ANGLE_PATTERN = re.compile(
    r"^(?P<sign>[+-]?)\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?"
    r"\s*\*?\s*pi\s*(?:/\s*(?P<div>\d+(?:\.\d*)?))?$"
)


def parse_float(value: str) -> float:
    number = float(value.strip())
    if not math.isfinite(number):
        raise ValueError(f"not a finite number: {value!r}")
    return number


def parse_complex(value: str) -> complex:
    """Parse ``re,im`` (or a bare real part) into a complex number."""
    parts = [part.strip() for part in value.split(",")]
    if len(parts) == 1:
        return complex(parse_float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {value!r}")
    return complex(parse_float(parts[0]), parse_float(parts[1]))


def parse_angle(value: str) -> float:
    """Parse radians or a multiple of pi (``pi``, ``pi/2``, ``3pi/4``, ``-pi/4``)."""
    text = value.strip().lower()
    match = _ANGLE_PATTERN.match(text)
    if match is None:
        return parse_float(text)
    coefficient = float(match["coef"]) if match["coef"] else 1.0
    divisor = float(match["div"]) if match["div"] else 1.0
    if divisor == 0.0:
        raise ValueError(f"division by zero in angle {value!r}")
    angle = coefficient * math.pi / divisor
    return -angle if match["sign"] == "-" else angle


def parse_int(value: str) -> int:
    return int(value.strip())


def parse_int_pair(value: str) -> tuple[int, int]:
    """Parse ``N`` or ``N1,N2``."""
    parts = [part.strip() for part in value.split(",")]
    if len(parts) == 1:
        n = int(parts[0])
        return n, n
    if len(parts) != 2:
        raise ValueError(f"expected 'N' or 'N1,N2', got {value!r}")
    return int(parts[0]), int(parts[1])


def parse_range(value: str) -> tuple[float, float]:
    """Parse ``lo,hi``."""
    parts = [part.strip() for part in value.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'lo,hi', got {value!r}")
    return parse_float(parts[0]), parse_float(parts[1])


def parse_bool(value: str) -> bool:
    return value.strip().lower() in ("true", "1", "yes", "on")


def parse_names(value: str) -> tuple[str, ...]:
    return tuple(name.strip() for name in value.split(",") if name.strip())


def normalize_key(key: str) -> str:
    return key.strip().lower().lstrip("-").replace("_", "-")


# key -> (attribute, converter)
KEY_MAPPINGS: dict[str, tuple[str, Any]] = {
    "g": ("g", parse_float),
    "alpha0": ("alpha0", parse_complex),
    "phi": ("phi", parse_angle),
    "theta": ("theta", parse_angle),
    "theta-steps": ("theta_steps", parse_int),
    "mode": ("mode", PostSelectKind),
    "dims": ("dims", parse_int_pair),
    "threshold": ("threshold", parse_float),
    "out": ("out", Path),
    "format": ("output_format", OutputFormat),
    "stage": ("stage", Stage),
    "input": ("input_state", InputState),
    "grid": ("grid", parse_int_pair),
    "re-range": ("re_range", parse_range),
    "im-range": ("im_range", parse_range),
    "only": ("only", parse_names),
    "metrics-out": ("metrics_out", Path),
    "normalize": ("normalize_outputs", parse_bool),
    "verbose": ("verbose", parse_bool),
}

# Defaults that depend on the subcommand, applied when no layer set them.
SUBCOMMAND_DEFAULTS: dict[Subcommand, dict[str, Any]] = {
    Subcommand.VALIDATE: {"alpha0": 1.0 + 0.0j, "phi": math.pi / 2, "theta_steps": 64},
    Subcommand.VISIBILITY: {"alpha0": 1.0 + 0.0j, "phi": math.pi / 2, "theta_steps": 64},
    Subcommand.QGRID: {"alpha0": 1.0 + 0.0j, "phi": math.pi / 2, "theta_steps": 64},
    Subcommand.VARIANCE: {"alpha0": 4.0j, "phi": math.pi / 4, "theta_steps": 16},
}


@dataclass
class RunSpec:
    """One command-line run.

    Fields left as None are resolved per subcommand by :meth:`resolve`.
    """

    subcommand: Subcommand = Subcommand.VALIDATE
    g: float = 1.0
    alpha0: complex | None = None
    phi: float | None = None
    theta: float = 0.0
    theta_steps: int | None = None
    mode: PostSelectKind = PostSelectKind.BRANCH_DROP
    threshold: float = 0.0
    dims: tuple[int, int] | None = None
    out: Path | None = None
    output_format: OutputFormat = OutputFormat.CSV
    stage: Stage = Stage.POST_AMPLIFIER
    input_state: InputState = InputState.CAT
    grid: tuple[int, int] = (41, 41)
    re_range: tuple[float, float] | None = None
    im_range: tuple[float, float] | None = None
    only: tuple[str, ...] = ()
    metrics_out: Path | None = None
    normalize_outputs: bool = False
    verbose: bool = False
    sources: list[str] = field(default_factory=list, repr=False)

    def apply(self, values: dict[str, str], source: str) -> None:
        """Apply raw ``key -> value`` strings from one configuration layer.

        Raises:
            ConfigurationError: On an unknown key or an unparsable value.
        """
        for raw_key, value in values.items():
            key = normalize_key(raw_key)
            if key not in KEY_MAPPINGS:
                raise ConfigurationError(f"Unknown key '{raw_key}' in {source}")
            attr, converter = KEY_MAPPINGS[key]
            try:
                setattr(self, attr, converter(value))
            except (ValueError, TypeError) as e:
                raise ConfigurationError(
                    f"Invalid value for {key}: {value!r} ({source}). Error: {e}"
                ) from e
        self.sources.append(source)

    def load_file(self, path: Path) -> None:
        """Apply a ``key = value`` file; ``#`` starts a comment."""
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
        values: dict[str, str] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            if "=" not in content:
                raise ConfigurationError(f"{path}:{number}: expected 'key = value'")
            key, value = (part.strip() for part in content.split("=", 1))
            values[key] = value
        self.apply(values, str(path))

    def resolve(self) -> None:
        """Fill subcommand-dependent defaults."""
        for attr, default in SUBCOMMAND_DEFAULTS[self.subcommand].items():
            if getattr(self, attr) is None:
                setattr(self, attr, default)
        extent = self.g * abs(self.alpha0) + 4.0
        if self.re_range is None:
            self.re_range = (-extent, extent)
        if self.im_range is None:
            self.im_range = (-extent, extent)

    def validate(self) -> None:
        """Validate all values.

        Raises:
            ConfigurationError: If any value is out of range.
        """
        errors: list[str] = []

        if not (math.isfinite(self.g) and self.g >= 1.0):
            errors.append(f"g must be ≥ 1 (got {self.g})")
        if self.dims is not None and min(self.dims) < MIN_DIM:
            errors.append(f"dims must be ≥ {MIN_DIM} per mode (got {self.dims[0]},{self.dims[1]})")
        if min(self.grid) < MIN_GRID:
            errors.append(f"grid must be ≥ {MIN_GRID} per axis (got {self.grid[0]},{self.grid[1]})")
        minimum_steps = MIN_VISIBILITY_STEPS if self.subcommand is Subcommand.VISIBILITY else 2
        if self.theta_steps is not None and self.theta_steps < minimum_steps:
            errors.append(f"theta-steps must be ≥ {minimum_steps} (got {self.theta_steps})")
        for name, bounds in (("re-range", self.re_range), ("im-range", self.im_range)):
            if bounds is not None and not bounds[0] < bounds[1]:
                errors.append(f"{name} must satisfy lo < hi (got {bounds[0]},{bounds[1]})")
        unknown = [name for name in self.only if name not in CHECK_NAMES]
        if unknown:
            errors.append(
                f"only names unknown checks {', '.join(unknown)} "
                f"(choose from {', '.join(CHECK_NAMES)})"
            )

        if errors:
            raise ConfigurationError("; ".join(errors))

    def experiment_config(self) -> ExperimentConfig:
        """The experiment described by this run."""
        try:
            return ExperimentConfig(
                alpha0=self.alpha0,
                phi=self.phi,
                theta=self.theta,
                gain=GainParam.from_gain(self.g),
                dims=self.dims,
                postselect_mode=PostSelectMode(self.mode, self.threshold),
                normalize_outputs=self.normalize_outputs,
            )
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    def log_config(self) -> None:
        """Log the resolved run for debugging."""
        logger.debug(
            "Configuration loaded",
            subcommand=self.subcommand.value,
            g=self.g,
            alpha0=str(self.alpha0),
            phi=self.phi,
            theta_steps=self.theta_steps,
            mode=self.mode.value,
            dims=self.dims,
            sources=self.sources,
        )
