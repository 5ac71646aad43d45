"""Shared pytest fixtures and Hypothesis settings."""

import math

import pytest
import structlog
from hypothesis import settings
from structlog.testing import CapturingLogger, LogCapture

from src.engine.fock import TwoModeState, coherent_vector, product_state
from src.models.data import ExperimentConfig, GainParam

# Register Hypothesis profiles; numerics make per-example deadlines meaningless
settings.register_profile("ci", max_examples=30, deadline=None)
settings.register_profile("dev", max_examples=10, deadline=None)

# Load CI profile by default
settings.load_profile("ci")


@pytest.fixture
def vacuum_state() -> TwoModeState:
    """Two-mode vacuum on a 30×30 box."""
    vacuum = coherent_vector(0.0, 30)
    return product_state(vacuum, vacuum)


@pytest.fixture
def small_dims() -> tuple[int, int]:
    return 12, 12


@pytest.fixture
def unamplified_config() -> ExperimentConfig:
    """Cat interferometer without amplification, α₀ = 2, φ = π/2."""
    return ExperimentConfig(alpha0=2.0, phi=math.pi / 2, gain=GainParam.from_gain(1.0))


@pytest.fixture
def amplified_config() -> ExperimentConfig:
    """Cat interferometer at g = 1.5, α₀ = 1, φ = π/2."""
    return ExperimentConfig(alpha0=1.0, phi=math.pi / 2, gain=GainParam.from_gain(1.5))


@pytest.fixture
def theta_sweep() -> list[float]:
    return [2.0 * math.pi * k / 64 for k in range(64)]


@pytest.fixture
def capture_module_logs(monkeypatch):
    """Swap a module's ``logger`` for one that records event dicts.

    Returns a function taking the module and returning the list the events
    are appended to, each with ``event`` and ``log_level`` keys.
    """

    def capture(module) -> list[dict]:
        recorder = LogCapture()
        monkeypatch.setattr(
            module,
            "logger",
            structlog.wrap_logger(
                CapturingLogger(),
                processors=[recorder],
                wrapper_class=structlog.BoundLogger,
            ),
        )
        return recorder.entries

    return capture
