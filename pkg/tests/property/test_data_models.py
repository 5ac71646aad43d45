"""Property-based tests for data model invariants.

**Feature: catamp, Property 1: Data Model Consistency**
**Validates: gain parametrization, truncation sizing and result serialization**
"""

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.models.data import (
    CheckResult,
    ExperimentConfig,
    GainParam,
    PostSelectKind,
    PostSelectMode,
    ValidationReport,
    VisibilityResult,
    default_dims,
)

# Strategies for generating test data
gain_strategy = st.floats(min_value=1.0, max_value=10.0, allow_nan=False)
squeeze_strategy = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)
part_strategy = st.floats(min_value=-6.0, max_value=6.0, allow_nan=False, allow_infinity=False)
angle_strategy = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@given(g=gain_strategy)
def test_gain_and_squeeze_agree(g: float) -> None:
    """
    **Feature: catamp, Property 1: Data Model Consistency**

    For any gain g ≥ 1, cosh r reproduces g and the derived couplings satisfy
    g² − s² = 1 and t = s/g.
    """
    gain = GainParam.from_gain(g)

    assert math.cosh(gain.r) == pytest.approx(g, rel=1e-12)
    assert gain.g**2 - gain.coupling**2 == pytest.approx(1.0, rel=1e-9, abs=1e-9)
    assert gain.transmission == pytest.approx(gain.coupling / gain.g, rel=1e-12, abs=1e-15)
    assert gain.epsilon == pytest.approx(g - 1.0)


@given(r=squeeze_strategy)
def test_squeeze_round_trip(r: float) -> None:
    """
    **Feature: catamp, Property 1: Data Model Consistency**

    For any r ≥ 0, building from r gives g = cosh r and 0 ≤ tanh r < 1.
    """
    gain = GainParam.from_squeeze(r)

    assert gain.g == math.cosh(r)
    assert 0.0 <= gain.transmission < 1.0


@pytest.mark.parametrize("g", [0.999, 0.0, -1.0, math.nan])
def test_attenuating_gain_is_rejected(g: float) -> None:
    with pytest.raises(ValueError):
        GainParam.from_gain(g)


def test_negative_squeeze_is_rejected() -> None:
    with pytest.raises(ValueError):
        GainParam.from_squeeze(-0.1)
    with pytest.raises(ValueError):
        GainParam(g=1.0, r=-0.1)


def test_unit_gain_is_identity_parameters() -> None:
    gain = GainParam.from_gain(1.0)

    assert gain.r == 0.0
    assert gain.coupling == 0.0
    assert gain.transmission == 0.0


# =============================================================================
# Experiment configuration
# =============================================================================


@given(re=part_strategy, im=part_strategy, g=st.floats(min_value=1.0, max_value=2.0))
def test_default_dims_cover_amplified_amplitude(re: float, im: float, g: float) -> None:
    """
    **Feature: catamp, Property 1: Data Model Consistency**

    The default truncation always exceeds the amplified photon number by a
    wide margin and grows with the gain.
    """
    ns, ni = default_dims(complex(re, im), g)
    photons = abs(g * complex(re, im)) ** 2

    assert ns == ni
    assert ns >= photons + 20
    assert default_dims(complex(re, im), g + 0.1)[0] >= ns


@pytest.mark.parametrize(
    "alpha0, g, expected",
    [(2.0, 1.0, 40), (2.0, 1.1, 47), (1.0, 1.25, 43), (2.0, 1.25, 58), (1.0, 1.5, 60)],
)
def test_default_dims_values(alpha0: float, g: float, expected: int) -> None:
    assert default_dims(alpha0, g) == (expected, expected)


@given(phi=angle_strategy)
def test_cat_overlap_matches_formula(phi: float) -> None:
    """
    **Feature: catamp, Property 1: Data Model Consistency**

    For any phase, the cat overlap is exp(−2|α₀|² sin²φ) and lies in (0, 1].
    """
    config = ExperimentConfig(alpha0=1.5j, phi=phi)

    assert config.cat_overlap() == pytest.approx(math.exp(-4.5 * math.sin(phi) ** 2))
    assert 0.0 < config.cat_overlap() <= 1.0


def test_explicit_dims_override_default() -> None:
    config = ExperimentConfig(alpha0=3.0, dims=(30, 12))

    assert config.resolved_dims() == (30, 12)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha0": complex(math.nan, 0.0)},
        {"phi": math.inf},
        {"theta": math.nan},
        {"dims": (0, 10)},
        {"postselect_mode": PostSelectMode(PostSelectKind.HOMODYNE_WINDOW, math.inf)},
    ],
)
def test_invalid_config_is_rejected(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_config_to_dict() -> None:
    config = ExperimentConfig(
        alpha0=1.0 - 2.0j,
        gain=GainParam.from_gain(1.1),
        postselect_mode=PostSelectMode.homodyne_window(0.5),
    )
    data = config.to_dict()

    assert data["alpha0"] == [1.0, -2.0]
    assert data["g"] == 1.1
    assert data["mode"] == {"kind": "homodyne_window", "threshold": 0.5}
    assert data["dims"] == list(config.resolved_dims())
    json.dumps(data)


def test_branch_drop_mode_has_no_threshold() -> None:
    assert PostSelectMode.branch_drop().to_dict() == {"kind": "branch_drop"}


# =============================================================================
# Result records
# =============================================================================


def test_visibility_result_serializes() -> None:
    result = VisibilityResult(
        samples=[(0.0, 0.5), (math.pi, 0.0)],
        p_max=0.5,
        p_min=0.0,
        visibility=1.0,
        reference_visibility=1.0,
        mode=PostSelectMode.branch_drop(),
    )
    data = json.loads(result.to_json())

    assert data["samples"] == [[0.0, 0.5], [math.pi, 0.0]]
    assert data["visibility"] == 1.0
    assert data["mode"]["kind"] == "branch_drop"


def test_validation_report_status() -> None:
    report = ValidationReport(
        [
            CheckResult("eq5", "interference", True, 1e-9, 1e-6),
            CheckResult("eq23", "visibility", False, 2e-3, 1e-3, detail="worst case"),
        ]
    )

    assert not report.all_passed
    assert report.failed == ["eq23"]
    data = json.loads(report.to_json())
    assert [check["status"] for check in data["checks"]] == ["PASS", "FAIL"]
    assert data["all_passed"] is False


def test_empty_report_passes() -> None:
    assert ValidationReport().all_passed
