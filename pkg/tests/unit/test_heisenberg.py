"""Unit tests for the post-selected variance audit."""

import math

import pytest

from src.engine.fock import ZeroNormError, apply_two_mode_squeeze, coherent_vector, product_state
from src.experiments import heisenberg
from src.experiments.heisenberg import (
    audit_config,
    discrepancy_report,
    exact_postselected_variance,
    first_moment_agreement,
    heisenberg_means,
    measured_means,
    modulation_ratio,
    naive_postselected_variance,
)
from src.models.data import GainParam

SIXTEEN_THETAS = [2.0 * math.pi * k / 16 for k in range(16)]


def test_audit_config_conventions():
    config = audit_config(1.1, 4.0)
    assert config.alpha0 == 4j
    assert config.phi == pytest.approx(math.pi / 4)
    assert config.gain.g == 1.1


@pytest.mark.parametrize(
    "g, magnitude, theta, expected",
    [(1.0, 3.0, math.pi / 2, 9.0), (1.0, 3.0, 0.0, 3.0), (1.1, 4.0, math.pi / 2, 19.57)],
)
def test_naive_variance_values(g, magnitude, theta, expected):
    assert naive_postselected_variance(audit_config(g, magnitude), theta) == pytest.approx(
        expected, abs=1e-9
    )


@pytest.mark.parametrize(
    "values, expected",
    [([], 1.0), ([2.0, 2.0], 1.0), ([0.0, 0.0], 1.0), ([0.0, 1.0], math.inf), ([1.0, 3.0], 3.0)],
)
def test_modulation_ratio(values, expected):
    assert modulation_ratio(values) == expected


def test_exact_variance_is_non_negative():
    config = audit_config(1.1, 2.0)
    for theta in SIXTEEN_THETAS[:4]:
        assert exact_postselected_variance(config, theta) >= 0.0


@pytest.mark.parametrize("g", [1.0, 1.25])
def test_first_moments_agree(g):
    config = audit_config(g, 1.0)
    for theta in (0.0, 1.0, math.pi / 2):
        direct, adjoint = first_moment_agreement(config, theta)
        assert direct == pytest.approx(adjoint, abs=1e-10)


def test_unamplified_variances_agree_at_quarter_turn():
    config = audit_config(1.0, 5.0)
    naive = naive_postselected_variance(config, math.pi / 2)
    exact = exact_postselected_variance(config, math.pi / 2)
    assert naive == pytest.approx(25.0)
    assert abs(exact - naive) <= 0.15 * naive
    assert exact == pytest.approx(25.5, abs=1e-6)


def test_vacuum_input_keeps_vacuum_variance():
    report = discrepancy_report(audit_config(1.0, 0.0), SIXTEEN_THETAS)
    assert report.theta_samples
    assert report.exact_variance == pytest.approx([0.5] * len(report.exact_variance), abs=1e-12)
    assert report.exact_modulation_ratio == pytest.approx(1.0)
    assert not report.disagreement


def test_symmetric_branches_have_zero_mean():
    config = audit_config(1.0, 5.0)
    direct, _ = first_moment_agreement(config, 0.0)
    assert abs(direct) < 1e-6


def test_mean_field_relations():
    gain = GainParam.from_gain(1.1)
    state = product_state(coherent_vector(1.0 - 1.0j, 40), coherent_vector(0.0, 40))
    predicted = heisenberg_means(state, gain)
    measured = measured_means(apply_two_mode_squeeze(state, gain))
    for key in ("x", "p", "q", "pi"):
        assert predicted[key] == pytest.approx(measured[key], abs=1e-4)
    assert measured["q"] == pytest.approx(-gain.coupling * math.sqrt(2.0), abs=1e-4)
    assert measured["pi"] == pytest.approx(-gain.coupling * math.sqrt(2.0), abs=1e-4)


def test_zero_norm_thetas_are_skipped(monkeypatch):
    def fake_exact(config, theta):
        if theta == 0.0:
            raise ZeroNormError("empty")
        return 1.0

    monkeypatch.setattr(heisenberg, "exact_postselected_variance", fake_exact)
    report = discrepancy_report(audit_config(1.0, 3.0), SIXTEEN_THETAS)

    assert len(report.theta_samples) == 15
    assert 0.0 not in report.theta_samples
    assert len(report.naive_variance) == len(report.exact_variance) == 15
    assert report.exact_modulation_ratio == 1.0


@pytest.mark.slow
def test_unamplified_paths_agree():
    report = discrepancy_report(audit_config(1.0, 5.0), SIXTEEN_THETAS)
    assert abs(report.naive_modulation_ratio - 3.0) < 0.3
    assert abs(report.exact_modulation_ratio - 3.0) < 0.3
    assert not report.disagreement


@pytest.mark.slow
def test_amplified_paths_disagree():
    report = discrepancy_report(audit_config(1.1, 4.0), SIXTEEN_THETAS)
    assert report.naive_modulation_ratio >= 2.5
    assert report.exact_modulation_ratio <= 1.15
    assert report.disagreement


@pytest.mark.slow
def test_exact_modulation_flattens_with_gain():
    ratios = [
        discrepancy_report(audit_config(g, 4.0), SIXTEEN_THETAS).exact_modulation_ratio
        for g in (1.0, 1.02, 1.05, 1.1)
    ]
    assert all(later <= earlier for earlier, later in zip(ratios, ratios[1:], strict=False))
