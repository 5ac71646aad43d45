"""Acceptance checks and the ``validate`` subcommand.

Each check computes one measured quantity, compares it with its limit and
returns a :class:`CheckResult`. Checks never raise out of the runner: an
exception inside a check becomes a FAIL row naming the exception.
"""

import math
import sys
import time
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np
import structlog

from src import metrics
from src.commands import EXIT_OK, EXIT_VALIDATION
from src.commands.output import OutputError
from src.commands.runners import theta_grid
from src.config import CHECK_NAMES, RunSpec
from src.engine.analytic_q import (
    amplifier_scaling_check,
    build_q_terms,
    integrate_probability,
    integrate_term,
    integrate_term_numeric,
    visibility_closed_form,
)
from src.engine.fock import (
    TwoModeState,
    apply_two_mode_squeeze,
    coherent_vector,
    number_vector,
    product_state,
    squeeze_oracle,
)
from src.experiments.heisenberg import (
    audit_config,
    discrepancy_report,
    heisenberg_means,
    measured_means,
)
from src.experiments.pipeline import accepted_probability, prepare_cat, visibility_sweep
from src.models.data import (
    CheckResult,
    ExperimentConfig,
    GainParam,
    Mode,
    PostSelectMode,
    Stage,
    ValidationReport,
)

logger = structlog.get_logger(__name__)

EQ23_CASES = ((1.1, 1.0), (1.25, 1.0), (1.5, 1.0), (1.1, 2.0), (1.25, 2.0))
ORACLE_SQUEEZES = (0.1, 0.3, 0.5)
ORACLE_DIMS = 12
TMSV_PHOTON_LIMIT = 1e-6
TMSV_AMPLITUDE_LIMIT = 1e-8


@dataclass
class Measurement:
    measured: float
    limit: float
    passed: bool
    detail: str = ""


def _within(measured: float, limit: float, detail: str = "") -> Measurement:
    return Measurement(measured, limit, bool(measured < limit), detail)


def check_eq5() -> Measurement:
    config = ExperimentConfig(alpha0=2.0, gain=GainParam.from_gain(1.0))
    error = max(
        abs(accepted_probability(replace(config, theta=theta)) - 0.5 * math.cos(theta / 2) ** 2)
        for theta in theta_grid(64)
    )
    return _within(error, 1e-6, "max |P(θ) − cos²(θ/2)/2| at g=1")


def check_eq23() -> Measurement:
    worst = 0.0
    worst_case = ""
    for g, magnitude in EQ23_CASES:
        config = ExperimentConfig(alpha0=magnitude, gain=GainParam.from_gain(g))
        simulated = visibility_sweep(config, theta_grid(64)).visibility
        error = abs(simulated - visibility_closed_form(g, magnitude))
        if error >= worst:
            worst, worst_case = error, f"g={g}, |α₀|={magnitude}"
    return _within(worst, 1e-3, f"worst case {worst_case}")


def _oracle_inputs(n: int) -> dict[str, TwoModeState]:
    vacuum = coherent_vector(0.0, n)
    return {
        "vacuum": product_state(vacuum, vacuum),
        "coherent(0.5)": product_state(coherent_vector(0.5, n), vacuum),
        "single photon": product_state(number_vector(1, n), vacuum),
    }


def check_oracle() -> Measurement:
    worst = 0.0
    worst_case = ""
    for r in ORACLE_SQUEEZES:
        gain = GainParam.from_squeeze(r)
        for name, state in _oracle_inputs(ORACLE_DIMS).items():
            factored = apply_two_mode_squeeze(state, gain)
            oracle = squeeze_oracle(state, r)
            error = float(np.max(np.abs(factored.amps - oracle.amps)))
            if error >= worst:
                worst, worst_case = error, f"r={r}, {name}"
    return _within(worst, 1e-8, f"factored vs matrix exponential, worst {worst_case}")


def tmsv_measurement(photon_error: float, amplitude_error: float) -> Measurement:
    """Gate the photon number at 1e-6 and the number-basis amplitudes at 1e-8."""
    return Measurement(
        amplitude_error,
        TMSV_AMPLITUDE_LIMIT,
        photon_error < TMSV_PHOTON_LIMIT and amplitude_error < TMSV_AMPLITUDE_LIMIT,
        f"⟨n⟩ error {photon_error:.2e} (limit {TMSV_PHOTON_LIMIT:.0e}), "
        f"amplitude error {amplitude_error:.2e}",
    )


def check_tmsv() -> Measurement:
    vacuum = coherent_vector(0.0, 30)
    squeezed = apply_two_mode_squeeze(product_state(vacuum, vacuum), GainParam.from_squeeze(0.5))
    photon_error = abs(squeezed.photon_number(Mode.SIGNAL) - math.sinh(0.5) ** 2)
    small = apply_two_mode_squeeze(product_state(vacuum, vacuum), GainParam.from_squeeze(0.3))
    levels = np.arange(10)
    expected = (-math.tanh(0.3)) ** levels / math.cosh(0.3)
    amplitude_error = float(np.max(np.abs(np.diag(small.amps)[:10] - expected)))
    return tmsv_measurement(photon_error, amplitude_error)


def check_eq26() -> Measurement:
    gain = GainParam.from_gain(1.25)
    config = ExperimentConfig(alpha0=1.0, gain=gain)
    ns, ni = config.resolved_dims()
    inputs = {
        "coherent(1)": product_state(coherent_vector(1.0, ns), coherent_vector(0.0, ni)),
        "cat": prepare_cat(config),
    }
    grid = np.linspace(gain.g - 3.0, gain.g + 3.0, 21).astype(complex)
    errors = {name: amplifier_scaling_check(state, gain, grid) for name, state in inputs.items()}
    return _within(
        max(errors.values()),
        1e-4,
        ", ".join(f"{name} {error:.2e}" for name, error in errors.items()),
    )


def check_eq3() -> Measurement:
    gain = GainParam.from_gain(1.25)
    config = ExperimentConfig(alpha0=2.0 + 0.5j, gain=gain)
    ns, ni = config.resolved_dims()
    state = product_state(coherent_vector(config.alpha0, ns), coherent_vector(0.0, ni))
    predicted = heisenberg_means(state, gain)
    measured = measured_means(apply_two_mode_squeeze(state, gain))
    error = max(abs(predicted[key] - measured[key]) for key in predicted)
    return _within(error, 1e-4, f"idler ⟨q⟩ = {measured['q']:.6f}")


def check_eq33() -> Measurement:
    thetas = theta_grid(16)
    amplified = discrepancy_report(audit_config(1.1, 4.0), thetas)
    baseline = discrepancy_report(audit_config(1.0, 5.0), thetas)
    baseline_ok = (
        abs(baseline.exact_modulation_ratio - 3.0) < 0.3
        and abs(baseline.naive_modulation_ratio - 3.0) < 0.3
    )
    passed = amplified.disagreement and baseline_ok
    detail = (
        f"g=1.1: naive {amplified.naive_modulation_ratio:.3f}, "
        f"exact {amplified.exact_modulation_ratio:.3f}; "
        f"g=1: naive {baseline.naive_modulation_ratio:.3f}, "
        f"exact {baseline.exact_modulation_ratio:.3f}"
    )
    return Measurement(amplified.exact_modulation_ratio, 1.15, passed, detail)


def check_engines() -> Measurement:
    config = ExperimentConfig(alpha0=1.0, gain=GainParam.from_gain(1.25))
    probability_error = 0.0
    for k in range(9):
        theta_config = replace(config, theta=k * math.pi / 4)
        analytic = integrate_probability(build_q_terms(theta_config, Stage.POST_ANALYZER))
        probability_error = max(
            probability_error, abs(analytic - accepted_probability(theta_config))
        )
    quadrature_error = max(
        abs(integrate_term(term) - integrate_term_numeric(term))
        for _, term in build_q_terms(config, Stage.POST_ANALYZER).items()
    )
    return _within(
        max(probability_error, quadrature_error),
        1e-6,
        f"Q vs Fock {probability_error:.2e}, closed form vs quadrature {quadrature_error:.2e}",
    )


def check_modes() -> Measurement:
    worst = 0.0
    for g in (1.0, 1.1):
        config = ExperimentConfig(alpha0=3.0, gain=GainParam.from_gain(g))
        homodyne = replace(config, postselect_mode=PostSelectMode.homodyne_window(0.0))
        grid = theta_grid(64)
        error = abs(
            visibility_sweep(homodyne, grid).visibility - visibility_sweep(config, grid).visibility
        )
        worst = max(worst, error)
    return _within(worst, 1e-2, "homodyne window vs branch drop, |α₀|=3")


CHECKS: dict[str, tuple[str, Callable[[], Measurement]]] = {
    "eq5": ("unamplified interference P(θ) = cos²(θ/2)/2", check_eq5),
    "eq23": ("Fock visibility matches the closed form", check_eq23),
    "oracle": ("factored squeeze matches the dense oracle", check_oracle),
    "tmsv": ("squeezed vacuum amplitudes and photon number", check_tmsv),
    "eq26": ("amplifier Q scaling law", check_eq26),
    "eq3": ("mean quadratures follow the amplifier relations", check_eq3),
    "eq33": ("naive and exact post-selected variances disagree", check_eq33),
    "engines": ("Q-function engine matches the Fock engine", check_engines),
    "modes": ("homodyne window matches branch drop", check_modes),
}


def run_check(name: str) -> CheckResult:
    """Run one check, converting any exception into a FAIL result."""
    description, check = CHECKS[name]
    start = time.perf_counter()
    try:
        outcome = check()
    except Exception as e:
        logger.error("Validation check raised", check=name, error=str(e))
        outcome = Measurement(math.nan, math.nan, False, f"{type(e).__name__}: {e}")
    seconds = time.perf_counter() - start
    metrics.record_check(name, outcome.passed, seconds)
    return CheckResult(
        name=name,
        description=description,
        passed=outcome.passed,
        measured=outcome.measured,
        limit=outcome.limit,
        seconds=seconds,
        detail=outcome.detail,
    )


def run_checks(names: tuple[str, ...] = ()) -> ValidationReport:
    selected = names or CHECK_NAMES
    return ValidationReport([run_check(name) for name in CHECK_NAMES if name in selected])


def format_table(report: ValidationReport) -> str:
    header = f"{'CHECK':<9} {'STATUS':<6} {'MEASURED':>12} {'LIMIT':>10} {'SECONDS':>8}  DETAIL"
    lines = [header]
    for check in report.checks:
        lines.append(
            f"{check.name:<9} {check.status:<6} {check.measured:>12.4g} "
            f"{check.limit:>10.3g} {check.seconds:>8.2f}  {check.detail}"
        )
    return "\n".join(lines) + "\n"


def run_validate(spec: RunSpec, stream: TextIO | None = None) -> int:
    """Run the selected checks, print the table, and return the exit code."""
    target = stream if stream is not None else sys.stdout
    report = run_checks(spec.only)
    target.write(format_table(report))
    if spec.out is not None:
        try:
            spec.out.write_text(report.to_json() + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write {spec.out}: {e}") from e
    if spec.metrics_out is not None:
        try:
            metrics.write(spec.metrics_out)
        except OSError as e:
            raise OutputError(f"Cannot write {spec.metrics_out}: {e}") from e
    if report.all_passed:
        logger.info("Validation passed", checks=len(report.checks))
        return EXIT_OK
    target.write(f"FAILED: {', '.join(report.failed)}\n")
    logger.error("Validation failed", failed=report.failed)
    return EXIT_VALIDATION
