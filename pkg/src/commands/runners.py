"""Data-producing subcommands: visibility, qgrid and variance."""

import math
from typing import Any

import numpy as np
import structlog
from scipy import integrate

from src.commands import EXIT_OK
from src.commands.output import emit
from src.config import InputState, RunSpec
from src.engine.analytic_q import (
    amplifier_scaling_check,
    marginal_q_grid,
    visibility_small_gain_limit,
)
from src.engine.fock import (
    TwoModeState,
    ZeroNormError,
    apply_two_mode_squeeze,
    coherent_vector,
    product_state,
)
from src.experiments.heisenberg import discrepancy_report
from src.experiments.pipeline import (
    analyzer,
    idler_which_path_report,
    postselected_moments,
    prepare_cat,
    visibility_sweep,
)
from src.models.data import ExperimentConfig, Stage

logger = structlog.get_logger(__name__)

# P(θ) of the interferometer never exceeds one half.
PROBABILITY_CEILING = 0.5 + 1e-6


def theta_grid(steps: int) -> list[float]:
    """Uniform grid of ``steps`` points on [0, 2π)."""
    return [2.0 * math.pi * k / steps for k in range(steps)]


def _common_summary(config: ExperimentConfig) -> dict[str, Any]:
    return {
        "g": config.gain.g,
        "alpha0": [config.alpha0.real, config.alpha0.imag],
        "phi": config.phi,
        "dims": list(config.resolved_dims()),
    }


def _moments_summary(config: ExperimentConfig) -> dict[str, Any] | None:
    try:
        return postselected_moments(config).to_dict()
    except ZeroNormError:
        logger.warning("Post-selected state has zero norm", theta=config.theta)
        return None


def run_visibility(spec: RunSpec) -> int:
    """Sweep θ and write (theta, probability) rows plus the visibility summary."""
    config = spec.experiment_config()
    result = visibility_sweep(config, theta_grid(spec.theta_steps))
    out_of_range = [p for _, p in result.samples if not 0.0 <= p <= PROBABILITY_CEILING]
    if out_of_range:
        logger.warning(
            "Probabilities outside [0, 1/2]",
            count=len(out_of_range),
            worst=max(out_of_range, key=lambda p: abs(p - 0.25)),
        )
    which_path = idler_which_path_report(config)
    moments = _moments_summary(config)
    summary = {
        "p_max": result.p_max,
        "p_min": result.p_min,
        "visibility": result.visibility,
        "eq23_reference": result.reference_visibility,
        "eq23_limit": visibility_small_gain_limit(config.gain.epsilon, abs(config.alpha0)),
        "mode": result.mode.to_dict(),
        **_common_summary(config),
        "which_path": which_path.to_dict(),
        "moments": moments,
    }
    emit(
        ["theta", "probability"],
        result.samples,
        summary,
        spec.out,
        spec.output_format,
    )
    return EXIT_OK


def _qgrid_state(spec: RunSpec, config: ExperimentConfig) -> tuple[TwoModeState, TwoModeState]:
    ns, ni = config.resolved_dims()
    if spec.input_state is InputState.CAT:
        state_in = prepare_cat(config)
    else:
        state_in = product_state(coherent_vector(config.alpha0, ns), coherent_vector(0.0, ni))
    if config.normalize_outputs:
        state_in = state_in.normalized()
    if spec.stage is Stage.PREP:
        return state_in, state_in
    amplified = apply_two_mode_squeeze(state_in, config.gain)
    if spec.stage is Stage.POST_AMPLIFIER:
        return state_in, amplified
    state = analyzer(amplified, config.phi, config.theta)
    return state_in, state.normalized() if config.normalize_outputs else state


def run_qgrid(spec: RunSpec) -> int:
    """Write the idler-traced Q̃ on a rectangular grid over Re α, Im α.

    The ``post_amplifier`` stage adds the scaling-law prediction
    Q̃_in(α/g)/g² as a column and its largest relative error to the summary.
    """
    config = spec.experiment_config()
    state_in, state = _qgrid_state(spec, config)
    nx, ny = spec.grid
    re_values = np.linspace(spec.re_range[0], spec.re_range[1], nx)
    im_values = np.linspace(spec.im_range[0], spec.im_range[1], ny)
    alphas = (re_values[:, None] + 1j * im_values[None, :]).reshape(-1)
    q_tilde = marginal_q_grid(state, alphas)

    columns = ["re_alpha", "im_alpha", "q_tilde"]
    table = [alphas.real, alphas.imag, q_tilde]
    summary: dict[str, Any] = {
        "stage": spec.stage.value,
        "input": spec.input_state.value,
        **_common_summary(config),
        "grid": [nx, ny],
        "normalized": config.normalize_outputs,
        "q_max": float(np.max(q_tilde)),
        "q_integral": float(
            integrate.trapezoid(
                integrate.trapezoid(q_tilde.reshape(nx, ny), im_values, axis=1), re_values
            )
        ),
    }
    if spec.stage is Stage.POST_AMPLIFIER:
        g = config.gain.g
        columns.append("q_predicted")
        table.append(marginal_q_grid(state_in, alphas / g) / (g * g))
        summary["scaling_max_relative_error"] = amplifier_scaling_check(
            state_in, config.gain, alphas
        )
    if spec.stage is Stage.POST_ANALYZER:
        summary["theta"] = config.theta
    rows = np.column_stack(table).tolist()
    emit(columns, rows, summary, spec.out, spec.output_format)
    return EXIT_OK


def run_variance(spec: RunSpec) -> int:
    """Write naive and exact post-selected variances over θ."""
    config = spec.experiment_config()
    report = discrepancy_report(config, theta_grid(spec.theta_steps))
    rows = list(
        zip(report.theta_samples, report.naive_variance, report.exact_variance, strict=True)
    )
    summary = {
        "naive_modulation_ratio": report.naive_modulation_ratio,
        "exact_modulation_ratio": report.exact_modulation_ratio,
        "disagreement": report.disagreement,
        "samples": len(rows),
        **_common_summary(config),
    }
    emit(
        ["theta", "naive_variance", "exact_variance"],
        rows,
        summary,
        spec.out,
        spec.output_format,
    )
    return EXIT_OK
