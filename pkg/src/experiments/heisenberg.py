"""Heisenberg-picture predictions versus the post-selected state.

The linear amplifier relations

    x_out = g x − s q,   p_out = g p + s π,   q_out = g q − s x,   π_out = g π + s p,

with s = √(g² − 1), predict output moments from input moments. Under
post-selection the evolution O = T S is not unitary. First moments still
follow from ⟨ψ₀|O† x O|ψ₀⟩, but the post-selected variance predicted by
carrying the relations through the analyzer keeps the full interference
modulation of the unamplified cat, while the exact variance of the
post-selected state loses it as soon as the idler carries which-path
information.

The comparison uses α₀ on the imaginary axis and φ = π/4 by default.
"""

import math
from collections.abc import Sequence
from dataclasses import replace

import structlog

from src.engine.fock import (
    DEFAULT_SETTINGS,
    TwoModeState,
    ZeroNormError,
    apply_quadrature,
    apply_two_mode_squeeze,
    overlap,
    quadrature_moment,
)
from src.experiments.pipeline import (
    SIGNAL_X,
    amplified_cat,
    analyzer,
    analyzer_adjoint,
    four_branch_state,
    prepare_cat,
)
from src.models.data import (
    ExperimentConfig,
    GainParam,
    Mode,
    Quadrature,
    QuadratureSpec,
    VarianceComparison,
)

logger = structlog.get_logger(__name__)

NAIVE_RATIO_GATE = 2.5
EXACT_RATIO_GATE = 1.15
ZERO_NORM_FLOOR = 1e-12

SIGNAL_P = QuadratureSpec(Mode.SIGNAL, Quadrature.P)
IDLER_Q = QuadratureSpec(Mode.IDLER, Quadrature.X)
IDLER_PI = QuadratureSpec(Mode.IDLER, Quadrature.P)

# The adjoint path carries un-normalized operator images whose tails are not probabilities.
_UNBOUNDED_TAIL = replace(DEFAULT_SETTINGS, tail_threshold=math.inf)


def audit_config(
    gain: float,
    alpha0_mag: float,
    phi: float = math.pi / 4,
    dims: tuple[int, int] | None = None,
) -> ExperimentConfig:
    """Config on the audit conventions: α₀ = i|α₀|, φ = π/4 by default."""
    return ExperimentConfig(
        alpha0=1j * alpha0_mag,
        phi=phi,
        gain=GainParam.from_gain(gain),
        dims=dims,
    )


def naive_postselected_variance(config: ExperimentConfig, theta: float) -> float:
    """Variance predicted by carrying the amplifier relations through post-selection.

    g²⟨x_W²⟩ + (g² − 1) with ⟨x_W²⟩ = sin²(2φ)|α₀|²/(1 + 2cos²θ).
    """
    if abs(config.alpha0.real) > 1e-12:
        logger.warning("Naive variance assumes imaginary alpha0", alpha0=str(config.alpha0))
    g2 = config.gain.g**2
    signal = math.sin(2.0 * config.phi) ** 2 * abs(config.alpha0) ** 2
    signal /= 1.0 + 2.0 * math.cos(theta) ** 2
    return g2 * signal + (g2 - 1.0)


def exact_postselected_variance(config: ExperimentConfig, theta: float) -> float:
    """Signal x variance of the normalized photon-post-selected state.

    Raises:
        ZeroNormError: If the post-selected state has (numerically) zero norm.
    """
    state = four_branch_state(replace(config, theta=theta))
    norm = state.norm_squared()
    if norm < ZERO_NORM_FLOOR:
        raise ZeroNormError(f"post-selected state has squared norm {norm:.3e} at theta={theta}")
    mean = quadrature_moment(state, SIGNAL_X, 1, normalize=True)
    second = quadrature_moment(state, SIGNAL_X, 2, normalize=True)
    return max(0.0, second - mean * mean)


def first_moment_agreement(config: ExperimentConfig, theta: float) -> tuple[float, float]:
    """Un-normalized ⟨x⟩ of the post-selected state, computed two ways.

    Returns:
        ``(direct, adjoint)``: ⟨ψ_F|x|ψ_F⟩ with ψ_F = T S ψ₀, and
        ⟨ψ₀|S† T† x T S ψ₀⟩ evaluated on a box one signal level larger.
    """
    final = analyzer(amplified_cat(config), config.phi, theta)
    direct = quadrature_moment(final, SIGNAL_X, 1)
    image = apply_quadrature(final, SIGNAL_X)
    image = analyzer_adjoint(image, config.phi, theta)
    pulled_back = apply_two_mode_squeeze(
        image, config.gain, reverse=True, settings=_UNBOUNDED_TAIL
    )
    initial = prepare_cat(config)
    initial = initial.padded(*pulled_back.dims)
    adjoint = overlap(initial, pulled_back).real
    return direct, float(adjoint)


def modulation_ratio(values: Sequence[float]) -> float:
    """max/min of a variance curve; 1 when flat or all zero."""
    if not values:
        return 1.0
    high, low = max(values), min(values)
    if high <= 0.0 or high == low:
        return 1.0
    if low <= 0.0:
        return math.inf
    return high / low


def discrepancy_report(config: ExperimentConfig, theta_grid: Sequence[float]) -> VarianceComparison:
    """Compare naive and exact post-selected variances over ``theta_grid``.

    Theta values whose post-selected state has zero norm are skipped with a
    warning. Disagreement is flagged when the naive modulation ratio is at
    least 2.5 while the exact ratio is at most 1.15.
    """
    thetas: list[float] = []
    naive: list[float] = []
    exact: list[float] = []
    for theta in theta_grid:
        try:
            exact_value = exact_postselected_variance(config, theta)
        except ZeroNormError:
            logger.warning("Skipping zero-probability theta", theta=theta)
            continue
        thetas.append(float(theta))
        exact.append(exact_value)
        naive.append(naive_postselected_variance(config, theta))
    naive_ratio = modulation_ratio(naive)
    exact_ratio = modulation_ratio(exact)
    disagreement = naive_ratio >= NAIVE_RATIO_GATE and exact_ratio <= EXACT_RATIO_GATE
    logger.info(
        "Variance audit complete",
        g=config.gain.g,
        alpha0=abs(config.alpha0),
        naive_ratio=naive_ratio,
        exact_ratio=exact_ratio,
        disagreement=disagreement,
    )
    return VarianceComparison(
        theta_samples=thetas,
        naive_variance=naive,
        exact_variance=exact,
        naive_modulation_ratio=naive_ratio,
        exact_modulation_ratio=exact_ratio,
        disagreement=disagreement,
    )


def heisenberg_means(state: TwoModeState, gain: GainParam) -> dict[str, float]:
    """Output quadrature means predicted from the input state's means.

    Keys are ``x``, ``p`` (signal) and ``q``, ``pi`` (idler).
    """
    g, s = gain.g, gain.coupling
    x = quadrature_moment(state, SIGNAL_X, 1)
    p = quadrature_moment(state, SIGNAL_P, 1)
    q = quadrature_moment(state, IDLER_Q, 1)
    pi_ = quadrature_moment(state, IDLER_PI, 1)
    return {
        "x": g * x - s * q,
        "p": g * p + s * pi_,
        "q": g * q - s * x,
        "pi": g * pi_ + s * p,
    }


def measured_means(state: TwoModeState) -> dict[str, float]:
    """Quadrature means of a state, keyed like :func:`heisenberg_means`."""
    return {
        "x": quadrature_moment(state, SIGNAL_X, 1),
        "p": quadrature_moment(state, SIGNAL_P, 1),
        "q": quadrature_moment(state, IDLER_Q, 1),
        "pi": quadrature_moment(state, IDLER_PI, 1),
    }
