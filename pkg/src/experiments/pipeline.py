"""Cat-state interferometer on the Fock engine.

An input coherent state |α₀⟩ picks up a conditional phase ±φ, which
prepares the cat (|e^{iφ}α₀⟩ + |e^{−iφ}α₀⟩)/√2 with the idler in vacuum.
The cat is amplified by the two-mode squeezer and sent through the analyzer
T = ½(e^{iθ}U₊ + U₋), where U± = exp(±iφ n_signal). Of the four branches
B_{s,t} = U(tφ) S |e^{isφ}α₀, 0⟩ only (+, −) and (−, +) undo the preparation
phase; post-selection keeps them either by dropping the other two outright or
by a homodyne window on the signal x quadrature.

Probabilities are squared norms of unnormalized post-selected amplitudes:
the preparation contributes 1/√2 and the analyzer 1/2 per branch.
"""

import cmath
import math
from collections.abc import Callable, Sequence
from functools import lru_cache

import numpy as np
import structlog
from scipy import optimize

from src.engine.analytic_q import visibility_closed_form_phi
from src.engine.fock import (
    TwoModeState,
    apply_signal_phase,
    apply_two_mode_squeeze,
    coherent_vector,
    homodyne_accept_prob,
    overlap,
    product_state,
    quadrature_moment,
    superpose,
)
from src.models.data import (
    CAT_OVERLAP_LIMIT,
    ExperimentConfig,
    GainParam,
    Mode,
    PostSelectKind,
    Quadrature,
    QuadratureSpec,
    SignalMoments,
    VisibilityResult,
    WhichPathReport,
)

logger = structlog.get_logger(__name__)

MIN_SWEEP_POINTS = 32
EXTREMUM_TOLERANCE = 1e-6
SIGNAL_X = QuadratureSpec(Mode.SIGNAL, Quadrature.X)


class PipelineError(Exception):
    """Raised when an experiment is requested in an unsupported way."""

    pass


def _check_sign(sign: int, name: str) -> int:
    if sign not in (1, -1):
        raise PipelineError(f"{name} must be +1 or -1 (got {sign})")
    return sign


def check_cat_overlap(config: ExperimentConfig) -> float:
    """Warn when the cat components are not close to orthogonal.

    Returns:
        The overlap modulus exp(−2|α₀|² sin²φ).
    """
    cat_overlap = config.cat_overlap()
    if cat_overlap >= CAT_OVERLAP_LIMIT:
        logger.warning(
            "Cat components overlap",
            overlap=cat_overlap,
            limit=CAT_OVERLAP_LIMIT,
            alpha0=abs(config.alpha0),
            phi=config.phi,
        )
    return cat_overlap


def _cat_state(config: ExperimentConfig) -> TwoModeState:
    ns, ni = config.resolved_dims()
    phase = cmath.exp(1j * config.phi)
    vacuum = coherent_vector(0.0, ni)
    plus = product_state(coherent_vector(phase * config.alpha0, ns), vacuum)
    minus = product_state(coherent_vector(phase.conjugate() * config.alpha0, ns), vacuum)
    weight = 1.0 / math.sqrt(2.0)
    return superpose([(weight, plus), (weight, minus)])


def prepare_cat(config: ExperimentConfig) -> TwoModeState:
    """Cat state (|e^{iφ}α₀⟩ + |e^{−iφ}α₀⟩)⊗|0⟩/√2.

    The 1/√2 is kept even when the components overlap, so the squared norm
    is 1 + Re⟨e^{iφ}α₀|e^{−iφ}α₀⟩ rather than 1.
    """
    check_cat_overlap(config)
    return _cat_state(config)


@lru_cache(maxsize=64)
def _branch(
    alpha0: complex,
    phi: float,
    gain: GainParam,
    dims: tuple[int, int],
    prep_sign: int,
    analyzer_sign: int,
) -> TwoModeState:
    ns, ni = dims
    prepared = product_state(
        coherent_vector(cmath.exp(1j * prep_sign * phi) * alpha0, ns),
        coherent_vector(0.0, ni),
    )
    amplified = apply_two_mode_squeeze(prepared, gain)
    return apply_signal_phase(amplified, analyzer_sign * phi)


@lru_cache(maxsize=16)
def _amplified_cat(
    alpha0: complex,
    phi: float,
    gain: GainParam,
    dims: tuple[int, int],
) -> TwoModeState:
    config = ExperimentConfig(alpha0=alpha0, phi=phi, gain=gain, dims=dims)
    return apply_two_mode_squeeze(_cat_state(config), gain)


def run_branch(config: ExperimentConfig, prep_sign: int, analyzer_sign: int) -> TwoModeState:
    """Single branch U(analyzer·φ) S |e^{i·prep·φ}α₀⟩⊗|0⟩ with unit weight."""
    _check_sign(prep_sign, "prep_sign")
    _check_sign(analyzer_sign, "analyzer_sign")
    return _branch(
        config.alpha0, config.phi, config.gain, config.resolved_dims(), prep_sign, analyzer_sign
    )


def amplified_cat(config: ExperimentConfig) -> TwoModeState:
    """The prepared cat after the amplifier."""
    return _amplified_cat(config.alpha0, config.phi, config.gain, config.resolved_dims())


def analyzer(state: TwoModeState, phi: float, theta: float) -> TwoModeState:
    """Apply T = ½(e^{iθ}U₊ + U₋) to the signal."""
    return superpose(
        [
            (0.5 * cmath.exp(1j * theta), apply_signal_phase(state, phi)),
            (0.5, apply_signal_phase(state, -phi)),
        ]
    )


def analyzer_adjoint(state: TwoModeState, phi: float, theta: float) -> TwoModeState:
    """Apply T† = ½(e^{−iθ}U₋ + U₊) to the signal."""
    return superpose(
        [
            (0.5 * cmath.exp(-1j * theta), apply_signal_phase(state, -phi)),
            (0.5, apply_signal_phase(state, phi)),
        ]
    )


def four_branch_state(config: ExperimentConfig) -> TwoModeState:
    """Analyzer output T S ψ_cat, before any homodyne selection."""
    return analyzer(amplified_cat(config), config.phi, config.theta)


def _require_mode(config: ExperimentConfig, kind: PostSelectKind) -> None:
    if config.postselect_mode.kind is not kind:
        raise PipelineError(
            f"operation needs post-selection mode {kind.value} "
            f"(config has {config.postselect_mode.kind.value})"
        )


def _branch_drop_probability(config: ExperimentConfig) -> Callable[[float], float]:
    first = run_branch(config, 1, -1).amps
    second = run_branch(config, -1, 1).amps

    def probability(theta: float) -> float:
        amps = first + cmath.exp(1j * theta) * second
        return float(np.vdot(amps, amps).real) / 8.0

    return probability


def _homodyne_probability(config: ExperimentConfig) -> Callable[[float], float]:
    amplified = amplified_cat(config)
    threshold = config.postselect_mode.threshold

    def probability(theta: float) -> float:
        return homodyne_accept_prob(analyzer(amplified, config.phi, theta), threshold)

    return probability


def _probability_function(config: ExperimentConfig) -> Callable[[float], float]:
    check_cat_overlap(config)
    if config.postselect_mode.kind is PostSelectKind.BRANCH_DROP:
        return _branch_drop_probability(config)
    return _homodyne_probability(config)


def accepted_probability(config: ExperimentConfig) -> float:
    """P(θ) = ‖b₁ + e^{iθ} b₂‖²/8 for the two accepted branches.

    Raises:
        PipelineError: If the config does not use branch-drop post-selection.
    """
    _require_mode(config, PostSelectKind.BRANCH_DROP)
    return _probability_function(config)(config.theta)


def homodyne_probability(config: ExperimentConfig) -> float:
    """Probability that the four-branch state lands in the homodyne window.

    Raises:
        PipelineError: If the config does not use homodyne-window post-selection.
    """
    _require_mode(config, PostSelectKind.HOMODYNE_WINDOW)
    return _probability_function(config)(config.theta)


def postselected_state(config: ExperimentConfig) -> TwoModeState:
    """Unnormalized post-selected amplitude at ``config.theta``.

    Branch drop keeps (B₊₋ + e^{iθ}B₋₊)/(2√2); the homodyne window acts on
    measurement records, so its state is the full four-branch output.
    """
    if config.postselect_mode.kind is PostSelectKind.HOMODYNE_WINDOW:
        return four_branch_state(config)
    weight = 1.0 / (2.0 * math.sqrt(2.0))
    return superpose(
        [
            (weight, run_branch(config, 1, -1)),
            (weight * cmath.exp(1j * config.theta), run_branch(config, -1, 1)),
        ]
    )


def postselected_moments(config: ExperimentConfig) -> SignalMoments:
    """Signal x and photon-number moments of the post-selected state.

    With ``config.normalize_outputs`` the moments belong to the renormalized
    state and the x variance is reported.

    Raises:
        ZeroNormError: If normalization is requested of a zero-norm state.
    """
    state = postselected_state(config)
    normalize = config.normalize_outputs
    mean = quadrature_moment(state, SIGNAL_X, 1, normalize=normalize)
    second = quadrature_moment(state, SIGNAL_X, 2, normalize=normalize)
    return SignalMoments(
        theta=config.theta,
        norm_squared=state.norm_squared(),
        mean_x=mean,
        second_x=second,
        photon_number=state.photon_number(Mode.SIGNAL, normalize=normalize),
        normalized=normalize,
        variance_x=max(0.0, second - mean * mean) if normalize else None,
    )


def _refine_extremum(
    probability: Callable[[float], float],
    thetas: Sequence[float],
    values: Sequence[float],
    maximize: bool,
) -> float:
    sign = -1.0 if maximize else 1.0
    index = int(np.argmin([sign * value for value in values]))
    best = sign * values[index]
    centre = thetas[index]
    left = thetas[index - 1] if index > 0 else centre - (thetas[1] - thetas[0])
    right = thetas[index + 1] if index < len(thetas) - 1 else centre + (centre - thetas[index - 1])
    try:
        result = optimize.minimize_scalar(
            lambda theta: sign * probability(theta),
            bracket=(left, centre, right),
            method="golden",
            options={"xtol": EXTREMUM_TOLERANCE},
        )
        best = min(best, float(result.fun))
    except (ValueError, RuntimeError):
        # Flat curves have no strict bracket; the grid value stands.
        pass
    return sign * best


def visibility_sweep(config: ExperimentConfig, theta_grid: Sequence[float]) -> VisibilityResult:
    """Sweep the analyzer phase and measure the interference visibility.

    Extrema are located on the grid and refined by golden-section search
    around the bracketing samples.

    Raises:
        PipelineError: If the grid has fewer than 32 points.
    """
    thetas = [float(theta) for theta in theta_grid]
    if len(thetas) < MIN_SWEEP_POINTS:
        raise PipelineError(
            f"theta grid needs at least {MIN_SWEEP_POINTS} points (got {len(thetas)})"
        )
    probability = _probability_function(config)
    values = [probability(theta) for theta in thetas]
    p_max = _refine_extremum(probability, thetas, values, maximize=True)
    p_min = max(0.0, _refine_extremum(probability, thetas, values, maximize=False))
    total = p_max + p_min
    visibility = min(1.0, max(0.0, (p_max - p_min) / total)) if total > 0.0 else 0.0
    reference = visibility_closed_form_phi(config.gain.g, abs(config.alpha0), config.phi)
    logger.info(
        "Visibility sweep complete",
        mode=config.postselect_mode.kind.value,
        g=config.gain.g,
        alpha0=abs(config.alpha0),
        visibility=visibility,
        reference=reference,
    )
    return VisibilityResult(
        samples=list(zip(thetas, values, strict=True)),
        p_max=p_max,
        p_min=p_min,
        visibility=visibility,
        reference_visibility=reference,
        mode=config.postselect_mode,
    )


def idler_which_path_report(config: ExperimentConfig) -> WhichPathReport:
    """Idler displacement, branch overlap and signal change for a config."""
    magnitude = abs(config.alpha0)
    branch_overlap = abs(overlap(run_branch(config, 1, -1), run_branch(config, -1, 1)))
    return WhichPathReport(
        idler_displacement=config.gain.coupling * magnitude,
        branch_overlap=branch_overlap,
        signal_shift=config.gain.epsilon * magnitude,
    )
