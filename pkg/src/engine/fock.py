"""Truncated two-mode Fock-space engine.

States are amplitude tensors ``amps[n, m] = ⟨n_signal, m_idler|ψ⟩`` on a box
of ``dims = (N_s, N_i)`` number states. Every operation is a pure function
returning a new :class:`TwoModeState`; amplitude arrays are read-only.

The two-mode squeezer S(r) = exp(r(ab − a†b†)) is applied in its factored
form

    S = (1/g) exp(−t a†b†) g^{−(n_a + n_b)} exp(t ab),   g = cosh r, t = tanh r,

rightmost factor first. The lowering series and the diagonal scaling are
exact on a truncated vector; the raising series is cut at the box and the
probability it pushes out is added to ``tail_bound``. A dense
matrix-exponential oracle is provided for small boxes.

Example:
    >>> from src.engine.fock import apply_two_mode_squeeze, coherent_vector, product_state
    >>> from src.models.data import GainParam
    >>>
    >>> state = product_state(coherent_vector(0.5, 30), coherent_vector(0.0, 30))
    >>> amplified = apply_two_mode_squeeze(state, GainParam.from_gain(1.25))
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
import structlog
from scipy import integrate, linalg

from src import metrics
from src.models.data import GainParam, Mode, Quadrature, QuadratureSpec

logger = structlog.get_logger(__name__)


class FockError(Exception):
    """Base exception for Fock-engine errors."""

    pass


class StateError(FockError):
    """Raised when a state or amplitude is non-finite or malformed."""

    pass


class DimensionMismatchError(FockError):
    """Raised when two states live on different boxes."""

    pass


class TruncationOverflowError(FockError):
    """Raised when the probability lost at the box boundary is too large."""

    def __init__(self, message: str, tail_bound: float, threshold: float):
        super().__init__(message)
        self.tail_bound = tail_bound
        self.threshold = threshold


class OracleLimitError(FockError):
    """Raised when the dense oracle is asked for a box above its limit."""

    pass


class ZeroNormError(FockError):
    """Raised when a normalized moment is requested of a zero-norm state."""

    pass


@dataclass(frozen=True)
class EngineSettings:
    """Numerical settings of the Fock engine.

    Attributes:
        tail_threshold: Largest tolerated tail bound after a squeeze.
        oracle_limit: Largest per-mode dimension accepted by the oracle.
        oracle_padding: Extra levels per mode used inside the oracle.
        pdf_points: Points of the homodyne quadrature grid.
    """

    tail_threshold: float = 1e-6
    oracle_limit: int = 16
    oracle_padding: int = 16
    pdf_points: int = 2048


DEFAULT_SETTINGS = EngineSettings()


def _read_only(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.complex128)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Single-mode amplitude vector with the probability it leaves out."""

    amps: np.ndarray
    tail: float = 0.0

    def __post_init__(self) -> None:
        amps = _read_only(self.amps)
        if amps.ndim != 1 or amps.size < 1:
            raise StateError(f"mode vector must be 1-D and non-empty (got shape {amps.shape})")
        if not np.all(np.isfinite(amps)):
            raise StateError("mode vector has non-finite amplitudes")
        object.__setattr__(self, "amps", amps)

    @property
    def size(self) -> int:
        return int(self.amps.size)


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Joint signal-idler state on a truncated number basis.

    Attributes:
        amps: Complex amplitudes, ``amps[n, m]`` for n signal and m idler photons.
        tail_bound: Upper bound on the probability truncated away so far.
    """

    amps: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        amps = _read_only(self.amps)
        if amps.ndim != 2 or min(amps.shape) < 1:
            raise StateError(f"state amplitudes must be a non-empty 2-D array (got {amps.shape})")
        if not np.all(np.isfinite(amps)):
            raise StateError("state has non-finite amplitudes")
        if not (math.isfinite(self.tail_bound) and self.tail_bound >= 0.0):
            raise StateError(f"tail bound must be finite and non-negative (got {self.tail_bound})")
        object.__setattr__(self, "amps", amps)

    @property
    def dims(self) -> tuple[int, int]:
        return int(self.amps.shape[0]), int(self.amps.shape[1])

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def photon_number(self, mode: Mode = Mode.SIGNAL, normalize: bool = False) -> float:
        """Mean photon number of one mode."""
        populations = np.abs(self.amps) ** 2
        if mode is Mode.SIGNAL:
            value = float(np.arange(self.dims[0]) @ populations.sum(axis=1))
        else:
            value = float(populations.sum(axis=0) @ np.arange(self.dims[1]))
        if normalize:
            value /= _checked_norm(self)
        return value

    def padded(self, signal_dim: int, idler_dim: int) -> "TwoModeState":
        """Embed the state in a larger box."""
        ns, ni = self.dims
        if signal_dim < ns or idler_dim < ni:
            raise DimensionMismatchError(
                f"cannot pad {self.dims} down to {(signal_dim, idler_dim)}"
            )
        amps = np.zeros((signal_dim, idler_dim), dtype=np.complex128)
        amps[:ns, :ni] = self.amps
        return TwoModeState(amps, self.tail_bound)

    def scaled(self, factor: complex) -> "TwoModeState":
        factor = complex(factor)
        return TwoModeState(self.amps * factor, self.tail_bound * abs(factor) ** 2)

    def normalized(self) -> "TwoModeState":
        """The state rescaled to unit norm.

        Raises:
            ZeroNormError: If the state has zero norm.
        """
        return self.scaled(1.0 / math.sqrt(_checked_norm(self)))


def _checked_norm(state: TwoModeState) -> float:
    norm = state.norm_squared()
    if norm <= 0.0:
        raise ZeroNormError("cannot normalize a zero-norm state")
    return norm


def _check_finite_complex(value: complex, name: str) -> complex:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise StateError(f"{name} must be finite (got {value})")
    return value


def coherent_matrix(alphas: Iterable[complex], n: int) -> np.ndarray:
    """Rows of coherent amplitudes, one row per alpha.

    ``result[j, k] = e^{−|α_j|²/2} α_j^k / √(k!)`` for k < n.
    """
    if n < 1:
        raise StateError(f"number of levels must be ≥ 1 (got {n})")
    alpha = np.asarray(list(alphas), dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(alpha)):
        raise StateError("coherent amplitudes must be finite")
    factors = np.ones((alpha.size, n), dtype=np.complex128)
    if n > 1:
        factors[:, 1:] = alpha[:, None] / np.sqrt(np.arange(1, n))[None, :]
    return np.exp(-0.5 * np.abs(alpha) ** 2)[:, None] * np.cumprod(factors, axis=1)


def coherent_vector(alpha: complex, n: int) -> ModeVector:
    """Coherent state |α⟩ truncated to n levels.

    The reported tail is 1 − Σ|c_k|², clamped at 0.
    """
    alpha = _check_finite_complex(alpha, "alpha")
    amps = coherent_matrix([alpha], n)[0]
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    return ModeVector(amps, tail)


def number_vector(k: int, n: int) -> ModeVector:
    """Number state |k⟩ on n levels."""
    if not 0 <= k < n:
        raise StateError(f"number state {k} does not fit in {n} levels")
    amps = np.zeros(n, dtype=np.complex128)
    amps[k] = 1.0
    return ModeVector(amps)


def product_state(signal: ModeVector, idler: ModeVector) -> TwoModeState:
    """Product state signal ⊗ idler; the tails add."""
    return TwoModeState(np.outer(signal.amps, idler.amps), signal.tail + idler.tail)


def superpose(terms: Sequence[tuple[complex, TwoModeState]]) -> TwoModeState:
    """Linear combination Σ c_j ψ_j of states on the same box.

    The tail bound of the sum is (Σ |c_j| √tail_j)².
    """
    if not terms:
        raise StateError("superposition needs at least one term")
    dims = terms[0][1].dims
    amps = np.zeros(dims, dtype=np.complex128)
    tail_amplitude = 0.0
    for coefficient, state in terms:
        if state.dims != dims:
            raise DimensionMismatchError(f"cannot superpose {state.dims} with {dims}")
        amps += complex(coefficient) * state.amps
        tail_amplitude += abs(coefficient) * math.sqrt(state.tail_bound)
    return TwoModeState(amps, tail_amplitude**2)


def apply_signal_phase(state: TwoModeState, phase: float) -> TwoModeState:
    """Phase shift e^{i·phase·n} on the signal mode."""
    phases = np.exp(1j * float(phase) * np.arange(state.dims[0]))
    return TwoModeState(state.amps * phases[:, None], state.tail_bound)


def factored_coefficients(gain: GainParam, reverse: bool = False) -> tuple[float, float]:
    """Exponent coefficients (lowering, raising) of the factored squeezer.

    ``reverse`` gives the coefficients of S(−r) = S(r)†.
    """
    t = gain.transmission
    if reverse:
        t = -t
    return t, -t


def _ladder_weights(ns: int, ni: int) -> np.ndarray:
    return np.sqrt(np.arange(1, ns))[:, None] * np.sqrt(np.arange(1, ni))[None, :]


def _lower_pair(amps: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # (ab ψ)[n, m] = √(n+1) √(m+1) ψ[n+1, m+1]
    out = np.zeros_like(amps)
    out[:-1, :-1] = weights * amps[1:, 1:]
    return out


def _raise_pair(amps: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # (a†b† ψ)[n, m] = √n √m ψ[n−1, m−1], cut at the box
    out = np.zeros_like(amps)
    out[1:, 1:] = weights * amps[:-1, :-1]
    return out


def _exp_series(amps: np.ndarray, coefficient: float, step, weights: np.ndarray) -> np.ndarray:
    result = amps.copy()
    term = amps
    for k in range(1, min(amps.shape)):
        term = step(term, weights) * (coefficient / k)
        if not np.any(term):
            break
        result += term
    return result


def _account_tail(
    state: TwoModeState,
    amps: np.ndarray,
    method: str,
    settings: EngineSettings,
) -> TwoModeState:
    discarded = max(0.0, state.norm_squared() - float(np.vdot(amps, amps).real))
    tail = state.tail_bound + discarded
    metrics.record_squeeze(method, tail)
    if tail > settings.tail_threshold:
        raise TruncationOverflowError(
            f"truncation tail {tail:.3e} exceeds {settings.tail_threshold:.1e} "
            f"on box {state.dims}; increase dims",
            tail_bound=tail,
            threshold=settings.tail_threshold,
        )
    return TwoModeState(amps, tail)


def apply_two_mode_squeeze(
    state: TwoModeState,
    gain: GainParam,
    *,
    reverse: bool = False,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> TwoModeState:
    """Apply the two-mode squeezer S(r) with cosh r = g.

    Args:
        state: Input state.
        gain: Amplifier gain.
        reverse: Apply S(−r) instead, the inverse squeeze.
        settings: Engine settings; ``tail_threshold`` bounds the accumulated tail.

    Returns:
        The squeezed state with the discarded probability added to its tail bound.

    Raises:
        TruncationOverflowError: If the tail bound exceeds the threshold.
    """
    lowering, raising = factored_coefficients(gain, reverse)
    ns, ni = state.dims
    weights = _ladder_weights(ns, ni)
    amps = _exp_series(state.amps, lowering, _lower_pair, weights)
    g = gain.g
    amps = amps * (g ** -np.arange(ns, dtype=float))[:, None]
    amps = amps * (g ** -np.arange(ni, dtype=float))[None, :] / g
    amps = _exp_series(amps, raising, _raise_pair, weights)
    result = _account_tail(state, amps, "factored", settings)
    logger.debug(
        "Applied two-mode squeeze",
        g=g,
        reverse=reverse,
        dims=state.dims,
        tail_bound=result.tail_bound,
    )
    return result


def _annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)


def squeeze_oracle(
    state: TwoModeState,
    r: float,
    *,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> TwoModeState:
    """Apply exp(r(ab − a†b†)) by a dense matrix exponential.

    The generator is built on the box padded by ``settings.oracle_padding``
    levels per mode and the result is projected back, so the oracle matches
    the infinite-space squeezer restricted to the box.

    Raises:
        OracleLimitError: If either dimension exceeds ``settings.oracle_limit``.
    """
    ns, ni = state.dims
    if max(ns, ni) > settings.oracle_limit:
        raise OracleLimitError(
            f"oracle limited to {settings.oracle_limit} levels per mode (got {state.dims})"
        )
    ps, pi_ = ns + settings.oracle_padding, ni + settings.oracle_padding
    a = np.kron(_annihilation(ps), np.eye(pi_))
    b = np.kron(np.eye(ps), _annihilation(pi_))
    pair = a @ b
    generator = float(r) * (pair - pair.T)
    padded = state.padded(ps, pi_).amps.reshape(-1)
    evolved = (linalg.expm(generator) @ padded).reshape(ps, pi_)[:ns, :ni]
    return _account_tail(state, evolved, "oracle", settings)


def overlap(a: TwoModeState, b: TwoModeState) -> complex:
    """Inner product ⟨a|b⟩."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"overlap of states with dims {a.dims} and {b.dims}")
    return complex(np.vdot(a.amps, b.amps))


def _mode_major(state: TwoModeState, mode: Mode) -> np.ndarray:
    return state.amps if mode is Mode.SIGNAL else state.amps.T


def quadrature_moment(
    state: TwoModeState,
    spec: QuadratureSpec,
    order: int,
    normalize: bool = False,
) -> float:
    """First or second moment of a quadrature.

    Uses ⟨x⟩ = √2 Re⟨a⟩, ⟨p⟩ = √2 Im⟨a⟩ and
    ⟨x²⟩ = Re⟨a²⟩ + ⟨n⟩ + ½⟨ψ|ψ⟩, ⟨p²⟩ = −Re⟨a²⟩ + ⟨n⟩ + ½⟨ψ|ψ⟩.

    Raises:
        ZeroNormError: If ``normalize`` is set and the state has zero norm.
    """
    amps = _mode_major(state, spec.mode)
    levels = np.sqrt(np.arange(amps.shape[0], dtype=float))
    lowered = np.vdot(amps[:-1], levels[1:, None] * amps[1:])
    if order == 1:
        value = math.sqrt(2.0) * (lowered.real if spec.which is Quadrature.X else lowered.imag)
    elif order == 2:
        twice = np.vdot(amps[:-2], (levels[1:-1] * levels[2:])[:, None] * amps[2:])
        populations = (np.abs(amps) ** 2).sum(axis=1)
        number = float(np.arange(amps.shape[0]) @ populations)
        sign = 1.0 if spec.which is Quadrature.X else -1.0
        value = sign * twice.real + number + 0.5 * float(populations.sum())
    else:
        raise ValueError(f"order must be 1 or 2 (got {order})")
    if normalize:
        value /= _checked_norm(state)
    return float(value)


def apply_quadrature(state: TwoModeState, spec: QuadratureSpec) -> TwoModeState:
    """Apply a quadrature operator exactly.

    The selected mode grows by one level so that the raising part of the
    operator is not cut off.
    """
    amps = _mode_major(state, spec.mode)
    n = amps.shape[0]
    levels = np.sqrt(np.arange(n + 1, dtype=float))
    lowered = np.zeros((n + 1, amps.shape[1]), dtype=np.complex128)
    lowered[: n - 1] = levels[1:n, None] * amps[1:]
    raised = np.zeros_like(lowered)
    raised[1:] = levels[1:, None] * amps
    if spec.which is Quadrature.X:
        out = (lowered + raised) / math.sqrt(2.0)
    else:
        out = (lowered - raised) / (1j * math.sqrt(2.0))
    if spec.mode is Mode.IDLER:
        out = out.T
    return TwoModeState(out, state.tail_bound)


def hermite_functions(n: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_{n−1} at x, shape (n, len(x))."""
    x = np.asarray(x, dtype=float).reshape(-1)
    h = np.empty((n, x.size))
    h[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if n > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for k in range(1, n - 1):
        h[k + 1] = math.sqrt(2.0 / (k + 1)) * x * h[k] - math.sqrt(k / (k + 1)) * h[k - 1]
    return h


def quadrature_grid(signal_dim: int, settings: EngineSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Default x grid, |x| ≤ √(2 N_s) + 4."""
    extent = math.sqrt(2.0 * signal_dim) + 4.0
    return np.linspace(-extent, extent, settings.pdf_points)


def signal_quadrature_pdf(state: TwoModeState, grid: Sequence[float] | np.ndarray) -> np.ndarray:
    """Probability density of the signal x quadrature, idler traced out."""
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise StateError("quadrature grid must be finite")
    wavefunctions = hermite_functions(state.dims[0], grid).T @ state.amps
    return (np.abs(wavefunctions) ** 2).sum(axis=1)


def homodyne_accept_prob(
    state: TwoModeState,
    threshold: float,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> float:
    """Probability that the signal x lies above ``threshold``.

    Integrates the quadrature density with the trapezoid rule on
    ``settings.pdf_points`` points between the threshold, clipped to the
    default grid, and the upper grid edge.
    """
    extent = math.sqrt(2.0 * state.dims[0]) + 4.0
    lower = max(float(threshold), -extent)
    if lower >= extent:
        return 0.0
    grid = np.linspace(lower, extent, settings.pdf_points)
    return float(integrate.trapezoid(signal_quadrature_pdf(state, grid), grid))
