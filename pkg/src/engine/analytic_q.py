"""Closed-form Husimi Q-function engine.

Every amplitude of the interferometer is a coherent branch
``w · U(χ) S(r) |γ⟩⊗|0⟩``; its projection on ⟨α, β| is a Gaussian in
(α, β). The Q function of a superposition of branches is therefore a sum of
Gaussian terms

    prefactor · exp(c_αα|α|² + c_ββ|β|² + uα* + u′α + wβ* + w′β + mα*β* + m′αβ + c₀),

one per (ket branch, bra branch) pair. For a ket branch (γ₁, χ₁, w₁) and a
bra branch (γ₂, χ₂, w₂), with g = cosh r and t = tanh r:

    prefactor = w₁ w₂* / (π² g²),     c_αα = c_ββ = −1,
    u  = e^{iχ₁} γ₁ / g,              u′ = e^{−iχ₂} γ₂* / g,
    m  = −t e^{iχ₁},                  m′ = −t e^{−iχ₂},
    w  = w′ = 0,                      c₀ = −(|γ₁|² + |γ₂|²)/2.

Terms are integrated exactly with ∫d²z exp(−k|z|² + az* + bz) = (π/k) e^{ab/k},
first over β and then over α.
"""

import cmath
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
import structlog
from scipy import integrate

from src.engine.fock import TwoModeState, apply_two_mode_squeeze, coherent_matrix
from src.models.data import ExperimentConfig, GainParam, Stage

logger = structlog.get_logger(__name__)

# Largest imaginary part tolerated in a summed Q value or probability.
IMAGINARY_TOLERANCE = 1e-12

TERM_LABELS = ("++", "+-", "-+", "--")


class AnalyticQError(Exception):
    """Base exception for the analytic Q engine."""

    pass


class DivergentTermError(AnalyticQError):
    """Raised when a Gaussian term has no finite integral."""

    pass


class ImaginaryResidueError(AnalyticQError, AssertionError):
    """Raised when a quantity that must be real has an imaginary part."""

    def __init__(self, message: str, residue: float):
        super().__init__(message)
        self.residue = residue


@dataclass(frozen=True)
class GaussianQTerm:
    """One Gaussian component of a two-mode Q function."""

    prefactor: complex
    c_aa: complex = -1.0
    c_bb: complex = -1.0
    u: complex = 0.0
    u_prime: complex = 0.0
    w: complex = 0.0
    w_prime: complex = 0.0
    m: complex = 0.0
    m_prime: complex = 0.0
    c0: complex = 0.0

    def exponent(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=np.complex128)
        beta = np.asarray(beta, dtype=np.complex128)
        alpha_c = np.conj(alpha)
        beta_c = np.conj(beta)
        return (
            self.c_aa * alpha * alpha_c
            + self.c_bb * beta * beta_c
            + self.u * alpha_c
            + self.u_prime * alpha
            + self.w * beta_c
            + self.w_prime * beta
            + self.m * alpha_c * beta_c
            + self.m_prime * alpha * beta
            + self.c0
        )

    def evaluate(self, alpha, beta):
        """Complex value of the term; broadcasts over array arguments."""
        return self.prefactor * np.exp(self.exponent(alpha, beta))

    def beta_reduced(self) -> tuple[complex, complex, complex, complex, complex]:
        """Coefficients after integrating out β.

        Returns ``(scale, c_aa, u, u′, c₀)`` such that the β integral equals
        ``scale · exp(c_aa|α|² + uα* + u′α + c₀)``.

        Raises:
            DivergentTermError: If the β integral diverges.
        """
        k = -complex(self.c_bb)
        if abs(self.m * self.m_prime) >= 1.0 or k.real <= 0.0:
            raise DivergentTermError(
                f"β integral diverges (|m m′| = {abs(self.m * self.m_prime):.6g}, k = {k})"
            )
        c_aa = self.c_aa + self.m * self.m_prime / k
        u = self.u + self.m * self.w_prime / k
        u_prime = self.u_prime + self.w * self.m_prime / k
        c0 = self.c0 + self.w * self.w_prime / k
        return self.prefactor * math.pi / k, c_aa, u, u_prime, c0


@dataclass(frozen=True)
class QTermSet:
    """The four Gaussian terms of a two-branch Q function.

    Labels are (ket branch sign, bra branch sign). The ``+-`` and ``-+``
    terms are complex conjugates of each other, so their sum is real.
    """

    pp: GaussianQTerm
    pm: GaussianQTerm
    mp: GaussianQTerm
    mm: GaussianQTerm
    stage: Stage

    def items(self) -> Iterator[tuple[str, GaussianQTerm]]:
        yield from zip(TERM_LABELS, (self.pp, self.pm, self.mp, self.mm), strict=True)

    def __getitem__(self, label: str) -> GaussianQTerm:
        return dict(self.items())[label]


@dataclass(frozen=True)
class _Branch:
    gamma: complex
    chi: float
    weight: complex


def _branch_term(ket: _Branch, bra: _Branch, gain: GainParam) -> GaussianQTerm:
    g = gain.g
    t = gain.transmission
    ket_phase = cmath.exp(1j * ket.chi)
    bra_phase = cmath.exp(-1j * bra.chi)
    return GaussianQTerm(
        prefactor=complex(ket.weight) * complex(bra.weight).conjugate() / (math.pi**2 * g * g),
        u=ket_phase * ket.gamma / g,
        u_prime=bra_phase * bra.gamma.conjugate() / g,
        m=-t * ket_phase,
        m_prime=-t * bra_phase,
        c0=-(abs(ket.gamma) ** 2 + abs(bra.gamma) ** 2) / 2.0,
    )


def build_q_terms(config: ExperimentConfig, stage: Stage) -> QTermSet:
    """Q-function terms of the cat state at one stage of the interferometer.

    ``PREP`` is the cat before the amplifier, ``POST_AMPLIFIER`` the amplified
    cat, and ``POST_ANALYZER`` the two accepted analyzer branches: the
    preparation +φ branch followed by the analyzer −φ shift, and the
    preparation −φ branch followed by +φ and the interferometer phase θ.
    """
    gain = GainParam.from_gain(1.0) if stage is Stage.PREP else config.gain
    phase = cmath.exp(1j * config.phi)
    plus_gamma = phase * config.alpha0
    minus_gamma = phase.conjugate() * config.alpha0
    if stage is Stage.POST_ANALYZER:
        weight = 1.0 / (2.0 * math.sqrt(2.0))
        plus = _Branch(plus_gamma, -config.phi, complex(weight))
        minus = _Branch(minus_gamma, config.phi, weight * cmath.exp(1j * config.theta))
    else:
        weight = complex(1.0 / math.sqrt(2.0))
        plus = _Branch(plus_gamma, 0.0, weight)
        minus = _Branch(minus_gamma, 0.0, weight)
    return QTermSet(
        pp=_branch_term(plus, plus, gain),
        pm=_branch_term(plus, minus, gain),
        mp=_branch_term(minus, plus, gain),
        mm=_branch_term(minus, minus, gain),
        stage=stage,
    )


def _real_part(value, what: str):
    residue = float(np.max(np.abs(np.imag(value))))
    if residue > IMAGINARY_TOLERANCE:
        raise ImaginaryResidueError(
            f"{what} has imaginary residue {residue:.3e}; term coefficients are inconsistent",
            residue=residue,
        )
    return np.real(value)


def q_value(terms: QTermSet, alpha, beta):
    """Two-mode Q(α, β) as the real sum of the four terms.

    Raises:
        ImaginaryResidueError: If the summed terms are not real.
    """
    total = sum(term.evaluate(alpha, beta) for _, term in terms.items())
    real = _real_part(total, "Q value")
    return float(real) if np.ndim(real) == 0 else real


def integrate_term(term: GaussianQTerm) -> complex:
    """Closed-form ∫d²α d²β of one Gaussian term.

    Raises:
        DivergentTermError: If either Gaussian integral diverges.
    """
    scale, c_aa, u, u_prime, c0 = term.beta_reduced()
    kappa = -complex(c_aa)
    if kappa.real <= 0.0:
        raise DivergentTermError(f"α integral diverges (κ = {kappa})")
    return complex(scale * (math.pi / kappa) * cmath.exp(c0 + u * u_prime / kappa))


def integrate_probability(terms: QTermSet) -> float:
    """Total probability ∫Q d²α d²β of a term set."""
    total = sum(integrate_term(term) for _, term in terms.items())
    return float(_real_part(total, "integrated probability"))


def numeric_window(term: GaussianQTerm, half_width: float = 6.0) -> tuple[complex, float]:
    """Centre of the α window and the half-width of the β window for a term."""
    _, c_aa, u, u_prime, _ = term.beta_reduced()
    kappa = -complex(c_aa)
    centre = 0.5 * (u / kappa + (u_prime / kappa).conjugate())
    spread = max(abs(term.m), abs(term.m_prime)) * abs(centre)
    return complex(centre), half_width + spread + max(abs(term.w), abs(term.w_prime))


def integrate_term_numeric(
    term: GaussianQTerm,
    points: int = 61,
    half_width: float = 6.0,
) -> complex:
    """Tensor-product trapezoid ∫d²α d²β of one term.

    The α box of half-width ``half_width`` is centred on the term's Gaussian
    envelope; the β box is centred on 0 and widened by the idler
    displacement. The four-dimensional integrand is evaluated one Re α
    slice at a time.
    """
    centre, beta_half_width = numeric_window(term, half_width)
    offsets = np.linspace(-half_width, half_width, points)
    alpha_re = centre.real + offsets
    alpha_im = centre.imag + offsets
    beta_axis = np.linspace(-beta_half_width, beta_half_width, points)
    beta = beta_axis[:, None] + 1j * beta_axis[None, :]
    slices = np.empty(points, dtype=np.complex128)
    for index, re in enumerate(alpha_re):
        alpha = re + 1j * alpha_im
        values = term.evaluate(alpha[:, None, None], beta[None, :, :])
        over_beta_im = integrate.trapezoid(values, beta_axis, axis=2)
        over_beta = integrate.trapezoid(over_beta_im, beta_axis, axis=1)
        slices[index] = integrate.trapezoid(over_beta, alpha_im)
    return complex(integrate.trapezoid(slices, alpha_re))


def visibility_closed_form(g: float, alpha0_mag: float) -> float:
    """Visibility at φ = π/2: exp(−2|α₀|²(g²−1)/(2g²−1)) / (2g²−1)."""
    if not g >= 1.0:
        raise ValueError(f"g must be ≥ 1 (got {g})")
    denominator = 2.0 * g * g - 1.0
    return math.exp(-2.0 * alpha0_mag**2 * (g * g - 1.0) / denominator) / denominator


def visibility_closed_form_phi(g: float, alpha0_mag: float, phi: float) -> float:
    """Visibility for any conditional phase φ.

    v = |exp(|α₀|²(1/(g²λ) − 1)) / (g²λ)| with λ = 1 − tanh²r e^{−2iφ};
    equal to :func:`visibility_closed_form` at φ = π/2.
    """
    if not g >= 1.0:
        raise ValueError(f"g must be ≥ 1 (got {g})")
    t2 = (g * g - 1.0) / (g * g)
    z = g * g * (1.0 - t2 * cmath.exp(-2j * phi))
    return abs(cmath.exp(alpha0_mag**2 * (1.0 / z - 1.0)) / z)


def visibility_small_gain_limit(epsilon: float, alpha0_mag: float) -> float:
    """Leading small-gain form exp(−4ε|α₀|²) of the φ = π/2 visibility."""
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be ≥ 0 (got {epsilon})")
    return math.exp(-4.0 * epsilon * alpha0_mag**2)


def marginal_q_grid(state: TwoModeState, alphas: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Idler-traced Q̃(α) = (1/π) Σ_m |⟨α|ψ_m⟩|² at every α."""
    alphas = np.asarray(alphas, dtype=np.complex128).reshape(-1)
    projections = coherent_matrix(alphas, state.dims[0]).conj() @ state.amps
    return (np.abs(projections) ** 2).sum(axis=1) / math.pi


def marginal_q(state: TwoModeState, alpha: complex) -> float:
    """Idler-traced Q̃ at a single α."""
    return float(marginal_q_grid(state, [alpha])[0])


def marginal_q_terms(terms: QTermSet, alpha):
    """Idler-traced Q̃(α) of a term set, β integrated in closed form."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    total = np.zeros(alpha.shape, dtype=np.complex128)
    for _, term in terms.items():
        scale, c_aa, u, u_prime, c0 = term.beta_reduced()
        total = total + scale * np.exp(
            c_aa * np.abs(alpha) ** 2 + u * np.conj(alpha) + u_prime * alpha + c0
        )
    real = _real_part(total, "marginal Q")
    return float(real) if np.ndim(real) == 0 else real


def amplifier_scaling_check(
    state_in: TwoModeState,
    gain: GainParam,
    grid: Sequence[complex] | np.ndarray,
) -> float:
    """Largest relative deviation from Q̃_out(α) = Q̃_in(α/g)/g² over ``grid``.

    Deviations are measured relative to the predicted value, floored at
    10⁻⁶ of the largest input Q̃ sampled.

    Raises:
        AnalyticQError: If the idler of ``state_in`` is not in vacuum.
    """
    idler_excited = float(np.sum(np.abs(state_in.amps[:, 1:]) ** 2))
    if idler_excited > 1e-12 * max(state_in.norm_squared(), 1e-300):
        raise AnalyticQError("amplifier scaling law needs the idler in vacuum")
    grid = np.asarray(grid, dtype=np.complex128).reshape(-1)
    g = gain.g
    state_out = apply_two_mode_squeeze(state_in, gain)
    q_in = marginal_q_grid(state_in, grid / g)
    predicted = q_in / (g * g)
    observed = marginal_q_grid(state_out, grid)
    floor = max(1e-6 * float(np.max(q_in)), 1e-300) if q_in.size else 1e-300
    denominator = np.maximum(floor, predicted)
    error = float(np.max(np.abs(observed - predicted) / denominator)) if grid.size else 0.0
    logger.debug("Amplifier scaling check", g=g, points=int(grid.size), max_relative_error=error)
    return error
