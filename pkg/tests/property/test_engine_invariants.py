"""Property-based tests for engine invariants.

**Feature: catamp, Property 2: Fock Engine Invariants**
**Feature: catamp, Property 3: Interferometer Invariants**
**Feature: catamp, Property 4: Q-Function Bounds**
"""

import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from src.engine.analytic_q import build_q_terms, integrate_probability, q_value
from src.engine.fock import (
    apply_signal_phase,
    apply_two_mode_squeeze,
    coherent_vector,
    overlap,
    product_state,
)
from src.experiments.pipeline import accepted_probability
from src.models.data import ExperimentConfig, GainParam, Stage

# Strategies for generating test data
DIMS = 60
part_strategy = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
alpha_strategy = st.builds(complex, part_strategy, part_strategy)
squeeze_strategy = st.floats(min_value=0.0, max_value=0.5, allow_nan=False)
phase_strategy = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)
small_gain_strategy = st.sampled_from([1.0, 1.05, 1.1, 1.25])


def coherent_product(alpha: complex):
    return product_state(coherent_vector(alpha, DIMS), coherent_vector(0.0, DIMS))


@given(alpha=alpha_strategy, r=squeeze_strategy)
def test_squeeze_preserves_norm(alpha: complex, r: float) -> None:
    """
    **Feature: catamp, Property 2: Fock Engine Invariants**

    For any input supported well inside the box, the squeeze preserves the
    squared norm within its tail bound.
    """
    state = coherent_product(alpha)
    squeezed = apply_two_mode_squeeze(state, GainParam.from_squeeze(r))

    assert squeezed.tail_bound < 1e-10
    assert abs(squeezed.norm_squared() - state.norm_squared()) < squeezed.tail_bound + 1e-10


@given(alpha=alpha_strategy, r=squeeze_strategy)
def test_reverse_squeeze_is_inverse(alpha: complex, r: float) -> None:
    """
    **Feature: catamp, Property 2: Fock Engine Invariants**

    Squeezing with r and then with −r recovers the input.
    """
    state = coherent_product(alpha)
    gain = GainParam.from_squeeze(r)
    restored = apply_two_mode_squeeze(apply_two_mode_squeeze(state, gain), gain, reverse=True)

    assert np.max(np.abs(restored.amps - state.amps)) < 1e-8


@given(a=alpha_strategy, b=alpha_strategy)
def test_overlap_is_hermitian(a: complex, b: complex) -> None:
    """
    **Feature: catamp, Property 2: Fock Engine Invariants**

    ⟨a|b⟩ = ⟨b|a⟩* and coherent overlaps have modulus exp(−|a − b|²/2).
    """
    left, right = coherent_product(a), coherent_product(b)
    value = overlap(left, right)

    assert abs(value - overlap(right, left).conjugate()) < 1e-14
    assert abs(abs(value) - math.exp(-abs(a - b) ** 2 / 2)) < 1e-10


@given(alpha=alpha_strategy, phase=phase_strategy)
def test_signal_phase_is_periodic_and_unitary(alpha: complex, phase: float) -> None:
    """
    **Feature: catamp, Property 2: Fock Engine Invariants**

    The signal phase shift preserves the norm and is 2π-periodic.
    """
    state = coherent_product(alpha)
    shifted = apply_signal_phase(state, phase)
    wrapped = apply_signal_phase(state, phase + 2 * math.pi)

    assert abs(shifted.norm_squared() - state.norm_squared()) < 1e-13
    assert np.max(np.abs(shifted.amps - wrapped.amps)) < 1e-11


@given(theta=st.floats(min_value=0.0, max_value=2 * math.pi), g=small_gain_strategy)
def test_complementary_phases_share_the_branches(theta: float, g: float) -> None:
    """
    **Feature: catamp, Property 3: Interferometer Invariants**

    P(θ) + P(θ + π) is the total weight of the two accepted branches, 1/2,
    and every probability lies in [0, 1/2].
    """
    config = ExperimentConfig(alpha0=1.0, gain=GainParam.from_gain(g), theta=theta)
    shifted = ExperimentConfig(alpha0=1.0, gain=GainParam.from_gain(g), theta=theta + math.pi)
    first, second = accepted_probability(config), accepted_probability(shifted)

    assert abs(first + second - 0.5) < 1e-9
    assert -1e-12 <= first <= 0.5 + 1e-9


@given(
    re_alpha=st.floats(min_value=-4.0, max_value=4.0),
    im_alpha=st.floats(min_value=-4.0, max_value=4.0),
    re_beta=st.floats(min_value=-4.0, max_value=4.0),
    im_beta=st.floats(min_value=-4.0, max_value=4.0),
    g=small_gain_strategy,
)
def test_q_function_is_bounded(
    re_alpha: float,
    im_alpha: float,
    re_beta: float,
    im_beta: float,
    g: float,
) -> None:
    """
    **Feature: catamp, Property 4: Q-Function Bounds**

    For any point, 0 ≤ Q(α, β) ≤ ‖ψ‖²/π² at every stage.
    """
    config = ExperimentConfig(alpha0=1.5j, gain=GainParam.from_gain(g), theta=0.3)
    for stage in Stage:
        terms = build_q_terms(config, stage)
        norm = integrate_probability(terms)
        value = q_value(terms, complex(re_alpha, im_alpha), complex(re_beta, im_beta))
        assert -1e-15 <= value <= norm / math.pi**2 + 1e-12
