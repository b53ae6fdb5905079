import math

import numpy as np
import pytest
from scipy import stats

from qdistill import cavity
from qdistill.cavity import (
    Coherent,
    GaussianParticleState,
    ModelParams,
    NumberOne,
    coefficients,
    initial_density,
    kernel_coherent,
    kernel_number1,
    make_kernel,
    purity_asym_formula,
    purity_closed_coherent,
    selected_momentum,
    survival_asym_number1,
    survival_closed_coherent,
)
from qdistill.errors import DegenerateMaximum, InvalidState, StroboscopicDecoupling
from qdistill.spectral import (
    density_purity,
    density_trace,
    laplace_data,
    locate_peak,
    purity_asymptotic,
    purity_exact,
    survival_asymptotic,
    survival_exact,
)

G2 = 100 * math.sin(math.pi / 8) ** 2


def random_admissible(rng):
    params = ModelParams(rng.uniform(0.2, 2.5), rng.uniform(1.0, 8.0),
                         Coherent(rng.uniform(0.0, 1.5), rng.uniform(0, 2 * math.pi)))
    dp0, pi0 = rng.uniform(0.1, 0.5), rng.uniform(0.3, 1.0)
    dx0 = rng.uniform(1.0, 3.0) / (2 * dp0 * pi0)
    state = GaussianParticleState(rng.uniform(-0.3, 0.3), rng.uniform(-2, 2), dp0, dx0, pi0)
    return params, state


# -- coefficients ----------------------------------------------------------------------


def test_coefficients_fig1():
    c = coefficients(ModelParams(math.pi / 4, 5.0, NumberOne()))
    assert c.g_tau_mod_sq == pytest.approx(14.64466, abs=1e-5)
    assert c.g_tau_mod_sq == pytest.approx(2 * (1 - math.cos(math.pi / 4)) * 25, rel=1e-14)
    assert abs(c.g_tau) ** 2 == pytest.approx(c.g_tau_mod_sq, abs=1e-12)
    assert c.xi_tau == pytest.approx(1 - 50 * (1 - math.sin(math.pi / 4) / (math.pi / 4)))


def test_coefficients_half_period():
    c = coefficients(ModelParams(math.pi, 1.0, NumberOne()))
    assert c.g_tau == pytest.approx(2.0, abs=1e-15)
    assert c.g_tau_mod_sq == pytest.approx(4.0, abs=1e-15)


def test_coefficients_short_time_limit():
    c = coefficients(ModelParams(1e-6, 5.0, NumberOne()))
    assert c.xi_tau == pytest.approx(1.0, abs=1e-9)
    assert abs(c.g_tau) < 1e-5


def test_stroboscopic_decoupling_rejected():
    with pytest.raises(StroboscopicDecoupling):
        ModelParams(2 * math.pi, 5.0, NumberOne())
    with pytest.raises(ValueError):
        ModelParams(-1.0, 5.0, NumberOne())


# -- coherent kernel -----------------------------------------------------------------


def test_coherent_b_real_part():
    for gamma in (0.0, 0.7, math.pi / 2, math.pi, 4.0):
        params = ModelParams(0.9, 3.0, Coherent(1.3, gamma))
        expected = -4 * 3.0 * 1.3 * math.sin(0.45) ** 2 * math.cos(gamma)
        assert cavity.coherent_b(params).real == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.0, math.pi])
def test_unit_modulus_at_selected_momentum(gamma):
    params = ModelParams(math.pi / 4, 5.0, Coherent(1.0, gamma))
    kernel = kernel_coherent(params)
    p_star = selected_momentum(params)
    assert kernel.modulus(np.array([p_star]))[0] == pytest.approx(1.0, abs=1e-12)
    assert p_star == pytest.approx(-0.2 if gamma == 0 else 0.2)


def test_fig1_selected_momentum(fig1_params):
    assert selected_momentum(fig1_params) == pytest.approx(0.2, abs=1e-15)
    assert selected_momentum(ModelParams(1.0, 5.0, Coherent(1.0, math.pi / 2))) == pytest.approx(0.0, abs=1e-15)
    assert selected_momentum(ModelParams(1.0, 5.0, NumberOne())) == 0.0
    with pytest.raises(DegenerateMaximum):
        selected_momentum(ModelParams(1.0, 0.0, Coherent(1.0, 0.0)))


def test_quadrature_gamma_decay_rate():
    params = ModelParams(math.pi / 4, 5.0, Coherent(1.0, math.pi / 2))
    kernel = kernel_coherent(params)
    grid = np.linspace(*kernel.bracket, 200001)
    grid_min = float(np.min(kernel.decay_rate(grid)))
    assert grid_min == pytest.approx(4 * math.sin(math.pi / 8) ** 2, abs=1e-8)
    assert grid_min == pytest.approx(0.585786, abs=1e-6)


def test_peak_consistency_grid():
    for wt in (0.3, math.pi / 4, 2.0):
        for g in (1.0, 5.0):
            for alpha in (0.0, 0.5, 1.0):
                for gamma in (0.0, 1.0, math.pi / 2, math.pi, 5.0):
                    params = ModelParams(wt, g, Coherent(alpha, gamma))
                    kernel = kernel_coherent(params)
                    assert locate_peak(kernel) == pytest.approx(selected_momentum(params), abs=1e-8)


def test_coherent_curvature(fig1_params):
    kernel = kernel_coherent(fig1_params)
    data = laplace_data(kernel, locate_peak(kernel))
    assert data.curvature == pytest.approx(2 * G2, rel=1e-6)
    assert data.curvature == pytest.approx(29.2893, abs=1e-4)


# -- number-state kernel --------------------------------------------------------------


def test_number_kernel_facts(fig2_params):
    kernel = kernel_number1(fig2_params)
    assert kernel.modulus(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-15)
    zeros = np.array([-1, 1]) / math.sqrt(G2)
    np.testing.assert_allclose(kernel.modulus(zeros), 0.0, atol=1e-15)
    lo, hi = kernel.bracket
    assert lo < zeros[0] and zeros[1] < hi
    data = laplace_data(kernel, locate_peak(kernel))
    assert data.e_star == pytest.approx(0.0, abs=1e-9)
    assert data.curvature == pytest.approx(6 * G2, rel=1e-6)


def test_kernel_dispatch(fig1_params, fig2_params):
    with pytest.raises(TypeError):
        kernel_coherent(fig2_params)
    with pytest.raises(TypeError):
        kernel_number1(fig1_params)
    assert make_kernel(fig2_params).bracket[0] < 0


# -- initial state -----------------------------------------------------------------


def test_invalid_state():
    with pytest.raises(InvalidState):
        GaussianParticleState(0.1, 0.0, 0.2, 1.0, 1 / math.sqrt(2))
    with pytest.raises(InvalidState):
        GaussianParticleState(0.1, 0.0, 0.2, 5.0, 1.2)
    with pytest.raises(InvalidState):
        GaussianParticleState(0.1, 0.0, -0.2, 5.0, 0.5)


def test_b_coeff():
    s = GaussianParticleState(0.0, 0.0, 0.5, 2.0, 0.5)
    assert s.b_coeff == pytest.approx(math.sqrt(4 * 4 * 0.25 * 0.25 - 1))
    assert GaussianParticleState(0.0, 0.0, 0.5, 1.0, 1.0).b_coeff == 0.0


def test_density_diagonal_is_normal(fig_state):
    rho = initial_density(fig_state)
    p = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(rho.diagonal(p), stats.norm(0.1, 0.2).pdf(p), rtol=1e-13)
    assert rho.support_center == 0.1
    assert rho.support_width == pytest.approx(0.2 * math.sqrt(2))


@pytest.mark.parametrize("x0,dx0", [(0.0, 5.0), (2.0, 3.6), (-1.0, 40.0)])
def test_density_trace_and_purity(x0, dx0):
    state = GaussianParticleState(0.1, x0, 0.2, dx0, 1 / math.sqrt(2))
    rho = initial_density(state)
    assert density_trace(rho) == pytest.approx(1.0, abs=1e-9)
    assert density_purity(rho) == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_position_moments():
    # <x> = x0 and Var(x) = dx0² recovered from the momentum kernel (ħ = 1)
    state = GaussianParticleState(0.1, 0.7, 0.2, 5.0, 0.6)
    rho = initial_density(state)
    h = 1e-4
    p = np.linspace(-2, 2, 4001)
    dp = p[1] - p[0]
    # <x> = ∫ i ∂_p ρ(p, p') |_{p'=p} dp
    d1 = (rho(p + h, p) - rho(p - h, p)) / (2 * h)
    mean_x = np.real(np.sum(1j * d1) * dp)
    assert mean_x == pytest.approx(0.7, abs=1e-6)
    d2 = (rho(p + h, p + h) - rho(p + h, p - h) - rho(p - h, p + h) + rho(p - h, p - h)) / (4 * h * h)
    second_x = np.real(np.sum(d2) * dp)
    assert second_x - mean_x**2 == pytest.approx(25.0, rel=1e-5)


# -- closed forms -------------------------------------------------------------------


def test_survival_closed_fig1(fig1_params, fig_state):
    assert survival_closed_coherent(fig1_params, fig_state, 0) == 1.0
    assert survival_closed_coherent(fig1_params, fig_state, 10) == pytest.approx(0.24993, abs=1e-5)


def test_purity_closed_fig1(fig1_params, fig_state):
    assert purity_closed_coherent(fig1_params, fig_state, 0) == pytest.approx(0.70711, abs=1e-5)
    assert purity_closed_coherent(fig1_params, fig_state, 10) == pytest.approx(
        math.sqrt(12.71573 / 13.71573), abs=1e-6)
    assert purity_closed_coherent(fig1_params, fig_state, 10) == pytest.approx(0.96286, abs=1e-5)
    pure = GaussianParticleState(0.1, 0.0, 0.2, 5.0, 1.0)
    for n in (0, 1, 50, 10**6):
        assert purity_closed_coherent(fig1_params, pure, n) == 1.0


def test_closed_forms_match_quadrature(fig1_params, fig_state):
    sets = [(fig1_params, fig_state)]
    rng = np.random.default_rng(20240601)
    sets += [random_admissible(rng) for _ in range(5)]
    for params, state in sets:
        kernel, rho = make_kernel(params, state), initial_density(state)
        for n in (0, 1, 2, 5, 10, 20, 50):
            p_closed = survival_closed_coherent(params, state, n)
            assert survival_exact(kernel, rho, n) == pytest.approx(p_closed, rel=1e-5)
            assert purity_exact(kernel, rho, n) == pytest.approx(
                purity_closed_coherent(params, state, n), abs=1e-5)


def test_decay_rate_off_criterion():
    params = ModelParams(math.pi / 4, 5.0, Coherent(1.0, math.pi / 2))
    state = GaussianParticleState(0.1, 0.0, 0.2, 5.0, 1 / math.sqrt(2))
    kernel, rho = make_kernel(params, state), initial_density(state)
    rate = 4 * math.sin(math.pi / 8) ** 2
    assert cavity.coherent_decay_rate(params) == pytest.approx(0.585786, abs=1e-6)
    n = 1000
    ratio = survival_exact(kernel, rho, n + 1) / survival_exact(kernel, rho, n)
    assert ratio == pytest.approx(
        survival_closed_coherent(params, state, n + 1) / survival_closed_coherent(params, state, n),
        rel=1e-8)
    assert -math.log(ratio) == pytest.approx(rate, abs=1e-3)
    assert math.log(survival_exact(kernel, rho, n)) / n == pytest.approx(-rate, abs=5e-3)


def test_optimisation_criterion_algebraic_decay(fig1_params, fig_state):
    kernel, rho = make_kernel(fig1_params, fig_state), initial_density(fig_state)
    scaled = [survival_exact(kernel, rho, n) * math.sqrt(n) for n in (100, 400, 1600, 6400)]
    assert all(s > 0 for s in scaled)
    assert scaled[-1] == pytest.approx(scaled[-2], rel=1e-3)
    limit = math.exp(-0.01 / 0.08) / math.sqrt(2 * G2 * 0.04)
    assert scaled[-1] == pytest.approx(limit, rel=1e-3)


def test_xi_irrelevance(fig1_params, fig2_params, fig_state):
    import dataclasses

    rho = initial_density(fig_state)
    for params in (fig1_params, fig2_params):
        coeffs = coefficients(params)
        base = make_kernel(params, fig_state)
        for xi in (-40.0, 0.0, 3.3):
            other = make_kernel(params, fig_state, dataclasses.replace(coeffs, xi_tau=xi))
            for n in (1, 10):
                assert survival_exact(other, rho, n) == pytest.approx(
                    survival_exact(base, rho, n), abs=1e-10)
                assert purity_exact(other, rho, n) == pytest.approx(
                    purity_exact(base, rho, n), abs=1e-10)


def test_position_irrelevance(fig1_params, fig2_params):
    ref = GaussianParticleState(0.1, 0.0, 0.2, 5.0, 1 / math.sqrt(2))
    for params in (fig1_params, fig2_params):
        kernel = make_kernel(params, ref)
        base = initial_density(ref)
        for x0, dx0 in ((3.0, 3.6), (-7.0, 50.0)):
            rho = initial_density(GaussianParticleState(0.1, x0, 0.2, dx0, 1 / math.sqrt(2)))
            for n in (1, 10, 50):
                assert survival_exact(kernel, rho, n) == pytest.approx(
                    survival_exact(kernel, base, n), abs=1e-8)
                assert purity_exact(kernel, rho, n) == pytest.approx(
                    purity_exact(kernel, base, n), abs=1e-8)


# -- number-state asymptotics ---------------------------------------------------------


def test_number_survival_formula(fig2_params, fig_state):
    assert survival_asym_number1(fig2_params, fig_state, 10) == pytest.approx(0.14886, abs=1e-5)
    centred = GaussianParticleState(0.0, 0.0, 0.2, 5.0, 1 / math.sqrt(2))
    assert survival_asym_number1(fig2_params, centred, 7) == pytest.approx(
        1 / math.sqrt(6 * G2 * 0.04 * 7), rel=1e-14)
    assert survival_asym_number1(fig2_params, fig_state, 40) == pytest.approx(
        survival_asym_number1(fig2_params, fig_state, 10) / 2, rel=1e-14)
    with pytest.raises(ValueError):
        survival_asym_number1(fig2_params, fig_state, 0)


def test_number_survival_formula_is_leading_laplace_term(fig2, fig2_params, fig_state):
    kernel, rho = fig2
    data = laplace_data(kernel, locate_peak(kernel))
    value = survival_asymptotic(data, rho, 10, order=0)
    assert value == pytest.approx(survival_asym_number1(fig2_params, fig_state, 10), abs=1e-6)
    assert value == pytest.approx(0.14886, abs=1e-4)


def test_number_purity_asymptote(fig2, fig2_params, fig_state):
    kernel, rho = fig2
    data = laplace_data(kernel, locate_peak(kernel))
    assert purity_asym_formula(fig2_params, fig_state, 10) == pytest.approx(0.98577, abs=1e-5)
    assert purity_asymptotic(data, rho, 10) == pytest.approx(0.98577, abs=1e-4)


def test_number_exact_approaches_asymptote(fig2, fig2_params, fig_state):
    kernel, rho = fig2
    p_gaps = [abs(survival_exact(kernel, rho, n) / survival_asym_number1(fig2_params, fig_state, n) - 1)
              for n in (10, 50, 250)]
    assert p_gaps[0] < 0.05 and p_gaps[1] < 0.01
    assert p_gaps == sorted(p_gaps, reverse=True)


def test_purity_law_both_variants(fig1_params, fig2_params, fig_state):
    for params in (fig1_params, fig2_params):
        kernel, rho = make_kernel(params, fig_state), initial_density(fig_state)
        n = 400
        exact_gap = 1 - purity_exact(kernel, rho, n)
        law_gap = 1 - purity_asym_formula(params, fig_state, n)
        assert exact_gap == pytest.approx(law_gap, rel=0.01)
