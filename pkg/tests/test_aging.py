import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaging.aging import (
    AgingProfile,
    correlation_profile,
    estimation_variance,
    mmse_coefficients,
    mmse_estimate,
)
from cfaging.scenario import NetworkScenario, PilotAssignment, SimConfig, assign_pilots, generate_scenario


def _scenario(beta, powers):
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    K, L = beta.shape
    return NetworkScenario(np.zeros((L, 2)), np.zeros((K, 2)), beta, np.asarray(powers, dtype=float))


def test_static_profile_is_one():
    np.testing.assert_array_equal(correlation_profile(0.0, 200), np.ones(201))


def test_profile_reference_value():
    rho = correlation_profile(0.002, 200)
    assert rho[0] == 1.0
    assert rho[100] == pytest.approx(0.642511836577572990, abs=1e-12)


@given(st.floats(0.0, 0.499))
def test_profile_range(fd):
    rho = correlation_profile(fd, 200)
    assert rho[0] == 1.0
    assert np.all((rho >= -0.4028) & (rho <= 1.0))


def test_profile_from_doppler_broadcast():
    prof = AgingProfile.from_doppler(0.001, 20, K=3)
    assert prof.rho.shape == (3, 21)
    assert prof.tau_c == 20
    np.testing.assert_allclose(prof.rho_bar**2 + prof.rho**2, 1.0)


def test_gamma_single_ue():
    stats = estimation_variance(_scenario([[1.0]], [1.0]), PilotAssignment([1]),
                                AgingProfile.from_doppler(0.0, 4, K=1), 1.0, 1)
    assert stats.gamma[0, 0] == pytest.approx(0.5)
    assert stats.lambda_instant == 2


def test_gamma_two_sharers():
    sc = _scenario([[1.0], [0.5]], [1.0, 1.0])
    stats = estimation_variance(sc, PilotAssignment([1, 1]), AgingProfile.from_doppler(0.0, 4, K=2), 0.5, 1)
    assert stats.gamma[0, 0] == pytest.approx(0.5)
    assert stats.gamma[1, 0] == pytest.approx(0.125)


def test_gamma_zero_when_pilot_aged_out():
    # J0 zero at lag 1: 2 pi fd = 2.404825557695773
    fd = 2.404825557695773 / (2 * np.pi)
    prof = AgingProfile.from_doppler(fd, 4, K=1)
    stats = estimation_variance(_scenario([[1.0, 2.0]], [1.0]), PilotAssignment([1]), prof, 0.1, 1)
    assert np.all(np.abs(stats.gamma) < 1e-20)


def test_gamma_not_above_beta():
    cfg = SimConfig(L=30, K=12, tau_p=4, normalized_doppler=0.01)
    sc = generate_scenario(cfg, 5)
    prof = AgingProfile.from_config(cfg)
    stats = estimation_variance(sc, assign_pilots(cfg.K, cfg.tau_p), prof, cfg.noise_power, cfg.tau_p)
    assert np.all(stats.gamma < sc.beta)
    assert np.all(stats.gamma > 0)


def test_gamma_reaches_beta_only_in_ideal_limit():
    sc = _scenario([[0.3, 2.0]], [1.0])
    stats = estimation_variance(sc, PilotAssignment([1]), AgingProfile.from_doppler(0.0, 4, K=1), 1e-300, 1)
    np.testing.assert_allclose(stats.gamma, sc.beta, rtol=1e-12)


@settings(deadline=None)
@given(st.floats(0.0, 5.0), st.floats(1e-3, 5.0), st.floats(1.0, 3.0))
def test_gamma_decreases_with_contamination_and_noise(p2, sigma2, factor):
    beta = [[1.0, 0.2], [0.4, 0.9]]
    prof = AgingProfile.from_doppler(0.01, 6, K=2)
    pil = PilotAssignment([1, 1])
    base = estimation_variance(_scenario(beta, [1.0, p2]), pil, prof, sigma2, 2).gamma[0]
    more_p = estimation_variance(_scenario(beta, [1.0, p2 * factor + 0.01]), pil, prof, sigma2, 2).gamma[0]
    more_n = estimation_variance(_scenario(beta, [1.0, p2]), pil, prof, sigma2 * factor, 2).gamma[0]
    assert np.all(more_p <= base)
    assert np.all(more_n <= base)


def test_mmse_estimate_linear():
    sc = _scenario([[1.0, 0.5], [0.2, 0.7]], [0.3, 0.6])
    pil = PilotAssignment([1, 1])
    prof = AgingProfile.from_doppler(0.003, 10, K=2)
    args = (0, 1, sc, pil, prof, 0.1, 2)
    assert mmse_estimate(0.0, *args) == 0.0
    z = 0.3 - 1.1j
    c = 2.0 + 0.5j
    assert mmse_estimate(c * z, *args) == pytest.approx(c * mmse_estimate(z, *args), rel=1e-14)
    coef = mmse_coefficients(sc, pil, prof, 0.1, 2)
    assert mmse_estimate(z, *args) == pytest.approx(coef[0, 1] * z, rel=1e-14)


def test_mmse_estimate_variance_monte_carlo():
    # pilot signal z = sqrt(p1) h1[t] + sqrt(p2) h2[t] + w, h at lag 1 from the anchor
    rng = np.random.default_rng(77)
    n = 1_000_000
    beta = np.array([[1.0], [0.5]])
    p = np.array([1.0, 0.4])
    sigma2 = 0.5
    sc = _scenario(beta, p)
    pil = PilotAssignment([2, 2])
    prof = AgingProfile.from_doppler(0.02, 10, K=2)

    def cn(var):
        return np.sqrt(var / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))

    z = sum(np.sqrt(p[i]) * cn(beta[i, 0]) for i in range(2)) + cn(sigma2)
    est = mmse_estimate(z, 0, 0, sc, pil, prof, sigma2, 2)
    gamma = estimation_variance(sc, pil, prof, sigma2, 2).gamma[0, 0]
    assert np.mean(np.abs(est) ** 2) == pytest.approx(gamma, rel=0.01)
