"""Temporal correlation profiles and MMSE channel-estimation statistics."""

from dataclasses import dataclass

import numpy as np

from .scenario import NetworkScenario, PilotAssignment
from .specfun import bessel_j0


def correlation_profile(normalized_doppler, tau_c):
    """rho[n] = J0(2 pi f_D T_s n) for n = 0..tau_c."""
    if normalized_doppler < 0:
        raise ValueError("normalized Doppler must be non-negative")
    n = np.arange(tau_c + 1)
    return np.asarray(bessel_j0(2.0 * np.pi * normalized_doppler * n), dtype=float)


@dataclass(frozen=True)
class AgingProfile:
    """Per-UE correlation by lag; ``rho[k, n]`` is the correlation at lag n."""

    rho: np.ndarray  # (K, tau_c + 1)

    @classmethod
    def from_doppler(cls, normalized_doppler, tau_c, K=None):
        fd = np.atleast_1d(np.asarray(normalized_doppler, dtype=float))
        if fd.size == 1 and K is not None:
            fd = np.full(K, fd[0])
        return cls(np.stack([correlation_profile(v, tau_c) for v in fd]))

    @classmethod
    def from_config(cls, cfg):
        return cls.from_doppler(cfg.doppler_per_ue(), cfg.tau_c)

    @property
    def tau_c(self):
        return self.rho.shape[1] - 1

    @property
    def rho_bar(self):
        return np.sqrt(np.clip(1.0 - self.rho**2, 0.0, None))


@dataclass(frozen=True)
class EstimationStats:
    """Variance of the MMSE estimates and the vectors built from it.

    Diagonal matrices are handled through their diagonals internally; the
    ``Gamma`` and ``Lambda`` methods return the full matrices.
    """

    gamma: np.ndarray  # (K, L)
    beta: np.ndarray  # (K, L)
    pilots: PilotAssignment
    pilot_rho: np.ndarray  # (K,) rho_k[lambda - t_k]
    noise_power: float
    lambda_instant: int

    @property
    def K(self):
        return self.gamma.shape[0]

    @property
    def L(self):
        return self.gamma.shape[1]

    def b(self, k):
        return self.gamma[k]

    def gamma_beta(self, k, i):
        return self.gamma[k] * self.beta[i]

    def Gamma(self, k, i):
        return np.diag(self.gamma_beta(k, i))

    def c(self, k, i):
        # sign of rho_k rho_i is common to every entry; only |a^H c| is used
        return np.sqrt(self.gamma[k] * self.gamma[i])

    def Lambda(self, k):
        return np.diag(self.gamma[k])

    def with_gamma(self, gamma):
        return EstimationStats(
            np.asarray(gamma, dtype=float),
            self.beta,
            self.pilots,
            self.pilot_rho,
            self.noise_power,
            self.lambda_instant,
        )


def pilot_lag_correlation(profile, pilots, tau_p):
    lam = tau_p + 1
    return profile.rho[np.arange(pilots.K), lam - pilots.t]


def _pilot_denominator(beta, powers, pilots, noise_power):
    # sum_{i in P_k} p_i beta_il + sigma^2, shape (K, L)
    share = pilots.share_matrix().astype(float)
    return share @ (powers[:, None] * beta) + noise_power


def estimation_variance(scenario: NetworkScenario, pilots: PilotAssignment,
                        profile: AgingProfile, noise_power, tau_p) -> EstimationStats:
    beta = scenario.beta
    p = scenario.powers
    rho_pilot = pilot_lag_correlation(profile, pilots, tau_p)
    denom = _pilot_denominator(beta, p, pilots, noise_power)
    gamma = (rho_pilot**2 * p)[:, None] * beta**2 / denom
    return EstimationStats(gamma, beta, pilots, rho_pilot, float(noise_power), tau_p + 1)


def mmse_coefficients(scenario, pilots, profile, noise_power, tau_p):
    """K x L matrix of the scalars multiplying z_l[t_k] in the MMSE estimate."""
    rho_pilot = pilot_lag_correlation(profile, pilots, tau_p)
    denom = _pilot_denominator(scenario.beta, scenario.powers, pilots, noise_power)
    return (rho_pilot * np.sqrt(scenario.powers))[:, None] * scenario.beta / denom


def mmse_estimate(pilot_observation, k, l, scenario, pilots, profile, noise_power, tau_p):
    """MMSE estimate of h_kl at instant tau_p + 1 from the pilot signal z_l[t_k]."""
    lam = tau_p + 1
    rho = profile.rho[k, lam - pilots.t[k]]
    members = sorted(pilots.sharing_sets[k])
    denom = np.sum(scenario.powers[members] * scenario.beta[members, l]) + noise_power
    coef = rho * np.sqrt(scenario.powers[k]) * scenario.beta[k, l] / denom
    return coef * pilot_observation
