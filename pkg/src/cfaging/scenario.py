"""Network drops: geometry, large-scale fading, pilot assignment and powers."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class PowerMode(str, Enum):
    FULL = "full"
    FPC = "fpc"


class PilotPolicy(str, Enum):
    ROUND_ROBIN = "round_robin"
    RANDOM = "random"


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of one simulated network.

    All quantities are SI (meters, Hz, seconds, Watts).  ``p_sum`` defaults
    to ``K * p_max``.  ``normalized_doppler`` is f_D * T_s, either a single
    value shared by all UEs or one value per UE.
    """

    L: int = 100
    K: int = 20
    area_side: float = 500.0
    carrier_freq: float = 2e9
    sample_time: float = 1e-5
    tau_c: int = 200
    tau_p: int = 10
    noise_power: float = float(dbm_to_watt(-96.0))
    p_max: float = 0.1
    p_sum: float | None = None
    bandwidth: float = 20e6
    normalized_doppler: float | tuple = 0.0
    power_mode: PowerMode = PowerMode.FULL
    pilot_policy: PilotPolicy = PilotPolicy.ROUND_ROBIN
    rng_seed: int = 0
    shadowing: bool = True
    shadow_std_db: float = 8.0
    ap_height: float = 15.0
    ue_height: float = 1.65

    def __post_init__(self):
        object.__setattr__(self, "power_mode", PowerMode(self.power_mode))
        object.__setattr__(self, "pilot_policy", PilotPolicy(self.pilot_policy))
        if not np.isscalar(self.normalized_doppler):
            object.__setattr__(
                self, "normalized_doppler", tuple(float(v) for v in self.normalized_doppler)
            )
        if self.K <= 0 or self.L <= 0:
            raise ValueError("K and L must be positive")
        if not 0 < self.tau_p < self.tau_c:
            raise ValueError("need 0 < tau_p < tau_c")
        powers = [self.noise_power, self.p_max, self.total_power]
        if min(powers) < 0 or self.noise_power <= 0:
            raise ValueError("powers must be non-negative and noise power positive")
        fd = self.doppler_per_ue()
        if np.any(fd < 0) or np.any(fd >= 0.5):
            raise ValueError("normalized Doppler must lie in [0, 0.5)")

    @property
    def total_power(self):
        return self.K * self.p_max if self.p_sum is None else self.p_sum

    def doppler_per_ue(self):
        fd = np.asarray(self.normalized_doppler, dtype=float)
        if fd.ndim == 0:
            return np.full(self.K, float(fd))
        if fd.shape != (self.K,):
            raise ValueError(f"expected {self.K} Doppler values, got {fd.shape[0]}")
        return fd


@dataclass(frozen=True)
class NetworkScenario:
    ap_positions: np.ndarray  # (L, 2) meters
    ue_positions: np.ndarray  # (K, 2) meters
    beta: np.ndarray  # (K, L) linear large-scale fading
    powers: np.ndarray  # (K,) Watts

    @property
    def K(self):
        return self.beta.shape[0]

    @property
    def L(self):
        return self.beta.shape[1]

    def with_powers(self, powers):
        powers = np.asarray(powers, dtype=float)
        if powers.shape != (self.K,) or np.any(powers < 0):
            raise ValueError("powers must be a non-negative length-K vector")
        return NetworkScenario(self.ap_positions, self.ue_positions, self.beta, powers)


@dataclass(frozen=True)
class PilotAssignment:
    """Pilot instant per UE (1-based, as in the frame) and the sharing sets."""

    t: np.ndarray
    sharing_sets: tuple = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=int)
        object.__setattr__(self, "t", t)
        sets = tuple(frozenset(np.flatnonzero(t == tk).tolist()) for tk in t)
        object.__setattr__(self, "sharing_sets", sets)

    @property
    def K(self):
        return self.t.size

    def share_matrix(self):
        """Boolean K x K matrix, entry (k, i) true when i is in P_k."""
        return self.t[:, None] == self.t[None, :]

    def contaminators(self, k):
        return sorted(self.sharing_sets[k] - {k})


def hata_cost231_loss_db(carrier_freq, ap_height=15.0, ue_height=1.65):
    """Base loss constant of the three-slope model (dB, distances in km)."""
    f_mhz = carrier_freq / 1e6
    lf = np.log10(f_mhz)
    return (
        46.3
        + 33.9 * lf
        - 13.82 * np.log10(ap_height)
        - (1.1 * lf - 0.7) * ue_height
        + (1.56 * lf - 0.8)
    )


def path_loss(distance, carrier_freq=2e9, ap_height=15.0, ue_height=1.65, d0=10.0, d1=50.0):
    """Three-slope path gain (linear) for distances in meters.

    Far slope exponent 3.5 beyond ``d1``, 2 between ``d0`` and ``d1``, flat
    below ``d0``.  Distances are floored at 1 m.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise ValueError("distance must be non-negative")
    d = np.maximum(d, 1.0) / 1000.0
    d0k, d1k = d0 / 1000.0, d1 / 1000.0
    base = hata_cost231_loss_db(carrier_freq, ap_height, ue_height)
    far = -base - 35.0 * np.log10(np.maximum(d, d1k))
    mid = -base - 15.0 * np.log10(d1k) - 20.0 * np.log10(np.clip(d, d0k, d1k))
    pl_db = np.where(d > d1k, far, mid)
    return (10.0 ** (pl_db / 10.0))[()]


def assign_pilots(K, tau_p, policy=PilotPolicy.ROUND_ROBIN, seed=0):
    if tau_p < 1:
        raise ValueError("tau_p must be at least 1")
    policy = PilotPolicy(policy)
    if policy is PilotPolicy.ROUND_ROBIN:
        t = np.arange(K) % tau_p + 1
    else:
        t = np.random.default_rng(seed).integers(1, tau_p + 1, size=K)
    return PilotAssignment(t)


def fpc_powers_smallcell(beta, serving_ap, p_sum):
    """Fractional power control when each UE is served by a single AP."""
    beta = np.asarray(beta, dtype=float)
    serving_ap = np.asarray(serving_ap, dtype=int)
    own = beta[np.arange(beta.shape[0]), serving_ap]
    total = own.sum()
    if total <= 0:
        raise ValueError("serving-AP gains are all zero")
    return own / total * p_sum


def fpc_powers_cf(beta, p_sum):
    """Fractional power control from each UE's total large-scale gain."""
    rows = np.asarray(beta, dtype=float).sum(axis=1)
    total = rows.sum()
    if total <= 0:
        raise ValueError("large-scale fading matrix is all zero")
    return rows / total * p_sum


def drop_rng(cfg, drop_seed):
    return np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, drop_seed]))


def generate_scenario(cfg: SimConfig, drop_seed: int) -> NetworkScenario:
    """Draw one network realization.

    Powers follow ``cfg.power_mode``; under FPC the cell-free rule is
    used (see :func:`fpc_powers_smallcell` for the small-cell variant).
    """
    rng = drop_rng(cfg, drop_seed)
    aps = rng.uniform(0.0, cfg.area_side, size=(cfg.L, 2))
    ues = rng.uniform(0.0, cfg.area_side, size=(cfg.K, 2))
    dist = np.linalg.norm(ues[:, None, :] - aps[None, :, :], axis=-1)
    beta = np.asarray(
        path_loss(dist, cfg.carrier_freq, cfg.ap_height, cfg.ue_height), dtype=float
    ).reshape(cfg.K, cfg.L)
    if cfg.shadowing:
        shadow_db = cfg.shadow_std_db * rng.standard_normal((cfg.K, cfg.L))
        beta = beta * 10.0 ** (np.where(dist > 50.0, shadow_db, 0.0) / 10.0)
    if cfg.power_mode is PowerMode.FULL:
        powers = np.full(cfg.K, cfg.p_max)
    else:
        powers = fpc_powers_cf(beta, cfg.total_power)
    return NetworkScenario(aps, ues, beta, powers)
