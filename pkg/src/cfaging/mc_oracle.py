"""Monte Carlo simulation of pilot and data transmission over aging channels.

Used as the ground truth for the closed forms in :mod:`cfaging.se_engine`.
Blocks are processed in fixed-size chunks, each with its own child seed,
and chunk results are reduced in chunk order, so estimates depend only on
``seed`` and ``n_blocks``.

Two channel generators are available:

``"anchored"`` (default)
    Data instants lambda..tau_c form a stationary process with lag
    correlation rho[|n - m|].  Every earlier instant t (the pilot phase)
    is ``rho[lambda - t] h[lambda] + rho_bar[lambda - t] zeta[t]`` with
    fresh innovations.  This is the dependence structure the closed forms
    are derived under.
``"stationary"``
    The whole block 0..tau_c is one stationary process with Toeplitz
    correlation rho[|n - m|].  Because J0(a + b) != J0(a) J0(b), pilot and
    data instants are then slightly more decorrelated than the closed
    forms assume.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .aging import estimation_variance, mmse_coefficients, pilot_lag_correlation

MIN_BLOCKS = 100


class ChannelMethod(str, Enum):
    ANCHORED = "anchored"
    STATIONARY = "stationary"


def block_correlation(rho, tau_p, method=ChannelMethod.ANCHORED):
    """(tau_c+1) x (tau_c+1) correlation matrix of one UE's channel over a block."""
    rho = np.asarray(rho, dtype=float)
    T = rho.size
    lag = np.abs(np.subtract.outer(np.arange(T), np.arange(T)))
    R = rho[lag]
    if ChannelMethod(method) is ChannelMethod.ANCHORED:
        lam = tau_p + 1
        pre = np.arange(lam)
        to_anchor = rho[lam - pre]
        # pre-anchor instants relate to everything only through h[lambda]
        R[:lam, :] = to_anchor[:, None] * R[lam][None, :]
        R[:, :lam] = R[:lam, :].T
        R[:lam, :lam] = np.outer(to_anchor, to_anchor)
        R[pre, pre] = 1.0
    return R


def correlation_factor(R):
    """F with F F^T = R, from an eigendecomposition with roundoff-level eigenvalues zeroed."""
    if np.all(R == 1.0):
        # static channel: one draw repeated exactly over the block
        F = np.zeros_like(R)
        F[:, 0] = 1.0
        return F
    vals, vecs = np.linalg.eigh(R)
    # eigenvalues at roundoff level are noise; drop them rather than keep sqrt(eps)
    vals = np.where(vals > vals.max() * R.shape[0] * np.finfo(float).eps, vals, 0.0)
    F = vecs * np.sqrt(vals)
    if not np.all(np.isfinite(F)):
        raise ArithmeticError("channel correlation factorization failed")
    return F


def complex_normal(rng, shape, variance=1.0):
    scale = np.sqrt(np.asarray(variance) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass
class ChannelBlock:
    """Channel coefficients ``h[b, k, l, n]`` for a batch of resource blocks."""

    h: np.ndarray
    rng_seed: object = None

    @property
    def n_blocks(self):
        return self.h.shape[0]


def _factors(profile, tau_p, method):
    cache = {}
    out = []
    for row in profile.rho:
        key = row.tobytes()
        if key not in cache:
            cache[key] = correlation_factor(block_correlation(row, tau_p, method))
        out.append(cache[key])
    return out


def generate_channel_block(scenario, profile, seed, *, tau_p, n_blocks=1,
                           method=ChannelMethod.ANCHORED, rng=None, factors=None):
    """Draw ``n_blocks`` independent resource blocks of channel coefficients."""
    rng = np.random.default_rng(seed) if rng is None else rng
    factors = _factors(profile, tau_p, method) if factors is None else factors
    K, L = scenario.beta.shape
    T = profile.tau_c + 1
    h = np.empty((n_blocks, K, L, T), dtype=complex)
    for k in range(K):
        z = complex_normal(rng, (n_blocks, L, T))
        h[:, k] = np.sqrt(scenario.beta[k])[None, :, None] * (z @ factors[k].T)
    return ChannelBlock(h, seed)


def simulate_pilot_phase(block, scenario, pilots, profile, noise_power, tau_p, rng):
    """MMSE estimates ``hhat[b, k, l]`` of h[lambda] from simulated pilot signals."""
    h = block.h
    B, K, L, _ = h.shape
    coef = mmse_coefficients(scenario, pilots, profile, noise_power, tau_p)
    sqrt_p = np.sqrt(scenario.powers)
    hhat = np.empty((B, K, L), dtype=complex)
    for t in np.unique(pilots.t):
        members = np.flatnonzero(pilots.t == t)
        z = np.einsum("i,bil->bl", sqrt_p[members], h[:, members][..., t])
        z = z + complex_normal(rng, (B, L), noise_power)
        hhat[:, members] = coef[members][None] * z[:, None, :]
    return hhat


@dataclass
class TermEstimates:
    """Empirical SINR terms per UE k and data instant (and interferer i for UI).

    ``ds`` is |E{DS}|^2, the rest are mean squared magnitudes; data symbols
    are integrated out analytically (each term carries its power p).
    """

    ds: np.ndarray  # (K, N)
    bu: np.ndarray
    ca: np.ndarray
    ui: np.ndarray  # (K, K, N), zero on the diagonal
    ns: np.ndarray
    n_samples: int
    instants: np.ndarray
    stderr: dict = field(default_factory=dict)

    def sinr(self):
        den = self.bu + self.ca + self.ui.sum(axis=1) + self.ns
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.ds > 0, self.ds / den, 0.0)


def _chunks(n_blocks, chunk):
    sizes = [chunk] * (n_blocks // chunk)
    if n_blocks % chunk:
        sizes.append(n_blocks % chunk)
    return sizes


def _check_instants(instants, tau_p, tau_c):
    instants = np.atleast_1d(np.asarray(instants, dtype=int))
    if np.any(instants < tau_p + 1) or np.any(instants > tau_c):
        raise ValueError("instants must lie in the data phase")
    return instants


def estimate_sinr_terms(scenario, pilots, profile, weights, instants, n_blocks, seed, *,
                        noise_power, tau_p, method=ChannelMethod.ANCHORED, chunk=2000):
    """Empirical DS, BU, CA, UI and NS terms of the use-and-then-forget SINR.

    ``weights`` has shape (K, N, L): the CPU weights of UE k at ``instants[j]``.
    Standard errors come from the spread of per-chunk estimates.
    """
    if n_blocks < MIN_BLOCKS:
        raise ValueError(f"need at least {MIN_BLOCKS} blocks, got {n_blocks}")
    instants = _check_instants(instants, tau_p, profile.tau_c)
    lam = tau_p + 1
    K, L = scenario.beta.shape
    N = instants.size
    a_conj = np.conj(np.asarray(weights, dtype=complex)).reshape(K, N, L)
    p = scenario.powers
    rho_n = profile.rho[:, instants - lam]  # (K, N)
    factors = _factors(profile, tau_p, method)

    sizes = _chunks(n_blocks, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    g_mean, g_m2 = [], []
    parts = {"ca": [], "ui": [], "ns": []}
    for size, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        block = generate_channel_block(scenario, profile, None, tau_p=tau_p, n_blocks=size,
                                       rng=rng, factors=factors)
        h = block.h
        hhat_c = np.conj(simulate_pilot_phase(block, scenario, pilots, profile,
                                              noise_power, tau_p, rng))
        h_lam = h[:, :, :, lam]
        h_n = h[:, :, :, instants]  # (B, K, L, N)

        G = np.einsum("knl,bkl->bkn", a_conj, hhat_c * h_lam)
        g_mean.append(G.mean(axis=0))
        g_m2.append(np.sum(np.abs(G - g_mean[-1]) ** 2, axis=0))

        aging = h_n - rho_n[None, :, None, :] * h_lam[..., None]
        X = np.einsum("knl,bkl,bkln->bkn", a_conj, hhat_c, aging)
        parts["ca"].append(p[:, None] * np.mean(np.abs(X) ** 2, axis=0))

        U = np.einsum("knl,bkl,biln->bkin", a_conj, hhat_c, h_n)
        ui = p[None, :, None] * np.mean(np.abs(U) ** 2, axis=0)
        ui[np.arange(K), np.arange(K)] = 0.0
        parts["ui"].append(ui)

        w = complex_normal(rng, (size, L, N), noise_power)
        S = np.einsum("knl,bkl,bln->bkn", a_conj, hhat_c, w)
        parts["ns"].append(np.mean(np.abs(S) ** 2, axis=0))

    wts = np.asarray(sizes, dtype=float) / n_blocks
    g_mean = np.stack(g_mean)
    mean_g = np.tensordot(wts, g_mean, axes=1)
    # pooled variance: within-chunk sums plus between-chunk spread
    m2 = np.sum(np.stack(g_m2), axis=0) + np.tensordot(
        np.asarray(sizes, dtype=float), np.abs(g_mean - mean_g) ** 2, axes=1)
    var_g = m2 / n_blocks
    scale = rho_n**2 * p[:, None]
    chunk_ds = scale * np.abs(g_mean) ** 2
    chunk_bu = scale * np.stack([m / s for m, s in zip(g_m2, sizes)])

    est = {
        "ds": scale * np.abs(mean_g) ** 2,
        "bu": scale * var_g,
    }
    per_chunk = {"ds": chunk_ds, "bu": chunk_bu}
    for name, vals in parts.items():
        stacked = np.stack(vals)
        per_chunk[name] = stacked
        est[name] = np.tensordot(wts, stacked, axes=1)
    stderr = {}
    if len(sizes) > 1:
        for name, stacked in per_chunk.items():
            stderr[name] = np.std(stacked, axis=0, ddof=1) / np.sqrt(len(sizes))
    return TermEstimates(est["ds"], est["bu"], est["ca"], est["ui"], est["ns"],
                         n_blocks, instants, stderr)


def estimate_sinr_full_signal(scenario, pilots, profile, weights, instants, n_blocks, seed, *,
                              noise_power, tau_p, method=ChannelMethod.ANCHORED, chunk=2000):
    """Use-and-then-forget SINR from simulated data symbols, without term splitting.

    With s_k ~ CN(0, p_k), the combined output x = s_hat_k gives
    SINR = |E{x s_k*}|^2 / p_k / (E{|x|^2} - |E{x s_k*}|^2 / p_k).
    """
    if n_blocks < MIN_BLOCKS:
        raise ValueError(f"need at least {MIN_BLOCKS} blocks, got {n_blocks}")
    instants = _check_instants(instants, tau_p, profile.tau_c)
    K, L = scenario.beta.shape
    N = instants.size
    a_conj = np.conj(np.asarray(weights, dtype=complex)).reshape(K, N, L)
    p = scenario.powers
    factors = _factors(profile, tau_p, method)
    sizes = _chunks(n_blocks, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    cross, power = [], []
    for size, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        block = generate_channel_block(scenario, profile, None, tau_p=tau_p, n_blocks=size,
                                       rng=rng, factors=factors)
        hhat_c = np.conj(simulate_pilot_phase(block, scenario, pilots, profile,
                                              noise_power, tau_p, rng))
        s = complex_normal(rng, (size, K, N), p[None, :, None])
        y = np.einsum("biln,bin->bln", block.h[:, :, :, instants], s)
        y = y + complex_normal(rng, (size, L, N), noise_power)
        x = np.einsum("knl,bkl,bln->bkn", a_conj, hhat_c, y)
        cross.append(np.sum(x * np.conj(s), axis=0))
        power.append(np.sum(np.abs(x) ** 2, axis=0))
    c = np.sum(np.stack(cross), axis=0) / n_blocks
    e = np.sum(np.stack(power), axis=0) / n_blocks
    signal = np.abs(c) ** 2 / p[:, None]
    return signal / (e - signal)


def estimate_se_smallcell_mc(k, l, scenario, pilots, profile, n_blocks, seed, *,
                             noise_power, tau_p, method=ChannelMethod.ANCHORED, chunk=20000):
    """Monte Carlo SE of UE k served by AP l alone.

    The MMSE estimate is simulated; the interference power conditioned on
    it is evaluated analytically, and the log is averaged over estimates
    and data instants.
    """
    if n_blocks < MIN_BLOCKS:
        raise ValueError(f"need at least {MIN_BLOCKS} blocks, got {n_blocks}")
    lam = tau_p + 1
    tau_c = profile.tau_c
    stats = estimation_variance(scenario, pilots, profile, noise_power, tau_p)
    if stats.gamma[k, l] <= 0:
        return 0.0
    p = scenario.powers
    beta_l = scenario.beta[:, l]
    gamma_l = stats.gamma[:, l]
    rho_pilot = pilot_lag_correlation(profile, pilots, tau_p)
    members = sorted(pilots.sharing_sets[k])
    others = [i for i in members if i != k]

    lags = np.arange(tau_c - lam + 1)
    rho2 = profile.rho[:, lags] ** 2  # (K, N)
    # E{|interference|^2 | hhat} = slope * |hhat|^2 + floor
    slope = sum(
        rho2[i] * rho_pilot[i] ** 2 * p[i] ** 2 * beta_l[i] ** 2
        / (rho_pilot[k] ** 2 * p[k] * beta_l[k] ** 2)
        for i in others
    ) if others else np.zeros(lags.size)
    floor = np.sum(p * beta_l) - np.sum(rho2[members] * (p * gamma_l)[members, None], axis=0)
    gain = rho2[k] * p[k]

    sub = scenario.__class__(scenario.ap_positions[[l]], scenario.ue_positions,
                             scenario.beta[:, [l]], scenario.powers)
    factors = _factors(profile, tau_p, method)
    sizes = _chunks(n_blocks, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    totals = []
    for size, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        block = generate_channel_block(sub, profile, None, tau_p=tau_p, n_blocks=size,
                                       rng=rng, factors=factors)
        hhat = simulate_pilot_phase(block, sub, pilots, profile, noise_power, tau_p, rng)
        y = np.abs(hhat[:, k, 0]) ** 2
        sinr = gain[None, :] * y[:, None] / (slope[None, :] * y[:, None] + floor + noise_power)
        totals.append(np.sum(np.log2(1.0 + sinr), axis=0))
    per_instant = np.sum(np.stack(totals), axis=0) / n_blocks
    return float(per_instant.sum() / tau_c)
