"""Closed-form uplink spectral efficiency under channel aging.

Cell-free: use-and-then-forget SINR for arbitrary CPU weights, the LSFD
weights that maximize it, and equal-weight MF combining.  Small-cell: the
per-AP SE with MMSE estimates used for detection, and best-AP selection.

UE and AP indices are 0-based.  Time instants follow the frame: data
instants run from ``lambda = tau_p + 1`` to ``tau_c``.
"""

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .aging import AgingProfile, EstimationStats
from .specfun import exp_e1_scaled

# below this ratio the contamination term of the small-cell SE is dropped
A_ZERO = 1e-300


class Combining(str, Enum):
    LSFD = "lsfd"
    MF = "mf"


@dataclass(frozen=True)
class WeightVector:
    a: np.ndarray
    ue: int
    instant: int


@dataclass
class SEReport:
    """Per-UE SE in bit/s/Hz.  Entries are None for systems not evaluated."""

    se_lsfd: np.ndarray | None = None
    se_mf: np.ndarray | None = None
    se_smallcell: np.ndarray | None = None
    serving_ap: np.ndarray | None = None
    per_instant_sinr: np.ndarray | None = None


def data_instants(stats, profile):
    return np.arange(stats.lambda_instant, profile.tau_c + 1)


def _lag(n, stats, profile):
    lam = stats.lambda_instant
    if not lam <= n <= profile.tau_c:
        raise ValueError(f"instant {n} outside the data phase [{lam}, {profile.tau_c}]")
    return n - lam


def _contaminators(stats, k):
    return stats.pilots.contaminators(k)


def sinr_cf(k, n, weights, stats: EstimationStats, profile: AgingProfile, powers):
    """Effective SINR of UE k at data instant n for CPU weights ``weights``."""
    a = np.asarray(getattr(weights, "a", weights))
    m = _lag(n, stats, profile)
    rho2 = profile.rho[:, m] ** 2
    p = np.asarray(powers, dtype=float)
    g = stats.gamma[k]
    a2 = np.abs(a) ** 2

    num = rho2[k] * p[k] * np.abs(np.vdot(a, g)) ** 2
    den = np.sum(a2 * g * (p @ stats.beta))
    for i in _contaminators(stats, k):
        den += rho2[i] * p[i] * np.abs(np.vdot(a, stats.c(k, i))) ** 2
    den += stats.noise_power * np.sum(a2 * g)
    if den <= 0.0 or num == 0.0:
        return 0.0
    return float(num / den)


def sinr_terms_cf(k, n, weights, stats, profile, powers):
    """Closed-form expectations of the five SINR terms for UE k at instant n.

    Returns a dict with scalars ``ds``, ``bu``, ``ca``, ``ns`` and a length-K
    array ``ui`` (zero at index k).
    """
    a = np.asarray(getattr(weights, "a", weights))
    m = _lag(n, stats, profile)
    rho2 = profile.rho[:, m] ** 2
    p = np.asarray(powers, dtype=float)
    g = stats.gamma[k]
    a2 = np.abs(a) ** 2
    own = np.sum(a2 * g * stats.beta[k])
    ui = p * (stats.beta @ (a2 * g))
    for i in _contaminators(stats, k):
        ui[i] += rho2[i] * p[i] * np.abs(np.vdot(a, stats.c(k, i))) ** 2
    ui[k] = 0.0
    return {
        "ds": rho2[k] * p[k] * np.abs(np.vdot(a, g)) ** 2,
        "bu": rho2[k] * p[k] * own,
        "ca": (1.0 - rho2[k]) * p[k] * own,
        "ui": ui,
        "ns": stats.noise_power * np.sum(a2 * g),
    }


def mf_weights(k, n, L):
    return WeightVector(np.full(L, 1.0 / L), k, n)


def lsfd_weights(k, n, stats: EstimationStats, profile: AgingProfile, powers):
    """Weights maximizing :func:`sinr_cf` for UE k at instant n.

    The system matrix is diagonal plus one rank-one term per pilot-sharing
    UE and is solved with the Woodbury identity.  APs with zero estimate
    variance get zero weight.
    """
    m = _lag(n, stats, profile)
    p = np.asarray(powers, dtype=float)
    g = stats.gamma[k]
    support = g > 0
    if not np.any(support):
        warnings.warn(f"UE {k} has no usable channel estimate; using MF weights",
                      RuntimeWarning, stacklevel=2)
        return mf_weights(k, n, stats.L)

    rho2 = profile.rho[:, m] ** 2
    # diagonal part: gamma_kl (sum_i p_i beta_il + sigma^2)
    dinv_b = 1.0 / ((p @ stats.beta)[support] + stats.noise_power)
    dinv = dinv_b / g[support]
    contam = _contaminators(stats, k)
    a_s = dinv_b.copy()
    if contam:
        C = np.stack([stats.c(k, i)[support] for i in contam], axis=1)
        q = np.array([rho2[i] * p[i] for i in contam])
        s = C.T @ dinv_b
        G = C.T @ (dinv[:, None] * C)
        y = np.linalg.solve(np.eye(len(contam)) + q[:, None] * G, q * s)
        a_s -= dinv * (C @ y)
    a = np.zeros(stats.L)
    a[support] = a_s
    return WeightVector(a, k, n)


def lsfd_sinr_all(stats: EstimationStats, profile: AgingProfile, powers):
    """K x (tau_c - tau_p) SINR with LSFD weights at every data instant."""
    p = np.asarray(powers, dtype=float)
    lags = data_instants(stats, profile) - stats.lambda_instant
    rho2 = profile.rho[:, lags] ** 2
    load = p @ stats.beta + stats.noise_power
    out = np.zeros((stats.K, lags.size))
    for k in range(stats.K):
        g = stats.gamma[k]
        support = g > 0
        if not np.any(support):
            continue
        dinv_b = 1.0 / load[support]
        quad = np.sum(g[support] * dinv_b)
        contam = _contaminators(stats, k)
        if contam:
            dinv = dinv_b / g[support]
            C = np.stack([stats.c(k, i)[support] for i in contam], axis=1)
            s = C.T @ dinv_b
            G = C.T @ (dinv[:, None] * C)
            q = (rho2[contam] * p[contam, None]).T  # (N, m)
            lhs = np.eye(len(contam)) + q[:, :, None] * G[None]
            y = np.linalg.solve(lhs, (q * s)[..., None])[..., 0]
            quad = quad - y @ s
        out[k] = rho2[k] * p[k] * quad
    return out


def mf_sinr_all(stats: EstimationStats, profile: AgingProfile, powers):
    """K x (tau_c - tau_p) SINR with equal CPU weights."""
    p = np.asarray(powers, dtype=float)
    lags = data_instants(stats, profile) - stats.lambda_instant
    rho2 = profile.rho[:, lags] ** 2
    g = stats.gamma
    gsum = g.sum(axis=1)
    base = g @ (p @ stats.beta) + stats.noise_power * gsum
    coh = np.sqrt(g) @ np.sqrt(g).T  # (k, i) -> sum_l sqrt(gamma_kl gamma_il)
    share = stats.pilots.share_matrix() & ~np.eye(stats.K, dtype=bool)
    contam = (share * coh**2 * p[None, :]) @ rho2
    num = rho2 * (p * gsum**2)[:, None]
    den = base[:, None] + contam
    with np.errstate(invalid="ignore", divide="ignore"):
        sinr = np.where(num > 0, num / den, 0.0)
    return sinr


def se_from_sinr(sinr, tau_c):
    """(1/tau_c) sum_n log2(1 + SINR[n]) along the last axis."""
    return np.sum(np.log2(1.0 + np.asarray(sinr)), axis=-1) / tau_c


def se_cf(k, stats, profile, powers, mode=Combining.LSFD):
    mode = Combining(mode)
    sinr = []
    for n in data_instants(stats, profile):
        if mode is Combining.LSFD:
            w = lsfd_weights(k, n, stats, profile, powers)
        else:
            w = mf_weights(k, n, stats.L)
        sinr.append(sinr_cf(k, n, w, stats, profile, powers))
    return float(se_from_sinr(sinr, profile.tau_c))


def smallcell_parameters(stats: EstimationStats, profile: AgingProfile, powers):
    """Per-(k, l, instant) SNR-like factor w and contamination product w*A.

    Returns two arrays of shape (K, L, tau_c - tau_p).  ``w*A`` is formed
    as the contamination power over the effective noise, so it stays
    finite when rho_k vanishes.
    """
    p = np.asarray(powers, dtype=float)
    lags = data_instants(stats, profile) - stats.lambda_instant
    rho2 = profile.rho[:, lags] ** 2  # (K, N)
    pg = p[:, None] * stats.gamma  # (K, L)
    share = stats.pilots.share_matrix().astype(float)
    others = share - np.eye(stats.K)
    own = pg[:, :, None] * rho2[:, None, :]
    contam = np.einsum("ki,il,in->kln", others, pg, rho2)
    load = (p @ stats.beta + stats.noise_power)[None, :, None]
    denom = load - own - contam
    return own / denom, contam / denom


def smallcell_terms(w, wa):
    """Per-instant small-cell SE terms (bit/s/Hz) from w and w*A."""
    w = np.asarray(w, dtype=float)
    wa = np.asarray(wa, dtype=float)
    out = np.zeros(np.broadcast(w, wa).shape)
    w, wa = np.broadcast_to(w, out.shape), np.broadcast_to(wa, out.shape)
    live = w > 0
    first = exp_e1_scaled(1.0 / (w[live] + wa[live]))
    second = np.zeros_like(first)
    wl, wal = w[live], wa[live]
    contaminated = wal > A_ZERO * wl
    second[contaminated] = exp_e1_scaled(1.0 / wal[contaminated])
    out[live] = (first - second) / np.log(2.0)
    return out


def smallcell_se_table(stats, profile, powers):
    """K x L matrix of the SE each UE would get from each single AP."""
    w, wa = smallcell_parameters(stats, profile, powers)
    return smallcell_terms(w, wa).sum(axis=-1) / profile.tau_c


def se_smallcell(k, l, stats, profile, powers):
    if stats.gamma[k, l] <= 0:
        return 0.0
    w, wa = smallcell_parameters(stats, profile, powers)
    return float(smallcell_terms(w[k, l], wa[k, l]).sum() / profile.tau_c)


def best_serving_ap(stats, profile, powers, batch=4):
    """Serving AP and SE of every UE in the small-cell system.

    Gives the same result as the argmax of :func:`smallcell_se_table` but
    evaluates the exponential integrals only for candidate APs.  Each
    per-instant term is at most log2(1 + w) (drop the contamination and
    apply Jensen), so an AP whose bound falls below the best exact SE found
    so far cannot win and is skipped.
    """
    w, wa = smallcell_parameters(stats, profile, powers)
    K, L, _ = w.shape
    upper = np.sum(np.log2(1.0 + w), axis=-1) / profile.tau_c
    upper = upper * (1.0 + 1e-12) + 1e-300
    order = np.argsort(-upper, axis=1, kind="stable")
    exact = np.full((K, L), -np.inf)
    done = np.zeros(K, dtype=int)
    pending = np.arange(K)
    while pending.size:
        ks, ls = [], []
        for k in pending:
            cand = order[k, done[k]:done[k] + batch]
            ks.append(np.full(cand.size, k))
            ls.append(cand)
            done[k] += cand.size
        ks, ls = np.concatenate(ks), np.concatenate(ls)
        exact[ks, ls] = smallcell_terms(w[ks, ls], wa[ks, ls]).sum(axis=-1) / profile.tau_c
        best = exact.max(axis=1)
        nxt = np.where(done < L, upper[np.arange(K), np.minimum(done, L - 1)], -np.inf)
        pending = np.flatnonzero((done < L) & (nxt >= best))
    serving = np.argmax(exact, axis=1)
    return serving, exact[np.arange(K), serving]


def select_best_ap(k, stats, profile, powers):
    """(AP index, SE) maximizing the small-cell SE; ties go to the lowest index."""
    table = smallcell_se_table(stats, profile, powers)[k]
    l = int(np.argmax(table))
    return l, float(table[l])


def evaluate(stats, profile, powers, systems=("lsfd", "mf", "smallcell"),
             keep_sinr=False, smallcell_stats=None, smallcell_powers=None):
    """Evaluate the requested systems for one drop.

    The small-cell system may run with its own powers (and hence its own
    estimation statistics) through ``smallcell_stats``/``smallcell_powers``.
    """
    systems = set(systems)
    report = SEReport()
    tau_c = profile.tau_c
    if "lsfd" in systems:
        sinr = lsfd_sinr_all(stats, profile, powers)
        report.se_lsfd = se_from_sinr(sinr, tau_c)
        if keep_sinr:
            report.per_instant_sinr = sinr
    if "mf" in systems:
        report.se_mf = se_from_sinr(mf_sinr_all(stats, profile, powers), tau_c)
    if "smallcell" in systems:
        sc_stats = stats if smallcell_stats is None else smallcell_stats
        sc_powers = powers if smallcell_powers is None else smallcell_powers
        report.serving_ap, report.se_smallcell = best_serving_ap(sc_stats, profile, sc_powers)
    return report
