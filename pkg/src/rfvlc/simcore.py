"""Monte-Carlo engine for the typical user at the origin.

Trials are simulated in fixed-size blocks.  Block ``b`` draws from its own
generator seeded with ``SeedSequence(seed, spawn_key=(b,))``, so the result
depends only on ``(cfg, trials, seed)`` and never on how blocks are spread
over workers.  Within a block every trial is processed in flat, vectorized
arrays: counts per trial plus concatenated per-point distances.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import MODES, NetworkConfig
from .geometry import sample_ppp, sample_radii

__all__ = [
    "BLOCK_SIZE",
    "TrialBatch",
    "TrialOutcome",
    "CoverageEstimate",
    "LaplaceEvaluation",
    "Deployment",
    "sample_deployment",
    "simulate",
    "run_trial",
    "coverage_indicator",
    "estimate_coverage",
    "interferer_pmf",
    "empirical_laplace",
    "empirical_cf_omega",
    "estimate_spectral_efficiency",
    "estimate_rate",
    "estimate_association",
]

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class CoverageEstimate:
    value: float
    half_width_95: float
    trials: int
    source: str = "monte_carlo"

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("coverage must lie in [0, 1]")
        if self.half_width_95 < 0:
            raise ValueError("half width must be non-negative")


@dataclass(frozen=True)
class LaplaceEvaluation:
    s: complex
    value: complex
    half_width_95: float = 0.0
    source: str = "monte_carlo"


@dataclass(frozen=True)
class Deployment:
    obs: np.ndarray
    sbs: np.ndarray
    fading: np.ndarray

    def __post_init__(self):
        if len(self.fading) != len(self.sbs):
            raise ValueError("one fading draw per SBS is required")


@dataclass(frozen=True)
class TrialOutcome:
    sinr_vlc: float | None
    sinr_rf: float
    rate_vlc: float
    rate_rf: float
    association: str
    interferer_count_vlc: int


@dataclass
class TrialBatch:
    """Per-trial results; NaN marks a missing link (no visible OBS / no SBS)."""

    sinr_vlc: np.ndarray
    sinr_rf: np.ndarray
    signal_vlc: np.ndarray
    interference_vlc: np.ndarray
    n_visible: np.ndarray
    r_serving: np.ndarray
    v_serving: np.ndarray
    assoc_obs: np.ndarray
    has_sbs: np.ndarray

    @property
    def trials(self) -> int:
        return self.sinr_rf.size

    @classmethod
    def concat(cls, parts) -> "TrialBatch":
        parts = list(parts)
        fields = cls.__dataclass_fields__
        return cls(**{k: np.concatenate([getattr(p, k) for p in parts]) for k in fields})


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _segment_min(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Minimum of each contiguous segment; +inf for empty segments."""
    out = np.full(counts.size, np.inf)
    nz = counts > 0
    if values.size:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        out[nz] = np.minimum.reduceat(values, starts[nz])
    return out


def _simulate_block(cfg: NetworkConfig, n: int, rng: np.random.Generator,
                    interference: bool = True) -> TrialBatch:
    resample = cfg.empty_tier == "resample"
    r_max = cfg.r_m_m
    cnt_o, r_o = sample_radii(cfg.lambda_o_count, r_max, rng, n,
                              at_least_one=resample and cfg.lambda_o_count > 0)
    cnt_s, v_s = sample_radii(cfg.lambda_s_count, r_max, rng, n,
                              at_least_one=resample and cfg.lambda_s_count > 0)
    chi = rng.gamma(cfg.kappa, cfg.theta, v_s.size)
    chi_assoc = rng.gamma(cfg.kappa, cfg.theta, n) if cfg.association_fading else None
    tid_o = np.repeat(np.arange(n), cnt_o)
    tid_s = np.repeat(np.arange(n), cnt_s)

    # optical tier: only OBSs inside the FOV radius contribute
    h2 = cfg.h_m ** 2
    p = cfg.p_exp
    amp = cfg.vlc_amplitude
    vis = r_o <= cfg.t_radius
    r_vis, t_vis = r_o[vis], tid_o[vis]
    n_vis = np.bincount(t_vis, minlength=n)
    r_serv = _segment_min(r_vis, n_vis)
    has_obs = n_vis > 0
    r_serv[~has_obs] = np.nan
    pw = amp * (r_vis * r_vis + h2) ** (-p)
    signal = np.where(has_obs, amp * (r_serv * r_serv + h2) ** (-p), 0.0)
    # summing the non-serving terms avoids cancellation in total - signal
    serving_pt = r_vis == r_serv[t_vis]
    interf = np.bincount(t_vis, weights=np.where(serving_pt, 0.0, pw), minlength=n)
    if not interference:
        interf = np.zeros(n)
    with np.errstate(invalid="ignore"):
        sinr_vlc = np.where(has_obs, signal / (interf + cfg.noise_vlc), np.nan)

    # RF tier: nearest SBS serves, every other SBS interferes
    has_sbs = cnt_s > 0
    v_serv = _segment_min(v_s, cnt_s)
    v_serv[~has_sbs] = np.nan
    pw_s = cfg.rf_gain * v_s ** (-cfg.alpha) * chi
    serving_s = v_s == v_serv[tid_s]
    sig_s = np.bincount(tid_s, weights=np.where(serving_s, pw_s, 0.0), minlength=n)
    int_s = np.bincount(tid_s, weights=np.where(serving_s, 0.0, pw_s), minlength=n)
    if not interference:
        int_s = np.zeros(n)
    sinr_rf = np.where(has_sbs, sig_s / (int_s + cfg.noise_rf), 0.0)

    # association on mean received powers, i.e. v > sqrt(Z1) (r^2 + h^2)^((m+3)/alpha)
    with np.errstate(invalid="ignore"):
        g = math.sqrt(cfg.z1) * (r_serv * r_serv + h2) ** (p / cfg.alpha)
        if chi_assoc is not None:
            g = g * (chi_assoc / (cfg.kappa * cfg.theta)) ** (1.0 / cfg.alpha)
        assoc = has_obs & (~has_sbs | (v_serv > g))

    return TrialBatch(sinr_vlc=sinr_vlc, sinr_rf=sinr_rf, signal_vlc=signal,
                      interference_vlc=interf, n_visible=n_vis, r_serving=r_serv,
                      v_serving=v_serv, assoc_obs=assoc, has_sbs=has_sbs)


def simulate(cfg: NetworkConfig, trials: int, seed: int = 0, *, n_jobs: int = 1,
             interference: bool = True, block_size: int = BLOCK_SIZE) -> TrialBatch:
    """Simulate ``trials`` independent realisations of both tiers and fading."""
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    n_blocks = -(-trials // block_size)
    sizes = [min(block_size, trials - b * block_size) for b in range(n_blocks)]

    def work(b):
        return _simulate_block(cfg, sizes[b], _block_rng(seed, b), interference)

    if n_jobs == 1 or n_blocks == 1:
        parts = [work(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(work, range(n_blocks)))
    return TrialBatch.concat(parts)


def sample_deployment(cfg: NetworkConfig, rng: np.random.Generator) -> Deployment:
    """One explicit deployment with planar coordinates, used for inspection and tests."""
    region = cfg.region
    obs = sample_ppp(cfg.lambda_o, region, rng)
    sbs = sample_ppp(cfg.lambda_s, region, rng)
    return Deployment(obs, sbs, rng.gamma(cfg.kappa, cfg.theta, len(sbs)))


def run_trial(cfg: NetworkConfig, rng: np.random.Generator) -> TrialOutcome:
    """A single trial drawn from ``rng`` with rates and association."""
    b = _simulate_block(cfg, 1, rng)
    has_obs = b.n_visible[0] > 0
    sv = float(b.sinr_vlc[0]) if has_obs else None
    sr = float(b.sinr_rf[0])
    return TrialOutcome(
        sinr_vlc=sv,
        sinr_rf=sr,
        rate_vlc=cfg.b_o_hz / 2.0 * math.log2(1.0 + sv) if has_obs else 0.0,
        rate_rf=cfg.b_s_hz * math.log2(1.0 + sr),
        association="obs" if b.assoc_obs[0] else "sbs",
        interferer_count_vlc=int(max(b.n_visible[0] - 1, 0)),
    )


def coverage_indicator(batch: TrialBatch, cfg: NetworkConfig, mode: str) -> np.ndarray:
    """Per-trial boolean coverage under ``mode``'s rate rule."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    with np.errstate(invalid="ignore"):
        vlc = batch.sinr_vlc >= cfg.gamma_vlc
    rf = batch.has_sbs & (batch.sinr_rf >= cfg.gamma_rf)
    if mode == "vlc_only":
        return vlc
    if mode == "rf_only":
        return rf
    if mode == "hybrid":
        return vlc | rf
    return np.where(batch.assoc_obs, vlc, rf)


def _binomial_estimate(hits: np.ndarray) -> CoverageEstimate:
    n = hits.size
    p = float(np.mean(hits))
    return CoverageEstimate(p, 1.96 * math.sqrt(p * (1.0 - p) / n), n)


def estimate_coverage(cfg: NetworkConfig, mode: str, trials: int, seed: int = 0, *,
                      n_jobs: int = 1, interference: bool = True) -> CoverageEstimate:
    batch = simulate(cfg, trials, seed, n_jobs=n_jobs, interference=interference)
    return _binomial_estimate(coverage_indicator(batch, cfg, mode))


def interferer_pmf(cfg: NetworkConfig, trials: int, seed: int = 0, *,
                   batch: TrialBatch | None = None) -> np.ndarray:
    """Counts of VLC interferers, conditioned on at least one OBS in the FOV.

    Returns raw counts indexed by interferer number; an all-zero histogram
    (length 1) means no trial saw an OBS.
    """
    if batch is None:
        batch = simulate(cfg, trials, seed)
    k = batch.n_visible[batch.n_visible > 0] - 1
    if k.size == 0:
        return np.zeros(1, dtype=np.int64)
    return np.bincount(k)


def empirical_laplace(cfg: NetworkConfig, s_grid, trials: int, seed: int = 0, *,
                      batch: TrialBatch | None = None) -> list[LaplaceEvaluation]:
    """Empirical E[exp(-s I_a)]; trials without a visible OBS contribute 1."""
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid < 0):
        raise ValueError("s values must be non-negative")
    if batch is None:
        batch = simulate(cfg, trials, seed)
    interf = np.where(batch.n_visible > 0, batch.interference_vlc, 0.0)
    out = []
    for s in s_grid:
        e = np.exp(-s * interf)
        hw = 1.96 * float(np.std(e)) / math.sqrt(e.size)
        out.append(LaplaceEvaluation(float(s), float(np.mean(e)), hw))
    return out


def empirical_cf_omega(cfg: NetworkConfig, omega, trials: int, seed: int = 0, *,
                       batch: TrialBatch | None = None) -> np.ndarray:
    """Empirical E[exp(-j w Omega)] of Omega = X - gamma I_a given an OBS in the FOV."""
    if batch is None:
        batch = simulate(cfg, trials, seed)
    mask = batch.n_visible > 0
    omega_v = np.atleast_1d(np.asarray(omega, dtype=float))
    big = batch.signal_vlc[mask] - cfg.gamma_vlc * batch.interference_vlc[mask]
    out = np.array([np.mean(np.exp(-1j * w * big)) for w in omega_v])
    return out if np.ndim(omega) else out[0]


def _selected_sinr(batch: TrialBatch, mode: str) -> np.ndarray:
    vlc = np.nan_to_num(batch.sinr_vlc, nan=0.0)
    if mode == "vlc_only":
        return vlc
    if mode == "rf_only":
        return batch.sinr_rf
    if mode == "opportunistic":
        return np.where(batch.assoc_obs, vlc, batch.sinr_rf)
    raise ValueError("spectral efficiency is defined for rf_only, vlc_only and opportunistic")


def estimate_spectral_efficiency(cfg: NetworkConfig, mode: str, trials: int, seed: int = 0, *,
                                 batch: TrialBatch | None = None) -> tuple[float, float]:
    """Sample mean of log2(1 + SINR) and its 95% half width.

    A missing link (no visible OBS, no SBS) contributes zero.
    """
    if batch is None:
        batch = simulate(cfg, trials, seed)
    se = np.log2(1.0 + _selected_sinr(batch, mode))
    return float(np.mean(se)), 1.96 * float(np.std(se)) / math.sqrt(se.size)


def estimate_rate(cfg: NetworkConfig, mode: str, trials: int, seed: int = 0, *,
                  batch: TrialBatch | None = None) -> tuple[float, float]:
    """Sample mean rate in bit/s and its 95% half width.

    VLC links carry the DCO-OFDM prelog of one half; missing links give zero.
    """
    if batch is None:
        batch = simulate(cfg, trials, seed)
    se = np.log2(1.0 + _selected_sinr(batch, mode))
    vlc_bw = 0.5 * cfg.b_o_hz
    if mode == "vlc_only":
        bw = np.full(se.shape, vlc_bw)
    elif mode == "rf_only":
        bw = np.full(se.shape, cfg.b_s_hz)
    else:
        bw = np.where(batch.assoc_obs, vlc_bw, cfg.b_s_hz)
    rate = bw * se
    return float(np.mean(rate)), 1.96 * float(np.std(rate)) / math.sqrt(rate.size)


def estimate_association(cfg: NetworkConfig, trials: int, seed: int = 0, *,
                         batch: TrialBatch | None = None) -> CoverageEstimate:
    if batch is None:
        batch = simulate(cfg, trials, seed)
    return _binomial_estimate(batch.assoc_obs)
