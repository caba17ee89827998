"""Average spectral efficiency through Hamdi's lemma.

For a signal X and an independent interference Y,

    E[ln(1 + X / (Y + N))] = int_0^inf (1 - L_X(z)) L_Y(z) exp(-z N) / z dz,

with L the Laplace transforms E[exp(-z .)].  The integral is taken in the
log variable tau = ln(z E[X]), which turns the 1/z weight into a flat
measure; the integrand decays like exp(tau) on the left and is cut off by
the noise factor on the right.  Results are in bits/s/Hz.
"""
from __future__ import annotations

import math

import numpy as np

from ..config import NetworkConfig
from ._quad import composite_gl, nearest_distance_rule
from .association import obs_serving_rule, sbs_serving_rule
from .rf import rf_laplace_interference
from .vlc import _power, vlc_laplace_conditional

__all__ = [
    "spectral_efficiency_rf_given_v",
    "spectral_efficiency_vlc_given_r",
    "spectral_efficiency_rf",
    "spectral_efficiency_vlc",
    "spectral_efficiency_opportunistic",
    "rate_rf",
    "rate_vlc",
    "rate_opportunistic",
]

_TAU_LO = -35.0
_TAIL = 50.0
_NODES = 8
_N_DIST = 96
# log-singular SE at v -> 0 needs graded panels at the near end
_GRADE = 12


def _tau_rule(snr: float):
    """Nodes in tau = ln u on [-35, ln(50 snr)] with unit-width panels."""
    hi = math.log(_TAIL * snr) if np.isfinite(snr) else 80.0
    hi = max(hi, _TAU_LO + 1.0)
    n_pan = max(1, int(math.ceil(hi - _TAU_LO)))
    return composite_gl(np.linspace(_TAU_LO, hi, n_pan + 1), _NODES)


def spectral_efficiency_rf_given_v(v, cfg: NetworkConfig, interference: bool = True):
    """E[log2(1 + SINR) | serving SBS at distance v]."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    q = cfg.rf_gain * cfg.theta
    kappa = cfg.kappa
    out = np.empty(v.size)
    for i, vi in enumerate(v):
        mean_rx = q * vi ** -cfg.alpha
        snr = mean_rx / cfg.noise_rf if cfg.noise_rf > 0 else np.inf
        tau, w = _tau_rule(snr)
        u = np.exp(tau)
        z = u / mean_rx
        sig = -np.expm1(-kappa * np.log1p(u))
        lap = rf_laplace_interference(z, np.full_like(z, vi), cfg) if interference else 1.0
        out[i] = float(np.dot(w, sig * lap * np.exp(-z * cfg.noise_rf)))
    return out / math.log(2.0)


def spectral_efficiency_vlc_given_r(r, cfg: NetworkConfig, interference: bool = True):
    """E[log2(1 + SINR) | serving OBS at distance r] (no DCO-OFDM prelog)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = _power(r, cfg)
    out = np.empty(r.size)
    for i, (ri, xi) in enumerate(zip(r, x)):
        snr = xi / cfg.noise_vlc if cfg.noise_vlc > 0 else np.inf
        tau, w = _tau_rule(snr)
        u = np.exp(tau)
        z = u / xi
        lap = vlc_laplace_conditional(z, np.full_like(z, ri), cfg) if interference else 1.0
        out[i] = float(np.dot(w, -np.expm1(-u) * lap * np.exp(-z * cfg.noise_vlc)))
    return out / math.log(2.0)


def spectral_efficiency_rf(cfg: NetworkConfig, interference: bool = True,
                           n_nodes: int = _N_DIST) -> float:
    """Average RF spectral efficiency over the nearest-SBS distance."""
    if cfg.lambda_s <= 0:
        return 0.0
    v, w = nearest_distance_rule(cfg.lambda_s, 0.0, cfg.r_m_m, n_nodes, grade=_GRADE)
    return float(np.dot(w / cfg.u_s, spectral_efficiency_rf_given_v(v, cfg, interference)))


def spectral_efficiency_vlc(cfg: NetworkConfig, interference: bool = True,
                            n_nodes: int = _N_DIST) -> float:
    """Average VLC spectral efficiency; users with no OBS in the FOV contribute zero."""
    if cfg.lambda_o <= 0 or cfg.t_radius <= 0:
        return 0.0
    r, w = nearest_distance_rule(cfg.lambda_o, 0.0, cfg.t_radius, n_nodes)
    return float(np.dot(w / cfg.u_o, spectral_efficiency_vlc_given_r(r, cfg, interference)))


def spectral_efficiency_opportunistic(cfg: NetworkConfig, void: str = "disk",
                                      n_nodes: int = _N_DIST, return_parts: bool = False):
    """P_o E[SE_o | OBS] + (1 - P_o) E[SE_s | SBS], averaged over the serving-distance laws."""
    r, w = obs_serving_rule(cfg, void, n_nodes)
    keep = w > 1e-15
    se_o = float(np.dot(w[keep], spectral_efficiency_vlc_given_r(r[keep], cfg))) if keep.any() else 0.0
    v, wv = sbs_serving_rule(cfg, void, n_nodes, grade=_GRADE)
    keep = wv > 1e-15
    se_s = float(np.dot(wv[keep], spectral_efficiency_rf_given_v(v[keep], cfg))) if keep.any() else 0.0
    if return_parts:
        return se_o + se_s, {"p_o": float(w.sum()), "vlc_part": se_o, "rf_part": se_s}
    return se_o + se_s


def rate_rf(cfg: NetworkConfig, interference: bool = True) -> float:
    """Average RF rate in bit/s."""
    return cfg.b_s_hz * spectral_efficiency_rf(cfg, interference)


def rate_vlc(cfg: NetworkConfig, interference: bool = True) -> float:
    """Average VLC rate in bit/s, with the DCO-OFDM prelog of one half."""
    return 0.5 * cfg.b_o_hz * spectral_efficiency_vlc(cfg, interference)


def rate_opportunistic(cfg: NetworkConfig, void: str = "disk") -> float:
    """Average rate when each user is served by the tier it associates to."""
    _se, parts = spectral_efficiency_opportunistic(cfg, void, return_parts=True)
    return 0.5 * cfg.b_o_hz * parts["vlc_part"] + cfg.b_s_hz * parts["rf_part"]
