"""Tier association, serving-distance laws and the composite network configurations.

A user with a visible OBS at distance r and its nearest SBS at distance v
associates to the OBS iff v > g(r) = sqrt(Z1) (r^2 + h^2)^((m+3)/alpha),
i.e. iff the VLC power beats the mean RF power.

Two conventions exist for the nearest-SBS void probability P(v > x):

``"disk"``  the exact finite-disk law conditioned on at least one SBS,
            (exp(-lam_s pi min(x, R)^2) - exp(-lam_s pi R^2)) / U_s.  This is
            what the simulator reproduces with ``empty_tier="resample"``.
``"plane"`` exp(-lam_s pi x^2), the infinite-plane form assumed by the
            closed-form corollaries.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..config import NetworkConfig
from ..specfun import erf_approx_winitzki
from ._quad import nearest_distance_rule
from .rf import rf_conditional_coverage_any
from .vlc import GilPelaezSpec, _r_breakpoints, vlc_coverage_exact

__all__ = [
    "VOIDS",
    "assoc_threshold",
    "association_probability",
    "association_probability_closed",
    "association_probability_asymptotic",
    "serving_distance_pdf_obs",
    "serving_distance_pdf_sbs",
    "obs_serving_rule",
    "sbs_serving_rule",
    "opportunistic_coverage",
    "hybrid_coverage",
]

VOIDS = ("disk", "plane")
_N_NODES = 128
_MASS_FLOOR = 1e-15


def _check_void(void):
    if void not in VOIDS:
        raise ValueError(f"void must be one of {VOIDS}")


def assoc_threshold(r, cfg: NetworkConfig):
    """g(r): the OBS at r wins iff the nearest SBS is farther than g(r)."""
    r = np.asarray(r, dtype=float)
    return math.sqrt(cfg.z1) * (r * r + cfg.h_m ** 2) ** (cfg.p_exp / cfg.alpha)


def _inverse_threshold(x, cfg: NetworkConfig):
    """G(x) with g(G(x)) = x, clipped at zero below g(0)."""
    x = np.asarray(x, dtype=float)
    q = (x / math.sqrt(cfg.z1)) ** (cfg.alpha / cfg.p_exp) - cfg.h_m ** 2
    return np.sqrt(np.maximum(q, 0.0))


def _void(x, lam, count, r_max, u_norm, void):
    """P(nearest point of the tier lies beyond x)."""
    x = np.asarray(x, dtype=float)
    if lam <= 0:
        return np.ones_like(x)
    if void == "plane":
        return np.exp(-lam * math.pi * x * x)
    xm = np.minimum(x, r_max)
    empty = math.exp(-count) if u_norm < 1.0 else 0.0
    return np.clip((np.exp(-lam * math.pi * xm * xm) - empty) / u_norm, 0.0, 1.0)


def _sbs_void(x, cfg, void):
    return _void(x, cfg.lambda_s, cfg.lambda_s_count, cfg.r_m_m, cfg.u_s, void)


def _obs_void(x, cfg, void):
    return _void(x, cfg.lambda_o, cfg.lambda_o_count, cfg.r_m_m, cfg.u_o, void)


def _obs_breaks(cfg, void, extra=()):
    brk = list(extra)
    if void == "disk" and cfg.lambda_s > 0:
        rr = _inverse_threshold(cfg.r_m_m, cfg)
        if 0 < rr < cfg.t_radius:
            brk.append(float(rr))
    return sorted(set(brk))


def obs_serving_rule(cfg: NetworkConfig, void: str = "disk", n: int = _N_NODES, extra_breaks=()):
    """Nodes/weights on [0, T] whose weights sum to P_o (density f_{X_o} times P_o)."""
    _check_void(void)
    if cfg.t_radius <= 0 or cfg.lambda_o <= 0:
        return np.zeros(0), np.zeros(0)
    brk = _obs_breaks(cfg, void, extra_breaks)
    r, w = nearest_distance_rule(cfg.lambda_o, 0.0, cfg.t_radius, n * (1 + len(brk)), breaks=brk)
    w = w / cfg.u_o * _sbs_void(assoc_threshold(r, cfg), cfg, void)
    return r, w


def sbs_serving_rule(cfg: NetworkConfig, void: str = "disk", n: int = _N_NODES, grade: int = 0):
    """Nodes/weights on [0, R_m] whose weights sum to 1 - P_o."""
    _check_void(void)
    if cfg.lambda_s <= 0:
        return np.zeros(0), np.zeros(0)
    brk = [float(assoc_threshold(0.0, cfg)), float(assoc_threshold(cfg.t_radius, cfg))]
    brk = [b for b in brk if 0 < b < cfg.r_m_m]
    v, w = nearest_distance_rule(cfg.lambda_s, 0.0, cfg.r_m_m, n * (1 + len(brk)), breaks=brk, grade=grade)
    cap = np.minimum(_inverse_threshold(v, cfg), cfg.t_radius)
    w = w / cfg.u_s * _obs_void(cap, cfg, void)
    return v, w


def association_probability(cfg: NetworkConfig, void: str = "disk", n_nodes: int = _N_NODES) -> float:
    """Probability that the typical user associates to the OBS tier (numerical quadrature)."""
    _r, w = obs_serving_rule(cfg, void, n_nodes)
    return float(min(max(w.sum(), 0.0), 1.0))


def association_probability_closed(cfg: NetworkConfig, erf: str = "exact") -> float:
    """Closed form for m + 3 = alpha with the plane void law.

    With a = lam_s pi Z1 and b = lam_o pi the integrand is Gaussian in
    r^2 + h^2, giving (Z2 / U) [erf(B) - erf(A)] exp(b^2 / 4a + b h^2) with
    Z2 = pi lam_o / (2 sqrt(lam_s Z1)), A = sqrt(a) h^2 + b / (2 sqrt(a)) and
    B = sqrt(a) (T^2 + h^2) + b / (2 sqrt(a)).  The exact branch evaluates the
    bracket through erfcx to avoid overflow; ``erf="winitzki"`` substitutes
    the elementary approximation of erf.
    """
    if abs(cfg.p_exp - cfg.alpha) >= 1e-9:
        raise ValueError(
            f"closed form requires m + 3 = alpha (got m + 3 = {cfg.p_exp:.12g}, alpha = {cfg.alpha})")
    if erf not in ("exact", "winitzki"):
        raise ValueError("erf must be 'exact' or 'winitzki'")
    t2 = cfg.t_radius ** 2
    if t2 <= 0 or cfg.lambda_o <= 0:
        return 0.0
    h2 = cfg.h_m ** 2
    b = cfg.lambda_o * math.pi
    if cfg.lambda_s <= 0:
        return float(-math.expm1(-b * t2) / cfg.u_o)
    a = cfg.lambda_s * math.pi * cfg.z1
    sa = math.sqrt(a)
    z2 = math.pi * cfg.lambda_o / (2.0 * math.sqrt(cfg.lambda_s * cfg.z1))
    big_a = sa * h2 + b / (2.0 * sa)
    big_b = sa * (t2 + h2) + b / (2.0 * sa)
    if erf == "exact":
        bracket = (special.erfcx(big_a) * math.exp(-a * h2 * h2)
                   - special.erfcx(big_b) * math.exp(-a * (t2 + h2) ** 2 - b * t2))
    else:
        expo = b * b / (4.0 * a) + b * h2
        bracket = _tail_winitzki(big_a, expo) - _tail_winitzki(big_b, expo)
    return float(min(max(z2 * bracket / cfg.u_o, 0.0), 1.0))


def _tail_winitzki(x, expo):
    """exp(expo) (1 - erf_w(x)) evaluated in log space."""
    if x <= 0:
        return math.exp(expo) * (1.0 - float(erf_approx_winitzki(x)))
    a = 8.0 * (math.pi - 3.0) / (3.0 * math.pi * (4.0 - math.pi))
    k = x * x * (4.0 / math.pi + a * x * x) / (1.0 + a * x * x)
    log_tail = -k - math.log1p(math.sqrt(-math.expm1(-k)))
    return math.exp(expo + log_tail)


def association_probability_asymptotic(cfg: NetworkConfig, literal_square: bool = False) -> float:
    """Small-lam_s approximation lam_o / (lam_o + 2 h^2 Z1 lam_s) (1 - exp(-pi lam_o T^2)).

    ``literal_square=True`` uses lam_o^2 in the exponent instead, which is
    not dimensionally consistent and is kept only for comparison.
    """
    lo, ls = cfg.lambda_o, cfg.lambda_s
    if lo <= 0:
        return 0.0
    lam_exp = lo * lo if literal_square else lo
    first = lo / (lo + 2.0 * cfg.h_m ** 2 * cfg.z1 * ls)
    return float(first * -math.expm1(-math.pi * lam_exp * cfg.t_radius ** 2))


def serving_distance_pdf_obs(x, cfg: NetworkConfig, void: str = "disk"):
    """Density of the serving-OBS distance given association to the OBS tier."""
    _check_void(void)
    p_o = association_probability(cfg, void)
    if p_o <= 0:
        raise ValueError("association probability is zero: the conditional law is undefined")
    x = np.asarray(x, dtype=float)
    lam = cfg.lambda_o
    base = 2 * math.pi * lam * x * np.exp(-math.pi * lam * x * x) / cfg.u_o
    out = base * _sbs_void(assoc_threshold(x, cfg), cfg, void) / p_o
    out = np.where((x >= 0) & (x <= cfg.t_radius), out, 0.0)
    return out.item() if out.ndim == 0 else out


def serving_distance_pdf_sbs(x, cfg: NetworkConfig, void: str = "disk"):
    """Density of the serving-SBS distance given association to the RF tier."""
    _check_void(void)
    p_s = 1.0 - association_probability(cfg, void)
    if p_s <= 0:
        raise ValueError("RF association probability is zero: the conditional law is undefined")
    x = np.asarray(x, dtype=float)
    lam = cfg.lambda_s
    base = 2 * math.pi * lam * x * np.exp(-math.pi * lam * x * x) / cfg.u_s
    cap = np.minimum(_inverse_threshold(x, cfg), cfg.t_radius)
    out = base * _obs_void(cap, cfg, void) / p_s
    out = np.where((x >= 0) & (x <= cfg.r_m_m), out, 0.0)
    return out.item() if out.ndim == 0 else out


def opportunistic_coverage(cfg: NetworkConfig, gp: GilPelaezSpec | None = None,
                           void: str = "disk", return_parts: bool = False):
    """P_o C_o + (1 - P_o) C_s with both terms averaged over the serving-distance laws."""
    gp = gp or GilPelaezSpec()
    extra = _r_breakpoints(cfg, cfg.t_radius) if cfg.t_radius > 0 else []
    r, w = obs_serving_rule(cfg, void, gp.r_nodes, extra)
    p_o = float(w.sum())
    # nodes whose mass is below double precision of the total cannot move the result
    keep = w > _MASS_FLOOR
    part_o = vlc_coverage_exact(cfg, gp, rule=(r[keep], w[keep])) if keep.any() else 0.0
    v, wv = sbs_serving_rule(cfg, void)
    part_s = float(np.dot(wv, rf_conditional_coverage_any(v, cfg))) if v.size else 0.0
    total = float(min(max(part_o + part_s, 0.0), 1.0))
    if return_parts:
        return total, {"p_o": p_o, "vlc_part": part_o, "rf_part": part_s}
    return total


def hybrid_coverage(c_o, c_s):
    """1 - (1 - C_o)(1 - C_s): outage only when both independent links fail."""
    c_o = np.asarray(c_o, dtype=float)
    c_s = np.asarray(c_s, dtype=float)
    if not np.all((c_o >= 0) & (c_o <= 1) & (c_s >= 0) & (c_s <= 1)):
        raise ValueError("coverage probabilities must lie in [0, 1]")
    out = 1.0 - (1.0 - c_o) * (1.0 - c_s)
    return out.item() if out.ndim == 0 else out
