"""RF-only coverage: Laplace transform of the interference and three coverage forms.

The typical user is served by its nearest SBS at distance v and sees
interference from every other SBS in the annulus (v, R_m].  Interferer power
is P_s K x^-alpha chi with chi ~ Gamma(kappa, Theta), so with w(x) = P_s K Theta x^-alpha

    L_I(s | v) = exp(-pi lam_s (Phi(s, R_m) - Phi(s, v)))
    Phi(s, x)  = x^2 (1 - 2F1(kappa, -2/alpha; 1 - 2/alpha; -s w(x))).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from ..config import NetworkConfig
from ..specfun import alzer_rates, gauss_2f1
from ._quad import nearest_distance_rule

__all__ = [
    "rf_laplace_interference",
    "rf_conditional_coverage",
    "rf_coverage_exact",
    "rf_coverage_alzer",
    "rf_conditional_coverage_alzer",
    "rf_conditional_coverage_any",
    "rf_coverage_rayleigh",
    "rho",
]

_N_NODES = 96


def _pochhammer(a: float, k: int) -> float:
    return float(special.poch(a, k))


def _phi_term(x, sw, kappa, delta, k=0):
    """(-s)^k d^k/ds^k Phi(s, x) given s w(x) = ``sw``; k = 0 returns Phi itself."""
    x2 = np.asarray(x, dtype=float) ** 2
    if k == 0:
        return x2 * (1.0 - gauss_2f1(kappa, -delta, 1.0 - delta, -sw))
    coef = _pochhammer(kappa, k) * _pochhammer(-delta, k) / _pochhammer(1.0 - delta, k)
    return -x2 * sw ** k * coef * gauss_2f1(kappa + k, k - delta, k + 1.0 - delta, -sw)


def rf_laplace_interference(s, r, cfg: NetworkConfig, kappa: float | None = None):
    """L_I(s) for interferers in the annulus (r, R_m]; ``s`` in inverse power units."""
    kappa = cfg.kappa if kappa is None else kappa
    s, r = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(r, dtype=float))
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    if np.any((r < 0) | (r > cfg.r_m_m)):
        raise ValueError("r must lie in [0, R_m]")
    delta = 2.0 / cfg.alpha
    w = cfg.rf_gain * cfg.theta
    R = cfg.r_m_m
    out = np.ones(s.shape)
    pos = (s > 0) & (r > 0)
    if pos.any():
        ss, rr = s[pos], r[pos]
        diff = (_phi_term(R, ss * w * R ** -cfg.alpha, kappa, delta)
                - _phi_term(rr, ss * w * rr ** -cfg.alpha, kappa, delta))
        out[pos] = np.exp(-math.pi * cfg.lambda_s * diff)
    zero_r = (s > 0) & (r == 0)
    if zero_r.any():
        # interferers reach the origin: Phi(s, 0) = -(s w)^delta Gamma(1-delta) Gamma(kappa+delta) / Gamma(kappa)
        ss = s[zero_r]
        diff = _phi_term(R, ss * w * R ** -cfg.alpha, kappa, delta)
        diff = diff + (ss * w) ** delta * math.gamma(1 - delta) * math.gamma(kappa + delta) / math.gamma(kappa)
        out[zero_r] = np.exp(-math.pi * cfg.lambda_s * diff)
    return out.item() if out.ndim == 0 else out


def _log_lz_terms(v, cfg: NetworkConfig, kappa: int, interference: bool):
    """a_k = (-s)^k d^k/ds^k log L_Z(s) at s = gamma v^alpha / (P_s K Theta), k = 1..kappa-1."""
    delta = 2.0 / cfg.alpha
    g = cfg.gamma_rf
    R = cfg.r_m_m
    sw_v = np.full_like(v, g)
    sw_r = g * (v / R) ** cfg.alpha
    s_noise = g * cfg.noise_rf * v ** cfg.alpha / (cfg.rf_gain * cfg.theta)
    lam = cfg.lambda_s if interference else 0.0
    log_l = -math.pi * lam * (_phi_term(R, sw_r, kappa, delta) - _phi_term(v, sw_v, kappa, delta)) - s_noise
    terms = [log_l]
    for k in range(1, kappa):
        a_k = -math.pi * lam * (_phi_term(R, sw_r, kappa, delta, k) - _phi_term(v, sw_v, kappa, delta, k))
        if k == 1:
            a_k = a_k + s_noise
        terms.append(a_k)
    return terms


def rf_conditional_coverage(v, cfg: NetworkConfig, interference: bool = True):
    """Coverage given the serving SBS at distance ``v`` (integer kappa, exact form).

    Uses sum_{n<kappa} (-s)^n L_Z^(n)(s) / n! with the derivatives of
    L_Z = exp(log L_Z) built from the closed-form derivatives of 2F1
    via the complete Bell recursion.
    """
    kappa = _require_integer_kappa(cfg.kappa)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    terms = _log_lz_terms(v, cfg, kappa, interference)
    lz = np.exp(terms[0])
    b = [lz]
    for n in range(1, kappa):
        acc = np.zeros_like(lz)
        for j in range(n):
            acc = acc + math.comb(n - 1, j) * terms[j + 1] * b[n - 1 - j]
        b.append(acc)
    cov = sum(b[n] / math.factorial(n) for n in range(kappa))
    return np.clip(cov, 0.0, 1.0)


def _require_integer_kappa(kappa: float) -> int:
    k = round(kappa)
    if abs(kappa - k) > 1e-12 or k < 1:
        raise ValueError(
            f"kappa={kappa} is not a positive integer; use rf_coverage_alzer for non-integer shape")
    return int(k)


def _serving_rule(cfg: NetworkConfig, n: int = _N_NODES):
    v, w = nearest_distance_rule(cfg.lambda_s, 0.0, cfg.r_m_m, n)
    return v, w / cfg.u_s


def rf_coverage_exact(cfg: NetworkConfig, interference: bool = True) -> float:
    """Exact RF coverage for integer fading shape, averaged over the nearest-SBS distance."""
    if cfg.lambda_s <= 0:
        return 0.0
    v, w = _serving_rule(cfg)
    return float(np.clip(np.sum(w * rf_conditional_coverage(v, cfg, interference)), 0.0, 1.0))


def rf_conditional_coverage_alzer(v, cfg: NetworkConfig, max_terms: int = 256):
    """Alzer-form coverage given the serving distance ``v``."""
    kappa = cfg.kappa
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if abs(kappa - 1.0) < 1e-12:
        raise ValueError("kappa = 1 is exact; use rf_coverage_rayleigh")
    p_rate = alzer_rates(kappa)[0] if kappa > 1 else 1.0
    is_int = abs(kappa - round(kappa)) < 1e-12
    n_terms = int(round(kappa)) if is_int else max_terms
    v = np.atleast_1d(np.asarray(v, dtype=float))
    s = cfg.gamma_rf * v ** cfg.alpha / (cfg.rf_gain * cfg.theta)
    total = np.zeros_like(v)
    for l in range(1, n_terms + 1):
        c = (-1.0) ** (l + 1) * float(special.binom(kappa, l))
        if c == 0.0:
            continue
        sl = l * p_rate * s
        total = total + c * np.exp(-sl * cfg.noise_rf) * rf_laplace_interference(sl, v, cfg)
    return np.clip(total, 0.0, 1.0)


def rf_coverage_alzer(cfg: NetworkConfig, max_terms: int = 256) -> float:
    """Coverage with the Gamma tail replaced by 1 - (1 - exp(-p y))^kappa.

    The rate ``p`` is (kappa!)^(-1/kappa) for kappa > 1 and 1 for kappa < 1.
    Non-integer shapes expand the power with the generalized binomial series,
    truncated after ``max_terms`` terms.
    """
    if cfg.kappa <= 0:
        raise ValueError("kappa must be positive")
    if cfg.lambda_s <= 0:
        return 0.0
    v, w = _serving_rule(cfg)
    cov = rf_conditional_coverage_alzer(v, cfg, max_terms)
    return float(np.clip(np.sum(w * cov), 0.0, 1.0))


def rf_conditional_coverage_any(v, cfg: NetworkConfig):
    """Exact form for integer shapes, Alzer form otherwise."""
    if abs(cfg.kappa - round(cfg.kappa)) < 1e-12 and cfg.kappa >= 1:
        return rf_conditional_coverage(v, cfg)
    return rf_conditional_coverage_alzer(v, cfg)


def rho(v, cfg: NetworkConfig, gamma: float | None = None):
    """rho(v) with the Rayleigh-fading exponent exp(-pi lam_s v^2 (1 + rho(v))).

    rho(v) = integral of gamma^(2/alpha) / (1 + u^(alpha/2)) du over
    [gamma^(-2/alpha), (R_m/v)^2 gamma^(-2/alpha)], in closed form through
    2F1(1, 2/alpha; 1 + 2/alpha; .).
    """
    g = cfg.gamma_rf if gamma is None else gamma
    a = cfg.alpha
    d = 2.0 / a
    v = np.asarray(v, dtype=float)
    ratio = cfg.r_m_m / v
    f_hi = gauss_2f1(1.0, d, 1.0 + d, -ratio ** a / g)
    f_lo = gauss_2f1(1.0, d, 1.0 + d, -1.0 / g)
    # the primitive of 1 / (1 + u^(a/2)) is u 2F1(1, d; 1 + d; -u^(a/2))
    return ratio ** 2 * f_hi - f_lo


def rf_coverage_rayleigh(cfg: NetworkConfig) -> float:
    """Exact Rayleigh-fading coverage by adaptive quadrature over the serving distance."""
    if abs(cfg.kappa - 1.0) > 1e-12:
        raise ValueError("rf_coverage_rayleigh requires kappa = 1")
    if cfg.lambda_s <= 0:
        return 0.0
    lam = cfg.lambda_s
    g = cfg.gamma_rf
    R = cfg.r_m_m
    a = cfg.alpha

    def integrand(v):
        if v == 0.0:
            return 0.0
        rr = float(rho(v, cfg, g))
        noise = g * cfg.noise_rf * v ** a / (cfg.rf_gain * cfg.theta)
        return 2 * math.pi * lam * v * math.exp(-math.pi * lam * v * v * (1.0 + rr) - noise)

    val, _ = integrate.quad(integrand, 0.0, R, limit=200, epsabs=1e-12, epsrel=1e-10)
    return float(min(max(val / cfg.u_s, 0.0), 1.0))
