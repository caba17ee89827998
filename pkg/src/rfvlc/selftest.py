"""Fast internal consistency checks run by ``rfvlc selftest``.

Each check compares a production routine against an independent oracle
(scipy reference functions, direct quadrature or a short Monte-Carlo run)
and returns ``(name, passed, detail)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from . import analytic, simcore, specfun
from .config import NetworkConfig


def _lambert():
    x = np.logspace(-6, 6, 400)
    w = specfun.lambert_w0(x)
    err = float(np.max(np.abs(w * np.exp(w) - x) / x))
    return "lambert_w0 round trip", err < 1e-12, f"max rel err {err:.2e}"


def _hyp2f1():
    z = -np.logspace(-3, 2, 60)
    err = float(np.max(np.abs(specfun.gauss_2f1(2.0, -0.5435, 0.4565, z) / special.hyp2f1(2.0, -0.5435, 0.4565, z) - 1)))
    return "gauss_2f1 vs scipy hyp2f1", err < 1e-10, f"max rel err {err:.2e}"


def _inc_gamma():
    z, x, y = -0.25, 0.3, 4.0
    ref, _ = integrate.quad(lambda t: t ** (z - 1) * math.exp(-t), x, y, epsabs=0, epsrel=1e-13)
    val = float(specfun.gen_inc_gamma(z, x, y))
    err = abs(val - ref) / abs(ref)
    return "gen_inc_gamma vs quadrature", err < 1e-9, f"rel err {err:.2e}"


def _winitzki():
    x = np.arange(0.0, 6.0, 1e-3)
    err = float(np.max(np.abs(specfun.erf_approx_winitzki(x) - special.erf(x))))
    return "Winitzki erf error bound", err < 3.5e-4, f"max abs err {err:.2e}"


def _closed_assoc():
    cfg = NetworkConfig(alpha=4.0, k_interpretation="loss")
    a = analytic.association_probability(cfg, "plane", 256)
    b = analytic.association_probability_closed(cfg)
    return "closed-form association vs quadrature", abs(a - b) < 1e-6, f"|diff| {abs(a - b):.2e}"


def _mc_vlc():
    cfg = NetworkConfig(xi_fov_deg=60.0, h_m=1.0, empty_tier="resample")
    a = analytic.vlc_coverage_exact(cfg)
    est = simcore.estimate_coverage(cfg, "vlc_only", 20_000, seed=1)
    tol = max(0.02, 3 * est.half_width_95)
    return "VLC coverage vs Monte Carlo", abs(a - est.value) <= tol, \
        f"analytic {a:.4f} mc {est.value:.4f} tol {tol:.3f}"


def run_selftest(include_mc: bool = True):
    checks = [_lambert, _hyp2f1, _inc_gamma, _winitzki, _closed_assoc]
    if include_mc:
        checks.append(_mc_vlc)
    out = []
    for chk in checks:
        try:
            out.append(chk())
        except Exception as exc:  # a crash is reported as a failed check
            out.append((chk.__name__.lstrip("_"), False, f"raised {type(exc).__name__}: {exc}"))
    return out
