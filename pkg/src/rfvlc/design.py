"""Traffic-load split design: choose lam_o, lam_s or Z1 so that P_o = beta.

Three solvers are offered, each exact with respect to its own model:

* ``solve_offload_closed`` inverts the wide-FOV closed form
  P_o = lam_o exp(-pi lam_s Z1 h^4) / (lam_o + 2 h^2 Z1 lam_s) via Lambert W;
* ``solve_offload_asymptotic`` inverts the sparse-RF approximation
  P_o = lam_o / (lam_o + 2 h^2 Z1 lam_s) (1 - exp(-pi lam_o T^2));
* ``solve_offload_numeric`` root-finds on the association quadrature.

Every solution also reports the association probability the quadrature
gives at the returned value, so the approximation gap is visible.
Intensities are per square metre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .analytic.association import association_probability, association_probability_asymptotic
from .config import NetworkConfig
from .specfun import lambert_w0

__all__ = [
    "FREE_PARAMETERS",
    "DesignTarget",
    "DesignSolution",
    "Z1Optimum",
    "closed_form_association",
    "solve_offload_closed",
    "optimal_z1_asymptotic",
    "solve_offload_asymptotic",
    "solve_offload_numeric",
    "with_parameter",
    "parameter_value",
]

FREE_PARAMETERS = ("lambda_o", "lambda_s", "z1")


@dataclass(frozen=True)
class DesignTarget:
    beta: float
    free_parameter: str
    config: NetworkConfig = field(default_factory=NetworkConfig)

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.free_parameter not in FREE_PARAMETERS:
            raise ValueError(f"free_parameter must be one of {FREE_PARAMETERS}")


@dataclass(frozen=True)
class DesignSolution:
    """Outcome of a design solve.

    ``achieved_beta_closed`` is P_o from the model the solver inverted (the
    closed form, the asymptotic form, or the quadrature for the numeric
    solver); ``achieved_beta_exact`` is the association quadrature.
    """
    value: float
    achieved_beta_closed: float
    achieved_beta_exact: float
    feasible: bool
    free_parameter: str
    method: str
    diagnostic: str = ""
    config: NetworkConfig | None = None


def parameter_value(cfg: NetworkConfig, name: str) -> float:
    if name == "lambda_o":
        return cfg.lambda_o
    if name == "lambda_s":
        return cfg.lambda_s
    if name == "z1":
        return cfg.z1
    raise ValueError(f"unknown design parameter {name!r}")


def with_parameter(cfg: NetworkConfig, name: str, value: float) -> NetworkConfig:
    """Copy of ``cfg`` with one design parameter set (intensities per m^2)."""
    if name == "lambda_o":
        return cfg.replace(lambda_o_count=value * cfg.area)
    if name == "lambda_s":
        return cfg.replace(lambda_s_count=value * cfg.area)
    if name == "z1":
        return cfg.replace(z1_override=value)
    raise ValueError(f"unknown design parameter {name!r}")


def _infeasible(target, method, msg, value=float("nan")):
    return DesignSolution(value, float("nan"), float("nan"), False, target.free_parameter, method, msg)


def _finish(target, method, value, model_fn, void):
    cfg = with_parameter(target.config, target.free_parameter, value)
    return DesignSolution(value, float(model_fn(cfg)), association_probability(cfg, void),
                          True, target.free_parameter, method, "", cfg)


# ---------------------------------------------------------------------------
# closed form
# ---------------------------------------------------------------------------

def closed_form_association(cfg: NetworkConfig) -> float:
    """lam_o exp(-pi lam_s Z1 h^4) / (lam_o + 2 h^2 Z1 lam_s)."""
    h2 = cfg.h_m ** 2
    ls_z1 = cfg.lambda_s * cfg.z1
    denom = cfg.lambda_o + 2.0 * h2 * ls_z1
    if denom <= 0:
        return 0.0
    return cfg.lambda_o * math.exp(-math.pi * ls_z1 * h2 * h2) / denom


def solve_offload_closed(target: DesignTarget, void: str = "disk") -> DesignSolution:
    """Invert the wide-FOV closed form; requires xi_fov = 90 degrees."""
    cfg = target.config
    method = "closed"
    if abs(cfg.xi_fov_deg - 90.0) > 1e-9:
        raise ValueError("the closed-form design assumes xi_fov_deg = 90")
    beta = target.beta
    h2 = cfg.h_m ** 2
    name = target.free_parameter
    if name in ("z1", "lambda_s"):
        k = cfg.lambda_o * math.pi * h2 / 2.0
        if k <= 0:
            return _infeasible(target, method, "lambda_o must be positive")
        # W(k e^k / beta) - k, with the argument formed in log space
        log_arg = math.log(k) + k - math.log(beta)
        if log_arg > 700:
            w = _lambert_w_log(log_arg)
        else:
            w = float(lambert_w0(math.exp(log_arg)))
        prod = (w - k) / (math.pi * h2 * h2)  # lam_s Z1
        if not prod > 0:
            return _infeasible(target, method, "Lambert-W solution is not positive")
        other = cfg.lambda_s if name == "z1" else cfg.z1
        if other <= 0:
            return _infeasible(target, method, "the fixed factor of lam_s Z1 must be positive")
        value = prod / other
    else:
        ls_z1 = cfg.lambda_s * cfg.z1
        c = math.pi * ls_z1 * h2 * h2
        d = 2.0 * h2 * ls_z1
        log_be = math.log(beta) + c
        if log_be >= 0.0:
            return _infeasible(
                target, method,
                f"log(beta exp(pi h^4 Z1 lam_s)) = {log_be:.6g} >= 0: no positive lam_o")
        value = beta * d / (math.exp(-c) - beta)
        if not value > 0:
            return _infeasible(target, method, "lam_o solution is not positive")
    return _finish(target, method, value, closed_form_association, void)


def _lambert_w_log(log_x: float) -> float:
    """W(exp(log_x)) for arguments too large to form directly."""
    w = log_x - math.log(log_x)
    for _ in range(50):
        step = (w + math.log(w) - log_x) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) < 1e-15 * w:
            break
    return w


# ---------------------------------------------------------------------------
# asymptotic (sparse RF tier)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Z1Optimum:
    """Stationary-point formula and the local grid check around it."""
    z1_star: float
    grid_factors: tuple
    grid_values: tuple
    value_at_star: float
    is_local_max: bool


def optimal_z1_asymptotic(cfg: NetworkConfig, factors=(0.8, 0.9, 1.1, 1.2),
                          literal_square: bool = False) -> Z1Optimum:
    """Z1* = lam_o cos xi (1 + e^{pi lam_o T^2 / 2} cos xi) / (2 h^2 lam_s (cos xi + e^{pi lam_o T^2 / 2})).

    The asymptotic association expression is evaluated on ``factors`` x Z1*
    and ``is_local_max`` reports whether none of them beats Z1*.
    """
    if cfg.lambda_s <= 0:
        raise ValueError("optimal_z1_asymptotic requires lambda_s > 0")
    if cfg.xi_fov_deg >= 90.0:
        raise ValueError("optimal_z1_asymptotic is degenerate at xi_fov_deg = 90 (cos xi = 0)")
    cxi = math.cos(math.radians(cfg.xi_fov_deg))
    e = math.exp(0.5 * math.pi * cfg.lambda_o * cfg.t_radius ** 2)
    z1 = cfg.lambda_o * cxi * (1.0 + e * cxi) / (2.0 * cfg.h_m ** 2 * cfg.lambda_s * (cxi + e))
    at = association_probability_asymptotic(cfg.replace(z1_override=z1), literal_square)
    vals = tuple(association_probability_asymptotic(cfg.replace(z1_override=f * z1), literal_square)
                 for f in factors)
    return Z1Optimum(z1, tuple(factors), vals, at, all(at >= v for v in vals))


def solve_offload_asymptotic(target: DesignTarget, literal_square: bool = False,
                             void: str = "disk") -> DesignSolution:
    """Invert the sparse-RF association approximation for the free parameter."""
    cfg = target.config
    method = "asymptotic"
    beta = target.beta
    lo = cfg.lambda_o
    h2 = cfg.h_m ** 2

    def model(c):
        return association_probability_asymptotic(c, literal_square)

    name = target.free_parameter
    if name in ("lambda_s", "z1"):
        lam_exp = lo * lo if literal_square else lo
        edge = -math.expm1(-math.pi * lam_exp * cfg.t_radius ** 2)
        num = lo * (edge - beta)
        if not num > 0:
            return _infeasible(target, method,
                               f"beta = {beta} must be below 1 - exp(-pi lam_o T^2) = {edge:.6g}")
        other = cfg.z1 if name == "lambda_s" else cfg.lambda_s
        if other <= 0:
            return _infeasible(target, method, "the fixed factor of lam_s Z1 must be positive")
        value = num / (2.0 * h2 * other * beta)
        return _finish(target, method, value, model, void)

    # lam_o enters both factors; P is increasing in lam_o, so bracket in log space
    def f(log_lam):
        return model(with_parameter(cfg, "lambda_o", math.exp(log_lam))) - beta

    a, b = math.log(max(lo, 1e-12)) - 2.0, math.log(max(lo, 1e-12)) + 2.0
    for _ in range(60):
        if f(a) < 0:
            break
        a -= 2.0
    for _ in range(60):
        if f(b) > 0:
            break
        b += 2.0
    if not (f(a) < 0 < f(b)):
        return _infeasible(target, method, "no lam_o reaches beta under the asymptotic model")
    root = optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _finish(target, method, math.exp(root), model, void)


# ---------------------------------------------------------------------------
# numeric root finding on the quadrature
# ---------------------------------------------------------------------------

def solve_offload_numeric(target: DesignTarget, bracket: tuple[float, float] | None = None,
                          void: str = "disk", tol: float = 1e-8,
                          max_doublings: int = 6, n_scan: int = 17) -> DesignSolution:
    """Bracketed root of association_probability(param) - beta.

    The default bracket is [x/8, 8x] around the current value x.  The bracket
    is widened by a factor of two at each end up to ``max_doublings`` times,
    and P_o is scanned on ``n_scan`` log-spaced points to check that it is
    monotone there, which makes the root unique.  Without a bracket the
    asymptotic solution (or the current value) seeds one.
    """
    cfg = target.config
    name = target.free_parameter
    method = "numeric"
    if bracket is None:
        base = parameter_value(cfg, name)
        guess = solve_offload_asymptotic(target, void=void)
        if guess.feasible and math.isfinite(guess.value) and guess.value > 0:
            base = guess.value
        base = base if base > 0 else 1e-3
        bracket = (base / 8.0, base * 8.0)
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def p_of(x):
        return association_probability(with_parameter(cfg, name, x), void)

    def g(x):
        return p_of(x) - target.beta

    f_lo, f_hi = g(lo), g(hi)
    doublings = 0
    while f_lo * f_hi > 0 and doublings < max_doublings:
        lo, hi = lo / 2.0, hi * 2.0
        f_lo, f_hi = g(lo), g(hi)
        doublings += 1
    if f_lo * f_hi > 0:
        return _infeasible(target, method,
                           f"no sign change on [{lo:.6g}, {hi:.6g}] after {doublings} doublings")
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([p_of(x) for x in grid])
    steps = np.diff(vals)
    # flat stretches only occur where P_o has saturated at 0 or 1, which beta never equals
    slack = 1e-14
    if not (np.all(steps > -slack) or np.all(steps < slack)) or np.all(np.abs(steps) <= slack):
        return _infeasible(target, method, "P_o is not monotone over the bracket")
    if f_lo == 0:
        root = lo
    elif f_hi == 0:
        root = hi
    else:
        root = optimize.brentq(g, lo, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps,
                               maxiter=500)
    sol = _finish(target, method, root, lambda c: association_probability(c, void), void)
    if abs(sol.achieved_beta_exact - target.beta) > tol:
        return DesignSolution(root, sol.achieved_beta_closed, sol.achieved_beta_exact, False, name,
                              method, f"root tolerance {tol} not reached", sol.config)
    return sol
