"""VLC-only coverage, interference statistics and characteristic functions.

Notation used throughout: received VLC power from an OBS at horizontal
distance r is X(r) = A (r^2 + h^2)^-p with p = m + 3, only OBSs with r <= T
(the FOV radius) are seen, and given the serving distance r the
interferers form a PPP on the annulus (r, T] with mean count
mu(r) = lam_o pi (T^2 - r^2).  Each interferer power Y has u^2 uniform on
[r^2, T^2].  Coverage is P(Omega > c) with Omega = X - gamma I_a and
c = gamma B_o f^2 N_o.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..config import NetworkConfig
from ..specfun import ConvergenceError, gen_inc_gamma
from ._quad import composite_gl, gauss_legendre, nearest_distance_rule

__all__ = [
    "GilPelaezSpec",
    "GilPelaezResult",
    "NumericalError",
    "vlc_coverage_noise_limited",
    "vlc_interferer_pmf",
    "vlc_interferer_pmf_unconditional",
    "vlc_laplace_single",
    "vlc_laplace_conditional",
    "vlc_laplace_unconditional",
    "vlc_cf_omega",
    "vlc_cf_conditional",
    "vlc_coverage_exact",
    "vlc_coverage_given_r",
    "vlc_cf_asymptotic",
    "CfSeriesResult",
]


_SURE_TAIL = 1e-10


class NumericalError(ArithmeticError):
    """An oscillatory integral or series could not be resolved to tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class GilPelaezSpec:
    """Quadrature plan for the Gil-Pelaez inversion integral.

    Frequencies are measured in units of 1/S, where S is the spread of
    Omega (signal plus a six-sigma interference excursion), so a panel of
    width pi covers at most half a period of every bulk oscillation.  The
    integrand is finite at omega = 0 and Gauss nodes never sample it, so no
    explicit small-omega split is needed.

    omega_max: fixed normalised cut-off; ``None`` doubles the range until the
        tail bound drops below ``tail_tol``.
    method: ``"conditional"`` inverts per serving distance after removing the
        zero- and one-interferer terms in closed form; ``"direct"`` inverts
        the distance-averaged characteristic function as written.
    """

    omega_max: float | None = None
    nodes_per_panel: int = 16
    initial_panels: int = 32
    max_doublings: int = 9
    tail_tol: float = 2e-5
    r_nodes: int = 64
    method: str = "conditional"
    fail_tol: float = 1e-3

    def __post_init__(self):
        if self.omega_max is not None and not self.omega_max > 0:
            raise ValueError("omega_max must be positive")
        if self.method not in ("conditional", "direct"):
            raise ValueError("method must be 'conditional' or 'direct'")
        if self.nodes_per_panel < 4 or self.initial_panels < 1 or self.r_nodes < 8:
            raise ValueError("quadrature sizes too small")


@dataclass(frozen=True)
class GilPelaezResult:
    value: float
    tail_bound: float
    omega_max: float
    n_evaluations: int


def _geom(cfg: NetworkConfig):
    return cfg.vlc_amplitude, cfg.p_exp, cfg.h_m ** 2, cfg.t_radius ** 2


def _power(r, cfg):
    amp, p, h2, _ = _geom(cfg)
    return amp * (np.asarray(r, dtype=float) ** 2 + h2) ** (-p)


def _radius_for_power(x, cfg):
    """Horizontal distance at which the received power equals ``x`` (nan if none)."""
    amp, p, h2, _ = _geom(cfg)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (amp / np.asarray(x, dtype=float)) ** (1.0 / p) - h2
    return np.sqrt(np.where(q >= 0, q, np.nan))


def vlc_coverage_noise_limited(cfg: NetworkConfig) -> float:
    """Coverage without interference: P(r^2 <= min((A / (gamma N))^(1/p) - h^2, T^2))."""
    amp, p, h2, t2 = _geom(cfg)
    g = cfg.gamma_vlc
    if g <= 0:
        cap = t2
    else:
        rad = (amp / (g * cfg.noise_vlc)) ** (1.0 / p) - h2
        if rad <= 0:
            return 0.0
        cap = min(rad, t2)
    return min(max(-math.expm1(-cfg.lambda_o * math.pi * cap) / cfg.u_o, 0.0), 1.0)


def _mean_interferers(r, cfg):
    _, _, _, t2 = _geom(cfg)
    return cfg.lambda_o * math.pi * np.maximum(t2 - np.asarray(r, dtype=float) ** 2, 0.0)


def vlc_interferer_pmf(k, r, cfg: NetworkConfig):
    """P(N = k | r): Poisson with mean lam_o pi (T^2 - r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r > cfg.t_radius * (1 + 1e-12))):
        raise ValueError("r must lie in [0, T]")
    out = stats.poisson.pmf(k, _mean_interferers(r, cfg))
    return out.item() if np.ndim(out) == 0 else out


def _fov_rule(cfg, n):
    """Nearest-OBS rule on [0, T] (weights carry mass P(r <= T) with the 1/U normaliser)."""
    r, w = nearest_distance_rule(cfg.lambda_o, 0.0, cfg.t_radius, n)
    return r, w / cfg.u_o


def vlc_interferer_pmf_unconditional(k, cfg: NetworkConfig, n_nodes: int = 128):
    """P(N = k | at least one OBS in the FOV), averaging the Poisson law over r."""
    r, w = _fov_rule(cfg, n_nodes)
    if w.sum() <= 0:
        raise ValueError("no OBS can be visible: T = 0 or lam_o = 0")
    k = np.atleast_1d(np.asarray(k))
    mu = _mean_interferers(r, cfg)
    out = stats.poisson.pmf(k[:, None], mu[None, :]) @ w / w.sum()
    return out if np.ndim(k) and out.size > 1 else out.reshape(-1)


def vlc_laplace_single(s, r, cfg: NetworkConfig):
    """E[exp(-s Y)] for a single interferer with u^2 uniform on [r^2, T^2].

    Closed form through the generalized incomplete gamma function
    Gamma(-1/p, t_T, t_r) (sA)^(1/p) / (p (T^2 - r^2)), valid for complex s
    with non-negative real part on principal branches.  Thin annuli switch
    to Gauss-Legendre in u^2, where the closed form cancels.
    """
    amp, p, h2, t2 = _geom(cfg)
    s, r = np.broadcast_arrays(np.asarray(s, dtype=complex), np.asarray(r, dtype=float))
    shape = s.shape
    s, r = s.ravel(), r.ravel()
    if np.any(s.real < 0):
        raise ValueError("Re(s) must be non-negative")
    out = np.ones(s.shape, dtype=complex)
    width = t2 - r * r
    yr = r * r + h2
    thin = width <= 1e-4 * yr
    live = (s != 0) & ~thin
    if live.any():
        sa = s[live] * amp
        t_t = sa * (t2 + h2) ** (-p)
        t_r = sa * yr[live] ** (-p)
        out[live] = sa ** (1.0 / p) / (p * width[live]) * gen_inc_gamma(-1.0 / p, t_t, t_r)
    tl = thin & (s != 0)
    if tl.any():
        x, wq = gauss_legendre(0.0, 1.0, 8)
        y = yr[tl, None] + np.maximum(width[tl], 0.0)[:, None] * x[None, :]
        out[tl] = np.exp(-s[tl, None] * amp * y ** (-p)) @ wq
    out = out.reshape(shape)
    if np.all(out.imag == 0):
        out = out.real
    return out.item() if out.ndim == 0 else out


def vlc_laplace_conditional(s, r, cfg: NetworkConfig):
    """Laplace transform of the aggregate interference given serving distance r."""
    mu = _mean_interferers(r, cfg)
    single = vlc_laplace_single(s, r, cfg)
    out = np.exp(mu * (np.asarray(single) - 1.0))
    return out.item() if np.ndim(out) == 0 else out


def vlc_laplace_unconditional(s, cfg: NetworkConfig, n_nodes: int = 96):
    """E_r[L_{I|r}(s) 1{r <= T}] + P(r > T): the interference seen by the typical user."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    r, w = _fov_rule(cfg, n_nodes)
    p_in = float(w.sum())
    vals = vlc_laplace_conditional(s[:, None], r[None, :], cfg) @ w
    out = vals + (1.0 - p_in)
    return out if out.size > 1 else float(out[0])


def vlc_cf_conditional(omega, r, cfg: NetworkConfig):
    """E[exp(-j w Omega) | r] = exp(-j w X(r)) L_{I|r}(-j w gamma)."""
    omega = np.asarray(omega, dtype=float)
    x = _power(r, cfg)
    lap = vlc_laplace_conditional(-1j * omega * cfg.gamma_vlc + 0.0, r, cfg)
    return np.exp(-1j * omega * x) * lap


def vlc_cf_omega(omega, cfg: NetworkConfig, n_nodes: int = 96, rule=None):
    """Characteristic function E[exp(-j w Omega)] given an OBS in the FOV.

    ``rule`` optionally supplies (r, w) nodes for another serving-distance law.
    Negative frequencies are evaluated through conjugate symmetry.
    """
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    r, w = _fov_rule(cfg, n_nodes) if rule is None else rule
    total = w.sum()
    if total <= 0:
        raise ValueError("no OBS can be visible")
    w = w / total
    sign = np.where(om < 0, -1.0, 1.0)
    a = np.abs(om)
    vals = vlc_cf_conditional(a[:, None], r[None, :], cfg) @ w
    vals = np.where(sign < 0, np.conj(vals), vals)
    vals = np.where(om == 0, 1.0 + 0j, vals)
    return vals if np.ndim(omega) else complex(vals[0])


# ---------------------------------------------------------------------------
# Gil-Pelaez inversion
# ---------------------------------------------------------------------------

def _single_moments(r, cfg):
    """E[Y] and E[Y^2] for one interferer on the annulus (r, T]."""
    amp, p, h2, t2 = _geom(cfg)
    yr = r * r + h2
    yt = t2 + h2
    width = t2 - r * r
    out = []
    for k in (1, 2):
        kp = k * p
        with np.errstate(divide="ignore", invalid="ignore"):
            val = amp ** k * (yr ** (1 - kp) - yt ** (1 - kp)) / ((kp - 1) * width)
        val = np.where(width > 1e-12 * yr, val, amp ** k * yr ** (-kp))
        out.append(val)
    return out


def _remainder_cf(u, r, scale, cfg):
    """Characteristic function of Omega restricted to two or more interferers.

    Returns exp(-j w X) exp(-mu) (exp(mu L) - 1 - mu L) with w = u / scale.
    """
    om = u / scale
    mu = _mean_interferers(r, cfg)
    lap = vlc_laplace_single(-1j * om * cfg.gamma_vlc, np.broadcast_to(r, om.shape), cfg)
    z = mu * lap
    small = np.abs(z) < 0.05
    rem = np.empty(z.shape, dtype=complex)
    zz = z[small]
    term = zz * zz / 2.0
    acc = term.copy()
    for n in range(3, 12):
        term = term * zz / n
        acc = acc + term
    rem[small] = acc
    zb = z[~small]
    rem[~small] = np.exp(zb) - 1.0 - zb
    return np.exp(-1j * om * _power(r, cfg)) * np.exp(-mu) * rem


def _leading_terms(r, cfg):
    """P(Omega > c, N = 0 | r) + P(Omega > c, N = 1 | r) in closed form."""
    amp, p, h2, t2 = _geom(cfg)
    g = cfg.gamma_vlc
    c = g * cfg.noise_vlc
    x = _power(r, cfg)
    mu = _mean_interferers(r, cfg)
    p0 = np.exp(-mu) * (x > c)
    # one interferer: gamma Y < x - c  <=>  u^2 > (A g / (x - c))^(1/p) - h^2
    with np.errstate(divide="ignore", invalid="ignore"):
        qstar = (amp * g / (x - c)) ** (1.0 / p) - h2
        width = t2 - r * r
        frac = np.clip((t2 - np.maximum(qstar, r * r)) / width, 0.0, 1.0)
    frac = np.where(x > c, frac, 0.0)
    frac = np.where(width > 0, frac, 0.0)
    return p0 + mu * np.exp(-mu) * frac


def _r_breakpoints(cfg, r_hi):
    """Serving distances where the conditional coverage has a jump or kink."""
    g = cfg.gamma_vlc
    c = g * cfg.noise_vlc
    x_t = float(_power(cfg.t_radius, cfg))
    levels = [c, c + g * x_t]
    if g < 1:
        levels.append(c / (1.0 - g))
    pts = []
    for lv in levels:
        if lv > 0:
            rr = _radius_for_power(lv, cfg)
            if np.isfinite(rr) and 0 < rr < r_hi:
                pts.append(float(rr))
    return sorted(set(pts))


def _outage_chernoff(r, x, c, mu, cfg, n_theta: int = 10):
    """Upper bound on P(gamma I >= X - c | r) from exp(-s t) E[exp(s I)].

    The single-interferer MGF is integrated over tau = log(y / y_r) with
    panels refined towards tau = 0, where the exponent varies fastest.
    Values are only used to decide whether the tail is negligible.
    """
    amp, p, h2, t2 = _geom(cfg)
    yr = r * r + h2
    width = t2 - r * r
    tau_max = np.log((t2 + h2) / yr)
    edges = np.concatenate(([0.0], np.geomspace(1e-5, 1.0, 16)))
    tq, wq = composite_gl(edges, 8)
    tau = tq[None, :] * tau_max[:, None]
    jac = wq[None, :] * tau_max[:, None] * yr[:, None] * np.exp(tau)
    ratio = np.exp(-p * tau)
    t_norm = (x - c) / (cfg.gamma_vlc * x)
    best = np.zeros(r.shape)
    for theta in 2.0 ** np.arange(-2, n_theta - 2):
        with np.errstate(over="ignore"):
            mgf = (np.exp(theta * ratio) * jac).sum(axis=1) / np.where(width > 0, width, 1.0)
        log_b = -theta * t_norm + mu * (mgf - 1.0)
        best = np.minimum(best, log_b)
    return np.where(width > 0, np.exp(best), 0.0)


def vlc_coverage_given_r(r, cfg: NetworkConfig, gp: GilPelaezSpec | None = None,
                         return_info: bool = False):
    """P(Omega > c | r) for each serving distance in ``r`` (conditional inversion)."""
    gp = gp or GilPelaezSpec()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    g = cfg.gamma_vlc
    c = g * cfg.noise_vlc
    x = _power(r, cfg)
    mu = _mean_interferers(r, cfg)
    lead = _leading_terms(r, cfg)
    m_rem = -np.expm1(-mu) - mu * np.exp(-mu)
    out = lead.copy()
    bound = np.zeros(r.shape)
    # skip the inversion where a Chernoff bound already pins the outage down
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(x > c, _outage_chernoff(r, x, c, mu, cfg), 1.0)
    sure = (x > c) & (tail < _SURE_TAIL)
    out[sure] += m_rem[sure]
    bound[sure] = tail[sure]
    live = (x > c) & (m_rem > 1e-15) & ~sure
    cutoff = np.zeros(r.shape)
    evals = 0
    if live.any():
        rl = r[live]
        e1, e2 = _single_moments(rl, cfg)
        m_l = mu[live]
        spread = (x[live] - c) + g * (m_l * e1 + 6.0 * np.sqrt(m_l * e2))

        def fn(u, cols):
            sp = spread[cols][None, :]
            return np.imag(np.exp(1j * u * c / sp) * _remainder_cf(u, rl[cols][None, :], sp, cfg))

        vals, bnd, cut, evals = _gp_integrate(fn, gp, len(rl))
        out[live] = out[live] + m_rem[live] / 2.0 - vals / math.pi
        bound[live] = bnd
        cutoff[live] = cut
    out = np.clip(out, 0.0, 1.0)
    if return_info:
        return out, (bound, cutoff, evals)
    return out


def _gp_integrate(imag_fn, gp: GilPelaezSpec, width: int, chunk_size: int = 1 << 18):
    """Integrate imag_fn(u, cols) / u over (0, U) per column, doubling U column-wise.

    ``imag_fn(u, cols)`` maps a column vector of normalised frequencies and an
    index array of active columns to an array of shape (len(u), len(cols)).
    A column stops once its tail estimate falls below ``gp.tail_tol``.
    Returns per-column integrals, per-column tail bounds, per-column cut-offs
    and the number of integrand evaluations.
    """
    n = gp.nodes_per_panel
    fixed = gp.omega_max is not None
    u_hi = gp.omega_max if fixed else gp.initial_panels * math.pi
    total = np.zeros(width)
    bound = np.zeros(width)
    cutoff = np.zeros(width)
    active = np.arange(width)
    u_lo = 0.0
    evals = 0
    doublings = 0
    while active.size:
        n_pan = max(1, int(math.ceil((u_hi - u_lo) / math.pi)))
        u, w = composite_gl(np.linspace(u_lo, u_hi, n_pan + 1), n)
        chunk = np.zeros(active.size)
        step = max(n, (chunk_size // active.size) // n * n)
        for i in range(0, u.size, step):
            vals = imag_fn(u[i:i + step, None], active)
            chunk += (w[i:i + step] / u[i:i + step]) @ vals
        evals += u.size * active.size
        total[active] += chunk
        # an integrand decaying like u^-3 leaves a tail of about half its
        # final magnitude; the last chunk guards against slower decay
        tail = np.max(np.abs(vals[-n:]), axis=0) / 2.0
        est = np.maximum(tail, np.abs(chunk)) / math.pi
        bound[active] = est
        cutoff[active] = u_hi
        if fixed or doublings >= gp.max_doublings:
            break
        active = active[est >= gp.tail_tol]
        u_lo, u_hi = u_hi, 2.0 * u_hi
        doublings += 1
    return total, bound, cutoff, evals


def vlc_coverage_exact(cfg: NetworkConfig, gp: GilPelaezSpec | None = None,
                       return_info: bool = False, rule=None):
    """Exact VLC coverage by Gil-Pelaez inversion, including the factor P(r <= T).

    ``rule`` optionally supplies (r, w) nodes for another serving-distance
    law whose weights carry its own total mass (used for opportunistic
    coverage).  The default is the nearest-OBS law with the 1/U normaliser.
    """
    gp = gp or GilPelaezSpec()
    if cfg.lambda_o <= 0 or cfg.t_radius <= 0 or (rule is not None and rule[0].size == 0):
        res = GilPelaezResult(0.0, 0.0, 0.0, 0)
        return (0.0, res) if return_info else 0.0
    if rule is None:
        brk = _r_breakpoints(cfg, cfg.t_radius)
        r, w = nearest_distance_rule(cfg.lambda_o, 0.0, cfg.t_radius,
                                     gp.r_nodes * (1 + len(brk)), breaks=brk)
        w = w / cfg.u_o
    else:
        r, w = rule
    if gp.method == "direct":
        value, bound, cutoff, evals = _coverage_direct(cfg, gp, r, w)
    else:
        cond, (bounds, cuts, evals) = vlc_coverage_given_r(r, cfg, gp, return_info=True)
        value = float(np.dot(w, cond))
        bound = float(np.dot(w, bounds))
        cutoff = float(np.max(cuts)) if cuts.size else 0.0
    if gp.omega_max is None and bound > gp.fail_tol:
        raise NumericalError(
            f"Gil-Pelaez tail not resolved: bound {bound:.3g} at u_max={cutoff:.4g}", bound)
    value = min(max(value, 0.0), 1.0)
    info = GilPelaezResult(value, bound, cutoff, evals)
    return (value, info) if return_info else value


def _coverage_direct(cfg, gp, r, w):
    """Invert the distance-averaged characteristic function directly."""
    mass = float(w.sum())
    wn = w / mass
    g = cfg.gamma_vlc
    c = g * cfg.noise_vlc
    mu = _mean_interferers(r, cfg)
    e1, e2 = _single_moments(r, cfg)
    spread = float(np.max(_power(r, cfg) + g * (mu * e1 + 6.0 * np.sqrt(mu * e2))))

    def fn(u, cols):
        om = u[:, 0] / spread
        phi = vlc_cf_conditional(om[:, None], r[None, :], cfg) @ wn
        return np.imag(np.exp(1j * om * c) * phi)[:, None]

    vals, bnd, cut, evals = _gp_integrate(fn, gp, 1, chunk_size=1 << 12)
    return mass * (0.5 - float(vals[0]) / math.pi), mass * float(bnd[0]), float(cut[0]), evals


# ---------------------------------------------------------------------------
# Small-argument series for the characteristic function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CfSeriesResult:
    value: complex
    last_term: float
    partial_sums: tuple


def vlc_cf_asymptotic(omega: float, cfg: NetworkConfig, k_max: int = 20,
                      edge: str = "h2", tol: float = 1e-10, n_nodes: int = 96) -> CfSeriesResult:
    """Power-series form of the characteristic function for small Gamma arguments.

    Expanding exp(-s Y) in powers of s inside the single-interferer Laplace
    transform gives, for s = -j w gamma,

        mu (L - 1) = lam_o pi sum_{k>=1} (-s A)^k / k!
                     ((r^2+h^2)^(1-pk) - (T^2+h^2)^(1-pk)) / (pk - 1).

    The series is summed to ``k_max`` terms and averaged over r.  ``edge="h"``
    substitutes (T^2 + h) for (T^2 + h^2) in the outer term, the alternative
    reading kept for comparison; it is dimensionally inconsistent unless h = 1.
    Raises :class:`ConvergenceError` (carrying the partial result) when the
    last term exceeds ``tol`` relative to the running sum.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if edge not in ("h2", "h"):
        raise ValueError("edge must be 'h2' or 'h'")
    amp, p, h2, t2 = _geom(cfg)
    r, w = _fov_rule(cfg, n_nodes)
    w = w / w.sum()
    s = -1j * float(omega) * cfg.gamma_vlc
    y_r = r * r + h2
    y_t = t2 + (cfg.h_m if edge == "h" else h2)
    lam_pi = cfg.lambda_o * math.pi
    expo = np.zeros(r.shape, dtype=complex)
    partial = []
    last = 0.0
    coef = 1.0 + 0j
    for k in range(1, k_max + 1):
        coef = coef * (-s * amp) / k
        kp = k * p
        term = lam_pi * coef * (y_r ** (1 - kp) - y_t ** (1 - kp)) / (kp - 1)
        expo = expo + term
        last = float(np.max(np.abs(term)))
        with np.errstate(over="ignore", invalid="ignore"):
            val = complex(np.sum(w * np.exp(-1j * omega * _power(r, cfg) + expo)))
        partial.append(val)
    scale = max(1.0, float(np.max(np.abs(expo))))
    if last > tol * scale:
        raise ConvergenceError(
            f"series not converged after {k_max} terms (last term {last:.3g})", partial[-1])
    return CfSeriesResult(partial[-1], last, tuple(partial))
