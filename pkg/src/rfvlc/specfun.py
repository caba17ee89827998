"""Special functions used by the analytic engine.

Everything here is vectorised over the argument (``z`` for the
hypergeometric function, ``x`` for the incomplete Gamma functions) and
works on plain numpy arrays.  Parameters that select a function from a
family (``a, b, c`` or the Gamma order) are scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import rgamma as _rgamma

__all__ = [
    "ToleranceSpec",
    "ConvergenceError",
    "gauss_2f1",
    "upper_inc_gamma",
    "gen_inc_gamma",
    "lambert_w0",
    "erf_approx_winitzki",
    "erf_approx_tail",
    "gamma_cdf_alzer_bounds",
    "WINITZKI_A",
]

WINITZKI_A = 8.0 * (math.pi - 3.0) / (3.0 * math.pi * (4.0 - math.pi))

_FPMIN = 1e-300


@dataclass(frozen=True)
class ToleranceSpec:
    rel_tol: float = 1e-15
    abs_tol: float = 1e-300
    max_terms: int = 5000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOL = ToleranceSpec()


class ConvergenceError(ArithmeticError):
    """A series or continued fraction did not converge.

    ``partial`` holds the value reached when the iteration stopped.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def _is_nonpos_int(v, eps=1e-12):
    return v <= eps and abs(v - round(v)) < eps


def _scalar_out(arr, like):
    return arr.item() if np.ndim(like) == 0 else arr


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------

def _f21_series(a, b, c, z, tol):
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for n in range(tol.max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + np.where(active, term, 0.0)
        small = np.abs(term) <= tol.rel_tol * np.abs(total) + tol.abs_tol
        active &= ~small
        if not active.any():
            return total
        if a + n == 0 or b + n == 0:  # terminating polynomial
            return total
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; z) series did not converge in {tol.max_terms} terms",
        partial=total,
    )


def _f21_inverse(a, b, c, z, tol):
    """Analytic continuation to z <= -2 through 1/z (a - b not an integer)."""
    w = 1.0 / z
    mz = -z
    g_c = _gamma(c)
    c1 = g_c * _gamma(b - a) * _rgamma(b) * _rgamma(c - a)
    c2 = g_c * _gamma(a - b) * _rgamma(a) * _rgamma(c - b)
    out = np.zeros_like(z)
    if c1 != 0.0:
        out = out + c1 * mz ** (-a) * _f21_series(a, a - c + 1.0, a - b + 1.0, w, tol)
    if c2 != 0.0:
        out = out + c2 * mz ** (-b) * _f21_series(b, b - c + 1.0, b - a + 1.0, w, tol)
    return out


def _f21_pfaff(a, b, c, z, tol):
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _f21_series(a, c - b, c, w, tol)


def gauss_2f1(a, b, c, z, tol: ToleranceSpec = DEFAULT_TOL):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.

    Power series on |z| <= 1/2, the Pfaff transformation on [-2, -1/2) and
    the 1/z continuation below -2.  When ``a - b`` is an integer the 1/z
    formula is singular and the Pfaff series is summed instead, which is
    slow for very negative z and may raise :class:`ConvergenceError`.
    """
    if _is_nonpos_int(c):
        raise ValueError(f"c={c} is a non-positive integer")
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr >= 1.0):
        raise ValueError("gauss_2f1 is only defined here for z < 1")
    out = np.empty_like(z_arr)

    direct = np.abs(z_arr) <= 0.5
    if direct.any():
        out[direct] = _f21_series(a, b, c, z_arr[direct], tol)
    pos = z_arr > 0.5
    if pos.any():
        # Pfaff maps (1/2, 1) onto (-inf, -1); recurse on the negative branch.
        zp = z_arr[pos]
        out[pos] = (1.0 - zp) ** (-a) * gauss_2f1(a, c - b, c, zp / (zp - 1.0), tol)
    mid = (z_arr < -0.5) & (z_arr >= -2.0)
    if mid.any():
        out[mid] = _f21_pfaff(a, b, c, z_arr[mid], tol)
    far = z_arr < -2.0
    if far.any():
        d = a - b
        if abs(d - round(d)) < 1e-9:
            big = ToleranceSpec(tol.rel_tol, tol.abs_tol, max(tol.max_terms, 200000))
            out[far] = _f21_pfaff(a, b, c, z_arr[far], big)
        else:
            out[far] = _f21_inverse(a, b, c, z_arr[far], tol)
    return _scalar_out(out, z)


# ---------------------------------------------------------------------------
# Incomplete Gamma functions (complex argument allowed)
# ---------------------------------------------------------------------------

def _lower_series(a, x, tol):
    """gamma(a, x) = x^a e^-x sum x^n / (a (a+1) ... (a+n)),  a > 0."""
    ap = a
    term = np.full(x.shape, 1.0 / a, dtype=x.dtype)
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(tol.max_terms):
        ap += 1.0
        term = term * x / ap
        total = total + np.where(active, term, 0.0)
        active &= np.abs(term) > tol.rel_tol * np.abs(total)
        if not active.any():
            break
    else:
        raise ConvergenceError("lower incomplete gamma series did not converge", total)
    return total * np.exp(-x + a * np.log(x))


def _upper_cf(a, x, tol):
    """Legendre continued fraction for Gamma(a, x), modified Lentz."""
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / _FPMIN, dtype=x.dtype)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, tol.max_terms + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > tol.rel_tol
        if not active.any():
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge", h)
    return np.exp(-x + a * np.log(x)) * h


def _use_cf(a, x):
    if np.iscomplexobj(x):
        return np.abs(x) >= 10.0
    return x >= max(a, 0.0) + 1.0


def upper_inc_gamma(z, x, tol: ToleranceSpec = DEFAULT_TOL):
    """Upper incomplete Gamma function, integral of t^(z-1) e^-t over [x, inf).

    ``z`` may be negative (but not a non-positive integer).  For small |x|
    the value comes from the lower series at a positive order and the
    recurrence Gamma(z, x) = (Gamma(z+1, x) - x^z e^-x) / z; for large |x|
    the Legendre continued fraction is used directly, since the recurrence
    cancels there.  ``x`` may be complex off the negative real axis, which
    the Laplace transform of the optical interference needs on the
    imaginary axis.
    """
    z = float(z)
    x_arr = np.atleast_1d(np.asarray(x))
    if not np.iscomplexobj(x_arr):
        x_arr = x_arr.astype(float)
    if _is_nonpos_int(z):
        raise ValueError(f"z={z} is a non-positive integer")
    if np.iscomplexobj(x_arr):
        bad = (x_arr.real <= 0) & (x_arr.imag == 0)
    else:
        bad = x_arr <= 0
    if np.any(bad):
        raise ValueError("upper_inc_gamma needs x off the non-positive real axis")

    out = np.empty(x_arr.shape, dtype=x_arr.dtype)
    cf = _use_cf(z, x_arr)
    if cf.any():
        out[cf] = _upper_cf(z, x_arr[cf], tol)
    ser = ~cf
    if ser.any():
        xs = x_arr[ser]
        steps = 0 if z > 0 else int(math.floor(-z)) + 1
        top = z + steps
        value = _gamma(top) - _lower_series(top, xs, tol)
        if steps:
            ex = np.exp(-xs)
            logx = np.log(xs)
            for k in range(steps - 1, -1, -1):
                zk = z + k
                value = (value - np.exp(zk * logx) * ex) / zk
        out[ser] = value
    return _scalar_out(out, x)


def gen_inc_gamma(z, x, y, tol: ToleranceSpec = DEFAULT_TOL):
    """Generalised incomplete Gamma, Gamma(z, x) - Gamma(z, y)."""
    x_b, y_b = np.broadcast_arrays(np.asarray(x), np.asarray(y))
    out = upper_inc_gamma(z, x_b.ravel(), tol) - upper_inc_gamma(z, y_b.ravel(), tol)
    out = np.asarray(out).reshape(x_b.shape)
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def lambert_w0(x):
    """Principal branch of the Lambert W function for real x >= -1/e."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    branch = -1.0 / math.e
    if np.any(x_arr < branch - 1e-15):
        raise ValueError("lambert_w0 requires x >= -1/e")
    x_arr = np.maximum(x_arr, branch)

    w = np.empty_like(x_arr)
    near = x_arr < -0.25
    p = np.sqrt(np.maximum(2.0 * (math.e * x_arr[near] + 1.0), 0.0))
    w[near] = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    big = x_arr > 3.0
    lx = np.log(x_arr[big])
    w[big] = lx - np.log(lx)
    mid = ~(near | big)
    w[mid] = np.log1p(x_arr[mid])

    for _ in range(100):
        with np.errstate(invalid="ignore", divide="ignore"):
            ew = np.exp(w)
            f = w * ew - x_arr
            wp1 = w + 1.0
            denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
            denom = np.where(np.abs(denom) < _FPMIN, _FPMIN, denom)
            step = np.where(np.abs(wp1) < 1e-12, 0.0, f / denom)
        w = w - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(w))):
            break
    w[x_arr == branch] = -1.0
    return _scalar_out(w, x)


# ---------------------------------------------------------------------------
# erf approximations
# ---------------------------------------------------------------------------

def erf_approx_winitzki(x, a: float = WINITZKI_A):
    """Winitzki's closed-form erf approximation (max error about 3.5e-4)."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    val = np.sqrt(-np.expm1(-x2 * (4.0 / math.pi + a * x2) / (1.0 + a * x2)))
    out = np.sign(x) * val
    return out.item() if out.ndim == 0 else out


def erf_approx_tail(x):
    """Tail form exp(-x^2) / x used only when inverting the offload relation."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("erf_approx_tail requires x > 0")
    out = np.exp(-x * x) / x
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Alzer bounds on the regularised lower incomplete Gamma
# ---------------------------------------------------------------------------

def alzer_rates(kappa: float) -> tuple[float, float]:
    """Return (p, p_tilde) for the lower and upper Alzer bound."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if kappa == 1:
        raise ValueError("kappa == 1 is exact: use 1 - exp(-x)")
    q = math.gamma(kappa + 1.0) ** (-1.0 / kappa)
    return (1.0, q) if kappa < 1 else (q, 1.0)


def gamma_cdf_alzer_bounds(kappa: float, x):
    """Lower and upper bounds on Gamma_l(kappa, x) / Gamma(kappa)."""
    p, p_tilde = alzer_rates(kappa)
    x = np.asarray(x, dtype=float)
    lower = (-np.expm1(-p * x)) ** kappa
    upper = (-np.expm1(-p_tilde * x)) ** kappa
    if lower.ndim == 0:
        return lower.item(), upper.item()
    return lower, upper
