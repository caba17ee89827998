"""Fixed-node quadrature rules shared by the analytic routines."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int = 64):
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gl(edges, n: int = 32):
    """Gauss-Legendre nodes on every panel between consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(n)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x + 1.0)
    weights = half * w
    return nodes.ravel(), weights.ravel()


def nearest_distance_rule(lam: float, r_lo: float, r_hi: float, n: int = 96,
                          breaks=(), grade: int = 0):
    """Nodes and weights for integrals against 2 pi lam r exp(-pi lam r^2) dr.

    The substitution y = exp(-pi lam r^2) turns the density into a uniform
    measure, so the rule integrates smooth functions of r^2 to high order.
    Weights sum to the probability mass on [r_lo, r_hi] (not normalised).
    ``breaks`` are radii where the integrand has a kink; panels are split there.
    ``grade`` adds that many geometrically shrinking panels towards ``r_lo``,
    for integrands with a logarithmic singularity there (RF path loss at v = 0).
    """
    if r_hi <= r_lo:
        return np.zeros(0), np.zeros(0)
    if lam <= 0:
        return np.zeros(0), np.zeros(0)
    c = math.pi * lam
    y_hi = math.exp(-c * r_lo * r_lo)
    y_lo = math.exp(-c * r_hi * r_hi)
    if y_hi - y_lo <= 0:
        # mass underflows; fall back to plain radius nodes
        r, w = gauss_legendre(r_lo, r_hi, n)
        return r, w * 2 * c * r * np.exp(-c * r * r)
    inner = sorted(math.exp(-c * b * b) for b in breaks if r_lo < b < r_hi)
    # breaks that sit within rounding of an end cannot be resolved in y
    inner = [y for y in inner if y_lo + 1e-12 * y_hi < y < y_hi * (1 - 1e-12)]
    edges = [y_lo, *inner, y_hi]
    per = max(8, n // (len(edges) - 1))
    if grade > 0:
        gap = y_hi - edges[-2]
        near = [y_hi - gap * 0.2 ** k for k in range(1, grade + 1)]
        y, w = composite_gl(edges[:-1] + near[:1], per)
        y2, w2 = composite_gl(near + [y_hi], 8)
        y, w = np.concatenate((y, y2)), np.concatenate((w, w2))
    else:
        y, w = composite_gl(edges, per)
    r = np.sqrt(np.maximum(-np.log(y) / c, 0.0))
    return r, w


def uniform_disk_rule(r_lo: float, r_hi: float, n: int = 64, breaks=()):
    """Nodes and weights for integrals of g(r) 2 r dr / (r_hi^2 - r_lo^2) (uniform on an annulus)."""
    q_lo, q_hi = r_lo * r_lo, r_hi * r_hi
    inner = sorted(b * b for b in breaks if r_lo < b < r_hi)
    edges = [q_lo, *inner, q_hi]
    per = max(8, n // (len(edges) - 1))
    q, w = composite_gl(edges, per)
    return np.sqrt(q), w / (q_hi - q_lo)
