"""Finite-disk Poisson deployments around a typical user at the origin."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiskRegion",
    "FovGeometry",
    "sample_ppp",
    "sample_radii",
    "fov_radius",
    "prob_obs_in_fov",
    "NearestDistancePdf",
    "nearest_point_distance_pdf",
]


@dataclass(frozen=True)
class DiskRegion:
    radius_m: float = 10.0
    height_h: float = 2.0

    def __post_init__(self):
        if self.radius_m <= 0 or self.height_h <= 0:
            raise ValueError("radius_m and height_h must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius_m ** 2


@dataclass(frozen=True)
class FovGeometry:
    xi_fov: float
    t_radius: float
    u_norm: float

    def __post_init__(self):
        if not 0.0 < self.xi_fov <= math.pi / 2:
            raise ValueError("xi_fov must lie in (0, pi/2]")
        if self.t_radius < 0:
            raise ValueError("t_radius must be non-negative")
        if not 0.0 < self.u_norm <= 1.0:
            raise ValueError("u_norm must lie in (0, 1]")


def sample_ppp(intensity: float, region: DiskRegion, rng: np.random.Generator) -> np.ndarray:
    """One realisation of a homogeneous PPP on the disk, shape (n, 2)."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    n = rng.poisson(intensity * region.area)
    rad = region.radius_m * np.sqrt(rng.random(n))
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))


def sample_radii(mean_count: float, radius: float, rng: np.random.Generator,
                 size: int, at_least_one: bool = False):
    """Distances to the origin for ``size`` independent disk realisations.

    Returns ``(counts, radii)`` where ``radii`` is flat and grouped by
    realisation.  Only distances matter for the typical user, so angles are
    not drawn.  ``at_least_one`` redraws empty realisations.
    """
    counts = rng.poisson(mean_count, size)
    if at_least_one:
        if mean_count <= 0:
            raise ValueError("cannot condition an empty process on a point")
        empty = np.flatnonzero(counts == 0)
        while empty.size:
            counts[empty] = rng.poisson(mean_count, empty.size)
            empty = empty[counts[empty] == 0]
    radii = radius * np.sqrt(rng.random(int(counts.sum())))
    return counts, radii


def fov_radius(h: float, xi_fov: float, r_max: float) -> float:
    """Horizontal radius within which an OBS is seen by the photodetector."""
    if h <= 0:
        raise ValueError("h must be positive")
    if not 0.0 < xi_fov <= math.pi / 2:
        raise ValueError("xi_fov must lie in (0, pi/2]")
    if xi_fov >= math.pi / 2:
        return float(r_max)
    return min(float(r_max), h * math.tan(xi_fov))


def prob_obs_in_fov(lambda_o: float, t_radius: float, u_norm: float = 1.0) -> float:
    if t_radius <= 0:
        return 0.0
    p = -math.expm1(-lambda_o * math.pi * t_radius ** 2) / u_norm
    return min(max(p, 0.0), 1.0)


class NearestDistancePdf:
    """Density of the nearest point of a PPP, truncated to [0, r_max]."""

    def __init__(self, intensity: float, r_max: float):
        if intensity <= 0:
            raise ValueError("nearest-point distance is undefined for an empty process")
        self.intensity = float(intensity)
        self.r_max = float(r_max)
        self.norm = -math.expm1(-math.pi * self.intensity * self.r_max ** 2)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        lam = self.intensity
        out = 2 * math.pi * lam * r * np.exp(-math.pi * lam * r * r) / self.norm
        out = np.where((r >= 0) & (r <= self.r_max), out, 0.0)
        return out.item() if out.ndim == 0 else out

    def cdf(self, r):
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.r_max)
        out = -np.expm1(-math.pi * self.intensity * r * r) / self.norm
        return out.item() if out.ndim == 0 else out

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        out = np.sqrt(-np.log1p(-u * self.norm) / (math.pi * self.intensity))
        return out.item() if out.ndim == 0 else out

    @property
    def mode(self) -> float:
        return min(1.0 / math.sqrt(2 * math.pi * self.intensity), self.r_max)


def nearest_point_distance_pdf(intensity: float, r_max: float) -> NearestDistancePdf:
    return NearestDistancePdf(intensity, r_max)
