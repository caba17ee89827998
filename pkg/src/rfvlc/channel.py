"""Optical (Lambertian) and RF (WINNER-II path loss with Gamma fading) channels."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VlcDeviceParams",
    "RfDeviceParams",
    "lambertian_order",
    "concentrator_gain",
    "vlc_channel_gain",
    "rf_k_constant",
    "rf_channel_power",
]

# WINNER-II intercepts (dB) at 5 GHz; the slope is 20 dB/decade for both.
_WINNER_B = {True: 46.8, False: 43.8}
_WINNER_C = 20.0


@dataclass(frozen=True)
class VlcDeviceParams:
    a_pd: float = 1e-4
    phi_half: float = math.radians(60.0)
    m_order: float | None = None
    t_filter: float = 1.0
    n_refractive: float = 1.5
    r_pd: float = 0.53
    p_opt: float = 10.0
    kappa_oe: float = 1.0
    f_dc: float = 3.0
    b_o: float = 40e6
    n_o: float = 1e-21

    def __post_init__(self):
        if self.a_pd <= 0:
            raise ValueError("a_pd must be positive")
        if not 1.0 <= self.n_refractive <= 2.0:
            raise ValueError("n_refractive must lie in [1, 2]")
        if self.f_dc <= 0:
            raise ValueError("f_dc must be positive")
        if self.m_order is not None:
            m_phi = lambertian_order(self.phi_half)
            if abs(m_phi - self.m_order) > 1e-9:
                raise ValueError(
                    f"m_order={self.m_order} disagrees with phi_half "
                    f"(which gives m={m_phi:.12g})"
                )

    @property
    def m(self) -> float:
        return self.m_order if self.m_order is not None else lambertian_order(self.phi_half)

    @property
    def p_elec(self) -> float:
        """Electrical transmit power P_opt^2 / kappa_oe^2."""
        return self.p_opt ** 2 / self.kappa_oe ** 2

    @property
    def noise_power(self) -> float:
        return self.b_o * self.f_dc ** 2 * self.n_o


@dataclass(frozen=True)
class RfDeviceParams:
    p_s: float = 2.0
    b_s: float = 10e6
    n_s: float = 10 ** (-20.4)
    alpha: float = 3.68
    k_const: float = 10 ** 4.68
    kappa_fade: float = 1.0
    theta_fade: float = 1.0
    k_interpretation: str = "gain"

    def __post_init__(self):
        if self.alpha <= 2:
            raise ValueError("alpha must exceed 2")
        if self.kappa_fade <= 0 or self.theta_fade <= 0:
            raise ValueError("fading shape and scale must be positive")
        if self.k_interpretation not in ("gain", "loss"):
            raise ValueError("k_interpretation must be 'gain' or 'loss'")

    @property
    def path_gain(self) -> float:
        """Multiplier applied to v^-alpha: K when read as a gain, or 1/K when read as a loss."""
        return self.k_const if self.k_interpretation == "gain" else 1.0 / self.k_const

    @property
    def noise_power(self) -> float:
        return self.b_s * self.n_s


def lambertian_order(phi_half: float) -> float:
    """Lambertian order m = -1 / log2(cos phi_half)."""
    if not 0.0 < phi_half < math.pi / 2:
        raise ValueError("phi_half must lie in (0, pi/2)")
    c = math.cos(phi_half)
    if c >= 1.0 - 1e-15:
        raise ValueError("phi_half too close to 0: Lambertian order diverges")
    return -1.0 / math.log2(c)


def concentrator_gain(n: float, xi_fov: float, xi) -> np.ndarray | float:
    """Non-imaging concentrator gain n^2 / sin^2(xi_fov) inside the FOV, 0 outside."""
    if not 0.0 < xi_fov <= math.pi / 2:
        raise ValueError("xi_fov must lie in (0, pi/2]")
    g = n * n / math.sin(xi_fov) ** 2
    out = np.where(np.asarray(xi) <= xi_fov, g, 0.0)
    return out.item() if out.ndim == 0 else out


def vlc_channel_gain(r, geom, dev: VlcDeviceParams, xi_fov: float):
    """LoS DC gain at horizontal distance ``r`` from an OBS at height ``geom.height_h``.

    Zero beyond the FOV edge r > h tan(xi_fov).  The optical channel power
    is the square of the returned gain.
    """
    r = np.asarray(r, dtype=float)
    h = geom.height_h
    m = dev.m
    g_conc = concentrator_gain(dev.n_refractive, xi_fov, 0.0)
    gain = (dev.a_pd * (m + 1.0) * dev.t_filter * g_conc * h ** (m + 1.0)
            / (2.0 * math.pi * (r * r + h * h) ** ((m + 3.0) / 2.0)))
    if xi_fov < math.pi / 2:
        gain = np.where(r <= h * math.tan(xi_fov) * (1.0 + 1e-12), gain, 0.0)
    return gain.item() if gain.ndim == 0 else gain


def rf_k_constant(f_c_ghz: float, los: bool = True) -> float:
    if f_c_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    x_db = _WINNER_B[bool(los)] + _WINNER_C * math.log10(f_c_ghz / 5.0)
    return 10.0 ** (x_db / 10.0)


def rf_channel_power(v, dev: RfDeviceParams, rng=None, deterministic: bool = False):
    """Received RF channel power K v^-alpha chi with chi ~ Gamma(kappa, theta).

    With ``deterministic=True`` chi is replaced by its mean kappa * theta.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("RF link distance must be positive")
    mean_part = dev.path_gain * v ** (-dev.alpha)
    if deterministic:
        out = mean_part * dev.kappa_fade * dev.theta_fade
    else:
        if rng is None:
            raise ValueError("a random generator is needed unless deterministic=True")
        out = mean_part * rng.gamma(dev.kappa_fade, dev.theta_fade, size=v.shape)
    return out.item() if np.ndim(out) == 0 else out
