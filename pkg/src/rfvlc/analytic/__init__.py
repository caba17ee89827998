"""Analytic coverage, association and spectral-efficiency expressions."""
from .association import (
    assoc_threshold,
    association_probability,
    association_probability_asymptotic,
    association_probability_closed,
    hybrid_coverage,
    obs_serving_rule,
    opportunistic_coverage,
    sbs_serving_rule,
    serving_distance_pdf_obs,
    serving_distance_pdf_sbs,
)
from .rate import (
    rate_opportunistic,
    rate_rf,
    rate_vlc,
    spectral_efficiency_opportunistic,
    spectral_efficiency_rf,
    spectral_efficiency_rf_given_v,
    spectral_efficiency_vlc,
    spectral_efficiency_vlc_given_r,
)
from .rf import (
    rf_conditional_coverage,
    rf_conditional_coverage_alzer,
    rf_conditional_coverage_any,
    rf_coverage_alzer,
    rf_coverage_exact,
    rf_coverage_rayleigh,
    rf_laplace_interference,
    rho,
)
from .vlc import (
    CfSeriesResult,
    GilPelaezResult,
    GilPelaezSpec,
    NumericalError,
    vlc_cf_asymptotic,
    vlc_cf_conditional,
    vlc_cf_omega,
    vlc_coverage_exact,
    vlc_coverage_given_r,
    vlc_coverage_noise_limited,
    vlc_interferer_pmf,
    vlc_interferer_pmf_unconditional,
    vlc_laplace_conditional,
    vlc_laplace_single,
    vlc_laplace_unconditional,
)


def rf_coverage(cfg, interference: bool = True):
    """RF-only coverage: Rayleigh closed form, exact integer-shape form, or Alzer otherwise."""
    if abs(cfg.kappa - 1.0) < 1e-12 and interference:
        return rf_coverage_rayleigh(cfg)
    if abs(cfg.kappa - round(cfg.kappa)) < 1e-12 and cfg.kappa >= 1:
        return rf_coverage_exact(cfg, interference)
    return rf_coverage_alzer(cfg)


def coverage(cfg, mode: str, gp: GilPelaezSpec | None = None) -> float:
    """Analytic coverage probability for one of the four network configurations."""
    if mode == "rf_only":
        return rf_coverage(cfg)
    if mode == "vlc_only":
        return vlc_coverage_exact(cfg, gp)
    if mode == "opportunistic":
        return opportunistic_coverage(cfg, gp)
    if mode == "hybrid":
        return float(hybrid_coverage(vlc_coverage_exact(cfg, gp), rf_coverage(cfg)))
    raise ValueError(f"unknown mode {mode!r}")


def spectral_efficiency(cfg, mode: str) -> float:
    if mode == "rf_only":
        return spectral_efficiency_rf(cfg)
    if mode == "vlc_only":
        return spectral_efficiency_vlc(cfg)
    if mode == "opportunistic":
        return spectral_efficiency_opportunistic(cfg)
    raise ValueError("spectral efficiency is defined for rf_only, vlc_only and opportunistic")
