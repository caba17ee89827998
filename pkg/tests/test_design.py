import math

import numpy as np
import pytest

from rfvlc import analytic
from rfvlc.config import NetworkConfig
from rfvlc.design import (FREE_PARAMETERS, DesignTarget, closed_form_association, optimal_z1_asymptotic,
                          parameter_value, solve_offload_asymptotic, solve_offload_closed, solve_offload_numeric,
                          with_parameter)

WIDE = NetworkConfig(xi_fov_deg=90.0, z1_override=0.05)


class TestTarget:
    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.5, float("nan")])
    def test_beta_range(self, beta):
        with pytest.raises(ValueError):
            DesignTarget(beta, "lambda_o")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            DesignTarget(0.5, "h_m")

    def test_parameter_accessors(self):
        cfg = NetworkConfig()
        for name in FREE_PARAMETERS:
            val = parameter_value(cfg, name) * 1.7
            assert parameter_value(with_parameter(cfg, name, val), name) == pytest.approx(val, rel=1e-14)
        with pytest.raises(ValueError):
            parameter_value(cfg, "alpha")
        with pytest.raises(ValueError):
            with_parameter(cfg, "alpha", 1.0)


class TestClosed:
    @pytest.mark.parametrize("name", FREE_PARAMETERS)
    @pytest.mark.parametrize("beta", [0.1, 0.5, 0.9])
    def test_round_trip(self, name, beta):
        sol = solve_offload_closed(DesignTarget(beta, name, WIDE))
        assert sol.feasible and sol.value > 0 and sol.method == "closed"
        assert closed_form_association(sol.config) == pytest.approx(beta, abs=1e-12)
        assert sol.achieved_beta_closed == pytest.approx(beta, abs=1e-12)
        assert 0 <= sol.achieved_beta_exact <= 1

    def test_large_lambert_argument(self):
        cfg = WIDE.replace(lambda_o_count=2e5)
        sol = solve_offload_closed(DesignTarget(0.5, "z1", cfg))
        assert sol.feasible
        assert closed_form_association(sol.config) == pytest.approx(0.5, rel=1e-9)

    def test_infeasible_obs_density(self):
        cfg = WIDE.replace(z1_override=1.0, lambda_s_count=50.0)
        sol = solve_offload_closed(DesignTarget(0.5, "lambda_o", cfg))
        assert not sol.feasible
        assert math.isnan(sol.achieved_beta_closed)
        assert "no positive lam_o" in sol.diagnostic

    def test_requires_wide_fov(self):
        with pytest.raises(ValueError):
            solve_offload_closed(DesignTarget(0.5, "z1", NetworkConfig()))

    def test_closed_form_limits(self):
        assert closed_form_association(WIDE.replace(lambda_s_count=0.0)) == 1.0
        assert closed_form_association(WIDE.replace(lambda_o_count=0.0)) == 0.0


class TestAsymptotic:
    @pytest.mark.parametrize("name", FREE_PARAMETERS)
    @pytest.mark.parametrize("literal_square", [False, True])
    def test_round_trip(self, name, literal_square):
        cfg = NetworkConfig(z1_override=0.05)
        sol = solve_offload_asymptotic(DesignTarget(0.4, name, cfg), literal_square=literal_square)
        assert sol.feasible
        got = analytic.association_probability_asymptotic(sol.config, literal_square)
        assert got == pytest.approx(0.4, abs=1e-12)

    def test_beta_above_fov_ceiling(self):
        cfg = NetworkConfig(xi_fov_deg=30.0, lambda_o_count=5.0)
        ceiling = -math.expm1(-math.pi * cfg.lambda_o * cfg.t_radius ** 2)
        sol = solve_offload_asymptotic(DesignTarget(min(0.99, ceiling + 0.05), "z1", cfg))
        assert not sol.feasible and "must be below" in sol.diagnostic


class TestNumeric:
    @pytest.mark.parametrize("name", FREE_PARAMETERS)
    @pytest.mark.parametrize("beta", [0.2, 0.6])
    def test_round_trip(self, name, beta):
        cfg = NetworkConfig(z1_override=0.05)
        sol = solve_offload_numeric(DesignTarget(beta, name, cfg))
        assert sol.feasible, sol.diagnostic
        assert analytic.association_probability(sol.config) == pytest.approx(beta, abs=1e-8)

    def test_unreachable_target(self):
        # a narrow FOV caps P_o well below 0.9 whatever the RF tier does
        cfg = NetworkConfig(xi_fov_deg=20.0, lambda_o_count=5.0, z1_override=0.05)
        sol = solve_offload_numeric(DesignTarget(0.9, "z1", cfg))
        assert not sol.feasible and sol.diagnostic

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            solve_offload_numeric(DesignTarget(0.5, "z1", NetworkConfig()), bracket=(1.0, 0.5))

    def test_agrees_with_exact_erf_closed_form(self):
        cfg = NetworkConfig(alpha=4.0, phi_half_deg=60.0, z1_override=0.05, assume_u_one=True)
        sol = solve_offload_numeric(DesignTarget(0.5, "z1", cfg), void="plane")
        assert sol.feasible
        assert analytic.association_probability_closed(sol.config) == pytest.approx(0.5, abs=1e-7)


class TestOptimalZ1:
    def test_guards(self):
        with pytest.raises(ValueError):
            optimal_z1_asymptotic(NetworkConfig(lambda_s_count=0.0))
        with pytest.raises(ValueError):
            optimal_z1_asymptotic(NetworkConfig(xi_fov_deg=90.0))

    def test_asymptotic_association_decreases_in_z1(self):
        cfg = NetworkConfig()
        z = np.geomspace(1e-4, 10.0, 40)
        vals = [analytic.association_probability_asymptotic(cfg.replace(z1_override=x)) for x in z]
        assert np.all(np.diff(vals) < 0)

    def test_grid_check_is_reported(self):
        opt = optimal_z1_asymptotic(NetworkConfig())
        assert opt.z1_star > 0
        assert len(opt.grid_values) == len(opt.grid_factors) == 4
        # the smaller factors beat the stationary value, so the check must say so
        assert not opt.is_local_max

    @pytest.mark.xfail(strict=True, reason="the asymptotic association is strictly decreasing in Z1, "
                       "so the stationary-point formula cannot give a maximiser")
    @pytest.mark.parametrize("xi", [45.0, 70.0])
    def test_z1_star_is_local_maximum(self, xi):
        assert optimal_z1_asymptotic(NetworkConfig(xi_fov_deg=xi)).is_local_max
