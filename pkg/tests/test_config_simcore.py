import math

import numpy as np
import pytest

from rfvlc import analytic, simcore
from rfvlc.config import CONFIG_KEYS, ConfigError, NetworkConfig, config_from_mapping, load_config, parse_config_text

N = 50_000


class TestConfig:
    def test_defaults(self):
        cfg = NetworkConfig()
        assert cfg.m == pytest.approx(1.0)
        assert cfg.concentrator_gain == pytest.approx(2.25 / math.sin(math.radians(70)) ** 2)
        assert cfg.gamma_vlc == pytest.approx(2 ** (3e6 / 20e6) - 1)
        assert cfg.gamma_rf == pytest.approx(2 ** (3e6 / 10e6) - 1)
        assert cfg.k_const == pytest.approx(10 ** 4.68)
        assert cfg.lambda_o == pytest.approx(30 / (math.pi * 100))
        assert cfg.u_o == pytest.approx(1 - math.exp(-30))

    def test_z1_definition(self):
        cfg = NetworkConfig(kappa=2.0, theta=0.5)
        amp = cfg.r_pd_a_per_w ** 2 * cfg.p_opt_w ** 2 * cfg.z_agg
        assert cfg.z1 == pytest.approx((cfg.p_s_w * cfg.k_const / amp) ** (2 / cfg.alpha))
        loss = cfg.replace(k_interpretation="loss")
        assert loss.z1 == pytest.approx((cfg.p_s_w / cfg.k_const / amp) ** (2 / cfg.alpha))
        assert cfg.replace(z1_override=0.3).z1 == 0.3

    def test_rate_units(self):
        cfg = NetworkConfig(r_th=3.0, r_th_unit="bps_per_hz")
        assert cfg.gamma_rf == pytest.approx(7.0)
        assert cfg.gamma_vlc == pytest.approx(2 ** 6 - 1)

    def test_assume_u_one(self):
        cfg = NetworkConfig(lambda_s_count=1.0, assume_u_one=True)
        assert cfg.u_s == 1.0 and cfg.u_o == 1.0

    def test_parse_text(self):
        text = """
        # a comment
        lambda_o_per_m2 = 0.1   # trailing comment
        xi_fov_deg = 45
        los = no
        k_interpretation = "loss"
        z1_override = none
        """
        cfg = parse_config_text(text)
        assert cfg.lambda_o_count == pytest.approx(0.1 * math.pi * 100)
        assert cfg.xi_fov_deg == 45.0 and cfg.los is False and cfg.k_interpretation == "loss"
        assert cfg.z1_override is None

    def test_round_trip_through_file(self, tmp_path):
        cfg = NetworkConfig(xi_fov_deg=55.0, lambda_s_count=7.0, kappa=2.0)
        path = tmp_path / "net.cfg"
        path.write_text("".join(f"{k} = {v}\n" for k, v in cfg.to_mapping().items()))
        assert load_config(path) == cfg

    @pytest.mark.parametrize("text", [
        "bogus = 1",
        "xi_fov_deg = 1\nxi_fov_deg = 2",
        "los = maybe",
        "xi_fov_deg 45",
        "xi_fov_deg = 120",
        "alpha = 2",
        "h_m = -1",
        "lambda_o_count = 3\nlambda_o_per_m2 = 0.1",
        "m_order = 2",
        "empty_tier = drop",
        "xi_fov_deg = nan",
    ])
    def test_rejects_bad_input(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.cfg")
        assert load_config(None) == NetworkConfig()

    def test_keys_and_mapping(self):
        assert "lambda_o_per_m2" in CONFIG_KEYS and "xi_fov_deg" in CONFIG_KEYS
        with pytest.raises(ConfigError):
            config_from_mapping({"nope": 1})

    def test_derived_is_fresh(self):
        cfg = NetworkConfig()
        d = cfg.replace(r_th=6.0).derived()
        assert d["gamma_rf"] == pytest.approx(2 ** 0.6 - 1)
        assert d["gamma_rf"] != cfg.derived()["gamma_rf"]


class TestSimulation:
    def test_determinism_across_workers(self):
        cfg = NetworkConfig()
        a = simcore.simulate(cfg, 20_000, seed=5, n_jobs=1)
        b = simcore.simulate(cfg, 20_000, seed=5, n_jobs=4)
        for name in a.__dataclass_fields__:
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_seed_changes_draws(self):
        cfg = NetworkConfig()
        a = simcore.simulate(cfg, 5000, seed=1)
        b = simcore.simulate(cfg, 5000, seed=2)
        assert not np.array_equal(a.r_serving, b.r_serving, equal_nan=True)

    def test_scale_invariance(self):
        cfg = NetworkConfig()
        scaled = cfg.replace(p_opt_w=cfg.p_opt_w * 2, n_o_a2_per_hz=cfg.n_o_a2_per_hz * 4,
                             p_s_w=cfg.p_s_w * 8, n_s_w_per_hz=cfg.n_s_w_per_hz * 8)
        a = simcore.simulate(cfg, 20_000, seed=3)
        b = simcore.simulate(scaled, 20_000, seed=3)
        np.testing.assert_allclose(a.sinr_vlc, b.sinr_vlc, rtol=1e-13)
        np.testing.assert_allclose(a.sinr_rf, b.sinr_rf, rtol=1e-13)

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            simcore.simulate(NetworkConfig(), 0)
        with pytest.raises(ValueError):
            simcore.estimate_coverage(NetworkConfig(), "nonsense", 10)

    def test_empty_fov_trial(self):
        cfg = NetworkConfig(xi_fov_deg=1e-7)
        out = simcore.run_trial(cfg, np.random.default_rng(0))
        assert out.sinr_vlc is None and out.association == "sbs" and out.rate_vlc == 0.0

    def test_trial_rates(self):
        cfg = NetworkConfig(lambda_o_count=80)
        out = simcore.run_trial(cfg, np.random.default_rng(1))
        assert out.rate_vlc == pytest.approx(cfg.b_o_hz / 2 * math.log2(1 + out.sinr_vlc))
        assert out.rate_rf == pytest.approx(cfg.b_s_hz * math.log2(1 + out.sinr_rf))

    def test_noise_limited_signal_formula(self):
        cfg = NetworkConfig()
        b = simcore.simulate(cfg, 2000, seed=4, interference=False)
        seen = b.n_visible > 0
        expected = cfg.vlc_amplitude * (b.r_serving[seen] ** 2 + cfg.h_m ** 2) ** -cfg.p_exp
        np.testing.assert_allclose(b.signal_vlc[seen], expected, rtol=1e-14)
        np.testing.assert_allclose(b.sinr_vlc[seen], expected / cfg.noise_vlc, rtol=1e-14)
        assert cfg.vlc_amplitude == pytest.approx(cfg.r_pd_a_per_w ** 2 * cfg.p_elec * cfg.z_agg)

    def test_noise_limited_coverage_against_closed_form(self):
        cfg = NetworkConfig(xi_fov_deg=60, h_m=3.0, r_th=200.0, lambda_o_count=5, empty_tier="resample")
        est = simcore.estimate_coverage(cfg, "vlc_only", 100_000, seed=9, interference=False)
        ref = analytic.vlc_coverage_noise_limited(cfg)
        assert 0.05 < ref < 0.95
        assert abs(est.value - ref) < 0.01

    def test_hybrid_against_independent_composition(self):
        cfg = NetworkConfig(xi_fov_deg=45, k_interpretation="loss")
        h = simcore.estimate_coverage(cfg, "hybrid", N, seed=10)
        o = simcore.estimate_coverage(cfg, "vlc_only", N, seed=11)
        s = simcore.estimate_coverage(cfg, "rf_only", N, seed=12)
        comp = 1 - (1 - o.value) * (1 - s.value)
        pooled = math.sqrt(h.half_width_95 ** 2 + o.half_width_95 ** 2 + s.half_width_95 ** 2)
        assert abs(h.value - comp) <= 3 * pooled

    def test_zero_threshold_rf(self):
        cfg = NetworkConfig(r_th=1e-9, lambda_s_count=2.0)
        est = simcore.estimate_coverage(cfg, "rf_only", N, seed=13)
        assert est.value == pytest.approx(1 - math.exp(-2.0), abs=3 * est.half_width_95 + 1e-9)

    @pytest.mark.parametrize("mode", ["rf_only", "vlc_only", "opportunistic", "hybrid"])
    def test_coverage_monotone_in_threshold(self, mode):
        cfg = NetworkConfig(xi_fov_deg=60, k_interpretation="loss")
        batch = simcore.simulate(cfg, 20_000, seed=14)
        vals = [simcore.coverage_indicator(batch, cfg.replace(r_th=t), mode).mean()
                for t in (0.5, 1, 3, 10, 30, 100)]
        assert np.all(np.diff(vals) <= 0)

    def test_hybrid_dominates_per_trial(self):
        cfg = NetworkConfig(xi_fov_deg=60, k_interpretation="loss")
        batch = simcore.simulate(cfg, 20_000, seed=15)
        hy = simcore.coverage_indicator(batch, cfg, "hybrid")
        assert np.all(hy >= simcore.coverage_indicator(batch, cfg, "rf_only"))
        assert np.all(hy >= simcore.coverage_indicator(batch, cfg, "vlc_only"))


class TestEstimators:
    def test_interferer_pmf_degenerate_and_shift(self):
        assert simcore.interferer_pmf(NetworkConfig(xi_fov_deg=1e-7), 2000, 1).sum() == 0
        k = lambda c: np.average(np.arange(c.size), weights=c)
        lo = simcore.interferer_pmf(NetworkConfig(xi_fov_deg=70), N, 2)
        hi = simcore.interferer_pmf(NetworkConfig(xi_fov_deg=80), N, 2)
        assert k(hi) > k(lo)

    def test_laplace_basic(self):
        cfg = NetworkConfig(lambda_o_count=80)
        s = np.concatenate(([0.0], np.geomspace(1e-2, 1e2, 10) / cfg.vlc_peak))
        ev = simcore.empirical_laplace(cfg, s, 20_000, 3)
        vals = np.array([e.value for e in ev])
        assert vals[0] == 1.0
        assert np.all(np.diff(vals) <= 0)
        with pytest.raises(ValueError):
            simcore.empirical_laplace(cfg, [-1.0], 10, 0)

    def test_association_limits(self):
        assert simcore.estimate_association(NetworkConfig(xi_fov_deg=1e-7), 5000, 1).value == 0.0
        cfg = NetworkConfig(p_s_w=1e-30, lambda_o_count=80, xi_fov_deg=90, k_interpretation="loss")
        assert simcore.estimate_association(cfg, 5000, 1).value == 1.0

    def test_spectral_efficiency_total_expectation(self):
        cfg = NetworkConfig(z1_override=0.05)
        batch = simcore.simulate(cfg, N, 4)
        se, _ = simcore.estimate_spectral_efficiency(cfg, "opportunistic", 0, batch=batch)
        a = batch.assoc_obs
        p = a.mean()
        vlc = np.log2(1 + np.nan_to_num(batch.sinr_vlc[a]))
        rf = np.log2(1 + batch.sinr_rf[~a])
        assert se == pytest.approx(p * vlc.mean() + (1 - p) * rf.mean(), rel=1e-12)

    def test_spectral_efficiency_noise_only_single_link(self):
        cfg = NetworkConfig(xi_fov_deg=30, h_m=1.0, lambda_o_count=0.5, empty_tier="resample")
        batch = simcore.simulate(cfg, 5000, 5, interference=False)
        single = batch.n_visible == 1
        snr = batch.signal_vlc[single] / cfg.noise_vlc
        np.testing.assert_allclose(np.log2(1 + batch.sinr_vlc[single]), np.log2(1 + snr), rtol=1e-14)

    def test_rate_prelog(self):
        cfg = NetworkConfig()
        batch = simcore.simulate(cfg, 10_000, 6)
        se, _ = simcore.estimate_spectral_efficiency(cfg, "vlc_only", 0, batch=batch)
        rate, _ = simcore.estimate_rate(cfg, "vlc_only", 0, batch=batch)
        assert rate == pytest.approx(0.5 * cfg.b_o_hz * se)
