import math

import numpy as np
import pytest
from scipy import integrate, stats

from rfvlc.channel import (RfDeviceParams, VlcDeviceParams, concentrator_gain, lambertian_order, rf_channel_power,
                           rf_k_constant, vlc_channel_gain)
from rfvlc.geometry import (DiskRegion, FovGeometry, fov_radius, nearest_point_distance_pdf, prob_obs_in_fov,
                            sample_ppp, sample_radii)

R = 10.0


class TestSampling:
    def test_null_process(self):
        pts = sample_ppp(0.0, DiskRegion(R, 2.0), np.random.default_rng(0))
        assert pts.shape == (0, 2)

    def test_negative_intensity(self):
        with pytest.raises(ValueError):
            sample_ppp(-1.0, DiskRegion(), np.random.default_rng(0))

    def test_mean_count(self):
        # radii-only sampler shares the Poisson count law with sample_ppp
        counts, _ = sample_radii(80.0, R, np.random.default_rng(1), 100_000)
        assert counts.mean() == pytest.approx(80.0, abs=0.3)

    def test_sample_ppp_mean_count(self):
        region = DiskRegion(R, 2.0)
        rng = np.random.default_rng(2)
        n = [len(sample_ppp(80 / region.area, region, rng)) for _ in range(5000)]
        assert np.mean(n) == pytest.approx(80.0, abs=4 * math.sqrt(80 / 5000))

    def test_points_in_disk(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pts = sample_ppp(1.0, DiskRegion(R, 2.0), rng)
            assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= R)

    def test_sub_disk_counts_are_poisson(self):
        counts, radii = sample_radii(30.0, R, np.random.default_rng(4), 100_000)
        owner = np.repeat(np.arange(counts.size), counts)
        inner = np.bincount(owner, weights=(radii <= 4.0), minlength=counts.size)
        lam_a = 30.0 * 16 / 100
        assert inner.mean() == pytest.approx(lam_a, rel=0.05)
        assert inner.var() == pytest.approx(lam_a, rel=0.05)

    def test_at_least_one(self):
        counts, _ = sample_radii(0.5, R, np.random.default_rng(5), 20_000, at_least_one=True)
        assert counts.min() >= 1
        with pytest.raises(ValueError):
            sample_radii(0.0, R, np.random.default_rng(5), 10, at_least_one=True)


class TestFov:
    def test_examples(self):
        assert fov_radius(2, math.radians(45), R) == pytest.approx(2.0)
        assert fov_radius(2, math.pi / 2, R) == R
        assert fov_radius(2, math.radians(70), R) == pytest.approx(5.4949, abs=1e-4)

    def test_monotone_and_saturating(self):
        xs = np.radians(np.linspace(1, 90, 60))
        vals = [fov_radius(2.0, x, R) for x in xs]
        assert np.all(np.diff(vals) >= 0)
        assert fov_radius(6.0, math.radians(60), R) == R

    def test_domain(self):
        with pytest.raises(ValueError):
            fov_radius(2.0, 0.0, R)
        with pytest.raises(ValueError):
            FovGeometry(math.pi, 1.0, 1.0)

    def test_prob_in_fov(self):
        assert prob_obs_in_fov(0.1, 0.0, 1.0) == 0.0
        lam = 30 / (math.pi * 100)
        assert prob_obs_in_fov(lam * 1e3, 5.0, 1.0) == pytest.approx(1.0, abs=1e-9)
        t = 2 * math.tan(math.radians(70))
        assert prob_obs_in_fov(lam, t, 1.0) == pytest.approx(1 - math.exp(-30 * t * t / 100), rel=1e-12)

    def test_prob_in_fov_matches_simulation(self):
        lam_count = 30.0
        t = 2 * math.tan(math.radians(35))
        counts, radii = sample_radii(lam_count, R, np.random.default_rng(6), 100_000)
        owner = np.repeat(np.arange(counts.size), counts)
        seen = np.bincount(owner, weights=(radii <= t), minlength=counts.size) > 0
        p = prob_obs_in_fov(lam_count / (math.pi * R * R), t, 1.0)
        assert seen.mean() == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / counts.size))


class TestNearestDistance:
    def test_normalised(self):
        f = nearest_point_distance_pdf(0.05, R)
        val, _ = integrate.quad(f, 0, R, epsabs=1e-12)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_mode(self):
        f = nearest_point_distance_pdf(0.05, R)
        assert f.mode == pytest.approx(1 / math.sqrt(2 * math.pi * 0.05))
        assert f(f.mode) >= f(f.mode * 1.01) and f(f.mode) >= f(f.mode * 0.99)

    def test_ppf_inverts_cdf(self):
        f = nearest_point_distance_pdf(0.05, R)
        u = np.linspace(0.01, 0.99, 20)
        np.testing.assert_allclose(f.cdf(f.ppf(u)), u, rtol=1e-12)

    def test_empty_process(self):
        with pytest.raises(ValueError):
            nearest_point_distance_pdf(0.0, R)

    def test_ks_against_simulation(self):
        lam_count = 5.0
        counts, radii = sample_radii(lam_count, R, np.random.default_rng(7), 100_000, at_least_one=True)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        nearest = np.minimum.reduceat(radii, starts)
        f = nearest_point_distance_pdf(lam_count / (math.pi * R * R), R)
        assert stats.kstest(nearest, f.cdf).pvalue > 0.01


class TestChannel:
    def test_lambertian_order(self):
        assert lambertian_order(math.radians(60)) == pytest.approx(1.0)
        assert lambertian_order(math.radians(45)) == pytest.approx(2.0)
        assert lambertian_order(math.radians(30)) == pytest.approx(4.8188, abs=1e-4)
        with pytest.raises(ValueError):
            lambertian_order(0.0)

    def test_concentrator_gain(self):
        assert concentrator_gain(1.5, math.pi / 2, math.radians(30)) == pytest.approx(2.25)
        assert concentrator_gain(1.5, math.radians(45), 0.0) == pytest.approx(4.5)
        assert concentrator_gain(1.5, math.radians(45), math.radians(45) + 1e-9) == 0.0

    def test_gain_at_origin(self):
        dev = VlcDeviceParams()
        g = vlc_channel_gain(0.0, DiskRegion(R, 2.0), dev, math.pi / 2)
        assert g == pytest.approx(1e-4 * 2 * 2.25 * 4 / (2 * math.pi * 16), rel=1e-12)
        assert g == pytest.approx(1.790e-5, rel=1e-3)

    def test_gain_fov_cutoff_and_monotone(self):
        dev = VlcDeviceParams()
        geom = DiskRegion(R, 2.0)
        xi = math.radians(45)
        r = np.linspace(0, 2.0, 100)
        g = vlc_channel_gain(r, geom, dev, xi)
        assert np.all(np.diff(g) < 0) and np.all(g > 0)
        assert vlc_channel_gain(2.0001, geom, dev, xi) == 0.0

    def test_device_consistency(self):
        with pytest.raises(ValueError):
            VlcDeviceParams(phi_half=math.radians(60), m_order=2.0)
        assert VlcDeviceParams(phi_half=math.radians(60), m_order=1.0).m == 1.0

    def test_k_constant(self):
        assert rf_k_constant(5.0, True) == pytest.approx(10 ** 4.68)
        assert rf_k_constant(5.0, False) == pytest.approx(10 ** 4.38)
        assert rf_k_constant(2.5, True) == pytest.approx(10 ** ((46.8 + 20 * math.log10(0.5)) / 10))
        assert rf_k_constant(2.5, True) == pytest.approx(1.197e4, rel=1e-3)

    def test_fading_moments(self):
        rng = np.random.default_rng(8)
        v = np.full(100_000, 3.0)
        dev = RfDeviceParams()
        chi = rf_channel_power(v, dev, rng) / (dev.path_gain * 3.0 ** -dev.alpha)
        assert chi.mean() == pytest.approx(1.0, abs=0.01)
        dev2 = RfDeviceParams(kappa_fade=2.5, theta_fade=0.4)
        chi2 = rf_channel_power(v, dev2, rng) / (dev2.path_gain * 3.0 ** -dev2.alpha)
        assert chi2.var() / chi2.mean() ** 2 == pytest.approx(1 / 2.5, rel=0.02)

    def test_distance_scaling(self):
        rng = np.random.default_rng(9)
        dev = RfDeviceParams()
        a = rf_channel_power(np.full(200_000, 2.0), dev, rng).mean()
        b = rf_channel_power(np.full(200_000, 4.0), dev, rng).mean()
        assert b / a == pytest.approx(2 ** -dev.alpha, rel=0.01)

    def test_deterministic_and_errors(self):
        dev = RfDeviceParams(kappa_fade=2.0, theta_fade=0.5)
        assert rf_channel_power(2.0, dev, deterministic=True) == pytest.approx(dev.path_gain * 2 ** -dev.alpha)
        with pytest.raises(ValueError):
            rf_channel_power(0.0, dev, np.random.default_rng(0))
        with pytest.raises(ValueError):
            rf_channel_power(1.0, dev)

    def test_loss_interpretation_inverts_k(self):
        dev = RfDeviceParams(k_interpretation="loss")
        assert dev.path_gain == pytest.approx(1 / dev.k_const)
