"""Estimator-style wrappers around the analytic and Monte-Carlo engines.

Both estimators map a sequence of ``NetworkConfig`` objects to one number
per config.  There is nothing to learn, so ``fit`` only validates the
hyper-parameters; it exists so the engines compose with scikit-learn
tooling such as ``clone`` and ``get_params``.
"""
from __future__ import annotations

from collections.abc import Iterable

import numpy as np
from sklearn.base import BaseEstimator

from . import analytic, simcore
from .analytic.vlc import GilPelaezSpec
from .config import MODES, NetworkConfig

__all__ = ["METRICS", "SCALAR_METRICS", "CoverageModel", "CoverageSimulator"]

METRICS = ("coverage", "rate", "association", "interferer_pmf", "laplace")
SCALAR_METRICS = ("coverage", "rate", "association")


def _as_configs(X) -> list[NetworkConfig]:
    if isinstance(X, NetworkConfig):
        return [X]
    if not isinstance(X, Iterable):
        raise TypeError("X must be a NetworkConfig or an iterable of them")
    out = list(X)
    for c in out:
        if not isinstance(c, NetworkConfig):
            raise TypeError(f"expected NetworkConfig, got {type(c).__name__}")
    return out


def _check(mode, metric):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if metric not in SCALAR_METRICS:
        raise ValueError(f"metric must be one of {SCALAR_METRICS}")
    if metric == "rate" and mode == "hybrid":
        raise ValueError("the rate metric is not defined for hybrid mode")


class CoverageModel(BaseEstimator):
    """Analytic engine.

    Parameters
    ----------
    mode : {"rf_only", "vlc_only", "opportunistic", "hybrid"}
    metric : {"coverage", "rate", "association"}
        ``rate`` is the average rate in bit/s.
    tail_tol : float
        Gil-Pelaez tail tolerance per serving distance.
    r_nodes : int
        Quadrature nodes per panel over the serving distance.
    """

    def __init__(self, mode="vlc_only", metric="coverage", tail_tol=2e-5, r_nodes=64):
        self.mode = mode
        self.metric = metric
        self.tail_tol = tail_tol
        self.r_nodes = r_nodes

    def fit(self, X=None, y=None):
        _check(self.mode, self.metric)
        self.gp_ = GilPelaezSpec(tail_tol=self.tail_tol, r_nodes=self.r_nodes)
        return self

    def _predict_one(self, cfg):
        if self.metric == "association":
            return analytic.association_probability(cfg)
        if self.metric == "rate":
            if self.mode == "rf_only":
                return analytic.rate_rf(cfg)
            if self.mode == "vlc_only":
                return analytic.rate_vlc(cfg)
            return analytic.rate_opportunistic(cfg)
        return analytic.coverage(cfg, self.mode, self.gp_)

    def predict(self, X):
        if not hasattr(self, "gp_"):
            self.fit()
        return np.array([self._predict_one(c) for c in _as_configs(X)], dtype=float)


class CoverageSimulator(BaseEstimator):
    """Monte-Carlo engine.

    Parameters
    ----------
    mode, metric : as for ``CoverageModel``
    trials : int
        Independent realisations per config.
    seed : int
        Root seed; the same seed reproduces the same estimates.
    n_jobs : int
        Worker threads; results do not depend on it.
    """

    def __init__(self, mode="vlc_only", metric="coverage", trials=100_000, seed=0, n_jobs=1):
        self.mode = mode
        self.metric = metric
        self.trials = trials
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        _check(self.mode, self.metric)
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")
        self.fitted_ = True
        return self

    def _estimate(self, cfg):
        batch = simcore.simulate(cfg, self.trials, self.seed, n_jobs=self.n_jobs)
        if self.metric == "association":
            est = simcore.estimate_association(cfg, 0, batch=batch)
            return est.value, est.half_width_95
        if self.metric == "rate":
            return simcore.estimate_rate(cfg, self.mode, 0, batch=batch)
        hits = simcore.coverage_indicator(batch, cfg, self.mode)
        p = float(np.mean(hits))
        return p, 1.96 * float(np.sqrt(p * (1.0 - p) / hits.size))

    def predict_interval(self, X):
        """Estimates and their 95% half widths, shape (n_configs, 2)."""
        if not hasattr(self, "fitted_"):
            self.fit()
        return np.array([self._estimate(c) for c in _as_configs(X)], dtype=float).reshape(-1, 2)

    def predict(self, X):
        return self.predict_interval(X)[:, 0]
