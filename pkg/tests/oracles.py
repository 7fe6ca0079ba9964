"""Brute-force reference computations shared by the tests.

Everything here is deliberately naive and independent of the package's
numerics: scipy's noncentral-t density and exhaustive grids.
"""
from __future__ import annotations

import numpy as np
from scipy import stats as st

from mdlinfer.data import generate_synthetic
from mdlinfer.statistics import abs_two_sample_t, default_theta_max


def folded_logpdf(t, df, nc):
    with np.errstate(divide="ignore"):
        return np.log(st.nct.pdf(t, df, nc) + st.nct.pdf(-np.asarray(t), df, nc))


def synthetic_stats(n_features, seed, pi0=0.5, theta_alt=2.0, m=8, n=8):
    ds = generate_synthetic(n_features, m, n, pi0, theta_alt, seed)
    return [abs_two_sample_t(f) for f in ds.features]


def _arrays(stats):
    return (np.array([s.value for s in stats]), np.array([s.df for s in stats], dtype=float),
            np.array([s.scale for s in stats]))


class CappedGrid:
    """log-densities of every statistic on a theta grid, with the null row."""

    def __init__(self, stats, step=1e-3, theta_max=None):
        if theta_max is None:
            theta_max = default_theta_max(stats)
        self.theta = np.arange(0.0, theta_max + step / 2, step)
        v, df, sc = _arrays(stats)
        self.ell = folded_logpdf(v[None, :], df[None, :], sc[None, :] * self.theta[:, None])
        self.capped = np.maximum(self.ell, self.ell[0][None, :])
        self.total = self.capped.sum(axis=1)

    def argmax(self, exclude=None):
        """Constrained MLE on the grid (first, i.e. smallest, maximiser)."""
        obj = self.total if exclude is None else self.total - self.capped[:, exclude]
        return float(self.theta[int(np.argmax(obj))])


def mixture_grid(stats, theta_step=1e-2, pi_step=1e-2, theta_max=None):
    """(theta, pi0) maximising the mixture log-likelihood on a 2-D grid."""
    if theta_max is None:
        theta_max = default_theta_max(stats)
    v, df, sc = _arrays(stats)
    theta = np.arange(0.0, theta_max + theta_step / 2, theta_step)
    pis = np.arange(0.0, 1.0 + pi_step / 2, pi_step)
    ell = folded_logpdf(v[None, :], df[None, :], sc[None, :] * theta[:, None])
    ell0 = ell[0]
    best = (-np.inf, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        for p in pis:
            ll = np.sum(np.logaddexp(np.log(p) + ell0[None, :], np.log1p(-p) + ell), axis=1)
            k = int(np.argmax(ll))
            if ll[k] > best[0]:
                best = (float(ll[k]), float(theta[k]), float(p))
    return best[1], best[2]
