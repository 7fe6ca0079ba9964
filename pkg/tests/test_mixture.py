import math

import numpy as np
import pytest

from mdlinfer.errors import EmptyAfterExclusion
from mdlinfer.mixture import (
    NON_IDENTIFIABLE,
    MixtureFit,
    fit_mixture,
    fit_mixture_loo,
    lfdr,
    mixture_loglik,
    profile_pi0,
)
from mdlinfer.statistics import FOLDED_T, feature_mle, log_density
from oracles import mixture_grid, synthetic_stats


@pytest.fixture(scope="module")
def stats():
    return synthetic_stats(20, 2)


def null_sum(stats):
    return sum(log_density(FOLDED_T, 0.0, s) for s in stats)


def test_loglik_trivial_cases(stats):
    assert mixture_loglik(FOLDED_T, 3.0, 1.0, stats) == pytest.approx(null_sum(stats))
    assert mixture_loglik(FOLDED_T, 0.0, 0.5, stats) == pytest.approx(null_sum(stats))
    alt = sum(log_density(FOLDED_T, 1.7, s) for s in stats)
    assert mixture_loglik(FOLDED_T, 1.7, 0.0, stats) == pytest.approx(alt)
    with pytest.raises(ValueError):
        mixture_loglik(FOLDED_T, 1.0, 1.5, stats)


def test_profile_pi0_matches_bounded_search(stats):
    from scipy.optimize import minimize_scalar
    ell0 = np.array([log_density(FOLDED_T, 0.0, s) for s in stats])
    ell = np.array([log_density(FOLDED_T, 2.2, s) for s in stats])
    p = profile_pi0(ell0, ell[None, :])[0]
    ref = minimize_scalar(lambda q: -np.sum(np.logaddexp(np.log(q) + ell0, np.log1p(-q) + ell)),
                          bounds=(1e-12, 1 - 1e-12), method="bounded", options={"xatol": 1e-12})
    assert p == pytest.approx(ref.x, abs=1e-7)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fit_matches_grid_oracle(seed):
    s = synthetic_stats(20, seed)
    fit = fit_mixture(FOLDED_T, s)
    theta, pi0 = mixture_grid(s)
    assert abs(fit.theta_alt - theta) <= 2e-2 and abs(fit.pi0 - pi0) <= 2e-2


def test_fit_invariants_and_ascent(stats):
    fit = fit_mixture(FOLDED_T, stats)
    assert 0.0 <= fit.pi0 <= 1.0 and fit.theta_alt >= 0.0
    assert fit.loglik == pytest.approx(mixture_loglik(FOLDED_T, fit.theta_alt, fit.pi0, stats), abs=1e-9)
    assert fit.loglik >= mixture_loglik(FOLDED_T, 0.0, 1.0, stats)
    median_mle = float(np.median([feature_mle(FOLDED_T, s) for s in stats]))
    assert fit.loglik >= mixture_loglik(FOLDED_T, median_mle, 0.5, stats)


def test_null_data_are_flagged():
    flagged = 0
    for seed in range(5):
        fit = fit_mixture(FOLDED_T, synthetic_stats(200, 100 + seed, pi0=1.0))
        if NON_IDENTIFIABLE in fit.flags:
            flagged += 1
            assert fit.theta_alt == 0.0
        assert fit.pi0 > 0.8
    assert flagged >= 3


def test_leave_one_out(stats):
    loo = fit_mixture_loo(FOLDED_T, stats)
    for i in (0, 7, 19):
        direct = fit_mixture(FOLDED_T, stats, exclude=i)
        assert loo[i].excluded == i
        assert loo[i].theta_alt == pytest.approx(direct.theta_alt, abs=1e-9)
        assert loo[i].pi0 == pytest.approx(direct.pi0, abs=1e-9)
    with pytest.raises(EmptyAfterExclusion):
        fit_mixture(FOLDED_T, stats[:2], exclude=0)


def test_loo_trend():
    def spread(n):
        s = synthetic_stats(n, 77)
        pooled = fit_mixture(FOLDED_T, s)
        loo = fit_mixture_loo(FOLDED_T, s)
        return max(abs(f.theta_alt - pooled.theta_alt) for f in loo)
    assert spread(200) < spread(20)


def test_lfdr_trivial(stats):
    s = stats[0]
    half = lfdr(FOLDED_T, MixtureFit(0.0, 0.5, 0.0), s)
    assert half.lfdr == pytest.approx(0.5) and half.mixture_delta == pytest.approx(0.0, abs=1e-12)
    assert lfdr(FOLDED_T, MixtureFit(2.0, 1.0, 0.0), s).lfdr == 1.0
    assert lfdr(FOLDED_T, MixtureFit(2.0, 0.0, 0.0), s).mixture_delta == -math.inf


def test_lfdr_identities(stats):
    rng = np.random.default_rng(3)
    for _ in range(50):
        fit = MixtureFit(float(rng.uniform(0, 4)), float(rng.uniform(0.05, 0.95)), 0.0)
        s = stats[int(rng.integers(len(stats)))]
        r = lfdr(FOLDED_T, fit, s)
        g0 = math.exp(log_density(FOLDED_T, 0.0, s))
        g1 = math.exp(log_density(FOLDED_T, fit.theta_alt, s))
        assert r.lfdr == pytest.approx(fit.pi0 * g0 / (fit.pi0 * g0 + (1 - fit.pi0) * g1), rel=1e-12)
        # lfdr/(1 - lfdr) = 2^mixture_delta, checked in the direction that avoids 1 - lfdr
        assert 1.0 / (1.0 + 2.0 ** -r.mixture_delta) == pytest.approx(r.lfdr, rel=1e-12)
        L0, L1 = -math.log2(g0), -math.log2(g1)
        assert r.mixture_delta == pytest.approx((L1 - math.log2(1 - fit.pi0)) - (L0 - math.log2(fit.pi0)),
                                                rel=1e-10, abs=1e-12)
