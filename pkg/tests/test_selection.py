import math

import numpy as np
import pytest

from mdlinfer.coding import FeatureCode, approx_code, prepare
from mdlinfer.errors import EmptyAfterExclusion
from mdlinfer.selection import Scheme, null_proportion, run_selection, select
from mdlinfer.statistics import FOLDED_T
from oracles import synthetic_stats


def code(delta, fid="f"):
    return FeatureCode(fid, L0=5.0, L_alt=5.0 + delta, theta_alt=1.0, regret_alt=0.0,
                       regret_null=0.0, delta=delta)


def test_null_proportion_counts():
    d = [1, -1, 2, -2]
    assert null_proportion(d) == 0.5
    assert null_proportion(d, exclude=0) == pytest.approx(1 / 3)
    assert null_proportion([0.0]) == 1.0
    assert null_proportion(d, smoothing="laplace") == pytest.approx(2.5 / 5)
    with pytest.raises(EmptyAfterExclusion):
        null_proportion([1.0], exclude=0)


def test_select_examples():
    assert select(code(1.3), 0.5).total_delta == pytest.approx(1.3)
    r = select(code(0.0), 0.8)
    assert r.total_delta == pytest.approx(2.0)
    assert r.posterior_null == pytest.approx(0.8, rel=1e-14)
    one = select(code(-50.0), 1.0)
    assert one.posterior_null == 1.0 and one.selected == "null" and one.total_delta == math.inf
    zero = select(code(50.0), 0.0)
    assert zero.posterior_null == 0.0 and zero.selected == "alternative" and zero.total_delta == -math.inf


def test_tie_selects_null():
    assert select(code(0.0), 0.5).selected == "null"


def test_posterior_increases_with_delta():
    post = [select(code(d), 0.3).posterior_null for d in np.linspace(-10, 10, 81)]
    assert np.all(np.diff(post) > 0)


def test_exact_scheme_leaves_one_out():
    res = run_selection([code(1.0, "a"), code(-1.0, "b")], Scheme.EXACT)
    assert res[0].p_null == 0.0 and res[1].p_null == 1.0


def test_approx_scheme_shares_p_null():
    res = run_selection([code(d) for d in (1.0, -1.0, 3.0)], "approx")
    assert len({r.p_null for r in res}) == 1


def test_pooled_null_proportion_is_calibrated():
    hits = 0
    for seed in range(100):
        codes = approx_code(prepare(FOLDED_T, synthetic_stats(20, 5000 + seed))).codes
        hits += abs(null_proportion([c.delta for c in codes]) - 0.5) <= 0.25
    assert hits >= 95
