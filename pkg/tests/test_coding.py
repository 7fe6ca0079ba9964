import math

import numpy as np
import pytest

from mdlinfer.coding import (
    DEGENERATE,
    approx_code,
    exact_code,
    prepare,
    regret,
    regret_sum_objective,
)
from mdlinfer.errors import DomainError, EmptyAfterExclusion
from mdlinfer.special import nct_logpdf_quad
from mdlinfer.statistics import FOLDED_T, ReducedStatistic, feature_mle, log_density
from oracles import CappedGrid, synthetic_stats


def stat(v, df=14, scale=2.0, fid="f"):
    return ReducedStatistic(fid, v, df, scale)


def test_regret_at_mle_is_zero():
    s = stat(3.0)
    mle = feature_mle(FOLDED_T, s)
    assert regret(FOLDED_T, mle, s, mle) == 0.0


def test_null_regret_vanishes_at_zero_statistic():
    s = stat(0.0)
    assert regret(FOLDED_T, 0.0, s, feature_mle(FOLDED_T, s)) == pytest.approx(0.0, abs=1e-12)


def test_regret_against_quadrature_density():
    s = ReducedStatistic("a", 2.0, 4, 1.0)
    mle = feature_mle(FOLDED_T, s)

    def folded(nc):  # density of |T| from two signed quadratures
        return math.exp(nct_logpdf_quad(2.0, 4, nc)) + math.exp(nct_logpdf_quad(-2.0, 4, nc))

    expected = math.log2(folded(mle) / folded(0.0))
    assert regret(FOLDED_T, 0.0, s, mle) == pytest.approx(expected, abs=1e-9)


def test_regret_domain():
    with pytest.raises(DomainError):
        regret(FOLDED_T, -1.0, stat(1.0), 0.5)


def test_objective_at_null_and_empty():
    stats = synthetic_stats(10, 3)
    inp = prepare(FOLDED_T, stats)
    null_regrets = sum(regret(FOLDED_T, 0.0, s, m) for s, m in zip(stats, inp.mles))
    assert regret_sum_objective(FOLDED_T, 0.0, stats, inp.mles) == pytest.approx(null_regrets)
    assert regret_sum_objective(FOLDED_T, 1.0, stats[:1], inp.mles[:1], exclude=0) == 0.0


def test_identical_statistics_give_their_mle():
    stats = [stat(3.0, fid=f"f{i}") for i in range(5)]
    inp = prepare(FOLDED_T, stats)
    assert approx_code(inp).theta == pytest.approx(inp.mles[0], abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_approx_and_exact_match_grid_oracle(seed):
    stats = synthetic_stats(20, seed)
    inp = prepare(FOLDED_T, stats)
    grid = CappedGrid(stats, theta_max=inp.theta_max)
    a = approx_code(inp)
    assert abs(a.theta - grid.argmax()) <= 1e-3
    e = exact_code(inp, warm_start=a.theta)
    for i, th in enumerate(e.thetas):
        assert abs(th - grid.argmax(exclude=i)) <= 1e-3


def test_optimum_beats_every_grid_point():
    stats = synthetic_stats(60, 11)
    inp = prepare(FOLDED_T, stats)
    a = approx_code(inp, base=math.e)
    best = regret_sum_objective(FOLDED_T, a.theta, stats, inp.mles, base=math.e)
    grid = np.linspace(0.0, 6.0, 601)
    vals = [regret_sum_objective(FOLDED_T, t, stats, inp.mles, base=math.e) for t in grid]
    assert best <= min(vals) + 1e-9


def test_code_invariants():
    stats = synthetic_stats(25, 5)
    inp = prepare(FOLDED_T, stats)
    for codes in (approx_code(inp).codes, exact_code(inp).codes):
        for c in codes:
            assert c.regret_alt >= -1e-9 and c.regret_null >= -1e-9
            assert c.delta == pytest.approx(c.regret_alt - c.regret_null, abs=1e-9)
            assert c.L0 == pytest.approx(-log_density(FOLDED_T, 0.0, next(s for s in stats if s.feature_id == c.feature_id)) / math.log(2))


def test_order_invariance():
    stats = synthetic_stats(15, 8)
    perm = np.random.default_rng(1).permutation(len(stats))
    a = prepare(FOLDED_T, stats)
    b = prepare(FOLDED_T, [stats[j] for j in perm])
    ea, eb = exact_code(a), exact_code(b)
    assert approx_code(a).theta == approx_code(b).theta
    for k, j in enumerate(perm):
        assert eb.codes[k] == ea.codes[j]
        assert eb.thetas[k] == ea.thetas[j]


def test_two_features_exact_code():
    stats = [stat(3.0, fid="a"), stat(0.4, fid="b")]
    inp = prepare(FOLDED_T, stats)
    e = exact_code(inp)
    # feature a is coded from b alone; b's MLE is theta0, so its capped
    # regret is 0 for every theta and the flat objective resolves to theta0
    assert inp.mles[1] == 0.0
    assert e.thetas[0] == 0.0 and DEGENERATE in e.flags[0]
    assert e.thetas[1] == pytest.approx(inp.mles[0], abs=1e-6)


def test_degenerate_alternative():
    stats = [stat(0.1, fid=f"f{i}") for i in range(4)]
    a = approx_code(prepare(FOLDED_T, stats))
    assert a.theta == 0.0 and DEGENERATE in a.flags


def test_null_data_favour_null():
    stats = [stat(v, fid=f"f{i}") for i, v in enumerate([0.0, 0.05, 0.1, 0.02, 0.08])]
    for c in approx_code(prepare(FOLDED_T, stats)).codes:
        assert c.delta >= 0


def test_exact_needs_two():
    with pytest.raises(EmptyAfterExclusion):
        exact_code(prepare(FOLDED_T, [stat(1.0)]))


def test_nats_are_bits_times_ln2():
    inp = prepare(FOLDED_T, synthetic_stats(10, 4))
    bits = approx_code(inp).codes
    nats = approx_code(inp, base=math.e).codes
    for b, n in zip(bits, nats):
        assert n.delta == pytest.approx(b.delta * math.log(2), rel=1e-12)
