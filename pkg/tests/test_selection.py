import math

import numpy as np
import pytest

from r2audit import (
    FitCache,
    best_subset,
    forward_stepwise,
    gram_factory,
    isis,
    l0_path,
    nwf_check,
    r_squared,
    sis_assumption_check,
    sis_screen,
    suppressor_population,
)
from r2audit.errors import TooManyFeatures, ZeroBeta
from conftest import make_noisy_design, make_orthogonal_design


# ---------------------------------------------------------------------------
# forward_stepwise
# ---------------------------------------------------------------------------


def test_stepwise_miller_first_pick(miller_design):
    trace = forward_stepwise(miller_design, 3)
    assert trace.steps[0].feature == 2
    assert abs(trace.steps[0].delta_r2 - 0.2) < 1e-3


def test_stepwise_miller_t_stop(miller_design):
    trace = forward_stepwise(miller_design, 3, t_stop=2.0)
    assert trace.selected() == (2,)
    assert trace.stopping_reason == "t_threshold"


def test_stepwise_orthogonal_orders_by_marginal():
    d = make_orthogonal_design([0.2, 0.6, 0.4], n=8)
    trace = forward_stepwise(d, 3)
    assert trace.selected() == (1, 2, 0)


def test_stepwise_first_step_is_best_marginal():
    d = make_noisy_design(91, n=30, m=6)
    r = d.marginal_correlations()
    trace = forward_stepwise(d, 1)
    assert trace.steps[0].feature == int(np.argmax(r**2))
    assert abs(trace.steps[0].delta_r2 - max(r**2)) < 1e-12


def test_stepwise_trace_invariants():
    d = make_noisy_design(92, n=30, m=6)
    cache = FitCache()
    trace = forward_stepwise(d, 4, cache=cache)
    cumulative = [s.cumulative_r2 for s in trace.steps]
    assert cumulative == sorted(cumulative)
    for i in range(1, len(trace.steps) + 1):
        prefix = trace.selected()[:i]
        assert abs(cumulative[i - 1] - r_squared(d, prefix, cache)) < 1e-10


def test_stepwise_interpolating_fit_reports_sentinel(miller_design):
    trace = forward_stepwise(miller_design, 3)
    assert trace.steps[-1].marginal_t == math.inf


def test_stepwise_json_lines(miller_design):
    trace = forward_stepwise(miller_design, 3)
    lines = trace.to_json_lines(miller_design.names).splitlines()
    assert len(lines) == 3
    import json

    first = json.loads(lines[0])
    assert first["feature"] == "X3"
    last = json.loads(lines[-1])
    assert last["marginal_t"] == "inf"


# ---------------------------------------------------------------------------
# best_subset
# ---------------------------------------------------------------------------


def test_best_subset_miller(miller_design):
    res = best_subset(miller_design, 2)
    assert res.subset == (0, 1)
    assert abs(res.r_squared - 1.0) < 1e-9


def test_best_subset_full_budget():
    d = make_noisy_design(70, n=25, m=5)
    res = best_subset(d, 5)
    assert abs(res.r_squared - r_squared(d, tuple(range(5)))) < 1e-10


def test_best_subset_matches_uncached_enumeration():
    from itertools import combinations

    d = make_noisy_design(71, n=30, m=8)
    res = best_subset(d, 3)
    best = (0.0, ())
    for size in range(1, 4):
        for combo in combinations(range(8), size):
            value = r_squared(d, combo)  # fresh, cache-free evaluations
            if value > best[0]:
                best = (value, combo)
    assert res.subset == best[1]
    assert abs(res.r_squared - best[0]) < 1e-12


def test_best_subset_cap():
    d = make_noisy_design(72, n=30, m=6)
    with pytest.raises(TooManyFeatures):
        best_subset(d, 2, max_features=4)


# ---------------------------------------------------------------------------
# l0_path
# ---------------------------------------------------------------------------


def test_l0_zero_penalty_maximizes_fit(miller_design):
    point = l0_path(miller_design, [0.0])[0]
    assert abs((1.0 - point.objective) - r_squared(miller_design, point.subset)) < 1e-12
    assert abs(r_squared(miller_design, point.subset) - 1.0) < 1e-9


def test_l0_large_penalty_empties_model():
    d = make_orthogonal_design([0.5, 0.3, 0.2], n=8)
    max_marginal_gain = max(d.marginal_correlations() ** 2)
    point = l0_path(d, [max_marginal_gain + 1e-9])[0]
    assert point.subset == ()
    # and a penalty of 1 empties any model
    dd = make_noisy_design(80, n=25, m=5)
    assert l0_path(dd, [1.0])[0].subset == ()


def test_l0_miller_middle_penalty(miller_design):
    # Enumeration oracle at lambda = 0.1: objectives over all subsets.
    from itertools import combinations

    lam = 0.1
    best = (math.inf, None)
    for size in range(4):
        for combo in combinations(range(3), size):
            obj = (1.0 - r_squared(miller_design, combo)) + lam * size
            if obj < best[0]:
                best = (obj, combo)
    point = l0_path(miller_design, [lam])[0]
    assert point.subset == best[1] == (0, 1)


def test_l0_path_monotone_in_lambda():
    d = make_noisy_design(81, n=30, m=6)
    lams = [0.0, 0.01, 0.02, 0.05, 0.1, 0.3, 1.0]
    path = l0_path(d, lams)
    sizes = [len(p.subset) for p in path]
    assert sizes == sorted(sizes, reverse=True)
    # at lambda = 0 the per-size objectives are nonincreasing in size
    cache = FitCache()
    per_size = [
        min(1.0 - r_squared(d, c, cache) for c in _combos(6, s)) for s in range(1, 7)
    ]
    assert per_size == sorted(per_size, reverse=True)


def _combos(m, size):
    from itertools import combinations

    return list(combinations(range(m), size))


# ---------------------------------------------------------------------------
# nwf_check
# ---------------------------------------------------------------------------


def test_nwf_orthogonal_ratio_one():
    d = make_orthogonal_design([0.6, 0.4, 0.2], n=8)
    res = nwf_check(d, 2)
    assert abs(res.ratio - 1.0) < 1e-10
    assert res.guarantee_holds
    assert res.is_submodular


def test_nwf_miller_violation(miller_design):
    res = nwf_check(miller_design, 2)
    assert abs(res.ratio - 0.2) < 1e-3
    assert not res.guarantee_holds
    assert not res.is_submodular
    assert abs(res.threshold - (1 - 1 / math.e)) < 1e-12


def test_greedy_dominated_by_best_subset():
    for seed in range(6):
        d = make_noisy_design(seed + 300, n=30, m=7)
        for k in (1, 2, 3):
            greedy = forward_stepwise(d, k).final_r_squared()
            optimal = best_subset(d, k).r_squared
            assert optimal >= greedy - 1e-10


# ---------------------------------------------------------------------------
# sis / isis
# ---------------------------------------------------------------------------


def test_sis_miller(miller_design):
    assert sis_screen(miller_design, 1) == (2,)


def test_sis_orthogonal_matches_best_subset():
    d = make_orthogonal_design([0.5, 0.2, 0.6, 0.3], n=9)
    for k in (1, 2, 3):
        assert set(sis_screen(d, k)) == set(best_subset(d, k).subset)


def test_sis_suppressor_misses_joint_structure():
    d = gram_factory(suppressor_population(3, 1.0, 3.0), 8)
    picked = sis_screen(d, 2)
    assert set(picked) == {0, 1}
    assert r_squared(d, picked) < 0.1  # the pair explains almost nothing


def test_isis_single_round_equals_sis():
    d = make_noisy_design(110, n=30, m=6)
    assert isis(d, 3, 1).selected == tuple(sorted(sis_screen(d, 3)))


def test_isis_miller_recovers_everything(miller_design):
    res = isis(miller_design, 1, 3)
    assert [r.picked for r in res.rounds] == [(2,), (1,), (0,)]
    assert abs(r_squared(miller_design, res.selected) - 1.0) < 1e-9


def test_isis_orthogonal_partitions_ranking():
    d = make_orthogonal_design([0.5, 0.2, 0.6, 0.3], n=9)
    res = isis(d, 2, 2)
    ranking = sis_screen(d, 4)
    assert res.rounds[0].picked == ranking[:2]
    assert res.rounds[1].picked == tuple(sorted(ranking[2:], key=lambda i: (-abs(d.marginal_correlations()[i]), i)))


# ---------------------------------------------------------------------------
# sis_assumption_check
# ---------------------------------------------------------------------------


def test_assumption_orthogonal_visibility_one():
    d = make_orthogonal_design([0.5, 0.3, 0.2], n=8)
    beta = d.marginal_correlations()
    res = sis_assumption_check(d, (0, 1, 2), beta, kappa=0.25, c2=0.01, c3=0.5)
    for _, v in res.visibilities:
        assert abs(v - 1.0) < 1e-10
    assert res.holds


def test_assumption_miller_fails(miller_design):
    res = sis_assumption_check(
        miller_design, (0, 1), np.array([1.0, -1.0, 0.0]), kappa=0.25, c2=0.01, c3=0.001
    )
    vis = dict(res.visibilities)
    assert abs(vis[1] - 0.0016) < 5e-4
    assert vis[0] < 1e-12           # the first feature is marginally invisible
    assert res.min_visibility < 1e-12
    assert not res.holds


def test_assumption_zero_beta():
    d = make_noisy_design(120, n=20, m=4)
    with pytest.raises(ZeroBeta):
        sis_assumption_check(d, (0, 1), np.array([1.0, 0.0, 0.5, 0.2]), 0.25, 0.01, 0.1)


def test_assumption_visibility_shrinks_with_noise():
    values = []
    for sigma_eps in (1.0, 3.0, 10.0):
        d = gram_factory(suppressor_population(3, 1.0, sigma_eps), 8)
        res = sis_assumption_check(d, (0, 1, 2), np.ones(3), kappa=0.25, c2=0.01, c3=0.01)
        values.append(res.min_visibility)
    assert values[0] > values[1] > values[2]
