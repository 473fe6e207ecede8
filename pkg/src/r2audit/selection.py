"""Selection algorithms the diagnostics explain: greedy stepwise, exhaustive
best subset, the sparsity-penalized path, the greedy guarantee check, and
(iterated) marginal-correlation screening.

Ties always break toward the lowest feature index, then the smallest mask,
so traces are reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .bitsets import indices_of, mask_of
from .errors import DegenerateResidual, InsufficientDof, RankDeficient, TooManyFeatures, ZeroBeta
from .regress import (
    DEFAULT_MAX_FEATURES,
    HARD_MAX_FEATURES,
    ZERO_RSS_TOL,
    FitCache,
    StandardizedDesign,
    ls_fit,
    partial_correlation,
)
from .setfun import _r2, check_submodular

NWF_THRESHOLD = 1.0 - 1.0 / math.e


def _check_cap(m: int, max_features: int) -> None:
    cap = min(max_features, HARD_MAX_FEATURES)
    if m > cap:
        raise TooManyFeatures(m, cap)


@dataclass(frozen=True)
class SelectionStep:
    feature: int
    delta_r2: float
    cumulative_r2: float
    marginal_t: float | None


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered record of a selection run: one entry per accepted feature."""

    algorithm: str
    steps: tuple[SelectionStep, ...]
    stopping_reason: str

    def selected(self) -> tuple[int, ...]:
        return tuple(step.feature for step in self.steps)

    def final_r_squared(self) -> float:
        return self.steps[-1].cumulative_r2 if self.steps else 0.0

    def to_json_lines(self, names: Sequence[str]) -> str:
        lines = []
        for rank, step in enumerate(self.steps, start=1):
            t = step.marginal_t
            if t is not None and not math.isfinite(t):
                t = "inf" if t > 0 else "-inf"
            lines.append(
                json.dumps(
                    {
                        "step": rank,
                        "feature": names[step.feature],
                        "delta_r2": step.delta_r2,
                        "cumulative_r2": step.cumulative_r2,
                        "marginal_t": t,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _step_t(design: StandardizedDesign, model: tuple[int, ...], j: int, cache: FitCache) -> float | None:
    """t statistic of feature j in the fit on model + {j}.

    Interpolating fits report the +inf sentinel; fits without residual
    degrees of freedom or with j degenerate report None.
    """
    subset = tuple(sorted(model + (j,)))
    rss = 1.0 - _r2(design, mask_of(subset), cache)
    if rss <= ZERO_RSS_TOL:
        return math.inf
    if len(subset) > design.n - 2:
        return None
    try:
        fit = ls_fit(design, subset)
    except (RankDeficient, InsufficientDof):
        return None
    return float(fit.t_statistics[subset.index(j)])


def forward_stepwise(
    design: StandardizedDesign,
    k: int,
    t_stop: float | None = None,
    cache: FitCache | None = None,
) -> SelectionTrace:
    """Greedy selection: each step adds the feature with the largest fit gain.

    Runs for k steps regardless of how small the gains get, unless ``t_stop``
    is set, in which case the run ends early once no remaining feature's
    per-step t statistic reaches the threshold in absolute value. The
    threshold governs continuation, so the first step is always taken.
    """
    if not 1 <= k <= design.m:
        raise ValueError(f"k must lie in 1..{design.m}")
    cache = cache if cache is not None else FitCache()
    model: tuple[int, ...] = ()
    steps: list[SelectionStep] = []
    reason = "max_steps"
    while len(model) < k:
        base = _r2(design, mask_of(model), cache)
        candidates = [j for j in range(design.m) if j not in model]
        if t_stop is not None and model:
            ts = {j: _step_t(design, model, j, cache) for j in candidates}
            if not any(t is not None and abs(t) >= t_stop for t in ts.values()):
                reason = "t_threshold"
                break
        best_j = -1
        best_gain = -math.inf
        for j in candidates:
            gain = _r2(design, mask_of(model) | (1 << j), cache) - base
            if gain > best_gain:
                best_gain = gain
                best_j = j
        t_val = _step_t(design, model, best_j, cache)
        model = tuple(sorted(model + (best_j,)))
        steps.append(
            SelectionStep(
                feature=best_j,
                delta_r2=best_gain,
                cumulative_r2=_r2(design, mask_of(model), cache),
                marginal_t=t_val,
            )
        )
    return SelectionTrace("forward_stepwise", tuple(steps), reason)


@dataclass(frozen=True)
class BestSubsetResult:
    subset: tuple[int, ...]
    r_squared: float


def best_subset(
    design: StandardizedDesign,
    k: int,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> BestSubsetResult:
    """Exhaustive maximizer of the fit over all subsets of size at most k."""
    _check_cap(design.m, max_features)
    if not 0 <= k <= design.m:
        raise ValueError(f"k must lie in 0..{design.m}")
    cache = cache if cache is not None else FitCache()
    best_mask = 0
    best_r2 = 0.0
    for size in range(1, k + 1):
        for combo in combinations(range(design.m), size):
            mask = mask_of(combo)
            value = _r2(design, mask, cache)
            if value > best_r2 or (value == best_r2 and mask < best_mask):
                best_r2 = value
                best_mask = mask
    return BestSubsetResult(indices_of(best_mask), best_r2)


@dataclass(frozen=True)
class L0PathPoint:
    lam: float
    subset: tuple[int, ...]
    objective: float


def l0_path(
    design: StandardizedDesign,
    lambda_grid: Iterable[float],
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> list[L0PathPoint]:
    """Exact sparsity-penalized path: argmin of ESS(S) + lambda |S| per lambda.

    With the response standardized, ESS(S) is 1 - r_squared(S), so the
    per-cardinality best subsets are computed once and reused across the
    whole grid. Objective ties break toward the smallest mask.
    """
    _check_cap(design.m, max_features)
    cache = cache if cache is not None else FitCache()
    per_size: list[tuple[int, float]] = [(0, 0.0)]
    for size in range(1, design.m + 1):
        best_mask = -1
        best_r2 = -1.0
        for combo in combinations(range(design.m), size):
            mask = mask_of(combo)
            value = _r2(design, mask, cache)
            if value > best_r2 or (value == best_r2 and mask < best_mask):
                best_r2 = value
                best_mask = mask
        per_size.append((best_mask, best_r2))

    path = []
    for lam in lambda_grid:
        if lam < 0:
            raise ValueError("lambda values must be nonnegative")
        chosen_mask = 0
        chosen_obj = math.inf
        for size, (mask, r2v) in enumerate(per_size):
            objective = (1.0 - r2v) + lam * size
            if objective < chosen_obj or (objective == chosen_obj and mask < chosen_mask):
                chosen_obj = objective
                chosen_mask = mask
        path.append(L0PathPoint(lam=lam, subset=indices_of(chosen_mask), objective=chosen_obj))
    return path


@dataclass(frozen=True)
class NwfResult:
    """Greedy-vs-optimal comparison with the (1 - 1/e) factor.

    The guarantee is conditional on submodularity, so the exhaustive
    second-order status is reported alongside: a violated bound on a
    non-submodular instance is attributable, not anomalous.
    """

    greedy_r2: float
    optimal_r2: float
    ratio: float
    guarantee_holds: bool
    is_submodular: bool
    threshold: float = NWF_THRESHOLD


def nwf_check(
    design: StandardizedDesign,
    k: int,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
    tolerance: float = 1e-9,
) -> NwfResult:
    """Compare k-step greedy fit against the exhaustive size-k optimum."""
    _check_cap(design.m, max_features)
    cache = cache if cache is not None else FitCache()
    greedy = forward_stepwise(design, k, cache=cache).final_r_squared()
    optimal = best_subset(design, k, cache=cache, max_features=max_features).r_squared
    ratio = 1.0 if optimal <= 0.0 else greedy / optimal
    violations = check_submodular(
        design, "second_order", cache=cache, max_features=max_features
    )
    return NwfResult(
        greedy_r2=greedy,
        optimal_r2=optimal,
        ratio=ratio,
        guarantee_holds=ratio >= NWF_THRESHOLD - tolerance,
        is_submodular=not violations,
    )


def sis_screen(design: StandardizedDesign, d: int) -> tuple[int, ...]:
    """Top d features by absolute marginal correlation (ties by index)."""
    if not 1 <= d <= design.m:
        raise ValueError(f"d must lie in 1..{design.m}")
    corr = design.marginal_correlations()
    order = sorted(range(design.m), key=lambda i: (-abs(corr[i]), i))
    return tuple(order[:d])


@dataclass(frozen=True)
class IsisRound:
    scores: tuple[tuple[int, float], ...]
    picked: tuple[int, ...]


@dataclass(frozen=True)
class IsisResult:
    selected: tuple[int, ...]
    rounds: tuple[IsisRound, ...]
    skipped: int


def isis(design: StandardizedDesign, d_per_round: int, rounds: int) -> IsisResult:
    """Iterated screening on residualized correlations.

    Each round ranks the remaining features by the absolute correlation
    between the response and the feature adjusted for everything selected so
    far, then keeps the top d. Features that became degenerate are skipped
    and counted. Stops early when nothing scorable remains.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    if not 1 <= d_per_round <= design.m:
        raise ValueError(f"d_per_round must lie in 1..{design.m}")
    if d_per_round * rounds > design.m:
        raise ValueError("total selection exceeds the number of features")
    selected: tuple[int, ...] = ()
    skipped = 0
    round_logs: list[IsisRound] = []
    for _ in range(rounds):
        scores: list[tuple[int, float]] = []
        for j in range(design.m):
            if j in selected:
                continue
            try:
                scores.append((j, abs(partial_correlation(design, j, selected))))
            except DegenerateResidual:
                skipped += 1
        if not scores:
            break
        scores.sort(key=lambda item: (-item[1], item[0]))
        picked = tuple(j for j, _ in scores[:d_per_round])
        round_logs.append(IsisRound(scores=tuple(scores), picked=picked))
        selected = tuple(sorted(selected + picked))
    return IsisResult(selected=selected, rounds=tuple(round_logs), skipped=skipped)


@dataclass(frozen=True)
class ScreeningAssumption:
    """Margins for the screening visibility condition on a known support.

    ``min_beta_margin`` is min |beta_i| - c2 / n^kappa over the support and
    ``min_visibility`` is the smallest |beta_i^-1 r_Yi|; the condition holds
    when the former is nonnegative and the latter reaches c3.
    """

    min_beta_margin: float
    min_visibility: float
    holds: bool
    visibilities: tuple[tuple[int, float], ...]


def sis_assumption_check(
    design: StandardizedDesign,
    true_support: Iterable[int],
    true_beta: Sequence[float],
    kappa: float,
    c2: float,
    c3: float,
) -> ScreeningAssumption:
    """Check whether every true feature is marginally visible enough to screen."""
    if not 0.0 <= kappa < 0.5:
        raise ValueError("kappa must lie in [0, 1/2)")
    support = tuple(sorted(set(int(i) for i in true_support)))
    if not support:
        raise ValueError("true support is empty")
    beta = np.asarray(true_beta, dtype=float)
    if beta.shape != (design.m,):
        raise ValueError("true_beta must have one entry per feature")
    corr = design.marginal_correlations()
    visibilities = []
    for i in support:
        if beta[i] == 0.0:
            raise ZeroBeta(i)
        visibilities.append((i, float(abs(corr[i] / beta[i]))))
    min_beta = min(float(abs(beta[i])) for i in support)
    margin = min_beta - c2 / design.n**kappa
    min_vis = min(v for _, v in visibilities)
    return ScreeningAssumption(
        min_beta_margin=margin,
        min_visibility=min_vis,
        holds=bool(margin >= 0.0 and min_vis >= c3),
        visibilities=tuple(visibilities),
    )
