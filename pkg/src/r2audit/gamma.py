"""Submodularity ratio: exhaustive general form plus two-feature closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from .bitsets import mask_of
from .errors import EmptyCandidateSet, InfeasibleCorrelations, TooManyFeatures
from .regress import DEFAULT_MAX_FEATURES, HARD_MAX_FEATURES, FitCache, StandardizedDesign
from .setfun import SKIP_DENOM_TOL, _r2

MODE_AT_MOST_K = "at_most_k"
MODE_EXACTLY_K = "exactly_k"
FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class RatioQuery:
    """One submodularity-ratio request: base set, candidate cardinality, mode.

    ``at_most_k`` ranges candidate sets over sizes 1..k (singletons pin the
    minimum at 1 whenever they are admissible); ``exactly_k`` fixes the size.
    """

    base: tuple[int, ...]
    k: int
    mode: str = MODE_AT_MOST_K

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.mode not in (MODE_AT_MOST_K, MODE_EXACTLY_K):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "base", tuple(sorted(set(self.base))))


@dataclass(frozen=True)
class RatioResult:
    gamma_sr: float
    argmin: tuple[int, ...]
    skipped: int


def submodularity_ratio(
    design: StandardizedDesign,
    query: RatioQuery,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> RatioResult:
    """Worst-case ratio of summed single-feature gains to the joint gain.

    For each admissible candidate set T disjoint from the base S, compares
    sum_i gain_S(t_i) against gain_S(T), both computed as fit differences.
    Candidates whose joint gain is negligible are skipped and counted; if
    everything is skipped there is no ratio to report and
    EmptyCandidateSet is raised.
    """
    m = design.m
    cap = min(max_features, HARD_MAX_FEATURES)
    if m > cap:
        raise TooManyFeatures(m, cap)
    if len(query.base) + query.k > m:
        raise ValueError("base set plus k exceeds the number of features")
    cache = cache if cache is not None else FitCache()

    s_mask = mask_of(query.base)
    fs = _r2(design, s_mask, cache)
    candidates = [i for i in range(m) if not (s_mask >> i) & 1]
    singles = {i: _r2(design, s_mask | (1 << i), cache) - fs for i in candidates}

    sizes = [query.k] if query.mode == MODE_EXACTLY_K else list(range(1, query.k + 1))
    best = math.inf
    argmin: tuple[int, ...] = ()
    skipped = 0
    for size in sizes:
        for team in combinations(candidates, size):
            t_mask = mask_of(team)
            joint = _r2(design, s_mask | t_mask, cache) - fs
            if joint < SKIP_DENOM_TOL:
                skipped += 1
                continue
            total = sum(singles[i] for i in team)
            ratio = max(total, 0.0) / joint
            if ratio < best:
                best = ratio
                argmin = team
    if not math.isfinite(best):
        raise EmptyCandidateSet("every candidate set had negligible joint gain")
    return RatioResult(gamma_sr=best, argmin=argmin, skipped=skipped)


@dataclass(frozen=True)
class PairDiagnostics:
    """Closed-form two-feature diagnostics from (r_y1, r_y2, r12).

    gamma1 and gamma2 are the single-step gain ratios for each feature,
    gamma_s2 their minimum, gamma_sr the two-feature submodularity ratio, and
    sum_bound the ratio obtained by summing both single-step inequalities
    (always at least gamma_s2 on feasible inputs). Ratios whose denominator
    vanishes are reported as +inf sentinels.
    """

    r_y1: float
    r_y2: float
    r12: float
    gamma1: float
    gamma2: float
    gamma_s2: float
    gamma_sr: float
    sum_bound: float


def _conditional_gain(r_own: float, r_other: float, r12: float) -> float:
    """Fit gain of one feature once the other is already in the model."""
    residual = r_own - r12 * r_other
    return residual * residual / (1.0 - r12 * r12)


def gamma_pair(r_y1: float, r_y2: float, r12: float) -> PairDiagnostics:
    """Evaluate the closed-form pair diagnostics for one correlation triple."""
    if not (abs(r_y1) < 1.0 and abs(r_y2) < 1.0 and abs(r12) < 1.0):
        raise InfeasibleCorrelations("correlations must lie strictly inside (-1, 1)")
    det = 1.0 - r12 * r12
    joint = (r_y1 * r_y1 - 2.0 * r12 * r_y1 * r_y2 + r_y2 * r_y2) / det
    if joint > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleCorrelations(f"implied joint fit {joint:.6f} exceeds 1")

    delta1 = r_y1 * r_y1
    delta2 = r_y2 * r_y2
    gain1 = _conditional_gain(r_y1, r_y2, r12)
    gain2 = _conditional_gain(r_y2, r_y1, r12)
    gamma1 = delta1 / gain1 if gain1 > 0.0 else math.inf
    gamma2 = delta2 / gain2 if gain2 > 0.0 else math.inf
    gamma_sr = (delta1 + delta2) / joint if joint > 0.0 else math.inf
    # gain1 + gain2 equals 2 * joint - delta1 - delta2 but without the
    # cancellation, so the symmetric-case identity sum_bound = gamma_s2 is
    # exact in floating point as well.
    spread = gain1 + gain2
    sum_bound = (delta1 + delta2) / spread if spread > 0.0 else math.inf
    return PairDiagnostics(
        r_y1=r_y1,
        r_y2=r_y2,
        r12=r12,
        gamma1=gamma1,
        gamma2=gamma2,
        gamma_s2=min(gamma1, gamma2),
        gamma_sr=gamma_sr,
        sum_bound=sum_bound,
    )
