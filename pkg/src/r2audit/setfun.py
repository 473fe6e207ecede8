"""The fit function viewed as a set function: gains, violation certificates,
empirical approximate-submodularity constants, and the chain lower bound.

All enumerations run off a shared FitCache, walk masks in lexicographic
order, and break argmin ties toward the smallest mask so results are
deterministic across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .bitsets import indices_of, iter_submasks, mask_of
from .errors import OutOfDomain, TooManyFeatures
from .regress import (
    DEFAULT_MAX_FEATURES,
    HARD_MAX_FEATURES,
    FitCache,
    StandardizedDesign,
    fit_entry,
)

VIOLATION_TOL = 1e-9
SKIP_DENOM_TOL = 1e-12

MODES = ("definition", "first_order", "second_order")


def _check_cap(m: int, max_features: int) -> None:
    cap = min(max_features, HARD_MAX_FEATURES)
    if m > cap:
        raise TooManyFeatures(m, cap)


def _r2(design: StandardizedDesign, mask: int, cache: FitCache) -> float:
    entry = cache.get(mask)
    if entry is None:
        entry = cache.get_or_compute(mask, lambda: fit_entry(design, indices_of(mask)))
    return entry.r_squared


def delta(
    design: StandardizedDesign,
    added: Iterable[int],
    base: Iterable[int],
    cache: FitCache | None = None,
) -> float:
    """Gain in fit from adding a feature set to a base model.

    Overlap between the two sets is allowed and contributes nothing.
    """
    cache = cache if cache is not None else FitCache()
    add_mask = mask_of(added)
    base_mask = mask_of(base)
    return _r2(design, add_mask | base_mask, cache) - _r2(design, base_mask, cache)


@dataclass(frozen=True)
class ViolationCertificate:
    """One witnessed failure of a diminishing-returns inequality.

    ``sets`` holds the witnessing index sets keyed by role (A, B, S, i, j
    depending on ``form``); lhs/rhs are the two sides of the inequality that
    should have satisfied lhs >= rhs, and deficit = rhs - lhs > 0.
    """

    form: str
    sets: tuple[tuple[str, tuple[int, ...]], ...]
    lhs: float
    rhs: float
    deficit: float

    def set_dict(self) -> dict[str, tuple[int, ...]]:
        return dict(self.sets)

    def to_jsonable(self, names: tuple[str, ...]) -> dict:
        rendered: dict[str, object] = {}
        for key, idx in self.sets:
            if key in ("i", "j"):
                rendered[key] = names[idx[0]]
            else:
                rendered[key] = [names[f] for f in idx]
        return {
            "form": self.form,
            "sets": rendered,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
        }


def _sets(**kwargs: tuple[int, ...]) -> tuple[tuple[str, tuple[int, ...]], ...]:
    return tuple(kwargs.items())


def check_submodular(
    design: StandardizedDesign,
    mode: str = "second_order",
    tolerance: float = VIOLATION_TOL,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> list[ViolationCertificate]:
    """Exhaustively certify one of the three diminishing-returns inequalities.

    mode "definition" checks F(A) + F(B) >= F(A|B) + F(A&B) over all pairs,
    "first_order" checks gains against nested base sets, and "second_order"
    checks gains against a single extra conditioning feature. Returns an
    empty list iff the inequality holds everywhere up to ``tolerance``;
    otherwise certificates sorted by deficit, largest first.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    m = design.m
    _check_cap(m, max_features)
    cache = cache if cache is not None else FitCache()
    full = (1 << m) - 1
    found: list[ViolationCertificate] = []

    if mode == "definition":
        for a_mask in range(full + 1):
            fa = _r2(design, a_mask, cache)
            for b_mask in range(a_mask, full + 1):
                lhs = fa + _r2(design, b_mask, cache)
                rhs = _r2(design, a_mask | b_mask, cache) + _r2(design, a_mask & b_mask, cache)
                if rhs - lhs > tolerance:
                    found.append(
                        ViolationCertificate(
                            "definition",
                            _sets(A=indices_of(a_mask), B=indices_of(b_mask)),
                            lhs,
                            rhs,
                            rhs - lhs,
                        )
                    )
    elif mode == "first_order":
        for a_mask in range(full + 1):
            rest = full & ~a_mask
            for extra in iter_submasks(rest):
                if extra == 0:
                    continue
                b_mask = a_mask | extra
                outside = full & ~b_mask
                fa = _r2(design, a_mask, cache)
                fb = _r2(design, b_mask, cache)
                i = 0
                probe = outside
                while probe:
                    if probe & 1:
                        bit = 1 << i
                        lhs = _r2(design, a_mask | bit, cache) - fa
                        rhs = _r2(design, b_mask | bit, cache) - fb
                        if rhs - lhs > tolerance:
                            found.append(
                                ViolationCertificate(
                                    "first_order",
                                    _sets(A=indices_of(a_mask), B=indices_of(b_mask), i=(i,)),
                                    lhs,
                                    rhs,
                                    rhs - lhs,
                                )
                            )
                    probe >>= 1
                    i += 1
    else:
        for a_mask in range(full + 1):
            fa = _r2(design, a_mask, cache)
            outside = indices_of(full & ~a_mask)
            for i in outside:
                gain_a = _r2(design, a_mask | (1 << i), cache) - fa
                for j in outside:
                    if j == i:
                        continue
                    with_j = a_mask | (1 << j)
                    rhs = _r2(design, with_j | (1 << i), cache) - _r2(design, with_j, cache)
                    if rhs - gain_a > tolerance:
                        found.append(
                            ViolationCertificate(
                                "second_order",
                                _sets(A=indices_of(a_mask), i=(i,), j=(j,)),
                                gain_a,
                                rhs,
                                rhs - gain_a,
                            )
                        )

    found.sort(key=lambda c: (-c.deficit, c.sets))
    return found


def find_suppressors(
    design: StandardizedDesign,
    tolerance: float = VIOLATION_TOL,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> list[ViolationCertificate]:
    """Certify every (S, i, j) where conditioning on j amplifies feature i.

    A suppressor raises the absolute adjusted correlation between the
    response and i when j joins the conditioning set S. Degenerate residuals
    count as zero correlation. Certificates store the two absolute
    correlations and are sorted by deficit, largest first.
    """
    m = design.m
    _check_cap(m, max_features)
    cache = cache if cache is not None else FitCache()
    full = (1 << m) - 1
    found: list[ViolationCertificate] = []
    for s_mask in range(full + 1):
        fs = _r2(design, s_mask, cache)
        outside = indices_of(full & ~s_mask)
        for i in outside:
            base_gain = _r2(design, s_mask | (1 << i), cache) - fs
            base_corr = math.sqrt(max(base_gain, 0.0))
            for j in outside:
                if j == i:
                    continue
                with_j = s_mask | (1 << j)
                gain = _r2(design, with_j | (1 << i), cache) - _r2(design, with_j, cache)
                cond_corr = math.sqrt(max(gain, 0.0))
                if cond_corr - base_corr > tolerance:
                    found.append(
                        ViolationCertificate(
                            "suppression",
                            _sets(S=indices_of(s_mask), i=(i,), j=(j,)),
                            base_corr,
                            cond_corr,
                            cond_corr - base_corr,
                        )
                    )
    found.sort(key=lambda c: (-c.deficit, c.sets))
    return found


def replay_certificate(
    design: StandardizedDesign,
    cert: ViolationCertificate,
    cache: FitCache | None = None,
) -> tuple[float, float]:
    """Recompute (lhs, rhs) of a certificate's inequality from its sets."""
    cache = cache if cache is not None else FitCache()
    sets = cert.set_dict()
    if cert.form == "definition":
        a = mask_of(sets["A"])
        b = mask_of(sets["B"])
        return (
            _r2(design, a, cache) + _r2(design, b, cache),
            _r2(design, a | b, cache) + _r2(design, a & b, cache),
        )
    if cert.form == "first_order":
        a = mask_of(sets["A"])
        b = mask_of(sets["B"])
        bit = 1 << sets["i"][0]
        return (
            _r2(design, a | bit, cache) - _r2(design, a, cache),
            _r2(design, b | bit, cache) - _r2(design, b, cache),
        )
    if cert.form == "second_order":
        a = mask_of(sets["A"])
        bit_i = 1 << sets["i"][0]
        bit_j = 1 << sets["j"][0]
        return (
            _r2(design, a | bit_i, cache) - _r2(design, a, cache),
            _r2(design, a | bit_j | bit_i, cache) - _r2(design, a | bit_j, cache),
        )
    if cert.form == "suppression":
        s = mask_of(sets["S"])
        bit_i = 1 << sets["i"][0]
        bit_j = 1 << sets["j"][0]
        base = _r2(design, s | bit_i, cache) - _r2(design, s, cache)
        cond = _r2(design, s | bit_j | bit_i, cache) - _r2(design, s | bit_j, cache)
        return math.sqrt(max(base, 0.0)), math.sqrt(max(cond, 0.0))
    raise ValueError(f"unknown certificate form {cert.form!r}")


@dataclass(frozen=True)
class GammaEstimates:
    """Worst-case gain ratios over second-order and first-order comparisons.

    Each part is the minimum of gain(small base) / gain(larger base) over its
    family of comparisons; ratios whose denominator is negligible carry no
    information and are skipped (counted). A part not computed is None; a
    minimum over no ratios is +inf.
    """

    gamma_s2: float | None = None
    witness_s2: tuple[tuple[int, ...], int, int] | None = None
    skipped_s2: int | None = None
    gamma_s: float | None = None
    witness_s: tuple[tuple[int, ...], tuple[int, ...], int] | None = None
    skipped_s: int | None = None


def empirical_gamma_s2(
    design: StandardizedDesign,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> GammaEstimates:
    """Minimum of gain_A(i) / gain_{A+j}(i) over all eligible (A, i, j)."""
    m = design.m
    _check_cap(m, max_features)
    cache = cache if cache is not None else FitCache()
    full = (1 << m) - 1
    best = math.inf
    witness = None
    skipped = 0
    for a_mask in range(full + 1):
        fa = _r2(design, a_mask, cache)
        outside = indices_of(full & ~a_mask)
        for i in outside:
            num = _r2(design, a_mask | (1 << i), cache) - fa
            for j in outside:
                if j == i:
                    continue
                with_j = a_mask | (1 << j)
                den = _r2(design, with_j | (1 << i), cache) - _r2(design, with_j, cache)
                if den < SKIP_DENOM_TOL:
                    skipped += 1
                    continue
                ratio = max(num, 0.0) / den
                if ratio < best:
                    best = ratio
                    witness = (indices_of(a_mask), i, j)
    return GammaEstimates(gamma_s2=best, witness_s2=witness, skipped_s2=skipped)


def empirical_gamma_s(
    design: StandardizedDesign,
    cache: FitCache | None = None,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> GammaEstimates:
    """Minimum of gain_A(i) / gain_B(i) over nested pairs A < B with i outside B."""
    m = design.m
    _check_cap(m, max_features)
    cache = cache if cache is not None else FitCache()
    full = (1 << m) - 1
    best = math.inf
    witness = None
    skipped = 0
    for a_mask in range(full + 1):
        fa = _r2(design, a_mask, cache)
        rest = full & ~a_mask
        for extra in iter_submasks(rest):
            if extra == 0:
                continue
            b_mask = a_mask | extra
            fb = _r2(design, b_mask, cache)
            for i in indices_of(full & ~b_mask):
                bit = 1 << i
                den = _r2(design, b_mask | bit, cache) - fb
                if den < SKIP_DENOM_TOL:
                    skipped += 1
                    continue
                num = _r2(design, a_mask | bit, cache) - fa
                ratio = max(num, 0.0) / den
                if ratio < best:
                    best = ratio
                    witness = (indices_of(a_mask), indices_of(b_mask), i)
    return GammaEstimates(gamma_s=best, witness_s=witness, skipped_s=skipped)


def merge_gamma_estimates(s2: GammaEstimates, s: GammaEstimates) -> GammaEstimates:
    """Combine the two one-sided estimates into a single record."""
    return GammaEstimates(
        gamma_s2=s2.gamma_s2,
        witness_s2=s2.witness_s2,
        skipped_s2=s2.skipped_s2,
        gamma_s=s.gamma_s,
        witness_s=s.witness_s,
        skipped_s=s.skipped_s,
    )


def chain_lower_bound(gamma_s2: float, k: int) -> float:
    """Worst-case first-order constant implied by k second-order steps.

    Telescoping a chain of k single-feature conditioning steps, each at the
    worst ratio, multiplies the gain by gamma_s2 at every step, so the
    implied constant is gamma_s2 ** k. Exactly submodular input (gamma_s2 = 1)
    propagates unchanged.
    """
    if k < 1 or int(k) != k:
        raise OutOfDomain(f"chain length must be a positive integer, got {k}")
    if gamma_s2 == 1.0:
        return 1.0
    if not 0.0 < gamma_s2 < 1.0:
        raise OutOfDomain(f"gamma_s2 must lie in (0, 1), got {gamma_s2}")
    return gamma_s2 ** int(k)
