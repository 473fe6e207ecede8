"""Standardized regression designs and projection-based fit evaluation.

Every downstream diagnostic treats the coefficient of determination as a set
function over feature subsets. This module owns the representation that makes
those evaluations cheap and exact: columns are centered and scaled to unit
length, so inner products are sample correlations and the fit of a subset is
the squared norm of the response projected onto the subset's span.

Rank decisions use a relative singular-value cutoff, so collinear subsets are
evaluated on the column space they actually span instead of failing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bitsets import indices_of, mask_of
from .errors import (
    Collinear,
    ConstantColumn,
    DataFormatError,
    DegenerateResidual,
    InsufficientDof,
    NotPSD,
    RankDeficient,
    TooFewRows,
)

# Shared numeric tolerances. Enumeration caps live here because the cache keys
# are 64-bit masks; HARD_MAX_FEATURES is the absolute ceiling for them.
CENTER_TOL = 1e-10
UNIT_NORM_TOL = 1e-10
RANK_RTOL = 1e-10
DEGENERATE_TOL = 1e-10
ZERO_RSS_TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_MAX_FEATURES = 24
HARD_MAX_FEATURES = 63

SubsetLike = Iterable[int]


@dataclass(frozen=True, eq=False)
class StandardizedDesign:
    """Feature matrix and response with mean-zero, unit-norm columns.

    Inner products between columns equal sample correlations, which makes the
    geometric formulas used elsewhere literal. Arrays are frozen after
    construction; use :func:`standardize` or :func:`gram_factory` to build one.
    """

    features: np.ndarray
    response: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("features must be (n, m) with a length-n response")
        n, m = X.shape
        if n < 2:
            raise ValueError("need at least two observations")
        if m < 1:
            raise ValueError("need at least one feature")
        if len(self.names) != m:
            raise ValueError("names must match the number of feature columns")
        sums = np.abs(X.sum(axis=0))
        norms = np.abs(np.linalg.norm(X, axis=0) - 1.0)
        if sums.max() > CENTER_TOL or norms.max() > UNIT_NORM_TOL:
            raise ValueError("feature columns are not centered to unit norm")
        if abs(y.sum()) > CENTER_TOL or abs(np.linalg.norm(y) - 1.0) > UNIT_NORM_TOL:
            raise ValueError("response is not centered to unit norm")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "response", y)
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def marginal_correlations(self) -> np.ndarray:
        """Correlation of each feature with the response."""
        return self.features.T @ self.response

    def correlation_matrix(self) -> np.ndarray:
        """Feature-by-feature sample correlation matrix."""
        return self.features.T @ self.features


@dataclass(frozen=True)
class FitEntry:
    r_squared: float
    rank: int


class FitCache:
    """Memoized subset-mask -> fit evaluations with insert-if-absent writes.

    Concurrent readers may race a writer; duplicate computation is harmless
    because entries are value-identical for a given design, and ``setdefault``
    guarantees a torn entry is never observed.
    """

    def __init__(self):
        self._entries: dict[int, FitEntry] = {0: FitEntry(0.0, 0)}

    def get(self, mask: int) -> FitEntry | None:
        return self._entries.get(mask)

    def get_or_compute(self, mask: int, compute: Callable[[], FitEntry]) -> FitEntry:
        entry = self._entries.get(mask)
        if entry is None:
            entry = self._entries.setdefault(mask, compute())
        return entry

    def __len__(self) -> int:
        return len(self._entries)

    def items(self):
        return self._entries.items()


def _as_indices(subset: SubsetLike, m: int) -> tuple[int, ...]:
    idx = tuple(sorted(set(int(i) for i in subset)))
    if idx and (idx[0] < 0 or idx[-1] >= m):
        raise ValueError(f"subset {list(idx)} out of range for m={m}")
    return idx


def default_names(m: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(m))


def standardize(
    raw: np.ndarray,
    response: np.ndarray,
    names: Sequence[str] | None = None,
) -> StandardizedDesign:
    """Center and scale columns (and the response) to unit length.

    Raises ConstantColumn for any zero-variance column; the response is
    reported with index -1. Already-standardized input is a fixed point.
    """
    X = np.asarray(raw, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("raw must be (n, m) with a length-n response")
    if X.shape[0] < 2:
        raise ValueError("need at least two observations")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DataFormatError("input contains NaN or Inf")

    Xc = X - X.mean(axis=0)
    scale = np.maximum(1.0, np.linalg.norm(X, axis=0))
    norms = np.linalg.norm(Xc, axis=0)
    for j in range(X.shape[1]):
        if norms[j] <= 1e-12 * scale[j]:
            raise ConstantColumn(j)
    yc = y - y.mean()
    ynorm = np.linalg.norm(yc)
    if ynorm <= 1e-12 * max(1.0, np.linalg.norm(y)):
        raise ConstantColumn(-1)

    cols = tuple(names) if names is not None else default_names(X.shape[1])
    return StandardizedDesign(Xc / norms, yc / ynorm, cols)


def load_csv(path, response_name: str):
    """Read a headered CSV into (raw features, response, feature names).

    Cells must parse as finite decimal floats; the response column is picked
    out by header name and removed from the feature block.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty CSV") from None
        header = [h.strip() for h in header]
        if response_name not in header:
            raise DataFormatError(f"response column {response_name!r} not in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"row {lineno} has {len(row)} cells, expected {len(header)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DataFormatError(f"row {lineno} contains a non-numeric cell") from None
    if len(rows) < 2:
        raise DataFormatError("need at least two data rows")
    data = np.asarray(rows, dtype=float)
    if not np.isfinite(data).all():
        raise DataFormatError("CSV contains NaN or Inf")
    ycol = header.index(response_name)
    y = data[:, ycol]
    X = np.delete(data, ycol, axis=1)
    names = tuple(h for i, h in enumerate(header) if i != ycol)
    return X, y, names


# ---------------------------------------------------------------------------
# Projection machinery
# ---------------------------------------------------------------------------


def _evaluate_subset(design: StandardizedDesign, mask: int) -> FitEntry:
    if mask == 0:
        return FitEntry(0.0, 0)
    idx = indices_of(mask)
    if len(idx) == 1:
        r = float(design.features[:, idx[0]] @ design.response)
        return FitEntry(min(r * r, 1.0), 1)
    X = design.features[:, idx]
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    proj = U[:, :rank].T @ design.response
    return FitEntry(min(float(proj @ proj), 1.0), rank)


def fit_entry(design: StandardizedDesign, subset: SubsetLike, cache: FitCache | None = None) -> FitEntry:
    """Cached (r_squared, rank) evaluation of one subset."""
    mask = mask_of(_as_indices(subset, design.m))
    if cache is None:
        return _evaluate_subset(design, mask)
    return cache.get_or_compute(mask, lambda: _evaluate_subset(design, mask))


def r_squared(design: StandardizedDesign, subset: SubsetLike, cache: FitCache | None = None) -> float:
    """Squared norm of the response's projection onto the subset's span.

    The empty subset evaluates to 0 by convention. Rank-deficient subsets are
    projected onto the space actually spanned.
    """
    return fit_entry(design, subset, cache).r_squared


def span_basis(design: StandardizedDesign, subset: SubsetLike) -> np.ndarray:
    """Orthonormal basis (n x rank) for the span of a feature subset."""
    idx = _as_indices(subset, design.m)
    if not idx:
        return np.zeros((design.n, 0))
    X = design.features[:, idx]
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    return U[:, :rank]


def residualize(
    design: StandardizedDesign,
    targets: SubsetLike,
    conditioners: SubsetLike,
) -> np.ndarray:
    """Columns of the target features with the conditioners projected out.

    Residuals are NOT renormalized; a residual column orthogonalized against a
    set it (numerically) lies in comes back near zero.
    """
    A = _as_indices(targets, design.m)
    S = _as_indices(conditioners, design.m)
    if set(A) & set(S):
        raise ValueError("targets and conditioners overlap")
    block = design.features[:, A].copy()
    if not S:
        return block
    Q = span_basis(design, S)
    return block - Q @ (Q.T @ block)


def partial_correlation(design: StandardizedDesign, i: int, subset: SubsetLike) -> float:
    """Correlation between the response and feature i adjusted for a subset.

    The squared value equals the fit improvement from adding i to the subset.
    Raises DegenerateResidual when i lies in the subset's span; callers that
    want a gain treat that case as zero.
    """
    S = _as_indices(subset, design.m)
    resid = residualize(design, (i,), S)[:, 0]
    norm = float(np.linalg.norm(resid))
    if norm <= DEGENERATE_TOL:
        raise DegenerateResidual(i, S)
    value = float(design.response @ resid) / norm
    return float(np.clip(value, -1.0, 1.0))


@dataclass(frozen=True)
class LeastSquaresFit:
    """Coefficients with standard errors and t statistics for one subset.

    A fit whose residual is numerically zero reports every t statistic as the
    +inf sentinel instead of failing; interpolating fits do occur on exact
    constructions.
    """

    subset: tuple[int, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    rss: float
    dof: int


def ls_fit(design: StandardizedDesign, subset: SubsetLike) -> LeastSquaresFit:
    """Least-squares fit of the response on a feature subset.

    The intercept is absorbed by standardization, so the residual variance
    uses n - |S| - 1 degrees of freedom.
    """
    idx = _as_indices(subset, design.m)
    if not idx:
        raise ValueError("ls_fit needs a nonempty subset")
    k = len(idx)
    if k > design.n - 2:
        raise InsufficientDof(idx)
    X = design.features[:, idx]
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficient(idx)
    proj = U.T @ design.response
    coef = Vt.T @ (proj / s)
    rss = max(1.0 - float(proj @ proj), 0.0)
    dof = design.n - k - 1
    if rss <= ZERO_RSS_TOL:
        se = np.zeros(k)
        t = np.full(k, np.inf)
    else:
        sigma2 = rss / dof
        gram_inv_diag = np.sum((Vt / s[:, None]) ** 2, axis=0)
        se = np.sqrt(sigma2 * gram_inv_diag)
        t = coef / se
    return LeastSquaresFit(idx, coef, se, t, rss, dof)


@dataclass(frozen=True)
class CoefficientDecomposition:
    marginal: float
    direct: float
    indirect: float


def coef_decomposition(design: StandardizedDesign, i: int, j: int) -> CoefficientDecomposition:
    """Split the simple-regression slope of i into direct and indirect parts.

    marginal = direct + indirect, where direct is i's coefficient in the
    two-feature model with j, and indirect routes through regressing i on j.
    """
    if i == j:
        raise ValueError("need two distinct features")
    xi = design.features[:, i]
    xj = design.features[:, j]
    y = design.response
    r_ij = float(xi @ xj)
    det = 1.0 - r_ij * r_ij
    if det <= 1e-12:
        raise Collinear(i, j)
    r_yi = float(y @ xi)
    r_yj = float(y @ xj)
    direct = (r_yi - r_ij * r_yj) / det
    beta_j = (r_yj - r_ij * r_yi) / det
    return CoefficientDecomposition(marginal=r_yi, direct=direct, indirect=r_ij * beta_j)


# ---------------------------------------------------------------------------
# Exact-Gram synthesis
# ---------------------------------------------------------------------------


def _centered_orthonormal_basis(n: int) -> np.ndarray:
    """Helmert-style orthonormal basis (n x (n-1)) of the mean-zero subspace."""
    Q = np.zeros((n, n - 1))
    for j in range(1, n):
        scale = 1.0 / np.sqrt(j * (j + 1))
        Q[:j, j - 1] = scale
        Q[j, j - 1] = -j * scale
    return Q


def gram_factory(
    gram: np.ndarray,
    n: int,
    names: Sequence[str] | None = None,
) -> StandardizedDesign:
    """Realize a target correlation matrix as an exact finite sample.

    ``gram`` is (k+1) x (k+1) with the response first. The eigenfactor of the
    gram is embedded into an orthonormal basis of the subspace orthogonal to
    the constant vector, so the sample correlations of the returned design
    equal the target entrywise up to floating-point error. Requires
    n >= k + 2 rows.
    """
    G = np.asarray(gram, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 2:
        raise ValueError("gram must be square with at least two variables")
    if np.abs(G - G.T).max() > 1e-10:
        raise ValueError("gram must be symmetric")
    if np.abs(np.diag(G) - 1.0).max() > 1e-10:
        raise ValueError("gram must have a unit diagonal")
    k = G.shape[0] - 1
    if n < k + 2:
        raise TooFewRows(f"need n >= {k + 2} rows to embed {k + 1} variables")
    w, V = np.linalg.eigh(G)
    if w[0] < -PSD_TOL:
        raise NotPSD(f"gram has eigenvalue {w[0]:.3e}")
    factor = V * np.sqrt(np.clip(w, 0.0, None))
    Q = _centered_orthonormal_basis(n)
    columns = Q[:, : k + 1] @ factor.T
    cols = tuple(names) if names is not None else default_names(k)
    return StandardizedDesign(columns[:, 1:], columns[:, 0], cols)
