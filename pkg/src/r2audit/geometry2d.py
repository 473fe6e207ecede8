"""Two-feature feasibility geometry: the angle parameterization, diagnostic
grids, and the t-statistic ratio against its closed-form cap.

A two-feature problem is a triangle: the response projected on each feature
gives two vertices, the origin the third. The angle between the features
fixes their correlation, the angle at the first projection fixes relative
predictive power, and the overall fit level only scales the triangle. All
gain ratios are scale-free, so grids at different fit levels carry identical
diagnostic columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InfeasibleAngles
from .gamma import PairDiagnostics, gamma_pair
from .regress import gram_factory, ls_fit

# Diagnostics are evaluated at this fixed fit level. They are mathematically
# invariant to it, and pinning one value makes grids at different requested
# levels agree bit for bit, including near-singular cells.
REFERENCE_R2 = 0.25

GRID_COLUMNS = (
    "theta",
    "v",
    "tau",
    "r12",
    "r_y1",
    "r_y2",
    "b",
    "gamma1",
    "gamma2",
    "gamma_s2",
    "sum_bound",
    "gamma_sr",
    "t_ratio_bound",
)


@dataclass(frozen=True)
class TrianglePoint:
    """One feasible two-feature regression problem.

    theta is the angle between the features (so r12 = cos theta), tau the
    interior angle at the first projection vertex, r2_full the joint fit, and
    b the side length between the two projection vertices.
    """

    theta: float
    tau: float
    r2_full: float
    r12: float
    r_y1: float
    r_y2: float
    b: float


@dataclass(frozen=True)
class GridCell:
    theta: float
    v: float
    tau: float
    r12: float
    r_y1: float
    r_y2: float
    b: float
    gamma1: float
    gamma2: float
    gamma_s2: float
    sum_bound: float
    gamma_sr: float
    t_ratio_bound: float


def triangle_solve(theta: float, tau: float, r2_full: float) -> TrianglePoint:
    """Solve the triangle for the marginal correlations.

    By the law of sines on the (origin, projection 1, projection 2) triangle,
    the side to the second projection is b sin(tau) / sin(theta) and the side
    to the first is b sin(theta + tau) / sin(theta), with
    b = sqrt((1 - r12^2) r2_full).
    """
    if not 0.0 < theta < math.pi:
        raise InfeasibleAngles(f"theta must lie in (0, pi), got {theta}")
    if not 0.0 < tau < math.pi - theta:
        raise InfeasibleAngles(f"tau must lie in (0, pi - theta), got {tau}")
    if not 0.0 < r2_full <= 1.0:
        raise InfeasibleAngles(f"r2_full must lie in (0, 1], got {r2_full}")
    r12 = math.cos(theta)
    b = math.sqrt((1.0 - r12 * r12) * r2_full)
    sin_theta = math.sin(theta)
    r_y1 = b * math.sin(theta + tau) / sin_theta
    r_y2 = b * math.sin(tau) / sin_theta
    return TrianglePoint(theta=theta, tau=tau, r2_full=r2_full, r12=r12, r_y1=r_y1, r_y2=r_y2, b=b)


def t_ratio_bound_from_gamma(gamma_sr: float) -> float:
    """Cap on the joint-to-marginal squared t ratio implied by the
    submodularity ratio; positive because gamma_sr never exceeds 2."""
    return 2.0 / gamma_sr - 1.0


def grid_evaluate(theta_steps: int, v_steps: int, r2_full: float = 0.5) -> list[GridCell]:
    """Diagnostics over a uniform (theta, v) grid with v = tau + theta / 2.

    Grid lines are at multiples of pi / steps with the open-interval
    endpoints dropped; infeasible cells (tau outside (0, pi - theta)) are
    omitted entirely. Cells are produced row-major, theta outer. The
    diagnostic ratios are evaluated at a fixed reference fit level, so only
    the geometry columns (r_y1, r_y2, b) depend on ``r2_full``.
    """
    if theta_steps < 2 or v_steps < 2:
        raise ValueError("need at least 2 steps per axis")
    if not 0.0 < r2_full <= 1.0:
        raise ValueError("r2_full must lie in (0, 1]")
    cells: list[GridCell] = []
    for i in range(1, theta_steps):
        # The ratio first: dyadic fractions like 1/2 stay exact, so an even
        # grid contains the orthogonal column at exactly pi/2.
        theta = math.pi * (i / theta_steps)
        for j in range(1, v_steps):
            v = math.pi * (j / v_steps)
            tau = v - theta / 2.0
            if not 0.0 < tau < math.pi - theta:
                continue
            point = triangle_solve(theta, tau, r2_full)
            ref = triangle_solve(theta, tau, REFERENCE_R2)
            diag = gamma_pair(ref.r_y1, ref.r_y2, ref.r12)
            cells.append(
                GridCell(
                    theta=point.theta,
                    v=v,
                    tau=tau,
                    r12=point.r12,
                    r_y1=point.r_y1,
                    r_y2=point.r_y2,
                    b=point.b,
                    gamma1=diag.gamma1,
                    gamma2=diag.gamma2,
                    gamma_s2=diag.gamma_s2,
                    sum_bound=diag.sum_bound,
                    gamma_sr=diag.gamma_sr,
                    t_ratio_bound=t_ratio_bound_from_gamma(diag.gamma_sr),
                )
            )
    return cells


def grid_csv_lines(cells: Iterable[GridCell]) -> list[str]:
    """Render grid cells as CSV lines (12 significant digits, LF endings)."""
    lines = [",".join(GRID_COLUMNS)]
    for cell in cells:
        lines.append(",".join(f"{getattr(cell, col):.12g}" for col in GRID_COLUMNS))
    return lines


def point_diagnostics(point: TrianglePoint) -> PairDiagnostics:
    """Pair diagnostics of a triangle point at the reference fit level."""
    ref = triangle_solve(point.theta, point.tau, REFERENCE_R2)
    return gamma_pair(ref.r_y1, ref.r_y2, ref.r12)


@dataclass(frozen=True)
class TRatioResult:
    """Observed joint-to-marginal squared-t ratio against the closed-form cap."""

    lhs: float
    bound: float
    holds: bool
    t_marginal_sq: tuple[float, float]
    t_joint_sq: tuple[float, float]


def t_ratio_empirical(point: TrianglePoint, n: int, tolerance: float = 1e-9) -> TRatioResult:
    """Realize a triangle point as data and compare t statistics to the cap.

    Builds an exact-Gram sample of size n, fits each feature alone and both
    jointly, and forms (t_j1^2 + t_j2^2) / (t_m1^2 + t_m2^2). The reported
    bound is the scale-free cap 2 / gamma_sr - 1; the observed ratio can
    exceed it once the joint fit is strong, because the joint model's smaller
    residual variance inflates joint t statistics (see README notes).
    """
    if n < 4:
        raise ValueError("need n >= 4 for joint-fit degrees of freedom")
    gram = np.array(
        [
            [1.0, point.r_y1, point.r_y2],
            [point.r_y1, 1.0, point.r12],
            [point.r_y2, point.r12, 1.0],
        ]
    )
    design = gram_factory(gram, n)
    tm1 = float(ls_fit(design, (0,)).t_statistics[0])
    tm2 = float(ls_fit(design, (1,)).t_statistics[0])
    joint = ls_fit(design, (0, 1)).t_statistics
    tj1, tj2 = float(joint[0]), float(joint[1])
    lhs = (tj1 * tj1 + tj2 * tj2) / (tm1 * tm1 + tm2 * tm2)
    bound = t_ratio_bound_from_gamma(point_diagnostics(point).gamma_sr)
    return TRatioResult(
        lhs=lhs,
        bound=bound,
        holds=lhs <= bound + tolerance,
        t_marginal_sq=(tm1 * tm1, tm2 * tm2),
        t_joint_sq=(tj1 * tj1, tj2 * tj2),
    )


def joint_t_extremes(marginal_t: float, gamma_sr: float) -> tuple[float, float]:
    """Largest joint t statistics compatible with the cap at a marginal level.

    With both marginal t statistics at ``marginal_t``, the cap limits the sum
    of squared joint t statistics; the first value concentrates it all on one
    feature, the second splits it evenly.
    """
    total = t_ratio_bound_from_gamma(gamma_sr) * 2.0 * marginal_t * marginal_t
    return math.sqrt(total), math.sqrt(total / 2.0)


# ---------------------------------------------------------------------------
# SVG heatmaps
# ---------------------------------------------------------------------------

_BAND_STEPS = {"t_ratio_bound": (0.5, 10.0)}
_DEFAULT_BAND = (0.2, 2.0)


def _band_color(value: float, step: float, top: float) -> str:
    bands = int(top / step)
    if not math.isfinite(value):
        value = top if value > 0 else 0.0
    idx = min(int(max(value, 0.0) / step), bands)
    frac = idx / bands
    r = int(round(40 + 215 * frac))
    g = int(round(60 + 40 * (1 - abs(2 * frac - 1))))
    b = int(round(255 - 215 * frac))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(
    cells: Sequence[GridCell],
    field: str,
    theta_steps: int,
    v_steps: int,
    cell_px: int = 6,
) -> str:
    """Banded heatmap of one diagnostic column over the feasible region.

    Colors step at fixed level-set thresholds (0.2 apart for gain ratios,
    0.5 apart for the t-ratio cap) on a linear blue-to-red ramp. Output is a
    deterministic standalone SVG document.
    """
    if field not in GRID_COLUMNS:
        raise ValueError(f"unknown field {field!r}")
    step, top = _BAND_STEPS.get(field, _DEFAULT_BAND)
    width = (theta_steps - 1) * cell_px
    height = (v_steps - 1) * cell_px
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#f0f0f0"/>',
    ]
    for cell in cells:
        col = int(round(cell.theta / math.pi * theta_steps)) - 1
        row = v_steps - 1 - int(round(cell.v / math.pi * v_steps))
        color = _band_color(getattr(cell, field), step, top)
        parts.append(
            f'<rect x="{col * cell_px}" y="{row * cell_px}" '
            f'width="{cell_px}" height="{cell_px}" fill="{color}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
