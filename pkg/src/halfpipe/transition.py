"""Rescaled holonomy families and their half-pipe limits.

Bending a surface by angles proportional to t produces structures that
collapse onto the bending surface as t -> 0; conjugating by the rescaling
diag(1, 1, 1, 1/|t|) blows the collapse back up, and the rescaled families
converge to half-pipe data.  This module builds those families over a fixed
Fuchsian base (hyperbolic for t > 0, anti-de Sitter for t < 0), extrapolates
their limits with first-order Richardson steps, fits empirical convergence
orders, and packages the diagnostics for reporting.  It also provides the
closed-form width bound for convex cores, arc-length points on geodesics
toward the ideal boundary, and the analogous limit check for reflections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from halfpipe.bending import BendingContext, bending_map, bent_holonomy
from halfpipe.fuchsian import PuncturedTorusGroup, WeightedMulticurve
from halfpipe.geometry import (
    ADS,
    HP,
    HYP,
    Geometry,
    GeometryError,
    Plane,
    ProjectivePoint,
    form_dot,
    form_eval,
)
from halfpipe.isometry import reflection, rescale_conjugate, rescaling_matrix

# Default geometric basepoint for fixed-base families; off the axis leaves of
# the short punctured-torus curves.
DEFAULT_BASE_POINT = (0.11, 0.07)

# Signed default grid: hyperbolic side positive, anti-de Sitter side negative.
DEFAULT_GRID = (-1e-1, 1e-1, -1e-2, 1e-2, -1e-3, 1e-3, -1e-4, 1e-4)

# Two-sided limits and matrix identities of limits are compared at this scale.
EPS_LIMIT = 1e-6

# Residuals below this scale count as exactly converged when fitting orders.
EPS_RESIDUAL_FLOOR = 1e-14


class InsufficientGridError(GeometryError):
    """Extrapolation needs at least three grid points on each side."""


class BadTangentError(GeometryError):
    """The direction is not a unit tangent at the given point."""


def normalized_projective(m: np.ndarray) -> np.ndarray:
    """Scale a matrix to a canonical representative of its projective class.

    Divides by the bottom-right entry when it carries weight; otherwise
    Frobenius-normalizes (the sign ambiguity left by that branch is handled
    by :func:`projective_distance`).
    """
    m = np.asarray(m, dtype=float)
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        raise GeometryError("the zero matrix has no projective class")
    if abs(m[3, 3]) > 1e-8 * scale:
        return m / m[3, 3]
    return m / float(np.linalg.norm(m))


def projective_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    """Entrywise gap between projective classes of two matrices."""
    a, b = normalized_projective(m1), normalized_projective(m2)
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))


def _context(
    group: PuncturedTorusGroup,
    multicurve: WeightedMulticurve,
    base_point: np.ndarray,
    sign: float,
    t: float,
) -> BendingContext:
    # Signed angles t * a: the anti-de Sitter side (t < 0) bends the other
    # way, which is what makes its rescaled limit agree with the hyperbolic
    # side's.
    return BendingContext(
        group=group,
        multicurve=multicurve,
        base_point=base_point,
        tag=HYP if t > 0 else ADS,
        sign=sign if t > 0 else -sign,
        scale=abs(t),
    )


def _checked_grid(grid) -> tuple[float, ...]:
    ts = tuple(float(t) for t in grid)
    if any(t == 0.0 for t in ts):
        raise GeometryError("grid values must be nonzero")
    if len(set(ts)) != len(ts):
        raise GeometryError("grid values must be distinct")
    return tuple(sorted(ts, key=lambda t: (abs(t), t)))


@dataclass(frozen=True, eq=False)
class TransitionFamily:
    """Rescaled holonomy matrices of one word over a signed t-grid.

    Entry i is rescale_conjugate(t_i, rho_{t_i}(word)) where rho_t bends by
    |t| times the weights, in the hyperbolic model for t_i > 0 and the
    anti-de Sitter model for t_i < 0.  The grid is sorted by |t|.
    """

    word: str
    grid: tuple[float, ...]
    matrices: tuple[np.ndarray, ...]

    @property
    def sides(self) -> tuple[Geometry, ...]:
        return tuple(HYP if t > 0 else ADS for t in self.grid)

    def side(self, positive: bool) -> list[tuple[float, np.ndarray]]:
        """(t, matrix) pairs of one side, ordered by increasing |t|."""
        return [(t, m) for t, m in zip(self.grid, self.matrices) if (t > 0) == positive]


def holonomy_family(
    group: PuncturedTorusGroup,
    multicurve: WeightedMulticurve,
    sign: float,
    word: str,
    base_point=DEFAULT_BASE_POINT,
    grid=DEFAULT_GRID,
) -> TransitionFamily:
    """Rescaled bent-holonomy family of a word over the signed grid.

    For each grid value t the word's bent holonomy is computed with weights
    scaled by |t| (hyperbolic for t > 0, anti-de Sitter for t < 0) and
    conjugated by the rescaling diag(1,1,1,1/|t|).
    """
    ts = _checked_grid(grid)
    base = np.asarray(base_point, dtype=float).reshape(2)
    matrices = []
    for t in ts:
        rho = bent_holonomy(_context(group, multicurve, base, sign, t))
        matrices.append(rescale_conjugate(t, rho(word)))
    return TransitionFamily(word=word, grid=ts, matrices=tuple(matrices))


def richardson_limit(samples, order: float = 1.0) -> np.ndarray:
    """Richardson extrapolation of a matrix family at t -> 0.

    ``samples`` is a sequence of (t, matrix) pairs; the two of smallest |t|
    cancel the leading error term of the given order p:
    (|t2|^p m(t1) - |t1|^p m(t2)) / (|t2|^p - |t1|^p).  The default p = 1
    handles generic families; pass the fitted order when it is known to be
    higher (rescaled families are often even in t).
    """
    pairs = sorted(((float(t), np.asarray(m, dtype=float)) for t, m in samples), key=lambda p: abs(p[0]))
    if len(pairs) < 2:
        raise InsufficientGridError("Richardson extrapolation needs at least two samples")
    if order <= 0.0:
        raise GeometryError("the error order must be positive")
    (t1, m1), (t2, m2) = pairs[0], pairs[1]
    w1, w2 = abs(t1) ** order, abs(t2) ** order
    return (w2 * m1 - w1 * m2) / (w2 - w1)


def _fit_order(ts: np.ndarray, residuals: np.ndarray) -> float:
    live = residuals > EPS_RESIDUAL_FLOOR
    if np.count_nonzero(live) < 2:
        return math.inf
    slope = np.polyfit(np.log(ts[live]), np.log(residuals[live]), 1)[0]
    return float(slope)


def _difference_order(samples) -> float:
    # Leading error order measured from consecutive differences (each is
    # dominated by its larger-|t| member), clamped to a safe Richardson range.
    diffs, scales = [], []
    for (_, ma), (tb, mb) in zip(samples, samples[1:]):
        diffs.append(projective_distance(ma, mb))
        scales.append(abs(tb))
    estimates = []
    for i in range(len(diffs) - 1):
        if min(diffs[i], diffs[i + 1]) <= EPS_RESIDUAL_FLOOR:
            continue
        estimates.append(
            math.log(diffs[i + 1] / diffs[i]) / math.log(scales[i + 1] / scales[i])
        )
    if not estimates:
        return 1.0
    order = float(min(max(np.median(estimates), 0.5), 4.0))
    # leading orders are integers for these families; snap when close so the
    # Richardson weights cancel the leading term exactly
    if abs(order - round(order)) < 0.2 and round(order) >= 1:
        order = float(round(order))
    return order


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Extrapolated limit of a transition family with residual diagnostics.

    The residuals measure each grid matrix against its own side's Richardson
    limit in the projective metric; orders are log-log slopes of residual
    against |t| (infinite for families converged to rounding).  The headline
    limit averages the two one-sided limits after projective normalization.
    """

    word: str
    grid: tuple[float, ...]
    residuals: tuple[float, ...]
    limit: np.ndarray
    limit_positive: np.ndarray
    limit_negative: np.ndarray
    order_positive: float
    order_negative: float
    two_sided_gap: float
    trace_gap: float

    def to_json_dict(self) -> dict:
        return {
            "word": self.word,
            "grid": list(self.grid),
            "residuals": list(self.residuals),
            "order_pos": self.order_positive,
            "order_neg": self.order_negative,
            "two_sided_gap": self.two_sided_gap,
        }


def extrapolate_limit(family: TransitionFamily) -> ConvergenceReport:
    """Measured-order Richardson limits per side with order and gap diagnostics."""
    sides = {}
    for positive in (True, False):
        samples = family.side(positive)
        if len(samples) < 3:
            raise InsufficientGridError("need at least three grid points per side")
        sides[positive] = richardson_limit(samples, order=_difference_order(samples))
    limit_pos, limit_neg = sides[True], sides[False]
    residuals = []
    orders = {}
    for positive in (True, False):
        samples = family.side(positive)
        ts = np.array([abs(t) for t, _ in samples])
        res = np.array([projective_distance(m, sides[positive]) for _, m in samples])
        orders[positive] = _fit_order(ts, res)
        residuals.extend(zip((t for t, _ in samples), res))
    residuals.sort(key=lambda pair: (abs(pair[0]), pair[0]))
    a, b = normalized_projective(limit_pos), normalized_projective(limit_neg)
    if float(np.sum(a * b)) < 0.0:
        b = -b
    gap = projective_distance(limit_pos, limit_neg)
    trace_gap = max(
        abs(float(np.trace(a) - np.trace(b))),
        abs(float(np.trace(a[:3, :3]) - np.trace(b[:3, :3]))),
    )
    return ConvergenceReport(
        word=family.word,
        grid=tuple(t for t, _ in residuals),
        residuals=tuple(float(r) for _, r in residuals),
        limit=0.5 * (a + b),
        limit_positive=limit_pos,
        limit_negative=limit_neg,
        order_positive=orders[True],
        order_negative=orders[False],
        two_sided_gap=gap,
        trace_gap=trace_gap,
    )


def direct_hp_matrix(
    group: PuncturedTorusGroup,
    multicurve: WeightedMulticurve,
    sign: float,
    word: str,
    base_point=DEFAULT_BASE_POINT,
) -> np.ndarray:
    """The word's holonomy in the half-pipe model at full weights."""
    base = np.asarray(base_point, dtype=float).reshape(2)
    ctx = BendingContext(
        group=group, multicurve=multicurve, base_point=base, tag=HP, sign=sign, scale=1.0
    )
    return bent_holonomy(ctx)(word).matrix


@dataclass(frozen=True, eq=False)
class PleatedConvergenceReport:
    """Chart residuals of rescaled bent surfaces against the half-pipe graph."""

    grid: tuple[float, ...]
    max_residuals: tuple[float, ...]
    order_positive: float
    order_negative: float

    def to_json_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "max_residuals": list(self.max_residuals),
            "order_pos": self.order_positive,
            "order_neg": self.order_negative,
        }


def pleated_surface_convergence(
    group: PuncturedTorusGroup,
    multicurve: WeightedMulticurve,
    sign: float,
    samples,
    base_point=DEFAULT_BASE_POINT,
    grid=DEFAULT_GRID,
) -> PleatedConvergenceReport:
    """Uniform-on-samples convergence of rescaled bent surfaces.

    For each grid value t, develops every sample point onto the surface bent
    by |t| times the weights, rescales by diag(1,1,1,1/|t|), and measures the
    affine-chart distance to the half-pipe surface bent at full weights.
    Reports the per-t maxima and the log-log order on each side.
    """
    ts = _checked_grid(grid)
    base = np.asarray(base_point, dtype=float).reshape(2)
    points = [np.asarray(z, dtype=float).reshape(2) for z in samples]
    hp_ctx = BendingContext(
        group=group, multicurve=multicurve, base_point=base, tag=HP, sign=sign, scale=1.0
    )
    targets = [bending_map(hp_ctx, z).affine_chart() for z in points]
    maxima = []
    for t in ts:
        ctx = _context(group, multicurve, base, sign, t)
        tau = rescaling_matrix(t)
        worst = 0.0
        for z, target in zip(points, targets):
            vec = tau @ bending_map(ctx, z).vec
            chart = vec[1:] / vec[0]
            worst = max(worst, float(np.max(np.abs(chart - target))))
        maxima.append(worst)
    def side_order(positive: bool) -> float:
        pairs = [(abs(t), r) for t, r in zip(ts, maxima) if (t > 0) == positive]
        if len(pairs) < 2:
            return math.nan
        arr = np.array(pairs)
        return _fit_order(arr[:, 0], arr[:, 1])
    return PleatedConvergenceReport(
        grid=ts,
        max_residuals=tuple(maxima),
        order_positive=side_order(True),
        order_negative=side_order(False),
    )


def width_bound(norm: float) -> float:
    """Closed-form width bound arctan(sinh(norm / 2)) of a convex core."""
    if norm < 0.0:
        raise GeometryError("the norm argument must be nonnegative")
    return math.atan(math.sinh(0.5 * norm))


def width_linear_bound(t: float, coefficient: float) -> float:
    """First-order width bound coefficient * |t| for small parameters."""
    if coefficient < 0.0:
        raise GeometryError("the coefficient must be nonnegative")
    return coefficient * abs(t)


def ideal_geodesic_point(x: ProjectivePoint, v: np.ndarray, d: float) -> ProjectivePoint:
    """Arc-length point cosh(d) x + sinh(d) v on the geodesic toward v.

    The representative of x must satisfy q(x) = -1 and v must be a unit
    tangent at x (q(v) = +1, orthogonal to x), so the curve is the unit-speed
    geodesic leaving x in the direction v.
    """
    tag = x.geometry
    lift = x.unit_lift()
    v = np.asarray(v, dtype=float).reshape(4)
    if abs(float(form_eval(tag, v)) - 1.0) > 1e-8:
        raise BadTangentError("direction must be a unit spacelike vector")
    if abs(float(form_dot(tag, lift, v))) > 1e-8:
        raise BadTangentError("direction must be tangent at the basepoint")
    return ProjectivePoint(math.cosh(d) * lift + math.sinh(d) * v, tag)


@dataclass(frozen=True, eq=False)
class LimitCheckReport:
    """Residuals of a rescaled matrix family against a declared limit."""

    grid: tuple[float, ...]
    residuals: tuple[float, ...]
    order: float

    def to_json_dict(self) -> dict:
        return {"grid": list(self.grid), "residuals": list(self.residuals), "order": self.order}


def reflection_limit_check(plane_family, limit_plane: Plane, grid=None) -> LimitCheckReport:
    """Convergence of rescaled reflections toward a half-pipe reflection.

    ``plane_family`` maps a nonzero grid value t to the Plane reflected in at
    parameter t; the report measures rescale_conjugate(t, reflection(P_t))
    against reflection in the half-pipe limit plane, entrywise.
    """
    if limit_plane.geometry is not HP:
        raise GeometryError("the limit plane must be a half-pipe plane")
    ts = _checked_grid(grid if grid is not None else [t for t in DEFAULT_GRID if t > 0])
    target = reflection(limit_plane).matrix
    residuals = []
    for t in ts:
        plane = plane_family(t)
        m = rescale_conjugate(t, reflection(plane))
        residuals.append(float(np.max(np.abs(m - target))))
    order = _fit_order(np.abs(np.array(ts)), np.array(residuals))
    return LimitCheckReport(grid=ts, residuals=tuple(residuals), order=order)
