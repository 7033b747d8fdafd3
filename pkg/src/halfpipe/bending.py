"""Bending cocycles, bent holonomies, and half-pipe support functions.

Bending deforms the totally geodesic surface {x3 = 0} along the leaves of a
lifted weighted multicurve: crossing a leaf of weight a rotates the ambient
space about that leaf by the angle (sign * scale * a).  The ordered product
of these rotations along an arc is the bending cocycle; composing it with
the Fuchsian holonomy produces the bent holonomy representation, and
applying it to embedded disk points develops the bent (pleated) surface.

In the half-pipe model every bending rotation is a Minkowski translation, so
the bent surface is the graph of a piecewise-affine height function over the
disk; for positive bending that function is concave, vanishes on the face of
the basepoint, and the affine pieces are the support planes of the surface.
The developing map of a pair of oppositely bent half-pipe surfaces with a
common linear holonomy interpolates the two heights affinely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from halfpipe.fuchsian import (
    EndpointOnLeafError,
    LeafCrossing,
    PuncturedTorusGroup,
    WeightedMulticurve,
    free_reduce,
    invert_word,
    leaves_crossing,
)
from halfpipe.geometry import (
    HP,
    J3,
    Geometry,
    GeometryError,
    OutsideModelError,
    Plane,
    ProjectivePoint,
    TagMismatchError,
    disk_lift,
    embed_h2_point,
    klein_hp,
    klein_hp_inverse,
    minkowski_dot,
)
from halfpipe.isometry import Isometry, embed_h2_isometry, rotation

# Inward pullback (as a fraction of the chord) used to evaluate a bending
# cocycle at a point lying on a leaf from the basepoint side.
PULLBACK = 1e-6

# Largest deviation of an aligner's linear part from the identity.
EPS_ALIGNER = 1e-8


class BadAlignerError(GeometryError):
    """The aligning isometry is not a pure half-pipe translation."""


def _act_disk(m: np.ndarray, z: np.ndarray) -> np.ndarray:
    w = m @ disk_lift(z)
    return w[1:] / w[0]


@dataclass(frozen=True, eq=False)
class BendingContext:
    """Everything needed to bend the flat surface along one multicurve.

    The basepoint must be off every leaf; the effective bending angle about a
    crossed leaf of weight ``a`` is ``sign * scale * a``.  Contexts are
    immutable; reuse them across queries so crossing data is shared.

    Parameters
    ----------
    group : PuncturedTorusGroup
        The Fuchsian holonomy of the surface.
    multicurve : WeightedMulticurve
        The bending locus with its weights.
    base_point : array of shape (2,)
        Disk coordinates of the basepoint x0.
    tag : Geometry
        Which of the three models the bending lives in.
    sign : float
        +1.0 for positive bending, -1.0 for negative bending.
    scale : float
        Uniform multiplier on all weights (the transition parameter).
    """

    group: PuncturedTorusGroup
    multicurve: WeightedMulticurve
    base_point: np.ndarray
    tag: Geometry
    sign: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        z = np.array(self.base_point, dtype=float).reshape(2)
        if float(z @ z) >= 1.0:
            raise OutsideModelError("the basepoint must lie in the open disk")
        z.flags.writeable = False
        object.__setattr__(self, "base_point", z)
        if self.sign not in (1.0, -1.0):
            raise GeometryError("sign must be +1.0 or -1.0")
        if not math.isfinite(self.scale):
            raise GeometryError("scale must be finite")

    def angle(self, crossing: LeafCrossing) -> float:
        return self.sign * self.scale * crossing.weight

    def rescaled(self, scale: float) -> "BendingContext":
        return BendingContext(self.group, self.multicurve, self.base_point, self.tag, self.sign, scale)

    def with_geometry(self, tag: Geometry) -> "BendingContext":
        return BendingContext(self.group, self.multicurve, self.base_point, tag, self.sign, self.scale)


def _bracketed_product(ctx: BendingContext, x: np.ndarray, y: np.ndarray, closing_word: str) -> Isometry:
    """The cocycle along [x, y] times the unbent holonomy of closing_word.

    Rotations about far leaves have matrix entries of size exp(2 distance),
    so multiplying them directly squanders precision on cancellations.  Each
    factor is a group conjugate of a rotation about a component axis, so the
    product telescopes into base-axis rotations joined by the holonomies of
    the relative conjugator words; every factor stays moderate when the
    closing word matches the far end of the segment, and the rounding error
    stays on the scale of the answer.
    """
    out = Isometry.identity(ctx.tag)
    previous = ""
    for crossing in leaves_crossing(ctx.group, ctx.multicurve, x, y):
        ang = ctx.angle(crossing)
        if ang == 0.0:
            continue
        word = crossing.conjugator_word
        axis = ctx.group.axis(ctx.multicurve.components[crossing.component_index].word)
        pushed = ctx.group.lorentz(word) @ axis.normal
        if float(pushed @ crossing.leaf.normal) < 0.0:
            ang = -ang
        step = free_reduce(invert_word(previous) + word)
        if step:
            out = out @ sigma_embed(ctx, step)
        out = out @ rotation(ctx.tag, axis, ang)
        previous = word
    closing = free_reduce(invert_word(previous) + closing_word)
    if closing:
        out = out @ sigma_embed(ctx, closing)
    return out


def bending_cocycle(ctx: BendingContext, x: np.ndarray, y: np.ndarray) -> Isometry:
    """Ordered product of leaf rotations along the segment from x to y.

    The factor nearest x is leftmost; each rotation turns about the crossed
    leaf oriented away from x, by the context's signed, scaled weight.
    Raises EndpointOnLeafError when an endpoint lies on a leaf.
    """
    return _bracketed_product(ctx, x, y, "")


def sigma_embed(ctx: BendingContext, word: str) -> Isometry:
    """The unbent holonomy of a word, acting in the plane {x3 = 0}."""
    return embed_h2_isometry(ctx.tag, ctx.group.lorentz(word))


@dataclass(frozen=True, eq=False)
class BentHolonomy:
    """The representation  word -> B(x0, word . x0) . sigma(word)."""

    context: BendingContext

    def __call__(self, word: str) -> Isometry:
        ctx = self.context
        target = _act_disk(ctx.group.lorentz(word), ctx.base_point)
        return _bracketed_product(ctx, ctx.base_point, target, word)


def bent_holonomy(ctx: BendingContext) -> BentHolonomy:
    """The bent holonomy representation of the context."""
    return BentHolonomy(ctx)


def _cocycle_from_base(ctx: BendingContext, x: np.ndarray) -> Isometry:
    """B(x0, x), evaluating on-leaf points as the limit from the x0 side."""
    try:
        return bending_cocycle(ctx, ctx.base_point, x)
    except EndpointOnLeafError:
        inner = ctx.base_point + (1.0 - PULLBACK) * (x - ctx.base_point)
        return bending_cocycle(ctx, ctx.base_point, inner)


def bending_map(ctx: BendingContext, x: np.ndarray) -> ProjectivePoint:
    """Develop the disk point x onto the bent surface.

    Applies the bending cocycle from the basepoint to the canonical embedding
    of x in {x3 = 0}.  A point on a leaf is developed with the cocycle of the
    basepoint side, which is one of the two one-sided limits.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    return _cocycle_from_base(ctx, x).apply(embed_h2_point(ctx.tag, x))


def psi_lambda(ctx: BendingContext, z: np.ndarray) -> float:
    """Height of the bent half-pipe surface over the disk point z.

    The sum of ``-(sign * scale * weight) * <eta, (1, z)>`` over the leaves
    crossed by the segment from the basepoint, with each leaf normal eta
    oriented away from the basepoint.  Piecewise affine; concave, nonpositive
    and vanishing on the basepoint's face when the sign is positive.
    """
    if ctx.tag is not HP:
        raise TagMismatchError("the bent-surface height function lives in the half-pipe model")
    z = np.asarray(z, dtype=float).reshape(2)
    lift = np.array([1.0, z[0], z[1]])
    total = 0.0
    for crossing in leaves_crossing(ctx.group, ctx.multicurve, ctx.base_point, z):
        total -= ctx.angle(crossing) * float(minkowski_dot(crossing.leaf.normal, lift))
    return total


def support_plane_at(ctx: BendingContext, x: np.ndarray) -> Plane:
    """The totally geodesic plane carrying the face of the bent surface at x.

    The image of {x3 = 0} under the bending cocycle from the basepoint; the
    bent surface touches it along x's face and stays on one side of it.
    Raises EndpointOnLeafError when x lies on a leaf (two faces meet there).
    """
    x = np.asarray(x, dtype=float).reshape(2)
    return bending_cocycle(ctx, ctx.base_point, x).apply_plane(Plane.base_plane(ctx.tag))


def _check_surface_pair(upper: BendingContext, lower: BendingContext) -> None:
    if upper.tag is not HP or lower.tag is not HP:
        raise TagMismatchError("surface pairs interpolate in the half-pipe model")
    if not (upper.sign > 0.0 > lower.sign):
        raise GeometryError("expected a positively bent upper and a negatively bent lower context")
    if upper.group.cache_key() != lower.group.cache_key():
        raise GeometryError("the two contexts must share the holonomy group")
    if not np.array_equal(upper.base_point, lower.base_point):
        raise GeometryError("the two contexts must share the basepoint")


def fit_aligner(
    upper: BendingContext,
    lower: BendingContext,
    points: np.ndarray | None = None,
) -> Isometry:
    """Fit the vertical translation carrying the lower surface under the upper.

    Solves the three-parameter least-squares problem matching the two height
    functions on sample points, then shifts the time coordinate so the lower
    surface lies weakly below the upper with the sampled gap infimum zero.
    When the shared group sits at the critical point of the combined length
    function of the two multicurves, the fit residual vanishes and the two
    bent holonomies agree after conjugation by the result.
    """
    _check_surface_pair(upper, lower)
    if points is None:
        rng = np.random.default_rng(7)
        radii = 0.72 * np.sqrt(rng.uniform(0.05, 1.0, size=64))
        angles = rng.uniform(0.0, 2.0 * math.pi, size=64)
        points = np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    gaps = np.array([psi_lambda(upper, z) - psi_lambda(lower, z) for z in points])
    design = np.column_stack((-np.ones(len(points)), points))
    shift, *_ = np.linalg.lstsq(design, gaps, rcond=None)
    shift[0] -= np.min(gaps - design @ shift)
    out = np.eye(4)
    out[3, :3] = J3 @ shift
    return Isometry(out, HP)


def hp_developing_map(
    upper: BendingContext,
    lower: BendingContext,
    aligner: Isometry,
    x: np.ndarray,
    s: float,
) -> ProjectivePoint:
    """Affine interpolation between the two bent half-pipe surfaces.

    Returns the point over x whose height is ``s`` times the upper surface
    height plus ``1 - s`` times the aligned lower surface height; s = 1 gives
    the upper bending map and s = 0 the aligned lower one.
    """
    _check_surface_pair(upper, lower)
    if aligner.geometry is not HP or aligner.matrix[3, 3] <= 0.0:
        raise BadAlignerError("the aligner must be an orientation-preserving half-pipe isometry")
    if np.max(np.abs(aligner.matrix[:3, :3] - np.eye(3))) > EPS_ALIGNER:
        raise BadAlignerError("the aligner must have identity linear part")
    if not 0.0 <= s <= 1.0:
        raise GeometryError("the interpolation parameter must lie in [0, 1]")
    x = np.asarray(x, dtype=float).reshape(2)
    _, h_upper = klein_hp(bending_map(upper, x))
    _, h_lower = klein_hp(aligner.apply(bending_map(lower, x)))
    return klein_hp_inverse(x, s * h_upper + (1.0 - s) * h_lower)
