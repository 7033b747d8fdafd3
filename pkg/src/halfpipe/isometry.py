"""Isometries of the three projective models and their rescaled limits.

Hyperbolic and anti-de Sitter isometries are 4x4 matrices preserving the
bilinear form diag(-1,1,1,s); half-pipe isometries are block lower-triangular

    [[A, 0],
     [w, eps]],       A in O(1,2) preserving x0 > 0,  eps = +-1,

equivalently pairs (A, v) acting on Minkowski R^{1,2} by y -> A y + v, with
w = (J3 v)^T A and eps = +1 for the orientation-preserving ones.  The
degeneration from the curved models to the half-pipe model is implemented by
conjugating with the fiber rescaling diag(1, 1, 1, 1/|t|) and letting
t -> 0.

Rotations about geodesics of the shared hyperbolic plane H2 = {x3 = 0} are
the basic building blocks of bending; their standard forms about the axis
{x2 = x3 = 0} (oriented toward increasing x1, left normal e2) act on the
(x2, x3) coordinates as

    hyperbolic       [[cos a,  sin a], [-sin a, cos a]]
    anti-de Sitter   [[cosh a, sinh a], [sinh a, cosh a]]
    half-pipe        [[1, 0], [-a, 1]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from halfpipe.geometry import (
    ADS,
    HP,
    HYP,
    J3,
    EPS_MEMBERSHIP,
    Geometry,
    GeometryError,
    NotSpacelikeError,
    Plane,
    ProjectivePoint,
    SpacelikeGeodesicH2,
    TagMismatchError,
    form_eval,
    minkowski_dot,
)

# Residual below which a matrix is accepted as a group element.
EPS_GROUP_MEMBER = 1e-8
# Residual target for invariance checks on composed words.
EPS_GROUP = 1e-11


class InvalidIsometryError(GeometryError):
    """A matrix fails the defining relations of the isometry group."""


class NotRotationAboutAxisError(GeometryError):
    """An isometry does not fix the requested axis pointwise."""


class PlaneTooFarError(GeometryError):
    """A plane is tilted too far from {x3 = 0} to be normalized onto it."""


def group_residual(matrix: np.ndarray, tag: Geometry) -> float:
    """Max-norm violation of the defining relations of Isom for this tag."""
    m = np.asarray(matrix, dtype=float)
    if tag is HP:
        a = m[:3, :3]
        res = np.max(np.abs(a.T @ J3 @ a - J3))
        res = max(res, float(np.max(np.abs(m[:3, 3]))))
        res = max(res, abs(abs(m[3, 3]) - 1.0))
        if a[0, 0] <= 0:
            res = max(res, 1.0)
        return float(res)
    j = tag.form_matrix
    return float(np.max(np.abs(m.T @ j @ m - j)))


@dataclass(frozen=True)
class Isometry:
    """A 4x4 projective isometry together with its geometry tag.

    The raw constructor trusts its input; use :meth:`from_matrix` to validate
    a matrix of unknown provenance.  All public builders in this module
    produce valid group elements by construction.
    """

    matrix: np.ndarray
    geometry: Geometry

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float).reshape(4, 4)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tag: Geometry, tol: float = EPS_GROUP_MEMBER) -> "Isometry":
        res = group_residual(matrix, tag)
        if res > tol:
            raise InvalidIsometryError(f"matrix violates the group relations (residual {res:.3e})")
        return cls(matrix, tag)

    @classmethod
    def identity(cls, tag: Geometry) -> "Isometry":
        return cls(np.eye(4), tag)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        if self.geometry is not other.geometry:
            raise TagMismatchError("cannot compose isometries of different geometries")
        return Isometry(self.matrix @ other.matrix, self.geometry)

    def inverse(self) -> "Isometry":
        """Group inverse, computed from the form relations (no linear solve)."""
        m = self.matrix
        if self.geometry is HP:
            a, w, eps = m[:3, :3], m[3, :3], m[3, 3]
            a_inv = J3 @ a.T @ J3
            out = np.zeros((4, 4))
            out[:3, :3] = a_inv
            out[3, :3] = -eps * (w @ a_inv)
            out[3, 3] = eps
            return Isometry(out, HP)
        j = self.geometry.form_matrix
        return Isometry(j @ m.T @ j, self.geometry)

    def apply_vec(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(vec, dtype=float)

    def apply(self, point: ProjectivePoint) -> ProjectivePoint:
        if point.geometry is not self.geometry:
            raise TagMismatchError("isometry and point live in different geometries")
        return ProjectivePoint(self.matrix @ point.vec, self.geometry)

    def apply_plane(self, plane: Plane) -> Plane:
        if plane.geometry is not self.geometry:
            raise TagMismatchError("isometry and plane live in different geometries")
        return Plane(self.inverse().matrix.T @ plane.covector, self.geometry)

    def group_residual(self) -> float:
        return group_residual(self.matrix, self.geometry)


def compose(*isoms: Isometry) -> Isometry:
    if not isoms:
        raise ValueError("compose needs at least one isometry")
    out = isoms[0]
    for g in isoms[1:]:
        out = out @ g
    return out


# ---------------------------------------------------------------------------
# H2 building blocks.
# ---------------------------------------------------------------------------


def boost_to_origin(u: np.ndarray) -> np.ndarray:
    """The SO0(1,2) matrix taking a unit timelike u (u0 > 0) to (1,0,0).

    Inverse of the symmetric boost e0 -> u; deterministic in u.
    """
    u = np.asarray(u, dtype=float).reshape(3)
    b = -u[1:]
    out = np.eye(3)
    out[0, 0] = u[0]
    out[0, 1:] = b
    out[1:, 0] = b
    out[1:, 1:] += np.outer(b, b) / (1.0 + u[0])
    return out


def boost_from_origin(u: np.ndarray) -> np.ndarray:
    """The SO0(1,2) matrix taking (1,0,0) to a unit timelike u (u0 > 0)."""
    flipped = boost_to_origin(u)
    flipped[0, 1:] *= -1.0
    flipped[1:, 0] *= -1.0
    return flipped


def h2_rotation(angle: float) -> np.ndarray:
    """Rotation of H2 about (1,0,0), acting on (x1, x2)."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def embed_h2_isometry(tag: Geometry, a: np.ndarray) -> Isometry:
    """block-diag(A, 1): the copy of Isom(H2) fixing the fiber direction."""
    out = np.eye(4)
    out[:3, :3] = np.asarray(a, dtype=float)
    return Isometry(out, tag)


def transport_to_standard_axis(axis: SpacelikeGeodesicH2) -> np.ndarray:
    """The SO0(1,2) matrix carrying an oriented geodesic to the standard axis.

    Maps the geodesic's closest-to-origin point, travel direction and left
    normal onto (1,0,0), (0,1,0) and (0,0,1) respectively, so the oriented
    axis lands on {x2 = 0} traveled toward increasing x1.
    """
    p = axis.closest_point_to_origin()
    v = axis.tangent_at(p)
    frame = np.column_stack((p, v, axis.normal))
    # frame is in SO0(1,2); its form-inverse undoes it.
    return J3 @ frame.T @ J3


def standard_rotation(tag: Geometry, angle: float) -> Isometry:
    """Rotation of the given angle about the standard axis {x2 = x3 = 0}."""
    out = np.eye(4)
    if tag is HYP:
        c, s = math.cos(angle), math.sin(angle)
        out[2:, 2:] = [[c, s], [-s, c]]
    elif tag is ADS:
        c, s = math.cosh(angle), math.sinh(angle)
        out[2:, 2:] = [[c, s], [s, c]]
    else:
        out[3, 2] = -angle
    return Isometry(out, tag)


def rotation(tag: Geometry, axis: SpacelikeGeodesicH2, angle: float) -> Isometry:
    """Rotation of the given angle about an oriented geodesic of H2.

    Transport the axis to standard position, apply the standard rotation,
    transport back.  Hyperbolic angles are taken mod 2*pi into [-pi, pi).
    """
    if tag is HYP:
        angle = math.remainder(angle, 2.0 * math.pi)
        if angle == math.pi:
            angle = -math.pi
    phi = embed_h2_isometry(tag, transport_to_standard_axis(axis))
    return phi.inverse() @ standard_rotation(tag, angle) @ phi


def rotation_angle(g: Isometry, axis: SpacelikeGeodesicH2, tol: float = 1e-8) -> float:
    """The rotation angle of an isometry about a given oriented axis.

    Raises
    ------
    NotRotationAboutAxisError
        If the isometry does not fix the axis pointwise (block structure in
        standard position off by more than ``tol``).
    """
    phi = embed_h2_isometry(g.geometry, transport_to_standard_axis(axis))
    m = (phi @ g @ phi.inverse()).matrix
    block_defect = max(
        float(np.max(np.abs(m[:2, :2] - np.eye(2)))),
        float(np.max(np.abs(m[:2, 2:]))),
        float(np.max(np.abs(m[2:, :2]))),
    )
    if block_defect > tol:
        raise NotRotationAboutAxisError(f"isometry moves the axis (defect {block_defect:.3e})")
    b = m[2:, 2:]
    tag = g.geometry
    if tag is HYP:
        angle = math.atan2(b[0, 1], b[0, 0])
        return -math.pi if angle == math.pi else angle
    if tag is ADS:
        angle = math.asinh(b[0, 1])
        if abs(b[0, 0] - math.cosh(angle)) > tol or abs(b[1, 0] - b[0, 1]) > tol:
            raise NotRotationAboutAxisError("transversal block is not an anti-de Sitter rotation")
        return angle
    if abs(b[0, 0] - 1.0) > tol or abs(b[1, 1] - 1.0) > tol or abs(b[0, 1]) > tol:
        raise NotRotationAboutAxisError("transversal block is not a half-pipe rotation")
    return -b[1, 0]


# ---------------------------------------------------------------------------
# Reflections.
# ---------------------------------------------------------------------------


def reflection(plane: Plane) -> Isometry:
    """Reflection along a spacelike plane.

    Hyperbolic/anti-de Sitter: Id - 2 (J n)(J n)^T J / q(n) evaluated on the
    unit normal, which fixes the plane pointwise and squares to the identity.
    Half-pipe: the plane dual to y reflects fiber coordinates through the
    plane's affine graph, with matrix [[Id, 0], [2 (J3 y)^T, -1]].  Degenerate
    half-pipe planes (containing a fiber) admit a one-parameter family of
    reflections and are refused.
    """
    tag = plane.geometry
    if tag is HP:
        y = plane.hp_dual_point()  # raises DegeneratePlaneError when vertical
        out = np.eye(4)
        out[3, 3] = -1.0
        out[3, :3] = 2.0 * (J3 @ y)
        return Isometry(out, HP)
    if not plane.is_spacelike():
        raise NotSpacelikeError("reflections are implemented along spacelike planes only")
    n = plane.unit_normal()
    q = float(form_eval(tag, n))  # +1 (Hyp) or -1 (AdS spacelike)
    j = tag.form_matrix
    u = j @ n  # unit covector of the plane, same form value as n
    out = np.eye(4) - (2.0 / q) * j @ np.outer(u, u)
    return Isometry(out, tag)


# ---------------------------------------------------------------------------
# Rescaling toward the half-pipe model.
# ---------------------------------------------------------------------------


def rescaling_matrix(t: float) -> np.ndarray:
    """diag(1, 1, 1, 1/|t|): blows up the fiber direction as t -> 0."""
    if t == 0:
        raise GeometryError("rescaling is only defined for t != 0")
    return np.diag([1.0, 1.0, 1.0, 1.0 / abs(t)])


def rescale_conjugate(t: float, g: Isometry | np.ndarray) -> np.ndarray:
    """The raw matrix tau_t m tau_t^{-1} (row 3 divided, column 3 multiplied by |t|).

    The result is generally not a group element of any fixed tag, which is
    why it is returned as a plain matrix; families of such conjugates
    converge entrywise to half-pipe isometries.
    """
    m = g.matrix if isinstance(g, Isometry) else np.asarray(g, dtype=float)
    out = np.array(m, dtype=float)
    out[3, :] /= abs(t)
    out[:, 3] *= abs(t)
    return out


# ---------------------------------------------------------------------------
# The Minkowski model of half-pipe isometries.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinkowskiIsometry:
    """An affine isometry y -> A y + v of Minkowski R^{1,2}, A in O0(1,2)."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.linear, dtype=float).reshape(3, 3)
        v = np.array(self.translation, dtype=float).reshape(3)
        if float(np.max(np.abs(a.T @ J3 @ a - J3))) > EPS_GROUP_MEMBER or a[0, 0] <= 0:
            raise InvalidIsometryError("linear part must preserve the Minkowski form and time orientation")
        a.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "translation", v)

    @classmethod
    def identity(cls) -> "MinkowskiIsometry":
        return cls(np.eye(3), np.zeros(3))

    def __matmul__(self, other: "MinkowskiIsometry") -> "MinkowskiIsometry":
        return MinkowskiIsometry(self.linear @ other.linear, self.translation + self.linear @ other.translation)

    def inverse(self) -> "MinkowskiIsometry":
        a_inv = J3 @ self.linear.T @ J3
        return MinkowskiIsometry(a_inv, -(a_inv @ self.translation))

    def apply(self, y: np.ndarray) -> np.ndarray:
        return self.linear @ np.asarray(y, dtype=float) + self.translation


def minkowski_to_hp(iso: MinkowskiIsometry) -> Isometry:
    """The half-pipe isometry [[A, 0], [(J3 v)^T A, 1]] matching the duality.

    Under the duality between half-pipe points and affine Minkowski planes,
    this element acts on dual planes exactly as (A, v) acts on R^{1,2}.
    """
    out = np.eye(4)
    out[:3, :3] = iso.linear
    out[3, :3] = (J3 @ iso.translation) @ iso.linear
    return Isometry(out, HP)


def hp_to_minkowski(g: Isometry) -> MinkowskiIsometry:
    """Inverse of :func:`minkowski_to_hp` (orientation-preserving input)."""
    if g.geometry is not HP:
        raise TagMismatchError("expected a half-pipe isometry")
    m = g.matrix
    if m[3, 3] < 0:
        raise InvalidIsometryError("fiber-reversing half-pipe isometries have no affine Minkowski form")
    a, w = m[:3, :3], m[3, :3]
    return MinkowskiIsometry(a, a @ (J3 @ w))


def hp_klein_action(g: Isometry, z: np.ndarray, h: float) -> tuple[np.ndarray, float]:
    """Action of a half-pipe isometry in the Klein chart (z, h)."""
    if g.geometry is not HP:
        raise TagMismatchError("expected a half-pipe isometry")
    w = g.matrix @ np.concatenate(([1.0], np.asarray(z, dtype=float).reshape(2), [float(h)]))
    if w[0] <= 0:
        raise GeometryError("image left the affine chart")
    return w[1:3] / w[0], float(w[3] / w[0])


# ---------------------------------------------------------------------------
# Normalizing a (point, plane) pair onto the hyperbolic plane {x3 = 0}.
# ---------------------------------------------------------------------------


def _vertical_translation(tag: Geometry, x3: float) -> Isometry:
    """Group element moving (c, 0, 0, x3) on the unit quadric to (1,0,0,0).

    The (x0, x3) block is a boost (Hyp), a circular rotation (AdS, where the
    form restricts negative definite), or a shear (HP).
    """
    out = np.eye(4)
    if tag is HYP:
        c, s = math.sqrt(1.0 + x3 * x3), x3
        out[0, 0] = out[3, 3] = c
        out[0, 3] = out[3, 0] = -s
    elif tag is ADS:
        if abs(x3) >= 1.0:
            raise PlaneTooFarError("point is too far from {x3 = 0} for this chart")
        c, s = math.sqrt(1.0 - x3 * x3), x3
        out[0, 0] = out[3, 3] = c
        out[0, 3] = s
        out[3, 0] = -s
    else:
        out[3, 0] = -x3
    return Isometry(out, tag)


def normalize_plane_point(
    point: ProjectivePoint,
    plane: Plane,
    target: np.ndarray | None = None,
    max_angle: float = math.pi / 4,
) -> Isometry:
    """Carry a point on a nearly horizontal plane to H2 and the plane onto H2.

    Returns the composition of (1) an H2 move bringing the point over the
    origin, (2) a vertical translation dropping it onto H2, (3) an H2
    rotation aligning the plane's trace on H2 with the standard axis, (4) a
    rotation about the standard axis through the dihedral angle, and (5) an
    H2 move carrying the origin to ``target`` (identity for the default
    origin target).  The result maps ``point`` to the embedded target and
    ``plane`` to {x3 = 0}.

    Raises
    ------
    PlaneTooFarError
        If the dihedral angle against {x3 = 0} exceeds ``max_angle`` (or the
        configuration leaves the admissible chart).
    GeometryError
        If the point is not on the plane.
    """
    tag = point.geometry
    if plane.geometry is not tag:
        raise TagMismatchError("point and plane live in different geometries")
    if not plane.contains_point(point, tol=1e-8):
        raise GeometryError("normalize_plane_point requires the point to lie on the plane")

    lift = point.unit_lift()
    head = lift[:3]
    q_head = float(minkowski_dot(head, head))
    if q_head >= -EPS_MEMBERSHIP:
        raise PlaneTooFarError("point projects outside the hyperbolic plane")
    b1 = embed_h2_isometry(tag, boost_to_origin(head / math.sqrt(-q_head)))

    moved = b1.apply_vec(lift)
    b2 = _vertical_translation(tag, float(moved[3]))
    step12 = b2 @ b1

    u = step12.apply_plane(plane).covector
    trace_dir = np.array([u[1], u[2]])
    norm_trace = float(np.hypot(*trace_dir))
    if norm_trace > 1e-12:
        # Rotate the trace line's normal (u1, u2) onto (0, 1).
        delta = math.pi / 2.0 - math.atan2(trace_dir[1], trace_dir[0])
        b3 = embed_h2_isometry(tag, h2_rotation(delta))
        u = b3.apply_plane(Plane(u, tag)).covector
    else:
        b3 = Isometry.identity(tag)

    u2, u3 = float(u[2]), float(u[3])
    if abs(u3) < 1e-12:
        raise PlaneTooFarError("plane is vertical; no rotation brings it to {x3 = 0}")
    if tag is HYP:
        dihedral = -math.atan2(u2, u3)
    elif tag is ADS:
        if abs(u2) >= abs(u3):
            raise PlaneTooFarError("plane is not spacelike-tiltable onto {x3 = 0}")
        dihedral = math.atanh(u2 / u3)
    else:
        dihedral = -u2 / u3
    if abs(dihedral) > max_angle:
        raise PlaneTooFarError(f"dihedral angle {abs(dihedral):.3f} exceeds {max_angle:.3f}")
    b4 = standard_rotation(tag, dihedral)

    out = b4 @ b3 @ step12
    if target is not None:
        z = np.asarray(target, dtype=float).reshape(2)
        r2 = float(z @ z)
        if r2 >= 1.0:
            raise GeometryError("target must be a Klein disk point")
        target_lift = np.concatenate(([1.0], z)) / math.sqrt(1.0 - r2)
        out = embed_h2_isometry(tag, boost_from_origin(target_lift)) @ out
    return out


# ---------------------------------------------------------------------------
# Classification.
# ---------------------------------------------------------------------------


def _classify_linear_so12(a: np.ndarray, parabolic_tol: float) -> str:
    tr = float(np.trace(a))
    if float(np.max(np.abs(a - np.eye(3)))) < parabolic_tol:
        return "other"
    if abs(tr - 3.0) <= parabolic_tol:
        return "parabolic"
    return "elliptic" if tr < 3.0 else "hyperbolic"


def classify_isometry(g: Isometry, parabolic_tol: float = 1e-7) -> str:
    """Coarse dynamical type: 'elliptic', 'parabolic', 'hyperbolic' or 'other'.

    Half-pipe elements classify through their linear part (trace against 3 in
    O0(1,2)), with pure translations sub-classified by the causal type of the
    translation vector (spacelike translations are the half-pipe rotations).
    Curved-model elements use the cubed-nilpotency test ||(m - Id)^3|| for
    parabolics -- stable where eigensolvers are not -- then the spectral
    radius to split hyperbolic from elliptic.  Identities and
    orientation/fiber-reversing elements report 'other'.
    """
    m = g.matrix
    if g.geometry is HP:
        if m[3, 3] < 0:
            return "other"
        kind = _classify_linear_so12(m[:3, :3], parabolic_tol)
        if kind != "other":
            return kind
        v = hp_to_minkowski(g).translation
        qv = float(minkowski_dot(v, v))
        if float(np.max(np.abs(v))) < parabolic_tol:
            return "other"
        if qv > parabolic_tol:
            return "elliptic"
        if qv < -parabolic_tol:
            return "other"
        return "parabolic"
    if float(np.linalg.det(m)) < 0:
        return "other"
    delta = m - np.eye(4)
    if float(np.max(np.abs(delta))) < parabolic_tol:
        return "other"
    if float(np.max(np.abs(delta @ delta @ delta))) < parabolic_tol:
        return "parabolic"
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    return "hyperbolic" if radius > 1.0 + parabolic_tol else "elliptic"
