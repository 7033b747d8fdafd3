"""Doubling bent structures across their boundary surfaces.

Reflecting a bent surface in the support planes of its flat faces doubles the
structure: each face contributes an involution, the products of two face
reflections extend the holonomy to the doubled manifold, meridians around the
bending lines become cone axes, and a cusp of the surface doubles to a torus
cusp.  This module builds the extended representation over words in the
surface generators together with face tokens e1, e2, ..., computes meridian
cone angles from adjacent support-plane reflections, aligns the two boundary
surfaces of a half-pipe convex core by a common conjugating translation, and
checks that doubled cusp stabilizers are rank-2 abelian.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from halfpipe.bending import (
    BendingContext,
    BentHolonomy,
    bending_cocycle,
    bent_holonomy,
    support_plane_at,
)
from halfpipe.fuchsian import EndpointOnLeafError, leaves_crossing
from halfpipe.geometry import HP, HYP, J3, Geometry, GeometryError, TagMismatchError
from halfpipe.isometry import Isometry, classify_isometry, reflection, rotation_angle

# Residual allowed when a claimed face stabilizer must commute with the face
# reflection, and in the doubled-cusp commutation checks.
EPS_COMMUTATION = 1e-9
EPS_CUSP = 1e-8

# A power relation among doubled cusp generators must stand out by at least
# this much for the pair to count as rank-2.
RANK2_FLOOR = 1e-6

# Nudge (disk units) used to sample the two faces adjacent to a bending leaf.
LEAF_NUDGE = 1e-3

_EXTENDED_TOKEN = re.compile(r"[AaBb]|[eE][0-9]+")


class FacePointOnLeafError(GeometryError):
    """A face base point lies on a leaf of the bending locus."""


class CommutationFailureError(GeometryError):
    """A claimed face stabilizer fails to commute with the face reflection."""


class NoConjugatingTranslationError(GeometryError):
    """No translation conjugates the lower holonomy onto the upper one."""


def _tokenize_extended(word: str) -> list[str]:
    tokens = _EXTENDED_TOKEN.findall(word)
    if "".join(tokens) != word:
        raise GeometryError(f"not a word in the extended generators: {word!r}")
    return tokens


@dataclass(frozen=True, eq=False)
class DoubledHolonomy:
    """Holonomy of a doubled structure over extended words.

    Words mix surface letters (A, a, B, b) with face tokens: e1, ..., eq map
    to the exact products r_i r_0 of face reflections, and E1, ..., Eq to
    their inverses r_0 r_i.  ``paths`` records, per face point, the
    conjugator words of the leaves crossed from the basepoint, which pins
    down the implicit choice of path to each face.
    """

    rho: BentHolonomy
    face_points: tuple[np.ndarray, ...]
    reflections: tuple[Isometry, ...]
    paths: tuple[tuple[str, ...], ...]

    @property
    def tag(self) -> Geometry:
        return self.reflections[0].geometry

    @property
    def face_count(self) -> int:
        return len(self.reflections)

    def mirror_generator(self, index: int) -> Isometry:
        """The exact product r_index r_0 represented by the token e<index>."""
        if not 1 <= index < self.face_count:
            raise GeometryError(f"face index {index} out of range")
        return self.reflections[index] @ self.reflections[0]

    def __call__(self, word: str) -> Isometry:
        out = Isometry(np.eye(4), self.tag)
        chunk = ""
        for token in _tokenize_extended(word):
            if len(token) == 1:
                chunk += token
                continue
            if chunk:
                out = out @ self.rho(chunk)
                chunk = ""
            index = int(token[1:])
            if not 1 <= index < self.face_count:
                raise GeometryError(f"face index {index} out of range")
            if token[0] == "e":
                out = out @ (self.reflections[index] @ self.reflections[0])
            else:
                out = out @ (self.reflections[0] @ self.reflections[index])
        if chunk:
            out = out @ self.rho(chunk)
        return out


def _crossing_words(ctx: BendingContext, point: np.ndarray) -> tuple[str, ...]:
    try:
        crossings = leaves_crossing(ctx.group, ctx.multicurve, ctx.base_point, point)
    except EndpointOnLeafError as exc:
        raise FacePointOnLeafError(f"face point {point} lies on a leaf") from exc
    return tuple(c.conjugator_word for c in crossings)


def _face_plane(ctx: BendingContext, point: np.ndarray):
    try:
        return support_plane_at(ctx, point)
    except EndpointOnLeafError as exc:
        raise FacePointOnLeafError(f"face point {point} lies on a leaf") from exc


def _check_distinct_faces(ctx: BendingContext, points: list[np.ndarray]) -> None:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            try:
                crossed = leaves_crossing(ctx.group, ctx.multicurve, points[i], points[j])
            except EndpointOnLeafError as exc:
                raise FacePointOnLeafError(
                    f"face point {i} or {j} lies on a leaf"
                ) from exc
            if not crossed:
                raise GeometryError(
                    f"face points {i} and {j} lie in the same complementary face"
                )


def _check_stabilizers(rho: BentHolonomy, r0: Isometry, words) -> None:
    for word in words:
        g = rho(word)
        defect = float(np.max(np.abs((g @ r0).matrix - (r0 @ g).matrix)))
        if defect > EPS_COMMUTATION:
            raise CommutationFailureError(
                f"word {word!r} does not stabilize face 0 (defect {defect:.3e})"
            )


def double_holonomy(
    ctx: BendingContext, face_points, stabilizer_words=()
) -> DoubledHolonomy:
    """Double a bent structure across the faces holding the given points.

    The basepoint's face is face 0; ``face_points`` supply faces 1, ..., q
    and must lie in pairwise distinct complementary faces, off all leaves.
    Each face contributes the reflection in its support plane.  Any supplied
    ``stabilizer_words`` are verified to commute with the face-0 reflection.
    """
    points = [ctx.base_point] + [np.asarray(p, dtype=float).reshape(2) for p in face_points]
    _check_distinct_faces(ctx, points)
    reflections = tuple(reflection(_face_plane(ctx, p)) for p in points)
    rho = bent_holonomy(ctx)
    _check_stabilizers(rho, reflections[0], stabilizer_words)
    return DoubledHolonomy(
        rho=rho,
        face_points=tuple(points),
        reflections=reflections,
        paths=tuple(_crossing_words(ctx, p) for p in points),
    )


def _translation_part(m: np.ndarray) -> np.ndarray:
    return J3 @ np.linalg.solve(m[:3, :3].T, m[3, :3])


def pair_aligner(
    upper: BendingContext, lower: BendingContext, tol: float = 1e-8
) -> Isometry:
    """The half-pipe translation conjugating the lower holonomy to the upper.

    Solves the linear system (Id - A_w) u = v_upper(w) - v_lower(w) over the
    generators, where A_w is the shared linear part and v the translation
    parts.  A solution exists precisely when the two bent holonomies are
    conjugate by a vertical-graph translation; otherwise the least-squares
    residual exceeds ``tol`` and the configuration is refused.
    """
    if upper.tag is not HP or lower.tag is not HP:
        raise TagMismatchError("pair alignment is a half-pipe construction")
    rho_u, rho_l = bent_holonomy(upper), bent_holonomy(lower)
    rows, rhs = [], []
    for word in ("A", "B"):
        mu, ml = rho_u(word).matrix, rho_l(word).matrix
        if np.max(np.abs(mu[:3, :3] - ml[:3, :3])) > tol:
            raise NoConjugatingTranslationError(
                f"linear parts of the two holonomies differ on {word!r}"
            )
        rows.append(np.eye(3) - mu[:3, :3])
        rhs.append(_translation_part(mu) - _translation_part(ml))
    system, target = np.vstack(rows), np.concatenate(rhs)
    u, *_ = np.linalg.lstsq(system, target, rcond=None)
    residual = float(np.max(np.abs(system @ u - target)))
    if residual > tol:
        raise NoConjugatingTranslationError(
            f"no conjugating translation: generator residual {residual:.3e}"
        )
    out = np.eye(4)
    out[3, :3] = J3 @ u
    return Isometry(out, HP)


def double_convex_core_pair(
    upper: BendingContext,
    lower: BendingContext,
    aligner: Isometry | None = None,
    face_points=(),
    stabilizer_words=(),
) -> DoubledHolonomy:
    """Double a half-pipe convex core across both boundary surfaces.

    Faces alternate sides: face 0 is the upper surface's face at the
    basepoint, face 1 the aligned lower surface's face there, and each extra
    face point contributes its upper face followed by its aligned lower
    face.  With no extra points the token e1 is the product of the two
    boundary reflections at the basepoint — the meridian of the doubled cusp
    region.  The aligner defaults to :func:`pair_aligner`.
    """
    if np.max(np.abs(upper.base_point - lower.base_point)) > 0.0:
        raise GeometryError("the two contexts must share a basepoint")
    if aligner is None:
        aligner = pair_aligner(upper, lower)
    points = [upper.base_point] + [np.asarray(p, dtype=float).reshape(2) for p in face_points]
    reflections = []
    paths = []
    doubled_points = []
    for p in points:
        reflections.append(reflection(_face_plane(upper, p)))
        paths.append(_crossing_words(upper, p))
        doubled_points.append(p)
        reflections.append(aligner @ reflection(_face_plane(lower, p)) @ aligner.inverse())
        paths.append(_crossing_words(lower, p))
        doubled_points.append(p)
    rho = bent_holonomy(upper)
    _check_stabilizers(rho, reflections[0], stabilizer_words)
    return DoubledHolonomy(
        rho=rho,
        face_points=tuple(doubled_points),
        reflections=tuple(reflections),
        paths=tuple(paths),
    )


def _adjacent_face_points(ctx: BendingContext, component_index: int):
    # Walk along the leaf away from other components' crossings (the axes of
    # distinct components may intersect, e.g. at symmetric trace points)
    # until a transverse nudge isolates exactly this leaf.
    word = ctx.multicurve.components[component_index].word
    leaf = ctx.group.axis(word)
    anchor = leaf.closest_point_to_origin()
    for offset in (0.0, 0.2, -0.2, 0.45, -0.45, 0.8, -0.8):
        point = math.cosh(offset) * anchor + math.sinh(offset) * leaf.tangent_at(anchor)
        z = point[1:] / point[0]
        direction = leaf.normal[1:] - z * leaf.normal[0]
        direction /= np.linalg.norm(direction)
        eps = LEAF_NUDGE
        for _ in range(4):
            near, far = z - eps * direction, z + eps * direction
            try:
                crossings = leaves_crossing(ctx.group, ctx.multicurve, near, far)
            except EndpointOnLeafError:
                eps *= 0.1
                continue
            if (
                len(crossings) == 1
                and crossings[0].component_index == component_index
                and crossings[0].conjugator_word == ""
            ):
                return leaf, near, far
            eps *= 0.1
    raise GeometryError("could not isolate the leaf between its two adjacent faces")


def meridian_cone_angle(ctx: BendingContext, word: str, t: float | None = None) -> float:
    """Cone angle of the meridian around a bending line in the double.

    Doubling turns each bending leaf into a cone axis whose meridian is the
    product of the reflections in the two support planes adjacent along the
    leaf.  For bending angle theta = sign * scale * weight the result is
    2*(pi - theta) in the hyperbolic model and -2*theta in the anti-de
    Sitter and half-pipe models.
    """
    if t is not None:
        ctx = ctx.rescaled(t)
    index = None
    for i, component in enumerate(ctx.multicurve.components):
        if component.word == word:
            index = i
            break
    if index is None:
        raise GeometryError(f"{word!r} is not a component of the multicurve")
    if ctx.tag is HYP and abs(ctx.scale * ctx.multicurve.components[index].weight) >= np.pi:
        raise GeometryError("hyperbolic bending angle must stay below pi")
    leaf, near, far = _adjacent_face_points(ctx, index)
    cocycle = bending_cocycle(ctx, ctx.base_point, near)
    product = reflection(_face_plane(ctx, near)) @ reflection(_face_plane(ctx, far))
    pulled_back = cocycle.inverse() @ product @ cocycle
    raw = rotation_angle(pulled_back, leaf)
    if ctx.tag is HYP:
        return 2.0 * np.pi + raw
    return raw


def _parabolic_fixed_direction(g: Isometry) -> np.ndarray:
    """The null direction fixed by a parabolic isometry, as a unit 4-vector."""
    if g.geometry is HP:
        block = g.matrix[:3, :3]
        _, _, vt = np.linalg.svd(block - np.eye(3))
        v = vt[-1]
        out = np.array([v[0], v[1], v[2], 0.0])
    else:
        _, s, vt = np.linalg.svd(g.matrix - np.eye(4))
        kernel = vt[s < 1e-6 * s[0]] if s[0] > 0 else vt
        if kernel.shape[0] == 0:
            kernel = vt[-1:]
        j = g.geometry.form_matrix
        gram = kernel @ j @ kernel.T
        if kernel.shape[0] == 1:
            out = kernel[0]
        else:
            _, _, wt = np.linalg.svd(gram)
            out = wt[-1] @ kernel
    out = out / np.linalg.norm(out)
    return out if out[0] >= 0 else -out


def _moves_direction(g: Isometry, v: np.ndarray) -> float:
    image = g.matrix @ v
    image = image / np.linalg.norm(image)
    return float(min(np.max(np.abs(image - v)), np.max(np.abs(image + v))))


@dataclass(frozen=True, eq=False)
class CuspStabilizerReport:
    """Diagnostics for a doubled cusp: commutation, type, and independence."""

    cusp_class: str
    commutator_norm: float
    shared_point_residual: float
    rank2_defect: float

    @property
    def passed(self) -> bool:
        return (
            self.cusp_class == "parabolic"
            and self.commutator_norm < EPS_CUSP
            and self.shared_point_residual < EPS_CUSP
            and self.rank2_defect > RANK2_FLOOR
        )

    def to_json_dict(self) -> dict:
        return {
            "cusp_class": self.cusp_class,
            "commutator_norm": self.commutator_norm,
            "shared_point_residual": self.shared_point_residual,
            "rank2_defect": self.rank2_defect,
            "passed": self.passed,
        }


def cusp_stabilizer_check(
    doubled: DoubledHolonomy, cusp_word: str, e_index: int = 1
) -> CuspStabilizerReport:
    """Verify that a doubled cusp has a rank-2 abelian stabilizer.

    The two candidate generators are the holonomy of ``cusp_word`` and the
    face product e<e_index>.  The report records whether the cusp holonomy
    is parabolic, how far the two generators are from commuting, how far the
    face product moves the cusp's fixed ideal point, and the smallest
    deviation of any mixed power c^m e^n (0 < |m|, |n| <= 4) from the
    identity — a genuine rank-2 pair keeps that defect large.
    """
    c = doubled(cusp_word)
    pair = doubled.mirror_generator(e_index)
    commutator = (c @ pair @ c.inverse() @ pair.inverse()).matrix
    commutator_norm = float(np.max(np.abs(commutator - np.eye(4))))
    cusp_class = classify_isometry(c)
    if cusp_class == "parabolic":
        v = _parabolic_fixed_direction(c)
        shared = max(_moves_direction(c, v), _moves_direction(pair, v))
    else:
        shared = np.inf
    c_powers = {m: np.linalg.matrix_power(c.matrix, m) for m in range(-4, 5)}
    p_powers = {n: np.linalg.matrix_power(pair.matrix, n) for n in range(-4, 5)}
    defect = np.inf
    for m in range(-4, 5):
        for n in range(-4, 5):
            if m == 0 and n == 0:
                continue
            defect = min(defect, float(np.max(np.abs(c_powers[m] @ p_powers[n] - np.eye(4)))))
    return CuspStabilizerReport(
        cusp_class=cusp_class,
        commutator_norm=commutator_norm,
        shared_point_residual=float(shared),
        rank2_defect=defect,
    )
