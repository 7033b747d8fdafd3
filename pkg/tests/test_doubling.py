"""Tests for doubled holonomies, meridian cone angles, and cusp stabilizers."""

import math

import numpy as np
import pytest

from halfpipe.bending import BendingContext, bent_holonomy, support_plane_at
from halfpipe.doubling import (
    CommutationFailureError,
    FacePointOnLeafError,
    NoConjugatingTranslationError,
    cusp_stabilizer_check,
    double_convex_core_pair,
    double_holonomy,
    meridian_cone_angle,
    pair_aligner,
)
from halfpipe.fuchsian import TeichPoint, WeightedMulticurve, build_punctured_torus
from halfpipe.geometry import ADS, HP, HYP, GeometryError
from halfpipe.isometry import reflection
from halfpipe.transition import richardson_limit

SYMMETRIC = TeichPoint(3.0, 3.0, 3.0)
KERCKHOFF = TeichPoint(2.0 * math.sqrt(2.0), 2.0 * math.sqrt(2.0), 4.0)
BASE = np.array([0.11, 0.07])
MIRROR = np.array([-0.11, 0.07])

TOL_EXACT = 1e-12
TOL_TABLE = 1e-9
TOL_SLOPE = 1e-8
TOL_CUSP = 1e-8


def _context(tag=HYP, scale=0.2, traces=SYMMETRIC, word="A", weight=1.0, sign=1.0):
    group = build_punctured_torus(traces)
    return BendingContext(
        group=group,
        multicurve=WeightedMulticurve.single(word, weight),
        base_point=BASE,
        tag=tag,
        sign=sign,
        scale=scale,
    )


def _double(tag=HYP, scale=0.2):
    return double_holonomy(_context(tag=tag, scale=scale), [MIRROR], stabilizer_words=("A",))


def _kerckhoff_pair(scale=0.05):
    group = build_punctured_torus(KERCKHOFF)
    upper = BendingContext(
        group=group,
        multicurve=WeightedMulticurve.single("A", 1.0),
        base_point=BASE,
        tag=HP,
        sign=1.0,
        scale=scale,
    )
    lower = BendingContext(
        group=group,
        multicurve=WeightedMulticurve.single("B", 1.0),
        base_point=BASE,
        tag=HP,
        sign=-1.0,
        scale=scale,
    )
    return upper, lower


def test_double_restricts_to_base_representation():
    dbl = _double()
    for word in ("A", "B", "aB", "ABab"):
        assert np.array_equal(dbl(word).matrix, dbl.rho(word).matrix)


def test_face_tokens_are_exact_reflection_products():
    for tag in (HYP, ADS, HP):
        dbl = _double(tag=tag)
        r0, r1 = dbl.reflections
        assert np.array_equal(dbl("e1").matrix, (r1 @ r0).matrix)
        assert np.array_equal(dbl("E1").matrix, (r0 @ r1).matrix)
        assert np.max(np.abs((r0 @ r0).matrix - np.eye(4))) < TOL_EXACT
        assert np.max(np.abs((r1 @ r1).matrix - np.eye(4))) < TOL_EXACT
        assert np.max(np.abs((dbl("e1") @ dbl("E1")).matrix - np.eye(4))) < TOL_EXACT


def test_reflections_fix_their_support_planes():
    ctx = _context()
    dbl = double_holonomy(ctx, [MIRROR])
    for point, refl in zip(dbl.face_points, dbl.reflections):
        plane = support_plane_at(ctx, point)
        moved = refl.apply_plane(plane)
        assert plane.same_plane_as(moved, tol=1e-11)


def test_extended_word_evaluation_is_multiplicative():
    dbl = _double()
    lhs = dbl("Ae1Be1a")
    rhs = dbl("A") @ dbl("e1") @ dbl("B") @ dbl("e1") @ dbl("a")
    assert np.max(np.abs(lhs.matrix - rhs.matrix)) < TOL_EXACT


def test_extended_word_parsing_rejects_garbage():
    dbl = _double()
    for bad in ("xA", "e", "A e1", "e0", "e7", "E0"):
        with pytest.raises(GeometryError):
            dbl(bad)


def test_unbent_double_collapses_to_base_reflection():
    dbl = _double(scale=0.0)
    assert np.allclose(dbl.reflections[0].matrix, np.diag([1.0, 1.0, 1.0, -1.0]), atol=0.0)
    assert np.array_equal(dbl.reflections[0].matrix, dbl.reflections[1].matrix)
    assert np.max(np.abs(dbl("e1").matrix - np.eye(4))) == 0.0


def test_hnn_relation_for_face_stabilizer():
    # The A-axis bounds both faces, so A stabilizes face 1 as well; the
    # doubled relation sends conjugation by e1 to the mirror copy.
    dbl = _double()
    r0 = dbl.reflections[0]
    lhs = dbl("E1Ae1").matrix
    rhs = (r0 @ dbl.rho("A") @ r0).matrix
    assert np.max(np.abs(lhs - rhs)) < TOL_EXACT


def test_face_validation_errors():
    ctx = _context()
    with pytest.raises(FacePointOnLeafError):
        double_holonomy(ctx, [np.array([0.0, 0.3])])
    with pytest.raises(GeometryError):
        double_holonomy(ctx, [np.array([0.12, 0.08])])
    with pytest.raises(CommutationFailureError):
        double_holonomy(ctx, [MIRROR], stabilizer_words=("B",))


def test_reflections_conjugate_with_the_holonomy():
    ctx = _context()
    dbl = double_holonomy(ctx, [MIRROR])
    for word in ("A", "B", "ab"):
        g = dbl.rho(word)
        for point, refl in zip(dbl.face_points, dbl.reflections):
            plane = support_plane_at(ctx, point)
            lhs = (g @ refl @ g.inverse()).matrix
            rhs = reflection(g.apply_plane(plane)).matrix
            assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_meridian_cone_angle_table():
    for weight in (1.0, 0.7):
        hyp = _context(tag=HYP, weight=weight)
        ads = _context(tag=ADS, weight=weight)
        for t in (0.2, 0.1, 0.05, 0.01):
            assert meridian_cone_angle(hyp, "A", t) == pytest.approx(
                2.0 * (math.pi - t * weight), abs=TOL_TABLE
            )
            assert meridian_cone_angle(ads, "A", t) == pytest.approx(
                -2.0 * t * weight, abs=TOL_TABLE
            )


def test_meridian_cone_angle_is_affine_with_slope_minus_two_weights():
    weight = 0.8
    ts = np.array([0.2, 0.1, 0.05, 0.01])
    for tag in (HYP, ADS):
        ctx = _context(tag=tag, weight=weight)
        angles = np.array([meridian_cone_angle(ctx, "A", t) for t in ts])
        coeffs = np.polyfit(ts, angles, 1)
        assert coeffs[0] == pytest.approx(-2.0 * weight, abs=TOL_SLOPE)
        assert np.max(np.abs(np.polyval(coeffs, ts) - angles)) < TOL_SLOPE


def test_meridian_half_pipe_values():
    ctx = _context(tag=HP)
    assert meridian_cone_angle(ctx, "A", 1.0) == pytest.approx(-2.0, abs=1e-12)
    assert meridian_cone_angle(ctx, "A", 0.25) == pytest.approx(-0.5, abs=1e-12)


def test_meridian_rescaled_family_limit():
    # The hyperbolic deficit (angle - 2*pi) scaled by 1/t recovers the
    # half-pipe meridian angle -2 * weight as t shrinks.
    samples = []
    for t in (1e-2, 1e-3, 1e-4):
        ctx = _context(tag=HYP, scale=t)
        deficit = meridian_cone_angle(ctx, "A") - 2.0 * math.pi
        samples.append((t, np.array([[deficit / t]])))
    limit = richardson_limit(samples, order=2.0)
    assert float(limit[0, 0]) == pytest.approx(-2.0, abs=1e-9)
    assert all(abs(float(m[0, 0]) + 2.0) < 1e-9 for _, m in samples)


def test_meridian_validation():
    ctx = _context(tag=HYP)
    with pytest.raises(GeometryError):
        meridian_cone_angle(ctx, "B", 0.1)
    with pytest.raises(GeometryError):
        meridian_cone_angle(ctx, "A", 4.0)


def test_pair_aligner_exists_at_the_critical_point():
    upper, lower = _kerckhoff_pair()
    aligner = pair_aligner(upper, lower)
    assert np.allclose(aligner.matrix[:3, :3], np.eye(3), atol=0.0)
    rho_u, rho_l = bent_holonomy(upper), bent_holonomy(lower)
    for word in ("A", "B", "AB", "BabA", "aabAB"):
        lhs = (aligner @ rho_l(word) @ aligner.inverse()).matrix
        assert np.max(np.abs(lhs - rho_u(word).matrix)) < 1e-12


def test_pair_aligner_refuses_non_critical_points():
    group = build_punctured_torus(SYMMETRIC)
    upper = BendingContext(
        group=group,
        multicurve=WeightedMulticurve.single("A", 1.0),
        base_point=BASE,
        tag=HP,
        sign=1.0,
        scale=0.05,
    )
    lower = BendingContext(
        group=group,
        multicurve=WeightedMulticurve.single("B", 1.0),
        base_point=BASE,
        tag=HP,
        sign=-1.0,
        scale=0.05,
    )
    with pytest.raises(NoConjugatingTranslationError):
        pair_aligner(upper, lower)
    with pytest.raises(GeometryError):
        pair_aligner(upper.with_geometry(HYP), lower)


def test_doubled_cusp_stabilizer_is_rank_two():
    upper, lower = _kerckhoff_pair()
    doubled = double_convex_core_pair(upper, lower)
    report = cusp_stabilizer_check(doubled, "BabA")
    assert report.cusp_class == "parabolic"
    assert report.commutator_norm < TOL_CUSP
    assert report.shared_point_residual < TOL_CUSP
    assert report.rank2_defect > 1e-3
    assert report.passed
    payload = report.to_json_dict()
    assert set(payload) == {
        "cusp_class",
        "commutator_norm",
        "shared_point_residual",
        "rank2_defect",
        "passed",
    }


def test_wrong_cusp_word_fails_commutation():
    # ABab is parabolic but fixes a different ideal point than the face pair.
    upper, lower = _kerckhoff_pair()
    doubled = double_convex_core_pair(upper, lower)
    report = cusp_stabilizer_check(doubled, "ABab")
    assert report.cusp_class == "parabolic"
    assert report.commutator_norm > 1e-3
    assert not report.passed


def test_unbent_cusp_pair_degenerates():
    dbl = _double(scale=0.0)
    report = cusp_stabilizer_check(dbl, "ABab")
    assert report.cusp_class == "parabolic"
    assert report.commutator_norm < 1e-12
    assert report.shared_point_residual < 1e-12
    # the face product collapses to the identity, so no rank-2 pair remains
    assert report.rank2_defect == 0.0
    assert not report.passed


def test_convex_core_pair_requires_shared_basepoint():
    upper, lower = _kerckhoff_pair()
    shifted = BendingContext(
        group=lower.group,
        multicurve=lower.multicurve,
        base_point=np.array([0.1, 0.05]),
        tag=HP,
        sign=-1.0,
        scale=0.05,
    )
    with pytest.raises(GeometryError):
        double_convex_core_pair(upper, shifted)
