from __future__ import annotations

import math

import numpy as np
import pytest

from halfpipe.geometry import (
    ADS,
    HP,
    HYP,
    ChartError,
    DegeneratePlaneError,
    Horoball,
    MinkowskiPlane,
    NonIntersectingPlanesError,
    NotSpacelikeError,
    OutsideModelError,
    Plane,
    ProjectivePoint,
    SpacelikeGeodesicH2,
    TagMismatchError,
    ZeroVectorError,
    angle_between_planes,
    classify_point,
    disk_lift,
    embed_h2_vector,
    form_eval,
    hp_height,
    hp_point_dual_to_minkowski_plane,
    klein_hp,
    klein_hp_inverse,
    minkowski_dot,
    minkowski_plane_dual_to_hp_point,
    projectively_equal,
    radial_project,
)

ALL_TAGS = [HYP, ADS, HP]


def test_form_eval_signature():
    e0, e3 = np.array([1.0, 0, 0, 0]), np.array([0.0, 0, 0, 1])
    assert form_eval(HYP, e0) == -1.0
    assert form_eval(HYP, e3) == 1.0
    assert form_eval(ADS, e3) == -1.0
    assert form_eval(HP, e3) == 0.0
    assert form_eval(HP, np.array([1.0, 1.0, 0, 5.0])) == 0.0


@pytest.mark.parametrize("tag", ALL_TAGS)
def test_classify_point(tag):
    assert classify_point(tag, [1, 0.2, 0.1, 0]) == "interior"
    assert classify_point(tag, [1, 1, 0, 0]) == "boundary"
    assert classify_point(tag, [1, 2, 0, 0]) == "exterior"
    with pytest.raises(ZeroVectorError):
        classify_point(tag, [0, 0, 0, 0])


def test_hp_interior_ignores_fiber_coordinate():
    assert classify_point(HP, [1, 0, 0, 100.0]) == "interior"
    assert classify_point(ADS, [1, 0, 0, 100.0]) == "interior"


def test_projective_equality_is_scale_free():
    rng = np.random.default_rng(7)
    for _ in range(50):
        v = rng.normal(size=4)
        assert projectively_equal(v, -3.7 * v)
        w = rng.normal(size=4)
        if np.linalg.norm(np.cross(v[:3], w[:3])) > 1e-6:
            assert not projectively_equal(v, w)


def test_unit_lift_normalizes_into_positive_chart():
    p = ProjectivePoint([-2.0, 0.4, 0.2, 0.3], HYP)
    lift = p.unit_lift()
    assert lift[0] > 0
    assert form_eval(HYP, lift) == pytest.approx(-1.0, abs=1e-12)


def test_unit_lift_rejects_zero_time_ads_points():
    # Interior AdS point on the x0 = 0 slice: no representative in the chart.
    p = ProjectivePoint([0.0, 0.0, 0.0, 1.0], ADS)
    assert p.is_interior()
    with pytest.raises(ChartError):
        p.unit_lift()


def test_klein_chart_example_and_roundtrip():
    z, h = klein_hp(ProjectivePoint([2.0, 0.0, 0.0, 1.0], HP))
    assert np.allclose(z, [0.0, 0.0])
    assert h == pytest.approx(0.5)

    rng = np.random.default_rng(3)
    for _ in range(25):
        z = rng.uniform(-0.6, 0.6, size=2)
        h = rng.normal()
        point = klein_hp_inverse(z, h)
        z2, h2 = klein_hp(point)
        assert np.allclose(z2, z, atol=1e-14)
        assert h2 == pytest.approx(h, abs=1e-14)


def test_hp_height_examples():
    assert hp_height(ProjectivePoint([2.0, 0.0, 0.0, 3.0], HP)) == pytest.approx(1.5)
    # Invariant under rescaling of the representative, including sign flips.
    v = np.array([1.0, 0.3, -0.2, 0.7])
    base = hp_height(ProjectivePoint(v, HP))
    assert hp_height(ProjectivePoint(2.5 * v, HP)) == pytest.approx(base)
    assert hp_height(ProjectivePoint(-v, HP)) == pytest.approx(base)
    # On the surface {x3 = 0} the height vanishes.
    assert hp_height(ProjectivePoint([1.0, 0.5, 0.0, 0.0], HP)) == 0.0


def test_duality_roundtrips():
    point = ProjectivePoint([1.0, 0.2, -0.3, 0.8], HP)
    plane = minkowski_plane_dual_to_hp_point(point)
    again = hp_point_dual_to_minkowski_plane(plane)
    assert again.same_point_as(point)

    y = np.array([0.4, -0.1, 0.25])
    hp_plane = Plane.hp_plane_dual_to(y)
    assert np.allclose(hp_plane.hp_dual_point(), y, atol=1e-14)


def test_hp_plane_is_graph_of_affine_height():
    y = np.array([0.0, 1.0, 0.0])
    plane = Plane.hp_plane_dual_to(y)
    rng = np.random.default_rng(11)
    for _ in range(20):
        z = rng.uniform(-0.6, 0.6, size=2)
        h = plane.hp_graph_height(z)
        assert h == pytest.approx(z[0])
        assert plane.contains_point(klein_hp_inverse(z, h))
        assert not plane.contains_point(klein_hp_inverse(z, h + 0.1))


def test_hp_angle_example():
    p = Plane.hp_plane_dual_to([0.0, 0.0, 0.0])
    q = Plane.hp_plane_dual_to([0.0, 1.0, 0.0])
    assert angle_between_planes(p, q) == pytest.approx(1.0, abs=1e-12)
    assert angle_between_planes(p, p) == 0.0


def test_hp_angle_rejects_non_spacelike_difference():
    p = Plane.hp_plane_dual_to([0.0, 0.0, 0.0])
    q = Plane.hp_plane_dual_to([1.0, 0.0, 0.0])  # timelike difference
    with pytest.raises(NotSpacelikeError):
        angle_between_planes(p, q)
    r = Plane.hp_plane_dual_to([1.0, 1.0, 0.0])  # null difference
    with pytest.raises(NotSpacelikeError):
        angle_between_planes(p, r)


@pytest.mark.parametrize("theta", [0.1, math.pi / 6, 1.2])
def test_hyperbolic_dihedral_angle(theta):
    base = Plane.base_plane(HYP)
    tilted = Plane(np.array([0.0, 0.0, math.sin(theta), math.cos(theta)]), HYP)
    assert angle_between_planes(base, tilted) == pytest.approx(theta, abs=1e-12)


@pytest.mark.parametrize("theta", [0.1, 0.75, 2.0])
def test_ads_dihedral_angle(theta):
    # {x3 = 0} against {x3 = -tanh(theta) x2}: timelike unit normals pair to
    # cosh(theta), so the angle comes out theta.
    base = Plane.base_plane(ADS)
    tilted = Plane(np.array([0.0, 0.0, math.sinh(theta), math.cosh(theta)]), ADS)
    assert angle_between_planes(base, tilted) == pytest.approx(theta, abs=1e-12)


def test_disjoint_hyperbolic_planes_raise():
    p = Plane(np.array([-0.5, 1.0, 0.0, 0.0]), HYP)  # {x1 = 0.5 x0}
    q = Plane(np.array([0.5, 1.0, 0.0, 0.0]), HYP)  # {x1 = -0.5 x0}
    with pytest.raises(NonIntersectingPlanesError):
        angle_between_planes(p, q)


def test_ads_angle_needs_spacelike_planes():
    base = Plane.base_plane(ADS)
    timelike_wall = Plane(np.array([0.0, 1.0, 0.0, 0.0]), ADS)
    assert not timelike_wall.is_spacelike()
    with pytest.raises(NotSpacelikeError):
        angle_between_planes(base, timelike_wall)


def test_plane_covector_sign_canonicalization():
    p = Plane(np.array([0.0, 0.0, 0.0, -2.0]), HP)
    assert p.covector[3] == pytest.approx(1.0)
    assert p.same_plane_as(Plane.base_plane(HP))


def test_degenerate_hp_plane_has_no_dual():
    vertical = Plane(np.array([0.0, 1.0, 0.0, 0.0]), HP)
    assert not vertical.is_spacelike()
    with pytest.raises(DegeneratePlaneError):
        vertical.hp_dual_point()


def test_minkowski_plane_normalization():
    plane = MinkowskiPlane([-2.0, 0.0, 0.0], 3.0)
    assert np.allclose(plane.timelike_normal, [1.0, 0.0, 0.0])
    assert plane.offset == pytest.approx(-1.5)
    assert plane.contains([0.0, 5.0, -2.0] + plane.offset * np.array([-1.0, 0.0, 0.0]))


def test_disk_lift_and_projection_roundtrip():
    rng = np.random.default_rng(5)
    z = rng.uniform(-0.5, 0.5, size=(30, 2))
    lifts = disk_lift(z)
    assert np.allclose(minkowski_dot(lifts, lifts), -1.0, atol=1e-12)
    assert np.allclose(radial_project(lifts), z, atol=1e-12)
    with pytest.raises(OutsideModelError):
        disk_lift([1.0, 0.2])


def test_embed_h2_vector_lies_on_every_quadric():
    v = embed_h2_vector([0.3, -0.4])
    for tag in ALL_TAGS:
        assert form_eval(tag, v) == pytest.approx(-1.0, abs=1e-12)


def test_geodesic_orientation_conventions():
    axis = SpacelikeGeodesicH2([0.0, 0.0, 1.0])
    start, end = axis.ideal_endpoints_klein()
    assert np.allclose(start, [-1.0, 0.0], atol=1e-12)
    assert np.allclose(end, [1.0, 0.0], atol=1e-12)
    # Rebuilding from the endpoints reproduces the normal, and reversing the
    # endpoints reverses it.
    assert np.allclose(SpacelikeGeodesicH2.from_ideal_endpoints_klein(start, end).normal, axis.normal)
    assert np.allclose(SpacelikeGeodesicH2.from_ideal_endpoints_klein(end, start).normal, -axis.normal)
    # The left normal of eastward travel points north.
    assert axis.side_of_disk_point([0.0, 0.5]) > 0
    assert axis.side_of_disk_point([0.0, -0.5]) < 0


def test_geodesic_distance_to_point():
    axis = SpacelikeGeodesicH2([0.0, 0.0, 1.0])
    d = 0.8
    p = np.array([math.cosh(d), 0.0, math.sinh(d)])
    assert axis.distance_to_point(p) == pytest.approx(d, abs=1e-12)
    assert axis.distance_to_point(axis.closest_point_to_origin()) == pytest.approx(0.0, abs=1e-12)


def test_geodesic_tangent_is_unit_and_orthogonal():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = rng.normal(size=3)
        n[0] = 0.3 * n[0]  # keep spacelike likely
        if minkowski_dot(n, n) <= 0.01:
            continue
        geo = SpacelikeGeodesicH2(n)
        p = geo.closest_point_to_origin()
        v = geo.tangent_at(p)
        assert minkowski_dot(p, p) == pytest.approx(-1.0, abs=1e-12)
        assert minkowski_dot(v, v) == pytest.approx(1.0, abs=1e-10)
        assert minkowski_dot(v, p) == pytest.approx(0.0, abs=1e-10)
        assert minkowski_dot(v, geo.normal) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("tag", ALL_TAGS)
def test_horoball_classification(tag):
    ball = Horoball([1.0, 1.0, 0.0, 0.0], -1.0, tag)
    base = ProjectivePoint([1.0, 0.0, 0.0, 0.0], tag)
    assert ball.classify_point(base) == "on_horosphere"
    for s in (0.5, 1.0, 2.0):
        toward = ProjectivePoint([math.cosh(s), math.sinh(s), 0.0, 0.0], tag)
        away = ProjectivePoint([math.cosh(s), -math.sinh(s), 0.0, 0.0], tag)
        # Pairings along the axis are -exp(-s) (inside) and -exp(s) (outside).
        assert ball.classify_point(toward) == "inside"
        assert ball.classify_point(away) == "outside"


def test_horoball_rescales_ideal_point():
    ball = Horoball([2.0, 2.0, 0.0, 0.0], -1.0, HYP)
    assert ball.ideal_point[0] == pytest.approx(1.0)


def test_horoball_rejects_fiber_direction():
    with pytest.raises((ChartError, OutsideModelError)):
        Horoball([0.0, 0.0, 0.0, 1.0], -1.0, HP)


def test_tag_mismatch_is_loud():
    p = ProjectivePoint([1.0, 0, 0, 0], HYP)
    q = ProjectivePoint([1.0, 0, 0, 0], ADS)
    with pytest.raises(TagMismatchError):
        p.same_point_as(q)
    with pytest.raises(TagMismatchError):
        angle_between_planes(Plane.base_plane(HYP), Plane.base_plane(ADS))
