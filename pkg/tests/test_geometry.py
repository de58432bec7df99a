import math

import numpy as np

from drivestress import geometry as geo


def test_rect_corners_axis_aligned():
    r = geo.Rect(np.array([0.0, 0.0]), 0.0, 4.0, 2.0)
    got = sorted(map(tuple, r.corners()))
    assert np.allclose(got, [(-2, -1), (-2, 1), (2, -1), (2, 1)])


def test_rect_rect_gap_head_on():
    a = geo.Rect(np.array([0.0, 0.0]), 0.0, 4.5, 2.0)
    b = geo.Rect(np.array([14.5, 0.0]), math.pi, 4.5, 2.0)
    assert geo.footprint_distance(a, b) == 14.5 - 4.5
    assert not geo.footprints_overlap(a, b)


def test_rect_rect_overlap_rotated():
    a = geo.Rect(np.array([0.0, 0.0]), 0.0, 4.0, 2.0)
    b = geo.Rect(np.array([2.6, 0.0]), math.pi / 4, 4.0, 2.0)
    assert geo.footprints_overlap(a, b)
    assert geo.footprint_distance(a, b) == 0.0
    # same rotated rect further away no longer touches
    c = geo.Rect(np.array([5.0, 0.0]), math.pi / 4, 4.0, 2.0)
    assert not geo.footprints_overlap(a, c)
    assert geo.footprint_distance(a, c) > 0.0


def test_disc_rect_distance():
    r = geo.Rect(np.array([0.0, 0.0]), 0.0, 4.0, 2.0)
    d = geo.Disc(np.array([0.0, 5.0]), 0.5)
    assert geo.footprint_distance(r, d) == 5.0 - 1.0 - 0.5
    assert geo.footprints_overlap(r, geo.Disc(np.array([0.0, 1.3]), 0.5))


def test_overlap_implies_zero_distance_random():
    rng = np.random.default_rng(11)
    for _ in range(400):
        a = geo.Rect(rng.normal(size=2) * 3, rng.uniform(-math.pi, math.pi), 4.5, 2.0)
        if rng.random() < 0.5:
            b = geo.Rect(rng.normal(size=2) * 3, rng.uniform(-math.pi, math.pi), 4.5, 2.0)
        else:
            b = geo.Disc(rng.normal(size=2) * 3, 0.25)
        dist = geo.footprint_distance(a, b)
        if geo.footprints_overlap(a, b):
            assert dist == 0.0
        else:
            assert dist >= 0.0


def test_projection_on_polyline():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    cum = geo.cumulative_lengths(pts)
    np.testing.assert_allclose(cum, [0.0, 10.0, 20.0])
    s, d = geo.project_on_polyline(pts, cum, (3.0, 4.0))
    assert (s, d) == (3.0, 4.0)
    s, d = geo.project_on_polyline(pts, cum, (12.0, 12.0))  # beyond the corner
    assert s == 20.0
    np.testing.assert_allclose(d, math.hypot(2.0, 2.0))
    np.testing.assert_allclose(geo.point_at_arclength(pts, cum, 15.0), [10.0, 5.0])
    assert geo.heading_at_arclength(pts, cum, 15.0) == math.pi / 2


def test_wrap_angle():
    assert geo.wrap_angle(0.0) == 0.0
    np.testing.assert_allclose(geo.wrap_angle(3 * math.pi / 2), -math.pi / 2)
    np.testing.assert_allclose(geo.wrap_angle(-3 * math.pi / 2), math.pi / 2)
    assert geo.wrap_angle(math.pi) == math.pi
