"""Planar geometry helpers: polylines, oriented rectangles, discs.

Everything works on plain float64 numpy arrays. Footprints are the two
shapes the simulator needs: an oriented rectangle (vehicles) and a disc
(pedestrians). Distances are surface-to-surface and drop to exactly 0.0
on contact or overlap, which the time-to-collision objective relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def heading_vec(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(theta + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def cumulative_lengths(points: np.ndarray) -> np.ndarray:
    """Arc length at each vertex of a polyline, starting at 0."""
    if points.ndim != 2 or points.shape[0] < 2 or points.shape[1] != 2:
        raise ValueError("polyline needs at least two 2-d points")
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def project_on_polyline(points: np.ndarray, cum: np.ndarray, p) -> tuple[float, float]:
    """Project a point onto a polyline.

    Returns (arc length of the nearest point, distance to it). The
    projection considers interior points of every segment, not just
    vertices.
    """
    p = np.asarray(p, dtype=float)
    a = points[:-1]
    d = points[1:] - a
    seg_len2 = np.einsum("ij,ij->i", d, d)
    # degenerate zero-length segments project onto their start vertex
    t = np.einsum("ij,ij->i", p - a, d) / np.where(seg_len2 > 0.0, seg_len2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * d
    dist2 = np.einsum("ij,ij->i", closest - p, closest - p)
    i = int(np.argmin(dist2))
    s = cum[i] + t[i] * math.sqrt(seg_len2[i])
    return float(s), float(math.sqrt(dist2[i]))


def point_at_arclength(points: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    s = min(max(s, 0.0), float(cum[-1]))
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(points) - 2)
    seg = cum[i + 1] - cum[i]
    t = 0.0 if seg <= 0.0 else (s - cum[i]) / seg
    return points[i] + t * (points[i + 1] - points[i])


def heading_at_arclength(points: np.ndarray, cum: np.ndarray, s: float) -> float:
    s = min(max(s, 0.0), float(cum[-1]))
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(points) - 2)
    d = points[i + 1] - points[i]
    return math.atan2(d[1], d[0])


@dataclass
class Rect:
    """Oriented rectangle footprint (center, heading, full extents)."""

    center: np.ndarray
    heading: float
    length: float
    width: float

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        fx, fy = 0.5 * self.length * c, 0.5 * self.length * s
        rx, ry = 0.5 * self.width * -s, 0.5 * self.width * c
        cx, cy = self.center
        return np.array(
            [
                [cx + fx + rx, cy + fy + ry],
                [cx + fx - rx, cy + fy - ry],
                [cx - fx - rx, cy - fy - ry],
                [cx - fx + rx, cy - fy + ry],
            ]
        )

    def circumradius(self) -> float:
        return 0.5 * math.hypot(self.length, self.width)


@dataclass
class Disc:
    center: np.ndarray
    radius: float


def _point_rect_distance(p: np.ndarray, rect: Rect) -> float:
    """Distance from a point to a filled oriented rectangle (0 inside)."""
    c, s = math.cos(rect.heading), math.sin(rect.heading)
    rel = p - rect.center
    lx = rel[0] * c + rel[1] * s
    ly = -rel[0] * s + rel[1] * c
    dx = max(abs(lx) - 0.5 * rect.length, 0.0)
    dy = max(abs(ly) - 0.5 * rect.width, 0.0)
    return math.hypot(dx, dy)


def _rects_overlap(a: Rect, b: Rect) -> bool:
    # quick reject on bounding circles
    gap = np.linalg.norm(a.center - b.center)
    if gap > a.circumradius() + b.circumradius():
        return False
    ca, cb = a.corners(), b.corners()
    for rect in (a, b):
        c, s = math.cos(rect.heading), math.sin(rect.heading)
        for ax in ((c, s), (-s, c)):
            pa = ca @ ax
            pb = cb @ ax
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False  # separating axis: no contact
    return True


def _min_vertex_edge_distance(verts: np.ndarray, other: np.ndarray) -> float:
    best = math.inf
    n = len(other)
    for v in verts:
        for k in range(n):
            a = other[k]
            d = other[(k + 1) % n] - a
            L2 = float(d @ d)
            t = 0.0 if L2 == 0.0 else min(max(float((v - a) @ d) / L2, 0.0), 1.0)
            best = min(best, float(np.linalg.norm(v - (a + t * d))))
    return best


def footprints_overlap(a, b) -> bool:
    if isinstance(a, Disc) and isinstance(b, Disc):
        return float(np.linalg.norm(a.center - b.center)) < a.radius + b.radius
    if isinstance(a, Disc):
        return _point_rect_distance(a.center, b) < a.radius
    if isinstance(b, Disc):
        return _point_rect_distance(b.center, a) < b.radius
    return _rects_overlap(a, b)


def footprint_distance(a, b) -> float:
    """Surface gap between two footprints; exactly 0.0 when touching or
    overlapping."""
    if isinstance(a, Disc) and isinstance(b, Disc):
        return max(float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius, 0.0)
    if isinstance(a, Disc):
        return max(_point_rect_distance(a.center, b) - a.radius, 0.0)
    if isinstance(b, Disc):
        return max(_point_rect_distance(b.center, a) - b.radius, 0.0)
    if _rects_overlap(a, b):
        return 0.0
    ca, cb = a.corners(), b.corners()
    return min(_min_vertex_edge_distance(ca, cb), _min_vertex_edge_distance(cb, ca))
