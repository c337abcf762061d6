"""Oriented-rectangle overlap and segment occlusion tests.

All tests treat rectangles and segments as closed sets: touching counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Absolute slack used for the closed-set comparisons (metres).
EPS = 1e-9


@dataclass(frozen=True)
class OrientedRect:
    center: tuple[float, float]
    half_extents: tuple[float, float]  # (along heading, across heading)
    heading: float = 0.0

    def __post_init__(self):
        if self.half_extents[0] <= 0 or self.half_extents[1] <= 0:
            raise ValueError(f"half extents must be positive, got {self.half_extents}")

    @classmethod
    def from_footprint(cls, center, length, width, heading=0.0):
        return cls((center[0], center[1]), (0.5 * length, 0.5 * width), heading)

    @property
    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c, s = math.cos(self.heading), math.sin(self.heading)
        return (c, s), (-s, c)

    def corners(self) -> list[tuple[float, float]]:
        (ux, uy), (wx, wy) = self.axes
        hx, hy = self.half_extents
        cx, cy = self.center
        return [
            (cx + sx * hx * ux + sy * hy * wx, cy + sx * hx * uy + sy * hy * wy)
            for sx, sy in ((1, 1), (1, -1), (-1, -1), (-1, 1))
        ]

    @property
    def bounding_radius(self) -> float:
        return math.hypot(*self.half_extents)

    def to_local(self, p) -> tuple[float, float]:
        (ux, uy), (wx, wy) = self.axes
        dx, dy = p[0] - self.center[0], p[1] - self.center[1]
        return dx * ux + dy * uy, dx * wx + dy * wy


def _project(corners, axis):
    dots = [px * axis[0] + py * axis[1] for px, py in corners]
    return min(dots), max(dots)


def obb_overlap(a: OrientedRect, b: OrientedRect) -> bool:
    """Separating-axis test over the two edge normals of each rectangle."""
    dx = a.center[0] - b.center[0]
    dy = a.center[1] - b.center[1]
    reach = a.bounding_radius + b.bounding_radius + EPS
    if dx * dx + dy * dy > reach * reach:
        return False
    ca, cb = a.corners(), b.corners()
    for axis in (*a.axes, *b.axes):
        lo_a, hi_a = _project(ca, axis)
        lo_b, hi_b = _project(cb, axis)
        if hi_a < lo_b - EPS or hi_b < lo_a - EPS:
            return False
    return True


def segment_hits_rect(p0, p1, r: OrientedRect) -> bool:
    """True iff the closed segment p0-p1 meets the closed rectangle r.

    Liang-Barsky clipping in the rectangle's own frame.
    """
    x0, y0 = r.to_local(p0)
    x1, y1 = r.to_local(p1)
    hx, hy = r.half_extents
    dx, dy = x1 - x0, y1 - y0
    t_lo, t_hi = 0.0, 1.0
    for p, q in ((-dx, x0 + hx), (dx, hx - x0), (-dy, y0 + hy), (dy, hy - y0)):
        if p == 0.0:
            if q < -EPS:
                return False
            continue
        t = q / p
        if p < 0:
            if t > t_hi + EPS:
                return False
            t_lo = max(t_lo, t)
        else:
            if t < t_lo - EPS:
                return False
            t_hi = min(t_hi, t)
    return t_lo <= t_hi + EPS
