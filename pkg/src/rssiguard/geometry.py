"""Polygons with optional holes: area, containment, uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def _ring(points) -> np.ndarray:
    ring = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring


def _shoelace(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, optionally with holes, under the even-odd rule."""

    outer: np.ndarray
    holes: tuple = field(default=())

    def __post_init__(self):
        outer = _ring(self.outer)
        holes = tuple(_ring(h) for h in self.holes)
        for ring in (outer, *holes):
            if len(ring) < 3 or not np.all(np.isfinite(ring)):
                raise ValidationError("polygon rings need at least 3 finite vertices")
            perimeter = float(np.sum(np.hypot(*np.diff(np.vstack([ring, ring[:1]]), axis=0).T)))
            if abs(_shoelace(ring)) <= 1e-14 * perimeter**2:
                raise ValidationError("degenerate polygon ring (zero area)")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)

    @classmethod
    def regular(cls, center, radius: float, sides: int = 256) -> "Polygon":
        theta = 2.0 * np.pi * np.arange(sides) / sides
        return cls(np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)]))

    @classmethod
    def annulus(cls, center, inner: float, outer: float, sides: int = 256) -> "Polygon":
        return cls(cls.regular(center, outer, sides).outer, (cls.regular(center, inner, sides).outer,))

    @property
    def area(self) -> float:
        return abs(_shoelace(self.outer)) - sum(abs(_shoelace(h)) for h in self.holes)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.outer.min(axis=0)
        hi = self.outer.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        inside = np.zeros(len(pts), dtype=bool)
        for ring in (self.outer, *self.holes):
            inside ^= _crossings_odd(ring, pts)
        return inside

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` points uniformly from the polygon by rejection."""
        x0, y0, x1, y1 = self.bounds
        frac = max(self.area / ((x1 - x0) * (y1 - y0)), 1e-6)
        out = []
        have = 0
        while have < n:
            batch = int(min(max((n - have) / frac * 1.2, 64), 1 << 22))
            cand = np.column_stack([rng.uniform(x0, x1, batch), rng.uniform(y0, y1, batch)])
            cand = cand[self.contains(cand)]
            out.append(cand)
            have += len(cand)
        return np.vstack(out)[:n]


def _crossings_odd(ring: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0:1], pts[:, 1:2]
    xa, ya = ring[:, 0], ring[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = xa + (y - ya) * (xb - xa) / (yb - ya)
    return np.count_nonzero(straddle & (x < x_cross), axis=1) % 2 == 1
