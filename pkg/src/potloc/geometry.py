"""Observation contour and window boundary discretization.

The observation contour is an ellipse sampled at uniform parameter angle.
The candidate window is an axis-aligned rectangle whose sides are split
into equal segments; each segment is represented by its midpoint and
length (one-point quadrature support).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ValidationError


class Point2(NamedTuple):
    x1: float
    x2: float


class Segment(NamedTuple):
    center: Point2
    length: float


def _as_point(p) -> Point2:
    try:
        x1, x2 = (float(c) for c in p)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"expected a 2D point, got {p!r}") from exc
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise ValidationError(f"point coordinates must be finite, got {p!r}")
    return Point2(x1, x2)


@dataclass(frozen=True)
class DiscretizedContour:
    """Ordered boundary segments.

    Attributes
    ----------
    centers : ndarray, shape (N, 2)
        Segment midpoints.
    lengths : ndarray, shape (N,)
        Segment lengths, all positive.
    """

    centers: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        if len(lengths) == 0:
            raise ValidationError("contour must have at least one segment")
        if len(centers) != len(lengths):
            raise ValidationError(
                f"{len(centers)} centers but {len(lengths)} lengths")
        if not np.all(np.isfinite(centers)):
            raise ValidationError("segment centers must be finite")
        if not np.all(lengths > 0) or not np.all(np.isfinite(lengths)):
            raise ValidationError("segment lengths must be finite and positive")
        centers.setflags(write=False)
        lengths.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "lengths", lengths)

    def __len__(self) -> int:
        return len(self.lengths)

    def __iter__(self) -> Iterator[Segment]:
        for (c1, c2), length in zip(self.centers, self.lengths):
            yield Segment(Point2(float(c1), float(c2)), float(length))

    @property
    def segments(self) -> list[Segment]:
        return list(self)

    @property
    def total_length(self) -> float:
        return math.fsum(self.lengths)

    def arc_positions(self) -> np.ndarray:
        """Arc-length coordinate of each segment midpoint along the contour."""
        ends = np.cumsum(self.lengths)
        return ends - 0.5 * self.lengths


@dataclass(frozen=True)
class EllipseSpec:
    """Ellipse ``((x1-c1)/a)**2 + ((x2-c2)/b)**2 = 1`` sampled at ``num_points`` angles."""

    center: Point2 = Point2(0.0, 0.0)
    semi_axis_a: float = 2.0
    semi_axis_b: float = 1.0
    num_points: int = 100

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not (self.semi_axis_a > 0 and self.semi_axis_b > 0):
            raise ValidationError(
                f"semi-axes must be positive, got a={self.semi_axis_a}, "
                f"b={self.semi_axis_b}")
        if not math.isfinite(self.semi_axis_a * self.semi_axis_b):
            raise ValidationError("semi-axes must be finite")
        if int(self.num_points) != self.num_points or self.num_points < 1:
            raise ValidationError(
                f"num_points must be an integer >= 1, got {self.num_points}")
        object.__setattr__(self, "num_points", int(self.num_points))

    def contains(self, points) -> np.ndarray:
        """True where a point lies strictly inside the ellipse."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        u = (p[:, 0] - self.center.x1) / self.semi_axis_a
        w = (p[:, 1] - self.center.x2) / self.semi_axis_b
        return u * u + w * w < 1.0


@dataclass(frozen=True)
class RectangleSpec:
    """Axis-aligned rectangle centred at ``center`` with N1 segments per
    horizontal side and N2 per vertical side."""

    center: Point2 = Point2(0.0, 0.0)
    width: float = 1.0
    height: float = 1.0
    n_horizontal: int = 50
    n_vertical: int = 50

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(
                f"width and height must be positive, got {self.width}x{self.height}")
        if not math.isfinite(self.width * self.height):
            raise ValidationError("width and height must be finite")
        for name in ("n_horizontal", "n_vertical"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {n}")
            object.__setattr__(self, name, int(n))

    @property
    def num_segments(self) -> int:
        return 2 * (self.n_horizontal + self.n_vertical)

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.width + self.height)

    def moved_to(self, x0: float, y0: float) -> "RectangleSpec":
        return RectangleSpec(Point2(x0, y0), self.width, self.height,
                             self.n_horizontal, self.n_vertical)


def ellipse_observation_points(spec: EllipseSpec) -> np.ndarray:
    """Sample the ellipse at uniform parameter angle.

    Point ``i`` sits at angle ``2*pi*i/M``, starting on the positive
    ``x1`` semi-axis and running counterclockwise.

    Returns
    -------
    ndarray, shape (M, 2)
    """
    if not isinstance(spec, EllipseSpec):
        raise ValidationError("expected an EllipseSpec")
    m = spec.num_points
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = np.empty((m, 2))
    pts[:, 0] = spec.center.x1 + spec.semi_axis_a * np.cos(theta)
    pts[:, 1] = spec.center.x2 + spec.semi_axis_b * np.sin(theta)
    return pts


def _side_offsets(extent: float, n: int, reverse: bool) -> np.ndarray:
    # midpoints of n equal sub-intervals of [-extent/2, extent/2]
    k = np.arange(n)
    if reverse:
        k = k[::-1]
    return (k + 0.5) * (extent / n) - 0.5 * extent


def rectangle_boundary_segments(spec: RectangleSpec) -> DiscretizedContour:
    """Split the rectangle boundary into ``2*(N1 + N2)`` segments.

    Segments run counterclockwise starting from the bottom-left corner:
    bottom (left to right), right (upwards), top (right to left), left
    (downwards). No segment straddles a corner.
    """
    if not isinstance(spec, RectangleSpec):
        raise ValidationError("expected a RectangleSpec")
    w, h = spec.width, spec.height
    n1, n2 = spec.n_horizontal, spec.n_vertical
    hw, hh = 0.5 * w, 0.5 * h

    # offsets from the centre; the centre is added last so that moving the
    # window shifts every midpoint by the same amount
    offsets = np.concatenate([
        np.column_stack([_side_offsets(w, n1, False), np.full(n1, -hh)]),
        np.column_stack([np.full(n2, hw), _side_offsets(h, n2, False)]),
        np.column_stack([_side_offsets(w, n1, True), np.full(n1, hh)]),
        np.column_stack([np.full(n2, -hw), _side_offsets(h, n2, True)]),
    ])
    centers = offsets + np.array(spec.center)
    lengths = np.concatenate([
        np.full(n1, w / n1), np.full(n2, h / n2),
        np.full(n1, w / n1), np.full(n2, h / n2),
    ])
    return DiscretizedContour(centers, lengths)
