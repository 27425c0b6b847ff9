"""Synthetic observation data from uniform disk sources.

A uniform disk of density ``rho`` and radius ``r`` produces, outside
itself, exactly the potential of a point mass ``rho*pi*r**2`` at its
centre (mean-value property of the logarithmic kernel). That closed form
generates the data; ``volume_quadrature_oracle`` integrates the area
integral directly and is used only to check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .geometry import Point2, _as_point

_INV_2PI = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class SourceDisk:
    center: Point2
    radius: float
    density: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValidationError(f"disk radius must be positive, got {self.radius}")
        if not (self.density >= 0 and math.isfinite(self.density)):
            raise ValidationError(
                f"disk density must be finite and nonnegative, got {self.density}")

    @property
    def mass(self) -> float:
        return self.density * math.pi * self.radius ** 2


@dataclass(frozen=True)
class ObservationSet:
    """Observation points on the measurement contour and the potential there."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(points) != len(values):
            raise ValidationError(
                f"{len(points)} points but {len(values)} values")
        if not np.all(np.isfinite(values)):
            raise ValidationError("observation values must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def with_values(self, values) -> "ObservationSet":
        return ObservationSet(self.points, values)


@dataclass(frozen=True)
class NoiseSpec:
    delta: float
    seed: int = 0

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ValidationError(f"noise amplitude must be >= 0, got {self.delta}")
        if int(self.seed) != self.seed:
            raise ValidationError(f"seed must be an integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))


def paper_disks() -> list[SourceDisk]:
    """The two-disk test configuration: r=0.1 at (-0.2, 0), r=0.05 at (0.2, -0.2)."""
    return [
        SourceDisk(Point2(-0.2, 0.0), 0.1, 1.0),
        SourceDisk(Point2(0.2, -0.2), 0.05, 1.0),
    ]


def _distances(disk: SourceDisk, points: np.ndarray) -> np.ndarray:
    return np.hypot(points[:, 0] - disk.center.x1, points[:, 1] - disk.center.x2)


def disk_potential_exterior(disk: SourceDisk, x) -> float:
    """Potential of a uniform disk at a point on or outside its rim.

    Raises
    ------
    DomainError
        If ``x`` is strictly inside the disk.
    """
    x = _as_point(x)
    d = math.hypot(x.x1 - disk.center.x1, x.x2 - disk.center.x2)
    if d < disk.radius:
        raise DomainError(
            f"point {tuple(x)} lies inside the disk centred at "
            f"{tuple(disk.center)} (distance {d} < radius {disk.radius})")
    return -(disk.density * disk.radius * disk.radius) * 0.5 * math.log(d)


def volume_quadrature_oracle(disk: SourceDisk, x, resolution: int) -> float:
    """Integrate ``rho * G(x, y)`` over the disk with a polar midpoint rule.

    The disk is cut into ``resolution`` radial rings times ``resolution``
    angular sectors; each cell contributes the integrand at its
    (r, theta) midpoint times ``r * dr * dtheta``.

    Only meant as a slow independent check of the closed form.
    """
    x = _as_point(x)
    if int(resolution) != resolution or resolution < 8:
        raise ValidationError(f"resolution must be an integer >= 8, got {resolution}")
    n = int(resolution)
    d = math.hypot(x.x1 - disk.center.x1, x.x2 - disk.center.x2)
    if d <= disk.radius:
        raise DomainError(
            f"quadrature oracle needs a strictly exterior point, got distance "
            f"{d} for radius {disk.radius}")
    if disk.density == 0.0:
        return 0.0

    dr = disk.radius / n
    dtheta = 2.0 * math.pi / n
    r = (np.arange(n) + 0.5) * dr
    theta = (np.arange(n) + 0.5) * dtheta
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    rx = x.x1 - disk.center.x1
    ry = x.x2 - disk.center.x2

    ring_sums = np.empty(n)
    # one row of rings at a time keeps memory at O(n) per ring block
    block = max(1, 2 ** 22 // n)
    for start in range(0, n, block):
        rr = r[start:start + block, None]
        dx = rx - rr * cos_t
        dy = ry - rr * sin_t
        # ln|x-y| = 0.5 * ln(dx^2 + dy^2)
        ring_sums[start:start + block] = 0.5 * np.log(dx * dx + dy * dy).sum(axis=1)
    total = np.dot(ring_sums, r) * dr * dtheta
    return -disk.density * _INV_2PI * total


def synthesize_observations(disks: Sequence[SourceDisk], points) -> ObservationSet:
    """Exact potential of a collection of disks at the given points.

    Raises
    ------
    DomainError
        If any point falls strictly inside any disk; the message names the
        first offending point index.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    values = np.zeros(len(pts))
    for k, disk in enumerate(disks):
        d = _distances(disk, pts)
        inside = np.flatnonzero(d < disk.radius)
        if inside.size:
            i = int(inside[0])
            raise DomainError(
                f"observation point {i} at {tuple(pts[i])} lies inside disk {k}")
        values += -(disk.density * disk.radius * disk.radius) * 0.5 * np.log(d)
    return ObservationSet(pts, values)


def box_muller_normals(n: int, seed: int) -> np.ndarray:
    """``n`` standard normal draws via the Box-Muller transform.

    Uniforms come from numpy's PCG64 generator seeded with ``seed``; pairs
    ``(u1, u2)`` map to ``sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)`` and
    are interleaved cosine-first.
    """
    if n < 0:
        raise ValidationError("n must be nonnegative")
    pairs = (n + 1) // 2
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((pairs, 2))
    # random() is in [0, 1); 1 - u is in (0, 1] so the log is finite
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * math.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:n]


def perturb(values, noise: NoiseSpec) -> np.ndarray:
    """Add scaled Gaussian noise: ``f + delta * std(f) * sigma``.

    ``std`` is the sample standard deviation (divisor ``n - 1``; zero for a
    single value). The seed in ``noise`` fully determines ``sigma``.
    """
    f = np.asarray(values, dtype=float).reshape(-1)
    if f.size == 0:
        raise ValidationError("cannot perturb an empty vector")
    if not np.all(np.isfinite(f)):
        raise ValidationError("values must be finite")
    if noise.delta == 0.0:
        return f.copy()
    spread = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
    return f + (noise.delta * spread) * box_muller_normals(f.size, noise.seed)
