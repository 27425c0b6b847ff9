"""Window sweep for source localization (Nonnegative Density Domain).

For each candidate window position a nonnegative single-layer density on
the window boundary is fitted to the observations. Windows that contain
all sources reproduce the data (residual plateau); windows that cut a
source off do not. The fitted layer mass is reported alongside.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .assembly import assemble_matrix
from .errors import PotlocError, ValidationError
from .forward import ObservationSet
from .geometry import (DiscretizedContour, EllipseSpec, Point2, RectangleSpec,
                       rectangle_boundary_segments)
from .solvers import NnlsOptions, solve_nnls

DEFAULT_PLATEAU_TOLERANCE = 0.10


@dataclass(frozen=True)
class SweepConfig:
    window_width: float = 1.0
    window_height: float = 1.0
    n_horizontal: int = 50
    n_vertical: int = 50
    x0_values: tuple = (-0.5, -0.25, 0.0, 0.25, 0.5)
    y0: float = 0.0
    solver_options: NnlsOptions = field(default_factory=NnlsOptions)
    plateau_tolerance: float = DEFAULT_PLATEAU_TOLERANCE

    def __post_init__(self):
        xs = tuple(float(x) for x in self.x0_values)
        if not xs:
            raise ValidationError("x0_values must be nonempty")
        if not all(math.isfinite(x) for x in xs):
            raise ValidationError("x0_values must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("x0_values must be strictly increasing")
        object.__setattr__(self, "x0_values", xs)
        if not math.isfinite(self.y0):
            raise ValidationError("y0 must be finite")
        if not self.plateau_tolerance >= 0:
            raise ValidationError("plateau_tolerance must be >= 0")
        # builds and validates the window geometry
        self.window(xs[0])

    def window(self, x0: float) -> RectangleSpec:
        return RectangleSpec(Point2(x0, self.y0), self.window_width,
                             self.window_height, self.n_horizontal,
                             self.n_vertical)

    def check_inside(self, ellipse: EllipseSpec) -> None:
        """Every window's segment centres must lie strictly inside ``ellipse``."""
        for x0 in self.x0_values:
            centers = rectangle_boundary_segments(self.window(x0)).centers
            outside = np.flatnonzero(~ellipse.contains(centers))
            if outside.size:
                raise ValidationError(
                    f"window at x0={x0} reaches the observation contour "
                    f"(segment {int(outside[0])} at {tuple(centers[outside[0]])})")


@dataclass(frozen=True)
class SweepRecord:
    x0: float
    residual_norm: float
    relative_residual: float
    mass: float
    iterations: int


@dataclass(frozen=True)
class SweepReport:
    records: tuple
    best_x0: float
    plateau: tuple

    @property
    def x0(self) -> np.ndarray:
        return np.array([r.x0 for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual_norm for r in self.records])

    @property
    def masses(self) -> np.ndarray:
        return np.array([r.mass for r in self.records])

    @property
    def plateau_bounds(self) -> tuple[float, float]:
        return min(self.plateau), max(self.plateau)


def layer_mass(density, contour: DiscretizedContour) -> float:
    """Total layer strength ``sum_j v_j |S_j|``."""
    v = np.asarray(density, dtype=float).reshape(-1)
    if len(v) != len(contour):
        raise ValidationError(
            f"density has {len(v)} entries for {len(contour)} segments")
    return float(np.dot(v, contour.lengths))


def evaluate_window(observations: ObservationSet, window: RectangleSpec,
                    options: NnlsOptions | None = None) -> SweepRecord:
    """Fit a nonnegative layer on one window and summarize the fit."""
    x0 = window.center.x1
    try:
        contour = rectangle_boundary_segments(window)
        A = assemble_matrix(observations.points, contour)
        result = solve_nnls(A, observations.values, options)
    except PotlocError as exc:
        exc.args = (f"window x0={x0}: {exc}",) + exc.args[1:]
        exc.x0 = x0
        raise
    return SweepRecord(
        x0=x0,
        residual_norm=result.residual_norm,
        relative_residual=result.relative_residual,
        mass=layer_mass(result.density, contour),
        iterations=result.iterations,
    )


def summarize(records: Sequence[SweepRecord],
              plateau_tolerance: float = DEFAULT_PLATEAU_TOLERANCE) -> SweepReport:
    if not records:
        raise ValidationError("cannot summarize an empty sweep")
    residuals = [r.residual_norm for r in records]
    best = min(range(len(records)), key=residuals.__getitem__)
    limit = (1.0 + plateau_tolerance) * residuals[best]
    plateau = tuple(r.x0 for r in records if r.residual_norm <= limit)
    return SweepReport(tuple(records), records[best].x0, plateau)


def sweep(observations: ObservationSet, config: SweepConfig,
          ellipse: EllipseSpec | None = None, workers: int = 1) -> SweepReport:
    """Evaluate every window position in ``config.x0_values``.

    Parameters
    ----------
    observations : ObservationSet
    config : SweepConfig
    ellipse : EllipseSpec, optional
        Observation contour; when given, windows touching or crossing it
        are rejected before any solve.
    workers : int
        Number of threads; records come back in ``x0`` order regardless.

    Raises
    ------
    PotlocError
        From the first failing window. The records computed before it are
        attached as ``partial_records``.
    """
    if ellipse is not None:
        config.check_inside(ellipse)
    windows = [config.window(x0) for x0 in config.x0_values]
    opts = config.solver_options

    records = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(evaluate_window, observations, w, opts)
                       for w in windows]
            for fut in futures:
                try:
                    records.append(fut.result())
                except PotlocError as exc:
                    exc.partial_records = tuple(records)
                    raise
    else:
        for w in windows:
            try:
                records.append(evaluate_window(observations, w, opts))
            except PotlocError as exc:
                exc.partial_records = tuple(records)
                raise
    return summarize(records, config.plateau_tolerance)


def sweep_grid(observations: ObservationSet, config: SweepConfig,
               y0_values: Sequence[float], ellipse: EllipseSpec | None = None,
               workers: int = 1) -> list[SweepReport]:
    """One x0 sweep per ordinate in ``y0_values``."""
    return [sweep(observations, replace(config, y0=float(y0)), ellipse, workers)
            for y0 in y0_values]


def mass_sweep_argmax(report: SweepReport) -> float:
    """Window position with the largest fitted layer mass (smallest x0 on ties)."""
    if not report.records:
        raise ValidationError("empty sweep report")
    ordered = sorted(report.records, key=lambda r: r.x0)
    best = ordered[0]
    for rec in ordered[1:]:
        if rec.mass > best.mass:
            best = rec
    return best.x0
