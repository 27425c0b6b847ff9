"""JSON experiment configuration."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .forward import NoiseSpec, SourceDisk
from .geometry import EllipseSpec, Point2, RectangleSpec
from .nndd import SweepConfig
from .solvers import NnlsOptions, Solver

DEFAULT_X0_GRID = {"start": -0.6, "stop": 0.6, "step": 0.05}


@dataclass(frozen=True)
class DiscrepancySettings:
    tau: float = 1.0
    # explicit estimate of ||f_noisy - f||; derived from the noise spec if None
    noise_level: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    ellipse: EllipseSpec
    disks: tuple
    window: RectangleSpec
    noise: NoiseSpec | None = None
    solver: Solver = Solver.NNLS
    alpha: float | None = None
    discrepancy: DiscrepancySettings | None = None
    nnls: NnlsOptions = NnlsOptions()
    sweep: SweepConfig | None = None
    output_path: str | None = None
    raw: dict | None = None

    def __post_init__(self):
        if self.solver is Solver.TIKHONOV and self.alpha is None \
                and self.discrepancy is None:
            raise ValidationError(
                "Tikhonov solver needs either 'alpha' or 'discrepancy' settings")
        if self.alpha is not None and not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")

    def echo(self) -> str:
        """Canonical one-line JSON of the config, without the output path."""
        raw = dict(self.raw or {})
        raw.pop("output_path", None)
        return json.dumps(raw, sort_keys=True, separators=(",", ":"))


def _take(section: dict, name: str, allowed: set) -> dict:
    if not isinstance(section, dict):
        raise ValidationError(f"'{name}' must be a JSON object")
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in '{name}': {sorted(unknown)}")
    return section


def _point(value, name) -> Point2:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ValidationError(f"'{name}' must be a pair [x1, x2]")
    return Point2(float(value[0]), float(value[1]))


def _x0_values(section: dict) -> tuple:
    if "x0_values" in section and "x0_grid" in section:
        raise ValidationError("give either 'x0_values' or 'x0_grid', not both")
    if "x0_values" in section:
        return tuple(float(x) for x in section["x0_values"])
    grid = _take(section.get("x0_grid", DEFAULT_X0_GRID), "sweep.x0_grid",
                 {"start", "stop", "step"})
    start, stop, step = (float(grid[k]) for k in ("start", "stop", "step"))
    if not step > 0 or stop < start:
        raise ValidationError("x0_grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps grid values such as 0.05*k free of representation noise
    return tuple(float(np.round(start + k * step, 12)) for k in range(count))


def parse_config(raw: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from decoded JSON."""
    top = _take(raw, "config", {
        "ellipse", "disks", "window", "noise", "solver", "alpha",
        "discrepancy", "nnls", "sweep", "output_path"})
    try:
        e = _take(top.get("ellipse", {}), "ellipse",
                  {"center", "semi_axis_a", "semi_axis_b", "num_points"})
        ellipse = EllipseSpec(
            center=_point(e.get("center", [0.0, 0.0]), "ellipse.center"),
            semi_axis_a=float(e.get("semi_axis_a", 2.0)),
            semi_axis_b=float(e.get("semi_axis_b", 1.0)),
            num_points=e.get("num_points", 100),
        )

        disks = []
        for k, d in enumerate(top.get("disks", [])):
            d = _take(d, f"disks[{k}]", {"center", "radius", "density"})
            disks.append(SourceDisk(_point(d["center"], f"disks[{k}].center"),
                                    float(d["radius"]),
                                    float(d.get("density", 1.0))))

        w = _take(top.get("window", {}), "window",
                  {"center", "width", "height", "n_horizontal", "n_vertical"})
        window = RectangleSpec(
            center=_point(w.get("center", [0.0, 0.0]), "window.center"),
            width=float(w.get("width", 1.0)),
            height=float(w.get("height", 1.0)),
            n_horizontal=w.get("n_horizontal", 50),
            n_vertical=w.get("n_vertical", 50),
        )

        noise = None
        if top.get("noise") is not None:
            nz = _take(top["noise"], "noise", {"delta", "seed"})
            noise = NoiseSpec(float(nz["delta"]), nz.get("seed", 0))

        try:
            solver = Solver(top.get("solver", "NNLS"))
        except ValueError:
            raise ValidationError(
                f"solver must be one of {[s.value for s in Solver]}") from None

        disc = None
        if top.get("discrepancy") is not None:
            ds = _take(top["discrepancy"], "discrepancy", {"tau", "noise_level"})
            disc = DiscrepancySettings(float(ds.get("tau", 1.0)),
                                       ds.get("noise_level"))

        nn = _take(top.get("nnls") or {}, "nnls",
                   {"kkt_tolerance", "max_iterations", "inner_tolerance"})
        nnls = NnlsOptions(nn.get("kkt_tolerance"), nn.get("max_iterations"),
                           float(nn.get("inner_tolerance", 1e-12)))

        sweep = None
        if top.get("sweep") is not None:
            sw = _take(top["sweep"], "sweep", {
                "window_width", "window_height", "n_horizontal", "n_vertical",
                "x0_values", "x0_grid", "y0", "plateau_tolerance"})
            sweep = SweepConfig(
                window_width=float(sw.get("window_width", window.width)),
                window_height=float(sw.get("window_height", window.height)),
                n_horizontal=sw.get("n_horizontal", window.n_horizontal),
                n_vertical=sw.get("n_vertical", window.n_vertical),
                x0_values=_x0_values(sw),
                y0=float(sw.get("y0", 0.0)),
                solver_options=nnls,
                plateau_tolerance=float(sw.get("plateau_tolerance", 0.10)),
            )

        alpha = top.get("alpha")
        return ExperimentConfig(
            ellipse=ellipse, disks=tuple(disks), window=window, noise=noise,
            solver=solver, alpha=None if alpha is None else float(alpha),
            discrepancy=disc, nnls=nnls, sweep=sweep,
            output_path=top.get("output_path"), raw=raw,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed config: {exc!r}") from exc


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(raw)
