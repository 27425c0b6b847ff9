"""``potloc`` command line: forward, solve and sweep subcommands.

Each subcommand reads a JSON experiment config and writes a CSV whose
``#`` header echoes the config and carries summary key/value lines.

Exit status: 0 success, 2 validation error, 3 solver non-convergence,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .assembly import assemble_matrix
from .config import ExperimentConfig, load_config
from .errors import DomainError, NonConvergenceError, SingularityError, ValidationError
from .forward import ObservationSet, perturb, synthesize_observations
from .geometry import ellipse_observation_points, rectangle_boundary_segments
from .nndd import layer_mass, mass_sweep_argmax, sweep
from .solvers import (Solver, choose_alpha_discrepancy,
                      solve_lsq, solve_nnls, solve_tikhonov)

log = logging.getLogger("potloc")

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGENCE, EXIT_IO = 0, 2, 3, 4


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    return format(float(x), ".17g")


class CsvOut:
    """Collects comment lines and rows, then writes them in one go."""

    def __init__(self, kind: str, config: ExperimentConfig):
        self.comments = [f"potloc {kind}", f"config: {config.echo()}"]
        self.header = None
        self.rows = []

    def summary(self, key, value):
        value = value if isinstance(value, str) else fmt(value)
        self.comments.append(f"{key}: {value}")

    def text(self) -> str:
        buf = io.StringIO()
        for line in self.comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def write(self, path):
        Path(path).write_text(self.text())
        log.info("wrote %s", path)


def observations_for(config: ExperimentConfig) -> tuple[ObservationSet, np.ndarray | None]:
    """Exact observations and, if noise is configured, the perturbed values."""
    points = ellipse_observation_points(config.ellipse)
    exact = synthesize_observations(config.disks, points)
    noisy = perturb(exact.values, config.noise) if config.noise else None
    return exact, noisy


def run_forward(config: ExperimentConfig, out) -> int:
    exact, noisy = observations_for(config)
    csv_out = CsvOut("forward", config)
    csv_out.summary("num_points", len(exact))
    csv_out.header = ["i", "x1", "x2", "phi"] + (["f_noisy"] if noisy is not None else [])
    for i, ((x1, x2), phi) in enumerate(zip(exact.points, exact.values)):
        row = [i, x1, x2, phi]
        if noisy is not None:
            row.append(noisy[i])
        csv_out.rows.append(row)
    csv_out.write(out)
    return EXIT_OK


def _noise_level(config: ExperimentConfig, exact: ObservationSet) -> float:
    if config.discrepancy.noise_level is not None:
        return float(config.discrepancy.noise_level)
    if config.noise is None or config.noise.delta == 0:
        raise ValidationError(
            "discrepancy principle needs a noise level: set 'noise' or "
            "'discrepancy.noise_level'")
    spread = float(np.std(exact.values, ddof=1)) if len(exact) > 1 else 0.0
    return config.noise.delta * spread * math.sqrt(len(exact))


def run_solve(config: ExperimentConfig, out) -> int:
    exact, noisy = observations_for(config)
    f = exact.values if noisy is None else noisy
    contour = rectangle_boundary_segments(config.window)
    A = assemble_matrix(exact.points, contour)

    csv_out = CsvOut("solve", config)
    csv_out.header = ["j", "arc_position", "y1", "y2", "length", "density"]
    alpha = config.alpha
    if config.solver is Solver.LSQ:
        result = solve_lsq(A, f)
    elif config.solver is Solver.TIKHONOV:
        if alpha is None:
            eps = _noise_level(config, exact)
            choice = choose_alpha_discrepancy(A, f, eps, config.discrepancy.tau)
            csv_out.summary("discrepancy_target", config.discrepancy.tau * eps)
            csv_out.summary("discrepancy_status", choice.status)
            alpha = choice.alpha
        result = solve_tikhonov(A, f, alpha)
    else:
        try:
            result = solve_nnls(A, f, config.nnls)
        except NonConvergenceError as exc:
            log.error("%s", exc)
            v = exc.x
            r = float(np.linalg.norm(A @ v - f))
            csv_out.summary("status", "nonconvergence")
            csv_out.summary("kkt_violation", exc.kkt_violation)
            csv_out.summary("residual_norm", r)
            csv_out.summary("iterations", exc.iterations)
            _density_rows(csv_out, contour, v)
            csv_out.write(out)
            return EXIT_NONCONVERGENCE

    csv_out.summary("status", "ok")
    csv_out.summary("solver", result.solver.value)
    csv_out.summary("alpha", result.alpha)
    csv_out.summary("residual_norm", result.residual_norm)
    csv_out.summary("relative_residual", result.relative_residual)
    csv_out.summary("mass", layer_mass(result.density, contour))
    csv_out.summary("sign_changes", result.sign_changes)
    csv_out.summary("iterations", result.iterations)
    _density_rows(csv_out, contour, result.density)
    csv_out.write(out)
    return EXIT_OK


def _density_rows(csv_out: CsvOut, contour, v):
    arc = contour.arc_positions()
    for j, ((y1, y2), length) in enumerate(zip(contour.centers, contour.lengths)):
        csv_out.rows.append([j, arc[j], y1, y2, length, v[j]])


def run_sweep(config: ExperimentConfig, out) -> int:
    if config.sweep is None:
        raise ValidationError("config has no 'sweep' section")
    exact, noisy = observations_for(config)
    obs = exact if noisy is None else exact.with_values(noisy)
    csv_out = CsvOut("sweep", config)
    csv_out.header = ["x0", "residual_norm", "relative_residual", "mass", "iterations"]
    try:
        report = sweep(obs, config.sweep, ellipse=config.ellipse)
    except NonConvergenceError as exc:
        log.error("%s", exc)
        for rec in getattr(exc, "partial_records", ()):
            csv_out.rows.append([rec.x0, rec.residual_norm, rec.relative_residual,
                                 rec.mass, rec.iterations])
        csv_out.summary("status", "nonconvergence")
        csv_out.summary("failed_x0", getattr(exc, "x0", None))
        csv_out.write(out)
        return EXIT_NONCONVERGENCE

    lo, hi = report.plateau_bounds
    csv_out.summary("status", "ok")
    csv_out.summary("best_x0", report.best_x0)
    csv_out.summary("plateau_min", lo)
    csv_out.summary("plateau_max", hi)
    csv_out.summary("plateau", " ".join(fmt(x) for x in report.plateau))
    csv_out.summary("mass_argmax", mass_sweep_argmax(report))
    for rec in report.records:
        csv_out.rows.append([rec.x0, rec.residual_norm, rec.relative_residual,
                             rec.mass, rec.iterations])
    csv_out.write(out)
    return EXIT_OK


COMMANDS = {"forward": run_forward, "solve": run_solve, "sweep": run_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="potloc",
        description="Localize 2D potential sources with nonnegative single layers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output CSV (overrides output_path)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        out = args.out or config.output_path
        if not out:
            raise ValidationError("no output path: pass --out or set output_path")
        return COMMANDS[args.command](config, out)
    except (ValidationError, DomainError, SingularityError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except NonConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
