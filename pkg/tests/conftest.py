import numpy as np
import pytest

from potloc import (EllipseSpec, Point2, RectangleSpec, assemble_matrix,
                    ellipse_observation_points, paper_disks,
                    rectangle_boundary_segments, synthesize_observations)

PAPER_ELLIPSE = EllipseSpec(Point2(0.0, 0.0), 2.0, 1.0, 100)


def paper_window(x0=0.0, n=50, width=1.0, height=1.0):
    return RectangleSpec(Point2(x0, 0.0), width, height, n, n)


@pytest.fixture(scope="session")
def paper_obs():
    points = ellipse_observation_points(PAPER_ELLIPSE)
    return synthesize_observations(paper_disks(), points)


@pytest.fixture(scope="session")
def paper_system(paper_obs):
    contour = rectangle_boundary_segments(paper_window())
    return assemble_matrix(paper_obs.points, contour), paper_obs.values, contour


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
