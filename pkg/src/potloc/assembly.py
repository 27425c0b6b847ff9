"""Logarithmic kernel and midpoint-rule system matrix."""
from __future__ import annotations

import math

import numpy as np

from .errors import SingularityError, ValidationError
from .geometry import DiscretizedContour, _as_point

SINGULAR_DISTANCE = 1e-14


def log_kernel(x, y) -> float:
    """Fundamental solution of the 2D Laplacian, ``-ln|x - y| / (2 pi)``."""
    x, y = _as_point(x), _as_point(y)
    d = math.hypot(x.x1 - y.x1, x.x2 - y.x2)
    if d < SINGULAR_DISTANCE:
        raise SingularityError(f"kernel evaluated at coincident points {x} and {y}")
    return -math.log(d) / (2.0 * math.pi)


def assemble_matrix(observations, contour: DiscretizedContour) -> np.ndarray:
    """Dense matrix with entries ``|S_j| * G(x_i, y_j)``.

    Parameters
    ----------
    observations : array_like, shape (M, 2)
        Observation points ``x_i``.
    contour : DiscretizedContour
        Segments with midpoints ``y_j`` and lengths ``|S_j|``.

    Returns
    -------
    ndarray, shape (M, N)

    Raises
    ------
    SingularityError
        If an observation point sits on a segment midpoint.
    """
    x = np.asarray(observations, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2 or len(x) == 0:
        raise ValidationError(f"observations must have shape (M, 2), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("observation points must be finite")
    y = contour.centers
    d = np.hypot(x[:, None, 0] - y[None, :, 0], x[:, None, 1] - y[None, :, 1])
    hit = np.argwhere(d < SINGULAR_DISTANCE)
    if hit.size:
        i, j = (int(k) for k in hit[0])
        raise SingularityError(
            f"observation point {i} coincides with segment centre {j}")
    # -ln(d)/(2 pi) scaled column-wise by the segment lengths
    return (-np.log(d) / (2.0 * math.pi)) * contour.lengths[None, :]
