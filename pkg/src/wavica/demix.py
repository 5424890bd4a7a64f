"""Demixing by minimizing the plug-in wavelet contrast over rotations.

After whitening, an unmixing matrix is a rotation. In two dimensions the
rotation angle is found by a grid search over [0, pi/2); in d dimensions the
search is repeated plane by plane (Jacobi rotations), keeping a plane rotation
only if it lowers the full d-dimensional contrast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .coordinates import as_sample
from .estimators import c2_plugin
from .wavelets import ScalingTable, WaveletSpec

DEFAULT_GRID = 90


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"mixing matrix must be square, got shape {A.shape}")
        if abs(np.linalg.det(A)) <= 1e-10:
            raise ValueError("mixing matrix is singular")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", np.linalg.inv(A))

    @property
    def d(self):
        return self.A.shape[0]


@dataclass
class DemixResult:
    W: np.ndarray
    trace: list = field(default_factory=list)
    final_contrast: float = np.nan
    whitening: np.ndarray | None = None

    @property
    def initial_contrast(self):
        return self.trace[0][3]

    @property
    def unmixing(self):
        """Rotation composed with the whitening transform, when one was applied."""
        return self.W if self.whitening is None else self.W @ self.whitening


def whiten(points):
    """Center and decorrelate: returns ``(white, T)`` with ``white = (x - mean) @ T.T``.

    ``T`` is the symmetric inverse square root of the empirical covariance,
    so already-white data come back unrotated.
    """
    x = as_sample(points, check_range=False)
    n, d = x.shape
    if n <= d:
        raise ValueError(f"whitening needs more observations than dimensions (n={n}, d={d})")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / n
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 1e-12 * max(evals[-1], 1e-300):
        raise SingularCovarianceError("empirical covariance is singular")
    T = (evecs / np.sqrt(evals)) @ evecs.T
    return xc @ T.T, T


def to_unit_cube(points):
    """Affine per-axis map of the sample onto [0, 1]^d using its min and max."""
    y = np.asarray(points, dtype=float)
    lo = y.min(axis=0)
    span = y.max(axis=0) - lo
    if np.any(span <= 0):
        raise ValueError("cannot map a sample with a constant coordinate to the unit cube")
    return np.clip((y - lo) / span, 0.0, 1.0)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def plane_rotation(d, p, q, theta):
    G = np.eye(d)
    c, s = np.cos(theta), np.sin(theta)
    G[p, p] = G[q, q] = c
    G[p, q] = -s
    G[q, p] = s
    return G


def rotated_contrast(points, theta, spec, table):
    y = np.asarray(points, dtype=float) @ rotation(theta).T
    return c2_plugin(to_unit_cube(y), spec, table).value


def contrast_profile_2d(points, spec: WaveletSpec, table: ScalingTable, grid_size=DEFAULT_GRID):
    """Plug-in contrast of ``R(theta) x`` on a uniform grid of [0, pi/2).

    Returns ``(theta_star, profile)`` where ``profile`` is a ``(grid_size, 2)``
    array of (theta, contrast) and ``theta_star`` is the first minimizer.
    """
    x = as_sample(points, check_range=False)
    if x.shape[1] != 2:
        raise ValueError(f"contrast_profile_2d needs d = 2, got d = {x.shape[1]}")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    thetas = np.arange(grid_size) * (np.pi / 2) / grid_size
    values = np.array([rotated_contrast(x, t, spec, table) for t in thetas])
    best = int(np.argmin(values))
    return float(thetas[best]), np.column_stack([thetas, values])


def _contrast(y, spec, table):
    return c2_plugin(to_unit_cube(y), spec, table).value


def jacobi_sweep(points, spec: WaveletSpec, table: ScalingTable, sweeps=1, grid_size=DEFAULT_GRID):
    """Plane-by-plane rotation search on a whitened sample.

    Each sweep visits the d(d-1)/2 coordinate planes; in each, the pairwise
    contrast is minimized over the angle grid and the plane rotation is kept
    only if it lowers the full d-dimensional contrast. Stops early when a
    sweep changes nothing.

    The trace holds ``(sweep, plane, angle, contrast)`` tuples, starting with
    ``(0, None, 0.0, initial_contrast)``.
    """
    y = as_sample(points, check_range=False)
    n, d = y.shape
    if d < 2:
        raise ValueError("jacobi_sweep needs d >= 2")
    W = np.eye(d)
    current = _contrast(y, spec, table)
    trace = [(0, None, 0.0, current)]
    for sweep in range(1, sweeps + 1):
        improved = False
        for p, q in combinations(range(d), 2):
            theta, _ = contrast_profile_2d(y[:, [p, q]], spec, table, grid_size)
            if theta == 0.0:
                continue
            G = plane_rotation(d, p, q, theta)
            candidate = y @ G.T
            value = _contrast(candidate, spec, table)
            if value < current - 1e-12:
                y, W, current = candidate, G @ W, value
                trace.append((sweep, (p, q), theta, value))
                improved = True
        if not improved:
            break
    return DemixResult(W, trace, current)


def demix(points, spec: WaveletSpec, table: ScalingTable, sweeps=1, grid_size=DEFAULT_GRID):
    """Whiten, then run :func:`jacobi_sweep`; ``result.unmixing`` maps data to sources."""
    white, T = whiten(points)
    result = jacobi_sweep(white, spec, table, sweeps=sweeps, grid_size=grid_size)
    result.whitening = T
    return result


def amari_error(P) -> float:
    """Permutation- and scale-invariant distance of ``P`` from the identity, in [0, d-1]."""
    P = np.abs(np.asarray(P, dtype=float))
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("amari_error needs a square matrix")
    if not np.all(np.isfinite(P)):
        raise ValueError("matrix has non-finite entries")
    row_max = P.max(axis=1)
    col_max = P.max(axis=0)
    if np.any(row_max == 0) or np.any(col_max == 0):
        raise ValueError("matrix has a zero row or column")
    d = P.shape[0]
    rows = np.sum(P.sum(axis=1) / row_max - 1)
    cols = np.sum(P.sum(axis=0) / col_max - 1)
    return float((rows + cols) / (2 * d))


def angle_error(theta, truth, period=np.pi / 2):
    """Distance between two angles modulo ``period``."""
    diff = (theta - truth) % period
    return float(min(diff, period - diff))
