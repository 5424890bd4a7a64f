"""Daubechies filters, tabulated scaling functions and their dilates/translates.

The scaling function of a Daubechies wavelet D2N has no closed form (except
Haar), so it is tabulated once on a dyadic grid by the cascade algorithm and
every evaluation of ``phi_jk(x) = 2**(j/2) * phi(2**j * x - k)`` is a lookup
with the argument snapped to that grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

MAX_ORDER = 8
DEFAULT_DEPTH = 12


class UnsupportedOrderError(ValueError):
    pass


class TableConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class WaveletSpec:
    """Daubechies order ``N`` (wavelet D2N) and resolution level ``j``."""

    order: int = 1
    level: int = 0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"wavelet order must be a positive integer, got {self.order!r}")
        if int(self.level) != self.level or self.level < 0:
            raise ValueError(f"resolution level must be a non-negative integer, got {self.level!r}")

    @property
    def support_width(self) -> int:
        """Length of the support of phi, ``2N - 1``."""
        return 2 * self.order - 1

    @property
    def k_min(self) -> int:
        return 2 - 2 * self.order

    @property
    def k_max(self) -> int:
        return 2**self.level - 1

    @property
    def n_translates(self) -> int:
        """Number of translates per axis whose support meets [0, 1]."""
        return 2**self.level + 2 * self.order - 2


@dataclass(frozen=True, eq=False)
class DaubechiesFilter:
    order: int
    coeffs: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.coeffs)


def make_filter(order: int) -> DaubechiesFilter:
    """Low-pass filter ``h_0..h_{2N-1}`` of the Daubechies wavelet D2N.

    Coefficients come from the spectral factorization of the Daubechies
    polynomial, keeping the roots inside the unit circle (extremal phase,
    the usual ordering with ``h_0 = (1 + sqrt 3) / (4 sqrt 2)`` for D4).
    They are normalized so that ``sum(h) == sqrt(2)``.
    """
    if int(order) != order or not 1 <= order <= MAX_ORDER:
        raise UnsupportedOrderError(f"Daubechies order must be in 1..{MAX_ORDER}, got {order!r}")
    order = int(order)
    if order == 1:
        return DaubechiesFilter(1, np.full(2, 1 / np.sqrt(2)))

    # P(y) = sum_k C(N-1+k, k) y^k with y = sin^2(w/2) = (2 - z - 1/z) / 4
    daub_poly = [comb(order - 1 + k, k) for k in range(order)]
    poly = np.array([1.0 + 0j])
    for _ in range(order):
        poly = np.convolve(poly, [1.0, 1.0])
    for y in np.roots(daub_poly[::-1]):
        pair = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        poly = np.convolve(poly, [1.0, -pair[np.argmin(np.abs(pair))]])
    h = np.real(poly)
    h = h * (np.sqrt(2) / h.sum())
    return DaubechiesFilter(order, h)


def filter_residuals(filt: DaubechiesFilter) -> dict:
    """Largest violation of each defining constraint of ``filt``."""
    h = filt.coeffs
    L = len(h)
    k = np.arange(L, dtype=float)
    shifts = [
        abs(np.dot(h[: L - 2 * m], h[2 * m :]) - (1.0 if m == 0 else 0.0))
        for m in range(filt.order)
    ]
    moments = [abs(np.sum((-1.0) ** k * k**p * h)) for p in range(filt.order)]
    return {
        "sum": abs(h.sum() - np.sqrt(2)),
        "orthonormality": max(shifts),
        "moments": max(moments),
    }


@dataclass(frozen=True, eq=False)
class ScalingTable:
    """Values of phi at ``x = m * 2**-depth`` for ``m = 0 .. (2N-1) * 2**depth``."""

    filter: DaubechiesFilter
    depth: int
    values: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.filter.order

    @property
    def is_haar(self) -> bool:
        return self.filter.order == 1

    @property
    def support_width(self) -> int:
        return 2 * self.filter.order - 1

    def grid(self) -> np.ndarray:
        return np.arange(len(self.values)) / 2.0**self.depth

    def __call__(self, x):
        """phi(x) with ``x`` snapped to the table grid; zero off the support."""
        m = np.rint(np.asarray(x, dtype=float) * 2.0**self.depth)
        inside = (m >= 0) & (m < len(self.values))
        idx = np.where(inside, m, 0).astype(np.int64)
        return np.where(inside, self.values[idx], 0.0)


def _integer_values(filt: DaubechiesFilter) -> np.ndarray:
    h = filt.coeffs
    L = len(h) - 1
    if filt.order == 1:
        # right-continuous indicator of [0, 1)
        return np.array([1.0, 0.0])
    # phi(a) = sqrt2 * sum_b h[2a - b] phi(b) on the interior points 1..L-1
    pts = np.arange(1, L)
    M = np.zeros((L - 1, L - 1))
    for r, a in enumerate(pts):
        for c, b in enumerate(pts):
            if 0 <= 2 * a - b <= L:
                M[r, c] = np.sqrt(2) * h[2 * a - b]
    eigvals, eigvecs = np.linalg.eig(M)
    i = np.argmin(np.abs(eigvals - 1.0))
    if abs(eigvals[i] - 1.0) > 1e-8:
        raise TableConstructionError(
            f"refinement matrix of D{2 * filt.order} has no eigenvalue 1 (closest {eigvals[i]})"
        )
    v = np.real(eigvecs[:, i])
    total = v.sum()
    if abs(total) < 1e-12:
        raise TableConstructionError("eigenvector for eigenvalue 1 cannot be normalized")
    out = np.zeros(L + 1)
    out[1:L] = v / total
    return out


def build_table(filt: DaubechiesFilter, depth: int = DEFAULT_DEPTH) -> ScalingTable:
    """Tabulate phi by the cascade algorithm down to spacing ``2**-depth``.

    Integer-point values are the eigenvector of the two-scale refinement
    matrix for eigenvalue 1, normalized to sum to one; each further level
    fills the new odd grid points from ``phi(x) = sqrt2 sum_k h_k phi(2x - k)``.
    """
    if int(depth) != depth or depth < 0:
        raise ValueError(f"depth must be a non-negative integer, got {depth!r}")
    depth = int(depth)
    h = filt.coeffs
    L = len(h) - 1
    vals = _integer_values(filt)
    for r in range(1, depth + 1):
        half = 2 ** (r - 1)
        new = np.zeros(L * 2**r + 1)
        new[::2] = vals
        odd = np.arange(1, len(new), 2)
        acc = np.zeros(len(odd))
        for k, hk in enumerate(h):
            src = odd - k * half
            ok = (src >= 0) & (src < len(vals))
            acc[ok] += hk * vals[src[ok]]
        new[odd] = np.sqrt(2) * acc
        vals = new
    vals.setflags(write=False)
    return ScalingTable(filt, depth, vals)


def table_for(spec: WaveletSpec, depth: int = DEFAULT_DEPTH) -> ScalingTable:
    return build_table(make_filter(spec.order), depth)


def refinement_residual(table: ScalingTable) -> float:
    """max |phi(x) - sqrt2 sum_k h_k phi(2x - k)| over the depth-1 grid."""
    if table.depth == 0:
        return 0.0
    x = np.arange(table.support_width * 2 ** (table.depth - 1) + 1) / 2.0 ** (table.depth - 1)
    rhs = sum(hk * table(2 * x - k) for k, hk in enumerate(table.filter.coeffs))
    return float(np.max(np.abs(table(x) - np.sqrt(2) * rhs)))


def partition_of_unity_residual(table: ScalingTable) -> float:
    """max |sum_k phi(x - k) - 1| over one period of the table grid."""
    x = np.arange(2**table.depth) / 2.0**table.depth
    total = sum(table(x + k) for k in range(table.support_width))
    return float(np.max(np.abs(total - 1.0)))


def haar_cell(x, j):
    """Dyadic cell index ``floor(2**j x)``, with x == 1.0 put in the last cell."""
    x = np.asarray(x, dtype=float)
    cell = np.floor(x * 2.0**j).astype(np.int64)
    return np.where(x == 1.0, 2**j - 1, cell)


def eval_phi_jk(table: ScalingTable, j: int, k: int, x):
    """``2**(j/2) * phi(2**j x - k)``; vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    scale = 2.0 ** (j / 2)
    if table.is_haar:
        return np.where(haar_cell(x, j) == k, scale, 0.0)
    m = np.rint(x * 2.0 ** (j + table.depth)) - k * 2**table.depth
    inside = (m >= 0) & (m < len(table.values))
    idx = np.where(inside, m, 0).astype(np.int64)
    return scale * np.where(inside, table.values[idx], 0.0)


def eval_tensor_phi(table: ScalingTable, j: int, k, x):
    """``prod_l phi_{j k^l}(x^l) = 2**(jd/2) Phi(2**j x - k)``."""
    k = tuple(k)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(k):
        raise ValueError(f"index has {len(k)} components but point has dimension {x.shape[-1]}")
    out = 1.0
    for axis, kl in enumerate(k):
        out = out * eval_phi_jk(table, j, kl, x[..., axis])
    return out


def axis_basis(table: ScalingTable, j: int, x):
    """Every non-trivial ``phi_jk(x_i)`` for a 1-d array of points.

    Returns ``(k_top, vals)`` where ``vals[i, w] = phi_{j, k_top[i] - w}(x_i)``
    for ``w = 0 .. 2N-2``: the 2N-1 translates whose support can contain x_i.
    """
    x = np.asarray(x, dtype=float)
    scale = 2.0 ** (j / 2)
    if table.is_haar:
        return haar_cell(x, j), np.full((len(x), 1), scale)
    step = 2**table.depth
    t = np.rint(x * 2.0 ** (j + table.depth)).astype(np.int64)
    k_top = t // step
    frac = t - k_top * step
    idx = frac[:, None] + step * np.arange(table.support_width)[None, :]
    return k_top, scale * table.values[idx]
