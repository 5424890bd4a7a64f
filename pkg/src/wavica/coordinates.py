"""Empirical wavelet coordinates of a sample and of its marginals.

Coordinates are stored sparsely, keyed by the integer translate ``k``: each
observation only touches the ``(2N-1)**d`` translates whose support contains
it, so accumulation costs ``O(n (2N-1)**d)`` whatever the level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .wavelets import ScalingTable, WaveletSpec, axis_basis, haar_cell


def as_sample(x, *, check_range=True) -> np.ndarray:
    """Validate ``x`` as an ``(n, d)`` sample of the unit hypercube.

    A 1-d array is read as ``n`` observations in dimension one.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"sample must be an (n, d) array, got shape {x.shape}")
    if x.shape[0] < 1:
        raise ValueError("sample is empty")
    if x.shape[1] < 1:
        raise ValueError("sample has no dimensions")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    if check_range and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("sample must lie in the unit hypercube [0, 1]^d")
    return x


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """Sparse map ``k -> coefficient`` over translates ``k`` in Z^dim."""

    spec: WaveletSpec
    dim: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, k):
        if isinstance(k, (int, np.integer)):
            k = (int(k),)
        return self.entries.get(tuple(k), 0.0)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def sum_of_squares(self) -> float:
        return float(sum(v * v for v in self.entries.values()))

    def to_dense(self) -> np.ndarray:
        """Dense array over the box ``[k_min, k_max]**dim`` (index 0 is k_min)."""
        K = self.spec.n_translates
        out = np.zeros((K,) * self.dim)
        for k, v in self.entries.items():
            out[tuple(np.asarray(k) - self.spec.k_min)] = v
        return out

    @classmethod
    def from_dense(cls, spec, array, touched=None):
        mask = array != 0 if touched is None else touched
        idx = np.argwhere(mask)
        entries = {
            tuple(int(c) for c in row + spec.k_min): float(array[tuple(row)]) for row in idx
        }
        return cls(spec, array.ndim, entries)


def tensor_terms(points, spec: WaveletSpec, table: ScalingTable):
    """All non-zero ``Phi_jk(X_i)`` as flat arrays.

    Returns ``(obs, keys, vals)``: observation index, translate ``k`` as a
    row of ``d`` integers, and value, one entry per (observation, touched k).
    """
    x = as_sample(points)
    n, d = x.shape
    j = spec.level
    tops, vals = [], []
    for axis in range(d):
        top, v = axis_basis(table, j, x[:, axis])
        tops.append(top)
        vals.append(v)
    W = vals[0].shape[1]
    shape = (n,) + (W,) * d
    prod = np.ones(shape)
    keys = np.empty(shape + (d,), dtype=np.int64)
    for axis in range(d):
        view = [1] * (d + 1)
        view[0] = n
        view[axis + 1] = W
        prod = prod * vals[axis].reshape(view)
        k_axis = tops[axis][:, None] - np.arange(W)[None, :]
        keys[..., axis] = np.broadcast_to(k_axis.reshape(view), shape)
    obs = np.broadcast_to(np.arange(n).reshape((n,) + (1,) * d), shape)
    prod = prod.reshape(-1)
    keys = keys.reshape(-1, d)
    obs = obs.reshape(-1)
    keep = (prod != 0) & np.all(keys <= spec.k_max, axis=1) & np.all(keys >= spec.k_min, axis=1)
    return obs[keep], keys[keep], prod[keep]


def _linear(keys, spec):
    K = spec.n_translates
    return np.ravel_multi_index(tuple((keys - spec.k_min).T), (K,) * keys.shape[1])


def dense_sums(points, spec, table, power=1):
    """Dense box of ``sum_i Phi_jk(X_i)**power`` and the touched mask."""
    x = as_sample(points)
    d = x.shape[1]
    K = spec.n_translates
    if table.is_haar and power == 1:
        # integer counts keep the Haar histogram identity exact
        cells = np.stack([haar_cell(x[:, a], spec.level) for a in range(d)], axis=1)
        counts = np.bincount(_linear(cells, spec), minlength=K**d).reshape((K,) * d)
        return counts * 2.0 ** (spec.level * d / 2), counts > 0
    _, keys, vals = tensor_terms(x, spec, table)
    lin = _linear(keys, spec)
    sums = np.bincount(lin, weights=vals**power, minlength=K**d).reshape((K,) * d)
    touched = np.bincount(lin, minlength=K**d).reshape((K,) * d) > 0
    return sums, touched


def estimate_alpha(points, spec: WaveletSpec, table: ScalingTable) -> CoordinateMap:
    """Empirical coordinates ``alpha_jk = (1/n) sum_i Phi_jk(X_i)``.

    Only translates touched by at least one observation are stored.
    """
    x = as_sample(points)
    n, d = x.shape
    if table.is_haar:
        cells = np.stack([haar_cell(x[:, a], spec.level) for a in range(d)], axis=1)
        uniq, counts = np.unique(cells, axis=0, return_counts=True)
        scale = 2.0 ** (spec.level * d / 2)
        entries = {tuple(int(c) for c in k): float(c_ * scale / n) for k, c_ in zip(uniq, counts)}
        return CoordinateMap(spec, d, entries)
    _, keys, vals = tensor_terms(x, spec, table)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    sums = np.bincount(inverse.reshape(-1), weights=vals, minlength=len(uniq)) / n
    entries = {tuple(int(c) for c in k): float(s) for k, s in zip(uniq, sums)}
    return CoordinateMap(spec, d, entries)


def estimate_marginal_alpha(points, axis: int, spec: WaveletSpec, table: ScalingTable) -> CoordinateMap:
    """Coordinates of marginal ``axis`` (1-based, as in ``X^1 .. X^d``)."""
    x = as_sample(points)
    d = x.shape[1]
    if not 1 <= axis <= d:
        raise ValueError(f"axis must be in 1..{d}, got {axis}")
    return estimate_alpha(x[:, axis - 1 : axis], spec, table)


def product_map(marginals) -> CoordinateMap:
    """``lambda_k = prod_l alpha_{j k^l}`` over the cross product of the supports."""
    marginals = list(marginals)
    if not marginals:
        raise ValueError("need at least one marginal map")
    spec = marginals[0].spec
    for m in marginals:
        if m.spec != spec:
            raise ValueError("marginal maps were computed with different wavelet specs")
        if m.dim != 1:
            raise ValueError("product_map expects one-dimensional maps")
    entries = {(): 1.0}
    for m in marginals:
        nz = [(k, v) for k, v in m.items() if v != 0.0]
        entries = {key + k: val * v for key, val in entries.items() for k, v in nz}
    return CoordinateMap(spec, len(marginals), entries)
