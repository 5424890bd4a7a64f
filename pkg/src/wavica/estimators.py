"""Estimators of the wavelet ICA contrast and of the quadratic functional.

All estimators target ``C2_j = sum_k (alpha_jk - alpha_jk^1 ... alpha_jk^d)**2``,
the squared norm of the projection of ``f_A - f_A*`` on ``V_j``:

========  ====================================================================
C2        plug-in on the full sample
D2        U-statistic of order 2d+2 on the full sample (brute force and fast)
F2        mixed plug-in on d+1 disjoint blocks
G2        mixed plug-in on a sample of f_A and an independent sample of f_A*
DELTA2    two-sample U-statistic on the same pair
========  ====================================================================

``b2_ustat`` is the order-2 U-statistic for ``sum_k alpha_jk**2`` used as a
building block by F2 and G2.
"""

from __future__ import annotations

import itertools
import warnings
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import prod

import numpy as np

from .combinatorics import falling_factorial, set_partitions
from .coordinates import as_sample
from .wavelets import ScalingTable, WaveletSpec, axis_basis, eval_phi_jk

DENSE_LIMIT = 2**20
# A_12^6: d2_brute refuses more ordered tuples than this by default
BRUTE_MAX_TUPLES = 665_280


class Estimator(str, Enum):
    C2 = "C2"
    B2 = "B2"
    D2_BRUTE = "D2_BRUTE"
    D2_FAST = "D2_FAST"
    F2 = "F2"
    G2 = "G2"
    DELTA2 = "DELTA2"


class ResolutionWarning(RuntimeWarning):
    """Raised (as a warning) when ``2**(jd) >= n**2``: the estimators no longer converge."""


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContrastEstimate:
    estimator: Estimator
    value: float
    spec: WaveletSpec
    n_used: int
    d: int

    def __float__(self):
        return self.value


def _check_regime(n, d, spec):
    if 2 ** (spec.level * d) >= n * n:
        warnings.warn(
            f"2^(jd) = 2^{spec.level * d} >= n^2 = {n * n}: mean squared error does not "
            "vanish in this regime",
            ResolutionWarning,
            stacklevel=3,
        )


# -- per-observation bases ---------------------------------------------------


class _Basis:
    """Sparse per-axis evaluations ``phi_jk(X_i^l)`` for one sample."""

    def __init__(self, x, spec, table):
        self.x = x
        self.n, self.d = x.shape
        self.spec = spec
        self.table = table
        self.axes = [axis_basis(table, spec.level, x[:, a]) for a in range(self.d)]

    @property
    def width(self):
        return self.axes[0][1].shape[1]

    def dense_axis(self, axis):
        """``(n, K)`` matrix of ``phi_jk(X_i^axis)`` over the box translates."""
        top, vals = self.axes[axis]
        K = self.spec.n_translates
        k = top[:, None] - np.arange(self.width)[None, :]
        ok = (k >= self.spec.k_min) & (k <= self.spec.k_max)
        out = np.zeros((self.n, K))
        rows = np.broadcast_to(np.arange(self.n)[:, None], k.shape)
        out[rows[ok], k[ok] - self.spec.k_min] = vals[ok]
        return out

    def self_kernel(self):
        """``sum_k Phi_jk(X_i)**2`` for each observation."""
        return prod(np.sum(v * v, axis=1) for _, v in self.axes)

    def totals(self):
        """Sparse ``(linear_keys, sum_i Phi_jk(X_i))`` over touched translates."""
        spec, d = self.spec, self.d
        K = spec.n_translates
        if self.table.is_haar:
            cells = np.stack([top for top, _ in self.axes], axis=1)
            lin = np.ravel_multi_index(tuple((cells - spec.k_min).T), (K,) * d)
            keys, counts = np.unique(lin, return_counts=True)
            return keys, counts * 2.0 ** (spec.level * d / 2)
        W = self.width
        shape = (self.n,) + (W,) * d
        lin = np.zeros(shape, dtype=np.int64)
        val = np.ones(shape)
        ok = np.ones(shape, dtype=bool)
        for a, (top, v) in enumerate(self.axes):
            view = [1] * (d + 1)
            view[0], view[a + 1] = self.n, W
            k = (top[:, None] - np.arange(W)[None, :]).reshape(view)
            lin = lin * K + (k - spec.k_min)
            ok = ok & (k >= spec.k_min) & (k <= spec.k_max)
            val = val * v.reshape(view)
        lin, val = lin[ok], val[ok]
        keys, inverse = np.unique(lin, return_inverse=True)
        return keys, np.bincount(inverse.reshape(-1), weights=val, minlength=len(keys))


def _axis_cross(a, b):
    """``sum_k phi_jk(x_i) phi_jk(y_i)`` for paired observations on one axis."""
    (top_a, va), (top_b, vb) = a, b
    W = va.shape[1]
    shift = top_a - top_b
    out = np.zeros(len(top_a))
    rows = np.arange(len(top_a))
    for w in range(W):
        w2 = w - shift
        ok = (w2 >= 0) & (w2 < W)
        out[ok] += va[rows[ok], w] * vb[rows[ok], w2[ok]]
    return out


def _sparse_dot(keys_a, vals_a, keys_b, vals_b):
    common, ia, ib = np.intersect1d(keys_a, keys_b, assume_unique=True, return_indices=True)
    return float(np.dot(vals_a[ia], vals_b[ib]))


def _marginal_vectors(x, spec, table):
    """Dense per-axis empirical coordinates, one length-K vector per axis."""
    n = len(x)
    K = spec.n_translates
    out = []
    for a in range(x.shape[1]):
        keys, tot = _Basis(x[:, a : a + 1], spec, table).totals()
        v = np.zeros(K)
        v[keys] = tot / n
        out.append(v)
    return out


def _lambda_at(keys, marginals, spec):
    K = spec.n_translates
    d = len(marginals)
    idx = np.unravel_index(keys, (K,) * d)
    return prod(marginals[a][idx[a]] for a in range(d))


# -- full-sample estimators --------------------------------------------------


def c2_plugin(points, spec: WaveletSpec, table: ScalingTable) -> ContrastEstimate:
    """Plug-in contrast ``sum_k (alpha_hat_jk - lambda_hat_jk)**2``.

    Joint and marginal coordinates come from the same full sample.
    """
    x = as_sample(points)
    n, d = x.shape
    _check_regime(n, d, spec)
    keys, tot = _Basis(x, spec, table).totals()
    alpha = tot / n
    marg = _marginal_vectors(x, spec, table)
    K = spec.n_translates
    if K**d <= DENSE_LIMIT:
        dense = np.zeros(K**d)
        dense[keys] = alpha
        lam = marg[0]
        for v in marg[1:]:
            lam = np.multiply.outer(lam, v)
        value = float(np.sum((dense - np.ravel(lam)) ** 2))
    else:
        lam = _lambda_at(keys, marg, spec)
        value = float(
            np.dot(alpha, alpha) - 2 * np.dot(alpha, lam) + prod(np.dot(v, v) for v in marg)
        )
        value = max(value, 0.0)
    return ContrastEstimate(Estimator.C2, value, spec, n, d)


def _b2_value(basis: _Basis) -> float:
    n = basis.n
    _, tot = basis.totals()
    return float((np.dot(tot, tot) - basis.self_kernel().sum()) / (n * (n - 1)))


def b2_ustat(points, spec: WaveletSpec, table: ScalingTable) -> ContrastEstimate:
    """U-statistic ``(1/A_n^2) sum_{i1 != i2} sum_k Phi_jk(X_i1) Phi_jk(X_i2)``.

    Unbiased for ``sum_k alpha_jk**2``. Computed in one pass from the per-k
    totals and the per-observation diagonal terms.
    """
    x = as_sample(points)
    n, d = x.shape
    if n < 2:
        raise ValueError("b2_ustat needs at least 2 observations")
    _check_regime(n, d, spec)
    return ContrastEstimate(Estimator.B2, _b2_value(_Basis(x, spec, table)), spec, n, d)


def _d2_check(x, spec):
    n, d = x.shape
    m = 2 * d + 2
    if n < m:
        raise ValueError(f"D2 needs at least 2d+2 = {m} observations, got {n}")
    return n, d, m


@lru_cache(maxsize=None)
def _permutations(n, m):
    return np.array(list(itertools.permutations(range(n), m)), dtype=np.intp)


def d2_brute(points, spec: WaveletSpec, table: ScalingTable, max_tuples=BRUTE_MAX_TUPLES):
    """Full-sample D2 by literal enumeration of all ordered distinct (2d+2)-tuples.

    Exponential in ``n``; meant as a reference for ``d2_fast``. Refuses when
    the number of tuples ``A_n^(2d+2)`` exceeds ``max_tuples``.
    """
    x = as_sample(points)
    n, d, m = _d2_check(x, spec)
    count = falling_factorial(n, m)
    if count > max_tuples:
        raise BudgetExceededError(
            f"d2_brute would enumerate {count} tuples (budget {max_tuples})"
        )
    ks = range(spec.k_min, spec.k_max + 1)
    # (n, K) evaluation matrices, straight from the pointwise evaluator
    B = [
        np.stack([eval_phi_jk(table, spec.level, k, x[:, a]) for k in ks], axis=1)
        for a in range(d)
    ]
    A = B[0]
    for b in B[1:]:
        A = (A[:, :, None] * b[:, None, :]).reshape(n, -1)

    def product_term(cols):
        out = B[0][cols[:, 0]]
        for a in range(1, d):
            out = (out[:, :, None] * B[a][cols[:, a]][:, None, :]).reshape(len(cols), -1)
        return out

    tuples = _permutations(n, m)
    total = 0.0
    for start in range(0, len(tuples), 20_000):
        t = tuples[start : start + 20_000]
        left = A[t[:, 0]] - product_term(t[:, 1 : d + 1])
        right = A[t[:, d + 1]] - product_term(t[:, d + 2 :])
        total += float(np.sum(left * right))
    return ContrastEstimate(Estimator.D2_BRUTE, total / count, spec, n, d)


@lru_cache(maxsize=None)
def _d2_expansion(d):
    """Collapse the 4-term kernel expansion and the partition sum to weighted monomials.

    Slots 0..d hold the left bracket ``[Phi(X_i0) - prod_l phi(X_il^l)]``, slots
    d+1..2d+1 the right one. Every slot carries a per-axis exponent vector; a
    block of a partition multiplies its slots' factors for one observation, so
    it contributes ``S_e(k) = sum_i prod_l phi_jk^l(X_i^l)**e_l`` with ``e``
    the sum of its slots' vectors. Returns ``{(exponent vectors, n_empty): weight}``.
    """
    m = 2 * d + 2
    zero = (0,) * d
    ones = (1,) * d

    def unit(a):
        return tuple(1 if b == a else 0 for b in range(d))

    def side(kind):
        if kind == "A":
            return [ones] + [zero] * d
        return [zero] + [unit(a) for a in range(d)]

    terms = []
    for left, right in itertools.product("AB", repeat=2):
        sign = 1 if left == right else -1
        terms.append((sign, side(left) + side(right)))

    out = defaultdict(int)
    for part in set_partitions(m):
        mu = part.mobius_weight
        for sign, slots in terms:
            exps = []
            empty = 0
            for block in part.blocks:
                e = tuple(sum(slots[s][a] for s in block) for a in range(d))
                if e == zero:
                    empty += 1
                else:
                    exps.append(e)
            out[(tuple(sorted(exps)), empty)] += sign * mu
    return {key: w for key, w in out.items() if w != 0}


def d2_fast(points, spec: WaveletSpec, table: ScalingTable) -> ContrastEstimate:
    """Full-sample D2 in ``O(n K**d)`` per monomial.

    Distinct-index sums are recovered from unconstrained ones by Moebius
    inversion over the set partitions of the 2d+2 index slots; each
    unconstrained block sum factorizes into per-k accumulated powers of the
    per-axis evaluations. Agrees with ``d2_brute`` to rounding.
    """
    x = as_sample(points)
    n, d, m = _d2_check(x, spec)
    _check_regime(n, d, spec)
    basis = _Basis(x, spec, table)
    mats = [basis.dense_axis(a) for a in range(d)]
    letters = "abcdefgh"[:d]

    cache = {}

    def block_sum(e):
        if e not in cache:
            axes = [a for a in range(d) if e[a] > 0]
            operands = [mats[a] ** e[a] for a in axes]
            sub = ",".join("i" + letters[a] for a in axes) + "->" + "".join(letters[a] for a in axes)
            s = np.einsum(sub, *operands)
            shape = [spec.n_translates if a in axes else 1 for a in range(d)]
            cache[e] = s.reshape(shape)
        return cache[e]

    total = 0.0
    for (exps, empty), w in _d2_expansion(d).items():
        term = prod(block_sum(e) for e in exps)
        total += w * float(n) ** empty * float(np.sum(term))
    norm = prod(float(n - i) for i in range(m))
    return ContrastEstimate(Estimator.D2_FAST, total / norm, spec, n, d)


# -- sample splits ----------------------------------------------------------


@dataclass(frozen=True)
class SplitScheme:
    """Row blocks of a sample: one joint block and one block per axis.

    Ranges are 0-based row indices; marginal block ``l`` only contributes
    axis ``l`` of its rows.
    """

    joint: range
    marginals: tuple

    def __post_init__(self):
        blocks = [self.joint, *self.marginals]
        seen = set()
        for b in blocks:
            rows = set(b)
            if rows & seen:
                raise ValueError("split blocks overlap")
            seen |= rows

    def check(self, n, d):
        if len(self.marginals) != d:
            raise ValueError(f"scheme has {len(self.marginals)} marginal blocks for d={d}")
        for b in (self.joint, *self.marginals):
            if len(b) < 2:
                raise ValueError("every split block needs at least 2 rows")
            if min(b) < 0 or max(b) >= n:
                raise ValueError("split block outside the sample")

    def apply(self, points):
        x = as_sample(points)
        self.check(*x.shape)
        joint = x[list(self.joint)]
        margs = [x[list(b), a : a + 1] for a, b in enumerate(self.marginals)]
        return joint, margs


def split_d_plus_1(points) -> SplitScheme:
    """Contiguous blocks of ``n // (d+1)`` rows: joint first, then axis 1..d.

    Trailing rows beyond ``(d+1) * (n // (d+1))`` are unused.
    """
    x = as_sample(points, check_range=False)
    n, d = x.shape
    if n < 2 * (d + 1):
        raise ValueError(f"need at least 2(d+1) = {2 * (d + 1)} rows to split, got {n}")
    b = n // (d + 1)
    return SplitScheme(range(0, b), tuple(range(b * (a + 1), b * (a + 2)) for a in range(d)))


def f2_mixed(points, scheme: SplitScheme, spec: WaveletSpec, table: ScalingTable):
    """``B2(R0) + prod_l B2(R^l) - 2 sum_k alpha_jk(R0) alpha_jk^1(R^1) ... alpha_jk^d(R^d)``."""
    x = as_sample(points)
    n, d = x.shape
    joint, margs = scheme.apply(x)
    _check_regime(len(joint), d, spec)
    jb = _Basis(joint, spec, table)
    keys, tot = jb.totals()
    marg_vecs = []
    b2_marg = 1.0
    for r in margs:
        mb = _Basis(r, spec, table)
        b2_marg *= _b2_value(mb)
        mk, mt = mb.totals()
        v = np.zeros(spec.n_translates)
        v[mk] = mt / len(r)
        marg_vecs.append(v)
    cross = float(np.dot(tot / len(joint), _lambda_at(keys, marg_vecs, spec)))
    value = _b2_value(jb) + b2_marg - 2 * cross
    used = len(scheme.joint) + sum(len(b) for b in scheme.marginals)
    return ContrastEstimate(Estimator.F2, value, spec, used, d)


def build_product_sample(points) -> np.ndarray:
    """Rows ``(X_{(m-1)d+1}^1, ..., X_{md}^d)``, m = 1..n//d: an i.i.d. sample of f_A*.

    Each output row takes axis ``l`` from a different input row, so its
    coordinates are independent and the rows are independent of each other.
    """
    x = as_sample(points, check_range=False)
    n, d = x.shape
    if n < d:
        raise ValueError(f"need at least d = {d} rows, got {n}")
    m = n // d
    blocks = x[: m * d].reshape(m, d, d)
    return blocks[:, np.arange(d), np.arange(d)].copy()


def _two_samples(r, s):
    r = as_sample(r)
    s = as_sample(s)
    if r.shape[1] != s.shape[1]:
        raise ValueError(f"samples have dimensions {r.shape[1]} and {s.shape[1]}")
    if len(r) < 2 or len(s) < 2:
        raise ValueError("each sample needs at least 2 observations")
    return r, s


def g2_mixed(sample_r, sample_s, spec: WaveletSpec, table: ScalingTable) -> ContrastEstimate:
    """``B2(R) + B2(S) - 2 sum_k alpha_jk(R) alpha_jk(S)``, R from f_A and S from f_A*."""
    r, s = _two_samples(sample_r, sample_s)
    d = r.shape[1]
    _check_regime(min(len(r), len(s)), d, spec)
    br, bs = _Basis(r, spec, table), _Basis(s, spec, table)
    kr, tr = br.totals()
    ks, ts = bs.totals()
    cross = _sparse_dot(kr, tr / len(r), ks, ts / len(s))
    value = _b2_value(br) + _b2_value(bs) - 2 * cross
    return ContrastEstimate(Estimator.G2, value, spec, len(r) + len(s), d)


def delta2_ustat(sample_r, sample_s, spec: WaveletSpec, table: ScalingTable) -> ContrastEstimate:
    """Two-sample U-statistic on paired rows::

        (1/A_n^2) sum_{i1 != i2} sum_k [Phi_jk(R_i1) - Phi_jk(S_i1)] [Phi_jk(R_i2) - Phi_jk(S_i2)]
    """
    r, s = _two_samples(sample_r, sample_s)
    if len(r) != len(s):
        raise ValueError(f"delta2_ustat needs samples of equal size, got {len(r)} and {len(s)}")
    n, d = r.shape
    _check_regime(n, d, spec)
    br, bs = _Basis(r, spec, table), _Basis(s, spec, table)
    kr, tr = br.totals()
    ks, ts = bs.totals()
    square = np.dot(tr, tr) + np.dot(ts, ts) - 2 * _sparse_dot(kr, tr, ks, ts)
    paired = prod(_axis_cross(br.axes[a], bs.axes[a]) for a in range(d))
    diag = br.self_kernel().sum() + bs.self_kernel().sum() - 2 * paired.sum()
    value = float((square - diag) / (n * (n - 1)))
    return ContrastEstimate(Estimator.DELTA2, value, spec, 2 * n, d)
