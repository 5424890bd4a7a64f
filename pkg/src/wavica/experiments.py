"""Monte Carlo harness: sources, mixing, replicated risk and rate slopes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy import stats

from .demix import MixingMatrix
from .estimators import (
    Estimator,
    b2_ustat,
    build_product_sample,
    c2_plugin,
    d2_brute,
    d2_fast,
    delta2_ustat,
    f2_mixed,
    g2_mixed,
    split_d_plus_1,
)
from .wavelets import ScalingTable, WaveletSpec, table_for


class Source(str, Enum):
    UNIFORM = "UNIFORM"
    BIMODAL_MIX = "BIMODAL_MIX"
    TRIANGULAR = "TRIANGULAR"


class Regime(str, Enum):
    SMALL_J = "SMALL_J"  # 2^(jd) < n
    LARGE_J = "LARGE_J"  # 2^(jd) >= n


class InoperableRegimeError(ValueError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    """Independent sources on [0, 1]^d, one kind per axis.

    ``kind`` is either a single kind shared by every axis or a sequence of
    ``d`` kinds.
    """

    kind: object
    d: int

    def kinds(self):
        if isinstance(self.kind, (str, Source)):
            return [Source(self.kind)] * self.d
        kinds = [Source(k) for k in self.kind]
        if len(kinds) != self.d:
            raise ValueError(f"{len(kinds)} source kinds given for d={self.d}")
        return kinds

    def draw(self, rng, n):
        cols = []
        for kind in self.kinds():
            if kind is Source.UNIFORM:
                cols.append(rng.random(n))
            elif kind is Source.TRIANGULAR:
                cols.append(rng.triangular(0.0, 0.5, 1.0, n))
            else:
                u = rng.random(n)
                low = rng.random(n) < 0.5
                cols.append(np.where(low, 0.4 * u, 0.6 + 0.4 * u))
        return np.column_stack(cols)


def unit_cube_map(A):
    """Offset and scale sending the parallelepiped ``A [0,1]^d`` onto [0,1]^d, axis by axis."""
    A = np.asarray(A, dtype=float)
    lo = np.minimum(A, 0).sum(axis=1)
    hi = np.maximum(A, 0).sum(axis=1)
    return lo, hi - lo


def generate_mixed(source: SourceSpec, A, n: int, seed: int, return_map=False):
    """``n`` rows of ``X = A S`` mapped into [0, 1]^d.

    The map is fixed by ``A`` (the bounding box of the image of the source
    cube), not by the draw, so rows stay i.i.d.; ``A = I`` leaves the sources
    untouched.
    """
    A = MixingMatrix(A if A is not None else np.eye(source.d)).A
    if A.shape[0] != source.d:
        raise ValueError(f"mixing matrix is {A.shape[0]}x{A.shape[0]} but sources have d={source.d}")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    s = source.draw(rng, n)
    x = s @ A.T
    lo, scale = unit_cube_map(A)
    x = np.clip((x - lo) / scale, 0.0, 1.0)
    if return_map:
        return x, (lo, scale)
    return x


def two_sample_split(points):
    """Paired samples of f_A and f_A* of equal size ``n // (d+1)``.

    R is the first block of rows; S is built from the next ``d`` blocks by
    taking axis ``l`` from the l-th row of each group.
    """
    x = np.asarray(points, dtype=float)
    n, d = x.shape
    m = n // (d + 1)
    if m < 2:
        raise ValueError(f"sample of size {n} too small for a two-sample split in d={d}")
    return x[:m], build_product_sample(x[m : m + m * d])


def estimate(estimator, points, spec: WaveletSpec, table: ScalingTable) -> float:
    """Value of ``estimator`` on one sample, splitting it when the estimator needs blocks."""
    est = Estimator(_canonical(estimator))
    if est is Estimator.C2:
        return c2_plugin(points, spec, table).value
    if est is Estimator.B2:
        return b2_ustat(points, spec, table).value
    if est is Estimator.D2_FAST:
        return d2_fast(points, spec, table).value
    if est is Estimator.D2_BRUTE:
        return d2_brute(points, spec, table).value
    if est is Estimator.F2:
        return f2_mixed(points, split_d_plus_1(points), spec, table).value
    r, s = two_sample_split(points)
    if est is Estimator.G2:
        return g2_mixed(r, s, spec, table).value
    return delta2_ustat(r, s, spec, table).value


def _canonical(tag):
    tag = getattr(tag, "value", tag)
    tag = str(tag).upper().replace("-", "_")
    return "D2_FAST" if tag == "D2" else tag


def replicate_seeds(seed, replicates):
    """Independent child seeds; replicate r always gets the same stream."""
    return np.random.SeedSequence(seed).spawn(replicates)


def monte_carlo_mse(
    estimator,
    source: SourceSpec,
    A,
    spec: WaveletSpec,
    n: int,
    replicates: int,
    seed: int,
    target: float = 0.0,
    table: ScalingTable | None = None,
):
    """Mean of ``(estimate - target)**2`` over replicates, with its standard error."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    table = table_for(spec) if table is None else table
    errors = np.empty(replicates)
    for r, child in enumerate(replicate_seeds(seed, replicates)):
        x = generate_mixed(source, A, n, child)
        errors[r] = (estimate(estimator, x, spec, table) - target) ** 2
    return float(errors.mean()), float(errors.std(ddof=1) / np.sqrt(replicates))


def monte_carlo_mean(estimator, source, A, spec, n, replicates, seed, table=None):
    """Mean estimate over replicates and its standard error."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    table = table_for(spec) if table is None else table
    vals = np.array(
        [
            estimate(estimator, generate_mixed(source, A, n, child), spec, table)
            for child in replicate_seeds(seed, replicates)
        ]
    )
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(replicates))


def rate_slope(n_values, mse_values):
    """Least-squares slope of log(MSE) against log(n), and its standard error."""
    n_values = np.asarray(n_values, dtype=float)
    mse_values = np.asarray(mse_values, dtype=float)
    if len(n_values) != len(mse_values):
        raise ValueError("n and MSE tables differ in length")
    if len(n_values) < 3:
        raise ValueError("need at least 3 sample sizes to fit a slope")
    if np.any(mse_values <= 0) or np.any(n_values <= 0):
        raise ValueError("MSE and n must be positive to take logs")
    fit = stats.linregress(np.log(n_values), np.log(mse_values))
    return float(fit.slope), float(fit.stderr)


@dataclass(frozen=True)
class RateReport:
    estimator: str
    spec: WaveletSpec
    n_grid: tuple
    mse: tuple
    stderr: tuple
    slope: float
    slope_stderr: float


def rate_experiment(estimator, source, A, spec, n_grid, replicates, seed, target=0.0):
    n_grid = tuple(int(n) for n in n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    table = table_for(spec)
    rows = [
        monte_carlo_mse(estimator, source, A, spec, n, replicates, seed + i, target, table)
        for i, n in enumerate(n_grid)
    ]
    mse = tuple(r[0] for r in rows)
    slope, slope_se = rate_slope(n_grid, mse)
    return RateReport(
        _canonical(estimator), spec, n_grid, mse, tuple(r[1] for r in rows), slope, slope_se
    )


def _as_fraction(x):
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def theoretical_rate(estimator, s, d: int, regime) -> Fraction:
    """Exponent ``e`` of the risk order ``n**e`` at the optimal resolution.

    ``2**(jd) < n`` (SMALL_J): plug-in C2 gets ``-4s/(4s+d)``, full-sample D2
    ``-1 + 1/(1+4s)``, the split estimators F2, G2, DELTA2 are parametric.
    ``2**(jd) >= n`` (LARGE_J): all but C2 get ``-8s/(4s+d)``; C2 is
    inoperable there and raises :class:`InoperableRegimeError`.
    """
    s = _as_fraction(s)
    if s <= 0:
        raise ValueError(f"smoothness s must be positive, got {s}")
    if d < 1:
        raise ValueError(f"dimension must be at least 1, got {d}")
    est = _canonical(estimator)
    regime = Regime(getattr(regime, "value", regime))
    if est not in {"C2", "D2_FAST", "D2_BRUTE", "F2", "G2", "DELTA2"}:
        raise ValueError(f"no tabulated rate for estimator {estimator!r}")
    if regime is Regime.LARGE_J:
        if est == "C2":
            raise InoperableRegimeError("plug-in C2 is inoperable when 2^(jd) >= n")
        return -8 * s / (4 * s + d)
    if est == "C2":
        return -4 * s / (4 * s + d)
    if est.startswith("D2"):
        return Fraction(-1) + 1 / (1 + 4 * s)
    return Fraction(-1)
