"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from wavica.combinatorics import count_matching
from wavica.demix import amari_error, angle_error, contrast_profile_2d, demix, rotation, whiten
from wavica.estimators import c2_plugin, d2_brute, d2_fast
from wavica.experiments import (
    InoperableRegimeError,
    SourceSpec,
    generate_mixed,
    monte_carlo_mean,
    rate_experiment,
    theoretical_rate,
)
from wavica.wavelets import (
    MAX_ORDER,
    WaveletSpec,
    build_table,
    filter_residuals,
    make_filter,
    partition_of_unity_residual,
    refinement_residual,
    table_for,
)

RESULTS = {}


def report(number, ok, detail):
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def test_criterion_1_d2_oracle_equivalence():
    t0 = time.time()
    worst = 0.0
    for order, j, n in itertools.product((1, 2), (1, 2), (6, 8, 10)):
        spec = WaveletSpec(order, j)
        table = table_for(spec)
        for seed in range(20):
            x = np.random.default_rng([1, order, j, n, seed]).random((n, 2))
            brute = d2_brute(x, spec, table, max_tuples=10**7).value
            worst = max(worst, rel(d2_fast(x, spec, table).value, brute))
    elapsed = time.time() - t0
    report(1, worst <= 1e-9 and elapsed < 120, f"max relative gap {worst:.2e} (<= 1e-9), {elapsed:.1f}s")


def test_criterion_2_one_dimension_vanishes():
    t0 = time.time()
    worst_c2 = worst_d2 = 0.0
    rng = np.random.default_rng(2)
    for trial in range(100):
        spec = WaveletSpec(1 + trial % 2, trial % 3)
        table = table_for(spec)
        x = rng.random((8, 1))
        worst_c2 = max(worst_c2, abs(c2_plugin(x, spec, table).value))
        worst_d2 = max(worst_d2, abs(d2_brute(x, spec, table).value), abs(d2_fast(x, spec, table).value))
    elapsed = time.time() - t0
    ok = worst_c2 <= 1e-15 and worst_d2 <= 1e-10 and elapsed < 60
    report(2, ok, f"max |C2| {worst_c2:.1e} (<= 1e-15), max |D2| {worst_d2:.1e} (<= 1e-10), {elapsed:.1f}s")


def histogram_contrast(x, j):
    """Plug-in contrast from cell counts alone."""
    n, d = x.shape
    edges = np.linspace(0, 1, 2**j + 1)
    joint = np.histogramdd(x, bins=[edges] * d)[0] * 2 ** (j * d / 2) / n
    prod = np.ones(())
    for a in range(d):
        marg = np.histogram(x[:, a], bins=edges)[0] * 2 ** (j / 2) / n
        prod = np.multiply.outer(prod, marg)
    return float(np.sum((joint - prod) ** 2))


def test_criterion_3_haar_histogram_oracle():
    t0 = time.time()
    worst = 0.0
    table = table_for(WaveletSpec(1, 0))
    for d, j, seed in itertools.product((2, 3), range(5), range(10)):
        rng = np.random.default_rng([3, d, j, seed])
        n = int(rng.integers(2, 10_001))
        x = rng.random((n, d)) ** rng.uniform(0.5, 2, size=d)
        x[: n // 10] = np.round(x[: n // 10] * 2**j) / 2**j  # points on cell edges, including 1.0
        worst = max(worst, abs(c2_plugin(x, WaveletSpec(1, j), table).value - histogram_contrast(x, j)))
    elapsed = time.time() - t0
    report(3, worst <= 1e-12 and elapsed < 60, f"max |C2 - histogram| {worst:.1e} (<= 1e-12), {elapsed:.1f}s")


def test_criterion_4_b2_unbiased():
    t0 = time.time()
    parts, ok = [], True
    for j in (1, 2, 3):
        mean, se = monte_carlo_mean("B2", SourceSpec("UNIFORM", 1), None, WaveletSpec(1, j), 100, 1000, seed=40 + j)
        z = (mean - 1.0) / se
        ok &= abs(z) <= 3
        parts.append(f"j={j}: mean {mean:.4f}, z {z:+.2f}")
    elapsed = time.time() - t0
    report(4, ok and elapsed < 60, "; ".join(parts) + f" (|z| <= 3), {elapsed:.1f}s")


def test_criterion_5_independence_null():
    t0 = time.time()
    parts, ok = [], True
    spec = WaveletSpec(1, 2)
    for i, tag in enumerate(("D2_FAST", "DELTA2", "F2")):
        mean, se = monte_carlo_mean(tag, SourceSpec("UNIFORM", 2), None, spec, 500, 200, seed=50 + i)
        z = mean / se
        ok &= abs(z) <= 3
        parts.append(f"{tag}: mean {mean:.2e}, z {z:+.2f}")
    elapsed = time.time() - t0
    report(5, ok and elapsed < 300, "; ".join(parts) + f" (|z| <= 3), {elapsed:.1f}s")


def test_criterion_6_risk_order_slopes():
    t0 = time.time()
    spec = WaveletSpec(1, 2)
    grid = (250, 500, 1000, 2000)
    bands = {"C2": (-1.3, -0.7), "DELTA2": (-2.5, -1.5), "D2_FAST": (-2.5, -1.5)}
    parts, ok = [], True
    for i, (tag, (lo, hi)) in enumerate(bands.items()):
        r = rate_experiment(tag, SourceSpec("UNIFORM", 2), None, spec, grid, 400, seed=600 + 10 * i)
        inside = lo <= r.slope <= hi
        ok &= inside
        parts.append(f"{tag}: slope {r.slope:.3f} +/- {r.slope_stderr:.3f} in [{lo}, {hi}] {'yes' if inside else 'NO'}")
    elapsed = time.time() - t0
    report(6, ok and elapsed < 900, "; ".join(parts) + f", {elapsed:.1f}s")


def test_criterion_7_table_exponents():
    t0 = time.time()
    ok = True
    cells = refusals = 0
    for s, d in itertools.product((Fraction(1, 4), Fraction(1, 2), 1, 2), (1, 2, 3)):
        s = Fraction(s)
        expect_small = {
            "C2": -4 * s / (4 * s + d),
            "D2": Fraction(-1) + 1 / (1 + 4 * s),
            "F2": Fraction(-1),
            "G2": Fraction(-1),
            "DELTA2": Fraction(-1),
        }
        for tag, want in expect_small.items():
            got = theoretical_rate(tag, s, d, "SMALL_J")
            ok &= isinstance(got, Fraction) and got == want
            cells += 1
            if tag != "C2":
                ok &= theoretical_rate(tag, s, d, "LARGE_J") == -8 * s / (4 * s + d)
                cells += 1
        try:
            theoretical_rate("C2", s, d, "LARGE_J")
            ok = False
        except InoperableRegimeError:
            refusals += 1
    elapsed = time.time() - t0
    report(7, ok and elapsed < 1, f"{cells} exact cells and {refusals} C2 refusals, {elapsed * 1000:.1f}ms")


def test_criterion_8_demixing_recovery():
    t0 = time.time()
    spec2 = WaveletSpec(2, 3)
    table2 = table_for(spec2)
    truth = np.radians(60)  # inverse of the 30 degree mixing, modulo quarter turns
    A = rotation(np.radians(30))
    hits = 0
    for seed in range(50):
        x = generate_mixed(SourceSpec("UNIFORM", 2), A, 2000, seed=800 + seed)
        theta, _ = contrast_profile_2d(whiten(x)[0], spec2, table2, grid_size=90)
        # grid points sit at whole degrees; absorb the rounding of theta itself
        hits += np.degrees(angle_error(theta, truth)) <= 3 + 1e-9
    spec3 = WaveletSpec(1, 2)
    table3 = table_for(spec3)
    good = 0
    for seed in range(30):
        rng = np.random.default_rng(880 + seed)
        Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
        Q = Q * np.sign(np.diag(R))
        x = generate_mixed(SourceSpec("UNIFORM", 3), Q, 4000, seed=900 + seed)
        # the written sample is Q S rescaled per axis; fold the scale into the truth
        scale = np.abs(Q).sum(axis=1)
        res = demix(x, spec3, table3, sweeps=5, grid_size=90)
        good += amari_error(res.unmixing @ (Q / scale[:, None])) <= 0.25
    elapsed = time.time() - t0
    ok = hits >= 45 and good >= 24 and elapsed < 600
    report(8, ok, f"2-d angle within 3 deg in {hits}/50 (>= 45); 3-d Amari <= 0.25 in {good}/30 (>= 24), {elapsed:.1f}s")


def test_criterion_9_wavelet_kernel():
    t0 = time.time()
    worst = {"sum": 0.0, "orthonormality": 0.0, "moments": 0.0, "refinement": 0.0, "unity": 0.0}
    for N in range(1, MAX_ORDER + 1):
        filt = make_filter(N)
        for k, v in filter_residuals(filt).items():
            worst[k] = max(worst[k], v)
        table = build_table(filt, 10)
        worst["refinement"] = max(worst["refinement"], refinement_residual(table))
        worst["unity"] = max(worst["unity"], partition_of_unity_residual(table))
    counts_ok = True
    for n in range(1, 9):
        for m in range(1, min(n, 3) + 1):
            tuples = list(itertools.permutations(range(n), m))
            sets = [frozenset(t) for t in tuples]
            hist = np.bincount([len(a & b) for a in sets for b in sets], minlength=m + 1)
            counts_ok &= all(count_matching(n, m, b) == hist[b] for b in range(m + 1))
    elapsed = time.time() - t0
    ok = (
        worst["sum"] <= 1e-12
        and worst["orthonormality"] <= 1e-10
        and worst["moments"] <= 1e-8
        and worst["refinement"] <= 1e-8
        and worst["unity"] <= 1e-8
        and counts_ok
        and elapsed < 60
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(9, ok, f"{detail}; matching counts {'exact' if counts_ok else 'WRONG'}, {elapsed:.1f}s")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
