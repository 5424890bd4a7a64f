"""Batch front end: CSV samples in, CSV or JSON-lines reports out.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

Report columns
--------------
contrast   estimator,N,j,d,n,value
rates      kind,estimator,N,j,d,n,mse,stderr,slope,slope_stderr,
           theoretical_exponent,theoretical_rational
           (one ``mse`` row per sample size, then one ``summary`` row)
demix      section,values...  with sections W, unmixing, final_contrast,
           trace (sweep,plane,angle,contrast) and amari (with --truth)
gen        one observation per row, 17 significant digits
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from contextlib import contextmanager

import numpy as np

from . import combinatorics, estimators, experiments, wavelets
from .demix import SingularCovarianceError, amari_error, demix
from .estimators import BudgetExceededError, ResolutionWarning, d2_brute, d2_fast
from .experiments import InoperableRegimeError, Regime, SourceSpec, theoretical_rate
from .wavelets import WaveletSpec, table_for

ESTIMATORS = {
    "c2": "C2",
    "b2": "B2",
    "d2": "D2_FAST",
    "d2-brute": "D2_BRUTE",
    "f2": "F2",
    "g2": "G2",
    "delta2": "DELTA2",
}
SOURCES = {"uniform": "UNIFORM", "bimodal": "BIMODAL_MIX", "triangular": "TRIANGULAR"}


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_matrix(path):
    """Parse a comma-separated file of floats; a non-numeric first token marks a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    start = 0 if _is_number(rows[0][0].strip()) else 1
    out = []
    for r, row in enumerate(rows[start:], start=start + 1):
        values = []
        for c, cell in enumerate(row, start=1):
            try:
                values.append(float(cell.strip()))
            except ValueError:
                raise UsageError(f"{path}: row {r}, column {c}: cannot parse {cell!r}") from None
        out.append(values)
    widths = {len(v) for v in out}
    if len(widths) != 1:
        raise UsageError(f"{path}: rows have differing numbers of columns {sorted(widths)}")
    if not out:
        raise UsageError(f"{path}: no data rows")
    x = np.array(out)
    if not np.all(np.isfinite(x)):
        raise UsageError(f"{path}: non-finite values")
    return x


def write_matrix(rows, fh):
    for row in np.atleast_2d(rows):
        fh.write(",".join("%.17g" % v for v in row) + "\n")


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(fh, fmt, header, rows):
    if fmt == "jsonl":
        for row in rows:
            fh.write(json.dumps(dict(zip(header, row))) + "\n")
    else:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _spec(args):
    if not 1 <= args.wavelet <= wavelets.MAX_ORDER:
        raise UsageError(f"--wavelet must be in 1..{wavelets.MAX_ORDER}")
    if args.level < 0:
        raise UsageError("--level must be non-negative")
    return WaveletSpec(args.wavelet, args.level)


def _report_warnings(caught):
    for w in caught:
        if issubclass(w.category, ResolutionWarning):
            print(f"warning: {w.message}", file=sys.stderr)


def cmd_contrast(args):
    spec = _spec(args)
    x = read_matrix(args.input)
    if x.min() < 0 or x.max() > 1:
        raise UsageError(f"{args.input}: data must lie in [0, 1]")
    table = table_for(spec)
    n, d = x.shape
    tag = ESTIMATORS[args.estimator]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        if 2 ** (spec.level * d) >= n * n:
            warnings.warn(
                f"2^(jd) = 2^{spec.level * d} >= n^2 = {n * n}: mean squared error does not "
                "vanish in this regime",
                ResolutionWarning,
            )
            warnings.simplefilter("ignore", ResolutionWarning)
        try:
            value = experiments.estimate(tag, x, spec, table)
        except (ValueError, BudgetExceededError) as exc:
            raise UsageError(str(exc)) from None
    _report_warnings(caught)
    with _output(args.output) as fh:
        _emit(
            fh,
            args.format,
            ["estimator", "N", "j", "d", "n", "value"],
            [[args.estimator, spec.order, spec.level, d, n, repr(float(value))]],
        )
    return 0


def _n_grid(text):
    try:
        grid = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--n-grid must be comma-separated integers, got {text!r}") from None
    if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise UsageError("--n-grid needs at least 3 strictly increasing positive sizes")
    return grid


def _mixing(args, d):
    if args.mixing is None:
        return np.eye(d)
    A = read_matrix(args.mixing)
    if A.shape != (d, d):
        raise UsageError(f"{args.mixing}: expected a {d}x{d} matrix, got {A.shape}")
    if abs(np.linalg.det(A)) <= 1e-10:
        raise UsageError(f"{args.mixing}: mixing matrix is singular")
    return A


def cmd_rates(args):
    if args.s is None or not args.s > 0:
        raise UsageError("--s must be a positive smoothness")
    if args.replicates < 2:
        raise UsageError("--replicates must be at least 2")
    if args.d < 1:
        raise UsageError("--d must be positive")
    spec = _spec(args)
    grid = _n_grid(args.n_grid)
    A = _mixing(args, args.d)
    tag = ESTIMATORS[args.estimator]
    if tag == "B2":
        raise UsageError("no tabulated rate for b2")
    source = SourceSpec(SOURCES[args.source], args.d)
    regime = Regime.SMALL_J if 2 ** (spec.level * args.d) < grid[0] else Regime.LARGE_J
    try:
        rate = theoretical_rate(tag, args.s, args.d, regime)
        exponent, rational = repr(float(rate)), str(rate)
    except InoperableRegimeError:
        exponent = rational = "inoperable"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("once", ResolutionWarning)
        try:
            report = experiments.rate_experiment(
                tag, source, A, spec, grid, args.replicates, args.seed
            )
        except (ValueError, BudgetExceededError) as exc:
            raise UsageError(str(exc)) from None
    _report_warnings(caught)
    base = [args.estimator, spec.order, spec.level, args.d]
    rows = [
        ["mse", *base, n, repr(m), repr(se), "", "", "", ""]
        for n, m, se in zip(report.n_grid, report.mse, report.stderr)
    ]
    rows.append(
        ["summary", *base, "", "", "", repr(report.slope), repr(report.slope_stderr), exponent, rational]
    )
    header = [
        "kind", "estimator", "N", "j", "d", "n", "mse", "stderr",
        "slope", "slope_stderr", "theoretical_exponent", "theoretical_rational",
    ]
    with _output(args.output) as fh:
        _emit(fh, args.format, header, rows)
    return 0


def cmd_demix(args):
    if args.sweeps < 0:
        raise UsageError("--sweeps must be non-negative")
    if args.grid_size < 1:
        raise UsageError("--grid-size must be positive")
    spec = _spec(args)
    x = read_matrix(args.input)
    n, d = x.shape
    if d < 2:
        raise UsageError("demixing needs at least 2 columns")
    truth = None
    if args.truth is not None:
        truth = read_matrix(args.truth)
        if truth.shape != (d, d):
            raise UsageError(f"{args.truth}: expected a {d}x{d} matrix")
    table = table_for(spec)
    try:
        result = demix(x, spec, table, sweeps=args.sweeps, grid_size=args.grid_size)
    except (SingularCovarianceError, np.linalg.LinAlgError) as exc:
        raise NumericalError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in result.W:
            w.writerow(["W", *("%.17g" % v for v in row)])
        for row in result.unmixing:
            w.writerow(["unmixing", *("%.17g" % v for v in row)])
        w.writerow(["final_contrast", repr(result.final_contrast)])
        for sweep, plane, angle, value in result.trace:
            plane_txt = "" if plane is None else f"{plane[0]}-{plane[1]}"
            w.writerow(["trace", sweep, plane_txt, repr(float(angle)), repr(float(value))])
        if truth is not None:
            w.writerow(["amari", repr(amari_error(result.unmixing @ truth))])
    return 0


def cmd_gen(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.d < 1:
        raise UsageError("--d must be positive")
    A = _mixing(args, args.d)
    x, (lo, scale) = experiments.generate_mixed(
        SourceSpec(SOURCES[args.source], args.d), A, args.n, args.seed, return_map=True
    )
    with _output(args.output) as fh:
        write_matrix(x, fh)
    if args.truth is not None:
        # mixing as seen by the written sample (after the unit-cube rescaling)
        with open(args.truth, "w") as fh:
            write_matrix(A / scale[:, None], fh)
    return 0


def _selftest_checks():
    checks = []
    for N in range(1, wavelets.MAX_ORDER + 1):
        filt = wavelets.make_filter(N)
        res = wavelets.filter_residuals(filt)
        table = wavelets.build_table(filt, 10)
        ok = (
            res["sum"] <= 1e-12
            and res["orthonormality"] <= 1e-10
            and res["moments"] <= 1e-8
            and wavelets.refinement_residual(table) <= 1e-8
            and wavelets.partition_of_unity_residual(table) <= 1e-8
        )
        checks.append((f"D{2 * N} filter and table", ok))
    checks.append(
        ("Bell numbers", [len(combinatorics.set_partitions(m)) for m in (1, 4, 6)] == [1, 15, 203])
    )
    rng = np.random.default_rng(0)
    worst = 0.0
    for N in (1, 2):
        spec = WaveletSpec(N, 1)
        table = table_for(spec)
        x = rng.random((7, 2))
        a, b = d2_brute(x, spec, table).value, d2_fast(x, spec, table).value
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1.0))
    checks.append(("d2_fast matches d2_brute", worst <= 1e-9))
    x = rng.random((20, 1))
    spec = WaveletSpec(2, 2)
    checks.append(("d=1 contrast vanishes", estimators.c2_plugin(x, spec, table_for(spec)).value == 0))
    return checks


def cmd_selftest(args):
    checks = _selftest_checks()
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if all(ok for _, ok in checks) else 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wavica",
        description="Wavelet estimators of the ICA factorization measure.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def wavelet_flags(p):
        p.add_argument("--wavelet", type=int, default=1, help="Daubechies order N (D2N), 1 = Haar")
        p.add_argument("--level", type=int, default=2, help="resolution level j")

    def output_flags(p):
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "jsonl"], default="csv")

    p = sub.add_parser("contrast", help="estimate the contrast of a CSV sample")
    wavelet_flags(p)
    output_flags(p)
    p.add_argument("--estimator", choices=list(ESTIMATORS), default="c2")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("rates", help="Monte Carlo MSE over an n grid and fitted log-log slope")
    wavelet_flags(p)
    output_flags(p)
    p.add_argument("--estimator", choices=[e for e in ESTIMATORS if e != "b2"], default="c2")
    p.add_argument("--s", type=float, default=None, help="Besov smoothness for the reference exponent")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--source", choices=list(SOURCES), default="uniform")
    p.add_argument("--mixing", default=None, help="CSV file with the d x d mixing matrix")
    p.add_argument("--n-grid", default="250,500,1000,2000")
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("demix", help="whiten and rotate a CSV sample to minimize the contrast")
    wavelet_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--grid-size", type=int, default=90)
    p.add_argument("--sweeps", type=int, default=5)
    p.add_argument("--truth", default=None, help="CSV file with the true mixing matrix")
    p.set_defaults(func=cmd_demix)

    p = sub.add_parser("gen", help="draw a mixed sample mapped into [0, 1]^d")
    p.add_argument("--source", choices=list(SOURCES), default="uniform")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mixing", default=None, help="CSV file with the d x d mixing matrix")
    p.add_argument("--output", default=None)
    p.add_argument("--truth", default=None, help="write the effective mixing matrix here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="quick internal consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
