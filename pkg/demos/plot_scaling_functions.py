"""
Daubechies scaling functions
============================

Build the D2N filters, tabulate phi on a dyadic grid, and check the
properties every estimator relies on.
"""

import numpy as np

from wavica import build_table, filter_residuals, make_filter
from wavica.wavelets import partition_of_unity_residual, refinement_residual

# The D4 filter: four taps summing to sqrt(2)
filt = make_filter(2)
print("D4 taps:", np.round(filt.coeffs, 6))
print("residuals:", {k: f"{v:.1e}" for k, v in filter_residuals(filt).items()})

# Tabulate phi at depth 10 and read the integer points
table = build_table(filt, 10)
print("phi(1), phi(2) =", table(np.array([1.0, 2.0])), "expected", (1 + np.sqrt(3)) / 2, (1 - np.sqrt(3)) / 2)

# Every order up to D16 satisfies refinement and partition of unity
for N in range(1, 9):
    t = build_table(make_filter(N), 10)
    print(f"D{2 * N:<2d} refinement {refinement_residual(t):.1e}  unity {partition_of_unity_residual(t):.1e}")
