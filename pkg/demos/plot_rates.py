"""
Risk against sample size
========================

Monte Carlo MSE at fixed resolution over a grid of sample sizes, with the
fitted log-log slope next to the tabulated exponent.
"""

from wavica import SourceSpec, WaveletSpec, rate_experiment, theoretical_rate

spec = WaveletSpec(order=1, level=2)
source = SourceSpec("UNIFORM", 2)
grid = (250, 500, 1000, 2000)

for tag in ("C2", "D2_FAST", "DELTA2"):
    r = rate_experiment(tag, source, None, spec, grid, replicates=100, seed=0)
    print(f"{tag:8s} slope {r.slope:6.2f} +/- {r.slope_stderr:.2f}   mse {[f'{m:.2e}' for m in r.mse]}")

# Exponents at the optimal resolution for smoothness s = 1 in d = 2
for tag in ("C2", "D2", "DELTA2"):
    print(tag, theoretical_rate(tag, 1, 2, "SMALL_J"))

# At independence the plug-in risk is the squared bias (2^jd / n)^2, so its
# slope is close to -2; the n^-1 order appears once the sources are dependent.
