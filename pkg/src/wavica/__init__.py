"""Wavelet-projection estimators of the ICA factorization measure."""

from .combinatorics import count_matching, falling_factorial, set_partitions
from .coordinates import CoordinateMap, estimate_alpha, estimate_marginal_alpha, product_map
from .demix import amari_error, contrast_profile_2d, demix, jacobi_sweep, whiten
from .estimators import (
    ContrastEstimate,
    Estimator,
    SplitScheme,
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
from .experiments import (
    SourceSpec,
    generate_mixed,
    monte_carlo_mean,
    monte_carlo_mse,
    rate_experiment,
    rate_slope,
    theoretical_rate,
)
from .wavelets import (
    WaveletSpec,
    build_table,
    eval_phi_jk,
    eval_tensor_phi,
    filter_residuals,
    make_filter,
    table_for,
)

__version__ = "0.1.0"
