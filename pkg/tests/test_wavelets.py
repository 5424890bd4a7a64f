import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import fsolve

from wavica.wavelets import (
    MAX_ORDER,
    UnsupportedOrderError,
    WaveletSpec,
    build_table,
    eval_phi_jk,
    eval_tensor_phi,
    filter_residuals,
    make_filter,
    partition_of_unity_residual,
    refinement_residual,
)

from conftest import cached_table

SQ3 = np.sqrt(3)


@pytest.mark.parametrize("order", range(1, MAX_ORDER + 1))
def test_filter_constraints(order):
    filt = make_filter(order)
    assert len(filt.coeffs) == 2 * order
    res = filter_residuals(filt)
    assert res["sum"] <= 1e-12
    assert res["orthonormality"] <= 1e-10
    assert res["moments"] <= 1e-8


def test_haar_filter():
    np.testing.assert_allclose(make_filter(1).coeffs, [2**-0.5, 2**-0.5], rtol=0, atol=1e-15)


def test_d4_filter_solves_constraint_system():
    def residual(h):
        k = np.arange(4)
        return [
            h.sum() - np.sqrt(2),
            np.dot(h, h) - 1,
            np.sum((-1.0) ** k * h),
            np.sum((-1.0) ** k * k * h),
        ]

    oracle = fsolve(residual, [0.5, 0.8, 0.2, -0.1], xtol=1e-14)
    assert max(abs(r) for r in residual(oracle)) < 1e-12
    np.testing.assert_allclose(make_filter(2).coeffs, oracle, atol=1e-12)


@pytest.mark.parametrize("order", [0, 9, -1])
def test_unsupported_order(order):
    with pytest.raises(UnsupportedOrderError):
        make_filter(order)


def test_haar_table_depth3():
    t = build_table(make_filter(1), 3)
    x = t.grid()
    np.testing.assert_array_equal(t.values, np.where(x < 1, 1.0, 0.0))


def test_d4_integer_values():
    t = cached_table(2)
    assert t(1.0) == pytest.approx((1 + SQ3) / 2, abs=1e-10)
    assert t(2.0) == pytest.approx((1 - SQ3) / 2, abs=1e-10)
    assert t(0.0) == 0.0 and t(3.0) == 0.0


@pytest.mark.parametrize("order", range(1, MAX_ORDER + 1))
def test_refinement_and_partition_of_unity(order):
    t = build_table(make_filter(order), 10)
    assert refinement_residual(t) <= 1e-8
    assert partition_of_unity_residual(t) <= 1e-8
    # direct summation over integer shifts at every grid point
    x = t.grid()[: 2**10]
    total = sum(t(x + k) for k in range(-1, 2 * order + 1))
    assert np.max(np.abs(total - 1)) <= 1e-8


def test_table_support():
    t = cached_table(3)
    assert t(-0.25) == 0.0
    assert t(5.0) == 0.0
    assert t(5.5) == 0.0


def test_eval_phi_jk_examples(haar, d4):
    assert eval_phi_jk(haar, 0, 0, 0.5) == 1.0
    assert eval_phi_jk(haar, 1, 1, 0.75) == pytest.approx(np.sqrt(2), abs=1e-15)
    assert eval_phi_jk(d4, 0, 0, 3.5) == 0.0


def test_haar_last_cell_closed():
    t = cached_table(1)
    assert eval_phi_jk(t, 2, 3, 1.0) == 2.0
    assert eval_phi_jk(t, 2, 4, 1.0) == 0.0


def test_eval_tensor_phi_examples(haar, d4):
    assert eval_tensor_phi(haar, 1, (0, 0), (0.1, 0.1)) == pytest.approx(2.0, abs=1e-15)
    assert eval_tensor_phi(haar, 1, (0, 1), (0.1, 0.1)) == 0.0
    assert eval_tensor_phi(d4, 0, (0, 0), (1.0, 1.0)) == pytest.approx(((1 + SQ3) / 2) ** 2, abs=1e-9)
    with pytest.raises(ValueError):
        eval_tensor_phi(haar, 1, (0, 0, 0), (0.1, 0.1))


def test_eval_phi_matches_scaling():
    t = cached_table(2)
    x = np.linspace(0, 1, 257)
    for j, k in [(0, -1), (2, 1), (3, 5)]:
        np.testing.assert_allclose(eval_phi_jk(t, j, k, x), 2 ** (j / 2) * t(2**j * x - k), atol=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        WaveletSpec(0, 1)
    with pytest.raises(ValueError):
        WaveletSpec(1, -1)
    s = WaveletSpec(2, 3)
    assert (s.k_min, s.k_max, s.n_translates) == (-2, 7, 10)


@settings(max_examples=50, deadline=None)
@given(
    order=st.integers(1, 4),
    j=st.integers(0, 4),
    k=st.integers(-8, 20),
    x=st.floats(-1, 2, allow_nan=False),
)
def test_zero_outside_support(order, j, k, x):
    t = cached_table(order)
    inside = k * 2.0**-j <= x <= (k + 2 * order - 1) * 2.0**-j
    if not inside:
        assert eval_phi_jk(t, j, k, x) == 0.0


@settings(max_examples=50, deadline=None)
@given(order=st.integers(1, 4), j=st.integers(0, 3), x=st.floats(0, 1, allow_nan=False))
def test_far_translates_do_not_overlap(order, j, x):
    t = cached_table(order)
    L = 2 * order - 1
    for k in range(-L, 2**j + 1):
        for k2 in range(k + L, k + L + 3):
            assert eval_phi_jk(t, j, k, x) * eval_phi_jk(t, j, k2, x) == 0.0


@settings(max_examples=30, deadline=None)
@given(
    m=st.integers(1, 3),
    r=st.integers(1, 4),
    pts=st.lists(st.floats(0, 4, allow_nan=False), min_size=3, max_size=3),
)
def test_haar_concentration(m, r, pts):
    # (sum_k h_k)^r == sum_k h_k^r for products of Haar translates
    t = cached_table(1)
    x = pts[:m]
    vals = []
    for k in np.ndindex(*(6,) * m):
        vals.append(np.prod([t(xi - ki) for xi, ki in zip(x, k)]))
    vals = np.array(vals)
    assert vals.sum() ** r == pytest.approx(np.sum(vals**r), abs=1e-12)
