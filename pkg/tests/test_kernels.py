import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singdecay.discop import default_quadratures
from singdecay.kernels import (
    AnalyticProduct,
    CosineSobolev,
    EigenSeries,
    Gaussian,
    Grid,
    Rank1,
    all_index_tuples,
    axes_to_alpha,
    compositions,
    derivative_kernel,
    evaluate,
    exact_spectrum,
    multiplicity,
)
from singdecay.neumann import eval_eigenfunction
from singdecay.quadrature import tensor_quadrature


@pytest.mark.parametrize("d, n, m0, expected", [(2, 3, 0, 4), (3, 2, 0, 6), (2, 3, 1, 2)])
def test_multiplicity_examples(d, n, m0, expected):
    assert multiplicity(d, n, m0) == expected


@given(d=st.integers(1, 4), n=st.integers(0, 9), m0=st.sampled_from([0, 1]))
@settings(max_examples=80, deadline=None)
def test_multiplicity_brute_force(d, n, m0):
    brute = [m for m in itertools.product(range(n + 1), repeat=d) if sum(m) == n and min(m) >= m0]
    assert multiplicity(d, n, m0) == len(brute)
    assert compositions(d, n, m0) == sorted(brute)


def test_exact_spectrum_examples():
    np.testing.assert_allclose(AnalyticProduct(d=1, tau=0.5, N=4).exact_spectrum().values, [0.5, 0.25, 0.125, 0.0625])
    cs = CosineSobolev(d=2, p=2, lam=-1.5, N=4).exact_spectrum().values
    np.testing.assert_allclose(cs, [2 ** -3.5] + [3 ** -3.5] * 2 + [4 ** -3.5] * 3)
    np.testing.assert_allclose(EigenSeries(d=1, p=1, N=3).exact_spectrum().values, [1, 1 / 4, 1 / 9])


def test_cosine_sobolev_first_coefficient():
    k = CosineSobolev(d=1, p=2, lam=-1.0, N=5)
    assert k.coefficients[0] == 1.0
    assert k.y_modes[0].tolist() == [1]


def test_defaults():
    k = CosineSobolev(d=2, p=1)
    assert k.lam == -1.5 and k.N == 24
    assert EigenSeries(d=3, p=1).N == 12


@pytest.mark.parametrize(
    "make",
    [
        lambda: CosineSobolev(d=2, p=1, lam=-1.0),
        lambda: CosineSobolev(d=1, p=0),
        lambda: AnalyticProduct(d=1, tau=1.0),
        lambda: AnalyticProduct(d=1, tau=0.0),
        lambda: Gaussian(width=0.0),
    ],
)
def test_invalid_parameters(make):
    with pytest.raises(ValueError):
        make()


def test_rank1_constant():
    k = Rank1(lambda x: np.ones(np.shape(x)[:-1]), lambda y: np.ones(np.shape(y)[:-1]))
    assert evaluate(k, np.array([0.3]), np.array([2.0])) == 1.0


def _brute_series(k, x, y, alpha=None):
    """Independent evaluation of ``sum c_t g_t(x) d^alpha h_t(y)`` term by term."""
    total = 0.0
    for c, gm, hm in zip(k.coefficients, k.x_modes, k.y_modes):
        total += c * eval_eigenfunction(gm, x) * eval_eigenfunction(hm, y, alpha)
    return total


@pytest.mark.parametrize(
    "k",
    [
        CosineSobolev(d=2, p=2, N=6),
        EigenSeries(d=2, p=1, N=10),
        AnalyticProduct(d=3, tau=0.4, N=5),
        AnalyticProduct(d=2, tau=0.4, N=5, out_dim=2),
    ],
)
def test_series_matches_termwise_sum(k):
    rng = np.random.default_rng(0)
    X = rng.uniform(0, math.pi, (5, k.out_dim))
    Y = rng.uniform(0, math.pi, (4, k.d))
    M = k.matrix(X, Y)
    for i, j in itertools.product(range(5), range(4)):
        ref = _brute_series(k, X[i], Y[j])
        assert M[i, j] == pytest.approx(ref, abs=1e-13)
        assert k(X[i], Y[j]) == pytest.approx(ref, abs=1e-13)


def test_analytic_partial_sums_geometric():
    x = np.array([0.7])
    y = np.array([0.0])
    a = AnalyticProduct(d=1, tau=0.5, N=40)(x, y)
    b = AnalyticProduct(d=1, tau=0.5, N=41)(x, y)
    assert abs(a - b) < 1e-11


@given(I=st.lists(st.integers(1, 2), min_size=1, max_size=2), y=st.tuples(st.floats(0.1, 3.0), st.floats(0.1, 3.0)))
@settings(max_examples=30, deadline=None)
def test_series_derivative_finite_difference(I, y):
    k = EigenSeries(d=2, p=2, N=8)
    dk = derivative_kernel(k, I)
    x = np.array([0.9])
    y = np.array(y)
    h = 1e-4
    if len(I) == 1:
        e = np.eye(2)[I[0] - 1] * h
        fd = (k(x, y + e) - k(x, y - e)) / (2 * h)
    else:
        ea, eb = np.eye(2)[I[0] - 1] * h, np.eye(2)[I[1] - 1] * h
        fd = (k(x, y + ea + eb) - k(x, y + ea - eb) - k(x, y - ea + eb) + k(x, y - ea - eb)) / (4 * h * h)
    assert dk(x, y) == pytest.approx(fd, abs=1e-5)


def test_derivative_termwise_exact():
    k = EigenSeries(d=2, p=1, N=6)
    y = np.array([0.4, 1.9])
    x = np.array([2.2])
    assert derivative_kernel(k, (2,))(x, y) == pytest.approx(_brute_series(k, x, y, (0, 1)), abs=1e-14)


def test_eigen_series_first_derivative_spectrum():
    k = EigenSeries(d=1, p=1, N=10)
    s = derivative_kernel(k, (1,)).exact_spectrum().values
    a = k.coefficients
    np.testing.assert_allclose(np.sort(s)[::-1], np.sort(a * np.arange(1, 11))[::-1])


def test_cosine_sobolev_second_derivative_square_summable():
    k = CosineSobolev(d=1, p=2, lam=-1.0, N=32)
    s = derivative_kernel(k, (1, 1)).exact_spectrum().values
    # n^{-3} * n^2 = n^{-1}, square-summable
    np.testing.assert_allclose(np.sort(s), np.sort(1.0 / np.arange(1, 33)))


def test_empty_derivative_is_identity():
    k = CosineSobolev(d=1, p=1)
    assert derivative_kernel(k, ()) is k


def test_derivative_order_limit_and_grid():
    with pytest.raises(ValueError):
        derivative_kernel(CosineSobolev(d=1, p=1), (1, 1))
    with pytest.raises(TypeError):
        derivative_kernel(Grid(np.zeros((2, 2))), (1,))


@pytest.mark.parametrize("I", [(1,), (2,), (1, 1), (1, 2), (2, 2, 1)])
def test_gaussian_derivative_finite_difference(I):
    g = Gaussian(width=0.8)
    dg = derivative_kernel(g, I)
    x = np.array([1.0, 2.0])
    y = np.array([1.3, 1.1])
    h = 1e-3

    def deriv(f, axes, y):
        if not axes:
            return f(x, y)
        e = np.eye(2)[axes[0] - 1] * h
        return (deriv(f, axes[1:], y + e) - deriv(f, axes[1:], y - e)) / (2 * h)

    assert dg(x, y) == pytest.approx(deriv(g, I, y), rel=1e-4, abs=1e-7)


def test_rank1_derivative():
    k = Rank1(lambda x: x[..., 0], lambda y: np.sin(y[..., 0]), dv=lambda y, a: np.sin(y[..., 0] + a[0] * math.pi / 2))
    dk = derivative_kernel(k, (1, 1))
    assert dk(np.array([2.0]), np.array([0.5])) == pytest.approx(-2 * math.sin(0.5))
    with pytest.raises(ValueError):
        derivative_kernel(Rank1(k.u, k.v), (1,))


def test_exact_spectrum_rejects_non_series():
    with pytest.raises(TypeError):
        exact_spectrum(Gaussian())
    with pytest.raises(TypeError):
        exact_spectrum(Grid(np.eye(2)))


def test_grid_is_matrix_only():
    g = Grid(np.arange(6.0).reshape(2, 3))
    np.testing.assert_array_equal(g.matrix(np.zeros((2, 1)), np.zeros((3, 1))), g.values)
    with pytest.raises(TypeError):
        g(np.zeros(1), np.zeros(1))


@pytest.mark.parametrize(
    "k",
    [CosineSobolev(d=1, p=2), CosineSobolev(d=2, p=1, N=10), EigenSeries(d=2, p=1, N=30), AnalyticProduct(d=2, tau=0.6, N=10)],
)
def test_exact_spectrum_hs_norm_matches_quadrature(k):
    qx, qy = default_quadratures(k)
    K = k.matrix(qx.points(), qy.points())
    hs = qx.full_weights() @ (K * K) @ qy.full_weights()
    s = k.exact_spectrum().values
    assert np.all(np.diff(s) <= 0)
    assert abs(np.sum(s ** 2) - hs) < 1e-8


def test_eigen_series_growth_constant():
    k = EigenSeries(d=2, p=1, N=24)
    a = k.coefficients
    C = k.growth_constant()
    assert math.isfinite(C)
    assert np.all(a[:12] / a[1:24:2] <= C + 1e-15)
    assert np.all(a > 0) and np.all(np.diff(a) <= 0)


def test_index_helpers():
    assert all_index_tuples(2, 2) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert axes_to_alpha((2, 1, 2), 3) == (1, 2, 0)
    with pytest.raises(ValueError):
        axes_to_alpha((4,), 3)
