import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singdecay.quadrature import (
    affine_image,
    composite_refine,
    gauss_legendre_axis,
    nodes_for_order,
    restrict,
    sub_box_indices,
    tensor_quadrature,
)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 64, 150])
def test_axis_rule_matches_numpy_leggauss(n):
    x, w = gauss_legendre_axis(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, xr, atol=1e-14)
    np.testing.assert_allclose(w, wr, atol=1e-14)


def test_midpoint_rule_on_zero_pi():
    x, w = gauss_legendre_axis(1, (0.0, math.pi))
    assert x[0] == pytest.approx(math.pi / 2, abs=1e-15)
    assert w[0] == pytest.approx(math.pi, abs=1e-15)


def test_two_point_rule():
    x, w = gauss_legendre_axis(2)
    np.testing.assert_allclose(x, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(w, [1.0, 1.0], atol=1e-15)


def test_cubic_integrated_exactly_by_two_points():
    x, w = gauss_legendre_axis(2, (0.0, math.pi))
    assert np.dot(w, x ** 3) == pytest.approx(math.pi ** 4 / 4, rel=1e-12)


@pytest.mark.parametrize("n, interval", [(0, (0, 1)), (-1, (0, 1)), (3, (1, 1)), (3, (2, 1))])
def test_axis_rule_rejects_bad_input(n, interval):
    with pytest.raises(ValueError):
        gauss_legendre_axis(n, interval)


@given(
    n=st.integers(1, 12),
    coeffs=st.lists(st.floats(-3, 3), min_size=1, max_size=24),
    a=st.floats(-2, 2),
    length=st.floats(0.1, 4),
)
@settings(max_examples=80, deadline=None)
def test_polynomial_exactness(n, coeffs, a, length):
    coeffs = np.array(coeffs[: 2 * n])  # degree <= 2n - 1
    b = a + length
    x, w = gauss_legendre_axis(n, (a, b))
    P = np.polynomial.Polynomial(coeffs)
    exact = P.integ()(b) - P.integ()(a)
    scale = np.polynomial.Polynomial(np.abs(coeffs)).integ()(max(abs(a), abs(b))) * 2 + 1e-300
    assert abs(np.dot(w, P(x)) - exact) <= 1e-10 * scale


@given(n=st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_axis_nodes_increasing_interior_positive(n):
    x, w = gauss_legendre_axis(n, (0.0, math.pi))
    assert np.all(np.diff(x) > 0)
    assert x[0] > 0 and x[-1] < math.pi
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(math.pi, rel=1e-12)


@pytest.mark.parametrize(
    "d, n, box, size, vol",
    [
        (2, 3, None, 9, math.pi ** 2),
        (1, 50, None, 50, math.pi),
        (3, 2, [(0, 1)] * 3, 8, 1.0),
    ],
)
def test_tensor_quadrature_size_and_weight(d, n, box, size, vol):
    q = tensor_quadrature(d, n, box)
    assert q.size == size
    assert len(q.points()) == size
    assert q.total_weight() == pytest.approx(vol, rel=1e-12)
    assert q.full_weights().sum() == pytest.approx(vol, rel=1e-12)


def test_tensor_quadrature_rejects_zero_dim():
    with pytest.raises(ValueError):
        tensor_quadrature(0, 3)


def test_points_and_iterator_agree():
    q = tensor_quadrature(3, 3, [(0, 1), (1, 2), (0, 3)])
    pts = list(q.iter_points())
    np.testing.assert_allclose(np.array([p for p, _ in pts]), q.points())
    np.testing.assert_allclose([w for _, w in pts], q.full_weights())


def test_tensor_integrates_separable_product():
    q = tensor_quadrature(2, 12)
    X = q.points()
    # int cos^2(x) y^3 over (0, pi)^2 = (pi/2)(pi^4/4)
    assert q.integrate(np.cos(X[:, 0]) ** 2 * X[:, 1] ** 3) == pytest.approx(math.pi ** 5 / 8, rel=1e-12)


def test_affine_identity():
    q = tensor_quadrature(2, 5)
    r = affine_image(q, 1.0, 0.0)
    np.testing.assert_array_equal(r.points(), q.points())
    np.testing.assert_array_equal(r.full_weights(), q.full_weights())


def test_affine_dilation_d1():
    q = affine_image(tensor_quadrature(1, 10), 2.0)
    assert q.box == ((0.0, 2 * math.pi),)
    assert q.total_weight() == pytest.approx(2 * math.pi, rel=1e-12)


@given(t=st.floats(0.05, 20), v=st.floats(-5, 5), d=st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_affine_weight_scaling(t, v, d):
    q = tensor_quadrature(d, 4)
    r = affine_image(q, t, v)
    assert r.full_weights().sum() == pytest.approx(t ** d * q.full_weights().sum(), rel=1e-13)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_affine_rejects_nonpositive(t):
    with pytest.raises(ValueError):
        affine_image(tensor_quadrature(1, 3), t)


def test_composite_unchanged_for_one_split():
    q = tensor_quadrature(1, 4)
    assert composite_refine(q, 1) is q


def test_composite_two_splits():
    q = composite_refine(tensor_quadrature(1, 4), 2)
    assert q.size == 8
    assert q.total_weight() == pytest.approx(math.pi, rel=1e-12)
    # each half carries a scaled 4-point rule
    x, _ = gauss_legendre_axis(4, (0, math.pi / 2))
    np.testing.assert_allclose(q.nodes[0][:4], x, atol=1e-15)


def test_sub_box_nodes_are_subset():
    q = composite_refine(tensor_quadrature(1, 4), 2)
    sub = restrict(q, [(0.0, math.pi / 2)])
    assert set(sub.nodes[0].tolist()) <= set(q.nodes[0].tolist())
    assert sub.total_weight() == pytest.approx(math.pi / 2, rel=1e-12)


def test_sub_box_indices_2d():
    q = composite_refine(tensor_quadrature(2, 3), 2)
    idx = sub_box_indices(q, [(0.0, math.pi / 2), (math.pi / 2, math.pi)])
    assert len(idx) == 9
    pts = q.points()[idx]
    assert np.all(pts[:, 0] < math.pi / 2) and np.all(pts[:, 1] > math.pi / 2)


def test_sub_box_rejects_unaligned():
    q = composite_refine(tensor_quadrature(1, 4), 2)
    with pytest.raises(ValueError):
        sub_box_indices(q, [(0.0, 1.0)])


def test_resolution_floor():
    assert nodes_for_order(5) == 18
    assert tensor_quadrature(1, 18).max_resolved_order() == 5
    assert composite_refine(tensor_quadrature(1, 18), 3).max_resolved_order() == 5
