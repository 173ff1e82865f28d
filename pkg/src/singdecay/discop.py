"""Weighted-collocation discretization of integral operators.

The matrix of ``K phi(x) = int k(x, y) phi(y) dy`` on target rule ``qx`` and
source rule ``qy`` is ``A_ij = sqrt(wx_i) k(x_i, y_j) sqrt(wy_j)``. With this
scaling the matrix SVD is the SVD of the quadrature-induced operator between
the weighted l2 spaces, so the Hilbert-Schmidt identity, dilation law and
domain-inclusion inequality hold at the matrix level.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quadrature import Quadrature, affine_image, restrict, sub_box_indices
from .spectrum import FLOOR_RTOL, SingularSpectrum

MAX_MATRIX_SIDE = 12000
ASSEMBLY_BLOCK = 1 << 22  # kernel samples per block for plain callables


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: np.ndarray
    source_quad: Quadrature | None = None
    target_quad: Quadrature | None = None

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("operator matrix must be two-dimensional")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("operator matrix has non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _sample_kernel(kernel: Callable, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if hasattr(kernel, "matrix"):
        return np.asarray(kernel.matrix(X, Y), dtype=float)
    rows = max(1, ASSEMBLY_BLOCK // max(len(Y), 1))
    out = np.empty((len(X), len(Y)))
    for r0 in range(0, len(X), rows):
        out[r0 : r0 + rows] = kernel(X[r0 : r0 + rows, None, :], Y[None, :, :])
    return out


def assemble(kernel: Callable, qx: Quadrature, qy: Quadrature) -> DiscreteOperator:
    """Weighted sample matrix; rows follow ``qx`` grid order, columns ``qy``."""
    if qx.size > MAX_MATRIX_SIDE or qy.size > MAX_MATRIX_SIDE:
        raise ValueError(f"grid sizes {qx.size} x {qy.size} exceed the dense cap {MAX_MATRIX_SIDE}")
    X = qx.points()
    Y = qy.points()
    K = _sample_kernel(kernel, X, Y)
    bad = ~np.isfinite(K)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise ValueError(f"kernel is not finite at x={X[i].tolist()}, y={Y[j].tolist()} (entry {i}, {j})")
    sx = np.sqrt(qx.full_weights())
    sy = np.sqrt(qy.full_weights())
    return DiscreteOperator(sx[:, None] * K * sy[None, :], source_quad=qy, target_quad=qx)


def singular_values(A: DiscreteOperator | np.ndarray) -> SingularSpectrum:
    """Full spectrum, clamped at zero and sorted nonincreasing."""
    M = A.matrix if isinstance(A, DiscreteOperator) else np.asarray(A, dtype=float)
    if M.size == 0:
        return SingularSpectrum(np.zeros(0))
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"SVD did not converge for a {M.shape} matrix") from exc
    return SingularSpectrum.from_unsorted(s)


def hs_identity_gap(kernel: Callable, qx: Quadrature, qy: Quadrature) -> float:
    """``|sum s_n^2 - int int k^2| / int int k^2`` (absolute gap when the kernel vanishes)."""
    A = assemble(kernel, qx, qy)
    s = singular_values(A)
    X = qx.points()
    Y = qy.points()
    K = _sample_kernel(kernel, X, Y)
    hs = float(qx.full_weights() @ (K * K) @ qy.full_weights())
    gap = abs(s.squared_sum() - hs)
    return gap / hs if hs > 0 else gap


def dilation_check(
    kernel: Callable,
    q: Quadrature,
    t: float,
    v0: Sequence[float] | float = 0.0,
    qx: Quadrature | None = None,
) -> float:
    """Max relative deviation of ``s_n(K~)`` from ``t^(d/2) s_n(K)``.

    ``K~`` has kernel ``k(x, (v - v0)/t)`` on the image of ``q`` under
    ``y -> t y + v0``. The target rule ``qx`` defaults to ``q``. Indices with
    ``s_n(K)`` at or below the numerical floor are skipped.
    """
    t = float(t)
    if not t > 0:
        raise ValueError(f"dilation factor must be positive, got {t}")
    qx = q if qx is None else qx
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (q.dim,))
    K = singular_values(assemble(kernel, qx, q))
    qt = affine_image(q, t, v0)

    Kt = singular_values(assemble(_PulledBack(kernel, t, v0), qx, qt))
    scale = t ** (q.dim / 2)
    keep = K.values > FLOOR_RTOL * K.values[0]
    if not keep.any():
        return 0.0
    dev = np.abs(Kt.values[keep] - scale * K.values[keep]) / K.values[keep]
    return float(dev.max())


@dataclass(frozen=True, eq=False)
class _PulledBack:
    """``k(x, (v - v0) / t)``, sampled through the same path as ``k``."""

    kernel: Callable
    t: float
    v0: np.ndarray

    def __call__(self, x, v):
        return self.kernel(x, (np.asarray(v) - self.v0) / self.t)

    def matrix(self, X, V):
        Y = (np.asarray(V) - self.v0) / self.t
        return _sample_kernel(self.kernel, X, Y)


@dataclass(frozen=True)
class InclusionResult:
    holds: bool
    margins: np.ndarray


def inclusion_check(
    kernel: Callable,
    q_full: Quadrature,
    sub_box: Sequence[tuple[float, float]],
    qx: Quadrature | None = None,
    tol: float = 1e-12,
) -> InclusionResult:
    """Compare spectra of ``K`` on ``q_full`` and of its restriction to ``sub_box``.

    The restricted operator uses the columns of ``q_full`` inside the
    aligned sub-box, so ``s_n(K_2) <= s_n(K)`` is column-deletion interlacing.
    """
    qx = q_full if qx is None else qx
    cols = sub_box_indices(q_full, sub_box)
    A = assemble(kernel, qx, q_full)
    K = singular_values(A)
    sub = DiscreteOperator(A.matrix[:, cols], source_quad=restrict(q_full, sub_box), target_quad=qx)
    K2 = singular_values(sub)
    margins = K.values[: len(K2)] - K2.values
    return InclusionResult(bool(np.all(margins >= -tol)), margins)


def compose(A: DiscreteOperator, B: DiscreteOperator) -> DiscreteOperator:
    """``A B``: apply ``B`` first. ``B``'s target rule must be ``A``'s source rule."""
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"cannot compose {A.shape} with {B.shape}")
    if A.source_quad is not None and B.target_quad is not None and A.source_quad is not B.target_quad:
        if A.source_quad.size != B.target_quad.size or not np.allclose(
            A.source_quad.full_weights(), B.target_quad.full_weights()
        ):
            raise ValueError("inner quadratures of the composed operators differ")
    return DiscreteOperator(A.matrix @ B.matrix, source_quad=B.source_quad, target_quad=A.target_quad)


def add(A: DiscreteOperator, B: DiscreteOperator) -> DiscreteOperator:
    if A.shape != B.shape:
        raise ValueError(f"cannot add {A.shape} and {B.shape}")
    return DiscreteOperator(A.matrix + B.matrix, source_quad=A.source_quad, target_quad=A.target_quad)


def adjoint(A: DiscreteOperator) -> DiscreteOperator:
    return DiscreteOperator(A.matrix.T.copy(), source_quad=A.target_quad, target_quad=A.source_quad)


def default_quadratures(kernel, n_quad: int | None = None, d: int | None = None):
    """Target and source rules that resolve every mode of a series kernel.

    Non-series kernels get ``n_quad`` nodes per axis on ``(0, pi)^d`` for
    both sides.
    """
    from .kernels import SeriesKernel
    from .quadrature import nodes_for_order, tensor_quadrature

    if isinstance(kernel, SeriesKernel):
        base = kernel.base if hasattr(kernel, "base") else kernel
        nx = nodes_for_order(base.max_x_order)
        ny = nodes_for_order(base.max_y_order)
        if n_quad is not None:
            nx, ny = max(nx, n_quad), max(ny, n_quad)
        return tensor_quadrature(base.out_dim, nx), tensor_quadrature(base.d, ny)
    if d is None:
        raise ValueError("dimension required for non-series kernels")
    n = 40 if n_quad is None else n_quad
    q = tensor_quadrature(d, n)
    return q, q


def spectrum_of(kernel, qx: Quadrature, qy: Quadrature) -> SingularSpectrum:
    return singular_values(assemble(kernel, qx, qy))


__all__ = [
    "DiscreteOperator",
    "InclusionResult",
    "add",
    "adjoint",
    "assemble",
    "compose",
    "default_quadratures",
    "dilation_check",
    "hs_identity_gap",
    "inclusion_check",
    "singular_values",
    "spectrum_of",
]
