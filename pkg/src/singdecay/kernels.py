"""Kernel families, including the series constructions with closed-form spectra.

Every kernel is callable as ``k(x, y)`` with broadcasting over leading axes
(``x[..., d_out]``, ``y[..., d]``) and exposes ``matrix(X, Y)`` for
evaluation on two point clouds.

Series kernels have the form ``sum_t c_t g_t(x) h_t(y)`` where the ``h_t``
are products of normalized cosine modes on ``(0, pi)^d`` and the ``g_t``
run through a fixed enumeration of the cosine basis of the output box
``(0, pi)^{d_out}`` (constant mode first). Both families are orthonormal,
so the singular values are the ``|c_t|``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import hermite_e

from .neumann import enumerate_eigenpairs, phi
from .spectrum import ExactSpectrum

DEFAULT_TRUNCATION = {1: 32, 2: 24, 3: 12}


def multiplicity(d: int, n: int, min_entry: int = 0) -> int:
    """Number of ``m`` in Z^d with ``m_j >= min_entry`` and ``|m| = n``."""
    if n < 0 or d < 1:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    free = n - d * min_entry
    if free < 0:
        return 0
    return math.comb(free + d - 1, d - 1)


def compositions(d: int, n: int, min_entry: int = 0) -> list[tuple[int, ...]]:
    """Multi-indices with ``|m| = n`` and entries ``>= min_entry``, ascending lexicographic."""
    if d == 1:
        return [(n,)] if n >= min_entry else []
    out = []
    for first in range(min_entry, n - (d - 1) * min_entry + 1):
        out.extend((first,) + rest for rest in compositions(d - 1, n - first, min_entry))
    return out


def output_modes(count: int, out_dim: int = 1) -> np.ndarray:
    """First ``count`` multi-indices of the output cosine basis, constant mode first."""
    if out_dim == 1:
        return np.arange(count, dtype=np.int64).reshape(-1, 1)
    rest = enumerate_eigenpairs(out_dim, max(count - 1, 1)).mode_array[: count - 1]
    return np.vstack([np.zeros((1, out_dim), dtype=np.int64), rest])


def _cosine_products(points: np.ndarray, modes: np.ndarray, alpha: Sequence[int] | None = None) -> np.ndarray:
    """``prod_j phi_{m_j}^{(alpha_j)}(points_j)`` for every point and mode: shape ``(P, T)``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = modes.shape[1]
    if points.shape[1] != d:
        raise ValueError(f"points have dimension {points.shape[1]}, modes {d}")
    alpha = (0,) * d if alpha is None else tuple(alpha)
    out = np.ones((points.shape[0], modes.shape[0]))
    for j in range(d):
        orders = np.arange(int(modes[:, j].max()) + 1 if len(modes) else 1)
        table = np.stack([phi(int(m), points[:, j], alpha[j]) for m in orders], axis=1)
        out *= table[:, modes[:, j]]
    return out


def _broadcast_pairs(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lead = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    X = np.broadcast_to(x, lead + x.shape[-1:]).reshape(-1, x.shape[-1])
    Y = np.broadcast_to(y, lead + y.shape[-1:]).reshape(-1, y.shape[-1])
    return X, Y, lead


class SeriesKernel:
    """Finite series ``sum_t coef_t g_t(x) h_t(y)`` (subclasses define the terms)."""

    d: int
    out_dim: int
    alpha: tuple[int, ...] | None = None

    @cached_property
    def _terms(self) -> tuple[np.ndarray, np.ndarray]:
        """``(coef, y_modes)``; ``y_modes`` has shape ``(T, d)``."""
        raise NotImplementedError

    @property
    def coefficients(self) -> np.ndarray:
        return self._terms[0]

    @property
    def y_modes(self) -> np.ndarray:
        return self._terms[1]

    @property
    def n_terms(self) -> int:
        return len(self.coefficients)

    @property
    def max_y_order(self) -> int:
        return int(self.y_modes.max())

    @cached_property
    def x_modes(self) -> np.ndarray:
        return output_modes(self.n_terms, self.out_dim)

    @property
    def max_x_order(self) -> int:
        return int(self.x_modes.max())

    def matrix(self, X, Y) -> np.ndarray:
        G = _cosine_products(X, self.x_modes)
        H = _cosine_products(Y, self.y_modes, self.alpha)
        return (G * self.coefficients[None, :]) @ H.T

    def __call__(self, x, y):
        X, Y, lead = _broadcast_pairs(x, y)
        G = _cosine_products(X, self.x_modes)
        H = _cosine_products(Y, self.y_modes, self.alpha)
        vals = np.einsum("pt,t,pt->p", G, self.coefficients, H)
        vals = vals.reshape(lead)
        return vals if vals.ndim else float(vals)

    def exact_spectrum(self) -> ExactSpectrum:
        c = np.abs(self.coefficients)
        if self.alpha is not None:
            scale = np.prod(self.y_modes.astype(float) ** np.asarray(self.alpha, dtype=float), axis=1)
            c = c * scale
        c = c[c > 0]
        return ExactSpectrum(np.sort(c)[::-1])


@dataclass(frozen=True, eq=False)
class CosineSobolev(SeriesKernel):
    """``sum_n sum_{|m|=n} n^(-p+lam) prod_j phi_{m_j}(y_j) g_m(x)`` for n up to N."""

    d: int
    p: int
    lam: float | None = None
    N: int | None = None
    min_entry: int = 1
    out_dim: int = 1

    def __post_init__(self):
        if self.d < 1 or self.p < 1:
            raise ValueError(f"need d >= 1 and p >= 1, got d={self.d}, p={self.p}")
        if self.lam is None:
            object.__setattr__(self, "lam", -(self.d + 1) / 2)
        if self.N is None:
            object.__setattr__(self, "N", DEFAULT_TRUNCATION.get(self.d, 12))
        if not self.lam < -self.d / 2:
            raise ValueError(f"lam={self.lam} violates lam < -d/2 = {-self.d / 2}")
        if self.min_entry not in (0, 1):
            raise ValueError("min_entry must be 0 or 1")

    @property
    def n_min(self) -> int:
        return max(1, self.d * self.min_entry)

    @cached_property
    def _terms(self):
        coef, modes = [], []
        for n in range(self.n_min, self.N + 1):
            for m in compositions(self.d, n, self.min_entry):
                coef.append(float(n) ** (-self.p + self.lam))
                modes.append(m)
        return np.array(coef), np.array(modes, dtype=np.int64).reshape(-1, self.d)

    def exact_spectrum(self) -> ExactSpectrum:
        vals = [
            np.full(multiplicity(self.d, n, self.min_entry), float(n) ** (-self.p + self.lam))
            for n in range(self.n_min, self.N + 1)
        ]
        return ExactSpectrum(np.concatenate(vals))


@dataclass(frozen=True, eq=False)
class EigenSeries(SeriesKernel):
    """``sum_{n<=N} a_n g_n(x) f_n(y)`` over Neumann modes, ``a_n = mu_n^(p/2) / n``."""

    d: int
    p: int
    N: int | None = None
    out_dim: int = 1

    def __post_init__(self):
        if self.d < 1 or self.p < 1:
            raise ValueError(f"need d >= 1 and p >= 1, got d={self.d}, p={self.p}")
        if self.N is None:
            object.__setattr__(self, "N", DEFAULT_TRUNCATION.get(self.d, 12))

    @cached_property
    def basis(self):
        return enumerate_eigenpairs(self.d, self.N)

    @cached_property
    def _terms(self):
        n = np.arange(1, self.N + 1)
        a = self.basis.mus ** (self.p / 2) / n
        return a, self.basis.mode_array

    def growth_constant(self) -> float:
        """``max a_n / a_{2n}`` over the available indices (the constant C_a)."""
        a = self.coefficients
        half = len(a) // 2
        if half < 1:
            return float("nan")
        return float(np.max(a[:half] / a[1 : 2 * half : 2]))

    def exact_spectrum(self) -> ExactSpectrum:
        return ExactSpectrum(self.coefficients.copy())


@dataclass(frozen=True, eq=False)
class AnalyticProduct(SeriesKernel):
    """``prod_j sum_{m_j} tau^{m_j} phi_{m_j}(y_j) g^j_{m_j}(x)``, orders ``|m| <= N``."""

    d: int
    tau: float
    N: int | None = None
    min_entry: int = 1
    out_dim: int = 1

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.N is None:
            object.__setattr__(self, "N", DEFAULT_TRUNCATION.get(self.d, 12))
        if self.min_entry not in (0, 1):
            raise ValueError("min_entry must be 0 or 1")

    @property
    def n_min(self) -> int:
        return self.d * self.min_entry

    @cached_property
    def _terms(self):
        coef, modes = [], []
        for n in range(self.n_min, self.N + 1):
            for m in compositions(self.d, n, self.min_entry):
                coef.append(self.tau ** n)
                modes.append(m)
        return np.array(coef), np.array(modes, dtype=np.int64).reshape(-1, self.d)

    def exact_spectrum(self) -> ExactSpectrum:
        vals = [
            np.full(multiplicity(self.d, n, self.min_entry), self.tau ** n)
            for n in range(self.n_min, self.N + 1)
        ]
        return ExactSpectrum(np.concatenate(vals))


@dataclass(frozen=True, eq=False)
class DerivativeKernel(SeriesKernel):
    """Series kernel differentiated termwise in ``y``."""

    base: SeriesKernel
    alpha: tuple[int, ...] = field(default=())

    @property
    def d(self):
        return self.base.d

    @property
    def out_dim(self):
        return self.base.out_dim

    @cached_property
    def _terms(self):
        if self.base.alpha is not None:
            raise ValueError("base kernel is already differentiated")
        return self.base._terms

    @cached_property
    def x_modes(self):
        return self.base.x_modes


@dataclass(frozen=True, eq=False)
class Rank1:
    """``u(x) v(y)``; ``dv(y, alpha)`` supplies y-derivatives when needed."""

    u: Callable
    v: Callable
    dv: Callable | None = None

    def __call__(self, x, y):
        return np.asarray(self.u(np.asarray(x, float))) * np.asarray(self.v(np.asarray(y, float)))

    def matrix(self, X, Y) -> np.ndarray:
        return np.multiply.outer(np.asarray(self.u(np.asarray(X, float))), np.asarray(self.v(np.asarray(Y, float))))


@dataclass(frozen=True, eq=False)
class Gaussian:
    """``exp(-|x - y|^2 / (2 width^2))``, optionally differentiated in ``y``."""

    width: float = 1.0
    alpha: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = (x - y) / self.width
        out = np.exp(-0.5 * np.sum(z * z, axis=-1))
        if self.alpha is not None:
            # d^k/dy^k of exp(-z^2/2), z = (x - y)/w, is w^-k He_k(z) exp(-z^2/2)
            for j, k in enumerate(self.alpha):
                if k:
                    coeffs = np.zeros(k + 1)
                    coeffs[k] = 1.0
                    out = out * hermite_e.hermeval(z[..., j], coeffs) / self.width ** k
        return out

    def matrix(self, X, Y) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return self(X[:, None, :], Y[None, :, :])


@dataclass(frozen=True, eq=False)
class Grid:
    """Kernel known only through samples on a fixed target x source grid."""

    values: np.ndarray

    def __call__(self, x, y):
        raise TypeError("Grid kernels can only be assembled on their own grid")

    def matrix(self, X, Y) -> np.ndarray:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(X), len(Y)):
            raise ValueError(f"grid values have shape {vals.shape}, grid is {(len(X), len(Y))}")
        return vals


KernelSpec = CosineSobolev | EigenSeries | AnalyticProduct | Rank1 | Gaussian | Grid


def evaluate(spec, x, y):
    """Kernel value(s) at ``(x, y)``; see the module docstring for shapes."""
    return spec(x, y)


def exact_spectrum(spec) -> ExactSpectrum:
    if isinstance(spec, SeriesKernel):
        return spec.exact_spectrum()
    raise TypeError(f"{type(spec).__name__} has no closed-form spectrum")


def axes_to_alpha(I: Sequence[int], d: int) -> tuple[int, ...]:
    """Ordered 1-based axis tuple ``(i_1, ..., i_p)`` to a per-axis derivative count."""
    alpha = [0] * d
    for i in I:
        if not 1 <= i <= d:
            raise ValueError(f"axis {i} outside 1..{d}")
        alpha[i - 1] += 1
    return tuple(alpha)


def derivative_kernel(spec, I: Sequence[int]):
    """``d_{i_1} ... d_{i_p} k`` in ``y`` (axes 1-based)."""
    if isinstance(spec, Grid):
        raise TypeError("Grid kernels cannot be differentiated")
    I = tuple(I)
    if not I:
        return spec
    if isinstance(spec, SeriesKernel):
        if isinstance(spec, CosineSobolev) and len(I) > spec.p:
            raise ValueError(f"derivative order {len(I)} exceeds the kernel's Sobolev order {spec.p}")
        return DerivativeKernel(spec, axes_to_alpha(I, spec.d))
    if isinstance(spec, Gaussian):
        if spec.alpha is not None:
            raise ValueError("kernel is already differentiated")
        return _GaussianDerivative(spec.width, I)
    if isinstance(spec, Rank1):
        if spec.dv is None:
            raise ValueError("Rank1 kernel needs dv(y, alpha) to be differentiated")
        dv = spec.dv
        return Rank1(spec.u, lambda y: dv(y, axes_to_alpha(I, np.shape(y)[-1])))
    raise TypeError(f"cannot differentiate {type(spec).__name__}")


@dataclass(frozen=True, eq=False)
class _GaussianDerivative:
    width: float
    axes: tuple[int, ...]

    def _kernel(self, d: int) -> Gaussian:
        return Gaussian(self.width, axes_to_alpha(self.axes, d))

    def __call__(self, x, y):
        return self._kernel(np.shape(y)[-1])(x, y)

    def matrix(self, X, Y) -> np.ndarray:
        return self._kernel(np.shape(Y)[-1]).matrix(X, Y)


def all_index_tuples(d: int, p: int) -> list[tuple[int, ...]]:
    """All ordered ``(i_1, ..., i_p)`` with entries in 1..d."""
    return list(itertools.product(range(1, d + 1), repeat=p))
