"""Neumann eigenpairs of the Laplacian on the box (0, pi)^d.

Eigenfunctions are products of the one-dimensional cosine modes
``phi_0 = 1/sqrt(pi)`` and ``phi_m(s) = sqrt(2/pi) cos(m s)``; the
eigenvalue of the product indexed by ``m`` is ``m_1**2 + ... + m_d**2``.

The operators below act on coefficient vectors in this basis:
``J`` (inverse Laplacian, diagonal ``mu_n``) and ``N_k = D_k T`` (mean-removed
``k``-th partial derivative after ``T f_n = mu_n f_n``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .quadrature import Quadrature

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True, order=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(int(m) != m or m < 0 for m in self.entries):
            raise ValueError(f"multi-index entries must be nonnegative integers: {self.entries}")

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def energy(self) -> int:
        return sum(m * m for m in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def phi(m: int, s, deriv: int = 0):
    """``deriv``-th derivative of the 1-d normalized cosine mode of order ``m``."""
    s = np.asarray(s, dtype=float)
    if m == 0:
        return np.full(s.shape, INV_SQRT_PI if deriv == 0 else 0.0)
    return SQRT_2_OVER_PI * float(m) ** deriv * np.cos(m * s + deriv * (math.pi / 2))


def eval_eigenfunction(m: MultiIndex | Sequence[int], y, alpha: Sequence[int] | None = None):
    """Evaluate ``d^alpha f_m`` at points ``y`` of shape ``(..., d)``."""
    entries = tuple(m)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != len(entries):
        raise ValueError(f"point dimension {y.shape[-1]} does not match multi-index {entries}")
    alpha = (0,) * len(entries) if alpha is None else tuple(alpha)
    out = np.ones(y.shape[:-1])
    for j, (mj, aj) in enumerate(zip(entries, alpha)):
        out = out * phi(mj, y[..., j], aj)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class NeumannBasisBox:
    dim: int
    modes: tuple[MultiIndex, ...]
    lambdas: np.ndarray
    mus: np.ndarray

    def __post_init__(self):
        self.lambdas.setflags(write=False)
        self.mus.setflags(write=False)

    @property
    def count(self) -> int:
        return len(self.modes)

    @cached_property
    def mode_array(self) -> np.ndarray:
        """Multi-indices as an integer array of shape ``(count, dim)``."""
        return np.array([m.entries for m in self.modes], dtype=np.int64).reshape(-1, self.dim)

    def max_order(self, N: int | None = None) -> int:
        """Largest single-axis order among the first ``N`` modes."""
        N = self.count if N is None else N
        return int(self.mode_array[:N].max())


def enumerate_eigenpairs(d: int, count: int) -> NeumannBasisBox:
    """First ``count`` nonzero Neumann eigenpairs on ``(0, pi)**d``.

    Modes are sorted by eigenvalue; ties are broken by descending
    lexicographic order of the multi-index.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    d, count = int(d), int(count)

    # lattice points in the positive orthant of a ball of radius R number
    # about omega_d R^d / 2^d; grow R until the count-th energy is covered
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    R = max(2, math.ceil((2 ** d * (count + 1) / omega) ** (1 / d)) + 2)
    while True:
        grid = np.stack(
            [g.ravel() for g in np.meshgrid(*([np.arange(R + 1)] * d), indexing="ij")],
            axis=-1,
        )
        energy = (grid * grid).sum(axis=1)
        keep = (energy > 0) & (energy <= R * R)
        grid, energy = grid[keep], energy[keep]
        if len(energy) >= count:
            break
        R *= 2
    # ties: descending lexicographic, so (1, 0) precedes (0, 1); lexsort's last key is primary
    order = np.lexsort(tuple(-grid[:, j] for j in range(d - 1, -1, -1)) + (energy,))
    order = order[:count]
    modes = tuple(MultiIndex(tuple(int(v) for v in row)) for row in grid[order])
    lambdas = energy[order].astype(float)
    return NeumannBasisBox(dim=d, modes=modes, lambdas=lambdas, mus=1.0 / lambdas)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def weyl_prediction(d: int, n, volume: float | None = None):
    """Leading Weyl term ``4 pi^2 (omega_d |Omega|)^(-2/d) n^(2/d)``."""
    volume = math.pi ** d if volume is None else volume
    c = 4 * math.pi ** 2 * (unit_ball_volume(d) * volume) ** (-2.0 / d)
    return c * np.asarray(n, dtype=float) ** (2.0 / d)


def weyl_ratio(basis: NeumannBasisBox, n: int) -> float:
    """``lambda_n`` over its Weyl prediction (``n`` is 1-based)."""
    if not 1 <= n <= basis.count:
        raise IndexError(f"n={n} outside 1..{basis.count}")
    return float(basis.lambdas[n - 1] / weyl_prediction(basis.dim, n))


def weyl_ratios(basis: NeumannBasisBox) -> np.ndarray:
    n = np.arange(1, basis.count + 1)
    return basis.lambdas / weyl_prediction(basis.dim, n)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    basis_dim: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("operator matrix has non-finite entries")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)


def _check_truncation(basis: NeumannBasisBox, N: int) -> int:
    if int(N) != N or not 1 <= N <= basis.count:
        raise ValueError(f"truncation N={N!r} must lie in 1..{basis.count}")
    return int(N)


def _check_resolution(basis: NeumannBasisBox, N: int, q: Quadrature) -> None:
    if q.dim != basis.dim:
        raise ValueError(f"quadrature dimension {q.dim} != basis dimension {basis.dim}")
    need = basis.max_order(N)
    have = q.max_resolved_order()
    if have < need:
        raise ValueError(
            f"quadrature resolves cosine orders up to {have} but the first {N} modes "
            f"reach order {need}; use at least {2 * need + 8} nodes per axis"
        )


def basis_values(basis: NeumannBasisBox, N: int, q: Quadrature, alpha: Sequence[int] | None = None) -> np.ndarray:
    """Values of ``d^alpha f_n``, n = 1..N, on the grid of ``q``: shape ``(q.size, N)``."""
    modes = basis.mode_array[:N]
    alpha = (0,) * basis.dim if alpha is None else tuple(alpha)
    out = np.ones((q.size, N))
    idx = np.stack(
        [g.ravel() for g in np.meshgrid(*(np.arange(n) for n in q.shape), indexing="ij")],
        axis=-1,
    )
    for j in range(basis.dim):
        orders = np.arange(modes[:, j].max() + 1)
        table = np.stack([phi(int(m), q.nodes[j], alpha[j]) for m in orders], axis=1)
        out *= table[idx[:, j]][:, modes[:, j]]
    return out


def gram_matrix(basis: NeumannBasisBox, N: int, q: Quadrature) -> np.ndarray:
    F = basis_values(basis, N, q)
    w = q.full_weights()
    return F.T @ (w[:, None] * F)


def matrix_J(basis: NeumannBasisBox, N: int) -> OperatorMatrix:
    """Truncated inverse Laplacian ``J f_n = mu_n f_n``."""
    N = _check_truncation(basis, N)
    return OperatorMatrix(np.diag(basis.mus[:N]), N)


def mean_removed_derivative(basis: NeumannBasisBox, k: int, N: int, q: Quadrature) -> np.ndarray:
    """Grid values of ``D_k f_j = d_k f_j - mean(d_k f_j)``, j = 1..N (``k`` is 1-based)."""
    if not 1 <= k <= basis.dim:
        raise ValueError(f"axis k={k} outside 1..{basis.dim}")
    alpha = [0] * basis.dim
    alpha[k - 1] = 1
    dF = basis_values(basis, N, q, alpha)
    w = q.full_weights()
    mean = (w @ dF) / q.volume
    return dF - mean[None, :]


def matrix_Nk(basis: NeumannBasisBox, k: int, N: int, q: Quadrature) -> OperatorMatrix:
    """Galerkin truncation of ``N_k = D_k T``: entries ``mu_j <D_k f_j, f_i>``."""
    N = _check_truncation(basis, N)
    _check_resolution(basis, N, q)
    F = basis_values(basis, N, q)
    D = mean_removed_derivative(basis, k, N, q)
    w = q.full_weights()
    G = F.T @ (w[:, None] * D)
    return OperatorMatrix(G * basis.mus[:N][None, :], N)


PhiCallable = Callable[[np.ndarray, tuple[int, ...]], np.ndarray]


def eigenfunction_callable(m: MultiIndex | Sequence[int]) -> PhiCallable:
    """Wrap ``f_m`` in the ``phi(y, alpha)`` protocol used below."""
    entries = tuple(m)
    return lambda y, alpha: eval_eigenfunction(entries, y, alpha)


def integration_by_parts_sides(
    phi_fn: PhiCallable,
    f: Sequence[float],
    p: int,
    basis: NeumannBasisBox,
    q: Quadrature,
    N: int | None = None,
) -> tuple[float, float]:
    """Both sides of the order-``p`` integration by parts identity.

    ``phi_fn(y, alpha)`` returns the ``alpha`` partial derivative of the test
    function at points ``y`` (shape ``(G, d)``). ``f`` holds coefficients of a
    zero-mean function on the first ``len(f)`` modes; the operators ``N_k``
    are truncated at ``N`` modes (default ``len(f)``).
    """
    f = np.asarray(f, dtype=float)
    N = len(f) if N is None else N
    N = _check_truncation(basis, N)
    if len(f) > N:
        raise ValueError("coefficient vector longer than the truncation")
    if int(p) != p or p < 0:
        raise ValueError(f"order p must be a nonnegative integer, got {p!r}")
    _check_resolution(basis, N, q)
    c = np.zeros(N)
    c[: len(f)] = f
    d = basis.dim
    y = q.points()
    w = q.full_weights()
    F = basis_values(basis, N, q)
    lhs = float(w @ (phi_fn(y, (0,) * d) * (F @ c)))

    Nmats = {k: matrix_Nk(basis, k, N, q).entries for k in range(1, d + 1)}
    rhs = 0.0
    for seq in itertools.product(range(1, d + 1), repeat=int(p)):
        v = c
        for i in seq:
            v = Nmats[i] @ v
        alpha = [0] * d
        for i in seq:
            alpha[i - 1] += 1
        rhs += float(w @ (phi_fn(y, tuple(alpha)) * (F @ v)))
    return lhs, rhs


def integration_by_parts_residual(phi_fn, f, p, basis, q, N=None) -> float:
    lhs, rhs = integration_by_parts_sides(phi_fn, f, p, basis, q, N)
    return abs(lhs - rhs)


def hp_sum_norm_check(
    a: Sequence[float],
    p: int,
    q1: int,
    q2: int,
    basis: NeumannBasisBox,
    q: Quadrature,
) -> tuple[float, float]:
    """Order-``p`` Sobolev seminorm of ``sum_{n=q1}^{q2} a_n f_n`` against ``sum a_n^2 mu_n^-p``.

    ``a[0]`` is ``a_1``. The seminorm sums ``||d_{i_1} ... d_{i_p} u||^2``
    over all ordered index tuples, which is the quantity the operator
    families ``K_{i_1..i_p}`` see. Returns ``(lhs, rhs)``.
    """
    a = np.asarray(a, dtype=float)
    if not 1 <= q1 <= q2 <= min(len(a), basis.count):
        raise ValueError(f"index range ({q1}, {q2}) invalid for {len(a)} coefficients / {basis.count} modes")
    if int(p) != p or p < 0:
        raise ValueError(f"order p must be a nonnegative integer, got {p!r}")
    p = int(p)
    _check_resolution(basis, q2, q)
    coef = np.zeros(q2)
    coef[q1 - 1 : q2] = a[q1 - 1 : q2]
    w = q.full_weights()
    d = basis.dim
    lhs = 0.0
    # ordered tuples grouped by multi-order alpha, weighted by multinomial counts
    for alpha in itertools.product(range(p + 1), repeat=d):
        if sum(alpha) != p:
            continue
        mult = math.factorial(p) // math.prod(math.factorial(x) for x in alpha)
        u = basis_values(basis, q2, q, alpha) @ coef
        lhs += mult * float(w @ (u * u))
    rhs = float(np.sum(coef[q1 - 1 :] ** 2 * basis.mus[q1 - 1 : q2] ** (-p)))
    return lhs, rhs
