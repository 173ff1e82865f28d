"""Tensor-product Gauss-Legendre rules on boxes.

A :class:`Quadrature` stores one rule per axis; the full grid (``n**d``
points) is only built when a consumer asks for it, either as an iterator
over index tuples or as dense arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100


def gauss_legendre_axis(n: int, interval: tuple[float, float] = (-1.0, 1.0)):
    """Return ``(nodes, weights)`` of the ``n``-point Gauss-Legendre rule.

    The roots of P_n are found by Newton iteration from Chebyshev-like
    starting guesses, then mapped affinely onto ``interval``. The rule is
    exact for polynomials of degree ``2n - 1``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"number of nodes must be a positive integer, got {n!r}")
    n = int(n)
    a, b = float(interval[0]), float(interval[1])
    if not (math.isfinite(a) and math.isfinite(b)) or not b > a:
        raise ValueError(f"degenerate interval {interval!r}")

    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(NEWTON_MAXITER):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            break
    # one more evaluation at the converged roots for the weights
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    # roots come out descending; symmetrize to kill the last-bit asymmetry
    x = x[::-1]
    w = w[::-1]
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])

    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = half * w
    return nodes, weights


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Tensor-product rule on the box ``prod_j (a_j, b_j)``.

    ``cells`` holds, per axis, the edges of the composite cells; a plain
    tensor rule has a single cell per axis.
    """

    box: tuple[tuple[float, float], ...]
    nodes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    cells: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (len(self.box) == len(self.nodes) == len(self.weights) == len(self.cells)):
            raise ValueError("box, nodes, weights and cells must have one entry per axis")
        for arr in (*self.nodes, *self.weights, *self.cells):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.nodes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in self.box)

    @property
    def per_axis(self) -> list[list[tuple[float, float]]]:
        return [list(zip(x.tolist(), w.tolist())) for x, w in zip(self.nodes, self.weights)]

    def total_weight(self) -> float:
        return math.prod(float(np.sum(w)) for w in self.weights)

    def iter_indices(self) -> Iterator[tuple[int, ...]]:
        """Grid index tuples in row-major order (last axis fastest)."""
        return itertools.product(*(range(n) for n in self.shape))

    def iter_points(self) -> Iterator[tuple[np.ndarray, float]]:
        for idx in self.iter_indices():
            x = np.array([self.nodes[j][i] for j, i in enumerate(idx)])
            w = math.prod(self.weights[j][i] for j, i in enumerate(idx))
            yield x, w

    def points(self) -> np.ndarray:
        """All grid points, shape ``(size, dim)``, row-major order."""
        mesh = np.meshgrid(*self.nodes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def full_weights(self) -> np.ndarray:
        w = self.weights[0]
        for wj in self.weights[1:]:
            w = np.multiply.outer(w, wj)
        return np.asarray(w).ravel()

    def integrate(self, values: np.ndarray) -> float:
        """Integrate grid samples given in :meth:`points` order."""
        return float(np.dot(self.full_weights(), np.asarray(values).ravel()))

    def max_resolved_order(self) -> int:
        """Largest cosine order M with ``n_per_axis >= 2M + 8`` on every cell."""
        per_cell = min(len(x) // (len(c) - 1) for x, c in zip(self.nodes, self.cells))
        return (per_cell - 8) // 2


def tensor_quadrature(d: int, n_per_axis: int, box: Sequence[tuple[float, float]] | None = None) -> Quadrature:
    """Gauss-Legendre tensor rule with ``n_per_axis**d`` points.

    ``box`` defaults to ``(0, pi)**d``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    if box is None:
        box = [(0.0, math.pi)] * d
    box = tuple((float(a), float(b)) for a, b in box)
    if len(box) != d:
        raise ValueError(f"box has {len(box)} intervals, expected {d}")
    rules = [gauss_legendre_axis(n_per_axis, iv) for iv in box]
    return Quadrature(
        box=box,
        nodes=tuple(r[0] for r in rules),
        weights=tuple(r[1] for r in rules),
        cells=tuple(np.array(iv) for iv in box),
    )


def affine_image(q: Quadrature, t: float, v0: Sequence[float] | float = 0.0) -> Quadrature:
    """Push ``q`` forward under ``x -> t x + v0``; weights scale by ``t**d`` overall."""
    t = float(t)
    if not t > 0:
        raise ValueError(f"dilation factor must be positive, got {t}")
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (q.dim,))
    return Quadrature(
        box=tuple((t * a + s, t * b + s) for (a, b), s in zip(q.box, v0.tolist())),
        nodes=tuple(t * x + s for x, s in zip(q.nodes, v0)),
        weights=tuple(t * w for w in q.weights),
        cells=tuple(t * c + s for c, s in zip(q.cells, v0)),
    )


def composite_refine(q: Quadrature, splits_per_axis: int) -> Quadrature:
    """Split every axis into equal cells, each carrying a copy of the parent rule.

    The number of nodes per cell equals the parent's node count on that
    axis, so ``splits_per_axis=2`` doubles the grid along every axis.
    """
    if int(splits_per_axis) != splits_per_axis or splits_per_axis < 1:
        raise ValueError(f"splits must be a positive integer, got {splits_per_axis!r}")
    if splits_per_axis == 1:
        return q
    nodes, weights, cells = [], [], []
    for (a, b), x, c in zip(q.box, q.nodes, q.cells):
        per_cell = len(x) // (len(c) - 1)
        edges = np.linspace(a, b, splits_per_axis + 1)
        xs, ws = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            xc, wc = gauss_legendre_axis(per_cell, (lo, hi))
            xs.append(xc)
            ws.append(wc)
        nodes.append(np.concatenate(xs))
        weights.append(np.concatenate(ws))
        cells.append(edges)
    return Quadrature(box=q.box, nodes=tuple(nodes), weights=tuple(weights), cells=tuple(cells))


def sub_box_indices(q: Quadrature, sub_box: Sequence[tuple[float, float]], rtol: float = 1e-12) -> np.ndarray:
    """Flat grid indices of ``q`` lying in ``sub_box``.

    ``sub_box`` must be a union of composite cells: each of its endpoints
    has to coincide with a cell edge of ``q``.
    """
    if len(sub_box) != q.dim:
        raise ValueError(f"sub-box has {len(sub_box)} intervals, expected {q.dim}")
    masks = []
    for j, ((lo, hi), edges) in enumerate(zip(sub_box, q.cells)):
        scale = q.box[j][1] - q.box[j][0]
        for end in (lo, hi):
            if np.min(np.abs(edges - end)) > rtol * scale:
                raise ValueError(f"sub-box endpoint {end} on axis {j} is not a cell edge of the quadrature")
        if not hi > lo:
            raise ValueError(f"empty sub-box interval {(lo, hi)} on axis {j}")
        masks.append((q.nodes[j] > lo) & (q.nodes[j] < hi))
    mesh = np.meshgrid(*masks, indexing="ij")
    keep = np.logical_and.reduce([m.ravel() for m in mesh])
    return np.flatnonzero(keep)


def restrict(q: Quadrature, sub_box: Sequence[tuple[float, float]]) -> Quadrature:
    """The sub-rule of ``q`` on an aligned ``sub_box``."""
    sub_box_indices(q, sub_box)  # validates alignment
    nodes, weights, cells = [], [], []
    for (lo, hi), x, w, c in zip(sub_box, q.nodes, q.weights, q.cells):
        m = (x > lo) & (x < hi)
        nodes.append(x[m].copy())
        weights.append(w[m].copy())
        cells.append(c[(c >= lo - 1e-12 * abs(hi - lo)) & (c <= hi + 1e-12 * abs(hi - lo))].copy())
    return Quadrature(
        box=tuple((float(lo), float(hi)) for lo, hi in sub_box),
        nodes=tuple(nodes),
        weights=tuple(weights),
        cells=tuple(cells),
    )


def nodes_for_order(max_order: int) -> int:
    """Per-axis node count needed to resolve cosine modes up to ``max_order``."""
    return 2 * int(max_order) + 8
