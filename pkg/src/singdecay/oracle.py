"""Brute-force checks of the finite-dimensional singular-value inequalities.

Every case is a small dense matrix with i.i.d. uniform [-1, 1] entries,
reproducible from a 64-bit seed through a Philox counter-based generator.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MIN_DIM, MAX_DIM = 2, 12
N_RANDOM_SUBSPACES = 50
# stated absolute slacks; widened only if eps * norm scale is larger
MINMAX_TOL = 1e-9
INEQ_TOL = 1e-10
EQ_TOL = 1e-12
EPS_FACTOR = 64


def _gen(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), stream])))


def case_seed(suite_seed: int, *index: int) -> int:
    """64-bit seed derived from a suite seed and a path of indices."""
    key = [int(suite_seed), *map(int, index)]
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


def _slack(tol: float, scale: float) -> float:
    return max(tol, EPS_FACTOR * np.finfo(float).eps * scale)


@dataclass(frozen=True, eq=False)
class RandomOperatorCase:
    seed: int
    matrix: np.ndarray

    @classmethod
    def draw(cls, seed: int, rows: int | None = None, cols: int | None = None) -> "RandomOperatorCase":
        g = _gen(seed)
        r = int(g.integers(MIN_DIM, MAX_DIM + 1)) if rows is None else rows
        c = int(g.integers(MIN_DIM, MAX_DIM + 1)) if cols is None else cols
        if not (MIN_DIM <= r <= MAX_DIM and MIN_DIM <= c <= MAX_DIM):
            raise ValueError(f"dims {(r, c)} outside {MIN_DIM}..{MAX_DIM}")
        M = g.uniform(-1.0, 1.0, size=(r, c))
        M.setflags(write=False)
        return cls(int(seed), M)

    @property
    def dims(self) -> tuple[int, int]:
        return self.matrix.shape

    def rng(self) -> np.random.Generator:
        """Auxiliary stream for subspaces and constructions, independent of the entries."""
        return _gen(self.seed, 1)


def _sv(M: np.ndarray) -> np.ndarray:
    return np.linalg.svd(M, compute_uv=False)


def _padded(s: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    out[: min(len(s), length)] = s[:length]
    return out


def _random_orthonormal(g: np.random.Generator, n: int, k: int, batch: int | None = None) -> np.ndarray:
    shape = (n, k) if batch is None else (batch, n, k)
    Q, _ = np.linalg.qr(g.standard_normal(shape))
    return Q


def _as_matrix(T) -> np.ndarray:
    return T.matrix if isinstance(T, RandomOperatorCase) else np.asarray(T, dtype=float)


def check_minmax(case, n_random: int = N_RANDOM_SUBSPACES, g: np.random.Generator | None = None) -> bool:
    """``s_n`` is the min over codimension ``n-1`` subspaces of the max of ``|Tx|``."""
    T = _as_matrix(case)
    g = case.rng() if g is None and isinstance(case, RandomOperatorCase) else (g or _gen(0, 1))
    _, s, Vt = np.linalg.svd(T)
    cols = T.shape[1]
    tol = _slack(MINMAX_TOL, s[0])
    for n in range(1, len(s) + 1):
        X = Vt[n - 1 :].T  # complement of the top n-1 right singular vectors
        if abs(_sv(T @ X)[0] - s[n - 1]) > tol:
            return False
        Q = _random_orthonormal(g, cols, cols - n + 1, batch=n_random)
        maxes = np.linalg.svd(T @ Q, compute_uv=False)[:, 0]
        if np.any(maxes < s[n - 1] - tol):
            return False
    return True


def check_product(case_S, case_T) -> bool:
    """``s_{p+q-1}(TS) <= s_p(S) s_q(T)`` for every valid pair."""
    S, T = _as_matrix(case_S), _as_matrix(case_T)
    if T.shape[1] != S.shape[0]:
        raise ValueError(f"cannot form TS from T {T.shape} and S {S.shape}")
    sS, sT, sTS = _sv(S), _sv(T), _sv(T @ S)
    r = len(sTS)
    a, b = _padded(sS, r), _padded(sT, r)
    bound = a[:, None] * b[None, :]
    idx = np.add.outer(np.arange(r), np.arange(r))  # p+q-2, zero-based index of s_{p+q-1}
    ok = idx < r
    lhs = sTS[np.minimum(idx, r - 1)]
    tol = _slack(INEQ_TOL, sS[0] * sT[0])
    return bool(np.all(lhs[ok] <= bound[ok] + tol))


def check_sum(case_S, case_T) -> bool:
    """``s_{p+q-1}(S+T) <= s_p(S) + s_q(T)`` for every valid pair."""
    S, T = _as_matrix(case_S), _as_matrix(case_T)
    if S.shape != T.shape:
        raise ValueError(f"cannot add {S.shape} and {T.shape}")
    sS, sT, sST = _sv(S), _sv(T), _sv(S + T)
    r = len(sST)
    bound = _padded(sS, r)[:, None] + _padded(sT, r)[None, :]
    idx = np.add.outer(np.arange(r), np.arange(r))
    ok = idx < r
    lhs = sST[np.minimum(idx, r - 1)]
    tol = _slack(INEQ_TOL, sS[0] + sT[0])
    return bool(np.all(lhs[ok] <= bound[ok] + tol))


def check_restriction(case, q_codim: int, g: np.random.Generator | None = None, basis: np.ndarray | None = None) -> bool:
    """``s_{n+q}(T) <= s_n(T restricted to a codimension-q subspace)``.

    The subspace is spanned by the orthonormal columns of ``basis``, or is
    drawn at random.
    """
    T = _as_matrix(case)
    cols = T.shape[1]
    if not 0 <= q_codim < cols:
        raise ValueError(f"codimension {q_codim} must lie in [0, {cols})")
    if basis is None:
        g = case.rng() if g is None and isinstance(case, RandomOperatorCase) else (g or _gen(0, 1))
        basis = _random_orthonormal(g, cols, cols - q_codim)
    sT = _sv(T)
    sR = _sv(T @ basis)
    n = np.arange(1, len(sT) - q_codim + 1)
    n = n[n <= len(sR)]
    tol = _slack(INEQ_TOL, sT[0])
    return bool(np.all(sT[n + q_codim - 1] <= sR[n - 1] + tol))


def readoff_operator(a: np.ndarray, rows: int, cols: int, g: np.random.Generator) -> np.ndarray:
    """Matrix sending orthonormal ``u_n`` to ``a_n v_n``, with random orthonormal systems."""
    a = np.asarray(a, dtype=float)
    U = _random_orthonormal(g, cols, len(a))
    V = _random_orthonormal(g, rows, len(a))
    return (V * a) @ U.T


def check_duality_and_readoff(case, g: np.random.Generator | None = None) -> bool:
    """``s_n(T) = s_n(T^T)``, and a constructed ``u_n -> a_n v_n`` map has spectrum ``a``."""
    T = _as_matrix(case)
    g = case.rng() if g is None and isinstance(case, RandomOperatorCase) else (g or _gen(0, 1))
    s = _sv(T)
    if np.max(np.abs(s - _sv(T.T))) > _slack(EQ_TOL, s[0]):
        return False
    rows, cols = T.shape
    r = min(rows, cols)
    a = np.sort(g.uniform(0.0, 1.0, size=r))[::-1]
    got = _sv(readoff_operator(a, rows, cols, g))
    return bool(np.max(np.abs(got - a)) <= _slack(EQ_TOL, 1.0))


@dataclass
class PropositionResult:
    name: str
    cases: int = 0
    violations: list[int] = field(default_factory=list)


@dataclass
class SuiteReport:
    seed: int
    cases: int
    results: dict[str, PropositionResult]
    runtime: float

    @property
    def n_violations(self) -> int:
        return sum(len(r.violations) for r in self.results.values())

    def summary(self) -> str:
        lines = [f"{r.name}: {r.cases} cases, {len(r.violations)} violations" for r in self.results.values()]
        lines.append(f"violations: {self.n_violations}")
        return "\n".join(lines)


def _minmax(seed: int) -> bool:
    return check_minmax(RandomOperatorCase.draw(seed))


def _product(seed: int) -> bool:
    S = RandomOperatorCase.draw(seed)
    T = RandomOperatorCase.draw(case_seed(seed, 1), cols=S.dims[0])
    return check_product(S, T)


def _sum(seed: int) -> bool:
    S = RandomOperatorCase.draw(seed)
    T = RandomOperatorCase.draw(case_seed(seed, 1), *S.dims)
    return check_sum(S, T)


def _restriction(seed: int) -> bool:
    c = RandomOperatorCase.draw(seed)
    q = 1 + seed % 3
    return check_restriction(c, min(q, c.dims[1] - 1))


def _duality(seed: int) -> bool:
    return check_duality_and_readoff(RandomOperatorCase.draw(seed))


PROPOSITIONS: dict[str, Callable[[int], bool]] = {
    "minmax": _minmax,
    "product": _product,
    "sum": _sum,
    "restriction": _restriction,
    "duality_readoff": _duality,
}


def run_suite(cases: int = 1000, seed: int = 42) -> SuiteReport:
    """Run every proposition on ``cases`` seeded cases; violating case seeds are kept."""
    if cases < 1:
        raise ValueError("need at least one case")
    t0 = time.perf_counter()
    results = {}
    for k, (name, check) in enumerate(PROPOSITIONS.items()):
        res = PropositionResult(name)
        for i in range(cases):
            s = case_seed(seed, k, i)
            res.cases += 1
            if not check(s):
                res.violations.append(s)
        results[name] = res
    return SuiteReport(seed, cases, results, time.perf_counter() - t0)
