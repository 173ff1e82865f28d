"""Decay fits and the theorem-level checks on singular spectra.

Index conventions: spectra are 1-based in every public argument (``n``,
``fit_range``), matching ``s_1 >= s_2 >= ...``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .discop import assemble, default_quadratures, singular_values
from .kernels import CosineSobolev, all_index_tuples, derivative_kernel
from .spectrum import FLOOR_RTOL, SingularSpectrum

# convergence / decay trend tests
FLATTEN_FRACTION = 0.05
DECAY_RTOL = 1e-9
# fit ranges drop the preasymptotic first 10% and everything past half the length
FIT_LO_FRACTION = 0.1
FIT_HI_FRACTION = 0.5


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_constant: float
    residual: float
    fit_range: tuple[int, int]


@dataclass(frozen=True)
class StretchedFit:
    slope: float
    intercept: float
    residual: float
    fit_range: tuple[int, int]


@dataclass(frozen=True, eq=False)
class RatioReport:
    n: np.ndarray
    ratios: np.ndarray
    sup: float
    inf: float
    margins: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.inf > self.sup:
            raise ValueError("inf exceeds sup")

    @property
    def argsup(self) -> int:
        return int(self.n[int(np.argmax(self.ratios))])


def _values(s) -> np.ndarray:
    return np.asarray(s.values if isinstance(s, SingularSpectrum) else s, dtype=float)


def default_fit_range(length: int) -> tuple[int, int]:
    lo = max(1, int(FIT_LO_FRACTION * length) + 1)
    hi = max(lo + 1, int(FIT_HI_FRACTION * length))
    return lo, min(hi, length)


def _fit_window(v: np.ndarray, fit_range, floor_rtol: float = FLOOR_RTOL) -> tuple[int, int]:
    lo, hi = default_fit_range(len(v)) if fit_range is None else fit_range
    if not 1 <= lo < hi <= len(v):
        raise ValueError(f"fit range {(lo, hi)} invalid for a spectrum of length {len(v)}")
    floor = floor_rtol * v[0]
    if np.any(v[lo - 1 : hi] <= floor):
        raise ValueError(f"fit range {(lo, hi)} contains numerically zero values")
    return lo, hi


def fit_power_decay(s, fit_range: tuple[int, int] | None = None) -> DecayFit:
    """Least squares of ``log s_n`` against ``log n``: ``s_n ~ c n^-exponent``."""
    v = _values(s)
    lo, hi = _fit_window(v, fit_range)
    n = np.arange(lo, hi + 1, dtype=float)
    y = np.log(v[lo - 1 : hi])
    A = np.vstack([np.log(n), np.ones_like(n)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([slope, icpt])
    return DecayFit(float(-slope), float(icpt), float(np.sqrt(np.mean(res ** 2))), (lo, hi))


def thm3_fit(s, d: int, fit_range: tuple[int, int] | None = None, floor_rtol: float = FLOOR_RTOL) -> StretchedFit:
    """Least squares of ``log s_n`` against ``n^(1/d)``; the slope estimates ``log tau``.

    ``floor_rtol=0`` admits any positive value (for analytic, noise-free sequences).
    """
    v = _values(s)
    lo, hi = _fit_window(v, fit_range, floor_rtol)
    n = np.arange(lo, hi + 1, dtype=float)
    y = np.log(v[lo - 1 : hi])
    A = np.vstack([n ** (1.0 / d), np.ones_like(n)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([slope, icpt])
    return StretchedFit(float(slope), float(icpt), float(np.sqrt(np.mean(res ** 2))), (lo, hi))


def matched_power_law(s) -> np.ndarray:
    """``c n^-alpha`` through the first and last entries of ``s``."""
    v = _values(s)
    L = len(v)
    if L < 2 or v[-1] <= 0:
        raise ValueError("need at least two positive values")
    alpha = math.log(v[0] / v[-1]) / math.log(L)
    return v[0] * np.arange(1, L + 1, dtype=float) ** (-alpha)


def square_lower_bound(d: int, tau: float, m) -> np.ndarray:
    """``tau (tau^(((d-1)!)^(1/d)))^(m^(1/d))``, the rank-``m`` lower bound for the analytic product kernel."""
    m = np.asarray(m, dtype=float)
    rate = math.factorial(d - 1) ** (1.0 / d)
    return tau * tau ** (rate * m ** (1.0 / d))


def square_slope_bracket(d: int, tau: float) -> tuple[float, float]:
    """Slopes of ``log s`` in ``n^(1/d)`` allowed by the lower bound and by decay: ``(lo, 0)``."""
    return math.factorial(d - 1) ** (1.0 / d) * math.log(tau), 0.0


def _ratio_arrays(sK: np.ndarray, sums: np.ndarray, n: np.ndarray, p: int, d: int, floor: float):
    num = np.where(sK > floor, sK, 0.0)
    den = n ** (-p / d) * sums
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(num == 0.0, 0.0, num / den)
    return r


def thm1_ratio(
    kernel_spec,
    p: int,
    qx=None,
    qy=None,
    n_range: tuple[int, int] | None = None,
) -> RatioReport:
    """Empirical constant in ``s_n(K) <= C n^(-p/d) sum_I s_m(K_I)``, ``m = [n / (d^p (p+1))]``.

    Assembles ``K`` and every ``K_I``, ``I`` ranging over ordered tuples in
    ``{1..d}^p``. The default range runs from the first ``n`` with ``m >= 1``
    to the numerical rank of ``K``. Ratios whose numerator sits below the
    spectrum floor are reported as 0; ``inf`` is taken over the indices above
    the floor.
    """
    if p < 1:
        raise ValueError("order p must be at least 1")
    if qx is None or qy is None:
        dqx, dqy = default_quadratures(kernel_spec)
        qx = dqx if qx is None else qx
        qy = dqy if qy is None else qy
    d = qy.dim
    C3 = d ** p * (p + 1)
    sK = singular_values(assemble(kernel_spec, qx, qy)).values
    floor = FLOOR_RTOL * sK[0]
    rank = int(np.count_nonzero(sK > floor))
    lo, hi = (C3, max(rank, min(C3, len(sK)))) if n_range is None else n_range
    if lo // C3 < 1:
        raise ValueError(f"n_range starts at {lo}, but m = [n / {C3}] must be at least 1")
    if hi > len(sK):
        raise ValueError(f"n_range ends at {hi}, beyond the {len(sK)} computed singular values")

    spectra: dict[tuple[int, ...], np.ndarray] = {}
    sums = np.zeros(hi // C3 + 1)
    for I in all_index_tuples(d, p):
        key = tuple(sorted(I))  # derivatives commute
        if key not in spectra:
            spectra[key] = singular_values(assemble(derivative_kernel(kernel_spec, I), qx, qy)).values
        sI = spectra[key]
        take = min(len(sI), len(sums))
        sums[:take] += sI[:take]

    n = np.arange(lo, hi + 1)
    m = n // C3
    S = sums[m - 1]  # s_m is 1-based
    r = _ratio_arrays(sK[n - 1], S, n.astype(float), p, d, floor)
    valid = sK[n - 1] > floor
    sup = float(np.max(r))
    inf = float(np.min(r[valid])) if valid.any() else 0.0
    return RatioReport(n=n, ratios=r, sup=sup, inf=inf, extra={"C3": C3, "s_floor": floor})


def tail_sum_check(s, p: int, d: int) -> np.ndarray:
    """Partial sums of ``n^(2p/d) s_n^2``."""
    v = _values(s)
    n = np.arange(1, len(v) + 1, dtype=float)
    return np.cumsum(n ** (2.0 * p / d) * v ** 2)


def flattens(partials: np.ndarray, fraction: float = FLATTEN_FRACTION) -> bool:
    """True when the increment over the last decade is below ``fraction`` of the total."""
    partials = np.asarray(partials, dtype=float)
    L = len(partials)
    if L < 10:
        raise ValueError("need at least 10 partial sums to look at a decade")
    inc = partials[-1] - partials[L // 10 - 1]
    return bool(inc < fraction * partials[-1])


def small_o_check(s, p: int, d: int) -> np.ndarray:
    """The scaled sequence ``n^(p/d + 1/2) s_n``."""
    v = _values(s)
    n = np.arange(1, len(v) + 1, dtype=float)
    return n ** (p / d + 0.5) * v


def decays(scaled: np.ndarray, rtol: float = DECAY_RTOL) -> bool:
    """Last-decade maximum strictly below the previous decade's maximum."""
    scaled = np.asarray(scaled, dtype=float)
    L = len(scaled)
    if L < 100:
        raise ValueError("need at least 100 terms to compare two decades")
    last = scaled[L // 10 :].max()
    earlier = scaled[L // 100 : L // 10].max()
    return bool(last < (1.0 - rtol) * earlier)


def cosine_sobolev_lower_bound(d: int, p: int, lam: float, m) -> np.ndarray:
    """``(m^(1/d) (d!)^(1/d) + 1)^(-p + lam)``."""
    m = np.asarray(m, dtype=float)
    return (m ** (1.0 / d) * math.factorial(d) ** (1.0 / d) + 1.0) ** (-p + lam)


def thm2_lower_check(d: int, p: int, lam: float | None = None, N: int | None = None, min_entry: int = 0) -> RatioReport:
    """Rank-indexed cosine-series spectrum against its closed-form lower bound.

    ``min_entry`` selects the index set of the construction: 0 counts
    ``m_j >= 0`` (the counting behind the bound), 1 counts ``m_j >= 1``.
    The margins are ``s_m - bound_m``.
    """
    lam = -(d + 1) / 2 if lam is None else lam
    if not lam < -d / 2:
        raise ValueError(f"lam={lam} violates lam < -d/2")
    spec = CosineSobolev(d=d, p=p, lam=lam, N=N, min_entry=min_entry)
    s = spec.exact_spectrum().values
    m = np.arange(1, len(s) + 1)
    bound = cosine_sobolev_lower_bound(d, p, lam, m)
    return RatioReport(
        n=m,
        ratios=s / bound,
        sup=float(np.max(s / bound)),
        inf=float(np.min(s / bound)),
        margins=s - bound,
        extra={"min_margin": float(np.min(s - bound)), "N": spec.N, "min_entry": min_entry},
    )


def log_damped_rule(p: float, q: float) -> Callable[[np.ndarray], np.ndarray]:
    """``a_n = n^(-(p+1)/q) log(n+1)^(-2/q)``: ``sum n^p a_n^q`` converges."""
    return lambda n: n ** (-(p + 1) / q) * np.log(n + 1.0) ** (-2.0 / q)


@dataclass(frozen=True, eq=False)
class AppendixReport:
    sample_n: tuple[int, ...]
    scaled: np.ndarray
    strictly_decreasing: bool
    lemma_partial_sums: dict[str, np.ndarray]
    lemma_hits: dict[str, int | None]


def lemma_partial_sums(b: Callable[[int], int], p: float, horizon: int, threshold: float | None = None) -> np.ndarray:
    """Partial sums of ``1 - (b_k / b_{k+1})^p``, k = 1..horizon.

    ``b`` returns Python integers, so sequences like ``2**k`` stay exact.
    Stops early once ``threshold`` is exceeded.
    """
    if not p > 0:
        raise ValueError("exponent p must be positive")
    out = []
    total = 0.0
    prev = b(1)
    for k in range(1, horizon + 1):
        nxt = b(k + 1)
        if not nxt > prev:
            raise ValueError(f"b must be strictly increasing (b_{k}={prev}, b_{k + 1}={nxt})")
        total += 1.0 - (prev / nxt) ** p
        out.append(total)
        if threshold is not None and total > threshold:
            break
        prev = nxt
    return np.array(out)


def appendix_sequence_check(
    p: float,
    q: float,
    rule: Callable[[np.ndarray], np.ndarray] | None = None,
    sequences: dict[str, Callable[[int], int]] | None = None,
    threshold: float = 3.0,
    horizon: int = 100_000,
    sample_n: Sequence[int] = (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5),
) -> AppendixReport:
    """Finite-horizon evidence for ``n^((p+1)/q) a_n -> 0`` and the divergent ratio series."""
    if p < 0 or not q > 0:
        raise ValueError("need p >= 0 and q > 0")
    rule = log_damped_rule(p, q) if rule is None else rule
    n_all = np.arange(1, max(sample_n) + 1, dtype=float)
    a = np.asarray(rule(n_all), dtype=float)
    if np.any(a <= 0) or np.any(np.diff(a) > 0):
        raise ValueError("rule must give a positive nonincreasing sequence")
    idx = np.asarray(sample_n, dtype=int)
    scaled = idx.astype(float) ** ((p + 1) / q) * a[idx - 1]
    strictly = bool(np.all(np.diff(scaled) < 0))

    if sequences is None:
        sequences = {"b_k = k": lambda k: k, "b_k = 2^k": lambda k: 2 ** k}
    lemma_p = p if p > 0 else 1.0
    sums, hits = {}, {}
    for name, b in sequences.items():
        ps = lemma_partial_sums(b, lemma_p, horizon, threshold)
        sums[name] = ps
        over = np.flatnonzero(ps > threshold)
        hits[name] = int(over[0]) + 1 if len(over) else None
    return AppendixReport(tuple(int(x) for x in idx), scaled, strictly, sums, hits)
