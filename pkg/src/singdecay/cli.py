"""Command-line runner for the decay checks.

Every subcommand writes one report (JSON, or CSV plus a JSON sidecar) and
exits 0 exactly when all of its assertions pass. Reports contain no
timestamps or timings, so identical configs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, kernels, neumann, oracle
from .discop import assemble, default_quadratures, hs_identity_gap, singular_values
from .spectrum import FLOOR_RTOL

OUTPUT_ENV = "SINGDECAY_OUTPUT_DIR"
CSV_COLUMNS = ("n", "s_discrete", "s_exact", "bound", "ratio")
KERNEL_CHOICES = ("cosine-sobolev", "eigen-series", "analytic", "gaussian")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"invalid --{field_name.replace('_', '-')}: {message}")
        self.field = field_name


@dataclass
class Report:
    config: dict
    results: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    columns: tuple = CSV_COLUMNS
    plot: dict | None = None

    def check(self, name: str, passed: bool, value, tolerance) -> bool:
        self.assertions.append({"name": name, "pass": bool(passed), "value": value, "tolerance": tolerance})
        return bool(passed)

    @property
    def ok(self) -> bool:
        return all(a["pass"] for a in self.assertions)

    def document(self) -> dict:
        return {"config": self.config, "results": self.results, "assertions": self.assertions}


def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def to_json(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) if not isinstance(r.get(c), str) else r[c] for c in columns])
    return buf.getvalue()


# ---- subcommands


def _pos_int(args, name, lo=1, hi=None):
    v = getattr(args, name)
    if v is None:
        return None
    if v < lo or (hi is not None and v > hi):
        rng = f">= {lo}" if hi is None else f"in {lo}..{hi}"
        raise ConfigError(name, f"{v} must be {rng}")
    return v


def run_weyl(args) -> Report:
    d = _pos_int(args, "dim", 1, 6)
    count = _pos_int(args, "count")
    basis = neumann.enumerate_eigenpairs(d, count)
    n = np.arange(1, count + 1)
    pred = neumann.weyl_prediction(d, n)
    ratio = basis.lambdas / pred
    rep = Report({"command": "weyl", "dim": d, "count": count})
    rep.rows = [{"n": int(i), "s_exact": float(l), "bound": float(b), "ratio": float(r)} for i, l, b, r in zip(n, basis.lambdas, pred, ratio)]
    rep.results = {"ratio_min": float(ratio.min()), "ratio_max": float(ratio.max()), "ratio_last": float(ratio[-1])}
    # the one-term law is exact in d=1 and asymptotic otherwise
    windows = {1: (1, count, 1e-12), 2: (500, 2000, 0.05), 3: (2000, 5000, 0.08)}
    if d in windows:
        lo, hi, tol = windows[d]
        hi = min(hi, count)
        if lo <= hi:
            dev = float(np.max(np.abs(ratio[lo - 1 : hi] - 1.0)))
            rep.check(f"weyl_ratio_n{lo}_{hi}", dev <= tol, dev, tol)
    rep.plot = {"x": np.log(n), "y": np.log(basis.lambdas), "xlabel": "log n", "ylabel": "log lambda_n"}
    return rep


def _build_kernel(args):
    name = args.kernel
    d = _pos_int(args, "dim", 1, 3)
    N = _pos_int(args, "n_modes")
    if name == "cosine-sobolev":
        return kernels.CosineSobolev(d=d, p=args.p, lam=args.lam, N=N)
    if name == "eigen-series":
        return kernels.EigenSeries(d=d, p=args.p, N=N)
    if name == "analytic":
        return kernels.AnalyticProduct(d=d, tau=args.tau, N=N)
    if name == "gaussian":
        if not args.width > 0:
            raise ConfigError("width", "must be positive")
        return kernels.Gaussian(width=args.width)
    raise ConfigError("kernel", f"unknown kernel {name!r}")


def _kernel_config(args, spec) -> dict:
    cfg = {"kernel": args.kernel, "dim": args.dim}
    for key in ("p", "lam", "tau", "N"):
        if hasattr(spec, key):
            cfg["n_modes" if key == "N" else key] = getattr(spec, key)
    if args.kernel == "gaussian":
        cfg["width"] = args.width
    return cfg


def run_spectrum(args) -> Report:
    try:
        spec = _build_kernel(args)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("kernel", str(exc)) from exc
    n_quad = _pos_int(args, "n_quad")
    qx, qy = default_quadratures(spec, n_quad=n_quad, d=args.dim)
    s = singular_values(assemble(spec, qx, qy)).values
    cfg = {"command": "spectrum", **_kernel_config(args, spec), "n_quad_x": qx.shape[0], "n_quad_y": qy.shape[0]}
    rep = Report(cfg)
    exact = spec.exact_spectrum().values if isinstance(spec, kernels.SeriesKernel) else None
    length = len(s) if exact is None else len(exact)
    for i in range(length):
        row = {"n": i + 1, "s_discrete": float(s[i]) if i < len(s) else None}
        if exact is not None:
            row["s_exact"] = float(exact[i])
            row["ratio"] = row["s_discrete"] / row["s_exact"] if row["s_discrete"] is not None else None
        rep.rows.append(row)
    gap = hs_identity_gap(spec, qx, qy)
    rep.results = {"s_1": float(s[0]), "numerical_rank": int(np.count_nonzero(s > FLOOR_RTOL * s[0])), "hs_gap": gap}
    rep.check("hs_identity_gap", gap < 1e-10, gap, 1e-10)
    if exact is not None:
        half = max(1, len(exact) // 2)
        dev = float(np.max(np.abs(s[:half] - exact[:half]) / exact[:half]))
        rep.results["leading_half_rel_dev"] = dev
        rep.check("discrete_matches_exact_leading_half", dev < 1e-6, dev, 1e-6)
    keep = s > FLOOR_RTOL * s[0]
    rep.plot = {"x": np.log(np.arange(1, len(s) + 1)[keep]), "y": np.log(s[keep]), "xlabel": "log n", "ylabel": "log s_n"}
    return rep


def run_thm1(args) -> Report:
    if args.kernel not in ("cosine-sobolev", "eigen-series", "analytic"):
        raise ConfigError("kernel", "thm1 needs a series kernel")
    spec = _build_kernel(args)
    p = _pos_int(args, "p")
    qx, qy = default_quadratures(spec)
    r = analysis.thm1_ratio(spec, p, qx, qy)
    sK = singular_values(assemble(spec, qx, qy)).values
    exact = spec.exact_spectrum().values
    rep = Report({"command": "thm1", **_kernel_config(args, spec)})
    for n, ratio in zip(r.n, r.ratios):
        bound = sK[n - 1] / ratio if ratio > 0 else None
        rep.rows.append({
            "n": int(n),
            "s_discrete": float(sK[n - 1]),
            "s_exact": float(exact[n - 1]) if n <= len(exact) else 0.0,
            "bound": bound,
            "ratio": float(ratio),
        })
    rep.results = {"sup": r.sup, "inf": r.inf, "argsup": r.argsup, "C3": r.extra["C3"]}
    rep.check("sup_finite", math.isfinite(r.sup) and r.sup > 0, r.sup, "finite")
    if args.kernel == "eigen-series":
        rep.check("inf_positive", r.inf > 0, r.inf, 0.0)
    n = r.n[r.ratios > 0]
    rep.plot = {"x": np.log(n), "y": np.log(r.ratios[r.ratios > 0]), "xlabel": "log n", "ylabel": "log ratio"}
    return rep


def run_thm2(args) -> Report:
    d = _pos_int(args, "dim", 1, 3)
    p = _pos_int(args, "p")
    try:
        r = analysis.thm2_lower_check(d, p, args.lam, args.n_modes, min_entry=args.min_entry)
    except ValueError as exc:
        raise ConfigError("lam", str(exc)) from exc
    lam = -(d + 1) / 2 if args.lam is None else args.lam
    s = r.ratios * analysis.cosine_sobolev_lower_bound(d, p, lam, r.n)
    bound = analysis.cosine_sobolev_lower_bound(d, p, lam, r.n)
    rep = Report({"command": "thm2", "dim": d, "p": p, "lam": lam, "n_modes": r.extra["N"], "min_entry": args.min_entry})
    rep.rows = [{"n": int(m), "s_exact": float(a), "bound": float(b), "ratio": float(q)} for m, a, b, q in zip(r.n, s, bound, r.ratios)]
    rep.results = {"min_margin": r.extra["min_margin"], "min_ratio": r.inf, "ranks": len(r.n)}
    rep.check("lower_bound_margins_nonnegative", r.extra["min_margin"] >= 0, r.extra["min_margin"], 0.0)
    rep.plot = {"x": np.log(r.n), "y": np.log(s), "xlabel": "log m", "ylabel": "log s_m"}
    return rep


def run_thm3(args) -> Report:
    d = _pos_int(args, "dim", 1, 3)
    tau = args.tau
    if not 0 < tau < 1:
        raise ConfigError("tau", f"{tau} must lie in (0, 1)")
    spec = kernels.AnalyticProduct(d=d, tau=tau, N=args.n_modes)
    exact = spec.exact_spectrum().values
    fit = analysis.thm3_fit(exact, d)
    lo, hi = fit.fit_range
    n = np.arange(1, len(exact) + 1, dtype=float)
    cfit = analysis.thm3_fit(analysis.matched_power_law(exact), d, fit.fit_range, floor_rtol=0.0)
    rep = Report({"command": "thm3", "dim": d, "tau": tau, "n_modes": spec.N, "fit_range": [lo, hi]})
    rep.rows = [
        {"n": int(i), "s_exact": float(e), "bound": float(b)}
        for i, e, b in zip(n, exact, analysis.square_lower_bound(d, tau, n))
    ]
    bl, bh = analysis.square_slope_bracket(d, tau)
    rep.results = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "log_tau": math.log(tau),
        "bracket": [bl, bh],
        "rank_count_slope": math.factorial(d) ** (1.0 / d) * math.log(tau),
        "control_residual": cfit.residual,
    }
    if d == 1:
        err = abs(fit.slope - math.log(tau))
        rep.check("slope_equals_log_tau", err < 1e-6, err, 1e-6)
    else:
        rep.check("slope_in_bracket", bl <= fit.slope < bh, fit.slope, [bl, bh])
    ratio = cfit.residual / max(fit.residual, np.finfo(float).tiny)
    rep.results["control_residual_ratio"] = ratio
    if d == 1:
        # for d > 1 the multiplicity staircase dominates both residuals
        rep.check("power_law_control_residual_ratio", ratio >= 100, ratio, 100)
    if args.discrete:
        qx, qy = default_quadratures(spec)
        s = singular_values(assemble(spec, qx, qy)).values
        half = len(exact) // 2
        dev = float(np.max(np.abs(s[:half] - exact[:half]) / exact[:half]))
        for row, v in zip(rep.rows, s):
            row["s_discrete"] = float(v)
        rep.results["leading_half_rel_dev"] = dev
        rep.check("discrete_matches_exact_leading_half", dev < 1e-6, dev, 1e-6)
    rep.plot = {"x": n ** (1.0 / d), "y": np.log(exact), "xlabel": "n^(1/d)", "ylabel": "log s_n"}
    return rep


def run_props(args) -> Report:
    cases = _pos_int(args, "cases")
    suite = oracle.run_suite(cases, args.seed)
    rep = Report({"command": "props", "cases": cases, "seed": args.seed})
    rep.columns = ("proposition", "cases", "violations", "violating_seeds")
    rep.rows = [
        {"proposition": r.name, "cases": r.cases, "violations": len(r.violations), "violating_seeds": " ".join(map(str, r.violations))}
        for r in suite.results.values()
    ]
    rep.results = {
        name: {"cases": r.cases, "violations": len(r.violations), "violating_seeds": r.violations}
        for name, r in suite.results.items()
    }
    rep.results["violations"] = suite.n_violations
    for name, r in suite.results.items():
        rep.check(f"{name}_no_violations", not r.violations, len(r.violations), 0)
    print(f"violations: {suite.n_violations}")
    print(f"runtime: {suite.runtime:.2f} s", file=sys.stderr)
    return rep


def run_appendix(args) -> Report:
    r = analysis.appendix_sequence_check(args.p, args.q, threshold=args.threshold, horizon=args.horizon)
    rep = Report({"command": "appendix", "p": args.p, "q": args.q, "threshold": args.threshold, "horizon": args.horizon})
    rep.columns = ("n", "scaled")
    rep.rows = [{"n": n, "scaled": float(v)} for n, v in zip(r.sample_n, r.scaled)]
    rep.results = {
        "scaled": dict(zip(map(str, r.sample_n), r.scaled)),
        "strictly_decreasing": r.strictly_decreasing,
        "lemma_hits": r.lemma_hits,
        "lemma_final_partial_sum": {k: float(v[-1]) for k, v in r.lemma_partial_sums.items()},
    }
    rep.check("scaled_strictly_decreasing", r.strictly_decreasing, list(r.scaled), "strict")
    for name, hit in r.lemma_hits.items():
        rep.check(f"partial_sums_exceed_threshold[{name}]", hit is not None, hit, args.threshold)
    rep.plot = {"x": np.log10(r.sample_n), "y": r.scaled, "xlabel": "log10 n", "ylabel": "scaled"}
    return rep


COMMANDS = {
    "weyl": run_weyl,
    "spectrum": run_spectrum,
    "thm1": run_thm1,
    "thm2": run_thm2,
    "thm3": run_thm3,
    "props": run_props,
    "appendix": run_appendix,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", type=Path, default=None, help=f"report path (default: ${OUTPUT_ENV} or cwd)")
    common.add_argument("--plot", action="store_true", help="also write an SVG next to the report")

    ap = argparse.ArgumentParser(prog="singdecay", description="Singular-value decay checks for integral operators.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weyl", parents=[common], help="Neumann eigenvalues against the Weyl law")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, default=500)

    def kernel_args(p, default_kernel):
        p.add_argument("--kernel", choices=KERNEL_CHOICES, default=default_kernel)
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--p", type=int, default=2)
        p.add_argument("--lam", type=float, default=None)
        p.add_argument("--tau", type=float, default=0.5)
        p.add_argument("--width", type=float, default=1.0)
        p.add_argument("--n-modes", type=int, default=None)

    p = sub.add_parser("spectrum", parents=[common], help="discrete and exact singular values")
    kernel_args(p, "cosine-sobolev")
    p.add_argument("--n-quad", type=int, default=None)

    p = sub.add_parser("thm1", parents=[common], help="ratio against derivative-kernel spectra")
    kernel_args(p, "eigen-series")

    p = sub.add_parser("thm2", parents=[common], help="cosine-series lower-bound margins")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--n-modes", type=int, default=None)
    p.add_argument("--min-entry", type=int, choices=(0, 1), default=0)

    p = sub.add_parser("thm3", parents=[common], help="stretched-exponential fit of the analytic kernel")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--n-modes", type=int, default=None)
    p.add_argument("--discrete", action="store_true", help="also compare the discretized spectrum")

    p = sub.add_parser("props", parents=[common], help="randomized matrix inequality suite")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("appendix", parents=[common], help="sequence trend checks")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--horizon", type=int, default=100_000)
    return ap


def _output_path(args) -> Path:
    if args.output is not None:
        return args.output
    base = Path(os.environ.get(OUTPUT_ENV, "."))
    return base / f"{args.command}.{args.format}"


def write_report(rep: Report, path: Path, fmt: str) -> list[Path]:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        doc = rep.document()
        doc["table"] = {"columns": list(rep.columns), "rows": rep.rows}
        path.write_text(to_json(doc), encoding="utf-8")
        return [path]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(rep.columns, rep.rows))
    side = path.with_name(path.name + ".json")
    side.write_text(to_json(rep.document()), encoding="utf-8")
    return [path, side]


def write_plot(rep: Report, path: Path) -> Path | None:
    if rep.plot is None:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "singdecay"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(rep.plot["x"], rep.plot["y"], ".-", ms=3, lw=0.8)
    ax.set_xlabel(rep.plot["xlabel"])
    ax.set_ylabel(rep.plot["ylabel"])
    ax.set_title(rep.config["command"])
    fig.tight_layout()
    out = path.with_suffix(".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"singdecay: {exc}", file=sys.stderr)
        return 2
    rep.config["format"] = args.format
    path = _output_path(args)
    for p in write_report(rep, path, args.format):
        print(f"wrote {p}")
    if args.plot:
        svg = write_plot(rep, path)
        if svg is not None:
            print(f"wrote {svg}")
    for a in rep.assertions:
        print(f"{'PASS' if a['pass'] else 'FAIL'} {a['name']}: value={_clean(a['value'])} tolerance={_clean(a['tolerance'])}")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
