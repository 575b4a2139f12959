"""Command-line experiment driver.

Every subcommand writes a CSV table and a JSON manifest into ``--out-dir``
and exits with status 0 iff all of its checks pass. Flags override values
from an optional ``--config`` file of ``key = value`` lines.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, combinatorics
from .geometry import Isometry, SpaceKind, invariant_density
from .kernels import EnvelopeSpec, KernelSpec, envelope, kernel_diagonal, kernel_invariant, kernel_weighted
from .numerics import QuadratureConfig, RngStream
from .sampler import sample_many, sample_sphere_matrix_model, truncation_choice
from .statistics import (
    alpha,
    asymptotic_variance,
    centered_statistic,
    co_residual,
    cumulant_trace,
    expected_statistic,
    llap_residual,
    mean_trace,
    moment_report,
    normality_test,
    variance_quadrature,
    variance_trace,
)
from .testfunctions import parse_test_function

SUMMARY_COLUMNS = ["model", "rho", "f", "quantity", "estimate", "error", "prediction", "pass"]
POINT_COLUMNS = ["sample_id", "point_id", "re", "im"]
IDENTITY_COLUMNS = ["quantity", "k", "value_numerator", "value_denominator", "prediction", "pass"]
GRID_COLUMNS = ["model", "rho", "re_z", "im_z", "re_w", "im_w", "re_K", "im_K", "abs_K", "envelope"]
VALUE_COLUMNS = ["sample", "value"]

DEFAULT_WINDOW = {SpaceKind.PLANE: 1.0, SpaceKind.SPHERE: math.inf, SpaceKind.HYPERBOLIC: 0.9}


# -- formatting and output ------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip text for floats; plain str otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, SpaceKind):
        return x.value
    return x


class Run:
    """Collects rows, checks and manifest entries for one subcommand."""

    def __init__(self, name: str, args: argparse.Namespace, columns=SUMMARY_COLUMNS):
        self.name = name
        self.columns = list(columns)
        self.args = args
        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.rows: list[dict] = []
        self.tables: dict[str, tuple[list[str], list[dict]]] = {}
        self.checks: list[dict] = []
        self.ranks: dict[str, int] = {}
        self.extra: dict = {}
        self.t0 = time.perf_counter()

    def row(self, passed=None, **kw):
        if passed is not None:
            kw["pass"] = bool(passed)
        self.rows.append(kw)
        return kw

    def check(self, name: str, passed: bool, **detail):
        self.checks.append({"check": name, "pass": bool(passed), **detail})
        return bool(passed)

    def table(self, suffix: str, columns, rows):
        self.tables[suffix] = (list(columns), rows)

    def finish(self) -> int:
        main = self.out / f"{self.name}.csv"
        write_csv(main, self.columns, self.rows)
        outputs = [main.name]
        for suffix, (cols, rows) in self.tables.items():
            path = self.out / f"{self.name}_{suffix}.csv"
            write_csv(path, cols, rows)
            outputs.append(path.name)
        config = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        ok = all(c["pass"] for c in self.checks)
        manifest = {
            "command": self.name,
            "tool_version": __version__,
            "config": config,
            "master_seed": self.args.seed,
            "truncation_ranks": self.ranks,
            "outputs": outputs,
            "wall_clock_seconds": time.perf_counter() - self.t0,
            "checks": self.checks,
            "all_passed": ok,
            **self.extra,
        }
        with open(self.out / f"{self.name}.manifest.json", "w") as fh:
            json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
            fh.write("\n")
        for c in self.checks:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"{status}  {c['check']}", file=sys.stdout if c["pass"] else sys.stderr)
        return 0 if ok else 1


# -- argument helpers -----------------------------------------------------------------

def rho_grid(text: str) -> list[float]:
    """'a:b' -> powers of two from a to b; 'a,b,c' -> the listed values."""
    text = str(text).strip()
    if ":" in text:
        lo, hi = (float(t) for t in text.split(":"))
        if lo <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        vals = [2.0 ** k for k in range(int(math.ceil(math.log2(lo))), int(math.floor(math.log2(hi))) + 1)]
    else:
        vals = [float(t) for t in text.split(",") if t.strip()]
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return [int(v) if float(v).is_integer() else v for v in vals]


def model_list(text: str) -> list[SpaceKind]:
    try:
        return [SpaceKind.parse(t.strip()) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def model(text: str) -> SpaceKind:
    try:
        return SpaceKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def number(text) -> float:
    """A positive real; integral values come back as int."""
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return int(v) if v.is_integer() else v


def int_list(text: str) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


def str_list(text: str) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _cfg(args) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol, base_order=12)


def _finite_spec(run: Run, space: SpaceKind, rho, window, tail_tol, rank=None) -> KernelSpec:
    if space is SpaceKind.SPHERE:
        spec = KernelSpec(space, rho)
    else:
        n = rank if rank else truncation_choice(rho, window, tail_tol, space)
        spec = KernelSpec(space, rho, n)
    run.ranks[f"{space.value}:{rho}"] = spec.truncation_rank
    return spec


# -- subcommands ----------------------------------------------------------------------

def cmd_sample(args) -> int:
    run = Run("sample", args, POINT_COLUMNS)
    space = args.model
    window = DEFAULT_WINDOW[space] if args.window is None else args.window
    spec = _finite_spec(run, space, args.rho, window, args.tail_tol, args.rank)
    run.extra["window_radius"] = window
    if args.sampler == "matrix":
        if space is not SpaceKind.SPHERE:
            raise SystemExit("the matrix model exists for the sphere only")
        samples = [sample_sphere_matrix_model(int(args.rho), RngStream(args.seed, args.first_stream + i))
                   for i in range(args.samples)]
    else:
        samples = sample_many(spec, args.seed, args.samples, window, args.first_stream, args.jobs)
    for s in samples:
        for j, p in enumerate(s.points):
            run.row(sample_id=s.stream_id, point_id=j, re=p.real, im=p.imag)
    run.extra["rejections"] = [s.rejection_count for s in samples]
    run.check("point counts equal the rank", all(len(s) == spec.truncation_rank for s in samples),
              rank=spec.truncation_rank)
    return run.finish()


def _disk_points(rng, n, radius):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


VERIFY_RADIUS = {SpaceKind.PLANE: 3.0, SpaceKind.SPHERE: 3.0, SpaceKind.HYPERBOLIC: 0.95}
ENVELOPE_RADII = {SpaceKind.PLANE: (0.0,), SpaceKind.SPHERE: (1.0, 2.0), SpaceKind.HYPERBOLIC: (0.5, 0.9)}


def intensity_error(spec: KernelSpec, z) -> float:
    target = spec.rho / np.pi * np.asarray(invariant_density(spec.space, z))
    return float(np.max(np.abs(kernel_diagonal(spec, z) / target - 1)))


def envelope_violations(spec: KernelSpec, R: float, rng, n: int = 400, slack: float = 1e-12):
    """Count of grid pairs with |K(z,w)| > envelope(z - w) + slack, and the max ratio."""
    space = spec.space
    if space is SpaceKind.PLANE:
        z = _disk_points(rng, n, 3.0)
        w = _disk_points(rng, n, 3.0)
    elif space is SpaceKind.SPHERE:
        z = _disk_points(rng, n, R)
        w = _disk_points(rng, n, R)
    else:
        z = _disk_points(rng, n, R)
        w = _disk_points(rng, n, 1.0 - 1e-9)
    w[: n // 4] = z[: n // 4]  # include the diagonal, where the bound is tightest
    Z, W = np.meshgrid(z, w, indexing="ij")
    k = np.abs(kernel_weighted(spec, Z, W))
    e = envelope(EnvelopeSpec(space, spec.rho, R), Z - W)
    return int(np.sum(k > e + slack)), float(np.max(k - e)), (Z, W, k, e)


def invariance_deviation(spec: KernelSpec, rng, n: int = 1000) -> float:
    space = spec.space
    radius = VERIFY_RADIUS[space] if space is not SpaceKind.HYPERBOLIC else 0.9
    worst = 0.0
    for _ in range(n):
        T = Isometry.random(space, rng)
        z, w = _disk_points(rng, 2, radius)
        a = abs(kernel_invariant(spec, complex(T(z)), complex(T(w))))
        b = abs(kernel_invariant(spec, complex(z), complex(w)))
        worst = max(worst, abs(a - b))
    return worst


def cmd_verify_kernels(args) -> int:
    run = Run("verify_kernels", args)
    rng = RngStream(args.seed, 0).generator()
    grid_rows = []
    for space in args.models:
        for rho in args.rho_grid:
            spec = KernelSpec(space, rho)
            z = _disk_points(rng, args.points, VERIFY_RADIUS[space])
            err = intensity_error(spec, z)
            ok = err <= 1e-10
            run.row(ok, model=space.value, rho=rho, quantity="intensity_rel_error", estimate=err,
                    prediction=1e-10)
            run.check(f"intensity {space.value} rho={rho}", ok, value=err)
            if rho >= 2 or space is SpaceKind.PLANE:
                for R in ENVELOPE_RADII[space]:
                    tag = "all" if space is SpaceKind.PLANE else f"R={R:g}"
                    bad, gap, (Z, W, k, e) = envelope_violations(spec, R, rng)
                    run.row(bad == 0, model=space.value, rho=rho, quantity=f"envelope_violations[{tag}]",
                            estimate=bad, error=gap, prediction=0)
                    run.check(f"envelope {space.value} rho={rho} {tag}", bad == 0, violations=bad)
                    K = kernel_weighted(spec, Z[::40, ::40], W[::40, ::40])
                    for (zz, ww, kk, ee) in zip(Z[::40, ::40].ravel(), W[::40, ::40].ravel(),
                                                np.ravel(K), e[::40, ::40].ravel()):
                        grid_rows.append({"model": space.value, "rho": rho, "re_z": zz.real, "im_z": zz.imag,
                                          "re_w": ww.real, "im_w": ww.imag, "re_K": kk.real, "im_K": kk.imag,
                                          "abs_K": abs(kk), "envelope": ee})
            dev = invariance_deviation(spec, rng, args.triples)
            ok = dev <= 1e-9
            run.row(ok, model=space.value, rho=rho, quantity="isometry_max_deviation", estimate=dev,
                    prediction=1e-9)
            run.check(f"invariance {space.value} rho={rho}", ok, value=dev)
    run.table("grid", GRID_COLUMNS, grid_rows)
    return run.finish()


def cmd_cumulant_identities(args) -> int:
    run = Run("cumulant_identities", args, IDENTITY_COLUMNS)
    t0 = time.perf_counter()

    def add(quantity, k, value: Fraction, want: Fraction):
        run.row(value == want, quantity=quantity, k=k, value_numerator=value.numerator,
                value_denominator=value.denominator, prediction=str(want))

    for k in range(1, args.kmax + 1):
        u = combinatorics.upsilon(k, combinatorics.one)
        want = Fraction(1 if k == 1 else 0)
        add("upsilon_one", k, u, want)
        run.check(f"upsilon_one k={k}", u == want)
    for k in range(2, args.kmax + 1):
        g = combinatorics.verify_gff(k)
        want = Fraction(1, 2) if k == 2 else Fraction(0)
        add("upsilon_gff", k, g, want)
        run.check(f"upsilon_gff k={k}", g == want)
    res = combinatorics.series_identity_check(args.order)
    for i, c in enumerate(res):
        add("series_residual", i, c, Fraction(0))
    run.check(f"series identity order={args.order}", all(c == 0 for c in res))
    run.extra["elapsed_exact_seconds"] = time.perf_counter() - t0
    return run.finish()


def cmd_variance(args) -> int:
    run = Run("variance", args)
    for label in args.f:
        f = parse_test_function(label)
        asym = asymptotic_variance(f)
        for space in args.models:
            gaps = []
            for rho in args.rho_grid:
                spec = KernelSpec(space, rho)
                vt = variance_trace(spec, f)
                vt2 = variance_trace(spec, f, resolution=2)
                terr = abs(vt2 - vt)
                gap = abs(vt - asym) / asym
                gaps.append(gap)
                run.row(None, model=space.value, rho=rho, f=label, quantity="variance_trace", estimate=vt,
                        error=terr, prediction=asym)
                run.row(None, model=space.value, rho=rho, f=label, quantity="relative_gap", estimate=gap)
                run.row(None, model=space.value, rho=rho, f=label, quantity="cum3_trace",
                        estimate=cumulant_trace(spec, f, 3), prediction=0.0)
                if args.quadrature:
                    q = variance_quadrature(spec, f, _cfg(args))
                    ok = abs(q.value - vt) <= q.error + terr + 1e-10
                    run.row(ok, model=space.value, rho=rho, f=label, quantity="variance_quadrature",
                            estimate=q.value, error=q.error, prediction=vt)
                    run.check(f"trace vs quadrature {space.value} rho={rho} {label}", ok,
                              trace=vt, quadrature=q.value, error=q.error)
            if len(gaps) > 1:
                run.check(f"gap shrinks {space.value} {label}", gaps[-1] < gaps[0], first=gaps[0], last=gaps[-1])
            if space is SpaceKind.PLANE and args.max_gap is not None:
                run.check(f"gap <= {args.max_gap} at rho={args.rho_grid[-1]} {label}", gaps[-1] <= args.max_gap,
                          gap=gaps[-1])
    return run.finish()


def cmd_clt(args) -> int:
    run = Run("clt", args)
    space = args.model
    f = parse_test_function(args.f)
    window = DEFAULT_WINDOW[space] if args.window is None else args.window
    if space is not SpaceKind.SPHERE and f.support_radius > window:
        raise SystemExit("the observation window must contain the support of f")
    spec = _finite_spec(run, space, args.rho, window, args.tail_tol)
    samples = sample_many(spec, args.seed, args.samples, window, 0, args.jobs)
    exact = KernelSpec(space, args.rho)
    mean = expected_statistic(exact, f)
    values = [centered_statistic(s, f, exact, mean) for s in samples]
    var_pred = variance_trace(exact, f)
    asym = asymptotic_variance(f)
    predictions = {
        "mean": (mean_trace(exact, f) - mean, 0.0),
        "variance": (var_pred, asym),
        "cum3": (cumulant_trace(exact, f, 3), 0.0),
        "cum4": (cumulant_trace(exact, f, 4), 0.0),
    }
    rep = moment_report(values, predictions, {"space": space.value, "rho": args.rho, "f": f.label},
                        args.bootstrap, args.seed)
    norm = normality_test(values, var_pred)
    m = dict(model=space.value, rho=args.rho, f=f.label)
    for name in ("mean", "variance", "cum3", "cum4"):
        est = getattr(rep, name)
        trace, asy = rep.predictions[name]
        run.row(None, quantity=f"{name}", estimate=est.value, error=est.se, prediction=trace, **m)
    ok_mean = rep.within("mean", 0.0)
    ok_var = rep.within("variance", var_pred)
    ratio = rep.variance.value / asym
    ok_asym = abs(ratio - 1) <= 0.15
    ok_ad = norm.ad_pvalue > 0.01
    ok_c3 = abs(rep.cum3.value) <= 3 * rep.cum3.se
    run.row(ok_asym, quantity="variance_ratio_to_asymptotic", estimate=ratio, prediction=1.0, **m)
    run.row(None, quantity="ks_pvalue", estimate=norm.ks_pvalue, error=norm.ks_statistic, **m)
    run.row(ok_ad, quantity="ad_pvalue", estimate=norm.ad_pvalue, error=norm.ad_statistic, **m)
    run.check("mean within 4 SE of 0", ok_mean, value=rep.mean.value, se=rep.mean.se)
    run.check("variance within 4 SE of trace prediction", ok_var, value=rep.variance.value, prediction=var_pred)
    run.check("variance within 15% of asymptotic", ok_asym, ratio=ratio)
    run.check("Anderson-Darling p > 0.01", ok_ad, pvalue=norm.ad_pvalue)
    run.check("|cum3| <= 3 SE", ok_c3, value=rep.cum3.value, se=rep.cum3.se)
    run.table("values", VALUE_COLUMNS, [{"sample": s.stream_id, "value": v} for s, v in zip(samples, values)])
    return run.finish()


def cmd_alpha(args) -> int:
    run = Run("alpha", args)
    for space in args.models:
        vals = []
        for rho in args.rho_grid:
            a = alpha(KernelSpec(space, rho))
            vals.append(a)
            if space is SpaceKind.PLANE:
                ok = abs(a - 1 / (2 * np.pi)) <= 1e-8
                run.row(ok, model=space.value, rho=rho, quantity="alpha", estimate=a, prediction=1 / (2 * np.pi))
                run.check(f"alpha plane rho={rho}", ok, value=a)
            else:
                ok = math.isfinite(a) and a > 0
                run.row(ok, model=space.value, rho=rho, quantity="alpha", estimate=a)
                run.check(f"alpha {space.value} rho={rho} finite", ok, value=a)
        if space is not SpaceKind.PLANE and len(vals) > 1:
            ok = abs(vals[-1] - vals[-2]) <= 0.05 * vals[-2]
            run.check(f"alpha {space.value} settles", ok, last=vals[-1], previous=vals[-2])
        run.row(None, model=space.value, quantity="alpha_sup", estimate=max(vals))
    return run.finish()


LLAP_DEFAULTS = {SpaceKind.SPHERE: (2.0, 1.0), SpaceKind.PLANE: (1.25, 1.0), SpaceKind.HYPERBOLIC: (0.7, 0.5)}


def cmd_llap(args) -> int:
    run = Run("llap", args)
    F = parse_test_function(args.co_f)
    for space in args.models:
        B, B2 = LLAP_DEFAULTS[space]
        B = args.B if args.B is not None else B
        B2 = args.B2 if args.B2 is not None else B2
        for p in args.p:
            for conj in (False, True):
                q = f"llap_conj[p={p}]" if conj else f"llap[p={p}]"
                vals = [llap_residual(KernelSpec(space, rho), p, B, B2, conjugate=conj) for rho in args.rho_grid]
                for rho, v in zip(args.rho_grid, vals):
                    run.row(None, model=space.value, rho=rho, quantity=q, estimate=v)
                ok = all(b < a for a, b in zip(vals, vals[1:]))
                run.check(f"{q} decreasing {space.value}", ok, values=vals)
        co_B = args.co_B
        vals = [co_residual(KernelSpec(space, rho), F, co_B) for rho in args.rho_grid]
        for rho, v in zip(args.rho_grid, vals):
            run.row(None, model=space.value, rho=rho, f=F.label, quantity="co_residual", estimate=v)
        ok = all(b < a for a, b in zip(vals, vals[1:]))
        run.check(f"co decreasing {space.value}", ok, values=vals)
    return run.finish()


# -- parser ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for replicates")
    p.add_argument("--rel-tol", type=float, default=1e-6, help="relative quadrature tolerance")
    p.add_argument("--abs-tol", type=float, default=1e-10, help="absolute quadrature tolerance")
    p.add_argument("--out-dir", default="out", help="directory for CSV and manifest files")
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invdpp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=func)
        return p

    p = add("sample", cmd_sample, "draw point configurations")
    p.add_argument("--model", type=model, default=None, help="plane, sphere or hyperbolic (required)")
    p.add_argument("--rho", type=number, default=None, help="density parameter (required)")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--window", type=float, default=None, help="observation window radius")
    p.add_argument("--tail-tol", type=float, default=1e-10)
    p.add_argument("--rank", type=int, default=None, help="explicit truncation rank")
    p.add_argument("--sampler", choices=("projection", "matrix"), default="projection")
    p.add_argument("--first-stream", type=int, default=0)

    p = add("verify-kernels", cmd_verify_kernels, "intensity, envelope and invariance checks")
    p.add_argument("--models", type=model_list, default=model_list("plane,sphere,hyperbolic"))
    p.add_argument("--rho-grid", type=rho_grid, default=rho_grid("2,8,32,128"))
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--triples", type=int, default=1000)

    p = add("cumulant-identities", cmd_cumulant_identities, "exact composition identities")
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--order", type=int, default=12)

    p = add("variance", cmd_variance, "trace-formula (and quadrature) variances")
    p.add_argument("--models", type=model_list, default=model_list("plane"))
    p.add_argument("--rho-grid", type=rho_grid, default=rho_grid("16,64,256"))
    p.add_argument("--f", type=str_list, default=str_list("bump:1"))
    p.add_argument("--quadrature", action="store_true")
    p.add_argument("--max-gap", type=float, default=0.10)

    p = add("clt", cmd_clt, "Monte Carlo fluctuation experiment")
    p.add_argument("--model", type=model, default=SpaceKind.SPHERE)
    p.add_argument("--rho", type=number, default=64)
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--f", default="bump:1.5")
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--tail-tol", type=float, default=1e-10)
    p.add_argument("--bootstrap", type=int, default=1000)

    p = add("alpha", cmd_alpha, "the variance-bound constant over a rho grid")
    p.add_argument("--models", "--model", type=model_list, default=model_list("plane,sphere,hyperbolic"))
    p.add_argument("--rho-grid", type=rho_grid, default=rho_grid("2:512"))

    p = add("llap", cmd_llap, "reproducing residuals and the CO covariance")
    p.add_argument("--models", "--model", type=model_list, default=model_list("sphere,plane"))
    p.add_argument("--rho-grid", type=rho_grid, default=rho_grid("16,64,256"))
    p.add_argument("--p", type=int_list, default=int_list("0,1,2"))
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--B2", type=float, default=None)
    p.add_argument("--co-f", default="bump:1")
    p.add_argument("--co-B", type=float, default=1.5)
    return parser


BOOL_KEYS = {"quadrature"}


def read_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_string("[run]\n" + fh.read())
    out = {}
    for k, v in cp["run"].items():
        key = k.replace("-", "_")
        out[key] = cp["run"].getboolean(k) if key in BOOL_KEYS else v
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config(known.config)
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for sp in sub.choices.values():
            dests = {a.dest for a in sp._actions}
            unknown = set(values) - dests
            if unknown and argv and argv[0] in sub.choices and sp is sub.choices[argv[0]]:
                parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
            sp.set_defaults(**{k: v for k, v in values.items() if k in dests})
    args = parser.parse_args(argv)
    list_keys = ("models", "rho_grid", "p") + (("f",) if args.command == "variance" else ())
    for key in list_keys:  # string defaults from a config file
        val = getattr(args, key, None)
        if isinstance(val, str):
            conv = {"models": model_list, "rho_grid": rho_grid, "f": str_list, "p": int_list}[key]
            setattr(args, key, conv(val))
    if isinstance(getattr(args, "model", None), str):
        args.model = model(args.model)
    if args.command == "sample":
        missing = [f"--{k}" for k in ("model", "rho") if getattr(args, k) is None]
        if missing:
            parser.error(f"sample: the following arguments are required: {', '.join(missing)}")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
