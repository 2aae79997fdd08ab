"""Command-line interface: ``magneto-spectra <subcommand> [options]``.

Exit codes: 0 success, 1 selftest failure, 2 configuration/input error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .agmon import AgmonError, moment_report
from .asymptotics import AsymptoticsError, predictions
from .config import ConfigError, RunConfig, load_config, write_manifest
from .critical_field import CriticalFieldError, hc3_formula, hc3_root
from .eigensolve import SolverError, dense_pairs, lowest_pairs
from .field import FieldError
from .geometry import BoundaryCurve, GeometryError
from .halfline import HalfLineError, degennes_constants
from .identities import DEGENNES_TOLERANCES, degennes_identities, reduction_web, resolvent_identity
from .plot import svg_lines, write_gnuplot_data
from .quasimode import QuasimodeError, build_degenerate, build_nondegenerate, rayleigh
from .strip import StripError, export_triplets
from .sweep import FitError, SweepError, fit, read_csv, resolve_jobs, run_sweep, write_csv

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
CONFIG_ERRORS = (ConfigError, SweepError, FitError, GeometryError, FieldError, StripError,
                 AsymptoticsError, AgmonError, FileNotFoundError)
SOLVER_ERRORS = (SolverError, CriticalFieldError, QuasimodeError, HalfLineError)
RESOLVENT_TOL = 1e-4
WEB_TOL = 1e-12


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def _dump(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")
    return path


def _config(args) -> RunConfig:
    if not getattr(args, "config", None):
        raise ConfigError("--config is required for this subcommand")
    cfg = load_config(args.config)
    for key in ("tol", "nev", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            cfg.solver[key] = val
    if getattr(args, "jobs", None) is not None:
        cfg.solver["jobs"] = args.jobs
    cfg._validate()
    if getattr(args, "out", None):
        cfg.output["dir"] = args.out
    return cfg


def _outdir(cfg: RunConfig | None, args) -> Path:
    d = Path(args.out) if getattr(args, "out", None) else Path(cfg.output["dir"] if cfg else "out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _preds(cfg: RunConfig, problem) -> dict:
    return {p.model: p for p in predictions(cfg.build_field(), problem.minimum,
                                            nev=cfg.solver["nev"])}


def _default_model(preds: dict):
    for name in ("two_term", "constant_field", "constant_boundary", "rough"):
        if name in preds:
            return preds[name]
    raise ConfigError("no prediction available")


# -- subcommands -------------------------------------------------------------
def cmd_degennes(args):
    c = degennes_constants()
    d = c.to_dict()
    print(f"xi0    = {c.xi0:.10f}\ntheta0 = {c.theta0:.10f}\nC1     = {c.c1:.10f}")
    for k, v in degennes_identities(c).items():
        print(f"  {k:<26s} {v:+.3e}")
    if args.out:
        out = _outdir(None, args)
        p = _dump(out / "degennes.json", d)
        write_manifest(out, "degennes", None, [p])
    return EXIT_OK


def cmd_predict(args):
    cfg = _config(args)
    problem = cfg.problem()
    m = problem.minimum
    preds = _preds(cfg, problem)
    out = _outdir(cfg, args)
    doc = {"minimum": m.to_dict(), "predictions": [p.to_dict() for p in preds.values()]}
    for p in preds.values():
        flags = f"  [{', '.join(p.flags)}]" if p.flags else ""
        print(f"{p.model:<18s} a = {p.a:.8f}  b = {p.b:+.8f}  remainder O(B^{p.remainder_exponent:.3g}){flags}")
    path = _dump(out / "predictions.json", doc)
    write_manifest(out, "predict", cfg, [path])
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    problem = cfg.problem()
    B = cfg.B_list()
    jobs = resolve_jobs(cfg.solver.get("jobs"))
    t = time.perf_counter()
    recs = run_sweep(problem, B, cfg.solver["nev"], jobs=jobs,
                     floquet_check=cfg.sweep["floquet_check"])
    elapsed = time.perf_counter() - t
    preds = _preds(cfg, problem)
    out = _outdir(cfg, args)
    csv_path = out / "sweep.csv"
    write_csv(recs, csv_path, {"rough": preds["rough"], "two_term": preds.get("two_term")})
    json_path = _dump(out / "sweep.json", {"records": [r.to_dict() for r in recs],
                                           "predictions": [p.to_dict() for p in preds.values()]})
    outputs = [csv_path, json_path]
    if args.export_triplets:
        for r in recs:
            if r.ok:
                p = out / f"triplets_B{r.B:g}.txt"
                export_triplets(problem.operator(r.B), p)
                outputs.append(p)
    failed = [r for r in recs if not r.ok]
    write_manifest(out, "sweep", cfg, outputs, {"jobs": jobs, "elapsed_s": elapsed,
                                                "failures": [r.to_dict() for r in failed]})
    for r in recs:
        status = r.error or " ".join(f"{v:.8f}" for v in r.values)
        print(f"B = {r.B:10.4g}  {status}")
    if failed:
        raise CliError(f"{len(failed)} of {len(recs)} records failed", EXIT_SOLVER)
    return EXIT_OK


def cmd_fit(args):
    cfg = _config(args)
    problem = cfg.problem()
    preds = _preds(cfg, problem)
    if args.model and args.model not in preds:
        raise ConfigError(f"model {args.model!r} not applicable; available: {sorted(preds)}")
    model = preds[args.model] if args.model else _default_model(preds)
    cols = read_csv(args.csv)
    pairs = [(b, l) for b, l in zip(cols["B"], cols["lambda1"]) if np.isfinite(l)]
    exps = tuple(args.exponents) if args.exponents else (1.0, 0.5, 1.0 / 3.0)
    res = fit(pairs, model, exps)
    out = _outdir(cfg, args)
    print(f"model: {model.model}")
    print(res.table())
    (out / "fit.txt").write_text(f"model: {model.model}\n" + res.table() + "\n")
    path = _dump(out / "fit.json", {"model": model.to_dict(), "fit": res.to_dict()})
    write_manifest(out, "fit", cfg, [path, out / "fit.txt"], {"csv": str(args.csv)})
    return EXIT_OK


def cmd_quasimode(args):
    cfg = _config(args)
    problem = cfg.problem()
    m = problem.minimum
    B = args.B or cfg.B_list()
    preds = _preds(cfg, problem)
    model = _default_model(preds)
    rows = []
    for b in B:
        op, res = problem.solve(b, 1)
        lam = float(res.values[0])
        row = {"B": b, "lambda1": lam, "prediction": float(model(b))}
        if m.nondegenerate:
            for order in (1, 2, 3):
                x, _ = build_nondegenerate(op, m, order=order)
                row[f"quotient{order}"] = rayleigh(x, op)
        else:
            x, _ = build_degenerate(op, m)
            row["quotient1"] = rayleigh(x, op)
        row["upper_bound_ok"] = all(row[k] >= lam - cfg.solver["tol"] * max(1.0, abs(lam))
                                    for k in row if k.startswith("quotient"))
        rows.append(row)
        print("  ".join(f"{k}={v:.8g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    out = _outdir(cfg, args)
    path = _dump(out / "quasimode.json", {"model": model.to_dict(), "rows": rows})
    write_manifest(out, "quasimode", cfg, [path])
    return EXIT_OK


def cmd_agmon(args):
    cfg = _config(args)
    problem = cfg.problem()
    sols = []
    for b in cfg.B_list():
        op, res = problem.solve(b, 1)
        sols.append((op, res.vectors[:, 0]))
    rep = moment_report(sols, cfg.build_field(), problem.minimum)
    doc = rep.to_dict()
    for k, v in doc["ratios"].items():
        print(f"{k:<14s} max/min = {v:.4f}  pass = {doc['pass'][k]}")
    print("slopes:", doc["slopes"])
    out = _outdir(cfg, args)
    path = _dump(out / "agmon.json", doc)
    write_manifest(out, "agmon", cfg, [path])
    return EXIT_OK


def cmd_hc3(args):
    cfg = _config(args)
    problem = cfg.problem()
    kappas = args.kappa or cfg.hc3["kappa"]
    out = _outdir(cfg, args)
    rows = []
    for k in kappas:
        if args.formula_only:
            h = hc3_formula(k, problem.minimum, convention=cfg.hc3["convention"])
            rows.append({"kappa": k, "h_formula": h, "h_root": float("nan"), "gap": float("nan")})
        else:
            r = hc3_root(k, problem, rtol=cfg.hc3["rtol"], convention=cfg.hc3["convention"])
            rows.append(r.to_dict())
    path = out / "hc3.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kappa", "h_formula", "h_root", "gap"])
        for r in rows:
            w.writerow([repr(float(r[k])) for k in ("kappa", "h_formula", "h_root", "gap")])
            print(f"kappa={r['kappa']:g}  h_formula={r['h_formula']:.8f}  "
                  f"h_root={r['h_root']:.8f}  gap={r['gap']:.3e}")
    jpath = _dump(out / "hc3.json", rows)
    write_manifest(out, "hc3", cfg, [path, jpath])
    return EXIT_OK


def cmd_plot(args):
    cols = read_csv(args.csv)
    B = cols["B"]
    series = [("lambda1/B", B, cols["lambda1"] / B, True)]
    for name in ("pred_rough", "pred_two_term"):
        if name in cols and np.any(np.isfinite(cols[name])):
            series.append((name.replace("pred_", "prediction: "), B, cols[name] / B, False))
    svg = svg_lines(series, "Ground state energy per unit field", "B", "lambda1 / B")
    out = Path(args.out) if args.out else Path(args.csv).parent
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.csv).stem
    svg_path = out / f"{stem}.svg"
    svg_path.write_text(svg)
    dat = write_gnuplot_data(out / f"{stem}.dat",
                             {k: v for k, v in cols.items() if k in ("B", "lambda1", "pred_rough",
                                                                      "pred_two_term", "resid")})
    write_manifest(out, "plot", None, [svg_path, dat], {"csv": str(args.csv)})
    print(svg_path)
    return EXIT_OK


def _solver_oracle() -> float:
    """Lanczos vs dense on a small constant-field disk strip."""
    from .field import FieldModel
    from .problem import SpectralProblem

    curve = BoundaryCurve.disk()
    pr = SpectralProblem(curve, FieldModel("1", curve), ns=32, nt=12, use_quasimode_start=False)
    op = pr.operator(20.0)
    ref = dense_pairs(op.K, op.M, 3)[0]
    got = lowest_pairs(op.K, op.M, 3, 1e-11, sigma=0.0).values
    return float(np.max(np.abs(got - ref) / np.abs(ref)))


def cmd_selftest(args):
    c = degennes_constants()
    rows = [(k, v, DEGENNES_TOLERANCES[k]) for k, v in degennes_identities(c).items()]
    ri = resolvent_identity(c)
    rows += [(k, v, RESOLVENT_TOL) for k, v in ri.items() if k != "one_minus_4I2"]
    rows += [(k, v, WEB_TOL) for k, v in reduction_web(c).items()]
    rows.append(("solver vs dense (rel)", _solver_oracle(), 1e-9))
    ok = True
    print(f"{'identity':<44s} {'residual':>12s} {'tol':>9s}  status")
    for name, val, tol in rows:
        good = abs(val) <= tol
        ok &= good
        print(f"{name:<44s} {val:+12.3e} {tol:9.1e}  {'PASS' if good else 'FAIL'}")
    if args.out:
        out = _outdir(None, args)
        p = _dump(out / "selftest.json", [{"name": n, "residual": v, "tol": t, "pass": abs(v) <= t}
                                          for n, v, t in rows])
        write_manifest(out, "selftest", None, [p])
    return EXIT_OK if ok else EXIT_SELFTEST


# -- parser ------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magneto-spectra", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--tol", type=float, help="eigensolver relative residual tolerance")
    common.add_argument("--nev", type=int, help="number of eigenvalues")
    common.add_argument("--seed", type=int, help="seed of the Krylov start vector")
    common.add_argument("--jobs", type=int,
                        help="parallel workers (default: $MAGNETO_SPECTRA_JOBS or logical cores)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("degennes", parents=[common], help="universal constants and identities"
                   ).set_defaults(func=cmd_degennes)
    sub.add_parser("predict", parents=[common], help="asymptotic predictions for a configuration"
                   ).set_defaults(func=cmd_predict)
    s = sub.add_parser("sweep", parents=[common], help="solve over a list of field strengths")
    s.add_argument("--export-triplets", action="store_true", help="write K, M as sparse triplets")
    s.set_defaults(func=cmd_sweep)
    f = sub.add_parser("fit", parents=[common], help="fit asymptotic coefficients to a sweep CSV")
    f.add_argument("--csv", required=True)
    f.add_argument("--model", help="prediction to compare against (default: best available)")
    f.add_argument("--exponents", type=float, nargs="+", help="basis exponents (default 1 1/2 1/3)")
    f.set_defaults(func=cmd_fit)
    q = sub.add_parser("quasimode", parents=[common], help="trial-state Rayleigh quotients")
    q.add_argument("--B", type=float, nargs="+")
    q.set_defaults(func=cmd_quasimode)
    sub.add_parser("agmon", parents=[common], help="localization moments and decay slopes"
                   ).set_defaults(func=cmd_agmon)
    h = sub.add_parser("hc3", parents=[common], help="third critical field")
    h.add_argument("--kappa", type=float, nargs="+")
    h.add_argument("--formula-only", action="store_true")
    h.set_defaults(func=cmd_hc3)
    pl = sub.add_parser("plot", parents=[common], help="SVG plot of a sweep CSV")
    pl.add_argument("--csv", required=True)
    pl.set_defaults(func=cmd_plot)
    sub.add_parser("selftest", parents=[common], help="identity suites and solver oracle"
                   ).set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
