"""Command-line interface: ``rbopt <subcommand> [options]``.

Parameters resolve as flags > ``--params`` file > built-in defaults, and the
resolved set is embedded in every JSON output.

Exit codes: 0 success, 2 validation error, 3 infeasible optimization,
4 fit non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import kernels
from .ci import objective_h
from .fit import FitError, SurvivalData, fit_variance_model, irls_fit, read_variance_csv, wls_fit
from .mc import CampaignError, TruthModel, adjusted_std, mc_campaign, read_estimates_csv
from .model import DecayParams, RBConfig, TimeParams, ValidationError, VarianceParams, exec_time
from .optimizer import (FAMILIES, InfeasibleError, OptimizeSpec, best_heuristic,
                        heuristic_config, optimize, optimize_min_time, sweep_ci_surface)

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_FIT = 0, 2, 3, 4

DEFAULTS = {
    "q": 0.97, "beta": 0.0025, "p_hat": 0.97, "dim": 4,
    "c1_us": 0.6, "c0_us": 250.0, "cL_us": 0.0, "budget_s": 3.0,
    "alpha": 0.05, "M_min": 4, "M_max": 40, "variant": "free-n", "n_min": None,
    "k_fixed": 100, "m_max_bound": 1024, "multistart": False, "optimize_shots": False,
    # ground truth for ``simulate``; None means "same as the planning value"
    "p_true": None, "a_true": 0.75, "b_true": 0.25, "q_true": None, "beta_true": None,
}


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_params(args) -> dict:
    params = dict(DEFAULTS)
    if args.params:
        with open(args.params) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValidationError("params", "parameter file must hold a JSON object")
        loaded = loaded.get("params", loaded)
        for key, val in loaded.items():
            if key not in DEFAULTS:
                raise ValidationError(key, "unknown parameter")
            params[key] = val
    for item in args.set or []:
        if "=" not in item:
            raise ValidationError("set", f"expected KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        if key not in DEFAULTS:
            raise ValidationError(key, "unknown parameter")
        params[key] = _parse_value(val)
    for flag in ("variant", "budget_s", "alpha", "M_max"):
        val = getattr(args, flag, None)
        if val is not None:
            params[flag] = val
    return params


def _variance(p) -> VarianceParams:
    return VarianceParams(float(p["q"]), float(p["beta"]), float(p["p_hat"]), int(p["dim"]))


def _time(p) -> TimeParams:
    return TimeParams.from_microseconds(float(p["c1_us"]), float(p["c0_us"]),
                                        float(p["budget_s"]), float(p["cL_us"]))


def _spec(p) -> OptimizeSpec:
    try:
        return OptimizeSpec(_variance(p), _time(p), alpha=float(p["alpha"]),
                            M_max=int(p["M_max"]), variant=p["variant"], n_min=p["n_min"],
                            k_fixed=int(p["k_fixed"]), m_max_bound=int(p["m_max_bound"]),
                            multistart=bool(p["multistart"]),
                            optimize_shots=bool(p["optimize_shots"]), M_min=int(p["M_min"]))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("params", str(exc)) from exc


def _load_config(path) -> RBConfig:
    with open(path) as fh:
        d = json.load(fh)
    for key in ("best", "config"):
        if isinstance(d, dict) and key in d:
            d = d[key]
            break
    if not isinstance(d, dict):
        raise ValidationError("config", "configuration must be a JSON object with m, n, k")
    return RBConfig.from_dict(d)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(args, payload: dict, summary: str) -> None:
    payload = dict(payload, params=args.resolved)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(_dump(payload))
        print(summary)
    else:
        sys.stdout.write(_dump(payload))


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# subcommands

def cmd_predict(args) -> int:
    p = args.resolved
    cfg = _load_config(args.config)
    vp, tp = _variance(p), _time(p)
    res = objective_h(cfg, vp, float(p["alpha"]))
    t = exec_time(cfg, tp)
    out = dict(res.to_dict(), t_seconds=t, feasible_under_budget=t <= tp.T,
               config=cfg.to_dict())
    _emit(args, out, f"M={cfg.M} h={res.h_value:.6g} t={t:.6g} s "
                     f"({'within' if t <= tp.T else 'over'} budget {tp.T:g} s)")
    return EXIT_OK


def cmd_optimize(args) -> int:
    spec = _spec(args.resolved)
    rep = optimize(spec, threads=args.threads)
    _emit(args, rep.to_dict(),
          f"best M={rep.best_M} h={rep.h_best:.6g} t={rep.t_best:.6g} s "
          f"N={rep.best.total_sequences}")
    return EXIT_OK


def cmd_optimize_min_time(args) -> int:
    spec = _spec(args.resolved)
    rep = optimize_min_time(spec, args.epsilon, threads=args.threads)
    _emit(args, dict(rep.to_dict(), epsilon=args.epsilon),
          f"best M={rep.best_M} t={rep.t_best:.6g} s h={rep.h_best:.6g} "
          f"(epsilon {args.epsilon:g})")
    return EXIT_OK


def cmd_heuristic(args) -> int:
    spec = _spec(args.resolved)
    if args.M is not None:
        cfg = heuristic_config(args.family, args.M, spec)
        h = objective_h(cfg, spec.vp, spec.alpha).h_value
        M = args.M
    else:
        M, cfg, h = best_heuristic(args.family, spec)
    t = exec_time(cfg, spec.tp)
    _emit(args, {"family": args.family, "M": M, "h": h, "t_seconds": t,
                 "config": cfg.to_dict()},
          f"{args.family}: M={M} n={cfg.n[0]} h={h:.6g} t={t:.6g} s")
    return EXIT_OK


def _grid(text, cast):
    if ":" in text:
        lo, hi = (cast(x) for x in text.split(":"))
        return list(range(lo, hi + 1))
    return [cast(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    spec = _spec(args.resolved)
    p_grid = _grid(args.p_grid, float)
    M_grid = _grid(args.M_grid, int) if args.M_grid else list(range(spec.M_min, spec.M_max + 1))
    rows = sweep_ci_surface(args.family, spec, p_grid, M_grid, tie_q=not args.fixed_q)
    if args.out:
        _write_rows(args.out, ["p_hat", "M", "h"], rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["p_hat", "M", "h"])
        for r in rows:
            w.writerow([f"{r[0]:.17g}", r[1], f"{r[2]:.17g}"])
        return EXIT_OK
    for p in p_grid:
        sub = [r for r in rows if r[0] == p]
        best = min(sub, key=lambda r: r[2])
        print(f"p_hat={p:g}: argmin M={best[1]} h={best[2]:.6g}")
    return EXIT_OK


def cmd_fit(args) -> int:
    p = args.resolved
    data = SurvivalData.from_csv(args.data)
    vp = _variance(p)
    try:
        res = irls_fit(data, vp, float(p["alpha"])) if args.irls else \
            wls_fit(data, vp, float(p["alpha"]))
    except FitError as exc:
        raise CLIError(EXIT_FIT, str(exc)) from exc
    _emit(args, dict(res.to_dict(), method="irls" if args.irls else "wls"),
          f"p={res.p:.12g} a={res.params.a:.6g} b={res.params.b:.6g} "
          f"ci=+-{res.ci95:.6g}{'' if res.converged else ' (NOT CONVERGED)'}")
    return EXIT_OK if res.converged else EXIT_FIT


def cmd_varfit(args) -> int:
    p = args.resolved
    m, var, k = read_variance_csv(args.data)
    res = fit_variance_model(m, var, k, int(p["dim"]), float(p["p_hat"]))
    _emit(args, res.to_dict(), f"q={res.q:.10g} beta={res.beta:.6g}")
    return EXIT_OK if res.converged else EXIT_FIT


def _truth(p) -> TruthModel:
    vp = _variance(p)
    q = p["q_true"] if p["q_true"] is not None else vp.q
    beta = p["beta_true"] if p["beta_true"] is not None else vp.beta
    p_true = p["p_true"] if p["p_true"] is not None else vp.p_hat
    return TruthModel(DecayParams(float(p_true), float(p["a_true"]), float(p["b_true"])),
                      VarianceParams(float(q), float(beta), vp.p_hat, vp.D))


def cmd_simulate(args) -> int:
    p = args.resolved
    cfg = _load_config(args.config)
    try:
        s = mc_campaign(cfg, _truth(p), args.runs, float(p["alpha"]), args.seed,
                        fit_vp=_variance(p), threads=args.threads)
    except CampaignError as exc:
        raise CLIError(EXIT_FIT, str(exc)) from exc
    if args.runs_csv:
        s.write_runs_csv(args.runs_csv)
    _emit(args, dict(s.to_dict(), seed=args.seed, config=cfg.to_dict()),
          f"runs={s.runs} failures={s.failures} std={s.empirical_std:.6g} "
          f"coverage={s.coverage:.4f} mean_ci={s.mean_ci:.6g}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    jobs, configs, P = read_estimates_csv(args.matrix)
    res = adjusted_std(P, configs)
    if args.out:
        res.write_csv(args.out)
        for c, a, r in zip(res.configs, res.adjusted_std, res.raw_std):
            print(f"{c}: adjusted_std={a:.6g} raw_std={r:.6g}")
    else:
        res.write_csv(sys.stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON parameter file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one parameter (repeatable)")
    common.add_argument("--out", help="output path (JSON or CSV); stdout if omitted")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--variant", choices=("free-n", "identical-n"))
    common.add_argument("--budget-s", dest="budget_s", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--M-max", dest="M_max", type=int)

    ap = argparse.ArgumentParser(prog="rbopt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("predict", parents=[common], help="predict CI factor and time")
    s.add_argument("config", help="config JSON (m, n, k) or an optimize report")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("optimize", parents=[common], help="minimize h under the time budget")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("optimize-min-time", parents=[common],
                       help="minimize time subject to h <= epsilon")
    s.add_argument("--epsilon", type=float, required=True)
    s.set_defaults(func=cmd_optimize_min_time)

    s = sub.add_parser("heuristic", parents=[common], help="heuristic configuration")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("--M", type=int, help="fixed M (default: best over M)")
    s.set_defaults(func=cmd_heuristic)

    s = sub.add_parser("sweep", parents=[common], help="h over a (p_hat, M) grid")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("--p-grid", default="0.95,0.97,0.99,0.999",
                   help="comma list of p_hat values")
    s.add_argument("--M-grid", help="comma list or LO:HI (default M_min:M_max)")
    s.add_argument("--fixed-q", action="store_true",
                   help="keep q from params instead of tying it to p_hat")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", parents=[common], help="fit a p^m + b to survival data")
    s.add_argument("data", help="CSV with header m,y,n,k")
    s.add_argument("--irls", action="store_true", help="refresh weights from the fit")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("varfit", parents=[common], help="fit (q, beta) to sample variances")
    s.add_argument("data", help="CSV with header m,var,k")
    s.set_defaults(func=cmd_varfit)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo campaign")
    s.add_argument("config", help="config JSON (m, n, k) or an optimize report")
    s.add_argument("--runs", type=int, default=1000)
    s.add_argument("--runs-csv", help="per-run CSV output path")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", parents=[common], help="adjusted std of repeated estimates")
    s.add_argument("matrix", help="CSV with header job,config,p_hat")
    s.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.resolved = resolve_params(args)
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
