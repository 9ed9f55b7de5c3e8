"""Unified command-line front end.

Subcommands mirror the library modules: ``model-profile``, ``iso1d``,
``mms gen``, ``l1ot solve``, ``needles run`` and the ``verify`` harnesses.
Every run writes delimited output (CSV with 12-significant-digit formatting
or schema-versioned JSON), persists its effective configuration next to the
outputs, and renders matplotlib figures for the report unless ``--no-plot``.

Exit codes: 0 success, 1 verification regression, 2 usage error,
3 domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import density1d, iso1d, l1ot, mms, model_profiles, needles as needles_mod, verify
from .errors import DomainError, ResourceBudgetError, SolverError
from .parallel import default_threads

SCHEMA_VERSION = 1
OUTPUT_ENV = "CDISO_OUTPUT_DIR"


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _outdir(args) -> Path:
    out = os.environ.get(OUTPUT_ENV) or args.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _persist_config(args, outdir: Path, command: str) -> None:
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func",) and isinstance(v, (int, float, str, bool, type(None), list))}
    _write_json(outdir / f"{command}_config.json", {"command": command, "config": cfg})


def _load_config_defaults(argv: list[str]) -> dict:
    """Flat key=value config file; values act as defaults for absent flags."""
    if "--config" not in argv:
        return {}
    path = argv[argv.index("--config") + 1]
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(args, cfg: dict) -> None:
    for k, v in cfg.items():
        if getattr(args, k, None) is None:
            cur = None
            setattr(args, k, v)


def _parse_float(x, name: str) -> float:
    try:
        if isinstance(x, str) and x.lower() in ("inf", "infinity"):
            return math.inf
        return float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number, got {x!r}")


def _load_density(spec: str, m: int = 2001) -> density1d.Density1D:
    if Path(spec).exists():
        return density1d.Density1D.from_file(spec)
    if "?" in spec:
        name, raw = spec.split("?", 1)
        params = {}
        for kv in raw.split(","):
            k, v = kv.split("=")
            params[k.strip()] = float(v)
        return density1d.named_density(name, m=m, **params)
    return density1d.named_density(spec, m=m)


def _load_space(path: str) -> mms.FiniteMMS:
    return mms.load_space(path)


def _load_f(path: str, X: mms.FiniteMMS) -> l1ot.SignedFunction:
    vals = np.atleast_1d(np.asarray(np.genfromtxt(path, skip_header=1), float))
    return l1ot.SignedFunction.from_values(vals, X)


# ----------------------------------------------------------------------
# subcommand handlers
# ----------------------------------------------------------------------


def _cmd_model_profile(args) -> int:
    outdir = _outdir(args)
    K = _parse_float(args.K, "K")
    N = _parse_float(args.N, "N")
    D = _parse_float(args.D, "D")
    n = int(args.v_grid)
    vs = np.linspace(0.0, 1.0, n)
    recs = model_profiles.profile_curve_detailed(K, N, D, vs, mode=args.mode,
                                                 threads=int(args.threads))
    rows = [[v, r.value, r.case, json.dumps(r.argmin, sort_keys=True)] for v, r in recs]
    _write_csv(outdir / "model_profile.csv", ["v", "value", "case", "argmin_params"], rows)
    _persist_config(args, outdir, "model-profile")
    if not args.no_plot:
        from .plotting import plot_profile_curve
        plot_profile_curve([v for v, _ in recs], [r.value for _, r in recs],
                           outdir / "model_profile.png",
                           label=f"K={K} N={N} D={D}")
    print(f"wrote {outdir / 'model_profile.csv'}")
    return 0


def _cmd_iso1d(args) -> int:
    outdir = _outdir(args)
    d = _load_density(args.density)
    n = int(args.v_grid)
    rows = []
    for v in np.linspace(0.0, 1.0, n):
        res = iso1d.profile_structured(d, float(v))
        comps = res.minimizer.components
        if len(comps) == 0:
            l, r = d.a, d.a
        elif len(comps) == 1:
            l, r = comps[0]
        else:  # complement family: report the interior gap
            l, r = comps[0][1], comps[1][0]
        rows.append([v, res.value, res.method, l, r])
    _write_csv(outdir / "iso1d.csv", ["v", "value", "method", "l", "r"], rows)
    _persist_config(args, outdir, "iso1d")
    if not args.no_plot:
        from .plotting import plot_profile_curve, plot_density
        plot_profile_curve([r[0] for r in rows], [r[1] for r in rows],
                           outdir / "iso1d.png", label=f"profile of {args.density}")
        plot_density(d, outdir / "iso1d_density.png", title=args.density)
    print(f"wrote {outdir / 'iso1d.csv'}")
    return 0


def _cmd_mms_gen(args) -> int:
    outdir = _outdir(args)
    kind = args.kind
    if kind == "interval":
        d = _load_density(args.density or "uniform")
        X = mms.gen_interval(d, int(args.n))
    elif kind == "sphere":
        X = mms.gen_sphere(int(args.dim), int(args.n), int(args.seed))
    elif kind == "suspension":
        base = mms.gen_sphere(int(args.dim), int(args.n), int(args.seed))
        X = mms.gen_suspension(base, _parse_float(args.N, "N"), int(args.n_t))
    else:
        raise DomainError(f"unknown space kind {kind!r}")
    out = outdir / (args.out or f"space_{kind}.npz")
    mms.save_space(X, out)
    _persist_config(args, outdir, "mms-gen")
    _write_json(outdir / "mms_gen.json",
                {"kind": kind, "n": X.n, "diameter": X.diameter, "file": str(out)})
    print(f"wrote {out} (n={X.n}, diameter={X.diameter:.6g})")
    return 0


def _cmd_l1ot_solve(args) -> int:
    outdir = _outdir(args)
    X = _load_space(args.space)
    f = _load_f(args.f, X)
    pot = l1ot.solve_potential(X, f)
    pot_file = outdir / "potential.csv"
    _write_csv(pot_file, ["phi"], [[p] for p in pot.phi])
    _write_json(outdir / "l1ot.json", {
        "cost": pot.cost,
        "objective": pot.objective,
        "duality_gap": pot.duality_gap,
        "lipschitz_defect": pot.lipschitz_defect,
        "potential_file": str(pot_file),
    })
    _persist_config(args, outdir, "l1ot-solve")
    print(f"cost={pot.cost:.10g} duality_gap={pot.duality_gap:.3e}")
    return 0


def _cmd_needles_run(args) -> int:
    outdir = _outdir(args)
    X = _load_space(args.space)
    f = _load_f(args.f, X)
    pot = l1ot.solve_potential(X, f)
    tol_sat = _parse_float(args.tol_sat, "tol-sat") if args.tol_sat is not None else None
    S = needles_mod.build_structure(X, pot, tol_sat=tol_sat)
    nds, leftover = needles_mod.extract_needles(S, X)
    rows = []
    for k, nd in enumerate(nds):
        for ci, t in zip(nd.chain, nd.params):
            rows.append([k, int(ci), t, float(nd.density.eval(nd.params[0] + t - nd.params[0]))])
    _write_csv(outdir / "needles.csv", ["needle", "point", "t", "h"], rows)
    payload = {
        "n_needles": len(nds),
        "transport_mass": float(X.weights[S.transport].sum()),
        "leftover_mass": float(X.weights[leftover].sum()),
        "tol_sat": S.tol_sat,
    }
    if args.K is not None and args.N is not None:
        rep = needles_mod.check_needles(nds, X, f, _parse_float(args.K, "K"),
                                        _parse_float(args.N, "N"), float(args.tol))
        payload.update({
            "worst_zero_mean": rep.worst_zero_mean,
            "z_mass_f": rep.z_mass_f,
            "cd_pass_mass_fraction": rep.mass_fraction(mean_tol=math.inf),
        })
    _write_json(outdir / "needles.json", payload)
    _persist_config(args, outdir, "needles-run")
    if not args.no_plot:
        from .plotting import plot_needles
        plot_needles(nds, outdir / "needles.png")
    print(f"extracted {len(nds)} needles; wrote {outdir / 'needles.csv'}")
    return 0


def _cmd_verify_compare(args) -> int:
    outdir = _outdir(args)
    X = _load_space(args.space)
    K = _parse_float(args.K, "K")
    N = _parse_float(args.N, "N")
    vs = [float(x) for x in args.v.split(",")]
    eps = [float(x) for x in args.eps.split(",")] if args.eps else None
    if eps is None:
        res = mms.covering_radius(X)
        eps = [2 * res, 4 * res, 8 * res]
    report = verify.compare_profile(X, K, N, vs, eps, seed=int(args.seed),
                                    threads=int(args.threads))
    rows = [[r.v, r.model, r.best_estimate, r.best_candidate_kind, r.best_eps,
             int(r.violated)] for r in report.records]
    _write_csv(outdir / "compare.csv",
               ["v", "model", "best_estimate", "candidate", "eps", "violated"], rows)
    _write_json(outdir / "compare.json", {
        "diameter": report.diameter, "resolution": report.resolution,
        "eps_ladder": list(report.eps_ladder), "slack": report.slack_value,
        "passed": report.passed,
        "records": [{"v": r.v, "model": r.model, "best": r.best_estimate,
                     "candidate": r.best_candidate_kind, "eps": r.best_eps,
                     "violated": r.violated} for r in report.records],
    })
    _persist_config(args, outdir, "verify-compare")
    if not args.no_plot:
        from .plotting import plot_compare_report
        plot_compare_report(report, outdir / "compare.png")
    print(f"compare passed={report.passed}")
    return 0 if report.passed else 1


def _cmd_verify_needle_bound(args) -> int:
    outdir = _outdir(args)
    X = _load_space(args.space)
    K = _parse_float(args.K, "K")
    N = _parse_float(args.N, "N")
    if args.set_file:
        idx = np.atleast_1d(np.asarray(np.genfromtxt(args.set_file, skip_header=1), int))
        mask = np.zeros(X.n, dtype=bool)
        mask[idx] = True
    else:
        center, v = args.ball.split(",")
        mask = verify.ball_of_measure(X, int(center), float(v))
    report = verify.needle_lower_bound(X, mask, K, N)
    _write_json(outdir / "needle_bound.json", {
        "v": report.v,
        "measured_content": report.measured_content,
        "needle_content_integral": report.needle_content_integral,
        "needle_model_bound": report.needle_model_bound,
        "z_mass_f": report.z_mass_f,
        "n_needles": len(report.records),
    })
    rows = [[r.needle_index, r.quotient_weight, r.length, r.trace_measure,
             r.trace_content, r.model_bound] for r in report.records]
    _write_csv(outdir / "needle_bound.csv",
               ["needle", "quotient_weight", "length", "trace_measure",
                "trace_content", "model_bound"], rows)
    _persist_config(args, outdir, "verify-needle-bound")
    ok = report.needle_model_bound <= report.measured_content + 10 * verify.slack(
        mms.covering_radius(X), mms.covering_radius(X))
    print(f"needle bound={report.needle_model_bound:.6g} measured={report.measured_content:.6g}")
    return 0 if ok else 1


def _cmd_verify_rigidity(args) -> int:
    outdir = _outdir(args)
    X = _load_space(args.space)
    report = verify.rigidity_cap_check(X, float(args.v))
    _write_json(outdir / "rigidity.json", {
        "v": report.v, "r_v": report.r_v, "cap_measure": report.cap_measure,
        "cap_content": report.cap_content, "model_value": report.model_value,
        "competitors": report.competitors, "min_margin": report.min_margin,
    })
    _persist_config(args, outdir, "verify-rigidity")
    print(f"cap={report.cap_content:.6g} model={report.model_value:.6g} "
          f"min competitor margin={report.min_margin:.6g}")
    return 0 if report.min_margin > 0 else 1


def _cmd_verify_diam_gap(args) -> int:
    outdir = _outdir(args)
    N = _parse_float(args.N, "N")
    delta = _parse_float(args.delta, "delta")
    D = _parse_float(args.D, "D")
    v = _parse_float(args.v, "v")
    gap = verify.diameter_gap(N - 1.0 - delta, N + delta, D, v)
    _write_json(outdir / "diam_gap.json",
                {"N": N, "delta": delta, "D": D, "v": v, "eta_hat": gap,
                 "positive": gap > 0})
    _persist_config(args, outdir, "verify-diam-gap")
    print(f"eta_hat={gap:.10g}")
    return 0 if gap > 0 else 1


def _cmd_verify_delta_cont(args) -> int:
    outdir = _outdir(args)
    N = _parse_float(args.N, "N")
    v = _parse_float(args.v, "v")
    n = int(args.delta_grid)
    dmax = _parse_float(args.delta_max, "delta-max") if args.delta_max is not None \
        else (N - 1.0) / 2.0
    grid = np.linspace(0.0, dmax, n)
    report = verify.profile_continuity_in_delta(N, v, grid)
    _write_csv(outdir / "delta_cont.csv", ["delta", "value"],
               [[d, x] for d, x in zip(report.deltas, report.values)])
    _write_json(outdir / "delta_cont.json", {
        "N": N, "v": v, "max_jump": report.max_jump,
        "fitted_slope": report.fitted_slope,
        "endpoint_value": report.endpoint_value,
    })
    _persist_config(args, outdir, "verify-delta-cont")
    if not args.no_plot:
        from .plotting import plot_delta_curve
        plot_delta_curve(report, outdir / "delta_cont.png")
    print(f"max jump={report.max_jump:.6g}")
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", default="cdiso_out",
                   help=f"output directory (env {OUTPUT_ENV} overrides)")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--seed", default=0, help="RNG seed")
    p.add_argument("--threads", default=default_threads(), help="worker pool size")
    p.add_argument("--format", default="csv", choices=["csv", "json"],
                   help="primary output format (both are always written where applicable)")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdiso", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model-profile", help="model comparison profile curve")
    p.add_argument("--K", required=True)
    p.add_argument("--N", required=True)
    p.add_argument("--D", required=True)
    p.add_argument("--v-grid", default=11)
    p.add_argument("--mode", default="dispatch", choices=["dispatch", "infimum"])
    _add_common(p)
    p.set_defaults(func=_cmd_model_profile)

    p = sub.add_parser("iso1d", help="1-D isoperimetric profile of a density")
    p.add_argument("--density", required=True,
                   help="CSV file or named density (name?k=v,... for parameters)")
    p.add_argument("--v-grid", default=21)
    _add_common(p)
    p.set_defaults(func=_cmd_iso1d)

    p = sub.add_parser("mms", help="finite metric measure spaces")
    msub = p.add_subparsers(dest="mms_command", required=True)
    g = msub.add_parser("gen", help="generate a space")
    g.add_argument("--kind", required=True, choices=["interval", "sphere", "suspension"])
    g.add_argument("--n", default=100, help="points (interval/sphere/suspension base)")
    g.add_argument("--dim", default=2, help="sphere dimension (1, 2 or 3)")
    g.add_argument("--n-t", default=64, help="suspension: latitude grid size")
    g.add_argument("--N", default=2.0, help="suspension: warp exponent bound")
    g.add_argument("--density", default=None, help="interval: density file or name")
    g.add_argument("--out", default=None, help="output file (.npz or .csv)")
    _add_common(g)
    g.set_defaults(func=_cmd_mms_gen)

    p = sub.add_parser("l1ot", help="L1 optimal transport")
    lsub = p.add_subparsers(dest="l1ot_command", required=True)
    s = lsub.add_parser("solve", help="solve for the Kantorovich potential of f")
    s.add_argument("--space", required=True)
    s.add_argument("--f", required=True, help="CSV with one f value per point")
    _add_common(s)
    s.set_defaults(func=_cmd_l1ot_solve)

    p = sub.add_parser("needles", help="needle decomposition")
    nsub = p.add_subparsers(dest="needles_command", required=True)
    r = nsub.add_parser("run", help="decompose a space along the potential of f")
    r.add_argument("--space", required=True)
    r.add_argument("--f", required=True)
    r.add_argument("--K", default=None)
    r.add_argument("--N", default=None)
    r.add_argument("--tol", default=0.05)
    r.add_argument("--tol-sat", default=None)
    _add_common(r)
    r.set_defaults(func=_cmd_needles_run)

    p = sub.add_parser("verify", help="comparison and rigidity harnesses")
    vsub = p.add_subparsers(dest="verify_command", required=True)

    c = vsub.add_parser("compare", help="profile comparison on a space")
    c.add_argument("--space", required=True)
    c.add_argument("--K", required=True)
    c.add_argument("--N", required=True)
    c.add_argument("--v", default="0.2,0.35,0.5", help="comma-separated volumes")
    c.add_argument("--eps", default=None, help="comma-separated epsilon ladder")
    _add_common(c)
    c.set_defaults(func=_cmd_verify_compare)

    nb = vsub.add_parser("needle-bound", help="localization lower-bound replay")
    nb.add_argument("--space", required=True)
    nb.add_argument("--K", required=True)
    nb.add_argument("--N", required=True)
    nb.add_argument("--ball", default=None, help="center,volume for a metric-ball set")
    nb.add_argument("--set-file", default=None, help="CSV of point indices")
    _add_common(nb)
    nb.set_defaults(func=_cmd_verify_needle_bound)

    rg = vsub.add_parser("rigidity", help="cap optimality on a suspension")
    rg.add_argument("--space", required=True)
    rg.add_argument("--v", default=0.5)
    _add_common(rg)
    rg.set_defaults(func=_cmd_verify_rigidity)

    dg = vsub.add_parser("diam-gap", help="profile gap between diameter D and infinity")
    dg.add_argument("--N", required=True)
    dg.add_argument("--delta", default=0.0)
    dg.add_argument("--D", required=True)
    dg.add_argument("--v", required=True)
    _add_common(dg)
    dg.set_defaults(func=_cmd_verify_diam_gap)

    dc = vsub.add_parser("delta-cont", help="profile continuity in the dimension shift")
    dc.add_argument("--N", required=True)
    dc.add_argument("--v", required=True)
    dc.add_argument("--delta-grid", default=11)
    dc.add_argument("--delta-max", default=None)
    _add_common(dc)
    dc.set_defaults(func=_cmd_verify_delta_cont)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, _load_config_defaults(argv))
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except (ResourceBudgetError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
