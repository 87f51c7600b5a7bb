"""Command-line batch tool: validate / spectrum / resolvent-check /
controllability / simulate.

All artifacts are UTF-8 JSON (sorted keys, 17-significant-digit floats) and
CSV; identical config + seed give byte-identical reports.  Exit codes:
0 success, 1 error, 2 controllability verdict "defective".
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import sim as simmod
from .config import parse_config
from .control import (
    ControlSignal,
    aggregate_and_rank,
    choose_mu_samples,
    collect_samples,
)
from .errors import NeutralflowError
from .network import flow_exponents
from .operators import assemble_grid, frequency_toolkit, oracle_resolvent, resolvent_free
from .spectral import char_det, count_roots, neutral_det


def _fmt(v):
    return f"{v:.17g}"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(_fmt(float(obj)))
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return [_jsonify(obj.real), _jsonify(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    return obj


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonify(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _prepare(args):
    cfg = parse_config(args.config)
    if args.grid:
        cfg.grid_n = args.grid
    if args.seed is not None:
        cfg.seed = args.seed
    grid = assemble_grid(cfg.net.m, cfg.grid_n)
    exps = flow_exponents(cfg.net, cfg.coeffs, grid)
    os.makedirs(args.out, exist_ok=True)
    return cfg, grid, exps


def cmd_validate(args):
    cfg, grid, exps = _prepare(args)
    report = {
        "vertices": cfg.net.n,
        "edges": cfg.net.m,
        "grid_N": cfg.grid_n,
        "delay_horizon": cfg.bank.r,
        "boundary_channels": cfg.control.n_v,
        "distributed_channels": cfg.control.n_u,
        "travel_times": list(exps.tau_total),
        "growth_exponents": list(exps.xi_total),
        "valid": True,
    }
    write_json(os.path.join(args.out, "validate.json"), report)
    print(json.dumps(_jsonify(report), sort_keys=True))
    return 0


def cmd_spectrum(args):
    cfg, grid, exps = _prepare(args)
    box = (args.re_min, args.re_max, args.im_min, args.im_max)
    rows = []
    report = {"box": list(box), "families": {}}
    fams = [("boundary", lambda mu: char_det(cfg.net, exps, mu))]
    if not cfg.bank.eta.is_zero:
        fams.append(("neutral", lambda mu: neutral_det(cfg.bank, mu)))
    for name, fn in fams:
        rep = count_roots(fn, box, pts_per_edge=args.depth)
        report["families"][name] = rep.to_dict()
        for z in rep.roots:
            rows.append([z.real, z.imag, name, abs(fn(z))])
    rows.sort(key=lambda r: (r[2], float(r[0]), float(r[1])))
    write_csv(os.path.join(args.out, "spectrum.csv"), ["re", "im", "family", "residual"], rows)
    write_json(os.path.join(args.out, "spectrum.json"), report)
    print(f"found {len(rows)} roots in {box}")
    return 0


def cmd_resolvent_check(args):
    cfg, grid, exps = _prepare(args)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    trials = []
    for _ in range(args.trials):
        mu = complex(rng.uniform(1.0, 5.0), rng.uniform(-5.0, 5.0))
        coeff_sets = [rng.standard_normal(7) for _ in range(cfg.net.m)]
        f_funcs = [
            (lambda x, c=c: np.polynomial.polynomial.polyval(np.asarray(x), c))
            for c in coeff_sets
        ]
        R = resolvent_free(cfg.net, cfg.coeffs, exps, grid, mu)
        fvec = np.concatenate([fn(grid.nodes) for fn in f_funcs]).astype(complex)
        g = (R @ fvec).reshape(cfg.net.m, grid.N)
        ref = oracle_resolvent(cfg.net, cfg.coeffs, mu, f_funcs, x_eval=grid.nodes)
        err = float(np.max(np.abs(g - ref)) / max(np.max(np.abs(ref)), 1e-300))
        worst = max(worst, err)
        trials.append({"mu": [mu.real, mu.imag], "rel_error": err})
    report = {"grid_N": cfg.grid_n, "trials": trials, "max_rel_error": worst, "tol": args.tol, "pass": worst <= args.tol}
    write_json(os.path.join(args.out, "resolvent_check.json"), report)
    print(f"max relative error {worst:.3e} (tol {args.tol:.1e})")
    return 0 if worst <= args.tol else 1


def cmd_controllability(args):
    cfg, grid, exps = _prepare(args)
    if args.mu_count:
        cfg.mu_count = args.mu_count
    if args.svd_tol:
        cfg.svd_tol = args.svd_tol
    mus = choose_mu_samples(cfg.net, cfg.coeffs, exps, cfg.bank, cfg.mu_count, seed=cfg.seed, margin=cfg.mu_margin)
    samples = collect_samples(cfg.net, cfg.coeffs, exps, grid, cfg.bank, cfg.control, mus)
    report = aggregate_and_rank(grid, samples, tol=cfg.svd_tol)
    payload = report.to_dict()
    payload["mu_samples"] = [[mu.real, mu.imag] for mu in mus]
    payload["seed"] = cfg.seed
    write_json(os.path.join(args.out, "controllability.json"), payload)
    write_csv(
        os.path.join(args.out, "singular_values.csv"),
        ["index", "sigma"],
        [[i, float(s)] for i, s in enumerate(report.singular_values)],
    )
    print(f"rank {report.rank}/{report.dim}, defect {report.defect:.6g}: {report.verdict}")
    return 2 if report.verdict == "defective" else 0


def cmd_simulate(args):
    cfg, grid, exps = _prepare(args)
    dt = args.dt or cfg.sim_dt
    T = args.t_final if args.t_final is not None else cfg.sim_t_final
    stride = args.snapshot_stride or cfg.snapshot_stride or max(1, int(round(T / dt)) // 10)
    control = ControlSignal.zero(cfg.control)
    if args.control == "sin" and cfg.control.n_v:
        control = ControlSignal.boundary(cfg.control, lambda t: np.full(cfg.control.n_v, np.sin(t)))
    state = simmod.init_state(cfg.net, cfg.coeffs, exps, cfg.bank, cfg.control, dt, control=control)
    n_steps = int(round(T / dt))
    rows = []
    series = [[0.0, state.mass(), state.norm()]]

    def snapshot():
        t = state.time
        for j in range(cfg.net.m):
            z = state.z_now(j)
            for k, x in enumerate(state.grid.x_desc[j]):
                rows.append([t, j, float(x), float(z[k]), float(state.rho[j][k])])

    snapshot()
    for k in range(1, n_steps + 1):
        simmod.step(state, cfg.coeffs)
        series.append([state.time, state.mass(), state.norm()])
        if k % stride == 0:
            snapshot()
    write_csv(os.path.join(args.out, "trajectory.csv"), ["t", "edge", "x", "z", "rho"], rows)
    write_csv(os.path.join(args.out, "timeseries.csv"), ["t", "mass", "norm"], series)
    manifest = {
        "dt": dt,
        "t_final": T,
        "steps": n_steps,
        "snapshot_stride": stride,
        "seed": cfg.seed,
        "final_mass": series[-1][1],
        "final_norm": series[-1][2],
    }
    write_json(os.path.join(args.out, "simulate.json"), manifest)
    print(f"simulated {n_steps} steps to t={T}; final norm {series[-1][2]:.6g}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="neutralflow", description=__doc__)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory for artifacts")
    p.add_argument("--grid", type=int, default=0, help="override grid N")
    p.add_argument("--seed", type=int, default=None, help="override RNG seed")
    p.add_argument("--threads", type=int, default=0, help="advisory BLAS thread cap (recorded, best effort)")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate")

    sp = sub.add_parser("spectrum")
    sp.add_argument("--re-min", type=float, default=-1.0)
    sp.add_argument("--re-max", type=float, default=1.0)
    sp.add_argument("--im-min", type=float, default=-7.0)
    sp.add_argument("--im-max", type=float, default=7.0)
    sp.add_argument("--depth", type=int, default=512, help="contour samples per rectangle edge")

    rc = sub.add_parser("resolvent-check")
    rc.add_argument("--trials", type=int, default=10)
    rc.add_argument("--tol", type=float, default=1e-8)

    ct = sub.add_parser("controllability")
    ct.add_argument("--mu-count", type=int, default=0)
    ct.add_argument("--mu-strategy", default="line", choices=["line"])
    ct.add_argument("--svd-tol", type=float, default=0.0)

    sm = sub.add_parser("simulate")
    sm.add_argument("--t-final", type=float, default=None)
    sm.add_argument("--dt", type=float, default=0.0)
    sm.add_argument("--snapshot-stride", type=int, default=0)
    sm.add_argument("--control", default="zero", choices=["zero", "sin"])
    return p


_DISPATCH = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "resolvent-check": cmd_resolvent_check,
    "controllability": cmd_controllability,
    "simulate": cmd_simulate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        return _DISPATCH[args.command](args)
    except NeutralflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
