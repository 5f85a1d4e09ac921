"""Configuration-driven command line: single solves, sweeps, diagnostics,
transport runs, and table rendering.

Usage: gcell solve|sweep|diagnose|transport|analyze|validate
           [--config cfg.json] [key=value ...]

The config is a nested JSON document; positional overrides use dotted paths
(e.g. problem.A=64 numerics.tol=1e-6) with values parsed as JSON when
possible.  Exit codes: 0 success, 1 partial sweep failure, 2 bad config.
"""

import argparse
import concurrent.futures
import copy
import json
import math
import os
import sys
import time

import numpy as np

from . import analysis, records
from .cellular import (CellProblemSpec, auto_grid_n, cfl_dt, diagnostics,
                       solve_steady_iteration, solve_time_marching)
from .errors import ConfigError, GcellError
from .flows import FlowField, cellular_flow, shear_profile
from .grid import grid_2d, save_field_csv, ScalarField2D
from .shear import ShearSpec, default_grid_n, solve_shear
from .transport import band_masses, lp_gradient_norm, offcore_decay, solve_T

DEFAULT_CONFIG = {
    "problem": {
        "kind": "cellular",          # cellular | shear
        "model": "viscous",          # cellular: viscous|inviscid; shear: model name
        "P": [1.0, 0.0],
        "m": 1.0,
        "n": 0.0,
        "A": 32.0,
        "d": 1.0,
        "s_l": 1.0,
        "flow": {"normalization": "scaled"},
        "profile": "cosine",
        "profile_params": {},
    },
    "numerics": {
        "grid_n": None,
        "tol": 1e-6,
        "max_T": 40.0,
        "max_steps": 2000000,
        "max_iters": 400,
        "method": "auto",            # auto | marching | steady
        "time_stepping": "auto",
        "d_min_steady": 0.1,
        "grid_floor": 128,
        "grid_cap": 1024,
    },
    "sweep": {
        "A_list": None,
        "d_list": None,
        "P_list": None,
        "workers": None,
    },
    "output": {
        "csv": None,
        "dump_fields": False,
        "dump_dir": ".",
    },
    "budget": {
        "max_grid_n": 512,
        "max_steps": 5.0e6,
        "max_memory_mb": 4096.0,
    },
    "diagnose": {"eps_list": [0.05, 0.1, 0.2, 1.0], "bin_width": 1.0 / 64.0},
    "transport": {"p_list": [1.0, 2.0], "N_list": [], "bands": []},
    "analyze": {"input": None, "law": None, "layout": None, "fit": False,
                "columns": None, "output": None},
}


def _deep_update(base, extra):
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v
    return base


def _apply_override(cfg, expr):
    if "=" not in expr:
        raise ConfigError(f"override '{expr}' is not key=value")
    path, raw = expr.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    keys = path.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def load_config(path, overrides):
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        try:
            with open(path) as fh:
                _deep_update(cfg, json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for expr in overrides or []:
        _apply_override(cfg, expr)
    _check_config(cfg)
    cfg["_hash"] = records.config_hash(
        {k: v for k, v in cfg.items() if not k.startswith("_")})
    return cfg


def _check_config(cfg):
    tol = cfg["numerics"]["tol"]
    if not 0.0 < tol <= 1e-2:
        raise ConfigError(f"numerics.tol must lie in (0, 1e-2], got {tol:g}")
    if cfg["problem"]["kind"] not in ("cellular", "shear"):
        raise ConfigError(f"unknown problem.kind '{cfg['problem']['kind']}'")
    for key in ("A_list", "d_list", "P_list"):
        lst = cfg["sweep"][key]
        if lst is not None and len(lst) == 0:
            raise ConfigError(f"sweep.{key} is empty")


def _make_profile(prob):
    return shear_profile(prob["profile"], **prob.get("profile_params", {}))


def _cellular_flow_from(prob, A):
    norm = prob.get("flow", {}).get("normalization", "scaled")
    return cellular_flow(A, normalization=norm)


def _cell_grid_n(cfg, A, d):
    num = cfg["numerics"]
    if num["grid_n"]:
        return int(num["grid_n"])
    return auto_grid_n(A, d, floor=num["grid_floor"], cap=num["grid_cap"])


def _pick_method(cfg, d):
    method = cfg["numerics"]["method"]
    if method == "auto":
        return "marching" if d < cfg["numerics"]["d_min_steady"] else "steady"
    return method


def run_cell(cfg, cell):
    """Solve one sweep cell; returns a CSV row dict.  Never raises."""
    prob = cfg["problem"]
    num = cfg["numerics"]
    row = {"config_hash": cfg["_hash"], "error": "", "steps": 0,
           "residual": float("nan"), "value": float("nan"), "grid_n": 0,
           "wall_time_s": float("nan")}
    t0 = time.perf_counter()
    try:
        if prob["kind"] == "shear":
            m, n = float(cell.get("P_m", prob["m"])), float(cell.get("P_n", prob["n"]))
            A, d = float(cell["A"]), float(cell["d"])
            spec = ShearSpec(m=m, n=n, A=A, d=d, model=prob["model"],
                             profile=_make_profile(prob),
                             grid_n=num["grid_n"] or default_grid_n(d))
            res = solve_shear(spec, tol=num["tol"], max_steps=int(num["max_steps"]))
            row.update(model=prob["model"], P_m=m, P_n=n, A=A, d=d,
                       grid_n=res.grid_n, value=res.lam, residual=res.residual,
                       steps=res.steps)
        else:
            P = (float(cell.get("P_m", prob["P"][0])),
                 float(cell.get("P_n", prob["P"][1])))
            A, d = float(cell["A"]), float(cell["d"])
            gn = _cell_grid_n(cfg, A, d)
            model = "inviscid" if d == 0.0 else prob.get("model", "viscous")
            spec = CellProblemSpec(P=P, A=A, d=d, s_l=prob["s_l"], model=model,
                                   flow=_cellular_flow_from(prob, A))
            if d == 0.0 or _pick_method(cfg, d) == "marching":
                res, _ = solve_time_marching(
                    spec, grid_2d(gn), tol=num["tol"], max_T=num["max_T"],
                    time_stepping=num["time_stepping"])
            else:
                res, _ = solve_steady_iteration(
                    spec, grid_2d(gn), tol=num["tol"],
                    max_iters=int(num["max_iters"]),
                    d_min_steady=num["d_min_steady"])
            row.update(model=model, P_m=P[0], P_n=P[1], A=A, d=d,
                       grid_n=res.grid_n, value=res.hbar, residual=res.residual,
                       steps=res.steps)
        row["wall_time_s"] = time.perf_counter() - t0
    except (GcellError, ValueError) as exc:
        row.update(model=prob.get("model", ""), P_m=cell.get("P_m", float("nan")),
                   P_n=cell.get("P_n", float("nan")),
                   A=cell.get("A", float("nan")), d=cell.get("d", float("nan")),
                   error=type(exc).__name__,
                   wall_time_s=time.perf_counter() - t0)
    return row


def _sweep_cells(cfg):
    sw = cfg["sweep"]
    prob = cfg["problem"]
    A_list = sw["A_list"] if sw["A_list"] is not None else [prob["A"]]
    d_list = sw["d_list"] if sw["d_list"] is not None else [prob["d"]]
    if prob["kind"] == "shear":
        P_list = sw["P_list"] if sw["P_list"] is not None else [[prob["m"], prob["n"]]]
    else:
        P_list = sw["P_list"] if sw["P_list"] is not None else [list(prob["P"])]
    cells = []
    for P in P_list:
        for d in d_list:
            for A in A_list:
                cells.append({"P_m": P[0], "P_n": P[1], "A": A, "d": d})
    return cells


def _run_sweep(cfg):
    cells = _sweep_cells(cfg)
    workers = cfg["sweep"]["workers"] or min(len(cells), os.cpu_count() or 1)
    if workers > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, [cfg] * len(cells), cells))
    else:
        rows = [run_cell(cfg, cell) for cell in cells]
    return rows


def _emit_rows(cfg, rows):
    path = cfg["output"]["csv"]
    if path:
        records.write_records(path, rows)
        print(f"wrote {len(rows)} rows to {path}")
    recs = [analysis.SweepRecord(
        model=r.get("model", ""), P_m=r.get("P_m", 0.0), P_n=r.get("P_n", 0.0),
        A=r.get("A", 0.0), d=r.get("d", 0.0), value=r.get("value", float("nan")),
        grid_n=r.get("grid_n", 0), residual=r.get("residual", float("nan")),
        steps=r.get("steps", 0), error=r.get("error", "")) for r in rows]
    shown = [r for r in recs if not r.error]
    if shown:
        print(analysis.render_table(
            shown, "custom",
            columns=["model", "A", "d", "grid_n", "value", "residual"]))
    for r in rows:
        if r.get("error"):
            print(f"cell A={r.get('A')} d={r.get('d')}: FAILED "
                  f"({r['error']})")


def cmd_solve(cfg):
    rows = [run_cell(cfg, _sweep_cells(cfg)[0])]
    _emit_rows(cfg, rows)
    return 1 if rows[0]["error"] else 0


def cmd_sweep(cfg):
    rows = _run_sweep(cfg)
    _emit_rows(cfg, rows)
    failed = sum(1 for r in rows if r["error"])
    if failed:
        print(f"partial failure: {failed}/{len(rows)} cells failed")
        return 1
    return 0


def cmd_diagnose(cfg):
    prob, num = cfg["problem"], cfg["numerics"]
    if prob["kind"] != "cellular":
        raise ConfigError("diagnose runs on cellular problems")
    A, d = float(prob["A"]), float(prob["d"])
    gn = _cell_grid_n(cfg, A, d)
    grid = grid_2d(gn)
    spec = CellProblemSpec(P=tuple(prob["P"]), A=A, d=d, s_l=prob["s_l"],
                           model="inviscid" if d == 0.0 else "viscous",
                           flow=_cellular_flow_from(prob, A))
    if d == 0.0 or _pick_method(cfg, d) == "marching":
        res, w = solve_time_marching(spec, grid, tol=num["tol"],
                                     max_T=num["max_T"],
                                     time_stepping=num["time_stepping"])
    else:
        res, w = solve_steady_iteration(spec, grid, tol=num["tol"],
                                        max_iters=int(num["max_iters"]),
                                        d_min_steady=num["d_min_steady"])
    rep = diagnostics(spec, w, res.hbar, grid,
                      eps_list=tuple(cfg["diagnose"]["eps_list"]),
                      bin_width=cfg["diagnose"]["bin_width"])
    print(f"hbar = {res.hbar:.6g}  (grid {gn}^2, residual {res.residual:.2e}, "
          f"{res.steps} steps)")
    print(f"l1_grad_total   = {rep.l1_grad_total:.6f}")
    for eps, mass in sorted(rep.layer_mass.items()):
        print(f"layer_mass({eps:g}) = {mass:.6f}")
    print(f"weighted_h1     = {rep.weighted_h1:.6e}")
    print(f"streamline_osc  = {rep.streamline_osc:.6e}")
    if rep.beta_over_lambda is not None:
        print(f"beta/lambda     = {rep.beta_over_lambda:.6f}")
    for prof in rep.cell_profiles:
        print(f"cell C{prof['cell']}: {len(prof['v_bin_means'])} bins, "
              f"{prof['violations']} monotonicity violations "
              f"({rep.monotone_direction})")
    if cfg["output"]["dump_fields"]:
        out = cfg["output"]["dump_dir"]
        os.makedirs(out, exist_ok=True)
        save_field_csv(w, os.path.join(out, "w.csv"))
        x1, x2 = grid.coords()
        vA = (spec.P[0] * x1 + spec.P[1] * x2 + w.values) / res.hbar
        save_field_csv(ScalarField2D(grid, vA), os.path.join(out, "v_A.csv"))
        print(f"dumped w.csv and v_A.csv under {out}")
    return 0


def cmd_transport(cfg):
    prob, num, tr = cfg["problem"], cfg["numerics"], cfg["transport"]
    A, d = float(prob["A"]), float(prob["d"])
    gn = _cell_grid_n(cfg, A, d)
    if prob["kind"] == "shear":
        flow = FlowField("shear", A, profile=_make_profile(prob))
    else:
        flow = _cellular_flow_from(prob, A)
    res = solve_T(flow, d, grid_2d(gn), tol=num["tol"])
    print(f"transport solve: A={A:g} d={d:g} grid {gn}^2, residual "
          f"{res.residual:.2e}, upwind diffusivity {res.numerical_diffusivity:.2e}")
    lines = [("A", "d", "p", "lp_norm")]
    for p in tr["p_list"]:
        lines.append((A, d, p, lp_gradient_norm(res, float(p))))
    for row in lines[1:]:
        print(f"  p={row[2]:g}: |DT|_p = {row[3]:.6f}")
    if tr["bands"]:
        for (lo, hi), mass in band_masses(res, [tuple(b) for b in tr["bands"]]).items():
            print(f"  band |H| in [{lo:g},{hi:g}]: int |DT| = {mass:.6f}")
    if tr["N_list"]:
        for N, mass in offcore_decay(res, tr["N_list"]):
            print(f"  offcore N={N:g}: int |DT|^2 = {mass:.6e}")
    path = cfg["output"]["csv"]
    if path:
        with open(path, "w") as fh:
            fh.write("A,d,p,lp_norm\n")
            for row in lines[1:]:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        print(f"wrote {path}")
    if cfg["output"]["dump_fields"]:
        out = cfg["output"]["dump_dir"]
        os.makedirs(out, exist_ok=True)
        save_field_csv(res.S, os.path.join(out, "T_periodic_part.csv"))
        print(f"dumped T_periodic_part.csv under {out}")
    return 0


def cmd_analyze(cfg):
    an = cfg["analyze"]
    if not an["input"]:
        raise ConfigError("analyze.input CSV path is required")
    recs = records.read_records(an["input"])
    ok = [r for r in recs if not r.error]
    if an["law"]:
        _, scaled, name = analysis.scale_column(ok, an["law"])
        print(f"{name}:")
        for r, s in zip(ok, scaled):
            print(f"  A={r.A:g} d={r.d:g} value={r.value:.6g} -> {s:.6g}")
    if an["fit"]:
        by_d = {}
        for r in ok:
            by_d.setdefault(r.d, []).append(r)
        for d in sorted(by_d, reverse=True):
            c, rms = analysis.fit_scaling(by_d[d])
            print(f"fit d={d:g}: c = {c:.6g} (rel rms {rms:.2e})")
    text = None
    if an["layout"]:
        text = analysis.render_table(ok, an["layout"], columns=an["columns"])
        print(text)
    if an["output"] and text is not None:
        with open(an["output"], "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {an['output']}")
    return 0


def estimate_cell(cfg, cell):
    """Dry-run feasibility numbers for one sweep cell."""
    prob, num, budget = cfg["problem"], cfg["numerics"], cfg["budget"]
    A, d = float(cell["A"]), float(cell["d"])
    if prob["kind"] == "shear":
        gn = num["grid_n"] or default_grid_n(d)
        est_steps = 40.0 / (0.45 / gn)
        mem_mb = gn * 8 * 8 / 1e6
        method = "relaxation"
    else:
        gn = _cell_grid_n(cfg, A, d)
        method = "marching" if (d == 0.0 or _pick_method(cfg, d) == "marching") \
            else "steady"
        if method == "marching":
            norm = prob.get("flow", {}).get("normalization", "scaled")
            vmax = A if norm == "scaled" else 2.0 * math.pi * A
            h = 1.0 / gn
            dt = cfl_dt(vmax, d, h, prob["s_l"],
                        implicit_diffusion=num["time_stepping"] != "explicit")
            est_steps = num["max_T"] / dt
            mem_mb = 12 * 8 * gn * gn / 1e6
        else:
            est_steps = num["max_iters"]
            mem_mb = 220 * 8 * gn * gn / 1e6  # sparse LU fill estimate
    flags = []
    if gn > budget["max_grid_n"]:
        flags.append(f"grid {gn} > budget {budget['max_grid_n']}")
    if est_steps > budget["max_steps"]:
        flags.append(f"steps {est_steps:.2e} > budget {budget['max_steps']:.2e}")
    if mem_mb > budget["max_memory_mb"]:
        flags.append(f"memory {mem_mb:.0f} MB > budget "
                     f"{budget['max_memory_mb']:.0f} MB")
    return {"A": A, "d": d, "grid_n": gn, "method": method,
            "est_steps": est_steps, "est_memory_mb": mem_mb, "flags": flags}


def cmd_validate(cfg):
    reports = [estimate_cell(cfg, cell) for cell in _sweep_cells(cfg)]
    flagged = 0
    for rep in reports:
        status = "ok" if not rep["flags"] else "FLAG: " + "; ".join(rep["flags"])
        print(f"A={rep['A']:g} d={rep['d']:g} -> {rep['method']} n={rep['grid_n']}"
              f" steps~{rep['est_steps']:.1e} mem~{rep['est_memory_mb']:.0f}MB"
              f"  [{status}]")
        flagged += bool(rep["flags"])
    print(f"{len(reports) - flagged}/{len(reports)} cells within budget")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "diagnose": cmd_diagnose,
    "transport": cmd_transport,
    "analyze": cmd_analyze,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gcell",
        description="Cell-problem front speed solvers for cellular and shear flows")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config path")
    parser.add_argument("overrides", nargs="*", metavar="key=value",
                        help="dotted-path config overrides")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
