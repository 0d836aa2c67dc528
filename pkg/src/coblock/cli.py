"""Command-line driver.

Commands:
    fit        fit a single (g, d) model and write labels/params/trace
    select     grid-search (g, d) by the BIC-style criterion
    simulate   draw a synthetic dataset from a params JSON file
    influence  fit, then rank columns by influence score
    benchmark  time fits over a grid of n and d, write timing.csv

Every command takes --seed and writes deterministic files: rerunning
with identical inputs and seed reproduces the bytes exactly (benchmark's
timing.csv is the one exception, since it records wall-clock time).
Errors exit with status 1 and a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bem import BemConfig, fit
from .dataio import (
    load_dataset,
    read_params_json,
    write_bic_grid_csv,
    write_free_energy_csv,
    write_influence_csv,
    write_json,
    write_labels_csv,
    write_params_json,
    write_timing_csv,
    write_x_csv,
    write_y_csv,
)
from .errors import CoblockError, ParseError
from .influence import influence_report
from .selection import select
from .simulate import SimConfig, generate, separated_params


def _parse_range(text: str):
    """Inclusive integer range "A:B" -> [A, ..., B]."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ParseError(f"range {text!r} is not of the form A:B")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ParseError(f"range {text!r} has non-integer endpoints") from exc
    if lo < 1 or hi < lo:
        raise ParseError(f"range {text!r} must satisfy 1 <= A <= B")
    return list(range(lo, hi + 1))


def _parse_int_list(text: str):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParseError(f"list {text!r} must be comma-separated integers") from exc
    if not values:
        raise ParseError(f"list {text!r} is empty")
    return values


def _add_bem_flags(sub) -> None:
    sub.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub.add_argument("--restarts", type=int, default=10, help="independent restarts")
    sub.add_argument("--max-iters", type=int, default=200, help="outer iteration cap")
    sub.add_argument("--tol", type=float, default=1e-8, help="relative free-energy tolerance")
    sub.add_argument(
        "--cov-weight",
        choices=("m", "1"),
        default="m",
        help="covariate density weight: once per cell (m) or once per row (1)",
    )


def _bem_config(args) -> BemConfig:
    return BemConfig(
        max_outer_iters=args.max_iters,
        free_energy_rel_tol=args.tol,
        n_restarts=args.restarts,
        seed=args.seed,
        cov_weight=args.cov_weight,
    )


def _config_echo(cfg: BemConfig) -> dict:
    return {
        "max_outer_iters": cfg.max_outer_iters,
        "free_energy_rel_tol": cfg.free_energy_rel_tol,
        "nr_max_iters": cfg.nr_max_iters,
        "nr_grad_tol": cfg.nr_grad_tol,
        "n_restarts": cfg.n_restarts,
        "init_strategy": cfg.init_strategy,
        "ridge": cfg.ridge,
        "min_cluster_mass": cfg.min_cluster_mass,
        "seed": cfg.seed,
        "predictor_bound": cfg.predictor_bound,
        "cov_weight": cfg.cov_weight,
        "split_merge_rounds": cfg.split_merge_rounds,
    }


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_fit(args) -> int:
    x, y = load_dataset(args.x, args.y)
    cfg = _bem_config(args)
    result = fit(x, y, args.g, args.d, cfg)
    out = _outdir(args)
    write_labels_csv(out / "labels.csv", result.map_labels)
    write_params_json(out / "params.json", result.params)
    write_free_energy_csv(out / "free_energy.csv", result.free_energy_trace)
    write_json(
        out / "manifest.json",
        {
            "command": "fit",
            "version": __version__,
            "x": str(args.x),
            "y": str(args.y),
            "g": args.g,
            "d": args.d,
            "config": _config_echo(cfg),
            "converged": result.converged,
            "n_iters": result.n_iters,
            "free_energy": result.final_free_energy,
        },
    )
    print(
        f"fit g={args.g} d={args.d}: converged={result.converged} "
        f"iters={result.n_iters} free_energy={result.final_free_energy:.6f}"
    )
    return 0


def _cmd_select(args) -> int:
    x, y = load_dataset(args.x, args.y)
    cfg = _bem_config(args)
    grid = select(x, y, _parse_range(args.g_range), _parse_range(args.d_range), cfg)
    out = _outdir(args)
    write_bic_grid_csv(out / "bic_grid.csv", grid)
    best_g, best_d = grid.best
    write_json(
        out / "manifest.json",
        {
            "command": "select",
            "version": __version__,
            "x": str(args.x),
            "y": str(args.y),
            "g_range": args.g_range,
            "d_range": args.d_range,
            "config": _config_echo(cfg),
            "best_g": best_g,
            "best_d": best_d,
            "best_bic": grid.best_cell().bic,
            "failures": {f"{g},{d}": msg for (g, d), msg in sorted(grid.failures.items())},
        },
    )
    print(f"best: g={best_g} d={best_d} bic={grid.best_cell().bic:.6f}")
    return 0


def _cmd_simulate(args) -> int:
    params = read_params_json(args.params)
    sim = generate(SimConfig(n=args.n, m=args.m, params=params, seed=args.seed))
    out = _outdir(args)
    write_x_csv(out / "x.csv", sim.x)
    write_y_csv(out / "y.csv", sim.y)
    write_labels_csv(out / "truth_labels.csv", sim.truth)
    write_json(
        out / "manifest.json",
        {
            "command": "simulate",
            "version": __version__,
            "params": str(args.params),
            "n": args.n,
            "m": args.m,
            "seed": args.seed,
        },
    )
    print(f"simulated n={args.n} m={args.m} from {args.params}")
    return 0


def _cmd_influence(args) -> int:
    x, y = load_dataset(args.x, args.y)
    cfg = _bem_config(args)
    result = fit(x, y, args.g, args.d, cfg)
    report = influence_report(x, y, result)
    out = _outdir(args)
    write_influence_csv(out / "influence.csv", report, result.map_labels)
    write_labels_csv(out / "labels.csv", result.map_labels)
    write_params_json(out / "params.json", result.params)
    write_json(
        out / "manifest.json",
        {
            "command": "influence",
            "version": __version__,
            "x": str(args.x),
            "y": str(args.y),
            "g": args.g,
            "d": args.d,
            "config": _config_echo(cfg),
            "top_column": int(report.ranking[0]),
        },
    )
    print(f"influence: top column {int(report.ranking[0])} of {x.m}")
    return 0


def _cmd_benchmark(args) -> int:
    n_values = _parse_int_list(args.n_list)
    d_values = _parse_int_list(args.d_list)
    # timing probe of the alternating loop itself; refinement refits would
    # add a data-dependent number of extra fits and muddy the n-scaling
    cfg = replace(_bem_config(args), split_merge_rounds=0)
    rows = []
    draw = 0
    for d in d_values:
        truth = separated_params(args.g, d, p=1, seed=args.seed)
        for n in n_values:
            for rep in range(args.reps):
                draw += 1
                sim = generate(SimConfig(n=n, m=args.m, params=truth, seed=args.seed + draw))
                t0 = time.perf_counter()
                fit(sim.x, sim.y, args.g, d, cfg)
                seconds = time.perf_counter() - t0
                rows.append((n, d, rep + 1, seconds))
                print(f"benchmark n={n} d={d} rep={rep + 1}: {seconds:.3f}s")
    out = _outdir(args)
    write_timing_csv(out / "timing.csv", rows)
    write_json(
        out / "manifest.json",
        {
            "command": "benchmark",
            "version": __version__,
            "n_list": args.n_list,
            "m": args.m,
            "g": args.g,
            "d_list": args.d_list,
            "reps": args.reps,
            "config": _config_echo(cfg),
        },
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coblock",
        description="Co-clustering of binary matrices with row covariates via block EM.",
    )
    parser.add_argument("--version", action="version", version=f"coblock {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p_fit = commands.add_parser("fit", help="fit one (g, d) model")
    p_fit.add_argument("--x", required=True, help="binary matrix CSV")
    p_fit.add_argument("--y", required=True, help="covariate CSV")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.add_argument("--g", type=int, required=True, help="row clusters")
    p_fit.add_argument("--d", type=int, required=True, help="column clusters")
    _add_bem_flags(p_fit)
    p_fit.set_defaults(handler=_cmd_fit)

    p_sel = commands.add_parser("select", help="grid search over (g, d)")
    p_sel.add_argument("--x", required=True)
    p_sel.add_argument("--y", required=True)
    p_sel.add_argument("--out", required=True)
    p_sel.add_argument("--g-range", required=True, help="inclusive range A:B")
    p_sel.add_argument("--d-range", required=True, help="inclusive range A:B")
    _add_bem_flags(p_sel)
    p_sel.set_defaults(handler=_cmd_select)

    p_sim = commands.add_parser("simulate", help="draw a synthetic dataset")
    p_sim.add_argument("--params", required=True, help="ModelParams JSON file")
    p_sim.add_argument("--n", type=int, required=True, help="rows to draw")
    p_sim.add_argument("--m", type=int, required=True, help="columns to draw")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(handler=_cmd_simulate)

    p_inf = commands.add_parser("influence", help="fit and rank columns by influence")
    p_inf.add_argument("--x", required=True)
    p_inf.add_argument("--y", required=True)
    p_inf.add_argument("--out", required=True)
    p_inf.add_argument("--g", type=int, required=True)
    p_inf.add_argument("--d", type=int, required=True)
    _add_bem_flags(p_inf)
    p_inf.set_defaults(handler=_cmd_influence)

    p_bench = commands.add_parser("benchmark", help="time fits over n and d grids")
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--n-list", required=True, help="comma-separated row counts")
    p_bench.add_argument("--m", type=int, default=100, help="columns (default 100)")
    p_bench.add_argument("--g", type=int, default=2, help="row clusters (default 2)")
    p_bench.add_argument("--d-list", default="2", help="comma-separated column-cluster counts")
    p_bench.add_argument("--reps", type=int, default=1, help="repetitions per grid point")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--restarts", type=int, default=1)
    p_bench.add_argument("--max-iters", type=int, default=10)
    p_bench.add_argument("--tol", type=float, default=1e-16)
    p_bench.add_argument("--cov-weight", choices=("m", "1"), default="m")
    p_bench.set_defaults(handler=_cmd_benchmark)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CoblockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
