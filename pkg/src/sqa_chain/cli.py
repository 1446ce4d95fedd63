"""Command line front end.

Subcommands: gen-instance, exact-eq, exact-qa, pimc-eq, sqa, fit-teff,
fit-powerlaw, fit-loglaw, figure.  Exit codes: 0 success, 2 validation
error, 3 runtime/accuracy error (including partially failed sweeps).

A config file (INI: a [global] section plus one section per subcommand) can
supply any flag; explicit command line flags win over the config, which wins
over built-in defaults.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, figures
from .analysis import fit_log_law, fit_power_law, fit_teff
from .annealing import Schedule, sqa_run
from .errors import SimulationError, SweepError, ValidationError
from .fermion import (
    coherent_qa_evolve,
    default_dt,
    equilibrium_curve_factory,
    equilibrium_eps_c,
)
from .instances import generate_instance, load_instance, save_instance
from .pimc import PimcParams, equilibrium_run
from .rng import derive_seed
from .sweep import RunManifest, run_parallel, write_csv

MOVE_ALIASES = {
    "time": "time_cluster",
    "sw": "spacetime_sw",
    "wolff": "spacetime_wolff",
    "time_cluster": "time_cluster",
    "spacetime_sw": "spacetime_sw",
    "spacetime_wolff": "spacetime_wolff",
}

DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "out_dir": ".",
    "desk_scale": False,
    "max_mcs": 200_000_000,
    "temp": 0.01,
    "gamma0": 2.5,
    "moves": "time",
    "reps": 32,
    "trotter": 32,
    "mcs": 100_000,
    "gamma_grid": "0:2.5:0.025",
    "window": None,
    "stride": None,
    "dt": None,
    "distribution": "uniform01",
    "length": 256,
    "gamma": 1.0,
    "gamma_steps": None,
}


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValidationError(f"bad grid spec {spec!r}; expected a:b:step") from exc
    if step <= 0 or hi < lo:
        raise ValidationError(f"bad grid spec {spec!r}")
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _parse_window(spec: str | None):
    if spec is None or spec == "" or spec == "auto":
        return None
    try:
        lo, hi = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValidationError(f"bad window {spec!r}; expected lo:hi") from exc
    return (lo, hi)


def _read_csv_columns(path: str | Path) -> dict[str, list]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty CSV")
    header = lines[0].split(",")
    cols: dict[str, list] = {h: [] for h in header}
    for raw in lines[1:]:
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != len(header):
            raise ValidationError(f"{path}: ragged CSV row {raw!r}")
        for h, c in zip(header, cells):
            try:
                cols[h].append(float(c))
            except ValueError:
                cols[h].append(c)
    return cols


def _pick_eps_column(cols: dict) -> str:
    for name in ("eps", "eps_res", "eps_avg_mean", "eps_c", "eps_c_est"):
        if name in cols:
            return name
    raise ValidationError(
        f"no residual-energy column found among {sorted(cols)}"
    )


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--desk-scale", action="store_const", const=True,
                        default=None, help="reduced-cost presets")
    common.add_argument("--max-mcs", type=int, default=None,
                        help="refuse sweeps costing more MCS than this")
    common.add_argument("--config", default=None, help="INI config file")

    parser = argparse.ArgumentParser(
        prog="sqa-chain",
        description="Simulated quantum annealing on random Ising chains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-instance", parents=[common],
                       help="generate and store a random chain instance")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--distribution", default=None,
                   help="uniform01 or ordered(J)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("exact-eq", parents=[common],
                       help="exact equilibrium eps_c over a gamma grid")
    p.add_argument("--instance", required=True)
    p.add_argument("--gamma-grid", default=None, help="a:b:step")
    p.add_argument("--temp", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("exact-qa", parents=[common],
                       help="coherent annealing via the exact solver")
    p.add_argument("--instance", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--gamma0", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("pimc-eq", parents=[common],
                       help="equilibrium PIMC estimate of eps_c")
    p.add_argument("--instance", required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--temp", type=float, default=None)
    p.add_argument("--trotter", type=int, default=None, metavar="P")
    p.add_argument("--moves", default=None, choices=sorted(MOVE_ALIASES))
    p.add_argument("--mcs", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sqa", parents=[common],
                       help="simulated quantum annealing over MC time")
    p.add_argument("--instance", required=True)
    p.add_argument("--tau", type=int, required=True, help="annealing time in MCS")
    p.add_argument("--gamma0", type=float, default=None)
    p.add_argument("--trotter", type=int, default=None, metavar="P")
    p.add_argument("--temp", type=float, default=None)
    p.add_argument("--moves", default=None, choices=sorted(MOVE_ALIASES))
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--gamma-steps", type=int, default=None,
                   help="hold gamma for N MCS (staircase schedule)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("fit-teff", parents=[common],
                       help="fit the effective temperature of a trajectory")
    p.add_argument("--trajectory", required=True, help="sqa or exact-qa CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--temp", type=float, default=None,
                   help="simulation temperature (lower bracket)")
    p.add_argument("--window", default=None, help="gamma window lo:hi")
    p.add_argument("--gamma-grid", default=None, help="a:b:step for eq curves")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")

    for name, help_text in (
        ("fit-powerlaw", "fit eps ~ tau^a on a log-log window"),
        ("fit-loglaw", "fit eps = [log(gamma tau)]^(-xi)"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--data", required=True, help="CSV with tau + eps columns")
        p.add_argument("--window", default=None, help="tau window lo:hi")
        p.add_argument("--out", default=None)

    p = sub.add_parser("figure", parents=[common],
                       help="run the parameter sweep behind a figure")
    p.add_argument("--figure", choices=figures.FIGURE_IDS, default=None)
    p.add_argument("--manifest", default=None,
                   help="re-run a previously written manifest")
    return parser


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    cfg_values: dict[str, str] = {}
    if args.config:
        ini = configparser.ConfigParser()
        read = ini.read(args.config)
        if not read:
            raise ValidationError(f"config file {args.config!r} not found")
        for section in ("global", args.command):
            if ini.has_section(section):
                cfg_values.update(ini.items(section))
    for key, value in vars(args).items():
        if value is not None:
            continue
        ini_key = key.replace("_", "-")
        if ini_key in cfg_values or key in cfg_values:
            raw = cfg_values.get(ini_key, cfg_values.get(key))
            setattr(args, key, _coerce(key, raw))
        elif key in DEFAULTS:
            setattr(args, key, DEFAULTS[key])
    return args


_STRING_KEYS = {"out", "out_dir", "instance", "trajectory", "data", "config",
                "distribution", "moves", "gamma_grid", "window", "figure",
                "manifest"}


def _coerce(key: str, raw: str):
    """Best-effort typing for config-file values; strings stay strings."""
    if key == "desk_scale":
        return raw.lower() in ("1", "true", "yes", "on")
    if key in _STRING_KEYS:
        return raw
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _manifest_for(out_path: Path, command: str, params: dict, seed: int,
                  instance_checksum: str | None = None) -> None:
    manifest = RunManifest(
        subcommand=command,
        params=params,
        master_seed=seed,
        instance_checksum=instance_checksum,
        outputs=[out_path.name],
    )
    manifest.write(out_path.with_name(out_path.name + ".manifest.json"))


def _out_path(args, default_name: str) -> Path:
    out = getattr(args, "out", None)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def _cmd_gen_instance(args) -> int:
    inst = generate_instance(args.length, args.distribution, args.seed)
    path = _out_path(args, "instance.txt")
    save_instance(inst, path)
    _manifest_for(path, "gen-instance",
                  dict(length=args.length, distribution=args.distribution),
                  args.seed, inst.checksum())
    print(path)
    return 0


def _cmd_exact_eq(args) -> int:
    inst = load_instance(args.instance)
    grid = _parse_grid(args.gamma_grid)
    rows = [[float(g), args.temp, equilibrium_eps_c(inst, float(g), args.temp)]
            for g in grid]
    path = _out_path(args, "exact_eq.csv")
    write_csv(path, figures.EXACT_EQ_HEADER, rows)
    _manifest_for(path, "exact-eq",
                  dict(gamma_grid=args.gamma_grid, temp=args.temp),
                  args.seed, inst.checksum())
    print(path)
    return 0


def _cmd_exact_qa(args) -> int:
    inst = load_instance(args.instance)
    schedule = Schedule(args.gamma0, args.tau)
    records = coherent_qa_evolve(inst, schedule, dt=args.dt, stride=args.stride)
    rows = [[r.t, r.gamma, r.eps_avg] for r in records]
    path = _out_path(args, "exact_qa.csv")
    write_csv(path, figures.EXACT_QA_HEADER, rows)
    _manifest_for(path, "exact-qa",
                  dict(tau=args.tau, gamma0=args.gamma0,
                       dt=args.dt if args.dt else default_dt(args.tau),
                       stride=args.stride),
                  args.seed, inst.checksum())
    print(path)
    return 0


def _pimc_rep(inst, temperature, gamma, trotter_p, move_family, t_run, seed):
    params = PimcParams(temperature, gamma, trotter_p, move_family, t_run=t_run)
    return equilibrium_run(inst, params, seed)


def _cmd_pimc_eq(args) -> int:
    inst = load_instance(args.instance)
    moves = MOVE_ALIASES[args.moves]
    if args.mcs * args.reps > args.max_mcs:
        raise ValidationError(
            f"estimated cost {args.mcs * args.reps} MCS exceeds --max-mcs "
            f"{args.max_mcs}"
        )
    points = [
        ((rep,), _pimc_rep,
         dict(inst=inst, temperature=args.temp, gamma=args.gamma,
              trotter_p=args.trotter, move_family=moves, t_run=args.mcs,
              seed=derive_seed(args.seed, rep)))
        for rep in range(args.reps)
    ]
    path = _out_path(args, "pimc_eq.csv")
    partial_exc = None
    try:
        results = run_parallel(points, workers=args.workers)
    except SweepError as exc:
        results = exc.completed
        partial_exc = exc
    rows = [
        [args.trotter, args.gamma, args.temp, moves, res.eps_c, res.stderr,
         res.t_burn, res.geweke_z, args.mcs]
        for _, res in results
    ]
    write_csv(path, figures.PIMC_EQ_HEADER, rows)
    _manifest_for(path, "pimc-eq",
                  dict(gamma=args.gamma, temp=args.temp, trotter=args.trotter,
                       moves=moves, mcs=args.mcs, reps=args.reps),
                  args.seed, inst.checksum())
    print(path)
    if partial_exc is not None:
        raise partial_exc
    return 0


def _cmd_sqa(args) -> int:
    inst = load_instance(args.instance)
    moves = MOVE_ALIASES[args.moves]
    cost = (args.tau + max(1000, args.tau // 10)) * args.reps
    if cost > args.max_mcs:
        raise ValidationError(
            f"estimated cost {cost} MCS exceeds --max-mcs {args.max_mcs}"
        )
    schedule = Schedule(args.gamma0, float(args.tau))
    result = sqa_run(
        inst, args.temp, args.trotter, schedule, moves, args.seed,
        n_reps=args.reps, stride=args.stride, gamma_steps=args.gamma_steps,
        workers=args.workers,
    )
    rows = [
        [int(result.ts[j]), float(result.gammas[j]),
         float(result.eps_avg_mean[j]), float(result.eps_avg_sem[j]),
         float(result.eps_min_mean[j]), float(result.eps_min_sem[j]),
         result.n_reps]
        for j in range(len(result.ts))
    ]
    path = _out_path(args, "sqa.csv")
    write_csv(path, figures.SQA_HEADER, rows)
    _manifest_for(path, "sqa",
                  dict(tau=args.tau, gamma0=args.gamma0, trotter=args.trotter,
                       temp=args.temp, moves=moves, reps=args.reps,
                       stride=args.stride, gamma_steps=args.gamma_steps),
                  args.seed, inst.checksum())
    print(path)
    return 0


def _emit_fit(args, fit, default_name: str) -> int:
    payload = json.dumps(fit.to_dict(), indent=2, sort_keys=True)
    if args.out:
        path = _out_path(args, default_name)
        path.write_text(payload + "\n", encoding="utf-8")
        print(path)
    else:
        print(payload)
    return 0


def _cmd_fit_teff(args) -> int:
    inst = load_instance(args.instance)
    cols = _read_csv_columns(args.trajectory)
    if "gamma" not in cols:
        raise ValidationError("trajectory CSV needs a gamma column")
    eps_col = _pick_eps_column(cols)
    gammas = cols["gamma"]
    eps = cols[eps_col]

    class _Point:
        __slots__ = ("gamma", "eps_avg")

        def __init__(self, g, e):
            self.gamma = g
            self.eps_avg = e

    trajectory = [_Point(g, e) for g, e in zip(gammas, eps)]
    window = _parse_window(args.window) or (0.0, 1.5)
    grid = _parse_grid(args.gamma_grid)
    factory = equilibrium_curve_factory(inst, grid)
    fit = fit_teff(trajectory, factory, gamma_window=window,
                   bracket=(args.temp, 10.0))
    return _emit_fit(args, fit, "fit_teff.json")


def _fit_points(args):
    cols = _read_csv_columns(args.data)
    if "tau" not in cols:
        raise ValidationError("data CSV needs a tau column")
    eps_col = _pick_eps_column(cols)
    return list(zip(cols["tau"], cols[eps_col]))


def _cmd_fit_powerlaw(args) -> int:
    fit = fit_power_law(_fit_points(args), window=_parse_window(args.window))
    return _emit_fit(args, fit, "fit_powerlaw.json")


def _cmd_fit_loglaw(args) -> int:
    points = _fit_points(args)
    window = _parse_window(args.window)
    if window is not None:
        points = [(t, e) for t, e in points if window[0] <= t <= window[1]]
    fit = fit_log_law(points)
    return _emit_fit(args, fit, "fit_loglaw.json")


def _cmd_figure(args) -> int:
    if args.manifest:
        manifest = RunManifest.read(args.manifest)
        figures.rerun_from_manifest(
            manifest, args.out_dir, workers=args.workers, max_mcs=args.max_mcs
        )
        print(Path(args.out_dir))
        return 0
    if not args.figure:
        raise ValidationError("either --figure or --manifest is required")
    figures.run_figure_pipeline(
        args.figure, args.out_dir, seed=args.seed,
        desk_scale=bool(args.desk_scale), workers=args.workers,
        max_mcs=args.max_mcs,
    )
    print(Path(args.out_dir))
    return 0


_COMMANDS = {
    "gen-instance": _cmd_gen_instance,
    "exact-eq": _cmd_exact_eq,
    "exact-qa": _cmd_exact_qa,
    "pimc-eq": _cmd_pimc_eq,
    "sqa": _cmd_sqa,
    "fit-teff": _cmd_fit_teff,
    "fit-powerlaw": _cmd_fit_powerlaw,
    "fit-loglaw": _cmd_fit_loglaw,
    "figure": _cmd_figure,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
