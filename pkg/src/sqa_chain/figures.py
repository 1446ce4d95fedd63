"""Figure-data pipelines: parameter sweeps matching the five study figures.

Each pipeline emits one CSV per curve plus a manifest; rendering is left to
the separate plotting tool, which consumes only these files.  All pipelines
come in a ``desk`` variant (minutes on a laptop, phenomenology preserved) and
a ``paper`` variant (the full sampling budgets; the Gamma = 0.1 equilibrium
sweep takes hours and is the known hard case).

CSV schemas are versioned via the manifest's ``schema_version``; the header
strings below are stable and covered by golden tests.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .analysis import fit_power_law, fit_teff
from .annealing import Schedule, mean_trajectory, sqa_run
from .errors import ValidationError
from .fermion import (
    coherent_qa_evolve,
    equilibrium_curve_factory,
    equilibrium_eps_c,
)
from .instances import Instance, generate_instance, save_instance
from .pimc import PimcParams, equilibrium_run
from .rng import derive_seed
from .sweep import RunManifest, run_parallel, write_csv

EXACT_EQ_HEADER = ["gamma", "T", "eps_c"]
EXACT_QA_HEADER = ["t", "gamma", "eps_res"]
PIMC_EQ_HEADER = [
    "P", "gamma", "temp", "moves", "eps_c_est", "stderr", "t_burn",
    "geweke_z", "n_mcs",
]
SQA_HEADER = [
    "t_mcs", "gamma", "eps_avg_mean", "eps_avg_sem", "eps_min_mean",
    "eps_min_sem", "n_reps",
]
FINAL_HEADER = [
    "tau", "eps_avg_mean", "eps_avg_sem", "eps_min_mean", "eps_min_sem",
    "n_reps",
]
QA_FINAL_HEADER = ["tau", "eps_res"]
TEFF_FIT_HEADER = [
    "dynamics", "tau", "t_eff", "t_eff_stderr", "residual_rms",
    "window_lo", "window_hi",
]
EXPONENT_FIT_HEADER = [
    "dynamics", "exponent", "stderr", "window_lo", "window_hi",
    "residual_rms", "n_points",
]

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

#: Shared single disorder realization used by figures 1 and 3-5.
DISORDERED_SPEC = dict(distribution="uniform01", seed=7)
ORDERED_SPEC = dict(distribution="ordered(1)", seed=0)


def figure_config(figure_id: str, desk_scale: bool) -> dict:
    """Resolved parameter set for a figure pipeline at the requested scale."""
    if figure_id == "fig1":
        if desk_scale:
            return dict(
                figure_id=figure_id,
                instance=dict(length=64, **DISORDERED_SPEC),
                temperature=0.1,
                gammas=[1.0],
                p_values=[8, 16, 32, 64, 128, 256],
                t_run={"time_cluster": 200_000, "spacetime_sw": 100_000},
            )
        return dict(
            figure_id=figure_id,
            instance=dict(length=256, **DISORDERED_SPEC),
            temperature=0.01,
            gammas=[1.0, 0.1],
            p_values=[8, 16, 32, 64, 128, 256, 512, 1024],
            t_run={"time_cluster": 10_000_000, "spacetime_sw": 200_000},
        )
    if figure_id == "fig2":
        base = dict(
            figure_id=figure_id,
            instance=dict(length=256, **ORDERED_SPEC),
            temperature=0.01,
            move_family="time_cluster",
            gamma0=2.5,
        )
        if desk_scale:
            return dict(
                base, trotter_p=128, taus=[32, 100, 316, 1000, 3162], n_reps=16,
                fit_window=[32.0, 3200.0],
            )
        return dict(
            base, trotter_p=256,
            taus=[10, 32, 100, 316, 1000, 3162, 10000, 31623, 100000],
            n_reps=64, fit_window=[100.0, 10000.0],
        )
    if figure_id == "fig3":
        base = dict(
            figure_id=figure_id,
            instance=dict(length=256, **DISORDERED_SPEC),
            temperature=0.01,
            gamma0=2.5,
        )
        if desk_scale:
            return dict(
                base,
                time_p_values=[8, 32, 128, 512],
                sw_p_values=[256],
                taus=[10, 32, 100, 316, 1000, 3162],
                n_reps=8,
            )
        return dict(
            base,
            time_p_values=[16, 64, 256, 1024],
            sw_p_values=[256, 1024],
            taus=[10, 32, 100, 316, 1000, 3162, 10000, 31623],
            n_reps=32,
        )
    if figure_id == "fig4":
        base = dict(
            figure_id=figure_id,
            instance=dict(length=256, **DISORDERED_SPEC),
            temperature=0.01,
            gamma0=2.5,
            gamma_grid=[0.0, 2.5, 0.025],
            fit_window=[0.0, 1.5],
        )
        if desk_scale:
            return dict(
                base, trotter_p=1024, sqa_taus=[3000, 10000, 30000],
                qa_taus=[100, 300, 1000], n_reps=16, qa_dt=0.005,
            )
        return dict(
            base, trotter_p=1024, sqa_taus=[3000, 30000, 300000],
            qa_taus=[100, 1000, 10000], n_reps=32, qa_dt=0.005,
        )
    if figure_id == "fig5":
        base = dict(
            figure_id=figure_id,
            instance=dict(length=256, **DISORDERED_SPEC),
            temperature=0.01,
            gamma0=2.5,
        )
        if desk_scale:
            return dict(
                base, trotter_p=256,
                sqa_taus=[10, 32, 100, 316, 1000, 3162, 10000],
                qa_taus=[10, 18, 32, 56, 100, 316, 1000],
                n_reps=16, qa_dt=0.005,
                sqa_fit_window=[100.0, 10000.0],
                qa_fit_window=[10.0, 100.0],
            )
        return dict(
            base, trotter_p=1024,
            sqa_taus=[10, 32, 100, 316, 1000, 3162, 10000, 31623, 100000],
            qa_taus=[10, 18, 32, 56, 100, 316, 1000, 3162, 10000],
            n_reps=32, qa_dt=0.005,
            sqa_fit_window=[100.0, 10000.0],
            qa_fit_window=[10.0, 100.0],
        )
    raise ValidationError(
        f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}"
    )


def _instance_from_spec(spec: dict) -> Instance:
    return generate_instance(spec["length"], spec["distribution"], spec["seed"])


def estimate_mcs(cfg: dict) -> int:
    """Total MCS (including per-rep equilibration) a pipeline will consume."""
    fid = cfg["figure_id"]
    if fid == "fig1":
        return sum(
            cfg["t_run"][fam] * len(cfg["gammas"]) * len(cfg["p_values"])
            for fam in cfg["t_run"]
        )
    def anneal_cost(taus, reps):
        return sum((tau + max(1000, tau // 10)) * reps for tau in taus)
    if fid == "fig2":
        return anneal_cost(cfg["taus"], cfg["n_reps"])
    if fid == "fig3":
        per_p = anneal_cost(cfg["taus"], cfg["n_reps"])
        return per_p * (len(cfg["time_p_values"]) + len(cfg["sw_p_values"]))
    if fid == "fig4":
        return anneal_cost(cfg["sqa_taus"], cfg["n_reps"])
    if fid == "fig5":
        return anneal_cost(cfg["sqa_taus"], cfg["n_reps"])
    raise ValidationError(f"unknown figure id {fid!r}")


def _eq_point(inst, temperature, gamma, trotter_p, move_family, t_run, seed):
    params = PimcParams(temperature, gamma, trotter_p, move_family, t_run=t_run)
    res = equilibrium_run(inst, params, seed)
    return dict(
        P=trotter_p, gamma=gamma, temp=temperature, moves=move_family,
        eps_c_est=res.eps_c, stderr=res.stderr, t_burn=res.t_burn,
        geweke_z=res.geweke_z, n_mcs=t_run,
    )


def _sqa_point(inst, temperature, trotter_p, gamma0, tau, move_family, n_reps,
               seed, stride=None):
    schedule = Schedule(gamma0, float(tau))
    return sqa_run(
        inst, temperature, trotter_p, schedule, move_family, seed,
        n_reps=n_reps, stride=stride,
    )


def _qa_point(inst, gamma0, tau, dt, stride=None):
    schedule = Schedule(gamma0, float(tau))
    records = coherent_qa_evolve(inst, schedule, dt=dt, stride=stride)
    return records


def _write_exact_curve(path, inst, gammas, temperature):
    rows = [[float(g), temperature, equilibrium_eps_c(inst, float(g), temperature)]
            for g in gammas]
    write_csv(path, EXACT_EQ_HEADER, rows)


def _sqa_final_rows(results):
    rows = []
    for tau, res in results:
        rows.append([
            int(tau),
            float(res.eps_avg_mean[-1]), float(res.eps_avg_sem[-1]),
            float(res.eps_min_mean[-1]), float(res.eps_min_sem[-1]),
            res.n_reps,
        ])
    return rows


def _sqa_traj_rows(res):
    return [
        [int(res.ts[j]), float(res.gammas[j]),
         float(res.eps_avg_mean[j]), float(res.eps_avg_sem[j]),
         float(res.eps_min_mean[j]), float(res.eps_min_sem[j]), res.n_reps]
        for j in range(len(res.ts))
    ]


def _qa_traj_rows(records):
    return [[r.t, r.gamma, r.eps_avg] for r in records]


def _run_fig1(cfg, inst, out_dir, seed, workers):
    points = []
    idx = 0
    for fam in sorted(cfg["t_run"]):
        for gamma in cfg["gammas"]:
            for p in cfg["p_values"]:
                points.append((
                    (fam, gamma, p),
                    _eq_point,
                    dict(
                        inst=inst, temperature=cfg["temperature"], gamma=gamma,
                        trotter_p=p, move_family=fam, t_run=cfg["t_run"][fam],
                        seed=derive_seed(seed, idx),
                    ),
                ))
                idx += 1
    results = dict(run_parallel(points, workers=workers))
    outputs = []
    for fam in sorted(cfg["t_run"]):
        for gamma in cfg["gammas"]:
            rows = []
            for p in cfg["p_values"]:
                r = results[(fam, gamma, p)]
                rows.append([r["P"], r["gamma"], r["temp"], r["moves"],
                             r["eps_c_est"], r["stderr"], r["t_burn"],
                             r["geweke_z"], r["n_mcs"]])
            path = out_dir / f"fig1_pimc_{fam}_gamma{gamma:g}.csv"
            write_csv(path, PIMC_EQ_HEADER, rows)
            outputs.append(path.name)
    path = out_dir / "fig1_exact.csv"
    _write_exact_curve(path, inst, cfg["gammas"], cfg["temperature"])
    outputs.append(path.name)
    return outputs


def _run_fig2(cfg, inst, out_dir, seed, workers):
    points = [
        ((tau,), _sqa_point,
         dict(inst=inst, temperature=cfg["temperature"],
              trotter_p=cfg["trotter_p"], gamma0=cfg["gamma0"], tau=tau,
              move_family=cfg["move_family"], n_reps=cfg["n_reps"],
              seed=derive_seed(seed, j)))
        for j, tau in enumerate(cfg["taus"])
    ]
    results = run_parallel(points, workers=workers)
    rows = _sqa_final_rows([(key[0], res) for key, res in results])
    outputs = []
    path = out_dir / f"fig2_sqa_P{cfg['trotter_p']}.csv"
    write_csv(path, FINAL_HEADER, rows)
    outputs.append(path.name)
    path = out_dir / "fig2_exact.csv"
    _write_exact_curve(path, inst, [0.0], cfg["temperature"])
    outputs.append(path.name)
    return outputs


def _run_fig3(cfg, inst, out_dir, seed, workers):
    points = []
    idx = 0
    for fam, p_list in (("time_cluster", cfg["time_p_values"]),
                        ("spacetime_sw", cfg["sw_p_values"])):
        for p in p_list:
            for tau in cfg["taus"]:
                points.append((
                    (fam, p, tau), _sqa_point,
                    dict(inst=inst, temperature=cfg["temperature"],
                         trotter_p=p, gamma0=cfg["gamma0"], tau=tau,
                         move_family=fam, n_reps=cfg["n_reps"],
                         seed=derive_seed(seed, idx)),
                ))
                idx += 1
    results = dict(run_parallel(points, workers=workers))
    outputs = []
    for fam, p_list, tag in (("time_cluster", cfg["time_p_values"], "fig3a_time"),
                             ("spacetime_sw", cfg["sw_p_values"], "fig3b_sw")):
        for p in p_list:
            rows = _sqa_final_rows(
                [(tau, results[(fam, p, tau)]) for tau in cfg["taus"]]
            )
            path = out_dir / f"{tag}_P{p}.csv"
            write_csv(path, FINAL_HEADER, rows)
            outputs.append(path.name)
    path = out_dir / "fig3_exact.csv"
    _write_exact_curve(path, inst, [0.0], cfg["temperature"])
    outputs.append(path.name)
    return outputs


def _gamma_grid(spec) -> np.ndarray:
    lo, hi, step = spec
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _run_fig4(cfg, inst, out_dir, seed, workers):
    temperature = cfg["temperature"]
    points = [
        (("sqa", tau), _sqa_point,
         dict(inst=inst, temperature=temperature, trotter_p=cfg["trotter_p"],
              gamma0=cfg["gamma0"], tau=tau, move_family="time_cluster",
              n_reps=cfg["n_reps"], seed=derive_seed(seed, j),
              stride=max(1, tau // 100)))
        for j, tau in enumerate(cfg["sqa_taus"])
    ]
    points += [
        (("qa", tau), _qa_point,
         dict(inst=inst, gamma0=cfg["gamma0"], tau=tau, dt=cfg["qa_dt"],
              stride=None))
        for tau in cfg["qa_taus"]
    ]
    results = dict(run_parallel(points, workers=workers))
    grid = _gamma_grid(cfg["gamma_grid"])
    factory = equilibrium_curve_factory(inst, grid)
    outputs = []
    fit_rows = []
    window = tuple(cfg["fit_window"])
    for tau in cfg["sqa_taus"]:
        res = results[("sqa", tau)]
        path = out_dir / f"fig4_sqa_traj_tau{tau}.csv"
        write_csv(path, SQA_HEADER, _sqa_traj_rows(res))
        outputs.append(path.name)
        fit = fit_teff(mean_trajectory(res), factory, gamma_window=window,
                       bracket=(temperature, 10.0))
        fit_rows.append(["sqa", int(tau), fit.parameter, fit.stderr,
                         fit.residual_rms, window[0], window[1]])
        curve = factory(fit.parameter)
        path = out_dir / f"fig4_fit_curve_sqa_tau{tau}.csv"
        write_csv(path, EXACT_EQ_HEADER,
                  [[float(g), fit.parameter, float(v)]
                   for g, v in zip(curve.gammas, curve.values)])
        outputs.append(path.name)
    for tau in cfg["qa_taus"]:
        records = results[("qa", tau)]
        path = out_dir / f"fig4_qa_traj_tau{tau}.csv"
        write_csv(path, EXACT_QA_HEADER, _qa_traj_rows(records))
        outputs.append(path.name)
        fit = fit_teff(records, factory, gamma_window=window,
                       bracket=(temperature, 10.0))
        fit_rows.append(["qa", int(tau), fit.parameter, fit.stderr,
                         fit.residual_rms, window[0], window[1]])
        curve = factory(fit.parameter)
        path = out_dir / f"fig4_fit_curve_qa_tau{tau}.csv"
        write_csv(path, EXACT_EQ_HEADER,
                  [[float(g), fit.parameter, float(v)]
                   for g, v in zip(curve.gammas, curve.values)])
        outputs.append(path.name)
    for tag, temp in (("T", temperature), ("T0", 0.0)):
        path = out_dir / f"fig4_eq_{tag}.csv"
        _write_exact_curve(path, inst, grid, temp)
        outputs.append(path.name)
    path = out_dir / "fig4_fits.csv"
    write_csv(path, TEFF_FIT_HEADER, fit_rows)
    outputs.append(path.name)
    return outputs


def _run_fig5(cfg, inst, out_dir, seed, workers):
    temperature = cfg["temperature"]
    points = [
        (("sqa", tau), _sqa_point,
         dict(inst=inst, temperature=temperature, trotter_p=cfg["trotter_p"],
              gamma0=cfg["gamma0"], tau=tau, move_family="time_cluster",
              n_reps=cfg["n_reps"], seed=derive_seed(seed, j)))
        for j, tau in enumerate(cfg["sqa_taus"])
    ]
    points += [
        (("qa", tau), _qa_point,
         dict(inst=inst, gamma0=cfg["gamma0"], tau=tau, dt=cfg["qa_dt"],
              stride=None))
        for tau in cfg["qa_taus"]
    ]
    results = dict(run_parallel(points, workers=workers))
    outputs = []
    sqa_rows = _sqa_final_rows(
        [(tau, results[("sqa", tau)]) for tau in cfg["sqa_taus"]]
    )
    path = out_dir / f"fig5_sqa_P{cfg['trotter_p']}.csv"
    write_csv(path, FINAL_HEADER, sqa_rows)
    outputs.append(path.name)
    qa_rows = [[int(tau), results[("qa", tau)][-1].eps_avg]
               for tau in cfg["qa_taus"]]
    path = out_dir / "fig5_qa.csv"
    write_csv(path, QA_FINAL_HEADER, qa_rows)
    outputs.append(path.name)
    fit_rows = []
    sqa_pts = [(row[0], row[1]) for row in sqa_rows]
    fit = fit_power_law(sqa_pts, window=tuple(cfg["sqa_fit_window"]))
    fit_rows.append(["sqa", fit.parameter, fit.stderr, *fit.window,
                     fit.residual_rms, fit.n_points])
    fit = fit_power_law([(r[0], r[1]) for r in qa_rows],
                        window=tuple(cfg["qa_fit_window"]))
    fit_rows.append(["qa", fit.parameter, fit.stderr, *fit.window,
                     fit.residual_rms, fit.n_points])
    path = out_dir / "fig5_fits.csv"
    write_csv(path, EXPONENT_FIT_HEADER, fit_rows)
    outputs.append(path.name)
    path = out_dir / "fig5_exact.csv"
    _write_exact_curve(path, inst, [0.0], temperature)
    outputs.append(path.name)
    return outputs


_RUNNERS = {
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
    "fig5": _run_fig5,
}


def run_figure_pipeline(
    figure_id: str,
    out_dir: str | Path,
    seed: int = 0,
    desk_scale: bool = False,
    workers: int = 1,
    max_mcs: int = 200_000_000,
    config: dict | None = None,
) -> RunManifest:
    """Execute the sweep behind a figure and write its CSVs plus a manifest.

    ``config`` overrides the preset (as produced by :func:`figure_config`),
    which is how a manifest re-run restores the exact original parameters.
    """
    cfg = config if config is not None else figure_config(figure_id, desk_scale)
    if cfg.get("figure_id") != figure_id:
        raise ValidationError("config does not match the requested figure id")
    budget = estimate_mcs(cfg)
    if budget > max_mcs:
        raise ValidationError(
            f"estimated cost {budget} MCS exceeds --max-mcs {max_mcs}; "
            "refusing to run (raise --max-mcs or use --desk-scale)"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inst = _instance_from_spec(cfg["instance"])
    inst_path = out_dir / f"{figure_id}_instance.txt"
    save_instance(inst, inst_path)
    outputs = _RUNNERS[figure_id](cfg, inst, out_dir, seed, workers)
    manifest = RunManifest(
        subcommand=f"figure:{figure_id}",
        params=cfg,
        master_seed=seed,
        instance_checksum=inst.checksum(),
        outputs=[inst_path.name] + outputs,
    )
    manifest.write(out_dir / f"{figure_id}_manifest.json")
    return manifest


def rerun_from_manifest(manifest: RunManifest, out_dir: str | Path,
                        workers: int = 1, max_mcs: int = 200_000_000) -> RunManifest:
    figure_id = manifest.subcommand.split(":", 1)[1]
    return run_figure_pipeline(
        figure_id,
        out_dir,
        seed=manifest.master_seed,
        workers=workers,
        max_mcs=max_mcs,
        config=manifest.params,
    )
