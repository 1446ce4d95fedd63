"""Figure rendering from schema-versioned CSVs.

Schema v1 headers mirror the simulation CLI's output contract.  A CSV whose
header deviates fails validation with an error naming the offending column;
optional error-bar columns may be absent entirely, in which case the curve
renders without error bars and a warning is emitted.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCHEMA_VERSION = 1

SCHEMAS = {
    "exact_eq": ["gamma", "T", "eps_c"],
    "exact_qa": ["t", "gamma", "eps_res"],
    "pimc_eq": ["P", "gamma", "temp", "moves", "eps_c_est", "stderr",
                "t_burn", "geweke_z", "n_mcs"],
    "sqa_traj": ["t_mcs", "gamma", "eps_avg_mean", "eps_avg_sem",
                 "eps_min_mean", "eps_min_sem", "n_reps"],
    "final": ["tau", "eps_avg_mean", "eps_avg_sem", "eps_min_mean",
              "eps_min_sem", "n_reps"],
    "qa_final": ["tau", "eps_res"],
    "teff_fits": ["dynamics", "tau", "t_eff", "t_eff_stderr", "residual_rms",
                  "window_lo", "window_hi"],
    "exponent_fits": ["dynamics", "exponent", "stderr", "window_lo",
                      "window_hi", "residual_rms", "n_points"],
}

#: columns that may be dropped from a schema without failing validation
OPTIONAL_COLUMNS = {"eps_avg_sem", "eps_min_sem", "stderr", "t_eff_stderr"}

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

_STYLE = {
    "figure.figsize": (6.4, 4.4),
    "font.size": 9.0,
    "axes.labelsize": 10.0,
    "legend.fontsize": 7.5,
    "lines.markersize": 4.0,
    "errorbar.capsize": 2.0,
    "svg.hashsalt": "sqa-chain-plots",
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class SchemaError(ValueError):
    """A CSV header does not match its versioned schema."""


@dataclass
class Table:
    path: Path
    columns: dict[str, np.ndarray | list]

    def __getitem__(self, name):
        return self.columns[name]

    def __contains__(self, name):
        return name in self.columns

    @property
    def empty(self) -> bool:
        return all(len(v) == 0 for v in self.columns.values())


def load_table(path: str | Path, schema: str) -> Table:
    """Read a CSV and validate its header against the named schema."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path.name}: empty file, expected a header row")
    header = lines[0].split(",")
    expected = SCHEMAS[schema]
    required = [c for c in expected if c not in OPTIONAL_COLUMNS]
    for col in header:
        if col not in expected:
            raise SchemaError(f"{path.name}: unexpected column {col!r}")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path.name}: missing column {col!r}")
    for col in expected:
        if col in OPTIONAL_COLUMNS and col not in header:
            warnings.warn(
                f"{path.name}: column {col!r} absent; rendering without "
                "error bars",
                stacklevel=2,
            )
    raw: dict[str, list] = {c: [] for c in header}
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(f"{path.name}: ragged row {line!r}")
        for c, cell in zip(header, cells):
            raw[c].append(cell)
    columns: dict[str, np.ndarray | list] = {}
    for c, vals in raw.items():
        try:
            columns[c] = np.array([float(v) for v in vals])
        except ValueError:
            columns[c] = vals
    return Table(path=path, columns=columns)


@dataclass
class PlotSpec:
    """What to draw: figure id, input CSVs by role, scales and guides."""

    figure_id: str
    data_dir: Path
    files: dict[str, list[Path]] = field(default_factory=dict)

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id {self.figure_id!r}")
        for role, paths in self.files.items():
            for p in paths:
                if not p.exists():
                    raise SchemaError(f"{role}: referenced CSV {p} is missing")


def build_spec(figure_id: str, data_dir: str | Path) -> PlotSpec:
    """Locate a figure's CSVs, preferring the pipeline manifest."""
    data_dir = Path(data_dir)
    manifest = data_dir / f"{figure_id}_manifest.json"
    if manifest.exists():
        names = json.loads(manifest.read_text())["outputs"]
        paths = [data_dir / n for n in names if n.endswith(".csv")]
    else:
        paths = sorted(data_dir.glob(f"{figure_id}*.csv"))
    if not paths:
        raise SchemaError(f"no {figure_id} CSVs found under {data_dir}")
    files: dict[str, list[Path]] = {}

    def add(role, p):
        files.setdefault(role, []).append(p)

    for p in sorted(paths):
        name = p.name
        if "exact" in name or "_eq_" in name:
            add("exact", p)
        elif "fit_curve" in name:
            add("fit_curves", p)
        elif "fits" in name:
            add("fits", p)
        elif "pimc" in name:
            add("pimc", p)
        elif "sqa_traj" in name:
            add("sqa_traj", p)
        elif "qa_traj" in name:
            add("qa_traj", p)
        elif "qa" in name and "sqa" not in name:
            add("qa", p)
        elif "sqa" in name or "time" in name or "sw" in name:
            add("sqa", p)
        else:
            add("other", p)
    return PlotSpec(figure_id=figure_id, data_dir=data_dir, files=files)


def _errorbar(ax, x, y, yerr, label, fmt="o-", **kw):
    if yerr is not None and np.all(np.isfinite(yerr)):
        ax.errorbar(x, y, yerr=yerr, fmt=fmt, label=label, **kw)
    else:
        ax.plot(x, y, fmt, label=label, **kw)


def _series_label(path: Path) -> str:
    stem = path.stem
    for prefix in ("fig1_", "fig2_", "fig3a_", "fig3b_", "fig4_", "fig5_"):
        if stem.startswith(prefix):
            return stem[len(prefix):]
    return stem


def _render_fig1(spec: PlotSpec, ax):
    drew = False
    for p in spec.files.get("pimc", []):
        table = load_table(p, "pimc_eq")
        if table.empty:
            warnings.warn(f"{p.name}: no rows; leaving its curve empty")
            continue
        inv_p = 1.0 / np.asarray(table["P"])
        sem = table["stderr"] if "stderr" in table else None
        _errorbar(ax, inv_p, table["eps_c_est"], sem, _series_label(p))
        drew = True
    for p in spec.files.get("exact", []):
        table = load_table(p, "exact_eq")
        for g, v in zip(table["gamma"], table["eps_c"]):
            ax.axhline(v, color="k", lw=1.4,
                       label=f"exact gamma={g:g}")
    ax.set_xlabel("1/P")
    ax.set_ylabel("residual bond energy per spin")
    return drew


def _final_curves(spec: PlotSpec, ax, roles=("sqa",)):
    drew = False
    for role in roles:
        for p in spec.files.get(role, []):
            schema = "qa_final" if role == "qa" else "final"
            table = load_table(p, schema)
            if table.empty:
                warnings.warn(f"{p.name}: no rows; leaving its curve empty")
                continue
            if schema == "qa_final":
                ax.plot(table["tau"], table["eps_res"], "*-",
                        label=_series_label(p))
            else:
                sem = table["eps_avg_sem"] if "eps_avg_sem" in table else None
                _errorbar(ax, table["tau"], table["eps_avg_mean"], sem,
                          _series_label(p) + " (avg)")
                semn = table["eps_min_sem"] if "eps_min_sem" in table else None
                _errorbar(ax, table["tau"], table["eps_min_mean"], semn,
                          _series_label(p) + " (min)", fmt="s--", alpha=0.6)
            drew = True
    for p in spec.files.get("exact", []):
        table = load_table(p, "exact_eq")
        for _, v in zip(table["gamma"], table["eps_c"]):
            ax.axhline(v, color="k", lw=1.4, label="thermal equilibrium")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("annealing time tau")
    ax.set_ylabel("final residual energy per spin")
    return drew


def _power_guides(spec: PlotSpec, ax):
    xlim = ax.get_xlim()
    x = np.geomspace(max(xlim[0], 1e-12), xlim[1], 50)
    for p in spec.files.get("fits", []):
        table = load_table(p, "exponent_fits")
        if table.empty:
            continue
        for j in range(len(table["exponent"])):
            expo = float(np.asarray(table["exponent"])[j])
            lo = float(np.asarray(table["window_lo"])[j])
            hi = float(np.asarray(table["window_hi"])[j])
            dyn = table["dynamics"][j]
            # anchor the guide inside its fit window using nearby data
            anchor_y = None
            for line in ax.get_lines():
                xs, ys = line.get_xdata(), line.get_ydata()
                if len(xs) == 0:
                    continue
                inside = [(xx, yy) for xx, yy in zip(xs, ys)
                          if lo <= xx <= hi and yy > 0]
                if inside:
                    anchor_y = inside[0]
                    break
            if anchor_y is None:
                continue
            x0, y0 = anchor_y
            xg = np.geomspace(lo, hi, 32)
            ax.plot(xg, y0 * (xg / x0) ** expo, "--", lw=1.2,
                    label=f"{dyn}: tau^{expo:.2f}")
    ax.set_xlim(*xlim)


def _render_fig2(spec: PlotSpec, ax):
    drew = _final_curves(spec, ax, roles=("sqa",))
    # dashed Kibble-Zurek guide through the first finite point
    for line in ax.get_lines():
        xs, ys = line.get_xdata(), line.get_ydata()
        pos = [(x, y) for x, y in zip(xs, ys) if y > 0 and x > 0]
        if len(pos) >= 2:
            x0, y0 = pos[0]
            xg = np.geomspace(min(x for x, _ in pos), max(x for x, _ in pos), 32)
            ax.plot(xg, y0 * (xg / x0) ** -0.5, "--", color="gray",
                    label="tau^(-1/2) guide")
            break
    return drew


def _render_fig3(spec: PlotSpec, ax):
    return _final_curves(spec, ax, roles=("sqa",))


def _render_fig4(spec: PlotSpec, ax):
    drew = False
    for p in spec.files.get("sqa_traj", []):
        table = load_table(p, "sqa_traj")
        if table.empty:
            warnings.warn(f"{p.name}: no rows; leaving its curve empty")
            continue
        sem = table["eps_avg_sem"] if "eps_avg_sem" in table else None
        _errorbar(ax, table["gamma"], table["eps_avg_mean"], sem,
                  _series_label(p), fmt="o")
        drew = True
    for p in spec.files.get("qa_traj", []):
        table = load_table(p, "exact_qa")
        if table.empty:
            warnings.warn(f"{p.name}: no rows; leaving its curve empty")
            continue
        ax.plot(table["gamma"], table["eps_res"], ".", ms=2.5,
                label=_series_label(p))
        drew = True
    for p in spec.files.get("fit_curves", []):
        table = load_table(p, "exact_eq")
        ax.plot(table["gamma"], table["eps_c"], "--", lw=1.2,
                label=_series_label(p))
    for p in spec.files.get("exact", []):
        table = load_table(p, "exact_eq")
        label = "exact " + _series_label(p)
        ax.plot(table["gamma"], table["eps_c"], "-", lw=1.6, label=label)
    ax.set_xlabel("transverse field gamma(t)")
    ax.set_ylabel("residual energy per spin")
    ax.invert_xaxis()  # the anneal runs from gamma0 down to 0
    return drew


def _render_fig5(spec: PlotSpec, ax):
    drew = _final_curves(spec, ax, roles=("sqa", "qa"))
    _power_guides(spec, ax)
    return drew


_RENDERERS = {
    "fig1": _render_fig1,
    "fig2": _render_fig2,
    "fig3": _render_fig3,
    "fig4": _render_fig4,
    "fig5": _render_fig5,
}


def render(spec: PlotSpec, out_path: str | Path) -> Path:
    """Draw the figure analogue and write a vector image.

    Output bytes are deterministic for identical inputs: fixed style, a fixed
    SVG hash salt, and no embedded timestamps.
    """
    out_path = Path(out_path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            drew = _RENDERERS[spec.figure_id](spec, ax)
            if not drew:
                warnings.warn(
                    f"{spec.figure_id}: no data rows found; writing empty axes"
                )
            if ax.get_legend_handles_labels()[0]:
                ax.legend(loc="best")
            ax.set_title(spec.figure_id)
            fig.savefig(out_path, format=out_path.suffix.lstrip(".") or "svg",
                        metadata={"Date": None})
        finally:
            plt.close(fig)
    return out_path
