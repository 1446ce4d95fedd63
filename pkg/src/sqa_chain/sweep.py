"""Deterministic parameter-sweep execution and run manifests.

A sweep is a list of (key, function, kwargs) points.  Points run serially or
on a process pool; results are always aggregated in key-sorted order, so the
output is byte-identical no matter how many workers raced to produce it.

Every CLI output is accompanied by a RunManifest recording the subcommand,
the full parameter set, the master seed, the tool version and the instance
checksum; re-running a manifest reproduces the outputs bit-identically.
"""

from __future__ import annotations

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import SweepError, ValidationError

SCHEMA_VERSION = 1


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    master_seed: int
    instance_checksum: str | None = None
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        known = {k: data[k] for k in (
            "subcommand", "params", "master_seed", "instance_checksum",
            "outputs", "tool_version", "schema_version",
        ) if k in data}
        return cls(**known)

    @classmethod
    def read(cls, path: str | Path) -> "RunManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _call(point):
    key, fn, kwargs = point
    return key, fn(**kwargs)


def run_parallel(points, workers: int = 1):
    """Execute sweep points and return [(key, result)] sorted by key.

    Failures do not abort the remaining points; if any point failed, a
    SweepError carrying the completed results and the failure list is raised
    after the sweep drains.
    """
    points = list(points)
    if not points:
        raise ValidationError("no parameter points")
    keys = [p[0] for p in points]
    if len(set(keys)) != len(keys):
        raise ValidationError("sweep keys must be unique")
    completed = []
    failures = []
    if workers <= 1 or len(points) == 1:
        for point in points:
            try:
                completed.append(_call(point))
            except Exception as exc:  # noqa: BLE001 - reported via SweepError
                failures.append((point[0], repr(exc)))
    else:
        # spawned workers: forking a pool out of a process with live BLAS /
        # JIT threads can deadlock the children on inherited locks
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = {pool.submit(_call, p): p[0] for p in points}
            for fut, key in futures.items():
                try:
                    completed.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    failures.append((key, repr(exc)))
    completed.sort(key=lambda kr: kr[0])
    if failures:
        failures.sort(key=lambda kf: kf[0])
        raise SweepError(
            f"{len(failures)} of {len(points)} sweep points failed: "
            + "; ".join(f"{k}: {msg}" for k, msg in failures[:3]),
            completed=completed,
            failures=failures,
        )
    return completed


def format_float(x) -> str:
    """Shortest round-trip decimal form; keeps CSV output byte-stable."""
    return repr(float(x))


def write_csv(path: str | Path, header: list[str], rows) -> None:
    """Write rows of mixed int/float/str cells with round-trip float format."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append(str(int(cell)))
            elif isinstance(cell, float):
                cells.append(format_float(cell))
            elif cell is None:
                cells.append("")
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
