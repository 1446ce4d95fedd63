"""Random Ising chain instances: generation, classical ground energy, file I/O.

An instance is an open chain of ``L`` spins with ``L - 1`` positive bond
couplings.  Couplings are either drawn i.i.d. uniformly from (0, 1]
(``uniform01``) or all equal (``ordered(J)``).  Generation is a pure function
of ``(L, distribution, seed)`` backed by numpy's PCG64 generator, whose
streams are stable across platforms, so a stored ``(distribution, seed, L)``
triple regenerates the couplings bit-identically.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

_ORDERED_RE = re.compile(r"^ordered\((?P<j>[^)]+)\)$")


def _parse_distribution(tag: str) -> tuple[str, float | None]:
    """Split a distribution tag into (kind, ordered coupling or None)."""
    if tag == "uniform01":
        return "uniform01", None
    m = _ORDERED_RE.match(tag)
    if m:
        try:
            j = float(m.group("j"))
        except ValueError as exc:
            raise ValidationError(f"bad ordered coupling in tag {tag!r}") from exc
        if j <= 0:
            raise ValidationError(f"ordered coupling must be positive, got {j}")
        return "ordered", j
    raise ValidationError(
        f"unknown distribution tag {tag!r} (expected 'uniform01' or 'ordered(J)')"
    )


@dataclass(frozen=True)
class Instance:
    """An open random Ising chain: length, couplings and their provenance."""

    length: int
    couplings: np.ndarray = field(repr=False)
    distribution: str
    seed: int

    def __post_init__(self):
        if self.length < 2:
            raise ValidationError(f"chain length must be >= 2, got {self.length}")
        couplings = np.asarray(self.couplings, dtype=np.float64)
        couplings.setflags(write=False)
        object.__setattr__(self, "couplings", couplings)
        if couplings.shape != (self.length - 1,):
            raise ValidationError(
                f"expected {self.length - 1} couplings, got {couplings.size}"
            )
        if not np.all(couplings > 0.0):
            bad = int(np.argmin(couplings > 0.0))
            raise ValidationError(
                f"coupling J_{bad + 1} = {couplings[bad]} violates J > 0"
            )
        _parse_distribution(self.distribution)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.length == other.length
            and self.distribution == other.distribution
            and self.seed == other.seed
            and np.array_equal(self.couplings, other.couplings)
        )

    def checksum(self) -> str:
        """SHA-256 over the serialized form; used by run manifests."""
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()


def generate_instance(length: int, distribution: str, seed: int) -> Instance:
    """Draw an instance; deterministic in ``(length, distribution, seed)``.

    ``uniform01`` maps PCG64 draws u in [0, 1) to 1 - u in (0, 1], which
    excludes the forbidden J = 0 endpoint.
    """
    if length < 2:
        raise ValidationError(f"chain length must be >= 2, got {length}")
    kind, j_const = _parse_distribution(distribution)
    if kind == "ordered":
        couplings = np.full(length - 1, j_const, dtype=np.float64)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        couplings = 1.0 - rng.random(length - 1)
    return Instance(length, couplings, distribution, int(seed))


def classical_ground_energy(inst: Instance) -> float:
    """Ground-state energy per spin of the zero-field chain: -(1/L) sum J_i."""
    return -float(np.sum(inst.couplings)) / inst.length


def serialize_instance(inst: Instance) -> str:
    lines = [
        f"L={inst.length}",
        f"distribution={inst.distribution}",
        f"seed={inst.seed}",
    ]
    lines.extend(f"{j:.17g}" for j in inst.couplings)
    return "\n".join(lines) + "\n"


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(serialize_instance(inst), encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    """Parse an instance file; errors name the offending line."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if len(lines) < 3:
        raise ParseError(f"line {len(lines) + 1}: truncated instance file")

    def keyed(lineno: int, key: str) -> str:
        raw = lines[lineno - 1]
        if not raw.startswith(key + "="):
            raise ParseError(f"line {lineno}: expected '{key}=...', got {raw!r}")
        return raw[len(key) + 1 :]

    try:
        length = int(keyed(1, "L"))
    except ValueError as exc:
        raise ParseError(f"line 1: bad integer for L: {exc}") from exc
    distribution = keyed(2, "distribution")
    try:
        seed = int(keyed(3, "seed"))
    except ValueError as exc:
        raise ParseError(f"line 3: bad integer for seed: {exc}") from exc
    if seed < 0 or seed > (1 << 64) - 1:
        raise ParseError("line 3: seed outside the unsigned 64-bit range")

    body = [ln for ln in lines[3:] if ln.strip()]
    if len(body) != length - 1:
        raise ParseError(
            f"line {min(4 + len(body), len(lines) + 1)}: expected {length - 1} "
            f"couplings, found {len(body)}"
        )
    couplings = np.empty(length - 1, dtype=np.float64)
    for k, raw in enumerate(body):
        try:
            couplings[k] = float(raw)
        except ValueError as exc:
            raise ParseError(f"line {4 + k}: bad coupling {raw!r}") from exc
        if couplings[k] <= 0.0:
            raise ValidationError(
                f"line {4 + k}: coupling J_{k + 1} = {couplings[k]} violates J > 0"
            )
    return Instance(length, couplings, distribution, seed)
