"""Path-integral Monte Carlo core: action, cluster moves, observables, sampling.

The Suzuki-Trotter mapping turns the quantum chain at temperature T into P
coupled classical replicas with action

    K_cl = - sum_k sum_{i<L} beta_P J_i S_i^k S_{i+1}^k
           - sum_k sum_{i<=L} Jperp S_i^k S_i^{k+1},

with beta_P = 1/(T P), the periodic identification S^{P+1} = S^1, and the
uniform imaginary-time coupling Jperp = -log(tanh(beta_P Gamma))/2.

Two move families are provided: Swendsen-Wang clusters restricted to the
imaginary-time direction (one MCS = L column updates, each a bond
decomposition; every cluster is proposed with the standard SW probability 1/2
and accepted with Metropolis on the spatial energy change, so the move
reduces to plain SW when the spatial couplings vanish), and non-local
space-time clusters (one MCS = one full SW decomposition, or one Wolff
cluster growth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _mc_kernels as mck
from .errors import DivergentCouplingError, ValidationError
from .instances import Instance
from .rng import derive_seed, xoshiro_state

MOVE_FAMILIES = ("time_cluster", "spacetime_sw", "spacetime_wolff")
_MOVE_IDS = {
    "time_cluster": mck.MOVE_TIME_CLUSTER,
    "spacetime_sw": mck.MOVE_SPACETIME_SW,
    "spacetime_wolff": mck.MOVE_SPACETIME_WOLFF,
}


def j_perp(beta_p: float, gamma: float) -> float:
    """Imaginary-time coupling -log(tanh(beta_p * gamma))/2; always positive.

    Evaluated through log1p so the large-argument tail does not round to zero.
    """
    if beta_p <= 0:
        raise ValidationError(f"beta_p must be positive, got {beta_p}")
    if gamma <= 0:
        raise DivergentCouplingError(
            f"j_perp diverges for gamma = {gamma}; the zero-field endpoint is "
            "handled by the frozen-temporal-bond limit"
        )
    x = beta_p * gamma
    e = math.exp(-2.0 * x)
    return -0.5 * (math.log1p(-e) - math.log1p(e))


def temporal_bond_probability(beta_p: float, gamma: float) -> float:
    """SW activation probability 1 - exp(-2 Jperp), i.e. 1 - tanh(beta_p*gamma)."""
    if gamma <= 0.0:
        return 1.0
    return 1.0 - math.tanh(beta_p * gamma)


def spatial_bond_probabilities(beta_p: float, couplings: np.ndarray) -> np.ndarray:
    """SW activation probabilities 1 - exp(-2 beta_p J_i) per spatial bond."""
    return -np.expm1(-2.0 * beta_p * np.asarray(couplings, dtype=np.float64))


@dataclass
class PathConfig:
    """The L x P classical spin lattice with periodic imaginary time."""

    spins: np.ndarray

    def __post_init__(self):
        spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        if spins.ndim != 2:
            raise ValidationError("spins must be a 2-d (L, P) array")
        if not np.all(np.abs(spins) == 1):
            raise ValidationError("spin entries must be +1 or -1")
        self.spins = spins

    @property
    def length(self) -> int:
        return self.spins.shape[0]

    @property
    def trotter_p(self) -> int:
        return self.spins.shape[1]

    @classmethod
    def random(cls, length: int, trotter_p: int, seed: int) -> "PathConfig":
        rng = np.random.Generator(np.random.PCG64(seed))
        spins = rng.integers(0, 2, size=(length, trotter_p), dtype=np.int8)
        return cls(spins * 2 - 1)

    @classmethod
    def aligned(cls, length: int, trotter_p: int, value: int = 1) -> "PathConfig":
        return cls(np.full((length, trotter_p), value, dtype=np.int8))


@dataclass
class PimcParams:
    """Sampling parameters at fixed (T, Gamma, P)."""

    temperature: float
    gamma: float
    trotter_p: int
    move_family: str = "time_cluster"
    t_run: int = 10_000
    t_burn: int | None = None  # None: choose by Geweke's diagnostic

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.trotter_p < 1:
            raise ValidationError(f"trotter P must be >= 1, got {self.trotter_p}")
        if self.move_family not in MOVE_FAMILIES:
            raise ValidationError(
                f"unknown move family {self.move_family!r}; expected one of "
                f"{MOVE_FAMILIES}"
            )
        if self.t_run < 1:
            raise ValidationError("t_run must be >= 1")

    @property
    def beta_p(self) -> float:
        return 1.0 / (self.temperature * self.trotter_p)

    @property
    def jperp(self) -> float:
        return j_perp(self.beta_p, self.gamma)


def classical_action(cfg: PathConfig, inst: Instance, params: PimcParams) -> float:
    """Suzuki-Trotter action K_cl of a configuration (lower = more likely)."""
    spins = cfg.spins
    if spins.shape[0] != inst.length:
        raise ValidationError(
            f"config has {spins.shape[0]} sites but instance has {inst.length}"
        )
    if spins.shape[1] != params.trotter_p:
        raise ValidationError(
            f"config has {spins.shape[1]} slices but params expect {params.trotter_p}"
        )
    s = spins.astype(np.float64)
    spatial = params.beta_p * float(inst.couplings @ (s[:-1] * s[1:]).sum(axis=1))
    temporal = params.jperp * float((s * np.roll(s, -1, axis=1)).sum())
    return -(spatial + temporal)


def measure_eps_avg(cfg: PathConfig, inst: Instance) -> float:
    """Residual bond energy per spin, averaged over Trotter replicas."""
    bonds = (cfg.spins[:-1] * cfg.spins[1:]).mean(axis=1)
    J = inst.couplings
    return float(J.sum() - J @ bonds) / inst.length


def measure_eps_min(cfg: PathConfig, inst: Instance) -> tuple[float, int]:
    """Minimum per-slice residual energy and its 1-based slice index.

    Ties resolve to the smallest slice index.
    """
    J = inst.couplings
    slice_sums = J @ (cfg.spins[:-1] * cfg.spins[1:])
    k = int(np.argmax(slice_sums))
    eps = float(J.sum() - slice_sums[k]) / inst.length
    return eps, k + 1


def _kernel_args(inst: Instance, params: PimcParams):
    beta_p = params.beta_p
    p_sp = spatial_bond_probabilities(beta_p, inst.couplings)
    p_temp = temporal_bond_probability(beta_p, params.gamma)
    frozen = params.gamma <= 0.0
    return beta_p, p_sp, p_temp, frozen


def _one_mcs(cfg: PathConfig, inst: Instance, params: PimcParams, state: np.ndarray):
    beta_p, p_sp, p_temp, frozen = _kernel_args(inst, params)
    empty = np.empty(0, np.float64)
    empty_i = np.empty(0, np.int64)
    mck.run_chain(
        cfg.spins,
        inst.couplings,
        beta_p,
        p_sp,
        p_temp,
        frozen,
        _MOVE_IDS[params.move_family],
        1,
        state,
        False,
        empty,
        empty,
        empty_i,
    )
    return cfg


def sw_time_cluster_sweep(
    cfg: PathConfig, inst: Instance, params: PimcParams, state: np.ndarray
) -> PathConfig:
    """One MCS of imaginary-time SW cluster flips (L column updates), in place.

    ``state`` is a 4-word xoshiro256++ state from :func:`sqa_chain.rng.xoshiro_state`.
    """
    if params.move_family != "time_cluster":
        params = PimcParams(
            params.temperature, params.gamma, params.trotter_p, "time_cluster"
        )
    return _one_mcs(cfg, inst, params, state)


def sw_spacetime_sweep(
    cfg: PathConfig, inst: Instance, params: PimcParams, state: np.ndarray
) -> PathConfig:
    """One MCS of space-time cluster moves (SW decomposition or one Wolff flip)."""
    if params.move_family not in ("spacetime_sw", "spacetime_wolff"):
        params = PimcParams(
            params.temperature, params.gamma, params.trotter_p, "spacetime_sw"
        )
    return _one_mcs(cfg, inst, params, state)


@dataclass
class MeasurementSeries:
    """Per-MCS observable samples with strictly increasing MCS indices."""

    indices: np.ndarray
    eps_avg: np.ndarray
    eps_min: np.ndarray

    def __post_init__(self):
        if not np.all(np.diff(self.indices) > 0):
            raise ValidationError("measurement indices must be strictly increasing")
        if len(self.indices) != len(self.eps_avg) or len(self.indices) != len(
            self.eps_min
        ):
            raise ValidationError("measurement arrays must have equal length")


def spectral_density_zero(x: np.ndarray) -> float:
    """Zero-frequency spectral density via Bartlett-windowed autocovariances."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        return 0.0
    xc = x - x.mean()
    gamma0 = float(xc @ xc) / n
    m = min(n - 1, int(math.sqrt(n)))
    s = gamma0
    for lag in range(1, m + 1):
        cov = float(xc[lag:] @ xc[:-lag]) / n
        s += 2.0 * (1.0 - lag / (m + 1.0)) * cov
    return max(s, 0.0)


def geweke_z(x: np.ndarray, first: float = 0.1, last: float = 0.5) -> float:
    """Geweke z-score between the first 10% and last 50% of a series."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    na = max(1, int(first * n))
    nb = max(1, int(last * n))
    a = x[:na]
    b = x[n - nb :]
    num = a.mean() - b.mean()
    var = spectral_density_zero(a) / na + spectral_density_zero(b) / nb
    if var <= 0.0:
        return 0.0 if num == 0.0 else math.inf
    return float(num / math.sqrt(var))


#: Candidate burn-in fractions scanned by Geweke's diagnostic.
GEWEKE_CANDIDATES = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5)


def geweke_diagnostic(values: np.ndarray) -> tuple[int, float, bool]:
    """Smallest candidate burn-in with |z| < 2; capped at half the series.

    Returns ``(burn_in, z, capped)`` where ``capped`` flags that no candidate
    below 50% passed and the cap was applied.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 100:
        raise ValidationError(f"Geweke diagnostic needs >= 100 samples, got {n}")
    z = math.nan
    for frac in GEWEKE_CANDIDATES:
        burn = int(frac * n)
        z = geweke_z(values[burn:])
        if abs(z) < 2.0:
            return burn, z, False
    return int(0.5 * n), z, True


def geweke_burn_in(series: MeasurementSeries | np.ndarray) -> int:
    """Burn-in (in MCS) chosen by Geweke's diagnostic on the eps_avg series."""
    values = series.eps_avg if isinstance(series, MeasurementSeries) else series
    burn, _, _ = geweke_diagnostic(values)
    return burn


def batch_means_stderr(x: np.ndarray, min_batches: int = 32) -> float:
    """Autocorrelation-aware standard error of the mean via batch means.

    The batch size doubles from 1 while at least ``min_batches`` complete
    batches remain.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        return math.nan
    size = 1
    while n // (2 * size) >= min_batches:
        size *= 2
    nb = n // size
    means = x[: nb * size].reshape(nb, size).mean(axis=1)
    if nb < 2:
        return math.nan
    return float(means.std(ddof=1) / math.sqrt(nb))


@dataclass
class EquilibriumResult:
    eps_c: float
    stderr: float
    series: MeasurementSeries = field(repr=False)
    t_burn: int
    geweke_z: float
    capped_burn_in: bool


def equilibrium_run(
    inst: Instance,
    params: PimcParams,
    seed: int,
    chain_index: int = 0,
) -> EquilibriumResult:
    """Sample eps_avg for t_run MCS at fixed (Gamma, T, P) from a random start.

    Burn-in is chosen by Geweke's diagnostic unless ``params.t_burn`` pins it;
    if the diagnostic would discard more than 50% of the iterations the run is
    flagged (``capped_burn_in``) and the capped estimate is still returned.
    """
    stream = derive_seed(seed, chain_index)
    cfg = PathConfig.random(inst.length, params.trotter_p, derive_seed(stream, 1))
    state = xoshiro_state(derive_seed(stream, 2))
    beta_p, p_sp, p_temp, frozen = _kernel_args(inst, params)
    n = params.t_run
    eps_avg = np.empty(n, np.float64)
    eps_min = np.empty(n, np.float64)
    kstar = np.empty(n, np.int64)
    mck.run_chain(
        cfg.spins,
        inst.couplings,
        beta_p,
        p_sp,
        p_temp,
        frozen,
        _MOVE_IDS[params.move_family],
        n,
        state,
        True,
        eps_avg,
        eps_min,
        kstar,
    )
    series = MeasurementSeries(np.arange(1, n + 1), eps_avg, eps_min)
    capped = False
    z = math.nan
    if params.t_burn is not None:
        burn = min(params.t_burn, n - 1)
        if n >= 100:
            z = geweke_z(eps_avg[burn:])
    elif n >= 100:
        burn, z, capped = geweke_diagnostic(eps_avg)
    else:
        burn = 0
    kept = eps_avg[burn:]
    return EquilibriumResult(
        eps_c=float(kept.mean()),
        stderr=batch_means_stderr(kept),
        series=series,
        t_burn=burn,
        geweke_z=z,
        capped_burn_in=capped,
    )
