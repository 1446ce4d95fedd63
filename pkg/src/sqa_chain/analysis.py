"""Post-processing fits: effective temperature, power laws, logarithmic laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, ValidationError


@dataclass
class FitResult:
    """A fitted parameter (scalar or pair) with uncertainty and fit window."""

    parameter: float | tuple[float, float]
    stderr: float | tuple[float, float] | None
    window: tuple[float, float]
    residual_rms: float  # relative to the data scale
    n_points: int = 0

    def __post_init__(self):
        lo, hi = self.window
        if not lo < hi:
            raise ValidationError(f"empty fit window {self.window}")
        if self.residual_rms < 0:
            raise ValidationError("residual RMS must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter
            if not isinstance(self.parameter, tuple)
            else list(self.parameter),
            "stderr": self.stderr
            if not isinstance(self.stderr, tuple)
            else list(self.stderr),
            "window": list(self.window),
            "residual_rms": self.residual_rms,
            "n_points": self.n_points,
        }


def _golden_section(f, a, b, tol=1e-12, max_iter=200):
    """Minimize a unimodal scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(max_iter):
        if b - a < tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc < fd else d
    return x, min(fc, fd)


def fit_teff(
    trajectory,
    curve_source,
    gamma_window: tuple[float, float] = (0.0, 1.5),
    bracket: tuple[float, float] = (0.01, 10.0),
) -> FitResult:
    """Fit the effective temperature of a dynamical trajectory.

    ``trajectory`` is a list of records with ``gamma`` and ``eps_avg``
    attributes; ``curve_source`` maps a temperature to an
    :class:`~sqa_chain.fermion.EquilibriumCurve`.  Minimizes the sum of
    squared differences between the trajectory and the equilibrium curve over
    the gamma window, by a grid-seeded golden-section search in T.
    """
    gammas = np.array([r.gamma for r in trajectory], dtype=np.float64)
    eps = np.array([r.eps_avg for r in trajectory], dtype=np.float64)
    lo, hi = gamma_window
    mask = (gammas >= lo) & (gammas <= hi)
    gammas, eps = gammas[mask], eps[mask]
    if gammas.size < 3:
        raise ValidationError("too few trajectory points inside the gamma window")
    if gammas.max() - gammas.min() < 0.5:
        raise ValidationError(
            "trajectory gamma range narrower than 0.5; cannot constrain T_eff"
        )

    def sse(temperature: float) -> float:
        curve = curve_source(temperature)
        r = eps - curve.eps_c(gammas)
        return float(r @ r)

    t_lo, t_hi = bracket
    for attempt in range(2):
        grid = np.geomspace(t_lo, t_hi, 33)
        vals = np.array([sse(t) for t in grid])
        j = int(np.argmin(vals))
        if 0 < j < grid.size - 1:
            break
        # widen once, then give up
        if attempt == 1:
            raise FitError(
                f"T_eff objective minimized at the bracket edge T={grid[j]:.4g}; "
                "no interior minimum found",
                best=float(grid[j]),
            )
        t_lo, t_hi = t_lo / 10.0, t_hi * 10.0
    t_star, _ = _golden_section(sse, grid[j - 1], grid[j + 1])
    n = eps.size
    s_min = sse(t_star)
    # 1-sigma from the quadratic shape of the objective around the minimum
    h = max(1e-7, 1e-4 * t_star)
    curv = (sse(t_star + h) - 2.0 * s_min + sse(t_star - h)) / h**2
    if curv > 0 and n > 1:
        sigma = math.sqrt(max(2.0 * (s_min / (n - 1)) / curv, 0.0))
    else:
        sigma = math.nan
    scale = math.sqrt(float(eps @ eps) / n)
    rel_rms = math.sqrt(s_min / n) / scale if scale > 0 else 0.0
    return FitResult(
        parameter=float(t_star),
        stderr=sigma,
        window=(lo, hi),
        residual_rms=rel_rms,
        n_points=n,
    )


def central_decade(taus) -> tuple[float, float]:
    """Default fit window: one decade centered on the log-midpoint of the data."""
    taus = np.asarray(taus, dtype=np.float64)
    if np.any(taus <= 0):
        raise ValidationError("annealing times must be positive")
    mid = 0.5 * (np.log10(taus.min()) + np.log10(taus.max()))
    return 10 ** (mid - 0.5), 10 ** (mid + 0.5)


def fit_power_law(points, window: tuple[float, float] | None = None) -> FitResult:
    """Least-squares line on (log tau, log eps); returns the exponent.

    ``points`` is a sequence of (tau, eps) pairs; ``window`` restricts tau
    (default: the central decade of the available tau values).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be (tau, eps) pairs")
    taus, eps = pts[:, 0], pts[:, 1]
    if window is None:
        window = central_decade(taus)
    lo, hi = window
    mask = (taus >= lo) & (taus <= hi)
    taus, eps = taus[mask], eps[mask]
    if taus.size < 4:
        raise ValidationError(
            f"need >= 4 points inside the window [{lo:.4g}, {hi:.4g}], "
            f"got {taus.size}"
        )
    if np.any(eps <= 0):
        raise ValidationError("nonpositive eps inside the fit window")
    x = np.log(taus)
    y = np.log(eps)
    n = x.size
    xbar = x.mean()
    sxx = float((x - xbar) @ (x - xbar))
    slope = float((x - xbar) @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    dof = max(n - 2, 1)
    s2 = float(resid @ resid) / dof
    stderr = math.sqrt(s2 / sxx)
    return FitResult(
        parameter=slope,
        stderr=stderr,
        window=(lo, hi),
        residual_rms=math.sqrt(float(resid @ resid) / n),
        n_points=n,
    )


def fit_log_law(points, max_iter: int = 200) -> FitResult:
    """Fit eps = [log(gamma tau)]^(-xi); returns (gamma, xi).

    Profile least squares in log space: for fixed a = log(gamma) the optimal
    xi is closed-form, leaving a 1-d minimization over a seeded by a coarse
    grid.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be (tau, eps) pairs")
    if pts.shape[0] < 5:
        raise ValidationError("need >= 5 points for the logarithmic-law fit")
    taus, eps = pts[:, 0], pts[:, 1]
    if np.any(taus <= 0) or np.any(eps <= 0):
        raise ValidationError("tau and eps must be positive")
    lt = np.log(taus)
    ly = np.log(eps)

    def profile(a: float) -> tuple[float, float]:
        w = np.log(lt + a)  # log log(gamma tau); requires lt + a > 0
        denom = float(w @ w)
        if denom == 0.0:
            return math.inf, 0.0
        xi = -float(w @ ly) / denom
        r = ly + xi * w
        return float(r @ r), xi

    a_min = -lt.min()  # need log(gamma tau) > 0 on all points
    grid = a_min + np.geomspace(1e-3, 1e3, 121)
    vals = np.array([profile(a)[0] for a in grid])
    j = int(np.argmin(vals))
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 1)]
    a_star, sse = _golden_section(lambda a: profile(a)[0], lo, hi, max_iter=max_iter)
    _, xi = profile(a_star)
    gamma = math.exp(a_star)
    w = np.log(lt + a_star)
    resid = ly + xi * w
    if not np.isfinite(sse):
        raise FitError("logarithmic-law fit did not converge", best=(gamma, xi))
    # Gauss-Newton covariance in (a, xi)
    jac = np.column_stack([xi / (lt + a_star), w])
    n = lt.size
    dof = max(n - 2, 1)
    s2 = float(resid @ resid) / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
        sig_a, sig_xi = math.sqrt(max(cov[0, 0], 0)), math.sqrt(max(cov[1, 1], 0))
    except np.linalg.LinAlgError:
        sig_a, sig_xi = math.nan, math.nan
    return FitResult(
        parameter=(gamma, xi),
        stderr=(gamma * sig_a, sig_xi),
        window=(float(taus.min()), float(taus.max())),
        residual_rms=math.sqrt(float(resid @ resid) / n),
        n_points=n,
    )
