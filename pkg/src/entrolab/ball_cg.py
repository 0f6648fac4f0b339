"""Reflected diffusion in the unit n-ball and its radial coarse-graining.

The microscopic process is flat diffusion dX = -grad V(X) dt + sqrt(2/beta) dW
kept inside the ball by radial mirror reflection, with V(x) = Vtilde(|x|).
Projecting to the radius y = |X| yields a Markov process whose drift
(n-1)/(beta y) - Vtilde'(y) is purely entropic when the potential vanishes:
the (n-1) log y entropy of the level sets pushes paths outward.  This module
simulates the ball process, projects it, and estimates drift and invariant
density for comparison with those closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .generic_core import ScalarField
from .generic_sde import PathEnsemble, SdeRunConfig, _run_blocks
from .rng import path_generator
from .stats import BinnedRegression, Histogram1D, binned_regression

__all__ = [
    "BallDiffusionParams",
    "RadialEnsemble",
    "simulate_ball",
    "coarse_grain_radius",
    "entropy_Sn",
    "estimate_drift",
    "invariant_density_check",
    "pdelta_mass_radial",
    "pdelta_shell_estimate",
    "scaling_limit_demo",
    "stationary_start",
]


@dataclass(frozen=True)
class BallDiffusionParams:
    """Dimension, inverse temperature, optional radial potential and run grid.

    Vtilde, when present, must carry an analytic ``gradient`` built from
    numpy ufuncs (it is applied to whole radius arrays).
    """

    n: int
    beta: float
    dt: float
    T: float
    n_paths: int
    seed: int
    Vtilde: Optional[ScalarField] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.dt > 1e-3 / self.beta:
            raise ValueError("dt must be <= 1e-3/beta for the reflected walk")
        if self.Vtilde is not None:
            if self.Vtilde.gradient is None:
                raise ValueError("radial potential needs an analytic derivative")
            grid = np.linspace(0.0, 1.0, 17)
            if not np.all(np.isfinite(_radial_eval(self.Vtilde.value, grid))):
                raise ValueError("radial potential must be finite on [0,1]")

    def run_config(self) -> SdeRunConfig:
        return SdeRunConfig(dt=self.dt, T=self.T, n_paths=self.n_paths, seed=self.seed)


@dataclass(frozen=True)
class RadialEnsemble:
    """Radial paths y_t = |X_t| on the stored grid, all values in [0,1]."""

    times: np.ndarray
    radii: np.ndarray  # (n_paths, n_stored)
    n: int
    beta: float

    def __post_init__(self) -> None:
        if self.radii.shape[1] != len(self.times):
            raise ValueError("radii/time grid mismatch")
        if np.nanmax(self.radii) > 1.0 + 1e-12 or np.nanmin(self.radii) < 0.0:
            raise ValueError("radii must lie in [0,1]")

    @property
    def dt_stored(self) -> float:
        return float(self.times[1] - self.times[0])


def _radial_eval(f, y: np.ndarray) -> np.ndarray:
    """Apply a radial callable elementwise whether it was written vectorized
    (y -> array) or pointwise on length-1 states (y -> float)."""
    y = np.asarray(y, dtype=float)
    try:
        out = np.asarray(f(y), dtype=float)
        if out.shape == y.shape:
            return out
    except (TypeError, IndexError, ValueError):
        pass
    flat = np.ravel(y)
    return np.array([float(f(np.array([v]))) for v in flat]).reshape(y.shape)


def _reflect(Z: np.ndarray) -> np.ndarray:
    """Radial mirror at the unit sphere: radius r > 1 becomes 2 - r, direction
    kept.  Folded twice to absorb pathological overshoots past radius 2."""
    r = np.linalg.norm(Z, axis=1)
    mask = r > 1.0
    if mask.any():
        rr = r[mask]
        y = np.abs(2.0 - rr)
        y = np.where(y > 1.0, np.abs(2.0 - y), y)
        Z[mask] *= (y / rr)[:, None]
    return Z


def simulate_ball(
    params: BallDiffusionParams,
    *,
    x0: Optional[np.ndarray] = None,
    store_every: int = 1,
    n_threads: int = 1,
) -> PathEnsemble:
    """Euler-Maruyama ensemble of the reflected ball diffusion.

    All paths start at the origin unless ``x0`` gives a shared start of shape
    (n,) or per-path starts of shape (n_paths, n).
    """
    n = params.n
    dV = params.Vtilde.gradient if params.Vtilde is not None else None

    def drift(Z: np.ndarray) -> np.ndarray:
        if dV is None:
            return np.zeros_like(Z)
        r = np.linalg.norm(Z, axis=1)
        safe = np.maximum(r, 1e-300)
        return -(_radial_eval(dV, r) / safe)[:, None] * Z

    root = np.sqrt(1.0 / params.beta)

    def sigma(Z: np.ndarray) -> np.ndarray:
        eye = root * np.eye(n)
        return np.broadcast_to(eye, (Z.shape[0], n, n))

    z0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    return _run_blocks(
        drift, sigma, z0, params.run_config(), n, "euler", False, 1.0,
        store_every, _reflect, n_threads, 4096,
    )


def stationary_start(params: BallDiffusionParams, seed_offset: int = 1) -> np.ndarray:
    """Per-path starting points drawn from the invariant law: radius from the
    density y^{n-1} e^{-beta Vtilde(y)} by inverse CDF on a fine grid, uniform
    direction.  Uses a stream disjoint from the path streams."""
    rng = path_generator(params.seed ^ 0x5EED, 2**40 + seed_offset)
    grid = np.linspace(0.0, 1.0, 4001)
    dens = grid ** (params.n - 1)
    if params.Vtilde is not None:
        dens = dens * np.exp(-params.beta * _radial_eval(params.Vtilde.value, grid))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    u = rng.uniform(size=params.n_paths)
    radii = np.interp(u, cdf, grid)
    dirs = rng.standard_normal((params.n_paths, params.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return radii[:, None] * dirs


def coarse_grain_radius(ens: PathEnsemble, n: int, beta: float) -> RadialEnsemble:
    """Project an ensemble in R^n to its radial paths (shared grid)."""
    radii = np.linalg.norm(ens.paths, axis=2)
    return RadialEnsemble(ens.times, radii, n, beta)


def entropy_Sn(n: int, y) -> tuple:
    """Level-set entropy (n-1) log y and its derivative (n-1)/y for y > 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("entropy_Sn needs y > 0")
    val = (n - 1) * np.log(y)
    der = (n - 1) / y
    if val.ndim == 0:
        return float(val), float(der)
    return val, der


def estimate_drift(
    rens: RadialEnsemble,
    edges: np.ndarray,
    lag: int = 1,
    burn_in: float = 0.0,
) -> BinnedRegression:
    """Binned conditional mean of (y_{t+lag} - y_t)/(lag dt) given y_t.

    Pairs whose base time falls inside the burn-in fraction are discarded;
    bins with fewer than 100 pairs are flagged unreliable.  The increment
    spacing is lag * stored stride, and the estimator carries an O(spacing)
    bias, so keep the spacing well under the drift's variation scale.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    y = rens.radii
    i0 = int(np.ceil(burn_in * (y.shape[1] - 1)))
    base = y[:, i0:-lag] if lag > 0 else y[:, i0:]
    incr = (y[:, i0 + lag :] - base) / (lag * rens.dt_stored)
    return binned_regression(base.ravel(), incr.ravel(), edges, count_floor=100)


def invariant_density_check(
    rens: RadialEnsemble,
    params: BallDiffusionParams,
    edges: np.ndarray,
    burn_in: float = 0.5,
) -> float:
    """L1 distance between the pooled radial histogram (after burn-in) and
    the predicted density proportional to y^{n-1} e^{-beta Vtilde(y)}."""
    i0 = int(np.ceil(burn_in * (rens.radii.shape[1] - 1)))
    pool = rens.radii[:, i0:].ravel()
    hist = Histogram1D.from_samples(pool[np.isfinite(pool)], edges)

    def predicted(y: np.ndarray) -> np.ndarray:
        dens = y ** (params.n - 1)
        if params.Vtilde is not None:
            dens = dens * np.exp(-params.beta * _radial_eval(params.Vtilde.value, y))
        return dens

    return hist.l1_distance(predicted(hist.centers))


def _log_ball_volume(n: int) -> float:
    return 0.5 * n * np.log(np.pi) - gammaln(0.5 * n + 1.0)


def pdelta_mass_radial(n: int, y: float) -> tuple[float, float]:
    """Exact level-set mass n omega_n y^{n-1} of the radius map and its log."""
    if y <= 0:
        raise ValueError("pdelta_mass_radial needs y > 0")
    log_mass = np.log(n) + _log_ball_volume(n) + (n - 1) * np.log(y)
    return float(np.exp(log_mass)), float(log_mass)


def pdelta_shell_estimate(n: int, y: float, h: float) -> float:
    """One-sided shell approximation omega_n ((y+h)^n - y^n)/h of the
    level-set mass; converges to the closed form at rate O(h)."""
    if y <= 0 or h <= 0:
        raise ValueError("need y > 0 and h > 0")
    omega = np.exp(_log_ball_volume(n))
    return float(omega * ((y + h) ** n - y**n) / h)


def scaling_limit_demo(
    beta_inf: float,
    y0: float,
    n_list: list[int],
    T: float = 0.3,
    n_paths: int = 32,
    seed: int = 11,
    store_every: int = 10,
) -> list[float]:
    """Median sup-distance between radial paths at beta_n = beta_inf * n and
    the limiting ODE radius y(t) = sqrt(y0^2 + 2t/beta_inf), per n.

    The horizon must keep the ODE inside the ball; distances decrease along
    an increasing n_list as both noise and the 1/n drift bias shrink.
    """
    if not 0.0 < y0 < 1.0:
        raise ValueError("y0 must lie in (0,1)")
    if np.sqrt(y0**2 + 2.0 * T / beta_inf) >= 1.0:
        raise ValueError("horizon too long: ODE radius reaches the boundary")
    out = []
    for n in n_list:
        beta_n = beta_inf * n
        dt = min(1e-3 / beta_n, T / 100.0)
        steps = int(np.ceil(T / dt))
        steps += (-steps) % store_every
        dt = T / steps
        params = BallDiffusionParams(
            n=n, beta=beta_n, dt=dt, T=T, n_paths=n_paths, seed=seed
        )
        x0 = np.zeros(n)
        x0[0] = y0
        ens = simulate_ball(params, x0=x0, store_every=store_every)
        rens = coarse_grain_radius(ens, n, beta_n)
        ref = np.sqrt(y0**2 + 2.0 * rens.times / beta_inf)
        sup = np.abs(rens.radii - ref[None, :]).max(axis=1)
        out.append(float(np.median(sup)))
    return out
