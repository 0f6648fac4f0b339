"""Stochastic integration of systems with conservative-plus-entropic drift.

The SDE integrated here is

    dz = [J grad E + K grad S + (1/a) div(a K)] dt + sqrt(2) Sigma dW,

whose stationary densities are proportional to e^S a (and f(E) e^S a for any
f when E is conserved along paths).  Ensembles are reproducible bitwise for
a given seed at any degree of parallelism: each path owns a counter-based
stream keyed by (seed, path index) and results are merged by path index.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .generic_core import GenericSystem, ScalarField
from .rng import PathStreams
from .stats import Histogram1D

__all__ = [
    "SdeRunConfig",
    "PathEnsemble",
    "ParticleSystemSpec",
    "integrate_sde",
    "check_as_energy_conservation",
    "EnergyDriftSummary",
    "stationary_histogram",
    "simulate_particles",
    "kl_to_stationary_checkpoints",
    "ornstein_uhlenbeck_system",
]

_DIVERGENCE_NORM = 1e8
_DIVERGENCE_BUDGET = 1e-3  # run fails if more than this fraction of paths blow up


@dataclass(frozen=True)
class SdeRunConfig:
    """Step size, horizon, ensemble size and seed of one stochastic run."""

    dt: float
    T: float
    n_paths: int
    seed: int

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        steps = self.T / self.dt
        if steps < 1 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError("T/dt must be a positive integer number of steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class PathEnsemble:
    """Trajectories on a shared stored grid.

    paths has shape (n_paths, n_stored, d); entries are NaN from the moment
    a path diverges.  ``stream_ids`` records the Philox stream feeding each
    path and ``noise_signs`` the sign applied to its draws (antithetic pairs
    share a stream with opposite signs).
    """

    times: np.ndarray
    paths: np.ndarray
    seed: int
    stream_ids: np.ndarray
    noise_signs: np.ndarray
    diverged: np.ndarray
    antithetic: bool = False

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def n_diverged(self) -> int:
        return int(self.diverged.sum())

    def require_healthy(self) -> None:
        if self.n_diverged > _DIVERGENCE_BUDGET * self.n_paths:
            raise FloatingPointError(
                f"{self.n_diverged}/{self.n_paths} paths diverged; dt too large for the drift"
            )

    def alive_paths(self) -> np.ndarray:
        return self.paths[~self.diverged]

    def pooled(self, burn_in: float = 0.0) -> np.ndarray:
        """States of non-diverged paths with the first ``burn_in`` fraction of
        the horizon discarded, flattened to (n_samples, d)."""
        if not 0.0 <= burn_in < 1.0:
            raise ValueError("burn_in must lie in [0, 1)")
        i0 = int(np.ceil(burn_in * (len(self.times) - 1)))
        block = self.paths[~self.diverged, i0:, :]
        return block.reshape(-1, self.paths.shape[2])


def _vector_ops(sys: GenericSystem):
    """Vectorized (drift, sigma) closures for the full SDE drift.

    Prefers closures attached to the system (attributes ``vec_drift`` /
    ``vec_sigma`` mapping (N,d) arrays); otherwise falls back to looping the
    per-state fields, which is fine for small ensembles.
    """
    vec_drift = getattr(sys, "vec_drift", None)
    vec_sigma = getattr(sys, "vec_sigma", None)
    if vec_drift is not None and vec_sigma is not None:
        return vec_drift, vec_sigma

    m = sys.noise_dim

    def drift_loop(Z: np.ndarray) -> np.ndarray:
        out = np.empty_like(Z)
        for i, z in enumerate(Z):
            out[i] = sys.drift_deterministic(z) + _div_ak(sys, z)
        return out

    def sigma_loop(Z: np.ndarray) -> np.ndarray:
        out = np.empty((Z.shape[0], Z.shape[1], m))
        for i, z in enumerate(Z):
            out[i] = sys.Sigma(z)
        return out

    return drift_loop, sigma_loop


def _div_ak(sys: GenericSystem, z: np.ndarray) -> np.ndarray:
    """(1/a) div(a K) analytically when available, else centered differences
    columnwise on aK with step 1e-4*(1+|z|)."""
    if sys.divAK is not None:
        return np.asarray(sys.divAK(z), dtype=float)
    h = 1e-4 * (1.0 + float(np.linalg.norm(z)))
    a = sys.a
    av = a(z) if a is not None else 1.0
    d = sys.d
    out = np.zeros(d)
    for j in range(d):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        ap = a(zp) if a is not None else 1.0
        am = a(zm) if a is not None else 1.0
        out += (ap * sys.K(zp)[:, j] - am * sys.K(zm)[:, j]) / (2.0 * h)
    return out / av


def _simulate_block(
    drift: Callable[[np.ndarray], np.ndarray],
    sigma: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    cfg: SdeRunConfig,
    path_lo: int,
    path_hi: int,
    m: int,
    scheme: str,
    antithetic: bool,
    noise_sign: float,
    store_every: int,
    post_step: Optional[Callable[[np.ndarray], np.ndarray]],
    out: np.ndarray,
    diverged: np.ndarray,
    block_steps: int = 512,
) -> None:
    B = path_hi - path_lo
    d = z0.shape[-1]
    dt = cfg.dt
    sqdt = np.sqrt(dt)
    if antithetic:
        # pair 2p/2p+1 shares stream p with opposite signs; blocks are
        # aligned to pair boundaries by the caller
        streams = PathStreams(cfg.seed, range(path_lo // 2, (path_hi + 1) // 2))
        signs = np.where(np.arange(path_lo, path_hi) % 2 == 0, 1.0, -1.0)
    else:
        streams = PathStreams(cfg.seed, range(path_lo, path_hi))
        signs = np.ones(B)
    signs = signs[:, None] * noise_sign

    if z0.ndim == 1:
        z = np.broadcast_to(z0, (B, d)).copy()
    else:
        z = z0[path_lo:path_hi].copy()
    alive = np.ones(B, dtype=bool)
    out[path_lo:path_hi, 0] = z
    step = 0
    store_idx = 1
    n_steps = cfg.n_steps
    while step < n_steps:
        k = min(block_steps, n_steps - step)
        raw = streams.normals(k, m)
        if antithetic:
            raw = np.repeat(raw, 2, axis=0)[:B]
        for j in range(k):
            rows = np.flatnonzero(alive)
            if rows.size:
                za = z[rows]
                dWa = signs[rows] * raw[rows, j, :] * sqdt
                b = drift(za)
                sg = sigma(za)
                incr = b * dt + np.sqrt(2.0) * np.einsum("pij,pj->pi", sg, dWa)
                if scheme == "milstein":
                    incr += _milstein_correction(sigma, za, sg, dWa, dt)
                zn = za + incr
                if post_step is not None:
                    zn = post_step(zn)
                norms = np.linalg.norm(zn, axis=1)
                bad = ~np.isfinite(norms) | (norms > _DIVERGENCE_NORM)
                if bad.any():
                    alive[rows[bad]] = False
                    diverged[path_lo + rows[bad]] = True
                    zn[bad] = np.nan
                z[rows] = zn
            step_global = step + j + 1
            if step_global % store_every == 0:
                out[path_lo:path_hi, store_idx] = z
                store_idx += 1
        step += k


def _milstein_correction(
    sigma: Callable[[np.ndarray], np.ndarray],
    z: np.ndarray,
    sg: np.ndarray,
    dW: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Strong-order-1 correction 0.5 (a . grad) a (dW^2 - dt) for scalar noise,
    a = sqrt(2) Sigma.  The directional derivative is a centered difference
    along a, which is exact for the affine mobilities shipped here."""
    if sg.shape[2] != 1:
        raise ValueError("milstein scheme implemented for scalar noise only")
    a = np.sqrt(2.0) * sg[:, :, 0]
    norms = np.linalg.norm(a, axis=1)
    h = 1e-6 * (1.0 + np.linalg.norm(z, axis=1))
    safe = norms > 0
    unit = np.zeros_like(a)
    unit[safe] = a[safe] / norms[safe, None]
    ap = np.sqrt(2.0) * sigma(z + h[:, None] * unit)[:, :, 0]
    am = np.sqrt(2.0) * sigma(z - h[:, None] * unit)[:, :, 0]
    dd = (ap - am) / (2.0 * h[:, None]) * norms[:, None]
    return 0.5 * dd * (dW[:, 0, None] ** 2 - dt)


def _run_blocks(
    drift,
    sigma,
    z0,
    cfg: SdeRunConfig,
    m: int,
    scheme: str,
    antithetic: bool,
    noise_sign: float,
    store_every: int,
    post_step,
    n_threads: int,
    block_paths: int,
) -> PathEnsemble:
    n_steps = cfg.n_steps
    if n_steps % store_every != 0:
        raise ValueError("store_every must divide the number of steps")
    if antithetic and cfg.n_paths % 2 != 0:
        raise ValueError("antithetic ensembles need an even n_paths")
    d = z0.shape[-1]
    n_stored = n_steps // store_every + 1
    out = np.empty((cfg.n_paths, n_stored, d))
    diverged = np.zeros(cfg.n_paths, dtype=bool)
    if antithetic and block_paths % 2 != 0:
        block_paths += 1
    ranges = [
        (lo, min(lo + block_paths, cfg.n_paths)) for lo in range(0, cfg.n_paths, block_paths)
    ]

    def work(rg):
        _simulate_block(
            drift, sigma, z0, cfg, rg[0], rg[1], m, scheme, antithetic, noise_sign,
            store_every, post_step, out, diverged,
        )

    if n_threads > 1 and len(ranges) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as ex:
            list(ex.map(work, ranges))
    else:
        for rg in ranges:
            work(rg)

    times = np.arange(n_stored) * (cfg.dt * store_every)
    if antithetic:
        stream_ids = np.arange(cfg.n_paths) // 2
        signs = np.where(np.arange(cfg.n_paths) % 2 == 0, 1.0, -1.0) * noise_sign
    else:
        stream_ids = np.arange(cfg.n_paths)
        signs = np.full(cfg.n_paths, noise_sign)
    ens = PathEnsemble(times, out, cfg.seed, stream_ids, signs, diverged, antithetic)
    ens.require_healthy()
    return ens


def integrate_sde(
    sys: GenericSystem,
    z0: np.ndarray,
    cfg: SdeRunConfig,
    *,
    scheme: str = "euler",
    antithetic: bool = False,
    noise_sign: float = 1.0,
    store_every: int = 1,
    n_threads: int = 1,
    block_paths: int = 4096,
) -> PathEnsemble:
    """Euler-Maruyama ensemble of the full SDE for ``sys``.

    scheme "euler" is the default weak-order-1 step; "milstein" adds the
    strong-order-1 correction for scalar-noise systems (used by the
    pathwise energy-conservation diagnostics, where the Euler scheme's
    O(sqrt(dt)) energy martingale would mask the O(dt) drift).
    ``noise_sign=-1`` runs the noise-negation twin of the same ensemble.
    """
    if scheme not in ("euler", "milstein"):
        raise ValueError("scheme must be 'euler' or 'milstein'")
    drift, sigma = _vector_ops(sys)
    z0 = np.asarray(z0, dtype=float)
    return _run_blocks(
        drift, sigma, z0, cfg, sys.noise_dim, scheme, antithetic, noise_sign,
        store_every, None, n_threads, block_paths,
    )


@dataclass(frozen=True)
class EnergyDriftSummary:
    """Mean/max over paths of the per-path max_t |E(z_t) - E(z_0)|."""

    mean_drift: float
    max_drift: float
    n_paths: int

    def ratio_to(self, other: "EnergyDriftSummary") -> float:
        return self.mean_drift / other.mean_drift


def check_as_energy_conservation(ens: PathEnsemble, sys: GenericSystem) -> EnergyDriftSummary:
    """Per-path energy-drift summary of an ensemble.

    For antithetic ensembles the reduction sums each pair first; negating
    every noise then permutes paths within pairs, so the reported statistics
    are invariant under the noise-negation twin to within rounding.
    """
    paths = ens.paths[~ens.diverged]
    # evaluate E on the stored grid; vectorized closure when present
    vec_E = getattr(sys, "vec_E", None)
    if vec_E is not None:
        E = vec_E(paths.reshape(-1, paths.shape[2])).reshape(paths.shape[0], paths.shape[1])
    else:
        E = np.apply_along_axis(sys.E, 2, paths)
    drift = np.abs(E - E[:, :1]).max(axis=1)
    if ens.antithetic and drift.size % 2 == 0:
        pair_sums = drift.reshape(-1, 2).sum(axis=1)
        mean = float(pair_sums.sum() / drift.size)
    else:
        mean = float(drift.mean())
    return EnergyDriftSummary(mean, float(drift.max()), int(drift.size))


def stationary_histogram(
    ens: PathEnsemble,
    coordinate: int | Callable[[np.ndarray], np.ndarray],
    burn_in: float,
    edges: np.ndarray,
    mode: str = "density",
) -> Histogram1D:
    """Histogram of one coordinate (or scalar projection) pooled over the
    post-burn-in section of every non-diverged path."""
    pool = ens.pooled(burn_in)
    if pool.size == 0:
        raise ValueError("empty pool after burn-in")
    vals = pool[:, coordinate] if isinstance(coordinate, int) else coordinate(pool)
    return Histogram1D.from_samples(vals, edges, mode)


@dataclass(frozen=True)
class ParticleSystemSpec:
    """Interacting particles in R^d with confinement V, optional even pair
    interaction psi (its gradient needs a vectorized closure) and constant
    mobility Sigma."""

    d: int
    n: int
    V: ScalarField
    psi: Optional[ScalarField] = None
    Sigma: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.psi is not None:
            rng = np.random.Generator(np.random.Philox(key=np.array([7, 0], dtype=np.uint64)))
            pts = rng.standard_normal((16, self.d))
            for x in pts:
                if abs(self.psi(x) - self.psi(-x)) > 1e-10 * (1.0 + abs(self.psi(x))):
                    raise ValueError("pair interaction must be even")

    def sigma_matrix(self) -> np.ndarray:
        if self.Sigma is None:
            return np.eye(self.d)
        return np.asarray(self.Sigma, dtype=float)


def _grad_vec(field: ScalarField, X: np.ndarray) -> np.ndarray:
    g = getattr(field, "gradient_vec", None)
    if g is not None:
        return g(X)
    flat = X.reshape(-1, X.shape[-1])
    out = np.empty_like(flat)
    for i, x in enumerate(flat):
        out[i] = field.grad(x)
    return out.reshape(X.shape)


def simulate_particles(
    spec: ParticleSystemSpec,
    cfg: SdeRunConfig,
    x0: np.ndarray,
    *,
    store_every: int = 1,
    n_threads: int = 1,
) -> PathEnsemble:
    """Ensemble of n-particle systems

        dX_i = -Sigma Sigma^T grad V(X_i) dt - (1/n) sum_j grad psi(X_i - X_j) dt
               + sqrt(2) Sigma dW_i.

    State per path is the flattened (n, d) block; x0 is one configuration
    shared by all paths or an (n_paths, n, d) array.
    """
    n, d = spec.n, spec.d
    Sg = spec.sigma_matrix()
    SSt = Sg @ Sg.T

    def drift(Z: np.ndarray) -> np.ndarray:
        X = Z.reshape(-1, n, d)
        F = -np.einsum("ab,pnb->pna", SSt, _grad_vec(spec.V, X))
        if spec.psi is not None:
            diff = X[:, :, None, :] - X[:, None, :, :]
            F -= _grad_vec(spec.psi, diff).mean(axis=2)
        return F.reshape(Z.shape)

    def sigma(Z: np.ndarray) -> np.ndarray:
        # block-diagonal: each particle gets Sigma; engine contracts (p,i,j)
        P = Z.shape[0]
        out = np.zeros((P, n * d, n * d))
        for i in range(n):
            out[:, i * d : (i + 1) * d, i * d : (i + 1) * d] = Sg
        return out

    # noise enters independently per particle; give the engine the full
    # block-diagonal mobility only once per step via a constant closure
    const_sigma = sigma(np.zeros((1, n * d)))[0]

    def sigma_const(Z: np.ndarray) -> np.ndarray:
        return np.broadcast_to(const_sigma, (Z.shape[0],) + const_sigma.shape)

    z0 = np.asarray(x0, dtype=float)
    if z0.ndim <= 2:
        z0 = z0.reshape(n * d)
    else:
        z0 = z0.reshape(z0.shape[0], n * d)
    return _run_blocks(
        drift, sigma_const, z0, cfg, n * d, "euler", False, 1.0,
        store_every, None, n_threads, 256,
    )


def kl_to_stationary_checkpoints(
    ens: PathEnsemble,
    sys: GenericSystem,
    stationary_density: Callable[[np.ndarray], np.ndarray],
    checkpoints: Sequence[float],
    edges: np.ndarray,
    coordinate: int = 0,
) -> list[float]:
    """Binned KL(empirical law at checkpoint || stationary), shared binning.

    Empty bins are handled by adding 1/(n_paths * n_bins) to every bin before
    normalizing.  Deterministic systems are rejected: with Sigma identically
    zero the path law is singular and the divergence degenerates.
    """
    probe = ens.paths[0, 0]
    if float(np.abs(sys.Sigma(probe)).max()) == 0.0:
        raise ValueError("KL checkpoints are undefined for zero-noise systems")
    cps = list(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < ens.times[0] or cps[-1] > ens.times[-1]:
        raise ValueError("checkpoints must be increasing within [0, T]")
    edges = np.asarray(edges, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    q = stationary_density(centers)
    q = q / q.sum()
    nb = len(centers)
    out = []
    alive = ~ens.diverged
    for t in cps:
        i = int(np.argmin(np.abs(ens.times - t)))
        vals = ens.paths[alive, i, coordinate]
        counts, _ = np.histogram(vals, bins=edges)
        p = counts.astype(float) + 1.0 / (ens.n_paths * nb)
        p = p / p.sum()
        out.append(float(np.sum(p * np.log(p / q))))
    return out


def ornstein_uhlenbeck_system() -> GenericSystem:
    """1-D gradient flow dz = -z dt + sqrt(2) dW as a degenerate bundle:
    E = 0, S = -z^2/2, J = 0, K = 1.  Stationary law is standard normal."""
    from .generic_core import OperatorField, constant_operator

    E = ScalarField(1, value=lambda z: 0.0, gradient=lambda z: np.zeros(1))
    S = ScalarField(1, value=lambda z: -0.5 * float(z[0]) ** 2, gradient=lambda z: -z)
    sysm = GenericSystem(
        d=1,
        E=E,
        S=S,
        J=constant_operator(np.zeros((1, 1))),
        K=constant_operator(np.ones((1, 1))),
        Sigma=constant_operator(np.ones((1, 1))),
        divAK=lambda z: np.zeros(1),
        name="ou",
    )
    object.__setattr__(sysm, "vec_drift", lambda Z: -Z)
    object.__setattr__(sysm, "vec_sigma", lambda Z: np.ones((Z.shape[0], 1, 1)))
    object.__setattr__(sysm, "vec_E", lambda Z: np.zeros(Z.shape[0]))
    return sysm
