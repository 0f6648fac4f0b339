"""Oscillator coupled to a finite harmonic bath, and its coarse-graining.

A 1-D oscillator (Q, P) interacts with n bath modes of frequencies
omega_j = j*domega through a coupling that shifts each mode's position
coordinate by c*Q, c = sqrt(2*gamma/pi).  The total Hamiltonian

    H_total = H_A(Q, P) + 0.5*||z - C_n Z||^2_{H_n},
    ||(q, p)||^2_{H_n} = domega * sum_j (q_j^2 + p_j^2),

is conserved.  Coarse-graining keeps (Q, P) and the renormalized bath energy
e = 0.5*||z - C_n Z||^2_{H_n} - n/beta; in the joint limit domega -> 0,
n*domega -> infinity the triple converges to the damped-oscillator SDE with
friction gamma and temperature 1/beta.  This module samples micro states,
evolves them symplectically, evaluates the memory kernel and fluctuation
process in closed form, and compares coarse-grained statistics against that
limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .generic_core import Trajectory
from .rng import path_generator

__all__ = [
    "HeatBathParams",
    "MicroState",
    "MicroTrajectory",
    "h_A",
    "sample_conditional",
    "sample_conditional_ensemble",
    "sample_stationary_Z",
    "sample_stationary",
    "stationary_log_weight",
    "evolve_micro",
    "evolve_cg_ensemble",
    "coarse_grain",
    "entropy_Snbeta_centered",
    "kappa_n",
    "kappa11_table",
    "kappa_quadrature",
    "kappa_convergence_error",
    "noise_process",
    "NoiseIncrementReport",
    "white_noise_tests",
    "moment_curves",
    "compare_to_limit_sde",
]


@dataclass(frozen=True)
class HeatBathParams:
    """Bath size, spacing, temperature, coupling and oscillator constants.

    delta_omega defaults to 4/sqrt(n), which drives domega -> 0 and
    n*domega -> infinity simultaneously as n grows.  n=0 is allowed as the
    degenerate bathless case and gamma=0 as the uncoupled one.
    """

    n: int
    beta: float
    gamma: float
    k: float = 1.0
    m: float = 1.0
    E0: float = 1.0
    seed: int = 0
    delta_omega: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("mode count must be >= 0")
        if self.beta <= 0 or self.k <= 0 or self.m <= 0:
            raise ValueError("beta, k, m must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.delta_omega is None:
            dw = 4.0 / np.sqrt(self.n) if self.n > 0 else 1.0
            object.__setattr__(self, "delta_omega", dw)
        if self.delta_omega <= 0:
            raise ValueError("delta_omega must be positive")

    @property
    def omegas(self) -> np.ndarray:
        return self.delta_omega * np.arange(1, self.n + 1)

    @property
    def coupling(self) -> float:
        return math.sqrt(2.0 * self.gamma / math.pi)


def h_A(params: HeatBathParams, Z: np.ndarray) -> np.ndarray:
    """Oscillator energy k Q^2/2 + P^2/(2m), batched over leading axes."""
    Z = np.asarray(Z, dtype=float)
    return 0.5 * params.k * Z[..., 0] ** 2 + 0.5 * Z[..., 1] ** 2 / params.m


def _hn_sq(params: HeatBathParams, zeta: np.ndarray) -> np.ndarray:
    return params.delta_omega * np.sum(zeta**2, axis=-1)


@dataclass(frozen=True)
class MicroState:
    """Oscillator state Z=(Q,P) plus bath coordinates relative to the
    coupling center: zeta = (q - c*Q, p), stored as (zeta_q, zeta_p)."""

    Z: np.ndarray
    zeta: np.ndarray  # (2n,), positions then momenta
    params: HeatBathParams

    def __post_init__(self) -> None:
        if not (np.all(np.isfinite(self.Z)) and np.all(np.isfinite(self.zeta))):
            raise ValueError("non-finite micro state")
        if self.zeta.shape != (2 * self.params.n,):
            raise ValueError("bath coordinate count mismatch")

    @property
    def bath_absolute(self) -> np.ndarray:
        """(q, p) in the lab frame: q = zeta_q + c*Q."""
        n = self.params.n
        q = self.zeta[:n] + self.params.coupling * self.Z[0]
        return np.concatenate([q, self.zeta[n:]])

    def h_total(self) -> float:
        return float(h_A(self.params, self.Z) + 0.5 * _hn_sq(self.params, self.zeta))

    def cg(self) -> np.ndarray:
        """(Q, P, e) with e the renormalized bath energy."""
        e = 0.5 * _hn_sq(self.params, self.zeta) - self.params.n / self.params.beta
        return np.array([self.Z[0], self.Z[1], float(e)])


def sample_conditional(
    params: HeatBathParams, Z0: np.ndarray, realization: int = 0
) -> MicroState:
    """Bath draw at fixed oscillator state: uniform on the energy sphere
    ||zeta||^2_{H_n} = 2n/beta + 2(E0 - H_A(Z0))."""
    zeta = sample_conditional_ensemble(params, Z0, 1, antithetic=False, stream_offset=realization)
    return MicroState(np.asarray(Z0, dtype=float), zeta[0], params)


def sample_conditional_ensemble(
    params: HeatBathParams,
    Z0: np.ndarray,
    n_real: int,
    antithetic: bool = False,
    stream_offset: int = 0,
) -> np.ndarray:
    """Independent bath draws as rows of a (n_real, 2n) array.

    With ``antithetic`` the rows come in +g/-g pairs, which cancels every
    odd functional of the bath exactly in pair averages.
    """
    r2 = 2.0 * params.n / params.beta + 2.0 * (params.E0 - float(h_A(params, np.asarray(Z0))))
    if r2 <= 0:
        raise ValueError("infeasible energy: E0 too low for this oscillator state")
    r = math.sqrt(r2)
    dim = 2 * params.n
    out = np.empty((n_real, dim))
    if antithetic:
        if n_real % 2:
            raise ValueError("antithetic sampling needs an even count")
        for pair in range(n_real // 2):
            g = path_generator(params.seed, stream_offset + pair).standard_normal(dim)
            zeta = r * g / (math.sqrt(params.delta_omega) * np.linalg.norm(g))
            out[2 * pair] = zeta
            out[2 * pair + 1] = -zeta
    else:
        for i in range(n_real):
            g = path_generator(params.seed, stream_offset + i).standard_normal(dim)
            out[i] = r * g / (math.sqrt(params.delta_omega) * np.linalg.norm(g))
    return out


def stationary_log_weight(params: HeatBathParams, Z: np.ndarray) -> np.ndarray:
    """Log of the marginal oscillator weight (2n/beta + 2(E0 - H_A))_+^(n-1),
    -inf outside the admissible region.  Batched over leading axes."""
    rad = 2.0 * params.n / params.beta + 2.0 * (params.E0 - h_A(params, Z))
    with np.errstate(divide="ignore", invalid="ignore"):
        lw = np.where(rad > 0, (params.n - 1) * np.log(np.maximum(rad, 1e-300)), -np.inf)
    return lw


def sample_stationary_Z(
    params: HeatBathParams,
    n_samples: int,
    *,
    chains: int = 64,
    burn_in: int = 10_000,
    thin: int = 10,
    proposal_scale: Optional[float] = None,
    stream_offset: int = 2**48,
) -> tuple[np.ndarray, float]:
    """Metropolis-Hastings samples of the oscillator marginal.

    Random-walk proposals with scale 0.5/sqrt(beta k); returns (samples,
    acceptance rate) and warns when acceptance leaves [0.1, 0.7].
    """
    if proposal_scale is None:
        proposal_scale = 0.5 / math.sqrt(params.beta * params.k)
    rng = path_generator(params.seed, stream_offset)
    Z = np.zeros((chains, 2))
    lw = stationary_log_weight(params, Z)
    if not np.all(np.isfinite(lw)):
        raise ValueError("origin not admissible; raise E0")
    kept: list[np.ndarray] = []
    n_kept = 0
    accepted = 0
    proposed = 0
    step = 0
    need = int(np.ceil(n_samples / chains))
    while n_kept < need * chains:
        prop = Z + proposal_scale * rng.standard_normal((chains, 2))
        lw_prop = stationary_log_weight(params, prop)
        logu = np.log(rng.uniform(size=chains))
        acc = logu < (lw_prop - lw)
        Z = np.where(acc[:, None], prop, Z)
        lw = np.where(acc, lw_prop, lw)
        step += 1
        if step > burn_in:
            accepted += int(acc.sum())
            proposed += chains
            if (step - burn_in) % thin == 0:
                kept.append(Z.copy())
                n_kept += chains
    rate = accepted / max(proposed, 1)
    if not 0.1 <= rate <= 0.7:
        warnings.warn(f"MH acceptance rate {rate:.2f} outside [0.1, 0.7]")
    return np.concatenate(kept, axis=0)[:n_samples], rate


def sample_stationary(
    params: HeatBathParams, mh_steps: int = 10_000, proposal_scale: Optional[float] = None
) -> MicroState:
    """One stationary micro state: MH for Z0, then the conditional bath."""
    Z, _ = sample_stationary_Z(
        params, 1, chains=1, burn_in=mh_steps, thin=1, proposal_scale=proposal_scale
    )
    return sample_conditional(params, Z[0], realization=2**32)


@dataclass(frozen=True)
class MicroTrajectory:
    """Oscillator and bath paths on the stored grid."""

    times: np.ndarray
    Z: np.ndarray  # (n_stored, 2)
    zeta: np.ndarray  # (n_stored, 2n)
    params: HeatBathParams


def _half_oscillator_step(
    Z: np.ndarray, s_q: np.ndarray, params: HeatBathParams, h: float
) -> np.ndarray:
    """RK4 on Q' = P/m, P' = -(k + c^2 domega n) Q + c domega s_q with the
    absolute bath-position sum s_q frozen.  Batched over rows of Z."""
    c = params.coupling
    kap = params.k + c * c * params.delta_omega * params.n
    f = c * params.delta_omega * s_q
    m = params.m

    def deriv(Q, P):
        return P / m, -kap * Q + f

    Q, P = Z[..., 0], Z[..., 1]
    k1q, k1p = deriv(Q, P)
    k2q, k2p = deriv(Q + 0.5 * h * k1q, P + 0.5 * h * k1p)
    k3q, k3p = deriv(Q + 0.5 * h * k2q, P + 0.5 * h * k2p)
    k4q, k4p = deriv(Q + h * k3q, P + h * k3p)
    out = np.empty_like(Z)
    out[..., 0] = Q + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
    out[..., 1] = P + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    return out


def _strang_step(
    Z: np.ndarray,
    zq: np.ndarray,
    zp: np.ndarray,
    params: HeatBathParams,
    dt: float,
    cos_t: np.ndarray,
    sin_t: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Strang step: half oscillator (bath frozen in the lab frame),
    exact modewise rotation of zeta (oscillator frozen), half oscillator."""
    c = params.coupling
    n = params.n
    # absolute position sum is the frozen quantity during the Z substep
    s_q = zq.sum(axis=-1) + n * c * Z[..., 0]
    Z1 = _half_oscillator_step(Z, s_q, params, 0.5 * dt)
    # moving Q at frozen q shifts every relative position by -c*dQ
    zq = zq + (c * (Z[..., 0] - Z1[..., 0]))[..., None]
    zq, zp = zq * cos_t + zp * sin_t, -zq * sin_t + zp * cos_t
    s_q = zq.sum(axis=-1) + n * c * Z1[..., 0]
    Z2 = _half_oscillator_step(Z1, s_q, params, 0.5 * dt)
    zq = zq + (c * (Z1[..., 0] - Z2[..., 0]))[..., None]
    return Z2, zq, zp


def _check_dt(params: HeatBathParams, dt: float) -> None:
    if params.n > 0 and dt > 0.1 / (params.n * params.delta_omega):
        raise ValueError("dt must be <= 0.1/(n*delta_omega) to resolve the fastest mode")


def evolve_micro(
    state: MicroState, dt: float, T: float, store_every: int = 1
) -> MicroTrajectory:
    """Strang-split evolution of one micro realization.

    The bath rotation substep is the exact flow of the uncoupled modes, so
    only the oscillator coupling limits dt.
    """
    params = state.params
    _check_dt(params, dt)
    n_steps = int(round(T / dt))
    if n_steps % store_every != 0:
        raise ValueError("store_every must divide the step count")
    n = params.n
    omegas = params.omegas
    cos_t, sin_t = np.cos(omegas * dt), np.sin(omegas * dt)
    Z = state.Z.copy()
    zq = state.zeta[:n].copy()
    zp = state.zeta[n:].copy()
    n_stored = n_steps // store_every + 1
    outZ = np.empty((n_stored, 2))
    outz = np.empty((n_stored, 2 * n))
    outZ[0], outz[0, :n], outz[0, n:] = Z, zq, zp
    idx = 1
    for step in range(1, n_steps + 1):
        Z, zq, zp = _strang_step(Z, zq, zp, params, dt, cos_t, sin_t)
        if step % store_every == 0:
            outZ[idx], outz[idx, :n], outz[idx, n:] = Z, zq, zp
            idx += 1
    times = np.arange(n_stored) * (dt * store_every)
    return MicroTrajectory(times, outZ, outz, params)


def evolve_cg_ensemble(
    Z0: np.ndarray,
    zeta0: np.ndarray,
    params: HeatBathParams,
    dt: float,
    T: float,
    store_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Coarse-grained paths (times, (R, n_stored, 3)) for a batch of
    realizations sharing the parameter set.  Z0 is (2,) or (R, 2); zeta0 is
    (R, 2n)."""
    _check_dt(params, dt)
    n_steps = int(round(T / dt))
    if n_steps % store_every != 0:
        raise ValueError("store_every must divide the step count")
    R = zeta0.shape[0]
    n = params.n
    Z = np.broadcast_to(np.asarray(Z0, dtype=float), (R, 2)).copy()
    zq = zeta0[:, :n].copy()
    zp = zeta0[:, n:].copy()
    omegas = params.omegas
    cos_t, sin_t = np.cos(omegas * dt), np.sin(omegas * dt)
    n_stored = n_steps // store_every + 1
    out = np.empty((R, n_stored, 3))

    def write(idx: int) -> None:
        out[:, idx, 0] = Z[:, 0]
        out[:, idx, 1] = Z[:, 1]
        out[:, idx, 2] = 0.5 * params.delta_omega * (
            np.sum(zq**2, axis=1) + np.sum(zp**2, axis=1)
        ) - n / params.beta

    write(0)
    idx = 1
    for step in range(1, n_steps + 1):
        Z, zq, zp = _strang_step(Z, zq, zp, params, dt, cos_t, sin_t)
        if step % store_every == 0:
            write(idx)
            idx += 1
    times = np.arange(n_stored) * (dt * store_every)
    return times, out


def coarse_grain(traj: MicroTrajectory, params: HeatBathParams) -> Trajectory:
    """(Q, P, e) along a micro trajectory; E = H_A + e stays within the
    integrator's H_total drift."""
    e = 0.5 * _hn_sq(params, traj.zeta) - params.n / params.beta
    states = np.column_stack([traj.Z[:, 0], traj.Z[:, 1], e])
    return Trajectory(traj.times, states)


def entropy_Snbeta_centered(n: int, beta: float, e) -> np.ndarray | float:
    """Centered bath entropy (n-1) log(1 + beta e / n).

    Approaches beta*e as n grows; for n >= 2(beta|e| + 1) the gap is at most
    (beta e)^2/n + beta|e|/n.
    """
    e = np.asarray(e, dtype=float)
    arg = 1.0 + beta * e / n
    if np.any(arg <= 0):
        raise ValueError("entropy undefined: 1 + beta e / n must be positive")
    out = (n - 1) * np.log(arg)
    return float(out) if out.ndim == 0 else out


def kappa_n(t: float, params: HeatBathParams) -> np.ndarray:
    """Memory kernel matrix at one time: only the (1,1) entry is nonzero,
    (2 gamma / pi) * domega * sum_j cos(j domega t)."""
    s = float(np.sum(np.cos(params.omegas * t)))
    k11 = (2.0 * params.gamma / math.pi) * params.delta_omega * s
    return np.array([[k11, 0.0], [0.0, 0.0]])


def kappa11_table(ts: np.ndarray, params: HeatBathParams, compensated: bool = False) -> np.ndarray:
    """(1,1) kernel entry on a time grid.  ``compensated`` switches the inner
    cosine sum to exact (fsum) accumulation for the stability cross-check."""
    ts = np.asarray(ts, dtype=float)
    pref = (2.0 * params.gamma / math.pi) * params.delta_omega
    if compensated:
        out = np.array([math.fsum(np.cos(params.omegas * t)) for t in ts])
        return pref * out
    return pref * np.cos(np.outer(ts, params.omegas)).sum(axis=1)


def kappa_quadrature(
    params: HeatBathParams, phi: Callable[[np.ndarray], np.ndarray], ts: np.ndarray
) -> float:
    """Trapezoid quadrature of phi(t) * kappa11(t) over the given grid.
    Refuses grids that cannot resolve the fastest bath oscillation."""
    ts = np.asarray(ts, dtype=float)
    h = float(np.max(np.diff(ts)))
    if h * params.n * params.delta_omega > 0.5:
        raise ValueError("grid too coarse for the fastest mode; shrink the step")
    vals = np.asarray(phi(ts)) * kappa11_table(ts, params)
    return float(np.trapezoid(vals, ts))


def kappa_convergence_error(
    params: HeatBathParams,
    phi: Callable[[np.ndarray], np.ndarray],
    ts: np.ndarray,
    two_sided: bool = False,
) -> float:
    """|integral of phi * kappa11 - target| where the target is gamma*phi(0)
    on [0, inf) and 2*gamma*phi(0) on the whole line."""
    integral = kappa_quadrature(params, phi, ts)
    target = (2.0 if two_sided else 1.0) * params.gamma * float(np.asarray(phi(np.zeros(1)))[0])
    return abs(integral - target)


def noise_process(
    zeta0: np.ndarray, params: HeatBathParams, ts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form fluctuation paths for bath draws zeta0 of shape (R, 2n).

    Returns (Y, B): Y[..., 0] = c domega sum_j (zq_j cos w_j t + zp_j sin w_j t)
    and B[..., 0] = sqrt(beta/(2 gamma)) * integral of Y; both second
    coordinates are identically zero.
    """
    zeta0 = np.atleast_2d(np.asarray(zeta0, dtype=float))
    ts = np.asarray(ts, dtype=float)
    n = params.n
    zq, zp = zeta0[:, :n], zeta0[:, n:]
    w = params.omegas
    cos_M = np.cos(np.outer(ts, w))
    sin_M = np.sin(np.outer(ts, w))
    c = params.coupling
    Y1 = c * params.delta_omega * (zq @ cos_M.T + zp @ sin_M.T)
    # antiderivatives sin(wt)/w and (1-cos(wt))/w, exact per mode
    B1 = math.sqrt(params.beta / math.pi) * params.delta_omega * (
        zq @ (sin_M / w).T + zp @ ((1.0 - cos_M) / w).T
    )
    zeros = np.zeros_like(Y1)
    Y = np.stack([Y1, zeros], axis=-1)
    B = np.stack([B1, zeros], axis=-1)
    return Y, B


@dataclass(frozen=True)
class NoiseIncrementReport:
    """Pooled statistics of disjoint fluctuation increments against the
    Brownian targets (mean 0, variance delta, kurtosis 0, no lag-1 memory)."""

    mean: float
    mean_se: float
    variance: float
    excess_kurtosis: float
    lag1_cov: float
    lag1_se: float
    second_coord_max: float
    n_increments: int

    def passes(
        self, delta: float, var_rtol: float = 0.15, kurt_tol: float = 0.5
    ) -> dict[str, bool]:
        return {
            "mean": abs(self.mean) <= 3.0 * self.mean_se,
            "variance": abs(self.variance - delta) <= var_rtol * delta,
            "kurtosis": abs(self.excess_kurtosis) <= kurt_tol,
            "lag1": abs(self.lag1_cov) <= 3.0 * self.lag1_se,
            "second_coord": self.second_coord_max == 0.0,
        }


def white_noise_tests(B: np.ndarray, delta: float) -> NoiseIncrementReport:
    """Increment statistics of fluctuation paths B of shape (R, T, 2) sampled
    on a uniform grid with spacing delta (increments are then disjoint)."""
    d = np.diff(B[:, :, 0], axis=1)
    flat = d.ravel()
    ntot = flat.size
    mean = float(flat.mean())
    var = float(flat.var(ddof=1))
    mean_se = math.sqrt(var / ntot)
    m2 = float(((flat - mean) ** 2).mean())
    m4 = float(((flat - mean) ** 4).mean())
    kurt = m4 / m2**2 - 3.0
    prod = (d[:, :-1] * d[:, 1:]).ravel()
    lag1 = float(prod.mean())
    lag1_se = float(prod.std(ddof=1)) / math.sqrt(prod.size)
    return NoiseIncrementReport(
        mean, mean_se, var, kurt, lag1, lag1_se,
        float(np.abs(B[:, :, 1]).max()), ntot,
    )


_MOMENTS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "Q": lambda cg: cg[..., 0],
    "Q2": lambda cg: cg[..., 0] ** 2,
    "P2": lambda cg: cg[..., 1] ** 2,
    "e": lambda cg: cg[..., 2],
}


def moment_curves(cg: np.ndarray, moments: Sequence[str] = ("Q", "Q2", "P2", "e")) -> dict:
    """Path-averaged moment curves of a coarse-grained batch (R, T, 3)."""
    return {name: _MOMENTS[name](cg).mean(axis=0) for name in moments}


def compare_to_limit_sde(
    times: np.ndarray,
    micro_cg: np.ndarray,
    sde_paths: np.ndarray,
    moments: Sequence[str] = ("Q", "Q2", "P2", "e"),
    n_boot: int = 200,
    seed: int = 0,
) -> dict[str, tuple[float, float]]:
    """Sup-norm distances between micro and limiting-SDE moment curves on a
    shared grid, with bootstrap standard errors over both ensembles."""
    if micro_cg.shape[1] != len(times) or sde_paths.shape[1] != len(times):
        raise ValueError("ensembles must share the comparison grid")
    rng = path_generator(seed, 2**52)
    out = {}
    for name in moments:
        fm = _MOMENTS[name](micro_cg)
        fs = _MOMENTS[name](sde_paths)
        dist = float(np.abs(fm.mean(axis=0) - fs.mean(axis=0)).max())
        boots = np.empty(n_boot)
        Rm, Rs = fm.shape[0], fs.shape[0]
        for b in range(n_boot):
            im = rng.integers(0, Rm, Rm)
            isde = rng.integers(0, Rs, Rs)
            boots[b] = np.abs(fm[im].mean(axis=0) - fs[isde].mean(axis=0)).max()
        out[name] = (dist, float(boots.std(ddof=1)))
    return out
