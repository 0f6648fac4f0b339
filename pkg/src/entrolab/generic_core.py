"""Deterministic systems with a conservative-plus-entropic drift.

A system bundles an energy E, an entropy S, an antisymmetric operator J, a
symmetric positive-semidefinite operator K and a noise mobility Sigma on R^d.
The deterministic evolution is

    dz/dt = J(z) grad E(z) + K(z) grad S(z),

which conserves E and never decreases S provided the structural axioms hold:
J antisymmetric, K symmetric PSD, J grad S = 0, K grad E = 0, and
Sigma Sigma^T = K.  This module represents such systems, validates the
axioms pointwise, and integrates the flow with energy/entropy monitoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "ScalarField",
    "OperatorField",
    "GenericSystem",
    "Trajectory",
    "OscillatorParams",
    "StructureReport",
    "check_structure",
    "check_jacobi",
    "damped_oscillator_system",
    "integrate_ode",
    "monitor_energy_entropy",
]

# Finite-difference step for gradients and nested Jacobi residuals.  Balances
# truncation against roundoff for double precision.
_FD_SCALE = 1e-5


def _fd_step(z: np.ndarray) -> float:
    return _FD_SCALE * (1.0 + float(np.linalg.norm(z)))


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of the state with an (optional) analytic gradient.

    Parameters
    ----------
    d : int
        State dimension.
    value : callable
        Map R^d -> R.
    gradient : callable, optional
        Map R^d -> R^d.  When omitted, ``grad`` falls back to a centered
        finite difference with step 1e-5*(1+|z|).
    """

    d: int
    value: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, z: np.ndarray) -> float:
        return float(self.value(np.asarray(z, dtype=float)))

    def grad(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(z), dtype=float)
        h = _fd_step(z)
        g = np.empty(self.d)
        for i in range(self.d):
            zp = z.copy()
            zm = z.copy()
            zp[i] += h
            zm[i] -= h
            g[i] = (self.value(zp) - self.value(zm)) / (2.0 * h)
        return g


@dataclass(frozen=True)
class OperatorField:
    """A state-dependent real matrix, shape (d, d2)."""

    d: int
    d2: int
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        mat = np.asarray(self.eval(np.asarray(z, dtype=float)), dtype=float)
        if mat.shape != (self.d, self.d2):
            raise ValueError(f"operator returned shape {mat.shape}, expected {(self.d, self.d2)}")
        return mat


def constant_operator(mat: np.ndarray) -> OperatorField:
    """Wrap a constant matrix as an OperatorField."""
    mat = np.asarray(mat, dtype=float)
    return OperatorField(mat.shape[0], mat.shape[1], lambda z, _m=mat: _m)


@dataclass(frozen=True)
class GenericSystem:
    """The (E, S, J, K, Sigma, a) bundle on R^d.

    ``a`` is the reference density of the stochastic variant (default
    identically 1).  ``divAK`` is an optional analytic closure for
    (1/a) div(a K); when absent the stochastic integrator falls back to
    finite differences.
    """

    d: int
    E: ScalarField
    S: ScalarField
    J: OperatorField
    K: OperatorField
    Sigma: OperatorField
    a: Optional[ScalarField] = None
    divAK: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "generic"

    @property
    def noise_dim(self) -> int:
        return self.Sigma.d2

    def drift_deterministic(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.J(z) @ self.E.grad(z) + self.K(z) @ self.S.grad(z)


@dataclass(frozen=True)
class Trajectory:
    """States on a strictly increasing time grid."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), d)

    def __post_init__(self) -> None:
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


@dataclass(frozen=True)
class OscillatorParams:
    """Spring constant, mass, friction and inverse temperature."""

    k: float = 1.0
    m: float = 1.0
    gamma: float = 0.5
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.k <= 0 or self.m <= 0 or self.beta <= 0:
            raise ValueError("k, m, beta must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


@dataclass(frozen=True)
class StructureReport:
    """Max violations of the structural axioms over a sample cloud."""

    max_J_antisymmetry: float
    max_K_asymmetry: float
    min_K_eigenvalue: float
    max_J_gradS: float
    max_K_gradE: float
    max_fdr: float  # |Sigma Sigma^T - K|
    passed: bool

    def worst(self) -> float:
        return max(
            self.max_J_antisymmetry,
            self.max_K_asymmetry,
            max(0.0, -self.min_K_eigenvalue),
            self.max_J_gradS,
            self.max_K_gradE,
            self.max_fdr,
        )


def check_structure(
    sys: GenericSystem, samples: Sequence[np.ndarray], tol: float = 1e-10
) -> StructureReport:
    """Evaluate the pointwise structural axioms on a sample cloud.

    Returns the max over samples of |J+J^T|, |K-K^T|, the min eigenvalue of
    K, |J grad S|, |K grad E| and |Sigma Sigma^T - K| (spectral norms), and
    flags pass iff all violations are within ``tol``.
    """
    mJ = mK = mJS = mKE = mF = 0.0
    min_eig = np.inf
    for z in samples:
        z = np.asarray(z, dtype=float)
        J = sys.J(z)
        K = sys.K(z)
        Sg = sys.Sigma(z)
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(K)) and np.all(np.isfinite(Sg))):
            raise ValueError(f"non-finite operator entry at state {z}")
        mJ = max(mJ, float(np.linalg.norm(J + J.T, 2)))
        mK = max(mK, float(np.linalg.norm(K - K.T, 2)))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (K + K.T)).min()))
        mJS = max(mJS, float(np.linalg.norm(J @ sys.S.grad(z))))
        mKE = max(mKE, float(np.linalg.norm(K @ sys.E.grad(z))))
        mF = max(mF, float(np.linalg.norm(Sg @ Sg.T - K, 2)))
    passed = max(mJ, mK, mJS, mKE, mF) <= tol and min_eig >= -tol
    return StructureReport(mJ, mK, min_eig, mJS, mKE, mF, passed)


def check_jacobi(J: OperatorField, samples: Sequence[np.ndarray], tol: float = 1e-8) -> float:
    """Max residual of the Jacobi identity for coordinate test functions.

    For F = z_a, G = z_b, H = z_c the cyclic bracket sum reduces to

        sum_d J_ad dJ_bc/dz_d + J_bd dJ_ca/dz_d + J_cd dJ_ab/dz_d,

    evaluated here with centered finite differences.  Restricted to d <= 6
    to keep the nested-difference cost bounded.
    """
    d = J.d
    if d > 6:
        raise ValueError("check_jacobi supports d <= 6")
    worst = 0.0
    for z in samples:
        z = np.asarray(z, dtype=float)
        h = _fd_step(z)
        # dJ[d_, a, b] = dJ_ab / dz_d
        dJ = np.empty((d, d, d))
        for di in range(d):
            zp = z.copy()
            zm = z.copy()
            zp[di] += h
            zm[di] -= h
            dJ[di] = (J(zp) - J(zm)) / (2.0 * h)
        Jz = J(z)
        # residual[a,b,c] = sum_d J[a,d] dJ[d,b,c] + cyclic
        term = np.einsum("ad,dbc->abc", Jz, dJ)
        res = term + term.transpose(1, 2, 0) + term.transpose(2, 0, 1)
        worst = max(worst, float(np.abs(res).max()))
    return worst


def damped_oscillator_system(p: OscillatorParams) -> GenericSystem:
    """Damped harmonic oscillator extended with an internal-energy variable.

    State (Q, P, e); E = k Q^2/2 + P^2/(2m) + e; S = beta*e.  The friction
    writes kinetic energy into e, so E is conserved while S grows.  The
    stochastic variant carries Sigma = sqrt(gamma/beta)*(0, 1, -P/m)^T and
    the constant divergence correction (gamma/beta)*(0, 0, -1/m).
    """
    k, m, gamma, beta = p.k, p.m, p.gamma, p.beta

    E = ScalarField(
        3,
        value=lambda z: 0.5 * k * z[0] ** 2 + 0.5 * z[1] ** 2 / m + z[2],
        gradient=lambda z: np.array([k * z[0], z[1] / m, 1.0]),
    )
    S = ScalarField(
        3,
        value=lambda z: beta * z[2],
        gradient=lambda z: np.array([0.0, 0.0, beta]),
    )
    J = constant_operator(np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))

    def K_eval(z: np.ndarray) -> np.ndarray:
        v = z[1] / m
        return (gamma / beta) * np.array(
            [[0.0, 0.0, 0.0], [0.0, 1.0, -v], [0.0, -v, v * v]]
        )

    def Sigma_eval(z: np.ndarray) -> np.ndarray:
        return np.sqrt(gamma / beta) * np.array([[0.0], [1.0], [-z[1] / m]])

    divAK = lambda z: np.array([0.0, 0.0, -gamma / (beta * m)])
    sysm = GenericSystem(
        d=3,
        E=E,
        S=S,
        J=J,
        K=OperatorField(3, 3, K_eval),
        Sigma=OperatorField(3, 1, Sigma_eval),
        divAK=divAK,
        name="damped-oscillator",
    )

    # ensemble-shaped closures used by the stochastic integrator; plain
    # attributes so the frozen dataclass stays the public surface
    def vec_drift(Z: np.ndarray) -> np.ndarray:
        Q, P = Z[:, 0], Z[:, 1]
        v = P / m
        return np.stack(
            [v, -k * Q - gamma * v, gamma * v * v - gamma / (beta * m)], axis=1
        )

    def vec_sigma(Z: np.ndarray) -> np.ndarray:
        out = np.empty((Z.shape[0], 3, 1))
        out[:, 0, 0] = 0.0
        out[:, 1, 0] = 1.0
        out[:, 2, 0] = -Z[:, 1] / m
        return np.sqrt(gamma / beta) * out

    def vec_E(Z: np.ndarray) -> np.ndarray:
        return 0.5 * k * Z[:, 0] ** 2 + 0.5 * Z[:, 1] ** 2 / m + Z[:, 2]

    object.__setattr__(sysm, "vec_drift", vec_drift)
    object.__setattr__(sysm, "vec_sigma", vec_sigma)
    object.__setattr__(sysm, "vec_E", vec_E)
    return sysm


def integrate_ode(sys: GenericSystem, z0: np.ndarray, dt: float, T: float) -> Trajectory:
    """Classical 4th-order one-step integration of the deterministic flow.

    Returns the trajectory on the uniform grid including t=0.  Raises on the
    first non-finite state.
    """
    if dt <= 0 or T < dt:
        raise ValueError("require dt > 0 and T >= dt")
    n_steps = int(round(T / dt))
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (sys.d,):
        raise ValueError(f"z0 must have shape ({sys.d},)")
    out = np.empty((n_steps + 1, sys.d))
    out[0] = z
    f = sys.drift_deterministic
    for step in range(n_steps):
        k1 = f(z)
        k2 = f(z + 0.5 * dt * k1)
        k3 = f(z + 0.5 * dt * k2)
        k4 = f(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise FloatingPointError(f"diverged at t={(step + 1) * dt:g}")
        out[step + 1] = z
    times = np.arange(n_steps + 1) * dt
    return Trajectory(times, out)


def monitor_energy_entropy(traj: Trajectory, sys: GenericSystem) -> tuple[float, float]:
    """(max |E(z_t) - E(z_0)|, min over steps of S(z_{t+1}) - S(z_t))."""
    E = np.array([sys.E(z) for z in traj.states])
    S = np.array([sys.S(z) for z in traj.states])
    drift = float(np.abs(E - E[0]).max())
    min_dS = float(np.diff(S).min()) if len(S) > 1 else 0.0
    return drift, min_dS


def gaussian_cloud(d: int, n: int = 100, seed: int = 0) -> np.ndarray:
    """Default sampling cloud for the pointwise structure checks."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    return rng.standard_normal((n, d))
