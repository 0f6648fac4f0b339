"""Finite-volume solvers for 1-D entropy gradient flows.

An equation du/dt = d/dx[ m(u) d/dx(s'(u) + V) ] is determined by a convex
entropy density s and a mobility m, but the same PDE admits several such
pairs: Fokker-Planck is the Wasserstein structure (m=u) of s=u log u, the
porous medium equation is carried both by m=u with s''=2 and by the
zero-range pair m=u^2, s'=log u^2, and the heat equation arises from
m(u)=u^2 with s(u)=-log u.  The solver discretizes the flux form with
arithmetic-mean face mobilities and no-flux boundaries, so mass is conserved
to rounding and the entropy -integral(s(u) + uV) never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .ldp import GridDensity1D

__all__ = [
    "GradientStructure1D",
    "make_structure",
    "rhs",
    "solve",
    "entropy_monitor",
    "fv_mass",
]

_FLOOR = 1e-12  # positivity floor under logs and reciprocals
_CFL = 0.4


@dataclass(frozen=True)
class GradientStructure1D:
    """Entropy density (with two derivatives), mobility and optional
    potential defining one gradient structure of a 1-D equation."""

    name: str
    s: Callable[[np.ndarray], np.ndarray]
    sp: Callable[[np.ndarray], np.ndarray]
    spp: Callable[[np.ndarray], np.ndarray]
    m: Callable[[np.ndarray], np.ndarray]
    V: Optional[Callable[[np.ndarray], np.ndarray]] = None
    Vp: Optional[Callable[[np.ndarray], np.ndarray]] = None


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _log_sub_nodes(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes for integral_1^u after the substitution w = e^v.

    Returns (half-length, w-nodes); the substitution keeps the rule accurate
    for densities all the way down to the positivity floor, where the bare
    [1, u] rule cannot resolve integrands with a 1/w factor.
    """
    u = np.asarray(u, dtype=float)
    half = 0.5 * np.log(np.maximum(u, 1e-300))
    v = half[..., None] * (_GL_NODES + 1.0)
    return half, np.exp(v)


def _integral_from_one(f: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
    """integral_1^u f(w) dw per grid point (= integral_0^{log u} f(e^v) e^v dv)."""
    half, w = _log_sub_nodes(u)
    return half * np.sum(_GL_WEIGHTS * f(w) * w, axis=-1)


def make_structure(
    kind: str,
    *,
    phi: Optional[Callable] = None,
    phi_prime: Optional[Callable] = None,
    alpha: Optional[Callable] = None,
    s: Optional[Callable] = None,
    sp: Optional[Callable] = None,
    spp: Optional[Callable] = None,
    m: Optional[Callable] = None,
    V: Optional[Callable] = None,
    Vp: Optional[Callable] = None,
) -> GradientStructure1D:
    """Build one of the named gradient structures.

    wasserstein(phi, phi_prime): m(u)=u and s''(u)=phi'(u)/u integrated with
    the pinning s'(1)=phi'(1), s(1)=0 (affine shifts of s only move S by
    conserved quantities).  zero_range(phi, phi_prime): m=phi, s'=log phi.
    heat_conduction(alpha): m=alpha, s(u)=-log u, whose flow for alpha=u^2 is
    the heat equation.  explicit: pass s, sp, spp, m directly.
    """
    if kind in ("wasserstein", "zero_range"):
        if phi is None or phi_prime is None:
            raise ValueError(f"{kind} needs phi and phi_prime")
        probe = np.linspace(0.0, 5.0, 41)
        if abs(float(np.asarray(phi(0.0)))) > 1e-12:
            raise ValueError("phi(0) must vanish for the diffusion families")
        if np.any(np.asarray(phi_prime(probe[1:])) < -1e-12):
            raise ValueError("phi must be nondecreasing")
    if kind == "wasserstein":
        phip1 = float(phi_prime(1.0))

        def sp_w(u):
            # the 1/w factor cancels the substitution Jacobian exactly
            half, w = _log_sub_nodes(u)
            return phip1 + half * np.sum(_GL_WEIGHTS * np.asarray(phi_prime(w)), axis=-1)

        def s_w(u):
            u = np.asarray(u, dtype=float)
            half, w = _log_sub_nodes(u)
            vals = (u[..., None] - w) * np.asarray(phi_prime(w))
            return phip1 * (u - 1.0) + half * np.sum(_GL_WEIGHTS * vals, axis=-1)

        spp_w = lambda u: np.asarray(phi_prime(u)) / u
        if not np.isfinite(sp_w(np.array([_FLOOR]))[0]):
            raise ValueError("phi'(u)/u is not integrable down to the positivity floor")
        return GradientStructure1D("wasserstein", s_w, sp_w, spp_w, lambda u: u, V, Vp)
    if kind == "zero_range":
        def s_z(u):
            return _integral_from_one(lambda w: np.log(phi(w)), np.asarray(u, dtype=float))

        sp_z = lambda u: np.log(phi(u))
        spp_z = lambda u: np.asarray(phi_prime(u)) / np.asarray(phi(u))
        return GradientStructure1D("zero_range", s_z, sp_z, spp_z, phi, V, Vp)
    if kind == "heat_conduction":
        if alpha is None:
            raise ValueError("heat_conduction needs the mobility alpha")
        return GradientStructure1D(
            "heat_conduction",
            lambda u: -np.log(u),
            lambda u: -1.0 / u,
            lambda u: 1.0 / u**2,
            alpha,
            V,
            Vp,
        )
    if kind == "explicit":
        if None in (s, sp, spp, m):
            raise ValueError("explicit structures need s, sp, spp, m")
        return GradientStructure1D("explicit", s, sp, spp, m, V, Vp)
    raise ValueError(f"unknown structure kind: {kind}")


def rhs(structure: GradientStructure1D, rho: GridDensity1D) -> np.ndarray:
    """Flux-difference right-hand side on rho's cell grid.

    Face fluxes m_face * (g_{i+1} - g_i)/dx with g = s'(u) + V and
    arithmetic-mean face mobilities; boundary faces carry zero flux, which
    makes the cell sum telescoping (mass conservation)."""
    xs, u = rho.xs, rho.vals
    dx = float(xs[1] - xs[0])
    uf = np.maximum(u, _FLOOR)
    g = np.asarray(structure.sp(uf), dtype=float)
    if structure.V is not None:
        g = g + np.asarray(structure.V(xs), dtype=float)
    mob = np.asarray(structure.m(uf), dtype=float)
    m_face = 0.5 * (mob[:-1] + mob[1:])
    flux = m_face * (g[1:] - g[:-1]) / dx
    out = np.zeros_like(u)
    out[:-1] += flux / dx
    out[1:] -= flux / dx
    return out


def _stable_dt(structure: GradientStructure1D, rho: GridDensity1D) -> float:
    uf = np.maximum(rho.vals, _FLOOR)
    diff = np.asarray(structure.m(uf)) * np.asarray(structure.spp(uf))
    dmax = float(np.max(np.abs(diff)))
    dx = float(rho.xs[1] - rho.xs[0])
    return _CFL * dx * dx / max(dmax, 1e-300)


def solve(
    structure: GradientStructure1D,
    rho0: GridDensity1D,
    dt: float,
    T: float,
    snapshot_times: Sequence[float],
) -> tuple[np.ndarray, list[GridDensity1D]]:
    """Forward-Euler evolution with snapshots at the requested times.

    The explicit step must satisfy dt <= 0.4 dx^2 / max m(u) s''(u),
    re-estimated on the current state every step; violations raise with a
    suggested dt.
    """
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(T, 1.0) or n_steps < 1:
        raise ValueError("T must be an integer number of steps")
    snap_idx = []
    for t in snapshot_times:
        i = int(round(t / dt))
        if abs(i * dt - t) > 1e-9 * max(abs(t), 1.0) or not 0 <= i <= n_steps:
            raise ValueError(f"snapshot time {t} is not on the step grid")
        snap_idx.append(i)
    rho = rho0
    snaps: dict[int, GridDensity1D] = {}
    if 0 in snap_idx:
        snaps[0] = rho
    for step in range(1, n_steps + 1):
        limit = _stable_dt(structure, rho)
        if dt > limit:
            raise ValueError(
                f"unstable step at t={(step - 1) * dt:g}: dt={dt:g} exceeds "
                f"{limit:g}; try dt={0.9 * limit:.3g}"
            )
        new_vals = rho.vals + dt * rhs(structure, rho)
        if np.any(new_vals < 0.0):
            raise ValueError(
                f"unstable step at t={(step - 1) * dt:g}: density went negative; "
                f"try dt={0.5 * dt:.3g}"
            )
        rho = GridDensity1D(rho.xs, new_vals)
        if step in snap_idx:
            snaps[step] = rho
    times = np.array([i * dt for i in snap_idx])
    return times, [snaps[i] for i in snap_idx]


def entropy_monitor(snapshots: Sequence[GridDensity1D], structure: GradientStructure1D) -> np.ndarray:
    """S(rho) = -integral(s(rho) + rho V) dx per snapshot (trapezoid)."""
    out = np.empty(len(snapshots))
    for i, rho in enumerate(snapshots):
        uf = np.maximum(rho.vals, _FLOOR)
        integrand = np.asarray(structure.s(uf), dtype=float)
        if structure.V is not None:
            integrand = integrand + rho.vals * np.asarray(structure.V(rho.xs), dtype=float)
        out[i] = -np.trapezoid(integrand, rho.xs)
    return out


def fv_mass(rho: GridDensity1D) -> float:
    """Cell-sum mass dx * sum(u), the quantity the no-flux update conserves."""
    dx = float(rho.xs[1] - rho.xs[0])
    return dx * float(rho.vals.sum())
