"""Relative entropies, empirical-measure rates and the path rate functional.

The discrete side ties exact multinomial probabilities to the Boltzmann
relative entropy H(rho|mu) (the Stirling gap between them shrinks like
log(n)/n), so that "entropy = exponential cost of a macrostate" is checked
against exact combinatorics rather than asymptotics.  The continuum side
provides the entropy integrands of several particle systems (hard rods,
boundary-driven energy exchange, zero range, heat conduction) and the
trajectory rate functional

    J = S(z_0)/2 - S(z_T)/2
        + integral of [ <zdot, K^{-1} zdot>/2 + <grad S/2, K grad S/2>/2 ] dt,

nonnegative on every path and zero exactly on solutions of zdot = K grad S/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .generic_core import OperatorField, ScalarField, Trajectory

__all__ = [
    "DiscreteMeasure",
    "GridDensity1D",
    "PhiFunction",
    "relative_entropy",
    "sanov_rate",
    "sanov_rate_fp",
    "multinomial_logprob",
    "stirling_gap",
    "empirical_measure",
    "binomial_tail_exponent",
    "entropy_catalog",
    "rate_functional_J",
]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weights on a finite alphabet, optionally with the integer
    counts they came from."""

    weights: np.ndarray
    counts: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if self.counts is not None:
            c = np.asarray(self.counts)
            if np.any(c < 0) or not np.issubdtype(c.dtype, np.integer):
                raise ValueError("counts must be nonnegative integers")
            object.__setattr__(self, "counts", c)

    @classmethod
    def from_counts(cls, counts) -> "DiscreteMeasure":
        c = np.asarray(counts)
        return cls(c / c.sum(), c)

    @property
    def n(self) -> int:
        if self.counts is None:
            raise ValueError("no counts attached")
        return int(self.counts.sum())


@dataclass(frozen=True)
class GridDensity1D:
    """Nonnegative values on a uniform grid with trapezoid quadrature."""

    xs: np.ndarray
    vals: np.ndarray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.vals, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)
        if len(xs) < 2 or len(xs) != len(vals):
            raise ValueError("grid and values must match, length >= 2")
        h = np.diff(xs)
        if np.any(np.abs(h - h[0]) > 1e-9 * abs(h[0])):
            raise ValueError("grid must be uniform")
        if np.any(vals < 0):
            raise ValueError("values must be nonnegative")

    def mass(self) -> float:
        return float(np.trapezoid(self.vals, self.xs))

    def normalize(self) -> "GridDensity1D":
        out = GridDensity1D(self.xs, self.vals / self.mass())
        assert abs(out.mass() - 1.0) <= 1e-8
        return out


def _boltzmann(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = s[pos] * np.log(s[pos])
    return out


def _bep(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, np.inf)
    pos = t > 0
    out[pos] = t[pos] - 1.0 - np.log(t[pos])
    return out


@dataclass(frozen=True)
class PhiFunction:
    """Convex integrand of a phi-relative entropy.

    ``recession`` is the slope at infinity; it prices mass that the first
    measure puts where the reference has none (inf means such mass is
    forbidden outright).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    recession: float = np.inf

    @classmethod
    def boltzmann(cls) -> "PhiFunction":
        return cls("boltzmann", _boltzmann, np.inf)

    @classmethod
    def bep(cls) -> "PhiFunction":
        # t - 1 - log t grows linearly, slope 1
        return cls("bep", _bep, 1.0)

    @classmethod
    def from_callable(
        cls, name: str, fn: Callable[[np.ndarray], np.ndarray], recession: float = np.inf
    ) -> "PhiFunction":
        grid = np.linspace(0.05, 10.0, 64)
        mid = 0.5 * (grid[:-1] + grid[1:])
        f = np.asarray(fn(grid), dtype=float)
        fm = np.asarray(fn(mid), dtype=float)
        if np.any(fm > 0.5 * (f[:-1] + f[1:]) + 1e-12):
            raise ValueError("midpoint convexity fails on the sample grid")
        return cls(name, fn, recession)

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)


def _phi_terms(rho: np.ndarray, nu: np.ndarray, phi: PhiFunction) -> np.ndarray:
    """Pointwise nu * phi(rho/nu) with 0*phi(0/0) = 0 and recession pricing
    of rho-mass outside the support of nu."""
    out = np.zeros(np.broadcast(rho, nu).shape)
    pos = nu > 0
    out[pos] = nu[pos] * phi(rho[pos] / nu[pos])
    orphan = (~pos) & (rho > 0)
    if np.any(orphan):
        out[orphan] = rho[orphan] * phi.recession
    return out


def relative_entropy(rho, nu, phi: Optional[PhiFunction] = None) -> float:
    """phi-relative entropy of two discrete measures or two grid densities.

    Discrete pairs sum nu_j phi(rho_j/nu_j); grid pairs use trapezoid
    quadrature on their shared grid.  May return +inf.
    """
    if phi is None:
        phi = PhiFunction.boltzmann()
    if isinstance(rho, DiscreteMeasure) and isinstance(nu, DiscreteMeasure):
        if rho.weights.shape != nu.weights.shape:
            raise ValueError("alphabet size mismatch")
        return float(_phi_terms(rho.weights, nu.weights, phi).sum())
    if isinstance(rho, GridDensity1D) and isinstance(nu, GridDensity1D):
        if rho.xs.shape != nu.xs.shape or np.any(rho.xs != nu.xs):
            raise ValueError("grids do not match")
        return float(np.trapezoid(_phi_terms(rho.vals, nu.vals, phi), rho.xs))
    raise TypeError("rho and nu must both be DiscreteMeasure or both GridDensity1D")


def sanov_rate(rho, mu) -> float:
    """Boltzmann relative entropy H(rho|mu), the empirical-measure rate."""
    return relative_entropy(rho, mu, PhiFunction.boltzmann())


def sanov_rate_fp(rho: GridDensity1D, V: Callable[[np.ndarray], np.ndarray]) -> float:
    """Continuum rate against the Gibbs density e^{-V}/Z on rho's grid:
    integral of rho (log rho + V) plus log Z."""
    xs = rho.xs
    Vx = np.asarray(V(xs), dtype=float)
    logZ = float(np.log(np.trapezoid(np.exp(-Vx), xs)))
    integrand = _boltzmann(rho.vals) + rho.vals * Vx
    return float(np.trapezoid(integrand, xs)) + logZ


def multinomial_logprob(counts, mu) -> float:
    """Exact log multinomial probability of a count vector under mu."""
    c = np.asarray(counts)
    if np.any(c < 0) or not np.issubdtype(c.dtype, np.integer):
        raise ValueError("counts must be nonnegative integers")
    mu = np.asarray(mu, dtype=float)
    if c.shape != mu.shape:
        raise ValueError("counts and mu must have the same length")
    if np.any(mu <= 0):
        if np.any((mu <= 0) & (c > 0)):
            return -np.inf
    n = int(c.sum())
    with np.errstate(divide="ignore"):
        logmu = np.where(c > 0, np.log(np.where(mu > 0, mu, 1.0)), 0.0)
    return float(gammaln(n + 1) - gammaln(c + 1).sum() + (c * logmu).sum())


def stirling_gap(counts, mu) -> float:
    """|-(1/n) log P_multinomial(counts) - H(counts/n | mu)|: the finite-n
    combinatorial cost against its large-deviation limit."""
    c = np.asarray(counts)
    n = int(c.sum())
    rho = DiscreteMeasure.from_counts(c)
    muM = mu if isinstance(mu, DiscreteMeasure) else DiscreteMeasure(np.asarray(mu, dtype=float))
    return abs(-multinomial_logprob(c, muM.weights) / n - sanov_rate(rho, muM))


def empirical_measure(samples, alphabet_size: int) -> DiscreteMeasure:
    """Type (normalized count vector) of integer-coded samples."""
    s = np.asarray(samples)
    if s.size == 0:
        raise ValueError("need at least one sample")
    counts = np.bincount(s, minlength=alphabet_size)
    if len(counts) > alphabet_size:
        raise ValueError("sample outside alphabet")
    return DiscreteMeasure.from_counts(counts)


def binomial_tail_exponent(n: int, mu1: float, threshold: float) -> float:
    """Exact -(1/n) log P(rho_1 <= threshold) for n i.i.d. draws with success
    probability mu1 (rho_1 the empirical frequency)."""
    ks = np.arange(0, int(np.floor(threshold * n)) + 1)
    logp = (
        gammaln(n + 1)
        - gammaln(ks + 1)
        - gammaln(n - ks + 1)
        + ks * math.log(mu1)
        + (n - ks) * math.log1p(-mu1)
    )
    return float(-logsumexp(logp) / n)


def _antiderivative_log_phi(
    phi: Callable[[np.ndarray], np.ndarray], rho: np.ndarray, order: int = 32
) -> np.ndarray:
    """s(rho) = integral_1^rho log phi(v) dv by Gauss-Legendre per point."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # map [-1,1] -> [1, rho]
    half = 0.5 * (rho - 1.0)
    mid = 0.5 * (rho + 1.0)
    v = mid[..., None] + half[..., None] * nodes
    return half * np.sum(weights * np.log(phi(v)), axis=-1)


def entropy_catalog(name: str, profile: GridDensity1D, **params) -> float:
    """Named entropy (or rate) functionals of 1-D profiles.

    hard_rods(a): -integral rho log(rho/(1 - a rho)); requires a*rho < 1.
    bep(eta0):    integral (eta/eta0 - 1 - log(eta/eta0)); requires eta > 0.
    zero_range(phi): -integral s(rho), s' = log phi, s(1) = 0.
    heat_conduction: integral log rho.
    """
    xs, vals = profile.xs, profile.vals
    if name == "hard_rods":
        a = float(params.get("a", 0.0))
        bad = np.flatnonzero(a * vals >= 1.0)
        if bad.size:
            raise ValueError(f"hard-rod constraint a*rho < 1 fails at x={xs[bad[0]]:g}")
        terms = np.zeros_like(vals)
        pos = vals > 0
        terms[pos] = vals[pos] * np.log(vals[pos] / (1.0 - a * vals[pos]))
        return float(-np.trapezoid(terms, xs))
    if name == "bep":
        eta0 = float(params["eta0"])
        bad = np.flatnonzero(vals <= 0)
        if bad.size:
            raise ValueError(f"energy profile must be positive, fails at x={xs[bad[0]]:g}")
        return float(np.trapezoid(_bep(vals / eta0), xs))
    if name == "zero_range":
        phi = params["phi"]
        return float(-np.trapezoid(_antiderivative_log_phi(phi, vals), xs))
    if name == "heat_conduction":
        bad = np.flatnonzero(vals <= 0)
        if bad.size:
            raise ValueError(f"temperature profile must be positive, fails at x={xs[bad[0]]:g}")
        return float(np.trapezoid(np.log(vals), xs))
    raise ValueError(f"unknown entropy name: {name}")


def rate_functional_J(traj: Trajectory, S: ScalarField, K: OperatorField) -> float:
    """Discrete trajectory rate for the quadratic dissipation pair.

    Velocities use central differences (second-order one-sided stencils at
    the endpoints); the running cost is integrated with trapezoid weights,
    which keeps the value nonnegative down to rounding on exact solutions of
    zdot = K grad S / 2.  Raises when K is singular at a grid point.
    """
    times, zs = traj.times, traj.states
    if len(times) < 3:
        raise ValueError("need at least 3 grid points for the velocity stencils")
    dt = float(times[1] - times[0])
    if np.any(np.abs(np.diff(times) - dt) > 1e-9 * dt):
        raise ValueError("rate functional needs a uniform grid")
    zdot = np.empty_like(zs)
    zdot[1:-1] = (zs[2:] - zs[:-2]) / (2.0 * dt)
    zdot[0] = (-3.0 * zs[0] + 4.0 * zs[1] - zs[2]) / (2.0 * dt)
    zdot[-1] = (3.0 * zs[-1] - 4.0 * zs[-2] + zs[-3]) / (2.0 * dt)
    w = np.full(len(times), dt)
    w[0] = w[-1] = 0.5 * dt
    total = 0.5 * S(zs[0]) - 0.5 * S(zs[-1])
    for i, (z, v) in enumerate(zip(zs, zdot)):
        Kz = K(z)
        try:
            Kinv_v = np.linalg.solve(Kz, v)
        except np.linalg.LinAlgError:
            raise ValueError(f"K singular at grid point {i} (t={times[i]:g})") from None
        g = 0.5 * S.grad(z)
        total += w[i] * (0.5 * float(v @ Kinv_v) + 0.5 * float(g @ (Kz @ g)))
    return float(total)
