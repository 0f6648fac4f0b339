"""Relative entropies, combinatorial rates, and the path-space functional."""

import itertools
import math

import numpy as np
import pytest

from entrolab.generic_core import ScalarField, Trajectory, constant_operator
from entrolab.ldp import (
    DiscreteMeasure,
    GridDensity1D,
    PhiFunction,
    binomial_tail_exponent,
    empirical_measure,
    entropy_catalog,
    multinomial_logprob,
    rate_functional_J,
    relative_entropy,
    sanov_rate,
    sanov_rate_fp,
    stirling_gap,
)
from entrolab.rng import path_generator

UNIFORM3 = DiscreteMeasure(np.full(3, 1.0 / 3.0))


def test_relative_entropy_boltzmann_cases():
    point = DiscreteMeasure(np.array([1.0, 0.0]))
    half = DiscreteMeasure(np.array([0.5, 0.5]))
    assert abs(relative_entropy(point, half) - math.log(2.0)) <= 1e-12
    assert relative_entropy(half, half) == 0.0
    assert abs(sanov_rate(UNIFORM3, DiscreteMeasure(np.array([0.5, 0.3, 0.2]))) - 0.0702403438) <= 1e-9
    # support escaping the reference measure costs infinity
    assert sanov_rate(half, point) == np.inf


def test_relative_entropy_with_finite_recession():
    bep = PhiFunction("bep", lambda u: u - 1.0 - np.log(u), recession=1.0)
    rho = DiscreteMeasure(np.array([0.5, 0.5]))
    nu = DiscreteMeasure(np.array([1.0, 0.0]))
    got = relative_entropy(rho, nu, phi=bep)
    want = (0.5 - 1.0 - math.log(0.5)) + 1.0 * 0.5
    assert abs(got - want) <= 1e-12


def test_measure_validation():
    with pytest.raises(ValueError, match="nonnegative"):
        DiscreteMeasure(np.array([1.2, -0.2]))
    with pytest.raises(ValueError, match="sum"):
        DiscreteMeasure(np.array([0.5, 0.4]))
    with pytest.raises(ValueError, match="nonnegative"):
        GridDensity1D(np.linspace(0, 1, 5), np.array([1.0, -1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(ValueError, match="uniform"):
        GridDensity1D(np.array([0.0, 0.1, 0.5]), np.ones(3))


def test_multinomial_probabilities_sum_to_one():
    mu = np.array([0.5, 0.3, 0.2])
    total = 0.0
    for c1, c2 in itertools.product(range(6), range(6)):
        c3 = 5 - c1 - c2
        if c3 < 0:
            continue
        total += math.exp(multinomial_logprob((c1, c2, c3), mu))
    assert abs(total - 1.0) <= 1e-12
    assert multinomial_logprob((0, 5), np.array([1.0, 0.0])) == -np.inf
    with pytest.raises(ValueError):
        multinomial_logprob((-1, 6), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="length"):
        multinomial_logprob((1, 2, 3), np.array([0.5, 0.5]))


def test_point_mass_type_matches_exactly():
    # P(all n draws in cell 1) = mu_1^n makes the Stirling gap collapse
    assert stirling_gap((50, 0, 0), UNIFORM3.weights) <= 1e-12


def test_stirling_gap_shrinks():
    gaps = [stirling_gap((n // 3,) * 3, UNIFORM3.weights) for n in (30, 60, 120)]
    for got, want in zip(gaps, (0.120446, 0.071590, 0.041525)):
        assert abs(got - want) <= 1e-5
    assert gaps[0] > gaps[1] > gaps[2]


def test_empirical_measure_counts():
    m = empirical_measure([0, 1, 1, 2, 2, 2], 3)
    assert np.allclose(m.weights, [1 / 6, 2 / 6, 3 / 6])
    assert m.counts.tolist() == [1, 2, 3]
    with pytest.raises(ValueError, match="alphabet"):
        empirical_measure([0, 3], 3)


def test_binomial_tail_exponents():
    # exact -log P(S_n <= n/2)/n for a 0.7 coin, against the rate function
    vals = {n: binomial_tail_exponent(n, 0.7, 0.5) for n in (100, 200, 400)}
    assert abs(vals[100] - 0.107217) <= 1e-6
    assert abs(vals[200] - 0.098847) <= 1e-6
    assert abs(vals[400] - 0.093856) <= 1e-6
    rate = sanov_rate(
        DiscreteMeasure(np.array([0.5, 0.5])), DiscreteMeasure(np.array([0.7, 0.3]))
    )
    assert abs(rate - 0.0871766936) <= 1e-9
    assert abs(vals[400] - rate) <= 0.02


def test_entropy_catalog_profiles():
    xs = np.linspace(0.0, 1.0, 101)
    flat2 = GridDensity1D(xs, np.full(101, 2.0))
    # hard rods at a=0 reduce to the Boltzmann integrand
    assert abs(entropy_catalog("hard_rods", flat2, a=0.0) + 2.0 * math.log(2.0)) <= 1e-12
    with pytest.raises(ValueError, match="hard-rod"):
        entropy_catalog("hard_rods", flat2, a=0.5)
    # bep of a constant profile is pointwise phi(eta/eta0)
    want = 2.0 - 1.0 - math.log(2.0)
    assert abs(entropy_catalog("bep", flat2, eta0=1.0) - want) <= 1e-12
    with pytest.raises(ValueError, match="positive"):
        entropy_catalog("bep", GridDensity1D(xs, np.zeros(101)), eta0=1.0)
    # zero range with phi = id gives s(u) = u log u - u + 1
    got = entropy_catalog("zero_range", flat2, phi=lambda u: u)
    assert abs(got - (1.0 - 2.0 * math.log(2.0))) <= 1e-9
    assert abs(entropy_catalog("heat_conduction", flat2) - math.log(2.0)) <= 1e-12
    with pytest.raises(ValueError, match="unknown"):
        entropy_catalog("nope", flat2)


def test_fokker_planck_rate_vanishes_at_gibbs():
    xs = np.linspace(-5.0, 5.0, 401)
    V = lambda x: 0.5 * x**2
    w = np.exp(-V(xs))
    w /= np.trapezoid(w, xs)
    assert sanov_rate_fp(GridDensity1D(xs, w), V) <= 1e-12
    flat = GridDensity1D(xs, np.full(401, 0.1))
    assert sanov_rate_fp(flat, V) > 0.1


def _decay_trajectory(z0: float, dt: float, T: float) -> Trajectory:
    # RK4 on zdot = -z stays within 1e-12 of the exponential
    steps = int(round(T / dt))
    ts = dt * np.arange(steps + 1)
    states = np.empty((steps + 1, 1))
    z = float(z0)
    for i in range(steps + 1):
        states[i, 0] = z
        k1 = -z
        k2 = -(z + 0.5 * dt * k1)
        k3 = -(z + 0.5 * dt * k2)
        k4 = -(z + dt * k3)
        z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Trajectory(ts, states)


S_QUAD = ScalarField(1, lambda z: -float(z[0]) ** 2, lambda z: -2.0 * z)
K_ID = constant_operator(np.eye(1))


def test_rate_functional_vanishes_on_solutions():
    traj = _decay_trajectory(1.0, 1e-3, 5.0)
    J = rate_functional_J(traj, S_QUAD, K_ID)
    assert -1e-10 <= J <= 1e-3
    # quadrature residual scales at second order in the grid spacing
    J_coarse = rate_functional_J(_decay_trajectory(1.0, 1e-2, 5.0), S_QUAD, K_ID)
    assert 50.0 <= J_coarse / J <= 200.0


def test_rate_functional_reversal_identity():
    traj = _decay_trajectory(1.0, 1e-3, 5.0)
    rev = Trajectory(traj.times, traj.states[::-1].copy())
    J_fwd = rate_functional_J(traj, S_QUAD, K_ID)
    J_rev = rate_functional_J(rev, S_QUAD, K_ID)
    gap = float(S_QUAD.value(traj.states[-1]) - S_QUAD.value(traj.states[0]))
    assert abs((J_rev - J_fwd) - gap) <= 1e-9
    assert abs(J_rev - 0.999954600070) <= 1e-6


def test_rate_functional_shift_invariance():
    traj = _decay_trajectory(1.0, 1e-3, 2.0)
    S_shift = ScalarField(1, lambda z: -float(z[0]) ** 2 + 7.25, lambda z: -2.0 * z)
    a = rate_functional_J(traj, S_QUAD, K_ID)
    b = rate_functional_J(traj, S_shift, K_ID)
    assert abs(a - b) <= 1e-12


def test_rate_functional_nonnegative_on_random_paths():
    worst = np.inf
    for trial in range(20):
        rng = path_generator(99, trial)
        coef = rng.normal(size=4)
        ts = np.linspace(0.0, 1.0, 201)
        zs = coef[0] + coef[1] * ts + coef[2] * np.sin(2 * np.pi * ts) + coef[3] * ts**2
        J = rate_functional_J(Trajectory(ts, zs[:, None]), S_QUAD, K_ID)
        worst = min(worst, J)
    assert worst >= -1e-10


def test_rate_functional_guards():
    ts = np.linspace(0.0, 1.0, 11)
    traj = Trajectory(ts, np.ones((11, 1)))
    K0 = constant_operator(np.zeros((1, 1)))
    with pytest.raises(ValueError, match="singular"):
        rate_functional_J(traj, S_QUAD, K0)
    with pytest.raises(ValueError, match="3 grid points"):
        rate_functional_J(Trajectory(ts[:2], np.ones((2, 1))), S_QUAD, K_ID)
