"""Microscopic oscillator-bath runs, memory kernel, and fluctuation law."""

import numpy as np
import pytest

from entrolab.heat_bath import (
    HeatBathParams,
    coarse_grain,
    entropy_Snbeta_centered,
    evolve_micro,
    h_A,
    kappa11_table,
    kappa_convergence_error,
    kappa_n,
    kappa_quadrature,
    noise_process,
    sample_conditional,
    sample_conditional_ensemble,
    sample_stationary_Z,
    white_noise_tests,
)
from entrolab.rng import path_generator


def test_param_guards():
    with pytest.raises(ValueError):
        HeatBathParams(n=-1, beta=1.0, gamma=0.5)
    with pytest.raises(ValueError):
        HeatBathParams(n=4, beta=0.0, gamma=0.5)
    with pytest.raises(ValueError):
        HeatBathParams(n=4, beta=1.0, gamma=-0.5)
    with pytest.raises(ValueError):
        HeatBathParams(n=4, beta=1.0, gamma=0.5, delta_omega=0.0)


def test_default_mode_spacing():
    p = HeatBathParams(n=400, beta=1.0, gamma=1.0)
    assert p.delta_omega == 4.0 / 20.0
    assert np.allclose(p.omegas, p.delta_omega * np.arange(1, 401))


def test_conditional_draws_sit_on_the_energy_sphere():
    p = HeatBathParams(n=64, beta=2.0, gamma=1.0, E0=1.5, seed=4)
    Z0 = np.array([0.6, -0.3])
    zetas = sample_conditional_ensemble(p, Z0, 32)
    r2 = 2.0 * p.n / p.beta + 2.0 * (p.E0 - float(h_A(p, Z0)))
    assert np.abs(p.delta_omega * (zetas**2).sum(axis=1) - r2).max() <= 1e-12 * r2
    with pytest.raises(ValueError, match="infeasible"):
        sample_conditional_ensemble(p, np.array([40.0, 0.0]), 4)


def test_conditional_antithetic_negation():
    p = HeatBathParams(n=32, beta=1.0, gamma=0.5, E0=1.0, seed=4)
    za = sample_conditional_ensemble(p, np.array([1.0, 0.0]), 8, antithetic=True)
    assert np.abs(za[0::2] + za[1::2]).max() == 0.0
    with pytest.raises(ValueError, match="even"):
        sample_conditional_ensemble(p, np.array([1.0, 0.0]), 7, antithetic=True)


def test_coarse_grain_reads_off_internal_energy():
    p = HeatBathParams(n=128, beta=1.0, gamma=0.5, E0=1.0, seed=9)
    Z0 = np.array([1.0, 0.0])
    state = sample_conditional(p, Z0)
    traj = evolve_micro(state, 1e-3, 1.0, store_every=10)
    cg = coarse_grain(traj, p)
    assert abs(cg.states[0, 2] - (p.E0 - float(h_A(p, Z0)))) <= 1e-12
    # splitting keeps the total energy to its weak-order budget
    E = np.asarray([float(h_A(p, z[:2])) for z in cg.states]) + cg.states[:, 2]
    assert np.abs(E - E[0]).max() <= 1e-8 * abs(E[0])


def test_decoupled_bath_freezes_internal_energy():
    p = HeatBathParams(n=128, beta=1.0, gamma=0.0, E0=1.0, seed=9)
    state = sample_conditional(p, np.array([1.0, 0.0]))
    traj = evolve_micro(state, 1e-3, 2.0, store_every=10)
    cg = coarse_grain(traj, p)
    e = cg.states[:, 2]
    assert np.abs(e - e[0]).max() <= 1e-10


def test_micro_step_guard():
    p = HeatBathParams(n=128, beta=1.0, gamma=0.5, E0=1.0, seed=0)
    state = sample_conditional(p, np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match="fastest mode"):
        evolve_micro(state, 1.0, 2.0)


def test_kernel_values():
    p = HeatBathParams(n=4000, beta=1.0, gamma=1.0, E0=1.0, delta_omega=0.01)
    k0 = kappa_n(0.0, p)
    assert abs(k0[0, 0] - 2.0 * p.gamma / np.pi * p.delta_omega * p.n) <= 1e-12
    assert k0[0, 1] == 0.0 and k0[1, 0] == 0.0 and k0[1, 1] == 0.0
    ts = np.linspace(0.0, 5.0, 200)
    naive = kappa11_table(ts, p, compensated=False)
    comp = kappa11_table(ts, p, compensated=True)
    assert np.abs(naive - comp).max() <= 1e-10


def test_kernel_concentrates_on_a_delta():
    p = HeatBathParams(n=4000, beta=1.0, gamma=1.0, E0=1.0, delta_omega=0.01)
    phi = lambda t: np.exp(-(t**2) / (2.0 * 0.5**2))
    ts = np.arange(0.0, 5.0 + 1e-12, 0.01)
    assert kappa_convergence_error(p, phi, ts) <= 0.05
    ts2 = np.concatenate([-ts[:0:-1], ts])
    assert kappa_convergence_error(p, phi, ts2, two_sided=True) <= 0.05
    with pytest.raises(ValueError, match="too coarse"):
        kappa_quadrature(p, phi, np.arange(0.0, 5.0, 0.5))


def test_noise_process_structure():
    p = HeatBathParams(n=400, beta=1.0, gamma=1.0, E0=1.0, seed=11)
    zeta0 = sample_conditional(p, np.array([0.3, 0.1]), realization=3).zeta
    ts = np.linspace(0.0, 2.0, 41)
    Y, B = noise_process(zeta0, p, ts)
    Y2, B2 = noise_process(-zeta0, p, ts)
    Y3, B3 = noise_process(2.0 * zeta0, p, ts)
    assert np.abs(B + B2).max() == 0.0  # odd in the bath draw
    assert np.abs(B3 - 2.0 * B).max() == 0.0  # linear in the bath draw
    assert np.abs(B[..., 1]).max() == 0.0
    assert np.abs(Y[..., 1]).max() == 0.0
    assert np.abs(B[:, 0, :]).max() == 0.0  # starts at zero


def test_white_noise_report_on_synthetic_brownian():
    rng = path_generator(123, 0)
    delta = 0.05
    incs = rng.normal(0.0, np.sqrt(delta), size=(400, 200))
    B1 = np.concatenate([np.zeros((400, 1)), np.cumsum(incs, axis=1)], axis=1)
    B = np.stack([B1, np.zeros_like(B1)], axis=-1)
    rep = white_noise_tests(B, delta)
    flags = rep.passes(delta)
    assert all(flags.values()), flags
    assert rep.n_increments == 400 * 200


def test_white_noise_report_flags_wrong_scale():
    rng = path_generator(321, 0)
    delta = 0.05
    incs = rng.normal(0.0, np.sqrt(0.5 * delta), size=(200, 200))
    B1 = np.concatenate([np.zeros((200, 1)), np.cumsum(incs, axis=1)], axis=1)
    B = np.stack([B1, np.zeros_like(B1)], axis=-1)
    assert not white_noise_tests(B, delta).passes(delta)["variance"]


def test_stationary_sampler_single_mode_uniform_ellipse():
    """n=1 weight is flat on {H_A < E0 + 1/beta}: Var(Q) = (E0 + 1/beta)/2k."""
    p = HeatBathParams(n=1, beta=1.0, gamma=0.5, k=1.0, m=1.0, E0=1.0, seed=2)
    Z, rate = sample_stationary_Z(p, 8000, proposal_scale=2.0)
    assert 0.1 <= rate <= 0.7
    target = 2.0 * (p.E0 + 1.0 / p.beta) / p.k / 4.0
    assert abs(Z[:, 0].var() - target) <= 0.10 * target
    assert abs(Z[:, 0].mean()) <= 0.05


def test_stationary_sampler_warns_on_poor_mixing():
    p = HeatBathParams(n=1, beta=1.0, gamma=0.5, E0=1.0, seed=2)
    with pytest.warns(UserWarning, match="acceptance rate"):
        sample_stationary_Z(p, 200, proposal_scale=0.05)


def test_centered_entropy_series():
    assert abs(entropy_Snbeta_centered(100, 1.0, 1.0) - 99.0 * np.log(1.01)) <= 1e-12
    # approaches beta*e with the n^{-1} correction from the log expansion
    gap = 2.0 - entropy_Snbeta_centered(10000, 2.0, 1.0)
    assert abs(gap - 4.0e-4) <= 2e-7
    with pytest.raises(ValueError, match="positive"):
        entropy_Snbeta_centered(10, 1.0, -20.0)
