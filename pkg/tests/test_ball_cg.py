"""Reflected ball diffusion, radial reduction, and the level-set geometry."""

import dataclasses

import numpy as np
import pytest

from entrolab.ball_cg import (
    BallDiffusionParams,
    RadialEnsemble,
    coarse_grain_radius,
    entropy_Sn,
    estimate_drift,
    invariant_density_check,
    pdelta_mass_radial,
    pdelta_shell_estimate,
    scaling_limit_demo,
    simulate_ball,
    stationary_start,
)
from entrolab.generic_core import ScalarField
from entrolab.generic_sde import stationary_histogram


def test_param_guards():
    with pytest.raises(ValueError, match="dt"):
        BallDiffusionParams(n=3, beta=2.0, dt=1e-3, T=1.0, n_paths=4, seed=0)
    with pytest.raises(ValueError):
        BallDiffusionParams(n=0, beta=1.0, dt=1e-4, T=1.0, n_paths=4, seed=0)
    grad_free = ScalarField(1, lambda y: float(y[0]))
    with pytest.raises(ValueError, match="derivative"):
        BallDiffusionParams(n=2, beta=1.0, dt=1e-4, T=1.0, n_paths=4, seed=0, Vtilde=grad_free)


def test_one_dimensional_walk_is_uniform():
    params = BallDiffusionParams(n=1, beta=1.0, dt=1e-3, T=30.0, n_paths=1024, seed=7)
    ens = simulate_ball(params, x0=stationary_start(params), store_every=20, n_threads=4)
    hist = stationary_histogram(ens, 0, 0.1, np.linspace(-1.0, 1.0, 21))
    assert hist.l1_distance(np.full(20, 0.5)) <= 0.03
    assert np.abs(ens.paths).max() <= 1.0


def test_mean_radius_three_dimensions():
    # stationary radial density 3 y^2 on [0,1] has mean 3/4
    params = BallDiffusionParams(n=3, beta=1.0, dt=1e-3, T=8.0, n_paths=512, seed=5)
    ens = simulate_ball(params, x0=stationary_start(params), store_every=8, n_threads=4)
    radial = coarse_grain_radius(ens, params.n, params.beta)
    mean_r = radial.radii[:, radial.times >= 0.5].mean()
    assert abs(mean_r - 0.75) <= 0.02 * 0.75


def test_first_step_is_scaled_chi():
    params = BallDiffusionParams(n=3, beta=1.0, dt=1e-3, T=1e-3, n_paths=4096, seed=3)
    ens = simulate_ball(params, store_every=1)
    scaled = (ens.paths[:, -1, :] ** 2).sum(axis=1) / (2.0 * params.dt / params.beta)
    # chi-square with n degrees of freedom: mean n, var 2n
    se = np.sqrt(2.0 * 3.0 / 4096)
    assert abs(scaled.mean() - 3.0) <= 3.5 * se


def test_radius_is_rotation_invariant():
    params = BallDiffusionParams(n=3, beta=1.0, dt=1e-3, T=0.5, n_paths=8, seed=1)
    ens = simulate_ball(params, store_every=10)
    theta = 0.7
    R = np.array(
        [
            [np.cos(theta), -np.sin(theta), 0.0],
            [np.sin(theta), np.cos(theta), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    spun = dataclasses.replace(ens, paths=ens.paths @ R.T)
    a = coarse_grain_radius(ens, params.n, params.beta)
    b = coarse_grain_radius(spun, params.n, params.beta)
    assert np.abs(a.radii - b.radii).max() <= 1e-12


def test_coarse_grain_examples():
    params = BallDiffusionParams(n=2, beta=1.0, dt=1e-4, T=1e-3, n_paths=1, seed=0)
    ens = simulate_ball(params, store_every=10)
    fixed = dataclasses.replace(ens, paths=np.array([[[0.3, 0.4], [0.0, 0.0]]]))
    radial = coarse_grain_radius(fixed, 2, 1.0)
    assert radial.radii[0, 0] == 0.5
    assert radial.radii[0, 1] == 0.0


def test_entropy_values_and_domain():
    val, der = entropy_Sn(3, 0.5)
    assert abs(val - (2.0 * np.log(0.5))) <= 1e-12
    assert abs(val + 1.3863) <= 1e-4
    assert der == 2.0 / 0.5
    with pytest.raises(ValueError):
        entropy_Sn(3, 0.0)


def test_drift_estimator_recovers_constant_velocity():
    # noiseless paths moving at dy/dt = 0.3 come back exactly from the bins
    dt = 1e-2
    times = np.arange(100) * dt
    starts = np.linspace(0.1, 0.5, 16)
    y = starts[:, None] + 0.3 * times[None, :]
    radial = RadialEnsemble(times=times, radii=y, n=2, beta=1.0)
    reg = estimate_drift(radial, np.linspace(0.1, 0.9, 9))
    assert reg.reliable.any()
    assert np.abs(reg.means[reg.reliable] - 0.3).max() <= 1e-10
    assert reg.counts.sum() == 16 * 99


def test_invariant_density_with_potential():
    quad = ScalarField(1, lambda y: 0.5 * float(y[0]) ** 2, lambda y: y)
    params = BallDiffusionParams(
        n=3, beta=1.0, dt=1e-3, T=8.0, n_paths=512, seed=9, Vtilde=quad
    )
    ens = simulate_ball(params, x0=stationary_start(params), store_every=8, n_threads=4)
    radial = coarse_grain_radius(ens, params.n, params.beta)
    l1 = invariant_density_check(radial, params, np.linspace(0.0, 1.0, 31), burn_in=0.1)
    assert l1 <= 0.05


def test_level_set_masses():
    mass2, _ = pdelta_mass_radial(2, 1.0)
    mass3, _ = pdelta_mass_radial(3, 1.0)
    assert abs(mass2 - 2.0 * np.pi) <= 1e-12
    assert abs(mass3 - 4.0 * np.pi) <= 1e-12
    # log-mass gap grows like (n-1) log(y2/y1)
    _, lm_hi = pdelta_mass_radial(5, 0.6)
    _, lm_lo = pdelta_mass_radial(5, 0.3)
    assert abs((lm_hi - lm_lo) - 4.0 * np.log(2.0)) <= 1e-12


def test_shell_estimate_first_order():
    for n, y in ((3, 0.6), (5, 0.4)):
        exact = pdelta_mass_radial(n, y)[0]
        e1 = abs(pdelta_shell_estimate(n, y, 1e-2) - exact)
        e2 = abs(pdelta_shell_estimate(n, y, 5e-3) - exact)
        assert 1.7 <= e1 / e2 <= 2.3
    with pytest.raises(ValueError):
        pdelta_shell_estimate(3, 0.5, 0.0)


def test_scaling_limit_sharpens_with_dimension():
    sups = scaling_limit_demo(1.0, 0.2, [4, 16, 64])
    assert sups[0] > sups[1] > sups[2]
    assert sups[2] <= 0.2
    with pytest.raises(ValueError, match="horizon"):
        scaling_limit_demo(1.0, 0.9, [4], T=0.3)
