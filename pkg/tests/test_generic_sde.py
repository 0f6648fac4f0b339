"""Euler-Maruyama ensembles: stationary laws, conservation, determinism."""

import numpy as np
import pytest
from scipy.stats import norm

from entrolab.generic_core import (
    GenericSystem,
    OscillatorParams,
    ScalarField,
    constant_operator,
    damped_oscillator_system,
    gaussian_cloud,
)
from entrolab.generic_sde import (
    ParticleSystemSpec,
    SdeRunConfig,
    check_as_energy_conservation,
    integrate_sde,
    kl_to_stationary_checkpoints,
    ornstein_uhlenbeck_system,
    simulate_particles,
    stationary_histogram,
)

OU = ornstein_uhlenbeck_system()


def test_run_config_validation():
    with pytest.raises(ValueError):
        SdeRunConfig(dt=1e-3, T=1.0005, n_paths=4, seed=0)
    with pytest.raises(ValueError):
        SdeRunConfig(dt=1e-3, T=1.0, n_paths=0, seed=0)
    with pytest.raises(ValueError):
        SdeRunConfig(dt=-1e-3, T=1.0, n_paths=4, seed=0)


def test_ou_stationary_variance_and_histogram():
    """Stationary law of dz = -z dt + sqrt(2) dW is the standard normal."""
    cfg = SdeRunConfig(dt=5e-3, T=20.0, n_paths=20000, seed=91)
    ens = integrate_sde(OU, np.zeros(1), cfg, store_every=10, n_threads=4)
    pooled = ens.paths[:, ens.times >= 10.0, 0].ravel()
    assert pooled.size >= 1_000_000
    assert abs(pooled.var() - 1.0) <= 0.03
    hist = stationary_histogram(ens, 0, 0.5, np.linspace(-4.0, 4.0, 61))
    assert hist.l1_distance(norm.pdf(hist.centers)) <= 0.03


def test_kl_checkpoints_decrease_to_stationarity():
    cfg = SdeRunConfig(dt=1e-2, T=8.0, n_paths=100000, seed=17)
    ens = integrate_sde(OU, np.full(1, 3.0), cfg, store_every=10, n_threads=4)
    kls = kl_to_stationary_checkpoints(
        ens, OU, lambda x: norm.pdf(x), [0.5, 1.0, 2.0, 4.0, 8.0], np.linspace(-5.0, 5.0, 80)
    )
    assert all(a > b for a, b in zip(kls, kls[1:]))
    assert kls[-1] <= 0.01
    # closed-form KL between N(3 e^{-t}, 1 - e^{-2t}) and N(0,1)
    for est, exact in zip(kls[:3], (1.700855, 0.614048, 0.082505)):
        assert abs(est - exact) <= 0.05 * exact + 0.005


def test_kl_rejects_zero_noise_systems():
    d = 1
    dead = GenericSystem(
        d=d,
        E=ScalarField(d, lambda z: 0.0, lambda z: np.zeros(d)),
        S=ScalarField(d, lambda z: -0.5 * float(z @ z), lambda z: -z),
        J=constant_operator(np.zeros((d, d))),
        K=constant_operator(np.eye(d)),
        Sigma=constant_operator(np.zeros((d, d))),
        name="noiseless",
    )
    cfg = SdeRunConfig(dt=1e-2, T=1.0, n_paths=8, seed=0)
    ens = integrate_sde(dead, np.ones(1), cfg, store_every=10)
    with pytest.raises(ValueError, match="zero-noise"):
        kl_to_stationary_checkpoints(
            ens, dead, lambda x: norm.pdf(x), [0.5, 1.0], np.linspace(-3, 3, 30)
        )
    with pytest.raises(ValueError, match="increasing"):
        kl_to_stationary_checkpoints(
            ens, OU, lambda x: norm.pdf(x), [1.0, 0.5], np.linspace(-3, 3, 30)
        )


def test_zero_noise_reduces_to_euler():
    osc = damped_oscillator_system(OscillatorParams())
    frozen = GenericSystem(
        d=3, E=osc.E, S=osc.S, J=osc.J, K=osc.K,
        Sigma=constant_operator(np.zeros((3, 3))),
        divAK=osc.divAK, name="frozen",
    )
    cfg = SdeRunConfig(dt=1e-2, T=1.0, n_paths=3, seed=4)
    ens = integrate_sde(frozen, np.array([1.0, 0.0, 0.0]), cfg)
    z = np.array([1.0, 0.0, 0.0])
    for k in range(100):
        drift = osc.J.eval(z) @ osc.E.gradient(z) + osc.K.eval(z) @ osc.S.gradient(z)
        if osc.divAK is not None:
            drift = drift + osc.divAK(z)
        z = z + 1e-2 * drift
    assert np.abs(ens.paths[:, -1, :] - z).max() <= 1e-12


def test_antithetic_pairs_cancel_noise_exactly():
    # EM for the OU map is linear, so pair means follow (1-dt)^k exactly
    cfg = SdeRunConfig(dt=1e-2, T=1.0, n_paths=8, seed=5)
    ens = integrate_sde(OU, np.full(1, 1.0), cfg, antithetic=True, store_every=10)
    pair_mean = 0.5 * (ens.paths[0::2] + ens.paths[1::2]).mean(axis=0)[:, 0]
    exact = (1.0 - 1e-2) ** (10 * np.arange(11))
    assert np.abs(pair_mean - exact).max() <= 1e-12
    with pytest.raises(ValueError, match="even"):
        integrate_sde(OU, np.zeros(1), SdeRunConfig(dt=1e-2, T=0.1, n_paths=3, seed=0), antithetic=True)


def test_noise_sign_flips_only_the_noise():
    cfg = SdeRunConfig(dt=1e-2, T=0.5, n_paths=4, seed=8)
    plus = integrate_sde(OU, np.zeros(1), cfg, noise_sign=1.0)
    minus = integrate_sde(OU, np.zeros(1), cfg, noise_sign=-1.0)
    assert np.array_equal(plus.paths, -minus.paths)  # odd dynamics from 0


def test_thread_count_does_not_change_bits():
    osc = damped_oscillator_system(OscillatorParams())
    cfg = SdeRunConfig(dt=1e-3, T=1.0, n_paths=64, seed=33)
    a = integrate_sde(osc, np.array([1.0, 0.0, 0.0]), cfg, store_every=10, n_threads=1)
    b = integrate_sde(osc, np.array([1.0, 0.0, 0.0]), cfg, store_every=10, n_threads=3)
    assert np.array_equal(a.paths, b.paths)


def test_constant_energy_has_zero_drift():
    d = 1
    flat = GenericSystem(
        d=d,
        E=ScalarField(d, lambda z: 2.5, lambda z: np.zeros(d)),
        S=ScalarField(d, lambda z: -0.5 * float(z @ z), lambda z: -z),
        J=constant_operator(np.zeros((d, d))),
        K=constant_operator(np.eye(d)),
        Sigma=constant_operator(np.eye(d)),
        name="flatE",
    )
    cfg = SdeRunConfig(dt=1e-2, T=1.0, n_paths=16, seed=3)
    ens = integrate_sde(flat, np.zeros(1), cfg)
    summary = check_as_energy_conservation(ens, flat)
    assert summary.mean_drift == 0.0 and summary.max_drift == 0.0


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
def test_divergence_budget_raises():
    d = 1
    boom = GenericSystem(
        d=d,
        E=ScalarField(d, lambda z: 0.0, lambda z: np.zeros(d)),
        S=ScalarField(d, lambda z: 0.5 * float(z[0] ** 4), lambda z: 2.0 * z**3),
        J=constant_operator(np.zeros((d, d))),
        K=constant_operator(np.eye(d)),
        Sigma=constant_operator(np.eye(d)),
        name="explosive",
    )
    with pytest.raises(FloatingPointError, match="diverged"):
        integrate_sde(boom, np.full(1, 2.0), SdeRunConfig(dt=0.5, T=50.0, n_paths=16, seed=1))


def test_milstein_needs_scalar_noise():
    d = 2
    flat2 = GenericSystem(
        d=d,
        E=ScalarField(d, lambda z: 0.0, lambda z: np.zeros(d)),
        S=ScalarField(d, lambda z: -0.5 * float(z @ z), lambda z: -z),
        J=constant_operator(np.zeros((d, d))),
        K=constant_operator(np.eye(d)),
        Sigma=constant_operator(np.eye(d)),
        name="flat2",
    )
    with pytest.raises(ValueError, match="scalar noise"):
        integrate_sde(flat2, np.zeros(2), SdeRunConfig(dt=0.1, T=1.0, n_paths=2, seed=0), scheme="milstein")


def test_oscillator_fdr_on_cloud():
    osc = damped_oscillator_system(OscillatorParams(gamma=0.8, beta=2.0))
    for z in gaussian_cloud(3, n=100, seed=12):
        S = osc.Sigma.eval(z)
        assert np.abs(S @ S.T - osc.K.eval(z)).max() <= 1e-10


def test_particles_single_is_ou():
    V = ScalarField(2, lambda x: 0.5 * float(x @ x), lambda x: x)
    object.__setattr__(V, "gradient_vec", lambda X: X)
    spec = ParticleSystemSpec(d=2, n=1, V=V)
    cfg = SdeRunConfig(dt=5e-3, T=20.0, n_paths=4000, seed=21)
    ens = simulate_particles(spec, cfg, np.zeros(2), store_every=20, n_threads=4)
    pooled = ens.paths[:, ens.times >= 10.0, :].reshape(-1, 2)
    assert abs(pooled[:, 0].var() - 1.0) <= 0.03
    assert abs(pooled[:, 1].var() - 1.0) <= 0.03


def test_particles_mean_field_fixed_point():
    """Quadratic confinement plus quadratic attraction halves the spread;
    the n=64 stationary second moment is (1 + 1/n)/2."""
    V = ScalarField(1, lambda x: 0.5 * float(x @ x), lambda x: x)
    object.__setattr__(V, "gradient_vec", lambda X: X)
    psi = ScalarField(1, lambda x: 0.5 * float(x @ x), lambda x: x)
    object.__setattr__(psi, "gradient_vec", lambda X: X)
    spec = ParticleSystemSpec(d=1, n=64, V=V, psi=psi)
    cfg = SdeRunConfig(dt=1e-3, T=10.0, n_paths=16, seed=2)
    ens = simulate_particles(spec, cfg, np.zeros(64), store_every=100, n_threads=4)
    tail = ens.paths[:, ens.times >= 8.0, :]
    msq = float((tail**2).mean())
    target = 0.5 * (1.0 + 1.0 / 64.0)
    assert abs(msq - target) <= 0.1 * target
    assert abs(float(tail.mean())) <= 0.05


def test_particles_reject_odd_interaction():
    V = ScalarField(1, lambda x: 0.5 * float(x @ x), lambda x: x)
    shifted = ScalarField(1, lambda x: float(x[0] ** 3), lambda x: 3.0 * x**2)
    with pytest.raises(ValueError, match="even"):
        ParticleSystemSpec(d=1, n=4, V=V, psi=shifted)


def test_stationary_histogram_guards():
    cfg = SdeRunConfig(dt=1e-2, T=0.2, n_paths=4, seed=0)
    ens = integrate_sde(OU, np.zeros(1), cfg)
    with pytest.raises(ValueError, match="burn_in"):
        stationary_histogram(ens, 0, 1.0, np.linspace(-1, 1, 5))
    with pytest.raises(ValueError, match="no samples"):
        stationary_histogram(ens, 0, 0.0, np.linspace(40.0, 41.0, 5))
