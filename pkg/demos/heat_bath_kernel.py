"""
Oscillator heat bath: memory kernel and fluctuation whiteness
=============================================================

A distinguished oscillator coupled to n bath modes on a frequency ladder obeys
a closed integro-differential equation whose memory kernel kappa_n converges,
as n grows with n * domega fixed large, to a delta at the origin of weight
gamma.  The conjugate fluctuation process converges to white noise.  Both
limits are checked here at modest n, along with exact total-energy
conservation of one explicit micro realization.
"""

import numpy as np

from entrolab import heat_bath

##########################################
# kernel mass against a smooth test bump #
##########################################

GAMMA = 1.0
SIGMA = 0.5

phi = lambda t: np.exp(-0.5 * (t / SIGMA) ** 2)

print("kernel quadrature |integral phi kappa_n - gamma phi(0)| per n:")
errs = []
for n in (500, 2000, 8000):
    bath = heat_bath.HeatBathParams(n=n, beta=1.0, gamma=GAMMA, delta_omega=0.01)
    # trapezoid grid fine enough for the fastest mode
    h = 0.4 / (n * bath.delta_omega)
    ts = np.arange(0.0, 5.0 + h, h)
    errs.append(heat_bath.kappa_convergence_error(bath, phi, ts))
    print(f"  n={n:5d}  {errs[-1]:.5f}")
print("kernel concentrates:", "PASS" if errs[-1] < 0.05 and errs[-1] < errs[0] else "FAIL")

##########################################
# fluctuation increments look white      #
##########################################

# bandwidth n * domega = 1000 keeps the residual lag-1 memory ~ 1/(pi n domega)
# well under the null's 3-stderr line at this sample size
bath = heat_bath.HeatBathParams(n=20_000, beta=1.0, gamma=GAMMA, seed=123, delta_omega=0.05)
zeta0 = heat_bath.sample_conditional_ensemble(bath, [1.0, 0.0], 150)
DELTA = 0.05
grid = np.arange(101) * DELTA
_, B = heat_bath.noise_process(zeta0, bath, grid)
rep = heat_bath.white_noise_tests(B, DELTA)
print(f"{rep.n_increments} increments: var {rep.variance:.5f} (target {DELTA}), "
      f"excess kurtosis {rep.excess_kurtosis:+.3f}, lag-1 {rep.lag1_cov:+.2e}")
flags = rep.passes(DELTA)
print("whiteness flags:", "PASS" if all(flags.values()) else f"FAIL {flags}")

##########################################
# one explicit realization, exact energy #
##########################################

micro = heat_bath.HeatBathParams(n=256, beta=1.0, gamma=0.5, E0=1.0, seed=9, delta_omega=0.1)
state = heat_bath.sample_conditional(micro, [1.0, 0.0])
traj = heat_bath.evolve_micro(state, dt=5e-4, T=10.0, store_every=40)
cg = heat_bath.coarse_grain(traj, micro)
E = heat_bath.h_A(micro, cg.states[:, :2]) + cg.states[:, 2]
rel = float(np.abs(E - E[0]).max() / micro.E0)
print(f"coarse-grained energy h_A + e conserved to {rel:.2e}",
      "PASS" if rel < 1e-6 else "FAIL")
exchanged = float(cg.states[0, 2] - cg.states[-1, 2])
print(f"heat moved through the account e over [0,10]: {exchanged:+.4f}")
