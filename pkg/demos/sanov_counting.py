"""Counting estimates behind the entropy functional.

Multinomial coordinates make the large-deviation rate function elementary:
the log-probability of an empirical histogram is minus n times a relative
entropy, up to a Stirling remainder that dies like log(n)/n.  This script
tabulates that remainder, then checks the continuous rate against an exact
binomial tail.
"""

import math

import numpy as np

from entrolab import ldp

MU = (0.5, 0.5)

print("Stirling remainder |(1/n) log P(counts) + H(rho|mu)| for the balanced histogram:")
rows = []
for n in (30, 90, 270, 810):
    counts = (n // 2, n - n // 2)
    gap = ldp.stirling_gap(counts, MU)
    rows.append(gap)
    print(f"  n={n:4d}  gap {gap:.6f}   bound log(n+1)*2/n = {2 * math.log(n + 1) / n:.6f}")
print("remainder decreasing:", "PASS" if all(a > b for a, b in zip(rows, rows[1:])) else "FAIL")

# rate function value with a closed form: H((1/2,1/2)|(0.7,0.3))
rate = ldp.sanov_rate(
    ldp.DiscreteMeasure(np.array([0.5, 0.5])), ldp.DiscreteMeasure(np.array([0.7, 0.3]))
)
exact = 0.5 * math.log(0.5 / 0.7) + 0.5 * math.log(0.5 / 0.3)
print(f"sanov_rate = {rate:.10f}, closed form {exact:.10f}, diff {abs(rate - exact):.2e}")

# exact binomial tail exponent vs the rate function at the tilted point
n, mu1, thr = 400, 0.7, 0.5
expo = ldp.binomial_tail_exponent(n, mu1, thr)
print(f"-(1/n) log P(S_{n}/{n} <= {thr}) = {expo:.6f} at n={n}; rate = {rate:.6f}")
print("tail exponent near the rate:", "PASS" if abs(expo - rate) < 0.02 else "FAIL")

# continuous entropy on a grid density: hard rods at a=0 is plain Boltzmann,
# and a unit Gaussian has -integral rho log rho = (1 + log 2 pi)/2
xs = np.linspace(-5.0, 5.0, 600)
rho = ldp.GridDensity1D(xs, np.exp(-0.5 * (xs - 0.3) ** 2)).normalize()
S = ldp.entropy_catalog("hard_rods", rho, a=0.0)
closed = 0.5 * (1.0 + math.log(2.0 * math.pi))
print(f"Boltzmann entropy of a unit Gaussian: {S:.6f} (closed form {closed:.6f})")
print("entropy functional:", "PASS" if abs(S - closed) < 1e-3 else "FAIL")
