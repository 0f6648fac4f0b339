"""Numerical laboratory for entropy-driven evolution equations.

Simulates deterministic and stochastic systems whose drift splits into a
conservative part and an entropic part, coarse-grains microscopic models
(reflected ball diffusions, oscillator heat baths) to macroscopic ones, and
checks the resulting drifts, invariant measures, memory kernels and rate
functions against closed forms.
"""

__version__ = "0.1.0"

from . import ball_cg, generic_core, generic_sde, harness, heat_bath, ldp, pde_gf

__all__ = [
    "ball_cg",
    "generic_core",
    "generic_sde",
    "harness",
    "heat_bath",
    "ldp",
    "pde_gf",
]
