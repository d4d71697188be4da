#!/usr/bin/env python3
"""Husimi Q of the field at lambda t = pi/2, in the Fock-diagonal form (the
default) and with field coherences included."""

import math

from lambda_kerr import ModelParams, NonlinearityFn, coherent_field, evolve_state, husimi_grid, husimi_point

field = coherent_field(math.sqrt(10))
cases = {
    "7a  f=1,         resonant": (ModelParams.from_detunings(), NonlinearityFn.constant()),
    "7b  f=1/sqrt(n), resonant": (ModelParams.from_detunings(), NonlinearityFn.inverse_sqrt()),
    "7c  f=1,         chi=0.4 ": (ModelParams.from_detunings(chi=0.4), NonlinearityFn.constant()),
}

#%% initial coherent state: a single Gaussian of height 1/pi at alpha0
s0 = evolve_state(field, *cases["7a  f=1,         resonant"], 0.0)
print(f"Q(alpha0, t=0) = {husimi_point(s0, math.sqrt(10), exact=True):.9f}, 1/pi = {1 / math.pi:.9f}")

#%% snapshots
for label, (p, f) in cases.items():
    s = evolve_state(field, p, f, math.pi / 2)
    for exact in (False, True):
        g = husimi_grid(s, exact=exact)
        print(f"{label} exact={exact!s:5s} max={g.values.max():.4f} "
              f"centre={g.value_at(0, 0):.2e} mass={g.total_mass():.6f}")
