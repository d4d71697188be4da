#!/usr/bin/env python3
"""Normalised squeezing of orders 1-3 for the harmonious-state coupling
f(n) = 1/sqrt(n) at resonance, and its suppression by the Kerr medium."""

import math

import numpy as np

from lambda_kerr import ModelParams, NonlinearityFn, coherent_field, evolve_state, squeezing

field = coherent_field(math.sqrt(10))
tau = np.linspace(0, 25, 2500)
f = NonlinearityFn.inverse_sqrt()

#%% depth decreases with the order
s = evolve_state(field, ModelParams.from_detunings(), f, tau)
for k in (1, 2, 3):
    sx, sy = squeezing(s, k)
    print(f"order {k}: min S_X = {sx.min():+.4f} at tau = {tau[sx.argmin()]:.2f}, "
          f"S_X < 0 on {np.mean(sx[1:2000] < 0):.1%} of (0, 20]")

#%% first-order S_X is slightly positive right after each revival, tau = k pi / sqrt 2
sx = squeezing(s, 1)[0]
for k in range(5):
    t0 = k * math.pi / math.sqrt(2)
    near = np.abs(tau - t0) < 0.1
    print(f"revival {k}: max S_X near tau={t0:5.2f} is {sx[near].max():+.2e}")

#%% Kerr medium wipes the squeezing out
for kind in ("constant", "inverse-sqrt"):
    sx = squeezing(evolve_state(field, ModelParams.from_detunings(chi=0.4), NonlinearityFn(kind), tau), 1)[0]
    print(f"chi/lambda=0.4, f={kind}: S_X < -0.01 on {np.mean(sx < -0.01):.1%} of the grid")
