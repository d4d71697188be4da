#!/usr/bin/env python3
"""Atom-field entanglement for the three figure families, checked against
direct integration of the Schroedinger equation."""

import math

import numpy as np

from lambda_kerr import ModelParams, NonlinearityFn, coherent_field, entropy, evolve_state
from lambda_kerr import oracle

#%% setup: |alpha|^2 = 10, atom starts in the upper level
field = coherent_field(math.sqrt(10))
families = {
    "resonant":      ModelParams.from_detunings(),
    "Kerr chi=0.4":  ModelParams.from_detunings(chi=0.4),
    "detuned 7/15":  ModelParams.from_detunings(delta2=7, delta3=15),
}
tau = np.linspace(0, 25, 2500)
print(f"Fock cut-off n_max = {field.n_max}, retained norm = {field.norm:.15f}")

#%% entropy time series; ln 2 is the ceiling here since lambda1 = lambda2
for kind in ("constant", "inverse-sqrt"):
    f = NonlinearityFn(kind)
    for label, p in families.items():
        S = entropy(evolve_state(field, p, f, tau))
        print(f"f={kind:12s} {label:13s} S(0)={S[0]:.1e}  mean S={S.mean():.4f}  max S={S.max():.4f}")

#%% the same state from brute force: 1 - |<psi_num|psi_ana>|
p = families["Kerr chi=0.4"]
f = NonlinearityFn.inverse_sqrt()
times = [1.0, 5.0, 10.0]
numeric = oracle.evolve_numeric(field, p, f, times, oracle.IntegratorConfig(method="expm"))
for t, psi in zip(times, numeric):
    gap = oracle.fidelity_gap(evolve_state(field, p, f, t), psi)
    print(f"tau={t:4.1f}  fidelity gap {gap:.1e}")
