"""
Slow driving implements the holonomy
====================================

The holonomy is the gate a quantum system picks up when its Hamiltonian is
changed slowly enough that it never leaves the degenerate dark space. We
integrate the Schrodinger equation for the tripod over increasing total
times and watch the leakage fall and the gate fidelity approach one.
"""

import numpy as np

from openholonomy import compute_holonomy, evolve, extract_gate
from openholonomy import tripod as tp

# Smooth easing stops at every waypoint, which keeps the driving gentle.
path = tp.build_path("meridian_then_latitude", theta1=1.0, phi1=1.5, easing="smooth")
reference = compute_holonomy(tp.dark_curve(path), n_steps=4096)
model = tp.TripodModel(path)

for t_total, n_time in ((5, 2_000), (50, 10_000), (500, 100_000)):
    run = evolve(model, t_total, n_time, reference.initial_frame.columns,
                 projector=lambda s: tp.dark_projector(path, s))
    gate, fidelity = extract_gate(run, reference)
    print(f"T = {t_total:4d}  max leakage {run.max_leakage:.2e}  fidelity {fidelity:.8f}")

###############################################################################
# Dynamical phase
# ---------------
# Shifting every level by E0 multiplies the evolution by exp(-i E0 T). The
# gate extraction divides that phase back out when given the energy. The
# fidelity |Tr(gate^H U_g)| / K is blind to a global phase, the gate is not.

shifted = tp.TripodModel(path, energy_shift=0.3)
run = evolve(shifted, 200.0, 20_000, reference.initial_frame.columns)
raw, _ = extract_gate(run, reference)
fixed, fidelity = extract_gate(run, reference, energy=lambda s: 0.3)
print("distance to U_g with the phase left in:", np.linalg.norm(raw - reference.u_g))
print("distance to U_g with it removed:       ", np.linalg.norm(fixed - reference.u_g))
print("gate, phase removed:")
print(np.round(fixed, 5))
