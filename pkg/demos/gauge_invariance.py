"""
What a gauge change does and does not move
==========================================

A curve of frames fixes a curve of subspaces plus a choice of basis at every
point. Re-choosing that basis smoothly (a gauge change) shifts the
path-ordered exponential by U(1)^H ... U(0), which changes its spectrum when
U(1) != U(0). The open-path holonomy U_g = U_M Pexp only conjugates by U(0),
so its eigenvalues are physical.
"""

import numpy as np

from openholonomy import apply_gauge, compute_holonomy, sorted_eigenvalues
from openholonomy.testing import random_curve, random_gauge

rng = np.random.default_rng(1)
curve = random_curve(rng, n=5, k=2)
gauge = random_gauge(rng, k=2)
gauged = apply_gauge(curve, gauge)

n = 8192
before = compute_holonomy(curve, n)
after = compute_holonomy(gauged, n)

print("U_g eigenvalues before:", np.round(sorted_eigenvalues(before.u_g), 9))
print("U_g eigenvalues after: ", np.round(sorted_eigenvalues(after.u_g), 9))
print("Pexp eigenvalues before:", np.round(sorted_eigenvalues(before.pexp), 6))
print("Pexp eigenvalues after: ", np.round(sorted_eigenvalues(after.pexp), 6))

###############################################################################
# The full transformation law
# ---------------------------
# U_g itself transforms as U(0)^H U_g U(0); the operator Gamma, which maps the
# initial subspace into the final one, does not move at all.

u0 = gauge(0.0)
print("covariance error:", np.linalg.norm(after.u_g - u0.conj().T @ before.u_g @ u0))
print("Gamma change:    ", np.linalg.norm(after.gamma_operator - before.gamma_operator))

###############################################################################
# Accuracy against step count
# ---------------------------
# The midpoint rule behind Pexp is second order, so covariance holds up to a
# discretization error that drops fourfold per doubling of n.

for n in (256, 512, 1024, 2048):
    a, b = compute_holonomy(curve, n), compute_holonomy(gauged, n)
    print(n, np.linalg.norm(b.u_g - u0.conj().T @ a.u_g @ u0))
