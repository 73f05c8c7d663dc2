"""
Holonomic gates on the tripod dark space
========================================

Three ground levels couple to one excited level. Two dark states span a
qubit, and steering the couplings around the sphere of angles (theta, phi)
rotates that qubit. Here the rotation is computed numerically and compared
with its closed form in each hemisphere.
"""

import numpy as np

from openholonomy import compute_holonomy, commutator_defect
from openholonomy import tripod as tp

# Down the phi = 0 meridian to theta1, then along the latitude to phi1.
path = tp.build_path("meridian_then_latitude", theta1=np.pi / 3, phi1=np.pi / 2)
result = compute_holonomy(tp.dark_curve(path), n_steps=10_000)

print("northern endpoint:", result.classification.value)
print(np.round(result.u_g, 6))

# A rotation exp(-i a sigma_y) with a = pi/4, the solid angle enclosed once
# the path is closed by the geodesic back to the pole.
print("closed form error:", np.linalg.norm(result.u_g - tp.analytic_holonomy(path)))
print("solid angle:", tp.solid_angle_wedge(np.pi / 3, np.pi / 2))

###############################################################################
# Southern hemisphere
# -------------------
# Past the equator the overlap with the starting frame flips orientation and
# U_M picks up a -sigma_z. Now U_M and the path-ordered part no longer
# commute: the holonomy is genuinely non-Abelian.

path = tp.build_path("meridian_then_latitude", theta1=3 * np.pi / 4, phi1=1.1)
result = compute_holonomy(tp.dark_curve(path), n_steps=10_000)
print("southern endpoint:", result.classification.value)
print("closed form error:", np.linalg.norm(result.u_g - tp.analytic_holonomy(path)))
print("commutator defect:", commutator_defect(result))

###############################################################################
# On the equator
# --------------
# Exactly on the equator one initial dark state is orthogonal to the final
# dark space. The overlap has rank one and the holonomy is a partial isometry.

path = tp.build_path("meridian_then_latitude", theta1=np.pi / 2, phi1=0.9)
result = compute_holonomy(tp.dark_curve(path), n_steps=10_000)
print("equator endpoint:", result.overlap)
print("singular values:", result.overlap.singulars)
print(np.round(result.u_g, 6))

###############################################################################
# Closed loops
# ------------
# Around a full latitude the endpoints coincide, U_M is the identity and the
# result is the cyclic holonomy: a rotation by the cap's solid angle.

theta = np.pi / 4
result = compute_holonomy(tp.dark_curve(tp.build_path("latitude_loop", theta=theta)), n_steps=10_000)
print("U_M:", np.round(result.u_m, 12).real)
print("rotation angle:", np.arctan2(result.u_g[1, 0].real, result.u_g[0, 0].real))
print("cap solid angle:", 2 * np.pi * (1 - np.cos(theta)))
