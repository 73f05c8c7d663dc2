"""
Holonomies from sampled data
============================

Often only samples of a curve are available, as frames or just as
projectors. This walks through both file formats and the continuation that
turns a projector sequence into a smooth frame curve.
"""

import tempfile
from pathlib import Path

import numpy as np

from openholonomy import FrameCurve, compute_holonomy, continuation_frames, discrete_gamma, sorted_eigenvalues
from openholonomy import tripod as tp
from openholonomy.curves import Frame
from openholonomy.fileio import read_frame_file, write_frame_file, write_projector_file

path = tp.build_path("meridian_then_latitude", theta1=1.0, phi1=1.0)
exact = tp.analytic_holonomy(path)
workdir = Path(tempfile.mkdtemp())

###############################################################################
# Frames on disk
# --------------
# One line per sample: s, then the N*K complex entries as re/im pairs.

s = np.linspace(0, 1, 401)
write_frame_file(workdir / "frames.txt", tp.dark_curve(path).columns_at(s), s)
print(open(workdir / "frames.txt").readline().strip(), "(N K n_samples)")

s_read, mats, _ = read_frame_file(workdir / "frames.txt")
curve = FrameCurve.discrete(mats, s_read)
result = compute_holonomy(curve, n_steps=len(mats) - 1)
print("sampled-frame holonomy error:", np.linalg.norm(result.u_g - exact))

# The projector product along the samples converges to Gamma at first order.
print("discrete Gamma deviation:", np.linalg.norm(discrete_gamma(curve.samples) - result.gamma_operator))

###############################################################################
# Projectors only
# ---------------
# Without frames there is no gauge to start from. Continuation projects each
# frame onto the next subspace and re-orthonormalizes, which transports the
# frame in parallel. The holonomy then sits in U_M, and its eigenvalues match.

projs = [tp.dark_projector(path, x) for x in s]
write_projector_file(workdir / "projectors.txt", projs, rank=2, s_values=s)
cont = continuation_frames(projs, Frame(tp.dark_columns(0.0, 0.0)), s)
result = compute_holonomy(cont, n_steps=len(projs) - 1)
print("Pexp after continuation is nearly trivial:", np.linalg.norm(result.pexp - np.eye(2)))
print("eigenvalues:", np.round(sorted_eigenvalues(result.u_g), 5))
print("expected:   ", np.round(sorted_eigenvalues(exact), 5))

###############################################################################
# The same from the command line
# ------------------------------
#     openholonomy holonomy --frames frames.txt --oracle gamma --output result.json
#     openholonomy holonomy --projectors projectors.txt
print("files written to", workdir)
