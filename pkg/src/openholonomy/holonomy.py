"""
Open-path non-Abelian holonomy.

Conventions
-----------
* A frame is an N x K array ``F`` whose columns are the basis vectors
  ``|a_k>``.
* The connection is ``A[k, l] = <da_k/ds | a_l>``, i.e. ``A = F'^H F``.
  It is anti-Hermitian.
* Path ordering puts later s on the LEFT::

      Pexp = exp(ds A(s_{n-1})) ... exp(ds A(s_1)) exp(ds A(s_0))

  which is the ordering of the product ``P(1) P(1 - ds) ... P(0)``.
* The overlap matrix of frames ``A`` and ``B`` is ``M = F_A^H F_B``; its left
  polar decomposition ``M = R U_M`` picks out the parallel frame
  ``F_B U_M^H`` and the holonomy is ``U_g = U_M Pexp``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .curves import SMOOTHNESS_THRESHOLD, Frame, FrameCurve, sample_curve
from .errors import CurveTooCoarseError, InvalidInputError, OrthogonalEndpointsError, PartialOverlapError
from .matcore import DEFAULT_RANK_TOL, dagger, expm_antihermitian, is_unitary, polar_decompose, svd

DEFAULT_FD_STEP = 1e-6
# anti-Hermiticity defect of a finite-difference connection that signals a broken curve
CONNECTION_DEFECT_LIMIT = 1e-4
ORDERINGS = ("later-left", "later-right")


class Overlap(enum.Enum):
    OVERLAPPING = "Overlapping"
    PARTIALLY_OVERLAPPING = "PartiallyOverlapping"
    ORTHOGONAL = "Orthogonal"


@dataclass(frozen=True)
class ConnectionSample:
    s: float
    a_matrix: np.ndarray
    defect: float = 0.0


@dataclass(frozen=True)
class OverlapReport:
    m_matrix: np.ndarray
    positive_part: np.ndarray
    isometry_part: np.ndarray
    singulars: np.ndarray
    classification: Overlap
    rank: int
    rank_tol: float
    # some singular value lies within a factor 10 of rank_tol
    near_singular: bool = False

    def __str__(self):
        if self.classification is Overlap.PARTIALLY_OVERLAPPING:
            return f"PartiallyOverlapping({self.rank})"
        return self.classification.value


@dataclass(frozen=True)
class HolonomyResult:
    u_g: np.ndarray
    pexp: np.ndarray
    u_m: np.ndarray
    parallel_final_frame: Frame
    gamma_operator: np.ndarray
    overlap: OverlapReport
    initial_frame: Frame
    final_frame: Frame
    n_steps: int
    dynamical_phase: complex = 1.0 + 0.0j

    @property
    def classification(self) -> Overlap:
        return self.overlap.classification

    @property
    def rank(self) -> int:
        return self.overlap.rank


def _antihermitize(a):
    defect = np.linalg.norm(a + dagger(a), axis=(-2, -1))
    return 0.5 * (a - dagger(a)), defect


def _fd_derivative(curve: FrameCurve, s: float, h: float) -> np.ndarray:
    if s - h >= 0.0 and s + h <= 1.0:
        fp, fm = curve.columns_at([s + h, s - h])
        return (fp - fm) / (2 * h)
    if s - h < 0.0:
        f0, f1, f2 = curve.columns_at([s, s + h, s + 2 * h])
        return (-3 * f0 + 4 * f1 - f2) / (2 * h)
    f0, f1, f2 = curve.columns_at([s, s - h, s - 2 * h])
    return (3 * f0 - 4 * f1 + f2) / (2 * h)


def _check_defect(defect, s_values):
    worst = int(np.argmax(defect))
    if defect[worst] > CONNECTION_DEFECT_LIMIT:
        raise CurveTooCoarseError(
            f"connection at s={s_values[worst]} has anti-Hermiticity defect {defect[worst]:.3e}; "
            "the curve is not smooth at this resolution",
            index=worst,
        )


def _discrete_step_generators(frames) -> np.ndarray:
    """``ds * A`` on each interval of a sampled curve, from consecutive overlaps.

    With ``B = F_{j+1}^H F_j`` the anti-Hermitian part ``(B - B^H) / 2`` equals
    ``ds * A`` at the interval midpoint up to third order in ds.
    """
    cols = np.stack([f.columns for f in frames])
    b = dagger(cols[1:]) @ cols[:-1]
    smin = np.linalg.svd(b, compute_uv=False)[:, -1]
    bad = np.flatnonzero(smin <= SMOOTHNESS_THRESHOLD)
    if bad.size:
        j = int(bad[0])
        raise CurveTooCoarseError(
            f"samples at s-index {j} and {j + 1} overlap too weakly (smallest singular value "
            f"{smin[j]:.3e} <= {SMOOTHNESS_THRESHOLD}); supply more samples",
            index=j + 1,
        )
    return 0.5 * (b - dagger(b))


def connection_at(curve: FrameCurve, s: float, fd_step: float = DEFAULT_FD_STEP) -> ConnectionSample:
    """
    Connection matrix ``A[k, l] = <da_k/ds | a_l>`` at parameter ``s``.

    Analytic curves use their derivative sampler when they have one and
    central finite differences of size ``fd_step`` otherwise (second-order
    one-sided stencils at the ends). Discrete curves use the overlap of the
    two stored samples bracketing ``s``. The result is projected onto the
    anti-Hermitian matrices; the size of the removed Hermitian part is kept in
    ``defect``.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidInputError(f"s={s} outside [0, 1]")
    if curve.kind == "discrete":
        sv = curve.s_values
        j = int(np.clip(np.searchsorted(sv, s, side="right") - 1, 0, len(sv) - 2))
        step = _discrete_step_generators(curve.samples[j:j + 2])[0]
        return ConnectionSample(s=s, a_matrix=step / (sv[j + 1] - sv[j]), defect=0.0)

    f = curve.columns_at([s])[0]
    if curve.derivative_sampler is not None:
        df = curve.derivative_at([s])[0]
    else:
        df = _fd_derivative(curve, s, fd_step)
    a, defect = _antihermitize(dagger(df) @ f)
    _check_defect([defect], [s])
    return ConnectionSample(s=s, a_matrix=a, defect=float(defect))


def ordered_product(factors, ordering: str = "later-left") -> np.ndarray:
    """Product of a sequence of square matrices indexed by increasing s."""
    if ordering not in ORDERINGS:
        raise InvalidInputError(f"unknown ordering {ordering!r}")
    out = np.eye(factors.shape[-1], dtype=np.complex128)
    if ordering == "later-left":
        for g in factors:
            out = g @ out
    else:
        for g in factors:
            out = out @ g
    return out


def pexp_connection(
    curve: FrameCurve,
    n_steps: int,
    fd_step: float = DEFAULT_FD_STEP,
    ordering: str = "later-left",
) -> np.ndarray:
    """
    Path-ordered exponential of the connection over [0, 1].

    Analytic curves use the midpoint rule, ``s_j = (j + 1/2) / n``, which is
    second order in ``1/n``; steps containing one of the curve's breakpoints
    are split there. Discrete curves use their stored samples (or an
    evenly thinned subset when ``n_steps`` is smaller).
    """
    if n_steps < 1:
        raise InvalidInputError("n_steps must be >= 1")
    if curve.kind == "discrete":
        steps = _discrete_step_generators(sample_curve(curve, n_steps))
        return ordered_product(expm_antihermitian(steps), ordering)

    edges = np.linspace(0.0, 1.0, n_steps + 1)
    if curve.breakpoints:
        edges = np.union1d(edges, curve.breakpoints)
    widths = np.diff(edges)
    mids = edges[:-1] + 0.5 * widths
    f = curve.columns_at(mids)
    if curve.derivative_sampler is not None:
        df = curve.derivative_at(mids)
    elif mids[0] - fd_step >= 0.0 and mids[-1] + fd_step <= 1.0:
        df = (curve.columns_at(mids + fd_step) - curve.columns_at(mids - fd_step)) / (2 * fd_step)
    else:
        df = np.stack([_fd_derivative(curve, s, fd_step) for s in mids])
    a, defect = _antihermitize(dagger(df) @ f)
    _check_defect(defect, mids)
    return ordered_product(expm_antihermitian(a * widths[:, None, None]), ordering)


def discrete_gamma(frames) -> np.ndarray:
    """``P(1) P(1 - ds) ... P(ds) P(0)`` as an N x N operator."""
    if len(frames) < 2:
        raise InvalidInputError("discrete_gamma needs at least two frames")
    cols = [f.columns if isinstance(f, Frame) else np.asarray(f) for f in frames]
    if any(c.shape != cols[0].shape for c in cols):
        raise InvalidInputError("frames must share N and K")
    gamma = cols[0] @ dagger(cols[0])
    for c in cols[1:]:
        gamma = c @ (dagger(c) @ gamma)
    return gamma


def overlap(frame_a: Frame, frame_b: Frame, rank_tol: float = DEFAULT_RANK_TOL) -> OverlapReport:
    """Overlap matrix ``M[k, l] = <a_k | b_l>`` with its polar parts and classification."""
    if frame_a.columns.shape != frame_b.columns.shape:
        raise InvalidInputError(
            f"frames have different shapes {frame_a.columns.shape} and {frame_b.columns.shape}"
        )
    m = dagger(frame_a.columns) @ frame_b.columns
    pol = polar_decompose(m, rank_tol)
    k = m.shape[0]
    if pol.rank == k:
        cls = Overlap.OVERLAPPING
    elif pol.rank == 0:
        cls = Overlap.ORTHOGONAL
    else:
        cls = Overlap.PARTIALLY_OVERLAPPING
    s = pol.singulars
    near = bool(np.any((s > rank_tol / 10) & (s < rank_tol * 10)))
    return OverlapReport(
        m_matrix=m,
        positive_part=pol.positive_part,
        isometry_part=pol.isometry_part,
        singulars=s,
        classification=cls,
        rank=pol.rank,
        rank_tol=rank_tol,
        near_singular=near,
    )


def parallel_frame(frame_a: Frame, frame_b: Frame, rank_tol: float = DEFAULT_RANK_TOL) -> Frame:
    """The frame of span(frame_b) closest to frame_a: ``F_B U_M^H``.

    Its overlap with ``frame_a`` is Hermitian positive definite.
    """
    rep = overlap(frame_a, frame_b, rank_tol)
    if rep.classification is not Overlap.OVERLAPPING:
        raise PartialOverlapError(
            f"subspaces are {rep}; the parallel frame is not unique, use compute_holonomy "
            "for the partial holonomy"
        )
    return Frame(frame_b.columns @ dagger(rep.isometry_part))


def frame_distance(frame_a: Frame, frame_b: Frame) -> float:
    """``D(A, B) = sum_k || a_k - b_k ||^2``."""
    return float(np.sum(np.abs(frame_a.columns - frame_b.columns) ** 2))


def _completed_unitary(m) -> np.ndarray:
    """A unitary agreeing with the polar isometry of ``m`` on its support."""
    dec = svd(m)
    return dec.left @ dec.right_h


def compute_holonomy(
    curve: FrameCurve,
    n_steps: int,
    rank_tol: float = DEFAULT_RANK_TOL,
    fd_step: float = DEFAULT_FD_STEP,
    ordering: str = "later-left",
    energy=None,
    t_total: Optional[float] = None,
) -> HolonomyResult:
    """
    Open-path holonomy ``U_g = U_M Pexp`` of a frame curve.

    For partially overlapping endpoints ``U_M = R^+ M`` is a partial isometry
    and so is the returned ``u_g`` (the partial holonomy). The parallel final
    frame is then ``F(1) W^H`` with ``W`` a unitary that agrees with ``U_M``
    on its support.

    ``energy`` (a function of s) and ``t_total`` optionally set the dynamical
    phase ``exp(-i t_total * int E ds)`` recorded on the result.
    """
    f0 = curve.frame(0.0)
    f1 = curve.frame(1.0)
    rep = overlap(f0, f1, rank_tol)
    if rep.classification is Overlap.ORTHOGONAL:
        raise OrthogonalEndpointsError(
            "initial and final subspaces are orthogonal; the holonomy is undefined"
        )
    pexp = pexp_connection(curve, n_steps, fd_step, ordering)
    u_m = rep.isometry_part
    u_g = u_m @ pexp
    if rep.classification is Overlap.OVERLAPPING:
        w = u_m
    else:
        w = _completed_unitary(rep.m_matrix)
    parallel = Frame(f1.columns @ dagger(w))
    gamma = f1.columns @ pexp @ dagger(f0.columns)

    phase = 1.0 + 0.0j
    if energy is not None:
        if t_total is None:
            raise InvalidInputError("t_total is required with energy")
        integral, _ = integrate.quad(energy, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
        phase = complex(np.exp(-1j * t_total * integral))

    return HolonomyResult(
        u_g=u_g,
        pexp=pexp,
        u_m=u_m,
        parallel_final_frame=parallel,
        gamma_operator=gamma,
        overlap=rep,
        initial_frame=f0,
        final_frame=f1,
        n_steps=n_steps,
        dynamical_phase=phase,
    )


def gauge_transform_holonomy(result: HolonomyResult, u0) -> np.ndarray:
    """``U(0)^H U_g U(0)``: how the holonomy changes under a gauge with value u0 at s=0."""
    u0 = np.asarray(u0, dtype=np.complex128)
    if not is_unitary(u0, 1e-10) or u0.shape != result.u_g.shape:
        raise InvalidInputError("u0 must be a unitary matching the holonomy's shape")
    return dagger(u0) @ result.u_g @ u0


def decompose_gamma(result: HolonomyResult):
    """
    Split Gamma into ``t_iso`` (initial frame -> parallel final frame) and
    ``r_rot`` (the holonomy acting on the final subspace).

    ``r_rot @ t_iso`` reproduces ``result.gamma_operator``.
    """
    if result.classification is not Overlap.OVERLAPPING:
        raise PartialOverlapError("Gamma decomposition requires overlapping endpoints")
    fbar = result.parallel_final_frame.columns
    t_iso = fbar @ dagger(result.initial_frame.columns)
    r_rot = fbar @ result.u_g @ dagger(fbar)
    return t_iso, r_rot


def commutator_defect(result: HolonomyResult) -> float:
    """``|| [U_M, Pexp] ||_F``; zero when the pair has Abelian structure."""
    if result.classification is not Overlap.OVERLAPPING:
        raise PartialOverlapError("commutator_defect requires overlapping endpoints")
    return float(np.linalg.norm(result.u_m @ result.pexp - result.pexp @ result.u_m))


def sorted_eigenvalues(u) -> np.ndarray:
    """Eigenvalues sorted by phase angle in (-pi, pi], then by modulus."""
    ev = np.linalg.eigvals(np.asarray(u))
    ang = np.angle(ev)
    ang = np.where(ang <= -np.pi, np.pi, ang)
    order = np.lexsort((np.abs(ev), ang))
    return ev[order]
