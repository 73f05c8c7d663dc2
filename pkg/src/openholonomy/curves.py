"""
Curves of frames over s in [0, 1].

A frame is an N x K matrix with orthonormal columns spanning a subspace; a
curve of frames carries both the path in the Grassmannian and a choice of
gauge along it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CurveTooCoarseError, InvalidInputError
from .matcore import as_cmatrix, dagger, is_unitary, symmetric_orthonormalize

ORTHO_TOL = 1e-10
# smallest singular value of consecutive overlaps must exceed this
SMOOTHNESS_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class Frame:
    columns: np.ndarray

    def __post_init__(self):
        cols = as_cmatrix(self.columns, "frame columns")
        n, k = cols.shape
        if k > n:
            raise InvalidInputError(f"frame has K={k} > N={n}")
        defect = np.linalg.norm(dagger(cols) @ cols - np.eye(k))
        if defect > ORTHO_TOL:
            raise InvalidInputError(f"frame columns are not orthonormal (defect {defect:.3e})")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def dim_total(self) -> int:
        return self.columns.shape[0]

    @property
    def dim_sub(self) -> int:
        return self.columns.shape[1]

    def projector(self) -> np.ndarray:
        return self.columns @ dagger(self.columns)


def _stack(fn, s_values, vectorized):
    s_values = np.asarray(s_values, dtype=float)
    if vectorized:
        return np.asarray(fn(s_values), dtype=np.complex128)
    return np.stack([np.asarray(fn(s), dtype=np.complex128) for s in s_values])


@dataclass(frozen=True)
class GaugeField:
    """
    s-dependent K x K unitary, with an optional analytic derivative.

    With ``vectorized=True`` the samplers take a 1-D array of s values and
    return a stack of matrices.
    """

    sampler: Callable
    derivative_sampler: Optional[Callable] = None
    vectorized: bool = False

    def __call__(self, s: float) -> np.ndarray:
        u = self.values([s])[0]
        if not is_unitary(u, 1e-10):
            raise InvalidInputError(f"gauge is not unitary at s={s}")
        return u

    def values(self, s_values) -> np.ndarray:
        return _stack(self.sampler, s_values, self.vectorized)

    def derivatives(self, s_values) -> Optional[np.ndarray]:
        if self.derivative_sampler is None:
            return None
        return _stack(self.derivative_sampler, s_values, self.vectorized)

    @classmethod
    def constant(cls, u) -> "GaugeField":
        u = np.asarray(u, dtype=np.complex128)
        return cls(lambda s: u, lambda s: np.zeros_like(u))


@dataclass(frozen=True)
class FrameCurve:
    """
    A curve of frames.

    Analytic curves evaluate ``sampler(s)`` (and ``derivative_sampler(s)`` for
    d/ds of the columns when available); with ``vectorized=True`` both take a
    1-D array of s and return stacked N x K arrays. Discrete curves hold stored samples
    at increasing ``s_values`` from 0 to 1; off-grid queries return the
    nearest stored sample.
    """

    sampler: Callable[[float], np.ndarray]
    derivative_sampler: Optional[Callable[[float], np.ndarray]] = None
    kind: str = "analytic"
    s_values: Optional[np.ndarray] = None
    samples: Optional[tuple] = field(default=None, repr=False)
    # interior s values where the curve is only piecewise smooth
    breakpoints: tuple = ()
    vectorized: bool = False

    @classmethod
    def analytic(cls, sampler, derivative_sampler=None, breakpoints=(), vectorized=False) -> "FrameCurve":
        bps = tuple(sorted(float(b) for b in breakpoints if 0.0 < b < 1.0))
        return cls(
            sampler=sampler,
            derivative_sampler=derivative_sampler,
            kind="analytic",
            breakpoints=bps,
            vectorized=vectorized,
        )

    @classmethod
    def discrete(cls, frames: Sequence, s_values=None) -> "FrameCurve":
        frames = tuple(f if isinstance(f, Frame) else Frame(f) for f in frames)
        if len(frames) < 2:
            raise InvalidInputError("a discrete curve needs at least two samples")
        shape = frames[0].columns.shape
        if any(f.columns.shape != shape for f in frames):
            raise InvalidInputError("all frames of a curve must share N and K")
        if s_values is None:
            s_values = np.linspace(0.0, 1.0, len(frames))
        s_values = np.asarray(s_values, dtype=float)
        if s_values.shape != (len(frames),):
            raise InvalidInputError("s_values must have one entry per frame")
        if s_values[0] != 0.0 or s_values[-1] != 1.0 or np.any(np.diff(s_values) <= 0):
            raise InvalidInputError("s_values must increase strictly from 0 to 1")

        def nearest(s):
            return frames[int(np.argmin(np.abs(s_values - s)))].columns

        return cls(sampler=nearest, kind="discrete", s_values=s_values, samples=frames)

    def frame(self, s: float) -> Frame:
        if self.kind == "discrete":
            return self.samples[int(np.argmin(np.abs(self.s_values - s)))]
        return Frame(self.columns_at([s])[0])

    def columns_at(self, s_values) -> np.ndarray:
        """Stacked column matrices, shape (len(s_values), N, K)."""
        return _stack(self.sampler, s_values, self.vectorized)

    def derivative_at(self, s_values) -> Optional[np.ndarray]:
        if self.derivative_sampler is None:
            return None
        return _stack(self.derivative_sampler, s_values, self.vectorized)

    def __call__(self, s: float) -> Frame:
        return self.frame(s)

    @property
    def shape(self) -> tuple:
        return self.frame(0.0).columns.shape


def sample_curve(curve: FrameCurve, n_steps: int) -> list:
    """Frames at s = 0, 1/n, ..., 1 (``n_steps + 1`` of them)."""
    if n_steps < 1:
        raise InvalidInputError("n_steps must be >= 1")
    if curve.kind == "discrete":
        stored = len(curve.samples) - 1
        if n_steps > stored:
            raise CurveTooCoarseError(
                f"discrete curve stores {stored} intervals; refusing to resample to {n_steps}"
            )
        if n_steps == stored:
            return list(curve.samples)
    grid = np.linspace(0.0, 1.0, n_steps + 1)
    return [curve.frame(s) for s in grid]


def apply_gauge(curve: FrameCurve, gauge: GaugeField) -> FrameCurve:
    """New curve with columns ``F(s) @ U(s)``.

    The k-th new column is ``sum_l U[l, k] a_l(s)``, i.e. the columns matrix is
    multiplied by ``U(s)`` on the right.
    """
    k = curve.shape[1]
    u0 = gauge(0.0)
    if u0.shape != (k, k):
        raise InvalidInputError(f"gauge has shape {u0.shape}, curve needs ({k}, {k})")

    if curve.kind == "discrete":
        frames = [Frame(f.columns @ gauge(s)) for f, s in zip(curve.samples, curve.s_values)]
        return FrameCurve.discrete(frames, curve.s_values)

    def sampler(s_values):
        return curve.columns_at(s_values) @ gauge.values(s_values)

    deriv = None
    if curve.derivative_sampler is not None and gauge.derivative_sampler is not None:
        def deriv(s_values):
            return (curve.derivative_at(s_values) @ gauge.values(s_values)
                    + curve.columns_at(s_values) @ gauge.derivatives(s_values))

    return FrameCurve.analytic(sampler, deriv, curve.breakpoints, vectorized=True)


def _check_projector(p, index, tol=1e-8):
    p = as_cmatrix(p, f"projector {index}")
    if p.shape[0] != p.shape[1]:
        raise InvalidInputError(f"projector {index} is not square")
    if np.linalg.norm(p - dagger(p)) > tol or np.linalg.norm(p @ p - p) > tol:
        raise InvalidInputError(f"matrix {index} is not an orthogonal projector")
    return p


def continuation_frames(projectors: Sequence, initial_frame: Frame, s_values=None) -> FrameCurve:
    """
    Build a parallel-transported discrete frame curve from projectors alone.

    Each frame is the previous one projected onto the next subspace and then
    symmetrically re-orthonormalized. The overlap of consecutive frames is then
    Hermitian positive definite, so the discrete connection vanishes.
    """
    if not isinstance(initial_frame, Frame):
        initial_frame = Frame(initial_frame)
    projs = [_check_projector(p, j) for j, p in enumerate(projectors)]
    if len(projs) < 2:
        raise InvalidInputError("need at least two projectors")
    cols = initial_frame.columns
    k = cols.shape[1]
    if projs[0].shape[0] != cols.shape[0]:
        raise InvalidInputError("initial frame and projectors have different N")
    if np.linalg.norm(projs[0] @ cols - cols) > 1e-8:
        raise InvalidInputError("initial frame does not lie in the range of the first projector")
    for j, p in enumerate(projs):
        rank = int(round(np.trace(p).real))
        if rank != k:
            raise InvalidInputError(f"projector {j} has rank {rank}, expected {k}")

    frames = [initial_frame]
    for j in range(1, len(projs)):
        x = projs[j] @ cols
        smin = np.linalg.svd(x, compute_uv=False)[-1]
        if smin <= SMOOTHNESS_THRESHOLD:
            what = "orthogonal" if smin <= 1e-8 else "only partially overlapping"
            raise CurveTooCoarseError(
                f"projectors {j - 1} and {j} are {what} (smallest overlap singular value "
                f"{smin:.3e}); supply a finer curve",
                index=j,
            )
        cols = symmetric_orthonormalize(x)
        frames.append(Frame(cols))
    return FrameCurve.discrete(frames, s_values)
