"""Random test objects: unitaries, frames, smooth frame curves and gauges."""

from __future__ import annotations

import numpy as np

from .curves import Frame, FrameCurve, GaugeField
from .matcore import dagger


def random_unitary(rng, k: int) -> np.ndarray:
    """Haar-random k x k unitary."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (z + dagger(z))
    return scale * h / np.linalg.norm(h, 2)


def random_frame(rng, n: int, k: int) -> Frame:
    return Frame(random_unitary(rng, n)[:, :k])


class _HermitianFlow:
    """``exp(-i s H)`` and its derivative for an array of s, from one eigendecomposition."""

    def __init__(self, h):
        self.evals, self.evecs = np.linalg.eigh(h)
        self.h = h

    def __call__(self, s):
        phases = np.exp(-1j * np.asarray(s, dtype=float)[..., None] * self.evals)
        return (self.evecs * phases[..., None, :]) @ dagger(self.evecs)

    def derivative(self, s):
        return -1j * self.h @ self(s)


def random_curve(rng, n: int, k: int, scale: float = 1.0) -> FrameCurve:
    """
    Smooth curve ``F(s) = exp(-i s H1) exp(-i s H2) F0`` with an analytic derivative.

    Two non-commuting generators make the connection s-dependent and
    non-commuting at different s.
    """
    f0 = random_frame(rng, n, k).columns
    e1 = _HermitianFlow(random_hermitian(rng, n, scale))
    e2 = _HermitianFlow(random_hermitian(rng, n, scale))

    def sampler(s):
        return e1(s) @ (e2(s) @ f0)

    def deriv(s):
        return e1.derivative(s) @ (e2(s) @ f0) + e1(s) @ (e2.derivative(s) @ f0)

    return FrameCurve.analytic(sampler, deriv, vectorized=True)


def random_gauge(rng, k: int, scale: float = 1.0) -> GaugeField:
    """Smooth gauge ``U(s) = U0 exp(-i s G)``; ``U(1) != U(0)`` almost surely."""
    u0 = random_unitary(rng, k)
    flow = _HermitianFlow(random_hermitian(rng, k, scale))
    return GaugeField(lambda s: u0 @ flow(s), lambda s: u0 @ flow.derivative(s), vectorized=True)


def random_matrix(rng, m: int, n: int, rank=None) -> np.ndarray:
    """Complex m x n matrix of the given rank with singular values in [0.2, 2]."""
    full = min(m, n)
    rank = full if rank is None else rank
    u = random_unitary(rng, m)[:, :full]
    v = random_unitary(rng, n)[:, :full]
    s = np.zeros(full)
    s[:rank] = rng.uniform(0.2, 2.0, rank)
    return (u * s) @ dagger(v)
