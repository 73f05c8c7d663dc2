"""
Tripod model: four levels |0>, |1>, |a>, |e> with the excited level |e>
coupled to the other three by a real unit vector of couplings.

The couplings are parametrized by a point on the unit sphere,
``(w0, w1, wa) = (sin t cos p, sin t sin p, cos t)`` with polar angle t and
azimuth p. The zero-energy (dark) eigenspace is two-dimensional and is
spanned by

    D1 = cos t cos p |0> + cos t sin p |1> - sin t |a>
    D2 = -sin p |0> + cos p |1>

Closed forms for the holonomy along paths starting at the north pole are
provided as oracles for the numerical pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .curves import Frame, FrameCurve
from .errors import InvalidInputError
from .holonomy import Overlap
from .matcore import DEFAULT_RANK_TOL

N_LEVELS = 4
BASIS = ("0", "1", "a", "e")
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
Q_PROJ = np.array([[0, 0], [0, 1]], dtype=complex)

# |cos theta_1| inside (EQUATOR_TOL, NEAR_EQUATOR) is flagged as near the singular locus
NEAR_EQUATOR = 1e-4

PATH_KINDS = ("meridian_then_latitude", "latitude_loop", "great_circle", "piecewise_linear")


def ry(angle) -> np.ndarray:
    """``exp(-i * angle * sigma_y)``, a real rotation matrix."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _ease(tau, easing):
    if easing == "linear":
        return tau, np.ones_like(tau)
    # C1 ramp with zero velocity at both ends of each segment
    return tau - np.sin(2 * np.pi * tau) / (2 * np.pi), 1 - np.cos(2 * np.pi * tau)


@dataclass(frozen=True)
class SpherePath:
    """
    A path (theta(s), phi(s)) on the parameter sphere starting at (0, 0).

    Paths built from waypoints traverse each segment linearly in (theta, phi)
    over an equal share of s. ``easing="smooth"`` slows down to zero velocity
    at every waypoint, which keeps the Hamiltonian C1 in time.
    """

    waypoints: np.ndarray
    easing: str = "linear"
    kind: str = "piecewise_linear"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[1] != 2 or len(wp) < 2:
            raise InvalidInputError("waypoints must be a list of at least two (theta, phi) pairs")
        if not np.all(np.isfinite(wp)):
            raise InvalidInputError("waypoints must be finite")
        if wp[0, 0] != 0.0 or wp[0, 1] != 0.0:
            raise InvalidInputError("paths must start at (theta, phi) = (0, 0)")
        if np.any(wp[:, 0] < 0) or np.any(wp[:, 0] > np.pi):
            raise InvalidInputError("theta must lie in [0, pi]")
        if self.easing not in ("linear", "smooth"):
            raise InvalidInputError(f"unknown easing {self.easing!r}")
        wp.setflags(write=False)
        object.__setattr__(self, "waypoints", wp)

    @property
    def n_segments(self) -> int:
        return len(self.waypoints) - 1

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_segments + 1)

    def _locate(self, s):
        s = np.asarray(s, dtype=float)
        m = self.n_segments
        idx = np.clip(np.floor(s * m).astype(int), 0, m - 1)
        tau = s * m - idx
        return idx, tau

    def angles(self, s):
        """(theta, phi) at s; vectorized over s."""
        idx, tau = self._locate(s)
        u, _ = _ease(tau, self.easing)
        start = self.waypoints[idx]
        delta = self.waypoints[idx + 1] - start
        out = start + delta * u[..., None]
        return out[..., 0], out[..., 1]

    def rates(self, s):
        """(dtheta/ds, dphi/ds) at s; one-sided from the right at interior waypoints."""
        idx, tau = self._locate(s)
        _, du = _ease(tau, self.easing)
        delta = (self.waypoints[idx + 1] - self.waypoints[idx]) * self.n_segments
        out = delta * du[..., None]
        return out[..., 0], out[..., 1]

    def theta(self, s):
        return self.angles(s)[0]

    def phi(self, s):
        return self.angles(s)[1]

    @property
    def endpoint(self):
        return float(self.waypoints[-1, 0]), float(self.waypoints[-1, 1])

    @property
    def crosses_equator(self) -> bool:
        """True when theta reaches pi/2 somewhere strictly after s = 0."""
        c = np.cos(self.waypoints[:, 0])
        c[np.abs(c) < 1e-15] = 0.0
        if np.any(c[1:] == 0.0):
            return True
        return bool(np.any(c[:-1] * c[1:] < 0))

    def line_integral(self, tol=1e-10) -> float:
        """``int_0^1 cos(theta) dphi/ds ds`` by adaptive quadrature, split at the waypoints."""
        def integrand(s):
            t, _ = self.angles(s)
            _, pd = self.rates(s)
            return float(np.cos(t) * pd)

        total = 0.0
        k = self.knots
        for a, b in zip(k[:-1], k[1:]):
            val, _ = integrate.quad(integrand, a, b, epsabs=tol, epsrel=tol, limit=200)
            total += val
        return total

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "easing": self.easing}
        if self.kind == "piecewise_linear":
            d["waypoints"] = [[float(t), float(p)] for t, p in self.waypoints]
        else:
            d.update({k: float(v) for k, v in self.params.items()})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpherePath":
        d = dict(d)
        kind = d.pop("kind")
        return build_path(kind, **d)


def build_path(kind: str, easing: str = "linear", **params) -> SpherePath:
    """
    Construct a standard path from the north pole.

    kinds
        ``meridian_then_latitude(theta1, phi1)``: down the phi = 0 meridian,
        then along the latitude to phi1.
        ``latitude_loop(theta)``: down to theta, then once around the
        latitude; ends at (theta, 2 pi).
        ``great_circle(theta1, phi1)``: turn the frame at the pole to phi1,
        then follow the meridian (a great circle) to theta1.
        ``piecewise_linear(waypoints)``: straight segments in (theta, phi).
    """
    if kind == "meridian_then_latitude":
        t1, p1 = float(params["theta1"]), float(params["phi1"])
        wp = [(0.0, 0.0), (t1, 0.0), (t1, p1)]
    elif kind == "latitude_loop":
        t = float(params["theta"])
        wp = [(0.0, 0.0), (t, 0.0), (t, 2 * np.pi)]
    elif kind == "great_circle":
        t1, p1 = float(params["theta1"]), float(params["phi1"])
        wp = [(0.0, 0.0), (0.0, p1), (t1, p1)]
    elif kind == "piecewise_linear":
        wp = [tuple(map(float, w)) for w in params["waypoints"]]
        params = {}
    else:
        raise InvalidInputError(f"unknown path kind {kind!r}; expected one of {PATH_KINDS}")
    for t, _ in wp:
        if not 0.0 <= t <= np.pi:
            raise InvalidInputError(f"theta={t} outside [0, pi]")
    return SpherePath(np.array(wp), easing=easing, kind=kind, params=params)


def couplings(theta, phi):
    return np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)


@dataclass(frozen=True)
class TripodModel:
    path: SpherePath
    # constant added to every level; moves the dark-space energy to energy_shift
    energy_shift: float = 0.0

    def couplings(self, s):
        return couplings(*self.path.angles(s))

    def __call__(self, s):
        return hamiltonian(self, s)

    def batch(self, s_values) -> np.ndarray:
        w = np.stack(self.couplings(np.asarray(s_values, dtype=float)), axis=-1)
        h = np.zeros(w.shape[:-1] + (N_LEVELS, N_LEVELS), dtype=complex)
        h[..., 3, :3] = w
        h[..., :3, 3] = w
        if self.energy_shift:
            h += self.energy_shift * np.eye(N_LEVELS)
        return h


def hamiltonian(model: TripodModel, s: float) -> np.ndarray:
    """4 x 4 Hamiltonian at s in the basis (|0>, |1>, |a>, |e>)."""
    w0, w1, wa = model.couplings(s)
    h = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    h[3, :3] = (w0, w1, wa)
    h[:3, 3] = (w0, w1, wa)
    if model.energy_shift:
        h += model.energy_shift * np.eye(N_LEVELS)
    return h


def dark_columns(theta, phi) -> np.ndarray:
    """Dark-state columns (D1, D2); vectorized, shape (..., 4, 2)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    out = np.zeros(theta.shape + (N_LEVELS, 2), dtype=complex)
    out[..., 0, 0] = ct * cp
    out[..., 1, 0] = ct * sp
    out[..., 2, 0] = -st
    out[..., 0, 1] = -sp
    out[..., 1, 1] = cp
    return out


def dark_columns_derivative(theta, phi, theta_dot, phi_dot) -> np.ndarray:
    theta, phi, td, pd = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (theta, phi, theta_dot, phi_dot)))
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    out = np.zeros(theta.shape + (N_LEVELS, 2), dtype=complex)
    out[..., 0, 0] = -st * cp * td - ct * sp * pd
    out[..., 1, 0] = -st * sp * td + ct * cp * pd
    out[..., 2, 0] = -ct * td
    out[..., 0, 1] = -cp * pd
    out[..., 1, 1] = -sp * pd
    return out


def dark_frame(path: SpherePath, s: float) -> Frame:
    return Frame(dark_columns(*path.angles(s)))


def dark_projector(path: SpherePath, s: float) -> np.ndarray:
    d = dark_columns(*path.angles(s))
    return d @ np.conj(np.swapaxes(d, -1, -2))


def dark_curve(path: SpherePath, with_derivative: bool = True) -> FrameCurve:
    """The dark-state frame curve, with the analytic derivative by default."""
    def sampler(s):
        return dark_columns(*path.angles(s))

    def deriv(s):
        return dark_columns_derivative(*path.angles(s), *path.rates(s))

    return FrameCurve.analytic(
        sampler, deriv if with_derivative else None, path.knots[1:-1], vectorized=True
    )


@dataclass(frozen=True)
class AnalyticUM:
    matrix: np.ndarray
    classification: Overlap
    near_singular: bool = False


def analytic_u_m(theta1: float, phi1: float, rank_tol: float = DEFAULT_RANK_TOL) -> AnalyticUM:
    """Closed-form polar isometry of the overlap between {|0>, |1>} and the dark frame at (theta1, phi1)."""
    if not 0.0 <= theta1 <= np.pi:
        raise InvalidInputError("theta1 must lie in [0, pi]")
    c = np.cos(theta1)
    if abs(c) <= rank_tol:
        return AnalyticUM(ry(phi1) @ Q_PROJ, Overlap.PARTIALLY_OVERLAPPING, near_singular=True)
    near = abs(c) < NEAR_EQUATOR
    if c > 0:
        return AnalyticUM(ry(phi1), Overlap.OVERLAPPING, near)
    return AnalyticUM(ry(phi1) @ (-SIGMA_Z), Overlap.OVERLAPPING, near)


def analytic_holonomy(path: SpherePath, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """
    Closed-form holonomy of the dark space along ``path``.

    With ``c = int cos(theta) dphi`` the path-ordered exponential is
    ``exp(i c sigma_y)`` in every hemisphere, so

    * northern end: ``exp(-i sigma_y (phi1 - c))``
    * southern end: ``exp(-i phi1 sigma_y) (-sigma_z) exp(+i c sigma_y)``
    * on the equator: ``exp(-i phi1 sigma_y) Q exp(+i c sigma_y)`` (partial)
    """
    theta1, phi1 = path.endpoint
    c = path.line_integral()
    um = analytic_u_m(theta1, phi1, rank_tol)
    return um.matrix @ ry(-c)


def solid_angle_wedge(theta1: float, phi1: float) -> float:
    """Area of the spherical wedge between the pole, (theta1, 0) and (theta1, phi1)."""
    return phi1 * (1 - np.cos(theta1))
