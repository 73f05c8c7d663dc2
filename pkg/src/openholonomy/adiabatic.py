"""
Adiabatic evolution oracle.

Integrates ``i d psi/dt = H(t / T) psi`` with fixed-step RK4 and reads the
final states in the parallel final frame, which gives the gate that slow
driving implements. No renormalization is applied: the norm defect is the
convergence signal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import IntegratorError, InvalidInputError
from .holonomy import HolonomyResult
from .matcore import dagger

UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class EvolutionRun:
    t_total: float
    n_time_steps: int
    initial_state: np.ndarray
    final_state: np.ndarray
    times: np.ndarray = field(repr=False)
    leakage: np.ndarray = field(repr=False)
    norm_defect: np.ndarray = field(repr=False)

    @property
    def max_leakage(self) -> float:
        return float(np.max(self.leakage)) if self.leakage.size else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "leakage", "norm_defect"])
            for row in zip(self.times, self.leakage, self.norm_defect):
                w.writerow([repr(float(x)) for x in row])


def evolve(
    hamiltonian: Callable[[float], np.ndarray],
    t_total: float,
    n_time_steps: int,
    initial_state,
    projector: Optional[Callable[[float], np.ndarray]] = None,
    record_every: int = 100,
) -> EvolutionRun:
    """
    Propagate ``initial_state`` (a vector, or an N x K block of column states)
    under ``hamiltonian(s)`` with ``s = t / t_total``. A ``hamiltonian`` with a
    ``batch(s_array)`` method is evaluated on the whole grid up front.

    If ``projector(s)`` is given, the leakage ``max_k ||(1 - P) psi_k||`` out of
    that subspace is recorded every ``record_every`` steps together with the
    norm defect.

    Raises
    ------
    IntegratorError
        If any state norm drifts from 1 by more than 1e-8.
    """
    if t_total <= 0 or n_time_steps < 1:
        raise InvalidInputError("t_total must be positive and n_time_steps >= 1")
    psi0 = np.asarray(initial_state, dtype=np.complex128)
    vector = psi0.ndim == 1
    psi = psi0.reshape(len(psi0), -1).copy()
    norms0 = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms0 - 1) > 1e-12):
        raise InvalidInputError("initial states must be normalized")

    dt = t_total / n_time_steps
    ds = 1.0 / n_time_steps
    times, leak, defect = [], [], []

    def record(j, psi):
        s = j * ds
        times.append(s * t_total)
        d = float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1)))
        defect.append(d)
        if projector is not None:
            p = projector(s)
            leak.append(float(np.max(np.linalg.norm(psi - p @ psi, axis=0))))
        else:
            leak.append(float("nan"))

    # H is needed at every half step; models exposing ``batch`` build them at once
    half_grid = np.linspace(0.0, 1.0, 2 * n_time_steps + 1)
    if hasattr(hamiltonian, "batch"):
        hs = np.asarray(hamiltonian.batch(half_grid), dtype=np.complex128)
        h_at = hs.__getitem__
    else:
        def h_at(i):
            return np.asarray(hamiltonian(half_grid[i]), dtype=np.complex128)

    h_now = h_at(0)
    record(0, psi)
    for j in range(n_time_steps):
        h_mid = h_at(2 * j + 1)
        h_next = h_at(2 * j + 2)
        k1 = -1j * (h_now @ psi)
        k2 = -1j * (h_mid @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h_mid @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h_next @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        h_now = h_next
        if (j + 1) % record_every == 0 or j + 1 == n_time_steps:
            record(j + 1, psi)

    final_defect = float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1)))
    if final_defect > UNITARITY_TOL:
        raise IntegratorError(
            f"norm defect {final_defect:.3e} exceeds {UNITARITY_TOL}; increase n_time_steps"
        )
    final = psi[:, 0] if vector else psi
    return EvolutionRun(
        t_total=float(t_total),
        n_time_steps=n_time_steps,
        initial_state=psi0,
        final_state=final,
        times=np.array(times),
        leakage=np.array(leak),
        norm_defect=np.array(defect),
    )


def dynamical_phase(energy: Callable[[float], float], t_total: float) -> complex:
    """``exp(-i T int_0^1 E(s) ds)``."""
    val, _ = integrate.quad(energy, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    return complex(np.exp(-1j * t_total * val))


def _final_block(runs) -> tuple:
    if isinstance(runs, EvolutionRun):
        runs = [runs]
    runs = list(runs)
    if not runs:
        raise InvalidInputError("no evolution runs given")
    t0, n0 = runs[0].t_total, runs[0].n_time_steps
    if any(r.t_total != t0 or r.n_time_steps != n0 for r in runs):
        raise InvalidInputError("all runs must share t_total and n_time_steps")
    cols = [np.asarray(r.final_state).reshape(len(r.final_state), -1) for r in runs]
    return np.hstack(cols), t0


def extract_gate(
    runs: Union[EvolutionRun, Sequence[EvolutionRun]],
    reference: HolonomyResult,
    energy: Optional[Callable[[float], float]] = None,
):
    """
    Gate implemented by the evolution, read in the parallel final frame.

    ``gate[k, l] = <abar_k(1) | psi_l(T)>`` where run ``l`` started from the
    l-th column of the reference's initial frame. If the degenerate level has
    energy ``energy(s)``, its dynamical phase is divided out.

    Returns
    -------
    gate : ndarray, shape (K, K)
    fidelity : float
        ``|Tr(gate^H U_g)| / K``.
    """
    psi, t_total = _final_block(runs)
    fbar = reference.parallel_final_frame.columns
    k = fbar.shape[1]
    if psi.shape != fbar.shape:
        raise InvalidInputError(f"expected {k} final states of dimension {fbar.shape[0]}")
    gate = dagger(fbar) @ psi
    if energy is not None:
        gate = gate / dynamical_phase(energy, t_total)
    fidelity = float(abs(np.trace(dagger(gate) @ reference.u_g)) / k)
    return gate, fidelity
