"""
Self-verification suite.

Each check runs one family of invariants or closed-form comparisons and
returns a :class:`CheckResult` with the measured figure and the tolerance it
is held to. ``VerifyConfig`` carries the knobs that mutation tests turn:
the shared rank tolerance and the path-ordering convention.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import tripod as tp
from .adiabatic import evolve, extract_gate
from .curves import Frame, apply_gauge, sample_curve
from .holonomy import (
    Overlap,
    commutator_defect,
    compute_holonomy,
    connection_at,
    discrete_gamma,
    frame_distance,
    overlap,
    parallel_frame,
)
from .matcore import DEFAULT_RANK_TOL, dagger, mp_inverse
from .testing import random_curve, random_frame, random_gauge, random_matrix, random_unitary


@dataclass(frozen=True)
class VerifyConfig:
    rank_tol: float = DEFAULT_RANK_TOL
    ordering: str = "later-left"
    seed: int = 20240601


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    # "<=" when value must stay below tolerance, ">=" when above
    relation: str = "<="
    details: List[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def margin(self) -> float:
        """How many times the tolerance is beaten (>1 is a pass)."""
        if self.relation == "<=":
            return self.tolerance / self.value if self.value > 0 else float("inf")
        return self.value / self.tolerance if self.tolerance > 0 else float("inf")

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (
            f"[{status}] {self.name}: {self.value:.3e} {self.relation} {self.tolerance:.1e} "
            f"(margin x{self.margin:.3g}, {self.seconds:.1f}s)"
        )
        if self.details:
            text += "\n    " + "\n    ".join(self.details)
        return text


def eigenvalue_distance(u, v) -> float:
    """Largest distance between optimally matched eigenvalues of u and v."""
    a = np.linalg.eigvals(u)
    b = np.linalg.eigvals(v)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c]))


def _fro(x) -> float:
    return float(np.linalg.norm(x))


def _holonomy(curve, n, cfg, **kw):
    return compute_holonomy(curve, n, rank_tol=cfg.rank_tol, ordering=cfg.ordering, **kw)


def check_tripod_north(cfg: VerifyConfig) -> CheckResult:
    """Meridian-then-latitude to (pi/3, pi/2) against exp(-i pi/4 sigma_y)."""
    t0 = time.perf_counter()
    path = tp.build_path("meridian_then_latitude", theta1=np.pi / 3, phi1=np.pi / 2)
    res = _holonomy(tp.dark_curve(path), 10_000, cfg)
    # c = cos(pi/3) * pi/2 on the latitude leg, so gamma = pi/2 - pi/4
    gamma = np.pi / 2 - np.cos(np.pi / 3) * np.pi / 2
    dev = _fro(res.u_g - tp.ry(gamma))
    elapsed = time.perf_counter() - t0
    details = [f"classification {res.overlap}", f"gamma {gamma:.12f}", f"runtime {elapsed:.2f}s (< 5s)"]
    ok = dev <= 1e-5 and res.classification is Overlap.OVERLAPPING and elapsed < 5.0
    return CheckResult("tripod_north_closed_form", ok, dev, 1e-5, details=details)


def check_tripod_south(cfg: VerifyConfig) -> CheckResult:
    """Southern endpoint theta1 = 3pi/4: closed form and non-Abelian commutator."""
    path = tp.build_path("meridian_then_latitude", theta1=3 * np.pi / 4, phi1=np.pi / 2)
    res = _holonomy(tp.dark_curve(path), 10_000, cfg)
    c = np.cos(3 * np.pi / 4) * np.pi / 2
    expected = tp.ry(np.pi / 2) @ (-tp.SIGMA_Z) @ tp.ry(-c)
    dev = _fro(res.u_g - expected)
    details = [f"classification {res.overlap}", f"line integral {c:.12f}"]
    ok = dev <= 1e-5 and res.classification is Overlap.OVERLAPPING
    if res.classification is Overlap.OVERLAPPING:
        defect = commutator_defect(res)
        details.append(f"commutator defect {defect:.6f} (> 0.01 required)")
        ok = ok and defect > 0.01
    return CheckResult("tripod_south_closed_form", ok, dev, 1e-5, details=details)


EQUATOR_WAYPOINTS = [(0.0, 0.0), (np.pi / 4, 0.0), (np.pi / 4, np.pi / 2), (np.pi / 2, np.pi / 2)]


def check_equator_partial(cfg: VerifyConfig) -> CheckResult:
    """Endpoint on the equator: rank-1 projector R and the partial holonomy."""
    path = tp.build_path("piecewise_linear", waypoints=EQUATOR_WAYPOINTS)
    res = _holonomy(tp.dark_curve(path), 10_000, cfg)
    r = res.overlap.positive_part
    proj_dev = max(_fro(r @ r - r), abs(np.trace(r).real - 1))
    c = np.cos(np.pi / 4) * np.pi / 2
    expected = tp.ry(np.pi / 2) @ tp.Q_PROJ @ tp.ry(-c)
    dev = _fro(res.u_g - expected)
    partial1 = res.classification is Overlap.PARTIALLY_OVERLAPPING and res.rank == 1
    ok = partial1 and proj_dev <= 1e-8 and dev <= 1e-5
    details = [f"classification {res.overlap}", f"R projector defect {proj_dev:.2e} (<= 1e-8)"]
    return CheckResult("equator_partial_holonomy", ok, dev, 1e-5, details=details)


def check_cyclic(cfg: VerifyConfig) -> CheckResult:
    """Latitude loop at theta = pi/4: U_M = 1 and the spherical-cap rotation."""
    theta = np.pi / 4
    path = tp.build_path("latitude_loop", theta=theta)
    res = _holonomy(tp.dark_curve(path), 10_000, cfg)
    um_dev = _fro(res.u_m - np.eye(2))
    dev = _fro(res.u_g - tp.ry(2 * np.pi * (1 - np.cos(theta))))
    ok = um_dev <= 1e-8 and dev <= 1e-5
    return CheckResult(
        "cyclic_wilczek_zee", ok, dev, 1e-5, details=[f"||U_M - 1|| = {um_dev:.2e} (<= 1e-8)"]
    )


def check_gauge_invariance(cfg: VerifyConfig, n_curves: int = 50, n_steps: int = 16384) -> CheckResult:
    """U_g eigenvalues survive random smooth gauges; Pexp eigenvalues do not."""
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    worst_pexp = 0.0
    tried = 0
    while tried < n_curves:
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, min(n, 3) + 1))
        curve = random_curve(rng, n, k)
        gauge = random_gauge(rng, k)
        try:
            a = _holonomy(curve, n_steps, cfg)
            b = _holonomy(apply_gauge(curve, gauge), n_steps, cfg)
        except Exception as exc:  # a broken pipeline must fail the check, not crash the report
            return CheckResult("gauge_invariance", False, float("inf"), 1e-8, details=[repr(exc)])
        tried += 1
        worst = max(worst, eigenvalue_distance(a.u_g, b.u_g))
        worst_pexp = max(worst_pexp, eigenvalue_distance(a.pexp, b.pexp))
    ok = worst <= 1e-8 and worst_pexp > 1e-3
    details = [
        f"{tried} curves, n_steps={n_steps}",
        f"negative control: max Pexp eigenvalue shift {worst_pexp:.3e} (> 1e-3 required)",
    ]
    return CheckResult("gauge_invariance", ok, worst, 1e-8, details=details)


def _gamma_convergence(curve, cfg, ns=(256, 512, 1024, 2048), n_ref=8192):
    ref = _holonomy(curve, n_ref, cfg)
    formula = ref.parallel_final_frame.columns @ ref.u_g @ dagger(ref.initial_frame.columns)
    errs = np.array([_fro(discrete_gamma(sample_curve(curve, n)) - formula) for n in ns])
    return np.array(ns), errs


def check_oracle_chain(cfg: VerifyConfig) -> CheckResult:
    """Discrete Gamma -> formula Gamma at first order; adiabatic gate fidelity >= 0.99."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed + 1)
    path = tp.build_path("meridian_then_latitude", theta1=np.pi / 3, phi1=np.pi / 2, easing="smooth")
    curves = {"tripod": tp.dark_curve(path), "random": random_curve(rng, 4, 2)}
    details = []
    ok = True
    for label, curve in curves.items():
        ns, errs = _gamma_convergence(curve, cfg)
        ratios = errs[:-1] / errs[1:]
        c_bound = float(np.max(errs * ns))
        first_order = bool(np.all((ratios > 1.6) & (ratios < 2.4)))
        # error must stay under C/n with the C seen at the coarsest grid
        bounded = bool(np.all(errs * ns <= 1.05 * errs[0] * ns[0]))
        ok = ok and first_order and bounded
        details.append(
            f"{label}: |Gamma_n - Gamma| = {', '.join(f'{e:.2e}' for e in errs)}; "
            f"halving ratios {', '.join(f'{r:.2f}' for r in ratios)}; C = {c_bound:.3f}"
        )

    ref = _holonomy(curves["tripod"], 4096, cfg)
    model = tp.TripodModel(path)
    run = evolve(model, 500.0, 100_000, ref.initial_frame.columns)
    _, fidelity = extract_gate(run, ref)
    details.append(f"adiabatic t_total=500: fidelity {fidelity:.6f} (>= 0.99)")
    elapsed = time.perf_counter() - t0
    details.append(f"runtime {elapsed:.1f}s (< 120s)")
    ok = ok and fidelity >= 0.99 and elapsed < 120
    return CheckResult("oracle_chain", ok, fidelity, 0.99, relation=">=", details=details)


def check_minimization(cfg: VerifyConfig, n_pairs: int = 20, n_gauges: int = 1000) -> CheckResult:
    """Parallel frame maximizes Re Tr M; distance identities."""
    rng = np.random.default_rng(cfg.seed + 2)
    worst_identity = 0.0
    beaten = 0
    done = 0
    while done < n_pairs:
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, min(n, 3) + 1))
        a, b = random_frame(rng, n, k), random_frame(rng, n, k)
        rep = overlap(a, b, cfg.rank_tol)
        if rep.classification is not Overlap.OVERLAPPING:
            continue
        done += 1
        bbar = parallel_frame(a, b, cfg.rank_tol)
        best = np.trace(dagger(a.columns) @ bbar.columns).real
        for _ in range(n_gauges):
            trial = np.trace(dagger(a.columns) @ b.columns @ random_unitary(rng, k)).real
            if trial > best + 1e-12:
                beaten += 1
        m = rep.m_matrix
        d_direct = frame_distance(a, b)
        d_formula = 2 * k - 2 * np.trace(m).real
        sv = np.linalg.svd(m, compute_uv=False)
        inf_formula = 2 * k - 2 * np.sum(sv)  # Tr sqrt(M M^H)
        worst_identity = max(worst_identity, abs(d_direct - d_formula), abs(frame_distance(a, bbar) - inf_formula))
    ok = beaten == 0 and worst_identity <= 1e-9
    details = [f"{n_pairs} pairs x {n_gauges} re-gaugings; times beaten: {beaten}"]
    return CheckResult("parallel_frame_minimization", ok, worst_identity, 1e-9, details=details)


def check_mp_inverse(cfg: VerifyConfig, n_matrices: int = 100) -> CheckResult:
    """Penrose identities, unitary transform law, and partial-holonomy gauge covariance."""
    rng = np.random.default_rng(cfg.seed + 3)
    worst = 0.0
    for i in range(n_matrices):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        rank = int(rng.integers(0, min(m, n) + 1)) if i % 2 else min(m, n)
        x = random_matrix(rng, m, n, rank)
        xp = mp_inverse(x, cfg.rank_tol)
        u, v = random_unitary(rng, m), random_unitary(rng, n)
        worst = max(
            worst,
            _fro(x @ xp @ x - x),
            _fro(xp @ x @ xp - xp),
            _fro(dagger(x @ xp) - x @ xp),
            _fro(dagger(xp @ x) - xp @ x),
            _fro(mp_inverse(u @ x @ v, cfg.rank_tol) - dagger(v) @ xp @ dagger(u)),
        )

    path = tp.build_path("piecewise_linear", waypoints=EQUATOR_WAYPOINTS)
    curve = tp.dark_curve(path)
    gauge = random_gauge(rng, 2)
    plain = _holonomy(curve, 10_000, cfg)
    gauged = _holonomy(apply_gauge(curve, gauge), 10_000, cfg)
    u0, u1 = gauge(0.0), gauge(1.0)
    um_dev = _fro(gauged.u_m - dagger(u0) @ plain.u_m @ u1)
    ug_dev = _fro(gauged.u_g - dagger(u0) @ plain.u_g @ u0)
    cov = max(um_dev, ug_dev)
    ok = worst <= 1e-10 and cov <= 1e-8 and gauged.rank == plain.rank == 1
    details = [
        f"{n_matrices} matrices (half rank-deficient): worst identity residual {worst:.2e} (<= 1e-10)",
        f"partial holonomy covariance: U_M {um_dev:.2e}, U_g {ug_dev:.2e} (<= 1e-8)",
    ]
    return CheckResult("mp_inverse_laws", ok, worst, 1e-10, details=details)


def check_connection(cfg: VerifyConfig, fd_step: float = 1e-6) -> CheckResult:
    """Finite-difference connection of dark frames against i cos(theta) phi' sigma_y."""
    rng = np.random.default_rng(cfg.seed + 4)
    worst = 0.0
    for _ in range(10):
        wps = [(0.0, 0.0)] + [(rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi)) for _ in range(3)]
        path = tp.build_path("piecewise_linear", waypoints=wps)
        curve = tp.dark_curve(path, with_derivative=False)
        for _ in range(10):
            seg = int(rng.integers(0, 3))
            s = (seg + rng.uniform(0.01, 0.99)) / 3
            a = connection_at(curve, s, fd_step).a_matrix
            t, _ = path.angles(s)
            _, pd = path.rates(s)
            worst = max(worst, _fro(a - 1j * np.cos(t) * pd * tp.SIGMA_Y))
    ok = worst <= 1e-6
    return CheckResult("connection_closed_form", ok, worst, 1e-6, details=[f"fd_step {fd_step}, 100 samples"])


def check_classification(cfg: VerifyConfig) -> CheckResult:
    """Overlap classes at known tripod endpoints and for orthogonal subspaces."""
    cases = [(0.0, 0.3, "Overlapping"), (np.pi / 3, 1.0, "Overlapping"), (np.pi / 2, 0.7, "PartiallyOverlapping(1)"),
             (2 * np.pi / 3, 2.0, "Overlapping"), (np.pi, 0.0, "Overlapping")]
    init = Frame(np.eye(4)[:, :2])
    wrong = []
    for t1, p1, expected in cases:
        got = str(overlap(init, Frame(tp.dark_columns(t1, p1)), cfg.rank_tol))
        if got != expected:
            wrong.append(f"theta1={t1:.4f}: expected {expected}, got {got}")
    got = str(overlap(init, Frame(np.eye(4)[:, 2:]), cfg.rank_tol))
    if got != "Orthogonal":
        wrong.append(f"orthogonal pair classified as {got}")
    n_cases = len(cases) + 1
    return CheckResult("overlap_classification", not wrong, float(len(wrong)), 0.0,
                       details=wrong or [f"{n_cases} cases, rank_tol={cfg.rank_tol:g}"])


CHECKS = {
    "tripod_north_closed_form": check_tripod_north,
    "tripod_south_closed_form": check_tripod_south,
    "equator_partial_holonomy": check_equator_partial,
    "cyclic_wilczek_zee": check_cyclic,
    "gauge_invariance": check_gauge_invariance,
    "oracle_chain": check_oracle_chain,
    "parallel_frame_minimization": check_minimization,
    "mp_inverse_laws": check_mp_inverse,
    "connection_closed_form": check_connection,
    "overlap_classification": check_classification,
}


def run_checks(cfg: VerifyConfig = VerifyConfig(), names=None) -> List[CheckResult]:
    """Run the named checks (all by default); an exception inside a check is its failure."""
    results = []
    for name in names or CHECKS:
        fn = CHECKS[name]
        t0 = time.perf_counter()
        try:
            res = fn(cfg)
        except Exception as exc:
            res = CheckResult(name, False, float("inf"), 0.0, details=[f"raised {exc!r}"])
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
