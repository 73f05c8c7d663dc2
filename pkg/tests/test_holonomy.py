import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from openholonomy.curves import Frame, FrameCurve, apply_gauge, sample_curve
from openholonomy.errors import CurveTooCoarseError, InvalidInputError, OrthogonalEndpointsError, PartialOverlapError
from openholonomy.holonomy import (
    Overlap,
    commutator_defect,
    compute_holonomy,
    connection_at,
    decompose_gamma,
    discrete_gamma,
    frame_distance,
    gauge_transform_holonomy,
    ordered_product,
    overlap,
    parallel_frame,
    pexp_connection,
    sorted_eigenvalues,
)
from openholonomy.matcore import dagger, expm_antihermitian
from openholonomy.testing import random_curve, random_frame, random_gauge, random_unitary


def test_overlap_classification():
    e = np.eye(4)
    a = Frame(e[:, :2])
    assert overlap(a, a).classification is Overlap.OVERLAPPING
    rep = overlap(a, Frame(e[:, 1:3]))
    assert rep.classification is Overlap.PARTIALLY_OVERLAPPING and rep.rank == 1
    assert str(rep) == "PartiallyOverlapping(1)"
    assert overlap(a, Frame(e[:, 2:])).classification is Overlap.ORTHOGONAL
    with pytest.raises(InvalidInputError):
        overlap(a, Frame(e[:, :3]))


def test_near_singular_flag():
    c, s = 3e-8, np.sqrt(1 - 9e-16)
    b = np.zeros((3, 2), dtype=complex)
    b[0, 0], b[2, 0], b[1, 1] = c, s, 1.0
    rep = overlap(Frame(np.eye(3)[:, :2]), Frame(b))
    assert rep.classification is Overlap.OVERLAPPING and rep.near_singular


def test_parallel_frame_overlap_is_positive(rng):
    a, b = random_frame(rng, 5, 2), random_frame(rng, 5, 2)
    fbar = parallel_frame(a, b)
    m = dagger(a.columns) @ fbar.columns
    np.testing.assert_allclose(m, dagger(m), atol=1e-13)
    assert np.all(np.linalg.eigvalsh(m) > 0)
    np.testing.assert_allclose(fbar.projector(), b.projector(), atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_parallel_frame_minimizes_distance(seed):
    rng = np.random.default_rng(seed)
    a, b = random_frame(rng, 4, 2), random_frame(rng, 4, 2)
    fbar = parallel_frame(a, b)
    best = frame_distance(a, fbar)
    # D = 2K - 2 Tr |M| at the optimum
    sv = np.linalg.svd(dagger(a.columns) @ b.columns, compute_uv=False)
    assert best == pytest.approx(4 - 2 * sv.sum(), abs=1e-12)
    for _ in range(50):
        other = Frame(b.columns @ random_unitary(rng, 2))
        assert frame_distance(a, other) >= best - 1e-12


def test_parallel_frame_refuses_partial_overlap():
    e = np.eye(4)
    with pytest.raises(PartialOverlapError):
        parallel_frame(Frame(e[:, :2]), Frame(e[:, 1:3]))


def test_ordered_product_later_left():
    a, b = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
    factors = np.stack([a, b]).astype(complex)
    np.testing.assert_array_equal(ordered_product(factors), b @ a)
    np.testing.assert_array_equal(ordered_product(factors, "later-right"), a @ b)
    with pytest.raises(InvalidInputError):
        ordered_product(factors, "sideways")


def test_connection_is_antihermitian_and_fd_agrees(rng):
    c = random_curve(rng, 4, 2)
    fd_curve = FrameCurve.analytic(c.sampler, vectorized=True)
    for s in (0.0, 0.5, 1.0):
        a = connection_at(c, s).a_matrix
        np.testing.assert_allclose(a, -dagger(a), atol=1e-14)
        np.testing.assert_allclose(connection_at(fd_curve, s).a_matrix, a, atol=1e-7)


def test_connection_gauge_law(rng):
    # A' = U^H A U + U'^H U
    c, g = random_curve(rng, 4, 2), random_gauge(rng, 2)
    cg = apply_gauge(c, g)
    s = 0.42
    u, du = g.values([s])[0], g.derivatives([s])[0]
    expected = dagger(u) @ connection_at(c, s).a_matrix @ u + dagger(du) @ u
    np.testing.assert_allclose(connection_at(cg, s).a_matrix, expected, atol=1e-12)


def test_connection_rejects_s_out_of_range(rng):
    with pytest.raises(InvalidInputError):
        connection_at(random_curve(rng, 3, 1), 1.5)


def test_pexp_constant_connection_is_exact():
    # F(s) = exp(-i s H) F0 with F0 spanning an invariant subspace of H
    h = np.diag([0.3, -1.1, 2.0]).astype(complex)
    f0 = np.eye(3)[:, :2]
    flow = lambda s: np.exp(-1j * np.asarray(s)[..., None] * np.diag(h))[..., :, None] * f0
    deriv = lambda s: -1j * h @ flow(s)
    c = FrameCurve.analytic(flow, deriv, vectorized=True)
    a = dagger(deriv(0.0)) @ f0
    np.testing.assert_allclose(pexp_connection(c, 3), expm_antihermitian(a), atol=1e-14)


def test_midpoint_rule_is_second_order(rng):
    c = random_curve(rng, 4, 2, scale=2.0)
    ref = pexp_connection(c, 16384)
    errs = np.array([np.linalg.norm(pexp_connection(c, n) - ref) for n in (32, 64, 128)])
    ratios = errs[:-1] / errs[1:]
    assert np.all((ratios > 3.6) & (ratios < 4.4))
    # Richardson extrapolation removes the leading error
    rich = (4 * pexp_connection(c, 128) - pexp_connection(c, 64)) / 3
    assert np.linalg.norm(rich - ref) < errs[-1] / 20


def test_pexp_is_unitary(rng):
    p = pexp_connection(random_curve(rng, 5, 3), 100)
    np.testing.assert_allclose(dagger(p) @ p, np.eye(3), atol=1e-12)


def test_pexp_gauge_law(rng):
    c, g = random_curve(rng, 4, 2), random_gauge(rng, 2)
    n = 4096
    p, pg = pexp_connection(c, n), pexp_connection(apply_gauge(c, g), n)
    np.testing.assert_allclose(pg, dagger(g(1.0)) @ p @ g(0.0), atol=1e-6)


def test_holonomy_gauge_covariance(rng):
    c, g = random_curve(rng, 5, 2), random_gauge(rng, 2)
    n = 8192
    r, rg = compute_holonomy(c, n), compute_holonomy(apply_gauge(c, g), n)
    np.testing.assert_allclose(rg.u_g, gauge_transform_holonomy(r, g(0.0)), atol=1e-7)
    np.testing.assert_allclose(
        np.sort_complex(np.linalg.eigvals(rg.u_g)), np.sort_complex(np.linalg.eigvals(r.u_g)), atol=1e-7
    )
    # the gauge-independent operator Gamma does not move
    np.testing.assert_allclose(rg.gamma_operator, r.gamma_operator, atol=1e-7)


def test_gamma_decomposition(rng):
    r = compute_holonomy(random_curve(rng, 4, 2), 512)
    t_iso, r_rot = decompose_gamma(r)
    np.testing.assert_allclose(r_rot @ t_iso, r.gamma_operator, atol=1e-12)
    fbar = r.parallel_final_frame.columns
    np.testing.assert_allclose(fbar @ r.u_g @ dagger(r.initial_frame.columns), r.gamma_operator, atol=1e-12)
    assert commutator_defect(r) >= 0


def test_discrete_gamma_first_order(rng):
    c = random_curve(rng, 4, 2)
    gamma = compute_holonomy(c, 8192).gamma_operator
    errs = np.array([np.linalg.norm(discrete_gamma(sample_curve(c, n)) - gamma) for n in (100, 200, 400)])
    ratios = errs[:-1] / errs[1:]
    assert np.all((ratios > 1.7) & (ratios < 2.3))


def test_discrete_curve_passthrough(rng):
    c = random_curve(rng, 4, 2)
    n = 2000
    grid = np.linspace(0, 1, n + 1)
    disc = FrameCurve.discrete([Frame(x) for x in c.columns_at(grid)], grid)
    r_a, r_d = compute_holonomy(c, n), compute_holonomy(disc, n)
    np.testing.assert_allclose(r_d.u_g, r_a.u_g, atol=1e-6)
    assert r_d.n_steps == n


def test_discrete_curve_too_coarse():
    e = np.eye(4)
    frames = [e[:, :2], (e[:, [0, 2]] + e[:, [1, 3]]) / np.sqrt(2), e[:, :2]]
    with pytest.raises(CurveTooCoarseError) as info:
        compute_holonomy(FrameCurve.discrete(frames), 2)
    assert info.value.index == 1


def test_orthogonal_endpoints_raise():
    e = np.eye(4)
    with pytest.raises(OrthogonalEndpointsError):
        compute_holonomy(FrameCurve.discrete([e[:, :2], e[:, 2:]]), 1)


def test_cyclic_curve_has_trivial_u_m():
    t = np.linspace(0, 2 * np.pi, 9)
    frames = [np.array([[np.cos(x)], [np.sin(x)], [0.0]]) for x in t]
    frames[-1] = frames[0]
    r = compute_holonomy(FrameCurve.discrete(frames), 8)
    np.testing.assert_allclose(r.u_m, np.eye(1), atol=1e-14)
    np.testing.assert_allclose(r.u_g, r.pexp, atol=1e-14)


def test_dynamical_phase_recorded(rng):
    r = compute_holonomy(random_curve(rng, 3, 1), 16, energy=lambda s: 0.5, t_total=10.0)
    assert r.dynamical_phase == pytest.approx(np.exp(-5j), abs=1e-12)
    with pytest.raises(InvalidInputError):
        compute_holonomy(random_curve(rng, 3, 1), 16, energy=lambda s: 0.5)


def test_sorted_eigenvalues_order():
    u = np.diag(np.exp(1j * np.array([2.0, -1.0, np.pi, 0.3])))
    ev = sorted_eigenvalues(u)
    np.testing.assert_allclose(np.angle(ev)[:3], [-1.0, 0.3, 2.0])
    assert np.angle(ev[-1]) == pytest.approx(np.pi)
