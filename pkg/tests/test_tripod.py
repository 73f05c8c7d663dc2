import numpy as np
import pytest
from scipy.linalg import expm

from openholonomy import tripod as tp
from openholonomy.curves import Frame, sample_curve
from openholonomy.errors import InvalidInputError
from openholonomy.holonomy import Overlap, commutator_defect, compute_holonomy, connection_at, discrete_gamma, overlap
from openholonomy.matcore import dagger

SY = tp.SIGMA_Y


def test_ry_is_the_sigma_y_exponential():
    np.testing.assert_allclose(tp.ry(0.3), expm(-0.3j * SY), atol=1e-15)


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (0.4, 1.3), (np.pi / 2, -2.0), (2.9, 5.0)])
def test_dark_states_are_dark_and_orthonormal(theta, phi):
    d = tp.dark_columns(theta, phi)
    path = tp.build_path("piecewise_linear", waypoints=[(0, 0), (theta, phi)])
    h = tp.TripodModel(path)(1.0)
    np.testing.assert_allclose(h @ d, 0, atol=1e-15)
    np.testing.assert_allclose(dagger(d) @ d, np.eye(2), atol=1e-15)


def test_dark_columns_at_pole_are_ground_states():
    np.testing.assert_allclose(tp.dark_columns(0.0, 0.0), np.eye(4)[:, :2])


def test_batch_matches_pointwise_hamiltonian():
    path = tp.build_path("meridian_then_latitude", theta1=1.0, phi1=2.0, easing="smooth")
    model = tp.TripodModel(path, energy_shift=0.3)
    s = np.linspace(0, 1, 9)
    np.testing.assert_allclose(model.batch(s), np.stack([model(x) for x in s]))


def test_connection_closed_form():
    path = tp.build_path("piecewise_linear", waypoints=[(0, 0), (1.0, 0.5), (2.5, 3.0)], easing="smooth")
    curve = tp.dark_curve(path)
    for s in (0.1, 0.3, 0.7, 0.95):
        theta, _ = path.angles(s)
        _, phid = path.rates(s)
        expected = 1j * np.cos(theta) * phid * SY
        np.testing.assert_allclose(connection_at(curve, s).a_matrix, expected, atol=1e-12)
        fd = connection_at(tp.dark_curve(path, with_derivative=False), s).a_matrix
        np.testing.assert_allclose(fd, expected, atol=1e-6)


def test_rates_match_finite_differences():
    path = tp.build_path("piecewise_linear", waypoints=[(0, 0), (1.0, 0.5), (2.0, -1.0)], easing="smooth")
    h = 1e-6
    for s in (0.2, 0.6):
        fd = (np.array(path.angles(s + h)) - np.array(path.angles(s - h))) / (2 * h)
        np.testing.assert_allclose(np.array(path.rates(s)), fd, atol=1e-7)


@pytest.mark.parametrize("theta1,phi1,cls", [
    (np.pi / 3, np.pi / 2, Overlap.OVERLAPPING),
    (3 * np.pi / 4, 1.1, Overlap.OVERLAPPING),
    (np.pi / 2, 0.8, Overlap.PARTIALLY_OVERLAPPING),
])
def test_analytic_u_m_matches_numeric_polar(theta1, phi1, cls):
    rep = overlap(Frame(tp.dark_columns(0, 0)), Frame(tp.dark_columns(theta1, phi1)))
    um = tp.analytic_u_m(theta1, phi1)
    assert rep.classification is um.classification is cls
    np.testing.assert_allclose(rep.isometry_part, um.matrix, atol=1e-12)


def test_northern_closed_form():
    # c = cos(pi/3) * pi/2 = pi/4, so U_g = exp(-i sigma_y (pi/2 - pi/4))
    path = tp.build_path("meridian_then_latitude", theta1=np.pi / 3, phi1=np.pi / 2)
    assert path.line_integral() == pytest.approx(np.pi / 4, abs=1e-12)
    expected = expm(-1j * np.pi / 4 * SY)
    np.testing.assert_allclose(tp.analytic_holonomy(path), expected, atol=1e-14)
    r = compute_holonomy(tp.dark_curve(path), 10_000)
    assert np.linalg.norm(r.u_g - expected) <= 1e-5
    # the rotation angle is the solid angle of the geodesically closed loop
    assert np.pi / 4 == pytest.approx(tp.solid_angle_wedge(np.pi / 3, np.pi / 2))


def test_southern_closed_form_and_sign():
    path = tp.build_path("meridian_then_latitude", theta1=3 * np.pi / 4, phi1=1.1)
    c = path.line_integral()
    r = compute_holonomy(tp.dark_curve(path), 10_000)
    good = tp.ry(1.1) @ (-tp.SIGMA_Z) @ expm(1j * c * SY)
    assert np.linalg.norm(r.u_g - good) <= 1e-5
    np.testing.assert_allclose(tp.analytic_holonomy(path), good, atol=1e-14)
    # the opposite sign on the c term is not what transport produces
    flipped = tp.ry(1.1) @ (-tp.SIGMA_Z) @ expm(-1j * c * SY)
    assert np.linalg.norm(r.u_g - flipped) > 0.1
    assert commutator_defect(r) > 0.01


def test_southern_sign_against_discrete_gamma():
    # independent of any connection: the projector product fixes the sign of c
    path = tp.build_path("meridian_then_latitude", theta1=3 * np.pi / 4, phi1=1.1)
    curve = tp.dark_curve(path)
    gamma = discrete_gamma(sample_curve(curve, 20_000))
    f0, f1 = curve(0.0).columns, curve(1.0).columns
    um = tp.analytic_u_m(3 * np.pi / 4, 1.1).matrix
    # Gamma = F(1) Pexp F(0)^H, so Pexp = F(1)^H Gamma F(0)
    pexp = dagger(f1) @ gamma @ f0
    c = path.line_integral()
    assert np.linalg.norm(um @ pexp - um @ expm(1j * c * SY)) < 1e-3
    assert np.linalg.norm(um @ pexp - um @ expm(-1j * c * SY)) > 0.1


def test_equator_partial_holonomy():
    phi1 = np.pi / 2
    path = tp.build_path("piecewise_linear", waypoints=[(0, 0), (np.pi / 4, 0), (np.pi / 4, phi1), (np.pi / 2, phi1)])
    r = compute_holonomy(tp.dark_curve(path), 10_000)
    assert r.classification is Overlap.PARTIALLY_OVERLAPPING and r.rank == 1
    rm = r.overlap.positive_part
    np.testing.assert_allclose(rm @ rm, rm, atol=1e-8)
    assert np.trace(rm).real == pytest.approx(1.0, abs=1e-8)
    expected = tp.ry(phi1) @ tp.Q_PROJ @ expm(1j * path.line_integral() * SY)
    assert np.linalg.norm(r.u_g - expected) <= 1e-5
    # a partial isometry, not a unitary
    np.testing.assert_allclose(r.u_g @ dagger(r.u_g) @ r.u_g, r.u_g, atol=1e-8)


def test_latitude_loop_is_wilczek_zee():
    theta = np.pi / 4
    path = tp.build_path("latitude_loop", theta=theta)
    r = compute_holonomy(tp.dark_curve(path), 10_000)
    np.testing.assert_allclose(r.u_m, np.eye(2), atol=1e-8)
    expected = expm(-1j * SY * 2 * np.pi * (1 - np.cos(theta)))
    assert np.linalg.norm(r.u_g - expected) <= 1e-5


def test_great_circle_closes_with_zero_area():
    # the closing geodesic retraces the path, so the holonomy is trivial
    path = tp.build_path("great_circle", theta1=1.2, phi1=0.9)
    r = compute_holonomy(tp.dark_curve(path), 4096)
    np.testing.assert_allclose(r.u_g, np.eye(2), atol=1e-10)


def test_smooth_easing_gives_same_holonomy():
    a = tp.build_path("meridian_then_latitude", theta1=1.0, phi1=2.0)
    b = tp.build_path("meridian_then_latitude", theta1=1.0, phi1=2.0, easing="smooth")
    np.testing.assert_allclose(
        compute_holonomy(tp.dark_curve(b), 4096).u_g, tp.analytic_holonomy(a), atol=1e-6
    )


def test_path_validation_and_round_trip():
    with pytest.raises(InvalidInputError):
        tp.build_path("meridian_then_latitude", theta1=4.0, phi1=0.0)
    with pytest.raises(InvalidInputError):
        tp.build_path("spiral")
    with pytest.raises(InvalidInputError):
        tp.SpherePath(np.array([[0.1, 0.0], [1.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        tp.build_path("latitude_loop", theta=1.0, easing="cubic")
    for p in (
        tp.build_path("meridian_then_latitude", theta1=1.0, phi1=2.0, easing="smooth"),
        tp.build_path("piecewise_linear", waypoints=[(0, 0), (1.0, 0.5)]),
    ):
        q = tp.SpherePath.from_dict(p.to_dict())
        np.testing.assert_array_equal(q.waypoints, p.waypoints)
        assert q.easing == p.easing


def test_crosses_equator():
    assert not tp.build_path("meridian_then_latitude", theta1=1.0, phi1=1.0).crosses_equator
    assert tp.build_path("meridian_then_latitude", theta1=np.pi / 2, phi1=1.0).crosses_equator
    assert tp.build_path("meridian_then_latitude", theta1=2.5, phi1=1.0).crosses_equator


def test_analytic_u_m_near_equator_flag():
    assert tp.analytic_u_m(np.pi / 2 - 1e-6, 0.0).near_singular
    assert not tp.analytic_u_m(1.0, 0.0).near_singular
    with pytest.raises(InvalidInputError):
        tp.analytic_u_m(-0.1, 0.0)
