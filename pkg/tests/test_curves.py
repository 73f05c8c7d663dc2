import numpy as np
import pytest

from openholonomy.curves import (
    Frame,
    FrameCurve,
    GaugeField,
    apply_gauge,
    continuation_frames,
    sample_curve,
)
from openholonomy.errors import CurveTooCoarseError, InvalidInputError
from openholonomy.holonomy import connection_at, pexp_connection
from openholonomy.matcore import dagger
from openholonomy.testing import random_curve, random_frame, random_gauge, random_unitary


def test_frame_validation():
    e = np.eye(4)
    f = Frame(e[:, :2])
    assert (f.dim_total, f.dim_sub) == (4, 2)
    np.testing.assert_allclose(f.projector(), np.diag([1, 1, 0, 0]))
    with pytest.raises(InvalidInputError):
        Frame(np.ones((4, 2)))
    with pytest.raises(InvalidInputError):
        Frame(np.eye(3)[:2, :])  # K > N
    with pytest.raises(ValueError):
        f.columns[0, 0] = 2.0


def test_discrete_curve_checks():
    e = np.eye(3)
    with pytest.raises(InvalidInputError):
        FrameCurve.discrete([e[:, :1]])
    with pytest.raises(InvalidInputError):
        FrameCurve.discrete([e[:, :1], e[:, :2]])
    with pytest.raises(InvalidInputError):
        FrameCurve.discrete([e[:, :1], e[:, 1:2]], s_values=[0.0, 0.5])
    c = FrameCurve.discrete([e[:, :1], e[:, 1:2], e[:, 2:]])
    assert c.shape == (3, 1)
    np.testing.assert_array_equal(c(0.4).columns, e[:, 1:2])


def test_sample_curve_discrete_refuses_upsampling():
    frames = [random_frame(np.random.default_rng(i), 3, 1) for i in range(5)]
    c = FrameCurve.discrete(frames)
    assert sample_curve(c, 4)[2] is frames[2]
    assert len(sample_curve(c, 2)) == 3
    with pytest.raises(CurveTooCoarseError):
        sample_curve(c, 8)


def test_vectorized_and_pointwise_samplers_agree(rng):
    vec = random_curve(rng, 4, 2)
    point = FrameCurve.analytic(
        lambda s: vec.columns_at([s])[0], lambda s: vec.derivative_at([s])[0]
    )
    s = np.linspace(0, 1, 7)
    np.testing.assert_allclose(point.columns_at(s), vec.columns_at(s), atol=1e-15)
    np.testing.assert_allclose(pexp_connection(point, 64), pexp_connection(vec, 64), atol=1e-14)


def test_random_curve_derivative_matches_finite_difference(rng):
    c = random_curve(rng, 5, 2)
    h = 1e-6
    s = np.array([0.3])
    fd = (c.columns_at(s + h) - c.columns_at(s - h)) / (2 * h)
    np.testing.assert_allclose(c.derivative_at(s), fd, atol=1e-8)


def test_apply_gauge_multiplies_on_the_right(rng):
    c = random_curve(rng, 4, 2)
    g = random_gauge(rng, 2)
    cg = apply_gauge(c, g)
    for s in (0.0, 0.37, 1.0):
        np.testing.assert_allclose(cg(s).columns, c(s).columns @ g(s), atol=1e-13)
    # product rule for the derivative
    h = 1e-6
    fd = (cg.columns_at([0.5 + h]) - cg.columns_at([0.5 - h])) / (2 * h)
    np.testing.assert_allclose(cg.derivative_at([0.5]), fd, atol=1e-8)


def test_apply_gauge_discrete(rng):
    frames = [random_frame(rng, 3, 2) for _ in range(3)]
    u = random_unitary(rng, 2)
    cg = apply_gauge(FrameCurve.discrete(frames), GaugeField.constant(u))
    assert cg.kind == "discrete"
    np.testing.assert_allclose(cg.samples[1].columns, frames[1].columns @ u)


def test_apply_gauge_shape_and_unitarity_checks(rng):
    c = random_curve(rng, 4, 2)
    with pytest.raises(InvalidInputError):
        apply_gauge(c, GaugeField.constant(np.eye(3)))
    with pytest.raises(InvalidInputError):
        apply_gauge(c, GaugeField(lambda s: 2 * np.eye(2)))


def test_gauge_keeps_the_subspace(rng):
    c = random_curve(rng, 4, 2)
    cg = apply_gauge(c, random_gauge(rng, 2))
    np.testing.assert_allclose(cg(0.6).projector(), c(0.6).projector(), atol=1e-13)


def _projectors(curve, n):
    s = np.linspace(0, 1, n + 1)
    return s, [x @ dagger(x) for x in curve.columns_at(s)]


def test_continuation_converges_to_parallel_transport(rng):
    c = random_curve(rng, 4, 2)
    ref = c(1.0).columns @ pexp_connection(c, 4096)
    ns = np.array([32, 64, 128, 256])
    errs = []
    for n in ns:
        s, projs = _projectors(c, n)
        cont = continuation_frames(projs, c(0.0), s)
        errs.append(np.linalg.norm(cont.samples[-1].columns - ref))
    errs = np.array(errs)
    # within C/n for the C seen on the coarsest grid, and in fact faster
    assert np.all(errs * ns <= errs[0] * ns[0])
    assert np.all(errs[:-1] / errs[1:] > 1.8)


def test_continuation_frames_have_vanishing_discrete_connection(rng):
    c = random_curve(rng, 4, 2)
    worst = []
    for n in (25, 50, 100):
        s, projs = _projectors(c, n)
        cont = continuation_frames(projs, c(0.0), s)
        for a, b in zip(cont.samples[:-1], cont.samples[1:]):
            m = dagger(b.columns) @ a.columns
            np.testing.assert_allclose(m, dagger(m), atol=1e-12)
        worst.append(max(np.linalg.norm(connection_at(cont, x).a_matrix) for x in s[:-1]))
    # far inside any C/n bound
    assert max(worst) < 1e-10


def test_continuation_orthogonal_step_reports_index():
    e = np.eye(4)
    p0 = e[:, :2] @ e[:, :2].T
    p1 = e[:, 2:] @ e[:, 2:].T
    with pytest.raises(CurveTooCoarseError) as info:
        continuation_frames([p0, p1], Frame(e[:, :2]))
    assert info.value.index == 1
    assert "orthogonal" in str(info.value)


def test_continuation_input_checks():
    e = np.eye(3)
    p = e[:, :1] @ e[:, :1].T
    with pytest.raises(InvalidInputError):
        continuation_frames([p, p], Frame(e[:, 1:2]))
    with pytest.raises(InvalidInputError):
        continuation_frames([p, np.ones((3, 3))], Frame(e[:, :1]))
    with pytest.raises(InvalidInputError):
        continuation_frames([p, np.eye(3)], Frame(e[:, :1]))
