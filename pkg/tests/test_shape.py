import numpy as np
import pytest

from conftest import EIGHT_PERIOD, equilateral, figure_eight
from nbody_blowup.blowup import BlownUpState, blow_up, scale_invariants
from nbody_blowup.central import equilibria_from_cc, euler_configuration, lagrange_configuration
from nbody_blowup.errors import DegenerateSize, Unsupported
from nbody_blowup.flows import integrate_newton
from nbody_blowup.homographic import KeplerState, homographic_orbit, kepler_state_from_energy
from nbody_blowup.newton import MassSystem, mass_inner, rotate, rotate90, to_center_of_mass
from nbody_blowup.ode import IntegrationSpec
from nbody_blowup.sampling import random_shape, random_state
from nbody_blowup.shape import (JacobiCoordinates, collinearity, connection_graph, hopf_project,
                                jacobi_coordinates, jacobi_inverse, reduced_state, shape_of,
                                syzygy_event, syzygy_sequence)

SPEC = IntegrationSpec(rel_tol=1e-11, abs_tol=1e-13)


def test_jacobi_isometry_and_round_trip(mixed3, rng):
    for _ in range(100):
        q = random_shape(mixed3, rng) * rng.uniform(0.1, 3.0)
        jac = jacobi_coordinates(mixed3, q)
        assert abs(abs(jac.Z1) ** 2 + abs(jac.Z2) ** 2 - mass_inner(mixed3, q, q)) <= 1e-12
        np.testing.assert_allclose(jacobi_inverse(mixed3, jac), q, atol=1e-12)


def test_jacobi_binary_collision(mixed3):
    q = np.array([[1.0, 2.0], [1.0, 2.0], [-3.0, 0.5]])
    q, _ = to_center_of_mass(mixed3, q, np.zeros((3, 2)))
    assert jacobi_coordinates(mixed3, q).Z1 == 0


def test_jacobi_needs_three_bodies():
    with pytest.raises(Unsupported):
        jacobi_coordinates(MassSystem((1.0, 1.0)), np.zeros((2, 2)))


def test_hopf_pole_and_degenerate():
    np.testing.assert_array_equal(hopf_project(1, 0).w, [0.0, 0.0, 1.0])
    with pytest.raises(DegenerateSize):
        hopf_project(0, 0)


def test_hopf_rotation_invariance(rng):
    for _ in range(200):
        z = rng.standard_normal(4)
        u = np.exp(1j * rng.uniform(0, 2 * np.pi))
        Z1, Z2 = z[0] + 1j * z[1], z[2] + 1j * z[3]
        w = hopf_project(Z1, Z2).w
        assert np.linalg.norm(hopf_project(u * Z1, u * Z2).w - w) <= 1e-12
        assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-14)


def test_equal_mass_collinear_circle_and_lagrange_poles(equal3, rng):
    for _ in range(200):
        x = rng.standard_normal(3)
        q = np.column_stack([x - x.mean(), np.zeros(3)])
        q = rotate(q, rng.uniform(0, 2 * np.pi))
        assert abs(collinearity(q)) <= 1e-12
        assert abs(shape_of(equal3, q).w[1]) <= 1e-12
    np.testing.assert_allclose(shape_of(equal3, equilateral(1.0, 1)).w, [0, -1, 0], atol=1e-14)
    np.testing.assert_allclose(shape_of(equal3, equilateral(1.0, -1)).w, [0, 1, 0], atol=1e-14)


def test_collinearity_consistency(mixed3, rng):
    # the offset from the Euler great circle is proportional to the normalized area,
    # so collinear shapes and only those lie on that circle
    e = np.array([shape_of(mixed3, euler_configuration(mixed3, k).s_cc).w for k in (1, 2, 3)])
    normal = np.cross(e[0] - e[2], e[1] - e[2])
    normal /= np.linalg.norm(normal)
    ratios = []
    for _ in range(200):
        q = random_shape(mixed3, rng)
        ratios.append((shape_of(mixed3, q).w @ normal) / collinearity(q))
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)
    for _ in range(200):
        x = rng.standard_normal(3)
        q = np.column_stack([x - mixed3.m @ x / mixed3.total_mass, np.zeros(3)])
        assert abs(shape_of(mixed3, rotate(q, rng.uniform(0, 6.3))).w @ normal) <= 1e-12


def test_collinearity_examples():
    assert collinearity(np.array([[0, 0], [1, 0], [2, 0]])) == 0.0
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    assert collinearity(q) == pytest.approx(np.sqrt(3) / 2, rel=1e-15)
    assert collinearity(q[[1, 0, 2]]) == pytest.approx(-np.sqrt(3) / 2, rel=1e-15)


def test_syzygy_transversal_middle_body(equal3):
    q = np.array([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    v = np.array([[0.0, -0.5], [0.0, 1.0], [0.0, -0.5]])
    # start just before the collinear instant
    traj0 = integrate_newton(equal3, q, v, (0.0, -0.05), SPEC)
    traj = integrate_newton(equal3, *np.split(traj0.y[-1], 2), (0.0, 0.1), SPEC,
                            [syzygy_event(equal3)])
    seq = syzygy_sequence(equal3, traj)
    assert seq.symbols == "2"
    assert seq.events[0].time == pytest.approx(0.05, abs=1e-9)


def test_syzygy_homographic_cases(equal3):
    lag = lagrange_configuration(equal3)
    state = kepler_state_from_energy(lag.U_value, -1.0, 1.0)
    orbit = homographic_orbit(equal3, lag, state, (0.0, 5.0))
    q, v = orbit.states()
    traj = integrate_newton(equal3, q[0], v[0], (0.0, 5.0), SPEC, [syzygy_event(equal3)])
    assert len(syzygy_sequence(equal3, traj)) == 0
    eul = euler_configuration(equal3, 2)
    state = KeplerState(1 + 0j, 0.5j * np.sqrt(eul.U_value), eul.U_value)
    orbit = homographic_orbit(equal3, eul, state, (0.0, 2.0))
    q, v = orbit.states()
    traj = integrate_newton(equal3, q[0], v[0], (0.0, 2.0), SPEC, [syzygy_event(equal3)])
    seq = syzygy_sequence(equal3, traj)
    assert seq.identically_collinear and len(seq) == 0


def test_figure_eight_syzygies_and_robustness(equal3):
    q, v = figure_eight()
    span = (0.0, 2 * EIGHT_PERIOD)
    base = integrate_newton(equal3, q, v, span, SPEC, [syzygy_event(equal3)])
    symbols = syzygy_sequence(equal3, base).symbols
    assert symbols == "21321321321"
    bumped = integrate_newton(equal3, q + 1e-9, v, span, SPEC, [syzygy_event(equal3)])
    assert syzygy_sequence(equal3, bumped).symbols == symbols


def test_reduced_state_examples(equal3, rng):
    s = random_shape(equal3, rng)
    y = 0.4 * s - 1.3 * rotate90(s)
    red = reduced_state(equal3, BlownUpState(0.3, s, y))
    np.testing.assert_allclose(red.shape_velocity, 0.0, atol=1e-14)
    assert red.J == pytest.approx(-1.3, rel=1e-13)
    eq = equilibria_from_cc(equal3, lagrange_configuration(equal3))[1]
    red = reduced_state(equal3, eq.state)
    np.testing.assert_allclose(red.shape.w, [0, -1, 0], atol=1e-14)
    np.testing.assert_allclose(red.shape_velocity, 0.0, atol=1e-14)
    assert red.nu == pytest.approx(-np.sqrt(6), rel=1e-14)
    assert red.J == pytest.approx(0.0, abs=1e-14)


def test_reduced_state_invariants(mixed3, rng):
    for _ in range(100):
        st = random_state(mixed3, rng)
        red = reduced_state(mixed3, st)
        assert abs(red.shape.w @ red.shape_velocity) <= 1e-12
        assert red.K_sh == pytest.approx(red.shape_velocity @ red.shape_velocity / 8, rel=1e-9, abs=1e-12)
        assert red.K_sh == pytest.approx(scale_invariants(mixed3, st).K_sh, rel=1e-9, abs=1e-12)
        u = rng.uniform(0, 2 * np.pi)
        rot = reduced_state(mixed3, BlownUpState(st.r, rotate(st.s, u), rotate(st.y, u)))
        np.testing.assert_allclose(rot.shape.w, red.shape.w, atol=1e-12)
        np.testing.assert_allclose(rot.shape_velocity, red.shape_velocity, atol=1e-12)
        np.testing.assert_allclose([rot.nu, rot.J, rot.K_sh], [red.nu, red.J, red.K_sh], atol=1e-12)


def test_shape_velocity_matches_finite_difference(mixed3, rng):
    q = random_shape(mixed3, rng)
    v, _ = to_center_of_mass(mixed3, rng.standard_normal((3, 2)), np.zeros((3, 2)))
    red = reduced_state(mixed3, blow_up(mixed3, q, v))
    # the shape only sees the horizontal velocity, and d/dt of w(q + t v) at r = 1
    h = 1e-6
    fd = (shape_of(mixed3, q + h * v).w - shape_of(mixed3, q - h * v).w) / (2 * h)
    np.testing.assert_allclose(red.shape_velocity, fd, atol=1e-8)


def test_connection_graph(equal3):
    g = connection_graph(equal3)
    assert len(g.edges) == 6
    for edge in g.edges:
        assert np.linalg.norm(edge.points[0] - g.vertices[edge.start]) <= 1e-8
        assert np.linalg.norm(edge.points[-1] - g.vertices[edge.end]) <= 1e-8
        assert np.min(np.linalg.norm(edge.points - g.vertices[edge.through], axis=1)) <= 1e-8
        w2 = edge.points[:, 1]
        interior = w2[np.abs(w2) > 1e-12]
        assert np.count_nonzero(np.diff(np.sign(interior))) == 1


def test_connection_graph_unequal_masses(mixed3):
    with pytest.raises(Unsupported):
        connection_graph(mixed3)


def test_retraction_is_total(equal3, rng):
    g = connection_graph(equal3, n_samples=101)
    for _ in range(100):
        w = shape_of(equal3, random_shape(equal3, rng)).w
        k, p = g.retract(w)
        assert k is not None and np.isfinite(p).all()


def test_jacobi_type_is_complex(mixed3, rng):
    jac = jacobi_coordinates(mixed3, random_shape(mixed3, rng))
    assert isinstance(jac, JacobiCoordinates) and isinstance(jac.Z1, complex)
