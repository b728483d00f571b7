"""Homographic solutions ``q(t) = lambda(t) s_cc`` and their (nu, r) curves.

``lambda`` is a complex scalar solving the planar Kepler problem
``lambda'' = -mu lambda / |lambda|^3`` with ``mu = U(s_cc)``.  Complex
numbers multiply planar points as ``(x + iy)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import EmptyFamily, InvalidInput
from .newton import mass_inner, potential_and_gradient
from .ode import EventSpec, IntegrationSpec, integrate

COLLISION_LABEL = "CollisionReached"
KEPLER_COLLISION_RADIUS = 1e-6


@dataclass(frozen=True)
class KeplerState:
    lam: complex
    lam_dot: complex
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidInput("mu must be positive")

    def energy(self):
        return 0.5 * abs(self.lam_dot) ** 2 - self.mu / abs(self.lam)

    def angular_momentum(self):
        return (self.lam.conjugate() * self.lam_dot).imag


def kepler_state_from_energy(mu, h, J):
    """Apocentre state with Kepler energy ``h < 0`` and angular momentum ``J``."""
    disc = mu * mu + 2 * h * J * J
    if h >= 0:
        raise InvalidInput("bounded family requires h < 0")
    if disc < 0:
        raise EmptyFamily(f"|J| = {abs(J):.6g} too large for h = {h}", mu / np.sqrt(-2 * h))
    r_apo = (-mu - np.sqrt(disc)) / (2 * h)
    return KeplerState(lam=complex(r_apo), lam_dot=complex(0.0, J / r_apo), mu=mu)


def kepler_rhs(mu):
    def rhs(t, x):
        r3 = np.hypot(x[0], x[1]) ** 3
        return np.array([x[2], x[3], -mu * x[0] / r3, -mu * x[1] / r3])
    return rhs


@dataclass
class KeplerSolution:
    trajectory: object
    mu: float
    collision_time: float | None

    @property
    def t(self):
        return self.trajectory.t

    def lam(self, t):
        x = self.trajectory(t)
        return x[..., 0] + 1j * x[..., 1]

    def lam_dot(self, t):
        x = self.trajectory(t)
        return x[..., 2] + 1j * x[..., 3]

    def lam_ddot(self, t):
        """Second derivative from the dense-output interpolant of lambda'."""
        d = self.trajectory.derivative(t)
        return d[..., 2] + 1j * d[..., 3]

    def energies(self):
        y = self.trajectory.y
        return 0.5 * (y[:, 2] ** 2 + y[:, 3] ** 2) - self.mu / np.hypot(y[:, 0], y[:, 1])

    def angular_momenta(self):
        y = self.trajectory.y
        return y[:, 0] * y[:, 3] - y[:, 1] * y[:, 2]


def kepler_solve(state0, t_span, tol=1e-11, spec=None):
    """Integrate the planar Kepler problem.

    A radial fall into the origin stops at ``|lambda| = 1e-6 |lambda0|``; the
    remaining fall time is added from the leading-order radial asymptotics
    ``(2/3) rho^{3/2} / sqrt(2 mu)`` to give ``collision_time``.
    """
    if abs(state0.lam) == 0:
        raise InvalidInput("lambda0 must be nonzero")
    spec = spec or IntegrationSpec(rel_tol=tol, abs_tol=tol * 1e-2)
    mu = state0.mu
    stop = KEPLER_COLLISION_RADIUS * abs(state0.lam)
    event = EventSpec(COLLISION_LABEL, lambda t, x: np.hypot(x[0], x[1]) - stop,
                      direction=-1, terminal=True)
    x0 = [state0.lam.real, state0.lam.imag, state0.lam_dot.real, state0.lam_dot.imag]
    traj = integrate(kepler_rhs(mu), x0, t_span, spec, [event])
    t_coll = None
    if traj.termination == COLLISION_LABEL:
        rho = np.hypot(*traj.y[-1, :2])
        direction = np.sign(t_span[1] - t_span[0])
        t_coll = float(traj.t[-1] + direction * (2.0 / 3.0) * rho ** 1.5 / np.sqrt(2 * mu))
    return KeplerSolution(traj, mu, t_coll)


@dataclass
class HomographicOrbit:
    system: object
    s_cc: np.ndarray
    kepler: KeplerSolution

    @property
    def t(self):
        return self.kepler.t

    def _scale(self, lam):
        lam = np.asarray(lam)
        z = self.s_cc[:, 0] + 1j * self.s_cc[:, 1]
        prod = lam[..., None] * z
        return np.stack([prod.real, prod.imag], axis=-1)

    def q(self, t):
        return self._scale(self.kepler.lam(t))

    def v(self, t):
        return self._scale(self.kepler.lam_dot(t))

    def q_ddot(self, t):
        return self._scale(self.kepler.lam_ddot(t))

    def states(self):
        """Grid positions and velocities, shapes ``(k, n, 2)``."""
        y = self.kepler.trajectory.y
        return self._scale(y[:, 0] + 1j * y[:, 1]), self._scale(y[:, 2] + 1j * y[:, 3])

    def newton_residual(self, times):
        """Max mass-metric norm of ``q'' - grad U(q)`` over ``times``."""
        worst = 0.0
        for t in np.atleast_1d(times):
            q = self.q(t)
            _, grad = potential_and_gradient(self.system, q)
            d = self.q_ddot(t) - grad
            worst = max(worst, float(np.sqrt(mass_inner(self.system, d, d))))
        return worst

    def midpoints(self):
        """Step midpoints, where the interpolant derivative is not pinned to the field."""
        t = self.t
        return 0.5 * (t[:-1] + t[1:])


def homographic_orbit(system, cc, state0, t_span, tol=1e-11):
    if abs(state0.mu - cc.U_value) > 1e-12 * cc.U_value:
        raise InvalidInput(f"mu = {state0.mu} does not match U(s_cc) = {cc.U_value}")
    return HomographicOrbit(system, cc.s_cc, kepler_solve(state0, t_span, tol))


@dataclass(frozen=True)
class RestCycleCurve:
    h: float
    J: float
    samples: np.ndarray
    arch_endpoints: tuple
    floor: np.ndarray
    critical_J: float


def energy_relation_residual(U, h, J, nu, r):
    return r * h - 0.5 * nu * nu - 0.5 * J * J / r + U


def rest_cycle_curve(cc, h, J, n_samples=201):
    """The (nu, r) locus ``r h = nu^2/2 + J^2/(2r) - U(s_cc)``.

    Parametrized by ``r = r_mid - a cos(theta)``, ``nu = a sin(theta) sqrt(-2h/r)``
    between the two radial roots, theta in [0, 2 pi].  For J = 0 the inner
    root is 0, the samples trace the arch from +sqrt(2U) to -sqrt(2U), and the
    floor segment at r = 0 closes the rest cycle.
    """
    U = cc.U_value if hasattr(cc, "U_value") else float(cc)
    if h >= 0:
        raise InvalidInput("rest-cycle curves need h < 0")
    if n_samples < 2:
        raise InvalidInput("n_samples must be >= 2")
    j_crit = U / np.sqrt(-2 * h)
    disc = U * U + 2 * h * J * J
    if disc < -1e-14 * U * U:
        raise EmptyFamily(f"no motion with |J| = {abs(J):.6g} at h = {h}", j_crit)
    if disc <= 1e-12 * U * U:
        disc = 0.0  # circular solution
    r1 = (-U + np.sqrt(disc)) / (2 * h)
    r2 = (-U - np.sqrt(disc)) / (2 * h)
    r1, r2 = min(r1, r2), max(r1, r2)
    if J == 0:
        r1 = 0.0
    r_mid, a = 0.5 * (r1 + r2), 0.5 * (r2 - r1)
    nu_end = np.sqrt(2 * U)
    theta = np.linspace(0.0, 2 * np.pi, n_samples)
    r = r_mid - a * np.cos(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = a * np.sin(theta) * np.sqrt(-2 * h / r)
    if J == 0:
        # limits at the two equilibria
        nu[0], nu[-1] = nu_end, -nu_end
        r[0] = r[-1] = 0.0
        floor_nu = np.linspace(-nu_end, nu_end, n_samples)
        floor = np.column_stack([floor_nu, np.zeros(n_samples)])
    else:
        floor = np.zeros((0, 2))
    if a == 0:
        nu[:] = 0.0
    return RestCycleCurve(h=h, J=J, samples=np.column_stack([nu, r]),
                          arch_endpoints=(nu_end, -nu_end), floor=floor, critical_J=j_crit)


def distance_to_rest_cycle(U, h, samples):
    """Largest vertical distance from (nu, r) samples to the J = 0 arch or floor."""
    nu, r = samples[:, 0], samples[:, 1]
    arch_r = (0.5 * nu * nu - U) / h
    return float(np.max(np.minimum(np.abs(r - arch_r), np.abs(r))))
