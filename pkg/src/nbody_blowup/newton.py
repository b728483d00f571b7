"""Mass-metric geometry and the Newtonian vector field for the planar N-body problem.

Configurations and velocities are ``(n, 2)`` float arrays.  G = 1 throughout,
and gradients follow the mass-metric convention ``(grad f)_a = (1/m_a) df/dq_a``
so that Newton's equations read ``q'' = grad U(q)``.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CollisionSingularity, DimensionMismatch, InvalidInput

EPS_COLL = 1e-8
CENTER_TOL = 1e-12


@dataclass(frozen=True)
class MassSystem:
    masses: tuple

    def __post_init__(self):
        m = tuple(float(x) for x in self.masses)
        if len(m) < 2:
            raise InvalidInput("need at least two bodies")
        if not all(np.isfinite(x) and x > 0 for x in m):
            raise InvalidInput(f"masses must be finite and positive, got {m}")
        object.__setattr__(self, "masses", m)

    @property
    def n(self):
        return len(self.masses)

    @property
    def m(self):
        return np.asarray(self.masses)

    @property
    def total_mass(self):
        return float(sum(self.masses))


@dataclass(frozen=True)
class EnergyMomenta:
    K: float
    U: float
    H: float
    P: np.ndarray
    J: float


def as_points(system, a, name="array"):
    """Coerce ``a`` to an ``(n, 2)`` float array checked against ``system``."""
    arr = np.asarray(a, dtype=float)
    if arr.shape == (2 * system.n,):
        arr = arr.reshape(system.n, 2)
    if arr.shape != (system.n, 2):
        raise DimensionMismatch(
            f"{name} has shape {arr.shape}, expected ({system.n}, 2)")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} has non-finite entries")
    return arr


def mass_inner(system, a, b):
    a = as_points(system, a, "a")
    b = as_points(system, b, "b")
    return float(np.sum(system.m[:, None] * a * b))


def rotate90(a):
    """Multiply every planar component by i, i.e. rotate by +90 degrees."""
    a = np.asarray(a, dtype=float)
    return np.stack([-a[..., 1], a[..., 0]], axis=-1)


def rotate(a, angle):
    c, s = np.cos(angle), np.sin(angle)
    a = np.asarray(a, dtype=float)
    return np.stack([c * a[..., 0] - s * a[..., 1], s * a[..., 0] + c * a[..., 1]], axis=-1)


def wedge(a, b):
    """Scalar planar cross product, broadcast over leading axes."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def center_of_mass(system, q):
    q = as_points(system, q, "q")
    return system.m @ q / system.total_mass


def is_centered(system, q, tol=CENTER_TOL):
    q = as_points(system, q, "q")
    scale = float(np.max(np.abs(q)))
    return bool(np.linalg.norm(system.m @ q) <= tol * system.total_mass * scale)


def require_centered(system, q, tol=CENTER_TOL, name="q"):
    if not is_centered(system, q, tol):
        raise InvalidInput(f"{name} is not in the center-of-mass frame; "
                           "call to_center_of_mass first")


def to_center_of_mass(system, q, v):
    """Shift positions and velocities so both mass-weighted means vanish."""
    q = as_points(system, q, "q")
    v = as_points(system, v, "v")
    return q - center_of_mass(system, q), v - center_of_mass(system, v)


def size(system, q, check=True):
    q = as_points(system, q, "q")
    if check:
        require_centered(system, q)
    return float(np.sqrt(np.sum(system.m[:, None] * q * q)))


def pairwise_distances(q):
    d = q[:, None, :] - q[None, :, :]
    return np.sqrt(np.sum(d * d, axis=-1))


def closest_pair(q):
    """Return ``((a, b), distance)`` for the closest pair of bodies."""
    r = pairwise_distances(np.asarray(q, dtype=float))
    n = len(r)
    iu = np.triu_indices(n, 1)
    k = int(np.argmin(r[iu]))
    return (int(iu[0][k]), int(iu[1][k])), float(r[iu][k])


def potential(system, q, eps_coll=EPS_COLL):
    q = as_points(system, q, "q")
    pair, dmin = closest_pair(q)
    if dmin <= eps_coll:
        raise CollisionSingularity(pair, dmin)
    m = system.m
    return float(sum(m[a] * m[b] / np.hypot(*(q[a] - q[b]))
                     for a, b in combinations(range(system.n), 2)))


def potential_and_gradient(system, q, eps_coll=EPS_COLL, error=CollisionSingularity):
    """U(q) and its mass-metric gradient.

    ``error`` lets callers (the blown-up field) raise a more specific
    collision subclass.
    """
    q = as_points(system, q, "q")
    m = system.m
    diff = q[None, :, :] - q[:, None, :]  # diff[a, b] = q_b - q_a
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(r, np.inf)
    if np.min(r) <= eps_coll:
        pair, dmin = closest_pair(q)
        raise error(pair, dmin)
    inv = 1.0 / r
    U = 0.5 * float(m @ inv @ m)
    grad = np.einsum("ab,abk->ak", m[None, :] * inv ** 3, diff)
    return U, grad


def energy_and_momenta(system, q, v, eps_coll=EPS_COLL):
    q = as_points(system, q, "q")
    v = as_points(system, v, "v")
    m = system.m
    K = 0.5 * float(np.sum(m[:, None] * v * v))
    U = potential(system, q, eps_coll)
    P = m @ v
    J = float(np.sum(m * wedge(q, v)))
    return EnergyMomenta(K=K, U=U, H=K - U, P=P, J=J)


def newton_field(system, q, v, eps_coll=EPS_COLL):
    """Return ``(dq/dt, dv/dt) = (v, grad U(q))``."""
    q = as_points(system, q, "q")
    v = as_points(system, v, "v")
    _, grad = potential_and_gradient(system, q, eps_coll)
    return v.copy(), grad


def pack(q, v):
    return np.concatenate([np.ravel(q), np.ravel(v)])


def unpack(system, state):
    n = system.n
    state = np.asarray(state, dtype=float)
    return state[:2 * n].reshape(n, 2), state[2 * n:].reshape(n, 2)


def newton_rhs(system, eps_coll=EPS_COLL):
    """Flat-state right-hand side ``f(t, x)`` for the integrator."""
    n = system.n

    def rhs(t, x):
        q = x[:2 * n].reshape(n, 2)
        _, grad = potential_and_gradient(system, q, eps_coll)
        return np.concatenate([x[2 * n:], grad.ravel()])

    return rhs
