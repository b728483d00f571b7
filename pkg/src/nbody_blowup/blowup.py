"""McGehee blow-up: coordinates (r, s, y), the blown-up vector field, and
scale-invariant quantities.

The transformation is ``q = r s``, ``v = r**-0.5 y``, ``dt = r**1.5 dtau``
with ``s`` on the mass-metric unit sphere of the center-of-mass subspace.
The rotation generator ``i s`` is the +90 degree rotation of every planar
component; it spans the tangent to the orbit ``s -> u s`` of the diagonal
circle action.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateSize, InvalidInput, PartialCollision
from .newton import (EPS_COLL, as_points, is_centered, mass_inner, potential_and_gradient,
                     rotate90, size)

SPHERE_TOL = 1e-10
STRATUM_TOL = 1e-8


@dataclass(frozen=True)
class BlownUpState:
    r: float
    s: np.ndarray
    y: np.ndarray

    @property
    def n(self):
        return len(self.s)

    def nu(self, system):
        return mass_inner(system, self.s, self.y)

    def check(self, system, tol=SPHERE_TOL):
        s = as_points(system, self.s, "s")
        as_points(system, self.y, "y")
        if not np.isfinite(self.r) or self.r < 0:
            raise InvalidInput(f"size r must be finite and >= 0, got {self.r}")
        if abs(mass_inner(system, s, s) - 1.0) > tol:
            raise InvalidInput("shape s is not on the unit sphere")
        if np.linalg.norm(system.m @ s) > tol:
            raise InvalidInput("shape s is not centered")
        return self


@dataclass(frozen=True)
class ScaleInvariants:
    nu: float
    H: float
    J: float
    K: float
    K_sh: float
    y_hor: np.ndarray


class Stratum(Enum):
    INTERIOR = "Interior"
    EXTENDED_COLLISION = "ExtendedCollision"
    FULL_COLLISION = "FullCollision"
    STANDARD_COLLISION = "StandardCollision"
    EQUILIBRIUM = "Equilibrium"

    def within(self, other):
        """True if every state tagged ``self`` also lies in ``other``."""
        chain = [Stratum.EXTENDED_COLLISION, Stratum.FULL_COLLISION,
                 Stratum.STANDARD_COLLISION, Stratum.EQUILIBRIUM]
        if self is other:
            return True
        if self in chain and other in chain:
            return chain.index(self) >= chain.index(other)
        return False


def blow_up(system, q, v):
    q = as_points(system, q, "q")
    v = as_points(system, v, "v")
    r = size(system, q)
    if r == 0.0:
        raise DegenerateSize("total collision: size r = 0 has no shape")
    return BlownUpState(r=r, s=q / r, y=np.sqrt(r) * v)


def blow_down(system, state):
    if state.r <= 0:
        raise DegenerateSize("no physical configuration at r = 0")
    return state.r * np.asarray(state.s, dtype=float), np.asarray(state.y, dtype=float) / np.sqrt(state.r)


def _shape_gradient(system, s, eps_coll):
    return potential_and_gradient(system, s, eps_coll, error=PartialCollision)


def blown_up_field(system, state, eps_coll=EPS_COLL):
    """Return ``(r', s', y')`` with ' = d/dtau.

    Defined on r = 0 as well; raises PartialCollision near binary collisions
    of the shape.
    """
    s = as_points(system, state.s, "s")
    y = as_points(system, state.y, "y")
    _, grad = _shape_gradient(system, s, eps_coll)
    nu = mass_inner(system, s, y)
    return state.r * nu, y - nu * s, grad + 0.5 * nu * y


def field_norm(system, state, eps_coll=EPS_COLL):
    dr, ds, dy = blown_up_field(system, state, eps_coll)
    return float(np.sqrt(dr * dr + mass_inner(system, ds, ds) + mass_inner(system, dy, dy)))


def scale_invariants(system, state, eps_coll=EPS_COLL):
    s = as_points(system, state.s, "s")
    y = as_points(system, state.y, "y")
    U, _ = _shape_gradient(system, s, eps_coll)
    i_s = rotate90(s)
    nu = mass_inner(system, s, y)
    J = mass_inner(system, i_s, y)
    y_hor = y - nu * s - J * i_s
    K = 0.5 * mass_inner(system, y, y)
    return ScaleInvariants(nu=nu, H=K - U, J=J, K=K,
                           K_sh=0.5 * mass_inner(system, y_hor, y_hor), y_hor=y_hor)


def invariant_rates(system, state, eps_coll=EPS_COLL):
    """Exact tau-derivatives of (nu, H~, J~) along the blown-up field.

    Computed by the chain rule from the field itself, so they can be
    compared against the closed-form evolution laws.
    """
    s = as_points(system, state.s, "s")
    y = as_points(system, state.y, "y")
    _, grad = _shape_gradient(system, s, eps_coll)
    _, ds, dy = blown_up_field(system, state, eps_coll)
    dnu = mass_inner(system, ds, y) + mass_inner(system, s, dy)
    dH = mass_inner(system, y, dy) - mass_inner(system, grad, ds)
    dJ = mass_inner(system, rotate90(ds), y) + mass_inner(system, rotate90(s), dy)
    return dnu, dH, dJ


def classify_stratum(system, state, tol=STRATUM_TOL, eps_coll=EPS_COLL):
    if state.r > tol:
        return Stratum.INTERIOR
    try:
        inv = scale_invariants(system, state, eps_coll)
    except PartialCollision:
        return Stratum.EXTENDED_COLLISION
    if abs(inv.H) > tol:
        return Stratum.EXTENDED_COLLISION
    if abs(inv.J) > tol:
        return Stratum.FULL_COLLISION
    if field_norm(system, state, eps_coll) > tol:
        return Stratum.STANDARD_COLLISION
    return Stratum.EQUILIBRIUM


def physical_time(tau, r):
    """Newtonian time ``t(tau) = int_{tau0}^{tau} r**1.5 dtau`` on the given grid.

    Uses the antiderivative of a shape-preserving cubic interpolant of
    ``r**1.5`` so the result is exact for constant r and monotone in tau.
    """
    tau = np.asarray(tau, dtype=float)
    r = np.asarray(r, dtype=float)
    if tau.shape != r.shape:
        raise InvalidInput("tau and r grids must have the same shape")
    if np.any(r < 0):
        raise InvalidInput("r must be non-negative")
    if tau.size < 2:
        return np.zeros_like(tau)
    f = r ** 1.5
    if tau[-1] < tau[0]:
        return -physical_time(-tau, r)
    F = PchipInterpolator(tau, f).antiderivative()
    t = F(tau) - F(tau[0])
    return np.maximum.accumulate(t)


# flat-state helpers for the integrator: x = [r, s.ravel(), y.ravel()]

def pack_state(state):
    return np.concatenate([[state.r], np.ravel(state.s), np.ravel(state.y)])


def unpack_state(system, x):
    n = system.n
    x = np.asarray(x, dtype=float)
    return BlownUpState(r=float(x[0]), s=x[1:1 + 2 * n].reshape(n, 2),
                        y=x[1 + 2 * n:].reshape(n, 2))


def blowup_rhs(system, eps_coll=EPS_COLL):
    n = system.n
    m = system.m

    def rhs(tau, x):
        s = x[1:1 + 2 * n].reshape(n, 2)
        y = x[1 + 2 * n:].reshape(n, 2)
        _, grad = potential_and_gradient(system, s, eps_coll, error=PartialCollision)
        nu = float(np.sum(m[:, None] * s * y))
        return np.concatenate([[x[0] * nu], (y - nu * s).ravel(), (grad + 0.5 * nu * y).ravel()])

    return rhs


def shape_renormalizer(system):
    """Projector rescaling s back to the unit sphere; returns (x, |scale - 1|)."""
    n = system.n
    m = system.m

    def project(x):
        s = x[1:1 + 2 * n].reshape(n, 2)
        norm = float(np.sqrt(np.sum(m[:, None] * s * s)))
        out = x.copy()
        out[1:1 + 2 * n] = (s / norm).ravel()
        return out, abs(norm - 1.0)

    return project


def make_state(system, r, s, y, normalize=False):
    """Build a checked BlownUpState; ``normalize`` centers and rescales s."""
    s = as_points(system, s, "s")
    y = as_points(system, y, "y")
    if normalize:
        s = s - system.m @ s / system.total_mass
        s = s / np.sqrt(mass_inner(system, s, s))
    elif not is_centered(system, s, SPHERE_TOL):
        raise InvalidInput("shape s is not centered")
    return BlownUpState(r=float(r), s=s, y=y).check(system)
