"""Newtonian and blown-up integrations on top of the generic engine, and the
homothetic-collapse convergence check."""
from dataclasses import dataclass

import numpy as np

from .blowup import (BlownUpState, blowup_rhs, pack_state, shape_renormalizer, unpack_state)
from .errors import IntegrationError
from .newton import EPS_COLL, as_points, newton_rhs, pack, pairwise_distances
from .ode import EventSpec, IntegrationSpec, integrate

COLLISION_STOP = 1e-6
COLLISION_LABEL = "CollisionApproach"
TAU_BUDGET = 1e3


def collision_approach_event(system, stop=COLLISION_STOP):
    n = system.n
    iu = np.triu_indices(n, 1)

    def g(t, x):
        q = x[:2 * n].reshape(n, 2)
        return float(np.min(pairwise_distances(q)[iu])) - stop

    return EventSpec(COLLISION_LABEL, g, direction=-1, terminal=True)


def integrate_newton(system, q0, v0, t_span, spec=None, events=(), collision_stop=COLLISION_STOP,
                     eps_coll=EPS_COLL):
    """Integrate Newton's equations; stops with ``CollisionApproach`` when two
    bodies come within ``collision_stop`` of each other."""
    q0 = as_points(system, q0, "q0")
    v0 = as_points(system, v0, "v0")
    evs = list(events) + [collision_approach_event(system, collision_stop)]
    return integrate(newton_rhs(system, eps_coll), pack(q0, v0), t_span, spec, evs)


def integrate_blowup(system, state0, tau_span, spec=None, events=(), eps_coll=EPS_COLL):
    spec = spec or IntegrationSpec(renormalize_shape=True)
    projector = shape_renormalizer(system) if spec.renormalize_shape else None
    return integrate(blowup_rhs(system, eps_coll), pack_state(state0), tau_span, spec,
                     events, projector)


@dataclass
class CollapseReport:
    converged: bool
    distance: float
    final_nu: float
    target_nu: float
    nu_monotone: bool
    tau_final: float
    n_steps: int
    message: str = ""
    trajectory: object = None


def homothetic_collapse_check(system, cc, h=-1.0, r0=0.05, spec=None, tau_max=TAU_BUDGET,
                              backward=False, target=1e-6):
    """Follow the J = 0 arch of ``cc`` into the equilibrium it limits on.

    Forward in tau from a collapsing point (nu < 0) the flow should reach
    ``(0, s_cc, -sqrt(2U) s_cc)``; with ``backward`` the ejecting point
    (nu > 0) is integrated toward tau = -infinity and should reach the
    ``+sqrt(2U)`` equilibrium.  Non-convergence is reported, not raised.
    """
    if h >= 0:
        raise ValueError("the arch needs negative energy")
    U = cc.U_value
    sign = 1.0 if backward else -1.0
    nu0 = sign * np.sqrt(2 * (U + r0 * h))
    target_nu = sign * np.sqrt(2 * U)
    s_cc = cc.s_cc
    state0 = BlownUpState(r=r0, s=s_cc.copy(), y=nu0 * s_cc)
    spec = spec or IntegrationSpec(rel_tol=1e-12, abs_tol=1e-14, renormalize_shape=True)
    m = system.m

    def distance(x):
        st = unpack_state(system, x)
        ds = st.s - s_cc
        dy = st.y - target_nu * s_cc
        return float(np.sqrt(st.r ** 2 + np.sum(m[:, None] * (ds * ds + dy * dy))))

    stop = EventSpec("converged", lambda t, x: distance(x) - 0.01 * target, direction=-1,
                     terminal=True)
    span = (0.0, -tau_max) if backward else (0.0, tau_max)
    try:
        traj = integrate_blowup(system, state0, span, spec, [stop])
        message = traj.termination
    except IntegrationError as exc:
        traj = exc.trajectory
        message = f"{type(exc).__name__}: {exc}"
    nus = np.array([unpack_state(system, x).nu(system) for x in traj.y])
    steps = np.diff(nus)
    monotone = bool(np.all(steps >= -1e-13)) if backward else bool(np.all(steps <= 1e-13))
    dist = distance(traj.y[-1])
    return CollapseReport(converged=dist <= target, distance=dist, final_nu=float(nus[-1]),
                          target_nu=float(target_nu), nu_monotone=monotone,
                          tau_final=float(traj.t[-1]), n_steps=traj.n_steps, message=message,
                          trajectory=traj)
