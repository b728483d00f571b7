"""Self-check suite behind ``nbody-blowup check``.

Each check is cheap (a few seconds at most) and returns a ``CheckResult``.
"""
import time
from dataclasses import dataclass

import numpy as np

from .blowup import invariant_rates, scale_invariants
from .central import (enumerate_central_configurations, equilibria_from_cc, equilibrium_residual,
                      euler_configuration, euler_ratio, lagrange_configuration)
from .flows import homothetic_collapse_check, integrate_newton
from .newton import (MassSystem, energy_and_momenta, mass_inner, potential,
                     potential_and_gradient, rotate, rotate90, unpack)
from .ode import IntegrationSpec, invariant_drift
from .sampling import random_full_collision_state, random_shape, random_state
from .shape import connection_graph, shape_of


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def check_euler_identity(rng, samples=200):
    worst = 0.0
    for n in (3, 4):
        sy = MassSystem(tuple(rng.uniform(0.5, 2.0, n)))
        for _ in range(samples):
            q = random_shape(sy, rng) * rng.uniform(0.5, 3.0)
            U, g = potential_and_gradient(sy, q)
            worst = max(worst, abs(mass_inner(sy, g, q) + U) / U)
    return worst <= 1e-10, f"max |<grad U, q> + U|/U = {worst:.2e}"


def check_gradient_fd(rng, samples=50, step=1e-6):
    worst = 0.0
    sy = MassSystem((1.0, 2.0, 3.0))
    for _ in range(samples):
        q = random_shape(sy, rng)
        _, g = potential_and_gradient(sy, q)
        fd = np.zeros_like(q)
        for a in range(3):
            for k in range(2):
                e = np.zeros_like(q)
                e[a, k] = step
                fd[a, k] = (potential(sy, q + e) - potential(sy, q - e)) / (2 * step) / sy.m[a]
        worst = max(worst, float(np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1e-3))))
    return worst <= 1e-5, f"max relative FD error {worst:.2e}"


def check_saari(rng, samples=2000):
    sy = MassSystem((1.0, 2.0, 3.0))
    worst = 0.0
    for _ in range(samples):
        inv = scale_invariants(sy, random_state(sy, rng))
        worst = max(worst, abs(inv.K - 0.5 * inv.nu ** 2 - inv.K_sh - 0.5 * inv.J ** 2))
    return worst <= 1e-10, f"max Saari defect {worst:.2e}"


def check_evolution_laws(rng, samples=2000):
    sy = MassSystem((1.0, 2.0, 3.0))
    worst = 0.0
    for k in range(samples):
        st = random_state(sy, rng, r=0.0 if k % 2 else None)
        inv = scale_invariants(sy, st)
        dnu, dH, dJ = invariant_rates(sy, st)
        worst = max(worst, abs(dH - inv.nu * inv.H), abs(dJ + 0.5 * inv.nu * inv.J),
                    abs(dnu - (inv.K - 0.5 * inv.nu ** 2 + inv.H)))
    return worst <= 1e-9, f"max evolution-law defect {worst:.2e}"


def check_gradient_like(rng, samples=500):
    sy = MassSystem((1.0, 1.0, 1.0))
    low = np.inf
    for _ in range(samples):
        dnu, _, _ = invariant_rates(sy, random_full_collision_state(sy, rng))
        low = min(low, dnu)
    return low >= -1e-12, f"min nu' on M0 = {low:.2e}"


def check_census():
    sy = MassSystem((1.0, 1.0, 1.0))
    ccs = enumerate_central_configurations(sy, n_seeds=200, rng_seed=0)
    eqs = [e for cc in ccs for e in equilibria_from_cc(sy, cc)]
    worst = max(equilibrium_residual(sy, e) for e in eqs)
    ok = len(ccs) == 5 and len(eqs) == 10 and worst <= 1e-10
    return ok, f"{len(ccs)} classes, {len(eqs)} equilibria, max field {worst:.2e}"


def check_euler_ratio():
    sy = MassSystem((1.0, 1.0, 1.0))
    rho = euler_ratio(sy, 2)
    s = euler_configuration(sy, 2).s_cc
    mid = abs(s[1, 0] - 0.5 * (s[0, 0] + s[2, 0]))
    return abs(rho - 1) <= 1e-10 and mid <= 1e-10, f"ratio - 1 = {rho - 1:.2e}, midpoint offset {mid:.2e}"


def check_conservation():
    sy = MassSystem((1.0, 1.0, 1.0))
    s = lagrange_configuration(sy).s_cc
    omega = np.sqrt(3.0)
    q0, v0 = s, omega * rotate90(s)
    period = 2 * np.pi / omega
    traj = integrate_newton(sy, q0, v0, (0, 10 * period), IntegrationSpec(rel_tol=1e-10, abs_tol=1e-14))

    def H(x):
        q, v = unpack(sy, x)
        return energy_and_momenta(sy, q, v).H

    def J(x):
        q, v = unpack(sy, x)
        return energy_and_momenta(sy, q, v).J

    drift = invariant_drift(traj, {"H": H, "J": J})
    dh, dj = drift["H"].max_abs, drift["J"].max_abs
    return dh <= 1e-9 and dj <= 1e-9, f"drift H {dh:.2e}, J {dj:.2e}"


def check_collapse():
    sy = MassSystem((1.0, 1.0, 1.0))
    rep = homothetic_collapse_check(sy, lagrange_configuration(sy))
    ok = rep.converged and rep.nu_monotone and abs(rep.final_nu + np.sqrt(6)) <= 1e-6
    return ok, f"distance {rep.distance:.2e}, nu {rep.final_nu:.9f}"


def check_hopf(rng, samples=500):
    sy = MassSystem((1.0, 2.0, 3.0))
    worst = 0.0
    for _ in range(samples):
        q = random_shape(sy, rng)
        u = rng.uniform(0, 2 * np.pi)
        worst = max(worst, float(np.linalg.norm(shape_of(sy, rotate(q, u)).w - shape_of(sy, q).w)))
    return worst <= 1e-12, f"max rotation defect {worst:.2e}"


def check_graph():
    g = connection_graph(MassSystem((1.0, 1.0, 1.0)))
    worst = 0.0
    for e in g.edges:
        worst = max(worst, np.linalg.norm(e.points[0] - g.vertices[e.start]),
                    np.linalg.norm(e.points[-1] - g.vertices[e.end]),
                    np.min(np.linalg.norm(e.points - g.vertices[e.through], axis=1)))
    return len(g.edges) == 6 and worst <= 1e-8, f"{len(g.edges)} edges, max endpoint gap {worst:.2e}"


def run_all(seed=0):
    rng = np.random.default_rng(seed)
    checks = [
        ("euler_identity", lambda: check_euler_identity(rng)),
        ("gradient_fd", lambda: check_gradient_fd(rng)),
        ("saari_identity", lambda: check_saari(rng)),
        ("evolution_laws", lambda: check_evolution_laws(rng)),
        ("gradient_like_M0", lambda: check_gradient_like(rng)),
        ("equilibrium_census", check_census),
        ("euler_ratio", check_euler_ratio),
        ("lagrange_conservation", check_conservation),
        ("homothetic_collapse", check_collapse),
        ("hopf_invariance", lambda: check_hopf(rng)),
        ("connection_graph", check_graph),
    ]
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
