"""Central configurations: critical points of U on the unit sphere of the
center-of-mass subspace, and the blown-up equilibria they generate.

A certified central configuration ``s`` satisfies the shape equation
``grad U(s) + U(s) s = 0`` (the multiplier ``nu**2 / 2`` equals ``U(s)`` by
Euler's identity for the degree -1 potential).
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import bisect

from .blowup import BlownUpState, field_norm
from .errors import NumericalFailure, PartialCollision, Unsupported
from .newton import (as_points, closest_pair, mass_inner, potential_and_gradient,
                     require_centered, rotate, wedge)

log = logging.getLogger(__name__)

CERTIFY_TOL = 1e-11
DEDUP_TOL = 1e-6
FD_STEP = 1e-7
SEED_COLLISION_GAP = 1e-2
COLLISION_GUARD = 1e-4
EULER_SCAN = (1e-3, 1e3, 4001)


@dataclass(frozen=True)
class CentralConfiguration:
    s_cc: np.ndarray
    U_value: float
    nu_star: float
    residual: float
    tag: str

    def to_dict(self):
        return {"tag": self.tag, "U": self.U_value, "nu_star": self.nu_star,
                "residual": self.residual, "s": self.s_cc.tolist()}


@dataclass(frozen=True)
class Equilibrium:
    state: BlownUpState
    sign: int
    nu: float


def normalize_shape(system, q):
    """Center ``q`` and scale it to unit mass-metric size."""
    q = as_points(system, q, "q")
    q = q - system.m @ q / system.total_mass
    return q / np.sqrt(mass_inner(system, q, q))


def cc_residual(system, s):
    """Mass-metric norm of ``grad U(s) + U(s) s``."""
    U, grad = potential_and_gradient(system, s, error=PartialCollision)
    F = grad + U * s
    return float(np.sqrt(mass_inner(system, F, F))), U


def hermitian(system, a, b):
    """Complex mass inner product ``sum m_a a_a conj(b_a)`` of planar configurations."""
    za = a[:, 0] + 1j * a[:, 1]
    zb = b[:, 0] + 1j * b[:, 1]
    return complex(np.sum(system.m * za * np.conj(zb)))


def shape_distance(system, s1, s2):
    """Rotation-invariant chordal distance ``2 sqrt(1 - |<s1, s2>_H|^2)``.

    For three bodies this is exactly the Euclidean distance between the Hopf
    images of s1 and s2 on the unit shape sphere.  Evaluated as the residual
    of projecting s1 onto the complex line of s2, which avoids cancellation.
    """
    z1 = s1[:, 0] + 1j * s1[:, 1]
    z2 = s2[:, 0] + 1j * s2[:, 1]
    resid = z1 - hermitian(system, s1, s2) * z2
    return 2.0 * float(np.sqrt(np.sum(system.m * np.abs(resid) ** 2)))


def canonicalize(system, s):
    """Rotate so the first body off the origin lies on the positive x-axis."""
    s = np.asarray(s, dtype=float)
    for a in range(system.n):
        if np.hypot(*s[a]) > 1e-8:
            return rotate(s, -np.arctan2(s[a, 1], s[a, 0]))
    return s.copy()


def classify_tag(system, s, tol=1e-7):
    if system.n != 3:
        return "Other"
    area = float(wedge(s[1] - s[0], s[2] - s[0]))
    d = [np.hypot(*(s[1] - s[0])), np.hypot(*(s[2] - s[1])), np.hypot(*(s[0] - s[2]))]
    if abs(area) <= tol * max(d) ** 2:
        return f"E{median_body(s) + 1}"
    if max(d) - min(d) <= tol * max(d):
        return "L+" if area > 0 else "L-"
    return "Other"


def median_body(points):
    """Index of the body in the middle along the principal axis of ``points``."""
    p = np.asarray(points, dtype=float)
    c = p - p.mean(axis=0)
    _, _, vt = np.linalg.svd(c)
    proj = c @ vt[0]
    return int(np.argsort(proj)[1])


def certify(system, s, tol=CERTIFY_TOL, tag=None):
    """Recompute the shape-equation residual from scratch and package the CC."""
    s = as_points(system, s, "s")
    require_centered(system, s, 1e-10, "s")
    if abs(mass_inner(system, s, s) - 1.0) > 1e-10:
        raise NumericalFailure("shape is not on the unit sphere")
    res, U = cc_residual(system, s)
    if res > tol:
        raise NumericalFailure(f"residual {res:.3e} above tolerance {tol:.1e}", residual=res)
    return CentralConfiguration(s_cc=s, U_value=U, nu_star=float(np.sqrt(2 * U)),
                                residual=res, tag=tag or classify_tag(system, s))


def lagrange_configuration(system, orientation=1):
    """Equilateral CC; ``orientation`` is the sign of the signed area."""
    if system.n != 3:
        raise Unsupported("Lagrange configuration needs exactly 3 bodies")
    sign = 1.0 if orientation >= 0 else -1.0
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, sign * np.sqrt(3) / 2]])
    return certify(system, normalize_shape(system, q), tol=1e-12,
                   tag="L+" if sign > 0 else "L-")


def _collinear_condition(m, i, j, k):
    """1-D residual in the ratio rho = (x_k - x_j)/(x_j - x_i) with x_i=0, x_j=1."""

    def g(rho):
        x = np.zeros(3)
        x[j], x[k] = 1.0, 1.0 + rho
        acc = np.zeros(3)
        for a in range(3):
            for b in range(3):
                if a != b:
                    d = x[b] - x[a]
                    acc[a] += m[b] * np.sign(d) / d ** 2
        return (acc[k] - acc[j]) * (x[j] - x[i]) - (acc[j] - acc[i]) * (x[k] - x[j])

    return g


def euler_ratio(system, middle):
    """Side ratio (x_k - x_j):(x_j - x_i) of the collinear CC with ``middle`` (1-based) between."""
    if system.n != 3:
        raise Unsupported("Euler configurations need exactly 3 bodies")
    if middle not in (1, 2, 3):
        raise Unsupported(f"middle must be 1, 2 or 3, got {middle}")
    j = middle - 1
    i, k = [a for a in range(3) if a != j]
    g = _collinear_condition(system.m, i, j, k)
    lo, hi, num = EULER_SCAN
    grid = np.logspace(np.log10(lo), np.log10(hi), num)
    vals = np.array([g(r) for r in grid])
    exact = np.flatnonzero(vals == 0.0)
    if exact.size:
        return float(grid[exact[0]])
    changes = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if changes.size == 0:
        raise NumericalFailure("no sign change of the collinear condition",
                               interval=(lo, hi))
    if changes.size > 1:
        log.warning("collinear condition changes sign %d times; using the first", changes.size)
    a, b = grid[changes[0]], grid[changes[0] + 1]
    return float(bisect(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))


def euler_configuration(system, middle):
    """Collinear CC on the x-axis with body ``middle`` (1-based) strictly between the others."""
    rho = euler_ratio(system, middle)
    j = middle - 1
    i, k = [a for a in range(3) if a != j]
    q = np.zeros((3, 2))
    q[j, 0], q[k, 0] = 1.0, 1.0 + rho
    return certify(system, normalize_shape(system, q), tol=1e-12, tag=f"E{middle}")


def _tangent_basis(system, s):
    """Orthonormal basis (as (k, n, 2) array) of the tangent space to the
    unit sphere of the center-of-mass subspace at s, in the mass metric."""
    n = system.n
    sq = np.sqrt(system.m)
    ex = np.zeros((n, 2))
    ex[:, 0] = sq
    ey = np.zeros((n, 2))
    ey[:, 1] = sq
    xs = sq[:, None] * s
    basis_x = null_space(np.vstack([ex.ravel(), ey.ravel(), xs.ravel()]))
    return (basis_x.T.reshape(-1, n, 2)) / sq[None, :, None]


def refine_central_configuration(system, seed, max_iter=60, tol=CERTIFY_TOL):
    """Damped Gauss-Newton on the shape equation restricted to the constraint set.

    The Jacobian is a central finite difference in an orthonormal tangent
    basis; the rotation direction is a kernel direction, handled by the
    minimum-norm least-squares step.
    """
    s = normalize_shape(system, seed)

    def residual_vec(p):
        _, d = closest_pair(p)
        if d < COLLISION_GUARD:
            raise PartialCollision(*closest_pair(p))
        U, grad = potential_and_gradient(system, p, error=PartialCollision)
        return grad + U * p

    def coords(F, basis):
        return np.einsum("kai,ai->k", basis * system.m[None, :, None], F)

    F = residual_vec(s)
    fnorm = float(np.sqrt(mass_inner(system, F, F)))
    for it in range(max_iter):
        if fnorm <= tol:
            return certify(system, s, tol)
        basis = _tangent_basis(system, s)
        f0 = coords(F, basis)
        jac = np.empty((len(basis), len(basis)))
        for col, b in enumerate(basis):
            fp = coords(residual_vec(normalize_shape(system, s + FD_STEP * b)), basis)
            fm = coords(residual_vec(normalize_shape(system, s - FD_STEP * b)), basis)
            jac[:, col] = (fp - fm) / (2 * FD_STEP)
        delta, *_ = np.linalg.lstsq(jac, -f0, rcond=1e-9)
        step = np.tensordot(delta, basis, axes=1)
        length = float(np.sqrt(mass_inner(system, step, step)))
        if length > 0.25:
            step *= 0.25 / length
        alpha = 1.0
        while alpha > 1e-6:
            trial = normalize_shape(system, s + alpha * step)
            try:
                Ft = residual_vec(trial)
            except PartialCollision:
                alpha *= 0.5
                continue
            tnorm = float(np.sqrt(mass_inner(system, Ft, Ft)))
            if tnorm < fnorm:
                break
            alpha *= 0.5
        else:
            raise NumericalFailure("line search stalled", residual=fnorm, iteration=it)
        s, F, fnorm = trial, Ft, tnorm
    if fnorm <= tol:
        return certify(system, s, tol)
    raise NumericalFailure(f"no convergence in {max_iter} iterations", residual=fnorm)


def random_shape(system, rng):
    """Uniform random point on the unit sphere of the center-of-mass subspace."""
    while True:
        q = normalize_shape(system, rng.standard_normal((system.n, 2)) / np.sqrt(system.m)[:, None])
        if closest_pair(q)[1] >= SEED_COLLISION_GAP:
            return q


def enumerate_central_configurations(system, n_seeds=200, rng_seed=0, tol=CERTIFY_TOL,
                                     dedup_tol=DEDUP_TOL):
    """Multistart search; returns rotation classes sorted by U then tag.

    Reflections are not identified, so the two orientations of a
    non-collinear shape are distinct classes.
    """
    rng = np.random.default_rng(rng_seed)
    found = []
    failures = 0
    for _ in range(n_seeds):
        seed = random_shape(system, rng)
        try:
            cc = refine_central_configuration(system, seed, tol=tol)
        except (NumericalFailure, PartialCollision):
            failures += 1
            continue
        if all(shape_distance(system, cc.s_cc, other.s_cc) > dedup_tol for other in found):
            found.append(cc)
    if not found:
        raise NumericalFailure("no seed converged", seeds=n_seeds)
    log.info("%d classes from %d seeds (%d failed)", len(found), n_seeds, failures)
    out = [certify(system, canonicalize(system, cc.s_cc), tol, cc.tag) for cc in found]
    return sorted(out, key=lambda c: (round(c.U_value, 9), c.tag))


def equilibria_from_cc(system, cc):
    """The two blown-up equilibria ``(0, s_cc, +-sqrt(2U) s_cc)``."""
    nu = float(np.sqrt(2 * cc.U_value))
    out = []
    for sign in (1, -1):
        state = BlownUpState(r=0.0, s=cc.s_cc.copy(), y=sign * nu * cc.s_cc)
        out.append(Equilibrium(state=state, sign=sign, nu=sign * nu))
    return tuple(out)


def equilibrium_residual(system, eq):
    return field_norm(system, eq.state)
