"""Three-body reduction to the shape sphere.

Conventions (recorded in every output file):

* Jacobi coordinates ``Z1 = sqrt(mu1) (q2 - q1)`` and
  ``Z2 = sqrt(mu2) (q3 - c12)`` with ``mu1 = m1 m2 / (m1 + m2)``,
  ``mu2 = (m1 + m2) m3 / M`` and ``c12`` the center of mass of bodies 1, 2.
  On centered configurations ``|Z1|^2 + |Z2|^2 = <q, q>``.
* Hopf map ``w = (2 Re Z1 conj(Z2), 2 Im Z1 conj(Z2), |Z1|^2 - |Z2|^2) / |Z|^2``.
  Collinear triangles are the great circle ``w2 = 0``; a positively oriented
  triangle (positive signed area) has ``w2 < 0``.
"""
from dataclasses import dataclass, field

import numpy as np

from .blowup import scale_invariants
from .central import euler_configuration, lagrange_configuration, median_body
from .errors import DegenerateSize, NumericalFailure, PartialCollision, Unsupported
from .newton import EPS_COLL, as_points, closest_pair, mass_inner, require_centered, wedge
from .ode import EventSpec

JACOBI_CONVENTION = ("Z1 = sqrt(m1 m2/(m1+m2)) (q2-q1); "
                     "Z2 = sqrt((m1+m2) m3/M) (q3 - (m1 q1 + m2 q2)/(m1+m2))")
HOPF_CONVENTION = ("w = (2 Re(Z1 conj Z2), 2 Im(Z1 conj Z2), |Z1|^2-|Z2|^2)/(|Z1|^2+|Z2|^2); "
                   "collinear circle w2 = 0; positive orientation w2 < 0")
COLLINEAR_AXIS = 1
KSH_CONSISTENCY_TOL = 1e-9
SYZYGY_LABEL = "syzygy"


def _require_three(system):
    if system.n != 3:
        raise Unsupported("shape-sphere reduction is implemented for three bodies only")


def _complex(p):
    return p[..., 0] + 1j * p[..., 1]


def _planar(z):
    return np.stack([np.real(z), np.imag(z)], axis=-1)


@dataclass(frozen=True)
class JacobiCoordinates:
    Z1: complex
    Z2: complex

    def as_array(self):
        return np.array([[self.Z1.real, self.Z1.imag], [self.Z2.real, self.Z2.imag]])


@dataclass(frozen=True)
class ShapePoint:
    w: np.ndarray


def _reduced_masses(system):
    m1, m2, m3 = system.masses
    M = system.total_mass
    return np.sqrt(m1 * m2 / (m1 + m2)), np.sqrt((m1 + m2) * m3 / M)


def jacobi_coordinates(system, q, check=True):
    _require_three(system)
    q = as_points(system, q, "q")
    if check:
        require_centered(system, q, 1e-10)
    m1, m2, _ = system.masses
    a1, a2 = _reduced_masses(system)
    z = _complex(q)
    c12 = (m1 * z[0] + m2 * z[1]) / (m1 + m2)
    return JacobiCoordinates(Z1=complex(a1 * (z[1] - z[0])), Z2=complex(a2 * (z[2] - c12)))


def jacobi_inverse(system, jac):
    """Centered configuration with the given Jacobi coordinates."""
    _require_three(system)
    m1, m2, m3 = system.masses
    M = system.total_mass
    a1, a2 = _reduced_masses(system)
    d = jac.Z1 / a1
    e = jac.Z2 / a2
    c12 = -m3 / M * e
    z = np.array([c12 - m2 / (m1 + m2) * d, c12 + m1 / (m1 + m2) * d, c12 + e])
    return _planar(z)


def hopf_project(Z1, Z2):
    Z1, Z2 = complex(Z1), complex(Z2)
    norm2 = abs(Z1) ** 2 + abs(Z2) ** 2
    if norm2 == 0.0:
        raise DegenerateSize("triple collision has no shape")
    p = 2 * Z1 * Z2.conjugate()
    return ShapePoint(np.array([p.real, p.imag, abs(Z1) ** 2 - abs(Z2) ** 2]) / norm2)


def shape_of(system, q, check=True):
    jac = jacobi_coordinates(system, q, check)
    return hopf_project(jac.Z1, jac.Z2)


def hopf_differential(Z, dZ):
    """Derivative of the Hopf map at Z (a pair of complex numbers) along dZ."""
    Z1, Z2 = Z
    d1, d2 = dZ
    N = abs(Z1) ** 2 + abs(Z2) ** 2
    dN = 2 * (Z1 * d1.conjugate() + Z2 * d2.conjugate()).real
    a = 2 * Z1 * Z2.conjugate()
    da = 2 * (d1 * Z2.conjugate() + Z1 * d2.conjugate())
    num = np.array([a.real, a.imag, abs(Z1) ** 2 - abs(Z2) ** 2])
    dnum = np.array([da.real, da.imag, 2 * (Z1 * d1.conjugate()).real - 2 * (Z2 * d2.conjugate()).real])
    return (dnum * N - num * dN) / N ** 2


def collinearity(q):
    """Signed double area ``(q2 - q1) ^ (q3 - q1)``; zero iff collinear."""
    q = np.asarray(q, dtype=float)
    return float(wedge(q[1] - q[0], q[2] - q[0]))


# -- syzygies ---------------------------------------------------------------

@dataclass(frozen=True)
class SyzygyEvent:
    time: float
    symbol: int
    sign: int


@dataclass
class SyzygySequence:
    events: list = field(default_factory=list)
    identically_collinear: bool = False

    @property
    def symbols(self):
        return "".join(str(e.symbol) for e in self.events)

    def __len__(self):
        return len(self.events)


def _positions_getter(system, chart):
    n = system.n
    if chart == "newton":
        return lambda x: x[:2 * n].reshape(n, 2)
    if chart == "blowup":
        return lambda x: x[1:1 + 2 * n].reshape(n, 2)
    raise ValueError(f"unknown chart {chart!r}")


def syzygy_event(system, chart="newton"):
    """Non-terminal collinearity event for ``ode.integrate``."""
    _require_three(system)
    pos = _positions_getter(system, chart)
    return EventSpec(SYZYGY_LABEL, lambda t, x: collinearity(pos(x)), direction=0, terminal=False)


def syzygy_sequence(system, trajectory, chart="newton", collinear_tol=1e-9):
    """Symbol sequence of the collinear instants recorded in ``trajectory``.

    A trajectory whose normalized collinearity stays below ``collinear_tol``
    across a whole step is reported as identically collinear, with no events.
    """
    _require_three(system)
    pos = _positions_getter(system, chart)
    normalized = []
    for x in trajectory.y:
        q = pos(x)
        r2 = mass_inner(system, q - system.m @ q / system.total_mass,
                        q - system.m @ q / system.total_mass)
        normalized.append(abs(collinearity(q)) / r2 if r2 > 0 else 0.0)
    normalized = np.array(normalized)
    if normalized.size >= 2 and np.any((normalized[:-1] <= collinear_tol) & (normalized[1:] <= collinear_tol)):
        return SyzygySequence([], identically_collinear=True)
    events = [SyzygyEvent(time=float(e.time), symbol=median_body(pos(e.state)) + 1, sign=e.direction)
              for e in trajectory.events_labeled(SYZYGY_LABEL)]
    return SyzygySequence(events)


# -- reduced state ------------------------------------------------------------

@dataclass(frozen=True)
class ReducedState:
    r: float
    shape: ShapePoint
    shape_velocity: np.ndarray
    nu: float
    J: float
    K_sh: float


def reduced_state(system, state, eps_coll=EPS_COLL):
    """Rotation-reduced coordinates ``(r, [s], [y_hor], nu, J~)``.

    The shape velocity is the Hopf push-forward of ``y_hor``; on the unit
    three-sphere the Hopf map doubles horizontal lengths, so
    ``K_sh = |shape_velocity|^2 / 8``.
    """
    _require_three(system)
    s = as_points(system, state.s, "s")
    pair, d = closest_pair(s)
    if d <= eps_coll:
        raise PartialCollision(pair, d)
    inv = scale_invariants(system, state, eps_coll)
    jac = jacobi_coordinates(system, s, check=False)
    djac = jacobi_coordinates(system, inv.y_hor, check=False)
    w = hopf_project(jac.Z1, jac.Z2)
    wdot = hopf_differential((jac.Z1, jac.Z2), (djac.Z1, djac.Z2))
    k_sh = float(wdot @ wdot) / 8.0
    if abs(k_sh - inv.K_sh) > KSH_CONSISTENCY_TOL * max(1.0, inv.K_sh):
        raise NumericalFailure("shape kinetic energy disagrees with the Saari split",
                               from_shape=k_sh, from_saari=inv.K_sh)
    return ReducedState(r=state.r, shape=w, shape_velocity=wdot, nu=inv.nu, J=inv.J, K_sh=inv.K_sh)


# -- connection graph -----------------------------------------------------------

@dataclass(frozen=True)
class GraphEdge:
    start: str
    through: str
    end: str
    points: np.ndarray


@dataclass(frozen=True)
class ConnectionGraph:
    vertices: dict
    edges: list

    def retract(self, w):
        """Nearest-edge projection of a shape-sphere point.

        Returns ``(edge_index, nearest_point)``; only the L+ -> L- copy of each
        half circle is searched, ties go to the lowest index.
        """
        w = np.asarray(w, dtype=float)
        best = (None, None, np.inf)
        for k, edge in enumerate(self.edges):
            if edge.start != "L+":
                continue
            d = np.linalg.norm(edge.points - w, axis=1)
            j = int(np.argmin(d))
            if d[j] < best[2]:
                best = (k, edge.points[j], d[j])
        return best[0], best[1]


def connection_graph(system, n_samples=401):
    """Concrete connection graph on the shape sphere for three equal masses.

    Edge i runs along the isosceles great circle ``r_ij = r_ik`` from one
    Lagrange point through E_i to the other; both directions are recorded,
    giving six directed edges.
    """
    _require_three(system)
    m = system.m
    if np.max(np.abs(m - m[0])) > 1e-12 * m[0]:
        raise Unsupported("the isosceles circles are invariant only for equal masses")
    vertices = {
        "L+": shape_of(system, lagrange_configuration(system, +1).s_cc).w,
        "L-": shape_of(system, lagrange_configuration(system, -1).s_cc).w,
    }
    for i in (1, 2, 3):
        vertices[f"E{i}"] = shape_of(system, euler_configuration(system, i).s_cc).w
    if n_samples % 2 == 0:
        n_samples += 1
    heights = np.sqrt(3.0) * np.sin(np.linspace(-np.pi / 2, np.pi / 2, n_samples))
    edges = []
    for i in (0, 1, 2):
        j, k = [a for a in range(3) if a != i]
        pts = []
        for h in heights:
            q = np.zeros((3, 2))
            q[j] = (-1.0, 0.0)
            q[k] = (1.0, 0.0)
            q[i] = (0.0, h)
            q = q - m @ q / system.total_mass
            pts.append(shape_of(system, q).w)
        pts = np.array(pts)
        if np.linalg.norm(pts[0] - vertices["L+"]) > np.linalg.norm(pts[-1] - vertices["L+"]):
            pts = pts[::-1]
        label = f"E{i + 1}"
        edges.append(GraphEdge("L+", label, "L-", pts))
        edges.append(GraphEdge("L-", label, "L+", pts[::-1].copy()))
    return ConnectionGraph(vertices=vertices, edges=edges)
