"""Adaptive Dormand-Prince 5(4) integrator with dense output and event location.

One engine serves the Newtonian, blown-up and Kepler flows.  States are flat
float arrays; fields have the signature ``f(t, x) -> dx/dt``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BudgetExceeded, InvalidInput, NBodyError, StiffnessFailure

log = logging.getLogger(__name__)

# Dormand & Prince (1980) tableau, FSAL form.
C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# difference between the 5th and embedded 4th order weights
E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Continuous extension of order 4 (Shampine 1986): y(t0 + x h) = y0 + h K^T P [x, x^2, x^3, x^4]
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])
ORDER = 5
ERROR_EXPONENT = -1 / ORDER
SAFETY = 0.9
# PI step control: h_new = h * SAFETY * err^(-1/5 + 0.75 BETA) * err_prev^BETA
BETA = 0.08
ERR_FLOOR = 1e-4
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
EVENT_XTOL = 1e-12


@dataclass
class IntegrationSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    initial_step: float | None = None
    max_steps: int = 200_000
    renormalize_shape: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidInput("tolerances must be positive")
        if self.max_steps <= 0:
            raise InvalidInput("max_steps must be positive")
        if not self.max_step > 0:
            raise InvalidInput("max_step must be positive")


@dataclass
class EventSpec:
    """Scalar event ``g(t, x)``; ``direction`` +1 keeps rising zeros only, -1 falling, 0 both."""
    label: str
    function: Callable
    direction: int = 0
    terminal: bool = False


@dataclass
class EventRecord:
    time: float
    label: str
    state: np.ndarray
    direction: int


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    segments: list = field(default_factory=list)
    events: list = field(default_factory=list)
    termination: str = "completed"
    renorm: np.ndarray = field(default_factory=lambda: np.zeros(0))
    spec: IntegrationSpec | None = None

    @property
    def n_steps(self):
        return len(self.segments)

    def _segment(self, t):
        ts = self.t
        if ts[-1] >= ts[0]:
            k = int(np.searchsorted(ts, t, side="right")) - 1
        else:
            k = int(np.searchsorted(-ts, -t, side="right")) - 1
        return min(max(k, 0), len(self.segments) - 1)

    def __call__(self, t):
        """Dense-output state at ``t`` (scalar) or an array of times."""
        if np.ndim(t):
            return np.array([self(ti) for ti in t])
        if not self.segments:
            return self.y[0].copy()
        return self.segments[self._segment(t)].value(t)

    def derivative(self, t):
        """Time derivative of the dense-output interpolant."""
        if np.ndim(t):
            return np.array([self.derivative(ti) for ti in t])
        return self.segments[self._segment(t)].deriv(t)

    def events_labeled(self, label):
        return [e for e in self.events if e.label == label]


class DenseSegment:
    __slots__ = ("t0", "h", "y0", "Q")

    def __init__(self, t0, h, y0, Q):
        self.t0, self.h, self.y0, self.Q = t0, h, y0, Q

    def value(self, t):
        x = (t - self.t0) / self.h
        return self.y0 + self.h * (self.Q @ np.array([x, x * x, x ** 3, x ** 4]))

    def deriv(self, t):
        x = (t - self.t0) / self.h
        return self.Q @ np.array([1.0, 2 * x, 3 * x * x, 4 * x ** 3])


def _rms(x):
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(fun, t0, y0, f0, direction, spec):
    scale = spec.abs_tol + spec.rel_tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, spec.max_step)
    f1 = fun(t0 + direction * h0, y0 + direction * h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    return min(100 * h0, h1, spec.max_step)


def _rk_step(fun, t, y, f, h):
    K = np.empty((7, y.size))
    K[0] = f
    for i in range(1, 6):
        dy = h * (np.asarray(A[i]) @ K[:i])
        K[i] = fun(t + C[i] * h, y + dy)
    y_new = y + h * (B[:6] @ K[:6])
    K[6] = fun(t + h, y_new)
    return y_new, K


def _locate(seg, ev, t_a, t_b, g_b):
    """Root of the event function on the dense output between t_a and t_b."""
    if g_b == 0.0:
        return t_b
    g = lambda t: ev.function(t, seg.value(t))
    lo, hi = min(t_a, t_b), max(t_a, t_b)
    try:
        return brentq(g, lo, hi, xtol=EVENT_XTOL, rtol=4 * np.finfo(float).eps)
    except ValueError:
        # interpolant endpoints disagree with the step values by rounding only
        return t_b


def _triggered(ev, g_old, g_new):
    if g_old == 0.0:
        return False
    crossed = g_old * g_new < 0 or g_new == 0.0
    if not crossed:
        return False
    up = g_new > g_old
    return ev.direction == 0 or (ev.direction > 0) == up


def integrate(fun, y0, span, spec=None, events=(), projector=None):
    """Integrate ``x' = fun(t, x)`` over ``span = (t0, t1)``.

    ``projector(x) -> (x_projected, magnitude)`` is applied after every
    accepted step when ``spec.renormalize_shape`` is set.  Errors raised by
    ``fun`` propagate with the partial trajectory attached as ``.trajectory``.
    """
    spec = spec or IntegrationSpec()
    t0, t1 = float(span[0]), float(span[1])
    if t1 == t0 or not (np.isfinite(t0) and np.isfinite(t1)):
        raise InvalidInput(f"degenerate span {span}")
    direction = 1.0 if t1 > t0 else -1.0
    y = np.array(y0, dtype=float)
    events = list(events)

    ts, ys, segments, records, renorm = [t0], [y.copy()], [], [], []
    traj = Trajectory(t=None, y=None, segments=segments, events=records, spec=spec)

    def finish(reason):
        traj.t = np.array(ts)
        traj.y = np.array(ys)
        traj.renorm = np.array(renorm)
        traj.termination = reason
        return traj

    t = t0
    try:
        f = np.asarray(fun(t, y), dtype=float)
    except NBodyError as exc:
        exc.trajectory = finish(type(exc).__name__)
        raise
    g_vals = [ev.function(t, y) for ev in events]
    h = spec.initial_step if spec.initial_step else _initial_step(fun, t, y, f, direction, spec)
    field_error = None
    err_prev = ERR_FLOOR

    while direction * (t1 - t) > 0:
        if len(segments) >= spec.max_steps:
            raise BudgetExceeded(f"max_steps={spec.max_steps} reached at t={t:.6g}",
                                 finish("Budget"))
        h_min = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        h = min(h, spec.max_step)
        if h >= abs(t1 - t) - h_min:
            h = abs(t1 - t)  # stretch the last step rather than leave a sliver
        if h < h_min:
            if field_error is not None:
                field_error.trajectory = finish(type(field_error).__name__)
                raise field_error
            raise StiffnessFailure(f"step size underflow at t={t:.6g}", finish("Stiffness"))
        hs = direction * h
        try:
            y_new, K = _rk_step(fun, t, y, f, hs)
        except NBodyError as exc:
            # field undefined inside the trial step: retry smaller, give up at underflow
            field_error = exc
            h *= 0.25
            continue
        scale = spec.abs_tol + spec.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(hs * (E @ K) / scale)
        if not np.isfinite(err) or err > 1.0:
            factor = MIN_FACTOR if not np.isfinite(err) else max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            h *= factor
            continue
        field_error = None
        t_new = t1 if h == abs(t1 - t) or direction * (t1 - (t + hs)) <= 0 else t + hs
        seg = DenseSegment(t, hs, y, K.T @ P)
        segments.append(seg)
        f_new = K[6]

        hit = []
        g_new_vals = []
        for ev, g_old in zip(events, g_vals):
            g_new = ev.function(t_new, y_new)
            g_new_vals.append(g_new)
            if _triggered(ev, g_old, g_new):
                te = _locate(seg, ev, t, t_new, g_new)
                hit.append((direction * te, te, ev, 1 if g_new > g_old else -1))
        hit.sort(key=lambda item: item[0])
        stop = None
        for _, te, ev, sgn in hit:
            records.append(EventRecord(te, ev.label, seg.value(te), sgn))
            if ev.terminal:
                stop = (te, ev)
                break
        if stop is not None:
            te, ev = stop
            ts.append(te)
            ys.append(seg.value(te))
            log.debug("terminal event %s at t=%.12g", ev.label, te)
            return finish(ev.label)

        if spec.renormalize_shape and projector is not None:
            y_new, mag = projector(y_new)
            renorm.append(mag)
            f_new = np.asarray(fun(t_new, y_new), dtype=float)
            g_new_vals = [ev.function(t_new, y_new) for ev in events]

        t, y, f, g_vals = t_new, y_new, f_new, g_new_vals
        ts.append(t)
        ys.append(y.copy())
        err = max(err, ERR_FLOOR)
        factor = min(MAX_FACTOR, SAFETY * err ** (ERROR_EXPONENT + 0.75 * BETA) * err_prev ** BETA)
        err_prev = err
        h = h * factor
    return finish("completed")


@dataclass
class DriftReport:
    name: str
    initial: float
    max_abs: float
    max_rel: float
    flagged: bool


def invariant_drift(trajectory, invariants, tol=None):
    """Maximum drift of each ``name -> fn(x)`` invariant over the grid states.

    A drift is flagged when it exceeds 100x the integration tolerance,
    measured relative to ``max(|initial|, 1)``.
    """
    if tol is None:
        spec = trajectory.spec or IntegrationSpec()
        tol = max(spec.rel_tol, spec.abs_tol)
    out = {}
    for name, fn in invariants.items():
        vals = np.array([fn(x) for x in trajectory.y], dtype=float)
        v0 = vals[0]
        dev = np.abs(vals - v0)
        max_abs = float(np.max(dev)) if dev.size else 0.0
        max_rel = max_abs / abs(v0) if v0 != 0 else (0.0 if max_abs == 0 else math.inf)
        out[name] = DriftReport(name, float(v0), max_abs, max_rel,
                                bool(max_abs / max(abs(v0), 1.0) > 100 * tol))
    return out
