"""CSV / JSON writers with a metadata header on every file."""
import csv
import datetime
import json
from pathlib import Path

import numpy as np

from . import __version__
from .blowup import physical_time, scale_invariants, unpack_state
from .errors import NBodyError
from .shape import HOPF_CONVENTION, JACOBI_CONVENTION

FLOAT_FORMAT = ".17g"


class OutputError(NBodyError, OSError):
    pass


def conventions():
    return {
        "G": 1.0,
        "gradient": "mass metric: (grad f)_a = (1/m_a) df/dq_a",
        "blowup": "q = r s, v = r^(-1/2) y, dt = r^(3/2) dtau",
        "jacobi": JACOBI_CONVENTION,
        "hopf": HOPF_CONVENTION,
    }


def metadata(tolerances=None, seed=None, extra=None):
    meta = {
        "code_version": __version__,
        "conventions": conventions(),
        "tolerances": tolerances or {},
        "rng_seed": seed,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        meta.update(extra)
    return meta


def _fmt(x):
    return format(float(x), FLOAT_FORMAT)


def newton_columns(n):
    cols = ["t"]
    cols += [f"q{a + 1}{c}" for a in range(n) for c in "xy"]
    cols += [f"v{a + 1}{c}" for a in range(n) for c in "xy"]
    return cols


def blowup_columns(n):
    cols = ["tau", "r"]
    cols += [f"s{a + 1}{c}" for a in range(n) for c in "xy"]
    cols += [f"y{a + 1}{c}" for a in range(n) for c in "xy"]
    return cols + ["nu", "H_tilde", "J_tilde", "K_sh", "t"]


def newton_rows(system, trajectory):
    if trajectory.t is None or len(trajectory.t) == 0:
        return np.zeros((0, len(newton_columns(system.n))))
    return np.column_stack([trajectory.t, trajectory.y])


def blowup_rows(system, trajectory):
    rows = []
    for tau, x in zip(trajectory.t, trajectory.y):
        st = unpack_state(system, x)
        inv = scale_invariants(system, st)
        rows.append([tau, *x, inv.nu, inv.H, inv.J, inv.K_sh])
    if not rows:
        return np.zeros((0, len(blowup_columns(system.n))))
    rows = np.array(rows)
    t_phys = physical_time(rows[:, 0], np.maximum(rows[:, 1], 0.0))
    return np.column_stack([rows, t_phys])


def write_csv(path, columns, rows, meta):
    """Write ``rows`` under a ``# {json}`` metadata line and a header row."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write("# " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in np.asarray(rows).reshape(-1, len(columns)):
                writer.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """Return ``(metadata, columns, rows)`` from a file written by ``write_csv``."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
        meta = json.loads(first[2:]) if first.startswith("# ") else {}
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    return meta, columns, np.array(rows, dtype=float).reshape(-1, len(columns))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload, meta):
    path = Path(path)
    doc = {"metadata": meta, **_jsonable(payload)}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def dumps_json(payload, meta):
    return json.dumps({"metadata": meta, **_jsonable(payload)}, indent=2, sort_keys=True)


def write_polylines(path, polylines, meta, columns=("edge", "w1", "w2", "w3")):
    """Rows of ``(index, *point)`` for each polyline in ``polylines``."""
    rows = [[k, *p] for k, pts in enumerate(polylines) for p in pts]
    return write_csv(path, list(columns), np.array(rows).reshape(-1, len(columns)), meta)
