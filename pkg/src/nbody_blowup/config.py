"""Run configuration: an INI-style ``[section]`` / ``key = value`` text format.

Every default the CLI uses lives in ``DEFAULTS`` so it can also be written
in a config file.  Parsing collects all semantic errors before raising.
"""
import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

DEFAULTS = {
    "run": {
        "seed": (int, 0),
        "output_dir": (str, "nbody_out"),
        "label": (str, "run"),
    },
    "integrate": {
        "chart": (str, "newton"),
        "start": (float, 0.0),
        "end": (float, 10.0),
        "rel_tol": (float, 1e-10),
        "abs_tol": (float, 1e-12),
        "max_step": (float, math.inf),
        "max_steps": (int, 200_000),
        "collision_stop": (float, 1e-6),
        "eps_coll": (float, 1e-8),
        "renormalize_shape": (bool, True),
        "syzygy": (bool, False),
        "center": (bool, True),
    },
    "ccs": {
        "n_seeds": (int, 200),
        "tol": (float, 1e-11),
        "dedup_tol": (float, 1e-6),
        "graph_samples": (int, 401),
    },
    "homographic": {
        "cc": (str, "L+"),
        "h": (float, -1.0),
        "J": (list, [0.0]),
        "n_samples": (int, 201),
        "periods": (float, 1.0),
        "tol": (float, 1e-11),
        "collapse_r0": (float, 0.05),
        "tau_budget": (float, 1e3),
    },
}
INITIAL_KEYS = {"raw": ("q", "v"), "blowup": ("r", "s", "y")}


@dataclass
class RunConfig:
    masses: tuple
    sections: dict = field(default_factory=dict)
    initial: dict | None = None

    def get(self, section, key):
        return self.sections[section][key]

    def as_dict(self):
        out = {"masses": list(self.masses)}
        for name, sec in self.sections.items():
            out[name] = {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
                         for k, v in sec.items()}
        if self.initial:
            out["initial"] = {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                              for k, v in self.initial.items()}
        return out


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def parse_points(text):
    """``"x1 y1; x2 y2; ..."`` -> ``(n, 2)`` array."""
    rows = [r for r in text.split(";") if r.strip()]
    pts = [_parse_floats(r) for r in rows]
    if any(len(p) != 2 for p in pts):
        raise ValueError("each point needs exactly two coordinates")
    return np.array(pts, dtype=float)


def _convert(kind, text):
    if kind is bool:
        return _parse_bool(text)
    if kind is list:
        return _parse_floats(text)
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text.strip()


def _syntax_errors(exc):
    if isinstance(exc, configparser.ParsingError):
        return [f"line {lineno}: cannot parse {line!r}" for lineno, line in exc.errors]
    lineno = getattr(exc, "lineno", None)
    where = f"line {lineno}: " if lineno else ""
    return [f"{where}{exc.message if hasattr(exc, 'message') else exc}"]


def parse_run_config(text, overrides=None):
    """Parse and validate config text; ``overrides`` maps ``"section.key"`` to raw strings."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(_syntax_errors(exc)) from None
    for dotted, value in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if not parser.has_section(sec):
            parser.add_section(sec)
        parser.set(sec, key, str(value))

    errors = []
    masses = ()
    if not parser.has_option("system", "masses"):
        errors.append("system.masses: required")
    else:
        try:
            masses = tuple(_parse_floats(parser.get("system", "masses")))
            if len(masses) < 2:
                errors.append("system.masses: need at least two bodies")
            for k, m in enumerate(masses):
                if not (math.isfinite(m) and m > 0):
                    errors.append(f"system.masses: mass {k + 1} = {m} must be positive")
        except ValueError as exc:
            errors.append(f"system.masses: {exc}")

    known = set(DEFAULTS) | {"system", "initial"}
    for sec in parser.sections():
        if sec not in known:
            errors.append(f"[{sec}]: unknown section")

    sections = {}
    for name, table in DEFAULTS.items():
        values = {key: default for key, (_, default) in table.items()}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                if key not in table:
                    errors.append(f"{name}.{key}: unknown key")
                    continue
                try:
                    values[key] = _convert(table[key][0], raw)
                except ValueError as exc:
                    errors.append(f"{name}.{key}: {exc}")
        sections[name] = values

    integ = sections["integrate"]
    if integ["chart"] not in ("newton", "blowup"):
        errors.append("integrate.chart: must be 'newton' or 'blowup'")
    if not (math.isfinite(integ["start"]) and math.isfinite(integ["end"])) or integ["start"] == integ["end"]:
        errors.append("integrate.start/end: span must be finite and non-degenerate")
    for key in ("rel_tol", "abs_tol", "collision_stop", "eps_coll", "max_step"):
        if not integ[key] > 0:
            errors.append(f"integrate.{key}: must be positive")
    if integ["max_steps"] <= 0:
        errors.append("integrate.max_steps: must be positive")
    ccs = sections["ccs"]
    if ccs["n_seeds"] <= 0:
        errors.append("ccs.n_seeds: must be positive")
    hom = sections["homographic"]
    if not hom["h"] < 0:
        errors.append("homographic.h: must be negative")
    if hom["n_samples"] < 2:
        errors.append("homographic.n_samples: must be >= 2")
    if hom["cc"] not in ("L+", "L-", "E1", "E2", "E3"):
        errors.append("homographic.cc: one of L+, L-, E1, E2, E3")
    if not hom["periods"] > 0:
        errors.append("homographic.periods: must be positive")

    initial = None
    if parser.has_section("initial"):
        present = {k for k in parser.options("initial")}
        unknown = present - set(INITIAL_KEYS["raw"]) - set(INITIAL_KEYS["blowup"])
        for key in sorted(unknown):
            errors.append(f"initial.{key}: unknown key")
        raw = present & set(INITIAL_KEYS["raw"])
        blown = present & set(INITIAL_KEYS["blowup"])
        if raw and blown:
            errors.append("initial: give either raw (q, v) or blown-up (r, s, y) conditions, not both")
        elif raw or blown:
            kind = "raw" if raw else "blowup"
            need = set(INITIAL_KEYS[kind])
            for key in sorted(need - present):
                errors.append(f"initial.{key}: required for {kind} initial conditions")
            initial = {"kind": kind}
            for key in sorted(need & present):
                try:
                    if key == "r":
                        initial[key] = float(parser.get("initial", key))
                        if not initial[key] >= 0:
                            errors.append("initial.r: must be >= 0")
                    else:
                        pts = parse_points(parser.get("initial", key))
                        if masses and len(pts) != len(masses):
                            errors.append(f"initial.{key}: {len(pts)} points for {len(masses)} masses")
                        initial[key] = pts
                except ValueError as exc:
                    errors.append(f"initial.{key}: {exc}")
        else:
            errors.append("initial: section is empty")

    if errors:
        raise ConfigError(errors)
    return RunConfig(masses=masses, sections=sections, initial=initial)
