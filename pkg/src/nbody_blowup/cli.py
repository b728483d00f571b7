"""``nbody-blowup`` command line.

Exit codes: 0 success, 1 usage, 2 numerical failure, 3 validation failure.
Set ``NBODY_BLOWUP_LOG`` (e.g. ``DEBUG``) to control log verbosity.
"""
import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .blowup import blow_up, make_state, scale_invariants, unpack_state
from .central import (enumerate_central_configurations, equilibria_from_cc, equilibrium_residual,
                      euler_configuration, lagrange_configuration)
from .checks import run_all
from .config import parse_run_config
from .errors import (ConfigError, DimensionMismatch, EmptyFamily, IntegrationError, InvalidInput,
                     NBodyError, Unsupported)
from .flows import homothetic_collapse_check, integrate_blowup, integrate_newton
from .homographic import (homographic_orbit, kepler_state_from_energy, rest_cycle_curve)
from .newton import MassSystem, energy_and_momenta, to_center_of_mass, unpack
from .ode import IntegrationSpec, invariant_drift
from .output import (blowup_columns, blowup_rows, dumps_json, metadata, newton_columns,
                     newton_rows, write_csv, write_json, write_polylines)
from .shape import connection_graph, syzygy_event, syzygy_sequence

log = logging.getLogger("nbody_blowup")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3
VALIDATION_ERRORS = (ConfigError, InvalidInput, DimensionMismatch, Unsupported, EmptyFamily)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog="nbody-blowup", description="Planar N-body dynamics in blown-up coordinates.")
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration file ([section] key = value)")
    common.add_argument("--masses", help="comma-separated masses; overrides system.masses")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("--output-dir", help="overrides run.output_dir")
    sub = parser.add_subparsers(dest="command", metavar="{ccs,integrate,homographic,syzygy,check}")

    ccs = sub.add_parser("ccs", parents=[common], help="enumerate and certify central configurations")
    ccs.add_argument("--output", type=Path, help="write the JSON summary here as well as to stdout")
    ccs.add_argument("--graph", type=Path, help="connection-graph CSV (three equal masses only)")

    sub.add_parser("integrate", parents=[common], help="integrate Newtonian or blown-up equations")
    sub.add_parser("homographic", parents=[common], help="homographic family and rest-cycle curves")
    sub.add_parser("syzygy", parents=[common], help="syzygy sequence of an integrate run")
    check = sub.add_parser("check", help="run the invariant self-check suite")
    check.add_argument("--seed", type=int, default=0)
    return parser


def _load_config(args):
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"cannot read {args.config}: {exc}"]) from None
    elif args.masses is not None:
        text = ""
    else:
        raise UsageError("either --config or --masses is required")
    overrides = {}
    if args.masses is not None:
        overrides["system.masses"] = args.masses
    if args.output_dir is not None:
        overrides["run.output_dir"] = args.output_dir
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or "." not in key:
            raise UsageError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return parse_run_config(text, overrides)


def _spec(cfg, renormalize=False):
    sec = cfg.sections["integrate"]
    return IntegrationSpec(rel_tol=sec["rel_tol"], abs_tol=sec["abs_tol"], max_step=sec["max_step"],
                           max_steps=sec["max_steps"], renormalize_shape=renormalize)


def _meta(cfg, extra=None):
    sec = cfg.sections["integrate"]
    tol = {"rel_tol": sec["rel_tol"], "abs_tol": sec["abs_tol"]}
    return metadata(tolerances=tol, seed=cfg.get("run", "seed"),
                    extra={"config": cfg.as_dict(), **(extra or {})})


def _out(cfg, suffix):
    return Path(cfg.get("run", "output_dir")) / f"{cfg.get('run', 'label')}_{suffix}"


def _emit(payload, meta):
    sys.stdout.write(dumps_json(payload, meta) + "\n")


# -- ccs -----------------------------------------------------------------------

def cmd_ccs(args):
    cfg = _load_config(args)
    system = MassSystem(cfg.masses)
    sec = cfg.sections["ccs"]
    ccs = enumerate_central_configurations(system, n_seeds=sec["n_seeds"], rng_seed=cfg.get("run", "seed"),
                                           tol=sec["tol"], dedup_tol=sec["dedup_tol"])
    equilibria = []
    for k, cc in enumerate(ccs):
        for eq in equilibria_from_cc(system, cc):
            equilibria.append({"class": k, "tag": cc.tag, "sign": eq.sign, "nu": eq.nu,
                               "field_residual": equilibrium_residual(system, eq),
                               "state": {"r": eq.state.r, "s": eq.state.s, "y": eq.state.y}})
    payload = {"masses": list(cfg.masses), "n_classes": len(ccs),
               "classes": [cc.to_dict() for cc in ccs], "equilibria": equilibria}
    meta = metadata(tolerances={"certify": sec["tol"], "dedup": sec["dedup_tol"]},
                    seed=cfg.get("run", "seed"), extra={"config": cfg.as_dict()})
    if args.graph is not None:
        graph = connection_graph(system, n_samples=sec["graph_samples"])
        edges = [{"index": k, "start": e.start, "through": e.through, "end": e.end}
                 for k, e in enumerate(graph.edges)]
        write_polylines(args.graph, [e.points for e in graph.edges],
                        {**meta, "edges": edges, "vertices": graph.vertices})
        payload["graph"] = {"path": str(args.graph), "edges": edges}
    if args.output is not None:
        write_json(args.output, payload, meta)
    _emit(payload, meta)
    return EXIT_OK


# -- integrate / syzygy ------------------------------------------------------------

def _initial(cfg, system):
    init = cfg.initial
    if init is None:
        raise ConfigError(["initial: section required for integrate"])
    center = cfg.get("integrate", "center")
    if init["kind"] == "raw":
        q, v = init["q"], init["v"]
        if center:
            q, v = to_center_of_mass(system, q, v)
        return "raw", (q, v)
    return "blowup", make_state(system, init["r"], init["s"], init["y"], normalize=center)


def _run_integration(cfg, system, with_syzygy):
    sec = cfg.sections["integrate"]
    chart = sec["chart"]
    kind, init = _initial(cfg, system)
    events = [syzygy_event(system, chart)] if with_syzygy else []
    span = (sec["start"], sec["end"])
    try:
        if chart == "newton":
            if kind == "blowup":
                if init.r <= 0:
                    raise InvalidInput("a newton run needs r > 0 initial conditions")
                init = (init.r * init.s, init.y / np.sqrt(init.r))
            traj = integrate_newton(system, init[0], init[1], span, _spec(cfg), events,
                                    collision_stop=sec["collision_stop"], eps_coll=sec["eps_coll"])
        else:
            state = blow_up(system, *init) if kind == "raw" else init
            traj = integrate_blowup(system, state, span, _spec(cfg, sec["renormalize_shape"]),
                                    events, eps_coll=sec["eps_coll"])
        failure = None
    except IntegrationError as exc:
        traj, failure = exc.trajectory, exc
    return chart, traj, failure


def _summary(system, chart, traj):
    out = {"chart": chart, "termination": traj.termination, "n_steps": traj.n_steps,
           "t_final": float(traj.t[-1]), "n_events": len(traj.events)}
    if chart == "newton":
        def inv(name):
            return lambda x: getattr(energy_and_momenta(system, *unpack(system, x)), name)
        drift = invariant_drift(traj, {"H": inv("H"), "J": inv("J")})
        out["drift"] = {k: {"initial": d.initial, "max_abs": d.max_abs, "flagged": d.flagged}
                        for k, d in drift.items()}
    else:
        inv = scale_invariants(system, unpack_state(system, traj.y[-1]))
        out["final"] = {"r": float(traj.y[-1][0]), "nu": inv.nu, "H_tilde": inv.H,
                        "J_tilde": inv.J, "K_sh": inv.K_sh}
        if traj.renorm.size:
            out["max_renormalization"] = float(np.max(traj.renorm))
    return out


def _write_trajectory(cfg, system, chart, traj, meta):
    path = _out(cfg, f"{chart}.csv")
    if chart == "newton":
        write_csv(path, newton_columns(system.n), newton_rows(system, traj), meta)
    else:
        write_csv(path, blowup_columns(system.n), blowup_rows(system, traj), meta)
    return path


def _syzygy_payload(system, chart, traj):
    seq = syzygy_sequence(system, traj, chart)
    return {"symbols": seq.symbols, "identically_collinear": seq.identically_collinear,
            "events": [{"time": e.time, "symbol": e.symbol, "sign": e.sign} for e in seq.events]}


def cmd_integrate(args):
    cfg = _load_config(args)
    system = MassSystem(cfg.masses)
    with_syzygy = cfg.get("integrate", "syzygy") and system.n == 3
    chart, traj, failure = _run_integration(cfg, system, with_syzygy)
    meta = _meta(cfg)
    path = _write_trajectory(cfg, system, chart, traj, meta)
    payload = {"summary": _summary(system, chart, traj), "trajectory": str(path)}
    if with_syzygy:
        payload["syzygy"] = _syzygy_payload(system, chart, traj)
    if failure is not None:
        payload["error"] = f"{type(failure).__name__}: {failure}"
    write_json(_out(cfg, "summary.json"), payload, meta)
    _emit(payload, meta)
    return EXIT_NUMERICAL if failure is not None else EXIT_OK


def cmd_syzygy(args):
    cfg = _load_config(args)
    system = MassSystem(cfg.masses)
    if system.n != 3:
        raise Unsupported("syzygy sequences need exactly 3 bodies")
    chart, traj, failure = _run_integration(cfg, system, True)
    meta = _meta(cfg)
    payload = {"termination": traj.termination, **_syzygy_payload(system, chart, traj)}
    if failure is not None:
        payload["error"] = f"{type(failure).__name__}: {failure}"
    write_json(_out(cfg, "syzygy.json"), payload, meta)
    _emit(payload, meta)
    return EXIT_NUMERICAL if failure is not None else EXIT_OK


# -- homographic --------------------------------------------------------------------

def _cc_by_tag(system, tag):
    if tag in ("L+", "L-"):
        return lagrange_configuration(system, 1 if tag == "L+" else -1)
    return euler_configuration(system, int(tag[1]))


def cmd_homographic(args):
    cfg = _load_config(args)
    system = MassSystem(cfg.masses)
    sec = cfg.sections["homographic"]
    cc = _cc_by_tag(system, sec["cc"])
    U, h = cc.U_value, sec["h"]
    meta = metadata(tolerances={"kepler": sec["tol"]}, seed=cfg.get("run", "seed"),
                    extra={"config": cfg.as_dict(), "cc": cc.tag, "U": U, "h": h})
    members = []
    for k, J in enumerate(sec["J"]):
        curve = rest_cycle_curve(cc, h, J, sec["n_samples"])
        curve_path = write_polylines(_out(cfg, f"restcycle_{k}.csv"), [curve.samples, curve.floor],
                                     {**meta, "J": J}, columns=("piece", "nu", "r"))
        state0 = kepler_state_from_energy(U, h, J)
        period = 2 * np.pi * U / (-2 * h) ** 1.5
        orbit = homographic_orbit(system, cc, state0, (0.0, sec["periods"] * period), sec["tol"])
        q, v = orbit.states()
        rows = np.column_stack([orbit.t, q.reshape(len(orbit.t), -1), v.reshape(len(orbit.t), -1)])
        orbit_path = write_csv(_out(cfg, f"orbit_{k}.csv"), newton_columns(system.n), rows,
                               {**meta, "J": J})
        member = {"J": J, "critical_J": curve.critical_J, "r_max": float(curve.samples[:, 1].max()),
                  "rest_cycle": str(curve_path), "orbit": str(orbit_path),
                  "collision_time": orbit.kepler.collision_time}
        if orbit.kepler.collision_time is None:
            member["newton_residual"] = orbit.newton_residual(orbit.t)
        members.append(member)
    rep = homothetic_collapse_check(system, cc, h=h, r0=sec["collapse_r0"], tau_max=sec["tau_budget"])
    collapse = {"converged": rep.converged, "distance": rep.distance, "final_nu": rep.final_nu,
                "target_nu": rep.target_nu, "nu_monotone": rep.nu_monotone,
                "tau_final": rep.tau_final, "message": rep.message}
    payload = {"cc": cc.to_dict(), "h": h, "members": members, "collapse": collapse}
    write_json(_out(cfg, "homographic.json"), payload, meta)
    _emit(payload, meta)
    return EXIT_OK if rep.converged else EXIT_NUMERICAL


# -- check ---------------------------------------------------------------------------

def cmd_check(args):
    results = run_all(args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} ({r.seconds:.2f} s)")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


COMMANDS = {"ccs": cmd_ccs, "integrate": cmd_integrate, "homographic": cmd_homographic,
            "syzygy": cmd_syzygy, "check": cmd_check}


def _configure_logging():
    level = os.environ.get("NBODY_BLOWUP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def dispatch(argv=None):
    """Run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip())
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except VALIDATION_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NBodyError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    _configure_logging()
    sys.exit(dispatch())

