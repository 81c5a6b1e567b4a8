"""Command-line interface: problem ingestion, dispatch, report emission.

Every command reads one problem file, runs one analysis, writes a JSON
run report to --out, and writes any series as CSV files next to the
report (same stem, suffixed). Exit codes: 0 success, 1 usage error,
2 input error, 3 numerical failure (domain exit, rescaling floor,
non-convergence), 4 assertion failure.

Reports are deterministic for fixed inputs and seeds: the inputs digest
is a SHA-256 over the problem file bytes and the canonicalized command
parameters; the timestamp field is informational and not part of the
digest. CSV numbers carry 17 significant digits and round-trip exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, accessibility, auxiliary, darboux, dynamics, exprlang, fieldkit, pathwork
from .errors import (
    CurlkitError,
    DimensionMismatchError,
    EvalDomainError,
    NumericalError,
    OutOfDomainError,
    ParseError,
    ProblemFileError,
)
from .problemfile import load_problem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_ASSERTION = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- serialization helpers ---------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows):
    """CSV with a header row, comma separator, '.' decimals, LF endings,
    17 significant digits; an empty series yields a header-only file."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _axis_names(dim):
    return ["x", "y", "z"][:dim]


def emit_series(series, path):
    """Write a known series type as CSV; columns are documented per type."""
    if isinstance(series, dynamics.Trajectory):
        dim = series.x.shape[1]
        header = (
            ["t"]
            + _axis_names(dim)
            + [f"v{a}" for a in _axis_names(dim)]
            + ["K", "Wcum"]
        )
        rows = (
            [t, *x, *v, k, w]
            for t, x, v, k, w in zip(
                series.t, series.x, series.v, series.kinetic, series.work
            )
        )
        write_csv(path, header, rows)
    elif isinstance(series, auxiliary.AuxiliarySeries):
        dim = series.pbar.shape[1]
        header = (
            ["t"]
            + [f"pbar_{a}" for a in _axis_names(dim)]
            + [f"xbar_{a}" for a in _axis_names(dim)]
            + ["H"]
        )
        rows = (
            [t, *p, *x, h]
            for t, p, x, h in zip(series.t, series.pbar, series.xbar, series.H)
        )
        write_csv(path, header, rows)
    elif isinstance(series, pathwork.ParamPath) and series.is_polyline:
        verts = series.vertices
        dim = verts.shape[1]
        s = np.zeros(len(verts))
        if len(verts) > 1:
            s[1:] = np.cumsum(np.linalg.norm(np.diff(verts, axis=0), axis=1))
        rows = ([si, *v] for si, v in zip(s, verts))
        write_csv(path, ["s"] + _axis_names(dim), rows)
    elif isinstance(series, np.ndarray) and series.ndim == 2:
        write_csv(path, ["i"] + _axis_names(series.shape[1]),
                  ([i, *row] for i, row in enumerate(series)))
    else:
        raise TypeError(f"no CSV emitter for {type(series).__name__}")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# --- report assembly ----------------------------------------------------------

def _digest(problem, command, parameters):
    canon = json.dumps(
        {"command": command, "parameters": _json_ready(parameters)},
        sort_keys=True,
        separators=(",", ":"),
    )
    h = hashlib.sha256()
    h.update(problem.raw)
    h.update(b"\x00")
    h.update(canon.encode("utf-8"))
    return h.hexdigest()


class Run:
    """Collects results, artifacts, and assertion outcomes for one command."""

    def __init__(self, args, problem):
        self.command = args.command
        self.problem = problem
        self.out = Path(args.out if args.out else f"{args.command}.json")
        skip = {"command", "out", "problem", "handler"}
        self.parameters = {
            k: v for k, v in sorted(vars(args).items()) if k not in skip
        }
        self.results = {}
        self.artifacts = {}
        self.assertions = []

    def artifact_path(self, kind):
        return self.out.with_name(f"{self.out.stem}_{kind}.csv")

    def emit(self, kind, series):
        path = self.artifact_path(kind)
        emit_series(series, path)
        self.artifacts[kind] = str(path)

    def check(self, name, value, threshold, kind="max"):
        """kind 'max': pass iff value <= threshold; 'abs-diff': threshold is
        (target, tol) and pass iff |value - target| <= tol."""
        if threshold is None:
            return
        if kind == "abs-diff":
            target, tol = threshold
            passed = abs(value - target) <= tol
            self.assertions.append(
                {
                    "name": name,
                    "value": value,
                    "target": target,
                    "tolerance": tol,
                    "passed": bool(passed),
                }
            )
        elif kind == "equals":
            passed = value == threshold
            self.assertions.append(
                {"name": name, "value": value, "expected": threshold, "passed": bool(passed)}
            )
        else:
            passed = value <= threshold
            self.assertions.append(
                {"name": name, "value": value, "threshold": threshold, "passed": bool(passed)}
            )

    def finish(self):
        passed = all(a["passed"] for a in self.assertions)
        report = {
            "command": self.command,
            "tool": {"name": "curlkit", "version": __version__},
            "problem": self.problem.path,
            "inputs_digest": _digest(self.problem, self.command, self.parameters),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "parameters": _json_ready(self.parameters),
            "results": _json_ready(self.results),
            "artifacts": self.artifacts,
            "assertions": _json_ready(self.assertions),
            "passed": bool(passed),
        }
        self.out.parent.mkdir(parents=True, exist_ok=True)
        with open(self.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return EXIT_OK if passed else EXIT_ASSERTION


# --- argument helpers -----------------------------------------------------------

def _vector(text, dim, what):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}")
    if len(parts) != dim:
        raise UsageError(f"{what}: expected {dim} components, got {len(parts)}")
    return np.array(parts)


def _region(args, problem):
    if getattr(args, "region", None):
        try:
            return problem.regions[args.region]
        except KeyError:
            raise ProblemFileError(
                f"region {args.region!r} not declared (have: {sorted(problem.regions)})"
            )
    return fieldkit.Region.random(problem.domain, args.samples, args.seed)


def _path(args, problem):
    try:
        return problem.paths[args.path]
    except KeyError:
        raise ProblemFileError(
            f"path {args.path!r} not declared (have: {sorted(problem.paths)})"
        )


def _scalar_field(problem, source, what):
    try:
        tree = exprlang.parse(source, problem.dimension, set(problem.constants))
    except ParseError as e:
        raise ProblemFileError(f"{what}: {e}")
    return fieldkit.ScalarFieldDef(
        problem.dimension, tree, problem.constants, problem.domain
    )


def _v_field(args, problem):
    if getattr(args, "v", None):
        return _scalar_field(problem, args.v, "--v")
    return problem.scalar_v()


def _sim_config(args, problem):
    t_end = args.t_end
    return dynamics.SimConfig(
        mass=args.mass if args.mass is not None else problem.mass,
        integrator=args.integrator,
        t_end=t_end,
        atol=args.atol,
        rtol=args.rtol,
        h_max=args.h_max,
        h=args.h,
        record_dt=args.record_dt,
    )


def _residual_results(report):
    return report.to_dict()


# --- command handlers -------------------------------------------------------------

def cmd_classify(args, problem):
    run = Run(args, problem)
    region = _region(args, problem)
    rep = darboux.classify(problem.force, region, mode=args.mode)
    run.results = {
        "class": rep.canonical_class,
        "curl_statistic": rep.curl_statistic,
        "helicity_statistic": rep.helicity_statistic,
        "sample_count": rep.sample_count,
        "thresholds": {
            "conservative": rep.thresholds.conservative,
            "chiral": rep.thresholds.chiral,
        },
    }
    run.check("class", rep.canonical_class, args.assert_class, kind="equals")
    return run.finish()


def cmd_verify(args, problem):
    run = Run(args, problem)
    region = _region(args, problem)
    rep = darboux.verify_representation(
        problem.force, problem.potential_set(), region, mode=args.mode
    )
    run.results = _residual_results(rep)
    run.check("max_residual", rep.max, args.assert_residual)
    return run.finish()


def cmd_vpde(args, problem):
    run = Run(args, problem)
    region = _region(args, problem)
    rep = darboux.vpde_residual(problem.force, _v_field(args, problem), region, mode=args.mode)
    run.results = _residual_results(rep)
    run.check("max_residual", rep.max, args.assert_residual)
    return run.finish()


def cmd_gauge(args, problem):
    run = Run(args, problem)
    region = _region(args, problem)
    try:
        f_tree = exprlang.parse_in_variables(args.f, ("u",))
    except ParseError as e:
        raise ProblemFileError(f"--f: {e}")
    pots = problem.potential_set()
    before = darboux.verify_representation(problem.force, pots, region)
    transformed = darboux.gauge_transform(pots, f_tree, region=region)
    after = darboux.verify_representation(problem.force, transformed, region)
    run.results = {
        "gauge": args.f,
        "u_prime": exprlang.to_source(transformed.U.tree),
        "v_prime": exprlang.to_source(transformed.V.tree),
        "residual_before": _residual_results(before),
        "residual_after": _residual_results(after),
    }
    run.check("max_residual_after", after.max, args.assert_residual)
    return run.finish()


def cmd_decompose3d(args, problem):
    if problem.dimension != 3:
        raise ProblemFileError("decompose3d needs a 3D problem")
    run = Run(args, problem)
    region = _region(args, problem)
    V = _v_field(args, problem)
    dec = darboux.decompose3d(problem.force, V, region)
    run.results = {
        name: _residual_results(rep) for name, rep in dec.diagnostics.items()
    }
    pts = region.samples()
    header = (
        ["x", "y", "z"]
        + [f"gradU_{a}" for a in "xyz"]
        + [f"Fc_{a}" for a in "xyz"]
        + [f"Fnc_{a}" for a in "xyz"]
    )
    rows = ([*p, *dec.grad_u(p), *dec.f_c(p), *dec.f_nc(p)] for p in pts)
    path = run.artifact_path("samples")
    write_csv(path, header, rows)
    run.artifacts["samples"] = str(path)
    run.check("curl_f_c", dec.diagnostics["curl_f_c"].max, args.assert_curl_fc)
    return run.finish()


def cmd_characteristics(args, problem):
    if problem.dimension != 3:
        raise ProblemFileError("characteristics are traced for 3D problems")
    run = Run(args, problem)
    x0 = _vector(args.x0, 3, "--x0")
    V = _v_field(args, problem)
    dev = darboux.characteristic_deviation(
        problem.force, V, x0, args.s_max, steps=args.steps
    )
    run.results = {"deviation": dev, "s_max": args.s_max, "x0": list(x0)}
    run.check("deviation", dev, args.assert_deviation)
    if args.assert_deviation_min is not None:
        run.check("deviation_at_least", -dev, -args.assert_deviation_min)
    return run.finish()


def cmd_simulate(args, problem):
    run = Run(args, problem)
    dim = problem.dimension
    x0 = _vector(args.x0, dim, "--x0")
    v0 = _vector(args.v0, dim, "--v0")
    traj = dynamics.integrate(problem.force, x0, v0, _sim_config(args, problem))
    resid = dynamics.work_energy_residual(traj)
    run.results = {
        "t_final": traj.t[-1],
        "samples": len(traj),
        "exited": traj.exited,
        "exit_state": None
        if traj.exit_state is None
        else {"t": traj.exit_state[0], "x": list(traj.exit_state[1])},
        "work_energy_residual": resid,
        "stats": {
            "steps": traj.stats.n_steps,
            "rejected": traj.stats.n_rejected,
            "field_evaluations": traj.stats.n_fev,
        },
    }
    run.emit("trajectory", traj)
    run.check("work_energy_residual", resid, args.assert_energy_residual)
    return run.finish()


def cmd_work(args, problem):
    run = Run(args, problem)
    res = pathwork.line_work(problem.force, _path(args, problem))
    run.results = {
        "value": res.value,
        "error_estimate": res.error_estimate,
        "segments": res.segments,
    }
    if args.assert_value is not None:
        run.check("value", res.value, (args.assert_value, args.tol), kind="abs-diff")
    return run.finish()


def cmd_stokes(args, problem):
    run = Run(args, problem)
    res = pathwork.stokes_work(problem.force, _path(args, problem))
    run.results = {
        "value": res.value,
        "error_estimate": res.error_estimate,
        "triangles": res.segments,
    }
    if args.assert_value is not None:
        run.check("value", res.value, (args.assert_value, args.tol), kind="abs-diff")
    return run.finish()


def _auxiliary_problem(args, problem):
    if not getattr(args, "region", None):
        raise ProblemFileError(
            "auxiliary commands need --region (the working region that "
            "validates the potentials and calibrates the V floor)"
        )
    return auxiliary.AuxiliaryProblem(
        F=problem.force,
        potentials=problem.potential_set(),
        mass=args.mass if args.mass is not None else problem.mass,
        region=_region(args, problem),
        rep_tol=args.rep_tol,
    )


def cmd_auxiliary(args, problem):
    run = Run(args, problem)
    prob = _auxiliary_problem(args, problem)
    dim = problem.dimension
    x0 = _vector(args.x0, dim, "--x0")
    v0 = _vector(args.v0, dim, "--v0")
    traj, drift = auxiliary.auxiliary_trajectory(prob, x0, v0, _sim_config(args, problem))
    h0 = auxiliary.auxiliary_hamiltonian(x0, prob.mass * v0, prob.potentials.U, prob.mass)
    run.results = {"H0": h0, "drift": drift, "exited": traj.exited, "samples": len(traj)}
    run.emit("trajectory", traj)
    run.check("drift", drift, args.assert_drift)
    return run.finish()


def cmd_nonlocal_h(args, problem):
    run = Run(args, problem)
    prob = _auxiliary_problem(args, problem)
    dim = problem.dimension
    x0 = _vector(args.x0, dim, "--x0")
    v0 = _vector(args.v0, dim, "--v0")
    traj = dynamics.integrate(problem.force, x0, v0, _sim_config(args, problem))
    series = auxiliary.nonlocal_hamiltonian_series(traj, prob, refine=args.refine)
    run.results = {
        "H0": series.H[0],
        "drift": series.drift,  # measured diagnostic; no constancy claim
        "truncated": series.truncated,
        "samples": len(series.t),
        "trajectory_exited": traj.exited,
    }
    run.emit("series", series)
    run.check("drift", series.drift, args.assert_drift)
    return run.finish()


def cmd_trace2d(args, problem):
    if problem.dimension != 2:
        raise ProblemFileError("trace2d needs a 2D problem")
    run = Run(args, problem)
    x0 = _vector(args.x0, 2, "--x0")
    trace = accessibility.zero_work_trace_2d(
        problem.force, x0, args.arclength, steps=args.steps
    )
    work = pathwork.line_work(problem.force, trace)
    run.results = {
        "points": len(trace.vertices),
        "work": work.value,
        "work_error_estimate": work.error_estimate,
    }
    if "U" in problem.potentials:
        U = problem.potentials["U"]
        u0 = U.value(x0)
        run.results["u_deviation"] = max(
            abs(U.value(p) - u0) for p in trace.vertices
        )
    run.emit("trace", trace)
    run.check("work", abs(work.value), args.assert_work)
    return run.finish()


def cmd_reach2d(args, problem):
    if problem.dimension != 2:
        raise ProblemFileError("reach2d needs a 2D problem")
    run = Run(args, problem)
    x0 = _vector(args.x0, 2, "--x0")
    targets = [
        _vector(part, 2, "--targets") for part in args.targets.split(";") if part
    ]
    verdicts = accessibility.reachability_report_2d(
        problem.force,
        x0,
        targets,
        delta=args.delta,
        arclength=args.arclength,
        steps=args.steps,
    )
    run.results = {
        "delta": args.delta
        if args.delta is not None
        else 1e-4 * problem.domain.diameter(),
        "verdicts": [
            {
                "target": list(v.target),
                "distance": v.distance,
                "reachable": v.reachable,
            }
            for v in verdicts
        ],
    }
    return run.finish()


def cmd_maneuver3d(args, problem):
    if problem.dimension != 3:
        raise ProblemFileError("maneuver3d needs a 3D problem")
    run = Run(args, problem)
    x0 = _vector(args.x0, 3, "--x0")
    res = accessibility.bracket_maneuver_3d(problem.force, x0, args.eps)
    run.results = {
        "endpoint": list(res.endpoint),
        "net_displacement": list(res.net_displacement),
        "transverse": res.transverse,
        "work": res.work,
        "eps": res.eps,
    }
    run.emit("path", res.path)
    run.check("work", abs(res.work), args.assert_work)
    return run.finish()


# --- parser ------------------------------------------------------------------------

def build_parser():
    parser = _Parser(
        prog="curlkit",
        description="Force-field classification, dynamics, and work analysis.",
    )
    parser.add_argument("--version", action="version", version=f"curlkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("problem", help="problem file (JSON)")
    common.add_argument("--out", help="report path (default <command>.json)")
    common.add_argument("--seed", type=int, default=0, help="seed for default sampling")
    common.add_argument("--samples", type=int, default=200, help="default sample count")
    common.add_argument("--mode", choices=("analytic", "fd"), default="analytic",
                        help="derivative mode for field operators")

    region_opt = _Parser(add_help=False)
    region_opt.add_argument("--region", help="named region from the problem file")

    sim = _Parser(add_help=False)
    sim.add_argument("--x0", required=True, help="initial position, comma-separated")
    sim.add_argument("--v0", required=True, help="initial velocity, comma-separated")
    sim.add_argument("--t-end", type=float, required=True, dest="t_end")
    sim.add_argument("--mass", type=float, default=None, help="override problem mass")
    sim.add_argument("--integrator", choices=("dopri45", "rk4"), default="dopri45")
    sim.add_argument("--h", type=float, default=1e-3, help="rk4 step")
    sim.add_argument("--atol", type=float, default=1e-9)
    sim.add_argument("--rtol", type=float, default=1e-9)
    sim.add_argument("--h-max", type=float, default=None, dest="h_max")
    sim.add_argument("--record-dt", type=float, default=None, dest="record_dt",
                     help="subdivide steps to at most this output spacing")

    p = sub.add_parser("classify", parents=[common, region_opt],
                       help="canonical class of the force field")
    p.add_argument("--assert-class", dest="assert_class",
                   choices=("conservative", "two-potential", "chiral three-potential"))
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("verify", parents=[common, region_opt],
                       help="residual of F + V grad U (+ grad W)")
    p.add_argument("--assert-residual", type=float, dest="assert_residual")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("vpde", parents=[common, region_opt],
                       help="residual of grad(V) x F - V curl F")
    p.add_argument("--v", help="candidate V expression (default: problem potential V)")
    p.add_argument("--assert-residual", type=float, dest="assert_residual")
    p.set_defaults(handler=cmd_vpde)

    p = sub.add_parser("gauge", parents=[common, region_opt],
                       help="apply (U,V) -> (f(U), V/f'(U)) and re-verify")
    p.add_argument("--f", required=True, help="gauge function, expression in u")
    p.add_argument("--assert-residual", type=float, dest="assert_residual")
    p.set_defaults(handler=cmd_gauge)

    p = sub.add_parser("decompose3d", parents=[common, region_opt],
                       help="conservative/non-conservative split (3D)")
    p.add_argument("--v", help="characteristic invariant V (default: problem V)")
    p.add_argument("--assert-curl-fc", type=float, dest="assert_curl_fc")
    p.set_defaults(handler=cmd_decompose3d)

    p = sub.add_parser("characteristics", parents=[common],
                       help="deviation of V along curl characteristics (3D)")
    p.add_argument("--v", help="candidate V expression (default: problem V)")
    p.add_argument("--x0", required=True)
    p.add_argument("--s-max", type=float, required=True, dest="s_max")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--assert-deviation", type=float, dest="assert_deviation")
    p.add_argument("--assert-deviation-min", type=float, dest="assert_deviation_min")
    p.set_defaults(handler=cmd_characteristics)

    p = sub.add_parser("simulate", parents=[common, sim],
                       help="integrate m x'' = F(x) and emit the trajectory")
    p.add_argument("--assert-energy-residual", type=float, dest="assert_energy_residual")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("work", parents=[common], help="line work along a declared path")
    p.add_argument("--path", required=True)
    p.add_argument("--assert-value", type=float, dest="assert_value")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(handler=cmd_work)

    p = sub.add_parser("stokes", parents=[common],
                       help="surface-form work for a closed planar polygon")
    p.add_argument("--path", required=True)
    p.add_argument("--assert-value", type=float, dest="assert_value")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(handler=cmd_stokes)

    p = sub.add_parser("auxiliary", parents=[common, region_opt, sim],
                       help="integrate the rescaled conservative system")
    p.add_argument("--rep-tol", type=float, default=1e-8, dest="rep_tol")
    p.add_argument("--assert-drift", type=float, dest="assert_drift")
    p.set_defaults(handler=cmd_auxiliary)

    p = sub.add_parser("nonlocal-h", parents=[common, region_opt, sim],
                       help="accumulate the auxiliary Hamiltonian along the "
                            "curl-force trajectory (drift is diagnostic)")
    p.add_argument("--rep-tol", type=float, default=1e-8, dest="rep_tol")
    p.add_argument("--refine", type=int, default=1)
    p.add_argument("--assert-drift", type=float, dest="assert_drift")
    p.set_defaults(handler=cmd_nonlocal_h)

    p = sub.add_parser("trace2d", parents=[common],
                       help="trace the zero-work curve through a point (2D)")
    p.add_argument("--x0", required=True)
    p.add_argument("--arclength", type=float, required=True)
    p.add_argument("--steps", type=int, default=4096)
    p.add_argument("--assert-work", type=float, dest="assert_work")
    p.set_defaults(handler=cmd_trace2d)

    p = sub.add_parser("reach2d", parents=[common],
                       help="zero-work reachability verdicts (2D)")
    p.add_argument("--x0", required=True)
    p.add_argument("--targets", required=True,
                   help="semicolon-separated points, e.g. '1.2,0.857;1.1,1.1'")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--arclength", type=float, default=None)
    p.add_argument("--steps", type=int, default=4096)
    p.set_defaults(handler=cmd_reach2d)

    p = sub.add_parser("maneuver3d", parents=[common],
                       help="zero-work bracket maneuver (3D)")
    p.add_argument("--x0", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--assert-work", type=float, dest="assert_work")
    p.set_defaults(handler=cmd_maneuver3d)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        problem = load_problem(args.problem)
        return args.handler(args, problem)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ProblemFileError, ParseError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, OutOfDomainError, EvalDomainError, DimensionMismatchError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"i/o failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
