"""Command-line front end: validate, run, bound, and batch scenarios.

Exit codes are stable: 0 for a clean outcome, 1 for configuration or model
errors (diagnostics on stderr name the failing scenario key or invariant),
2 when ``--strict`` is set and the run violated a funnel or torque budget.
Set ``COOPMAN_LOG=info`` (or ``debug``) for progress logging.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import spatial
from .bounds import (certify_wrench_budget, funnel_bound_chain,
                     sample_model_envelope, torque_wrench_limits)
from .errors import CoopmanError, ScenarioError
from .sim.runner import simulate
from .sim.scenario import (build_controller, build_plant, build_reference,
                           build_run, bundled_scenarios, load_scenario)
from .sim.telemetry import write_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2

log = logging.getLogger("coopman")


def _atomic_text(path, text):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _atomic_csv(path, time, columns):
    tmp = path.with_name(path.name + ".tmp")
    write_csv(tmp, time, columns)
    os.replace(tmp, path)


def _write_outputs(out_dir, res):
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_csv(out_dir / "telemetry.csv", res.time, res.columns)
    _atomic_text(out_dir / "report.json",
                 json.dumps(asdict(res.report), indent=2, default=float)
                 + "\n")
    return out_dir


def _violated(report):
    return report.failure is not None or report.torque_violations > 0


def _summary(report):
    if report.failure is not None:
        return "aborted at t=%.4g: %s" % (report.failure.get("t", 0.0),
                                          report.failure["message"])
    parts = ["%d periods" % report.periods,
             "max torque %.4g" % max(report.max_torque),
             "wall %.1fs" % report.wall_time]
    if report.torque_violations:
        parts.append("%d torque violations" % report.torque_violations)
    if report.max_pose_margin is not None:
        parts.append("funnel margins %.3f/%.3f" % (report.max_pose_margin,
                                                   report.max_velocity_margin))
    if report.final_position_error is not None:
        parts.append("final errors %.3g m / %.3g" %
                     (report.final_position_error,
                      report.final_attitude_error))
    return ", ".join(parts)


def cmd_run(args):
    cfg = load_scenario(args.scenario)
    run = build_run(cfg, controller=args.controller, dt=args.dt,
                    duration=args.duration, seed=args.seed)
    log.info("running %s (%d agents, %s)", run.name, run.plant.n_agents,
             type(run.controller).__name__)
    res = simulate(run.plant, run.controller, **run.kwargs)
    out = _write_outputs(Path(args.out) if args.out
                         else Path("runs") / run.name, res)
    print("%s: %s" % (run.name, _summary(res.report)))
    print("wrote %s and %s" % (out / "telemetry.csv", out / "report.json"))
    if args.strict and _violated(res.report):
        print("strict mode: violation detected", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_validate(args):
    cfg = load_scenario(args.scenario)
    run = build_run(cfg, controller=args.controller, dt=args.dt,
                    duration=args.duration, seed=args.seed)
    print("ok: %s (%d agents, %s, %.4g s)"
          % (run.name, run.plant.n_agents, type(run.controller).__name__,
             run.duration))
    return EXIT_OK


def cmd_bounds(args):
    cfg = load_scenario(args.scenario)
    plant = build_plant(cfg, seed=args.seed)
    reference = build_reference(cfg)
    ctrl, _ = build_controller(cfg, plant, reference, kind=args.controller)
    if not hasattr(ctrl, "pose_funnel"):
        raise ScenarioError(
            "bound reports need the funnel controller; pass "
            "--controller funnel or set controller.type = \"funnel\"")
    sim_cfg = cfg.get("simulation", {})
    duration = args.duration if args.duration is not None \
        else sim_cfg.get("duration")
    if duration is None:
        raise ScenarioError("scenario is missing 'simulation.duration'")
    pose0 = np.asarray(cfg["initial"]["pose"], dtype=float)
    v0 = np.asarray(cfg["initial"].get("velocity", np.zeros(6)), float)
    quat0 = spatial.quat_from_euler(pose0[3:], canonical=False)
    q_state0 = plant.initial_joint_state(pose0[:3], quat0,
                                         cfg["initial"].get("joints"))
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    log.info("sampling model envelope for %s", cfg["name"])
    envelope = sample_model_envelope(
        plant, reference, ctrl.pose_funnel, float(duration), seed=seed,
        q0=q_state0 if q_state0.size else None)
    report = funnel_bound_chain(plant, ctrl, envelope, float(duration),
                                pose0, v0)
    text = report.as_text()
    sys.stdout.write(text)
    limit = sim_cfg.get("torque_limit")
    if limit is not None:
        budget = torque_wrench_limits(envelope, limit)
        cert = certify_wrench_budget(report, budget)
        verdict = ("certified" if cert.feasible
                   else "NOT certified (agent %d over by 10^%.3g)"
                   % (cert.binding_agent, cert.worst_log10))
        print("torque budget %s: %s" % (np.asarray(limit).tolist(), verdict))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_text(out / "bounds.txt", text)
        print("wrote %s" % (out / "bounds.txt"))
    return EXIT_OK


def _suite_case(source, out_dir, seed):
    """One suite entry; returns a picklable verdict row."""
    try:
        cfg = load_scenario(source)
        run = build_run(cfg, seed=seed)
        res = simulate(run.plant, run.controller, **run.kwargs)
        if out_dir:
            _write_outputs(Path(out_dir) / run.name, res)
        violated = _violated(res.report)
        if cfg.get("expect_violation", False):
            ok = violated
            detail = ("expected violation observed: " + _summary(res.report)
                      if ok else "expected a violation, saw a clean run")
        else:
            ok = res.report.completed and not violated
            detail = _summary(res.report)
        return {"name": run.name, "ok": ok, "detail": detail}
    except CoopmanError as exc:
        return {"name": str(source), "ok": False, "detail": str(exc)}


def cmd_suite(args):
    if args.scenario:
        root = Path(args.scenario)
        if not root.is_dir():
            raise ScenarioError("suite needs a directory of scenario files, "
                                "got %r" % str(root))
        sources = sorted(str(f) for f in root.glob("*.toml"))
        if not sources:
            print("no scenarios in %s" % root, file=sys.stderr)
            return EXIT_ERROR
    else:
        sources = bundled_scenarios()
    jobs = max(1, min(4, os.cpu_count() or 1, len(sources)))
    log.info("running %d scenarios with %d workers", len(sources), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_suite_case, sources,
                                 [args.out] * len(sources),
                                 [args.seed] * len(sources)))
    else:
        rows = [_suite_case(s, args.out, args.seed) for s in sources]
    failed = 0
    for row in rows:
        print("%s %s: %s" % ("PASS" if row["ok"] else "FAIL",
                             row["name"], row["detail"]))
        failed += not row["ok"]
    if failed:
        print("%d of %d scenarios failed" % (failed, len(rows)),
              file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _parser():
    parser = argparse.ArgumentParser(
        prog="coopman",
        description="Cooperative-manipulation scenario runner and "
                    "bound calculator.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def scenario_flags(p, required=True, overrides=True):
        p.add_argument("--scenario", required=required,
                       help="bundled scenario name or path to a TOML file"
                            + ("" if required else
                               " (suite: directory of TOML files; default: "
                               "the bundled set)"))
        if overrides:
            p.add_argument("--controller", choices=("adaptive", "funnel"),
                           help="override the scenario's controller type")
            p.add_argument("--dt", type=float,
                           help="override the continuous-mode step size")
            p.add_argument("--duration", type=float,
                           help="override the run duration in seconds")
        p.add_argument("--seed", type=int,
                       help="override the disturbance seed")

    p_run = sub.add_parser("run", help="simulate one scenario and write "
                                       "telemetry.csv + report.json")
    scenario_flags(p_run)
    p_run.add_argument("--out", help="output directory (default runs/<name>)")
    p_run.add_argument("--strict", action="store_true",
                       help="exit 2 when the run violates a funnel or "
                            "torque budget")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate",
                           help="check a scenario file without running it")
    scenario_flags(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_bounds = sub.add_parser("bounds",
                              help="closed-form speed/wrench bounds for a "
                                   "funnel scenario")
    scenario_flags(p_bounds)
    p_bounds.add_argument("--out",
                          help="directory to write bounds.txt into")
    p_bounds.set_defaults(func=cmd_bounds)

    p_suite = sub.add_parser("suite",
                             help="run every scenario in a directory and "
                                  "print one verdict per line")
    scenario_flags(p_suite, required=False, overrides=False)
    p_suite.add_argument("--out",
                         help="directory for per-scenario outputs")
    p_suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None):
    level = os.environ.get("COOPMAN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except CoopmanError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
