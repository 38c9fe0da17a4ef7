"""Command-line front door: offline, online, sweep, verify, fom, report."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import _kernels
from .artifacts import load_artifacts, save_artifacts
from .assembly import assemble_system
from .config import Config, load_config
from .fom import solve_fom
from .geometry import ParameterPoint, build_background_mesh, build_cut_geometry
from .pipeline import (
    emit_report,
    load_report,
    physics_from_config,
    run_offline,
    run_online_sweep,
    run_sweep,
    verify_invariants,
)

log = logging.getLogger("cutrom")


def _load(args) -> Config:
    config = load_config(args.config) if args.config else Config().validate()
    if getattr(args, "seed", None) is not None:
        config = config.with_seed(args.seed)
    return config


def _cmd_offline(args) -> int:
    config = _load(args)
    art = run_offline(config)
    out = args.out or config.artifact_dir
    save_artifacts(out, art)
    log.info("artifacts written to %s", out)
    return 0


def _cmd_online(args) -> int:
    config = _load(args)
    art = load_artifacts(args.artifacts, config)
    report = run_online_sweep(art, config)
    out = args.report or config.report_dir
    emit_report(report, out)
    log.info("report written to %s", out)
    return 0


def _cmd_sweep(args) -> int:
    config = _load(args)
    art_dir = args.out or config.artifact_dir
    rep_dir = args.report or config.report_dir
    run_sweep(config, artifact_dir=art_dir, report_dir=rep_dir)
    log.info("artifacts in %s, report in %s", art_dir, rep_dir)
    return 0


def _cmd_verify(args) -> int:
    config = _load(args)
    geom_csv = os.path.join(config.report_dir, "geometry_summary.csv")
    checks = verify_invariants(config, geometry_csv=geom_csv)
    print(f"geometry summary written to {geom_csv}")
    failed = 0
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        print(f"[{status}] {c.name}: {c.detail}")
        failed += 0 if c.ok else 1
    print(f"{len(checks) - failed}/{len(checks)} invariant checks passed")
    return 0 if failed == 0 else 1


def _cmd_fom(args) -> int:
    config = _load(args)
    mesh = build_background_mesh(config.box, config.h_target)
    phys = physics_from_config(config)
    mu = ParameterPoint(args.r, args.theta)
    t0 = time.perf_counter()
    geom = build_cut_geometry(mesh, mu)
    t_geom = time.perf_counter() - t0
    t0 = time.perf_counter()
    system = assemble_system(geom, phys)
    t_asm = time.perf_counter() - t0
    sol = solve_fom(system)
    res = system.f - system.A @ sol.u
    print(f"backend            : {_kernels.BACKEND}")
    print(f"dofs               : {mesh.n_vertices} total, {system.active_dofs.size} active")
    print(f"geometry / assembly: {1e3 * t_geom:.2f} ms / {1e3 * t_asm:.2f} ms")
    print(f"solve              : {1e3 * sol.solve_time:.2f} ms")
    print(f"residual norm      : {np.linalg.norm(res[system.active_dofs]):.3e}")
    if config.f_const == 0.0 and config.gxy == 0.0:
        exact = config.g0 + config.gx * mesh.vertices[:, 0] + config.gy * mesh.vertices[:, 1]
        err = np.max(np.abs(sol.u[system.active_dofs] - exact[system.active_dofs]))
        print(f"error vs interpolated boundary datum: {err:.3e} (max norm)")
    else:
        print("error vs interpolated boundary datum: n/a (needs f = 0 and affine datum)")
    return 0


def _cmd_report(args) -> int:
    report = load_report(args.src)
    out = args.out or args.src
    emit_report(report, out)
    log.info("report re-emitted to %s", out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cutrom",
        description="Reduced order models with certified estimators on cut meshes",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("offline", help="training solves and reduced operators")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="artifact directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_offline)

    p = sub.add_parser("online", help="test sweep from saved artifacts")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--report", default=None, help="report directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_online)

    p = sub.add_parser("sweep", help="offline + online + report")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="artifact directory")
    p.add_argument("--report", default=None, help="report directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("fom", help="single full-order solve")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_fom)

    p = sub.add_parser("report", help="re-emit tables from saved records")
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
