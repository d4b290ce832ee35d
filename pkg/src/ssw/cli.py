"""Command line interface: ``ssw run``, ``ssw cases`` and ``ssw convergence``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import convergence_table, energy_spectrum, error_norm, y_average_decompose
from .config import ConfigError, RunConfig, apply_flags, with_resolution
from .grid import CASES, init_case, list_cases
from .integrator import PositivityError, StepControls, advance, default_theta, has_sources
from .model import cons_to_prim
from .output import write_snapshot, write_step_log, write_table

log = logging.getLogger("ssw")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3
VARS = ("h", "v1", "v2", "P11", "P12", "P22")


def worker_count():
    """Validated SSW_THREADS; the kernels are vectorized and single threaded."""
    raw = os.environ.get("SSW_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SSW_THREADS must be a positive integer, got {raw!r}", "environment") from None
    if n < 1:
        raise ConfigError(f"SSW_THREADS must be a positive integer, got {raw!r}", "environment")
    return n


def setup_run(config: RunConfig):
    setup = init_case(config.case, config.nx, config.ny, config.overrides)
    theta = config.theta
    if theta is None:
        theta = default_theta(config.order, has_sources(setup.grid, setup.params))
    controls = StepControls(
        order=config.order, solver=config.solver, theta=theta, beta=config.beta, cfl=config.cfl
    )
    t_end = setup.t_end if config.t_end is None else config.t_end
    return setup, controls, t_end


def _pvars(q):
    h = q[0]
    return np.stack([h, q[1], q[2], q[3] / h, q[4] / h, q[5] / h])


def exact_errors(setup, t):
    """L1, L2 and Linf errors of (h, v1, v2, P11, P12, P22) against the exact field."""
    grid = setup.grid
    X, Y = grid.mesh()
    I = grid.interior
    num = _pvars(cons_to_prim(grid.interior_state(), check=False))
    ex = _pvars(setup.exact(X[I], Y[I], t))
    axes = tuple(range(1, num.ndim))
    return {n: error_norm(num, ex, n, grid.cell_area, axis=axes) for n in ("L1", "L2", "Linf")}


def write_spectrum(grid, path):
    q = cons_to_prim(grid.interior_state(), check=False)
    _, u1 = y_average_decompose(q[1])
    _, u2 = y_average_decompose(q[2])
    spec = energy_spectrum(u1, u2)
    write_table(path, ("k", "E"), zip(spec.k, spec.E))
    return spec


def run(config: RunConfig, out_dir=None):
    """Execute one run; returns the exit status."""
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    setup, controls, t_end = setup_run(config)
    grid = setup.grid
    targets = []
    if config.snapshot_every > 0:
        k = 1
        while k * config.snapshot_every < t_end:
            targets.append(k * config.snapshot_every)
            k += 1
    if t_end > 0:
        targets.append(t_end)
    records = []
    index = 0
    write_snapshot(grid, out / f"snapshot_{index:04d}.csv")
    log.info("case %s, %s order %d, theta=%g, t_end=%g", config.case, controls.solver,
             controls.order, controls.theta, t_end)
    try:
        for target in targets:
            res = advance(grid, setup.bc, controls, setup.params, target, exact=setup.exact,
                          first_step=len(records) + 1)
            records.extend(res.log)
            index += 1
            write_snapshot(grid, out / f"snapshot_{index:04d}.csv")
            log.info("t=%.6g after %d steps", grid.time, len(records))
    except PositivityError as err:
        write_step_log(records, out / "steps.csv")
        with open(out / "abort.txt", "w") as fh:
            fh.write(f"numerical abort: {err}\n")
            fh.write(f"step={err.step} time={err.time!r} component={err.component} index={err.index}\n")
        log.error("numerical abort: %s", err)
        return EXIT_ABORT
    write_step_log(records, out / "steps.csv")
    if setup.exact is not None:
        errs = exact_errors(setup, grid.time)
        rows = [(name,) + tuple(errs[name]) for name in ("L1", "L2", "Linf")]
        write_table(out / "errors.csv", ("norm",) + VARS, rows)
    if grid.ndim == 2 and setup.case.bc.left == "periodic":
        write_spectrum(grid, out / "spectrum.csv")
    return EXIT_OK


def convergence(config: RunConfig, out_dir=None):
    """Mesh-doubling study against the exact solution; writes convergence.csv."""
    case = CASES[config.case]
    probe = init_case(config.case, config.nx, config.ny, config.overrides)
    if probe.exact is None:
        raise ConfigError(f"case {config.case} has no exact solution for a convergence study")
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nx0 = probe.grid.nx
    ny0 = probe.grid.ny
    ns, errors = [], []
    for level in range(config.levels):
        f = 2**level
        cfg = with_resolution(config, nx0 * f, ny0 * f if case.ndim == 2 else None)
        setup, controls, t_end = setup_run(cfg)
        try:
            advance(setup.grid, setup.bc, controls, setup.params, t_end, exact=setup.exact)
        except PositivityError as err:
            with open(out / "abort.txt", "w") as fh:
                fh.write(f"numerical abort at nx={setup.grid.nx}: {err}\n")
            log.error("numerical abort: %s", err)
            return EXIT_ABORT
        ns.append(setup.grid.nx)
        errors.append(exact_errors(setup, setup.grid.time)["L1"])
        log.info("nx=%d L1(h)=%.6e", ns[-1], errors[-1][0])
    table = convergence_table(ns, errors)
    header = ["nx"] + [f"L1_{v}" for v in VARS] + [f"rate_{v}" for v in VARS]
    rows = []
    for n, e, rate in table:
        rates = [None] * len(VARS) if rate is None else list(rate)
        rows.append([n] + list(e) + rates)
    write_table(out / "convergence.csv", header, rows)
    return EXIT_OK


def _load(path, flags):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    return apply_flags(text, flags)


def build_parser():
    p = argparse.ArgumentParser(prog="ssw", description="Shear shallow water finite volume solver")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one configuration")
    r.add_argument("config")
    sub.add_parser("cases", help="list the registered test cases")
    c = sub.add_parser("convergence", help="mesh-doubling study against an exact solution")
    c.add_argument("config")
    return p


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "cases":
            if extra:
                parser.error(f"unexpected arguments: {extra}")
            for name in list_cases():
                case = CASES[name]
                print(f"{name:18s} {case.ndim}-D  t_end={case.t_end:g}  {case.description}")
            return EXIT_OK
        worker_count()
        config = _load(args.config, extra)
        if args.command == "run":
            return run(config)
        return convergence(config)
    except ConfigError as err:
        print(f"ssw: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
