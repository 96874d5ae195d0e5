"""Command-line entry points: classify | run | sweep | mms | bound-check.

Exit codes: 0 ok, 2 config error, 3 blow-up detected, 4 solver failure
(bound-check additionally exits 1 when a verdict is false).  Any failure
prints a single machine-parsable ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, parse_config, run_from_config
from .grid import Grid
from .params import (
    ModelParams,
    classify_regime,
    mass_envelope,
    ode_comparison_oracle,
)
from .stepper import Termination
from .verification import build_mms_case, convergence_study

EXIT_OK = 0
EXIT_VERDICT_FALSE = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_SOLVER = 4


def _fail(code: int, kind: str, message: str) -> int:
    print(f"error: {kind}: {message}", file=sys.stderr)
    return code


def _collect_overrides(extras: list[str]) -> dict[str, str]:
    """Turn leftover ``--section.key value`` pairs into config overrides."""
    overrides: dict[str, str] = {}
    i = 0
    while i < len(extras):
        token = extras[i]
        if not (token.startswith("--") and "." in token):
            raise ConfigError(f"unrecognized argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(extras):
                raise ConfigError(f"missing value for override {token!r}")
            value = extras[i + 1]
            i += 1
        overrides[key] = value
        i += 1
    return overrides


def _classify_line(args) -> str:
    params = ModelParams(
        chi=args.chi, a=args.a, b=args.b, alpha=args.alpha, beta=args.beta
    )
    regime = classify_regime(params, args.n)
    y1, m0 = mass_envelope(params, args.initial_mass, args.domain_measure)
    return (
        f"{args.alpha:g},{args.beta:g},{args.n},{regime},{y1:.17g},{m0:.17g}"
    )


def _cmd_classify(args) -> int:
    try:
        print(_classify_line(args))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    return EXIT_OK


def _cmd_run(args, extras: list[str]) -> int:
    try:
        overrides = _collect_overrides(extras)
        cfg = parse_config(path=args.config, overrides=overrides)
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    output_dir = args.output if args.output else cfg.output_dir
    result = run_from_config(
        cfg, output_dir=output_dir, export_fields_csv=args.export_fields_csv
    )
    print(f"termination={result.termination}")
    print(f"output_dir={output_dir}")
    if result.termination is Termination.BLOWUP_DETECTED:
        return _fail(
            EXIT_BLOWUP, "blowup-detected", f"t={result.state.t:.17g}"
        )
    if result.termination is Termination.SOLVER_FAILURE:
        return _fail(EXIT_SOLVER, "solver-failure", f"t={result.state.t:.17g}")
    return EXIT_OK


def _frange(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ConfigError("step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(max(count, 0))]


def _point_id(alpha: float, beta: float) -> str:
    return f"{alpha:.12g},{beta:.12g}"


def _sweep_point(task) -> str:
    """One sweep row; module-level so process pools can pickle it."""
    alpha, beta, n, simulate, base_overrides, config_path, t_end = task
    if not simulate:
        # classification only: envelope quoted for unit coefficients on the
        # unit box with zero initial mass, i.e. the bare barrier value
        params = ModelParams(chi=1.0, a=1.0, b=1.0, alpha=alpha, beta=beta)
        regime = classify_regime(params, n)
        y1, m0 = mass_envelope(params, 0.0, 1.0)
        return f"{alpha:.12g},{beta:.12g},{n},{regime},{y1:.17g},{m0:.17g}"

    overrides = dict(base_overrides)
    overrides["model.alpha"] = repr(alpha)
    overrides["model.beta"] = repr(beta)
    overrides["run.t_end"] = repr(t_end)
    if config_path is not None:
        cfg = parse_config(path=config_path, overrides=overrides)
    else:
        cfg = parse_config(text="", overrides=overrides)
    regime = classify_regime(cfg.model, n)
    result = run_from_config(cfg, output_dir=None)
    from .observables import summarize

    summary = summarize(result.series)
    mass0 = result.series.column("mass")[0]
    y1, m0 = mass_envelope(cfg.model, mass0, cfg.grid.measure)
    return (
        f"{alpha:.12g},{beta:.12g},{n},{regime},{y1:.17g},{m0:.17g},"
        f"{result.termination},{summary.column_max['mass']:.17g},"
        f"{summary.column_max['linf_u']:.17g},"
        f"{'true' if summary.plateaus_ok else 'false'}"
    )


def _cmd_sweep(args, extras: list[str]) -> int:
    try:
        overrides = _collect_overrides(extras)
        alphas = _frange(args.alpha_min, args.alpha_max, args.alpha_step)
        betas = _frange(args.beta_min, args.beta_max, args.beta_step)
        if not alphas or not betas:
            raise ConfigError("empty sweep range")
        for a in alphas:
            if a < 1:
                raise ConfigError("alpha >= 1 required")
        for b in betas:
            if b < 1:
                raise ConfigError("beta >= 1 required")
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    os.makedirs(args.output, exist_ok=True)
    csv_path = os.path.join(args.output, "sweep.csv")
    ledger_path = os.path.join(args.output, "sweep_done.txt")
    done: set[str] = set()
    if os.path.exists(ledger_path):
        with open(ledger_path) as fh:
            done = {line.strip() for line in fh if line.strip()}

    header = "alpha,beta,n,regime,y1,m0"
    if args.simulate:
        header += ",termination,mass_max,linf_u_max,plateaus_ok"
    if not os.path.exists(csv_path):
        with open(csv_path, "w") as fh:
            fh.write(header + "\n")

    tasks = []
    for alpha in alphas:
        for beta in betas:
            if _point_id(alpha, beta) in done:
                continue
            tasks.append(
                (alpha, beta, args.n, args.simulate, overrides, args.config, args.t_end)
            )

    def emit(task, row: str) -> None:
        # ledger writes are serialized here in the parent process
        with open(csv_path, "a") as fh:
            fh.write(row + "\n")
        with open(ledger_path, "a") as fh:
            fh.write(_point_id(task[0], task[1]) + "\n")

    try:
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                for task, row in zip(tasks, pool.map(_sweep_point, tasks)):
                    emit(task, row)
        else:
            for task in tasks:
                emit(task, _sweep_point(task))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    print(f"sweep_rows={len(tasks)}")
    print(f"sweep_csv={csv_path}")
    return EXIT_OK


def _cmd_mms(args) -> int:
    params = ModelParams(
        chi=args.chi, a=1.0, b=1.0, alpha=2.0, beta=2.0, tau=1
    )
    if args.mode == "spatial":
        cells = [args.cells0 * 2**i for i in range(args.levels)]
        grids = [
            Grid(extent=(1.0,) * args.dim, cells=(n,) * args.dim) for n in cells
        ]
        h0 = 1.0 / args.cells0
        dt0 = args.dt0 if args.dt0 is not None else h0**2 / 4.0
        dts = [dt0 * (1.0 / n / h0) ** 2 for n in cells]
    else:
        grid = Grid(extent=(1.0,) * args.dim, cells=(args.cells,) * args.dim)
        grids = [grid] * args.levels
        dt0 = args.dt0 if args.dt0 is not None else 2e-3
        dts = [dt0 / 2**i for i in range(args.levels)]
    case = build_mms_case(params, grids[0])
    table = convergence_study(case, grids, dts, args.t_end, face_scheme="central")
    table.to_csv(args.output)
    for r in table.rows:
        ou = "-" if r.order_u is None else f"{r.order_u:.3f}"
        ov = "-" if r.order_v is None else f"{r.order_v:.3f}"
        print(
            f"level={r.level} h={r.h:.3e} dt={r.dt:.3e} "
            f"error_u={r.error_u:.6e} error_v={r.error_v:.6e} "
            f"order_u={ou} order_v={ov}"
        )
    print(f"mms_csv={args.output}")
    return EXIT_OK


_ODE_FIXTURES = (
    # (phi, y0, y1, t_end, dt): each satisfies the sign hypothesis
    (lambda t, y: (1.0 + math.sin(t) ** 2) * (1.0 - y**2), 0.2, 1.0, 8.0, 1e-3),
    (lambda t, y: -y, 3.0, 1.0, 8.0, 1e-3),
    (lambda t, y: 0.0, 0.5, 1.0, 8.0, 1e-3),
)


def _cmd_bound_check(args) -> int:
    from .observables import ObservableSeries

    resolved = os.path.join(args.run_dir, "resolved_config.txt")
    series_path = os.path.join(args.run_dir, "series.csv")
    try:
        cfg = parse_config(path=resolved)
        series = ObservableSeries.from_csv(series_path)
    except (ConfigError, OSError, ValueError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    if len(series) == 0:
        return _fail(EXIT_CONFIG, "config", "empty series")

    mass = series.column("mass")
    y1, m0 = mass_envelope(cfg.model, mass[0], cfg.grid.measure)
    mass_ok = bool(np.all(mass <= m0 * (1.0 + 1e-6)))
    print(f"y1={y1:.17g}")
    print(f"m0={m0:.17g}")
    print(f"mass_max={mass.max():.17g}")
    print(f"mass_envelope_ok={'true' if mass_ok else 'false'}")

    oracle_ok = True
    for phi, y0, y1_fix, t_end, dt in _ODE_FIXTURES:
        res = ode_comparison_oracle(phi, y0, y1_fix, t_end, dt)
        cap = max(y1_fix, y0) + 100.0 * dt
        oracle_ok = oracle_ok and res.hypothesis_ok and res.y_max <= cap
    print(f"ode_oracle_ok={'true' if oracle_ok else 'false'}")

    return EXIT_OK if (mass_ok and oracle_ok) else EXIT_VERDICT_FALSE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kschemo",
        description="Chemotaxis simulator with nonlocal logistic sources",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a parameter point")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--domain-measure", type=float, default=1.0)
    p.add_argument("--initial-mass", type=float, default=0.0)

    p = sub.add_parser("run", help="run a configured simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="override run.output_dir")
    p.add_argument("--export-fields-csv", action="store_true")

    p = sub.add_parser("sweep", help="classify (optionally short-run) a parameter grid")
    p.add_argument("--alpha-min", type=float, required=True)
    p.add_argument("--alpha-max", type=float, required=True)
    p.add_argument("--alpha-step", type=float, default=0.25)
    p.add_argument("--beta-min", type=float, required=True)
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--beta-step", type=float, default=0.25)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--config", default=None, help="base config for --simulate")
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("mms", help="manufactured-solution convergence study")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--mode", choices=("spatial", "temporal"), default="spatial")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--cells0", type=int, default=32, help="coarsest cells (spatial)")
    p.add_argument("--cells", type=int, default=512, help="fixed cells (temporal)")
    p.add_argument("--dt0", type=float, default=None)
    p.add_argument("--t-end", type=float, default=0.1)
    p.add_argument("--chi", type=float, default=0.25)
    p.add_argument("--output", default="mms.csv")

    p = sub.add_parser("bound-check", help="audit a finished run against the envelope")
    p.add_argument("--run-dir", required=True)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        if args.command == "classify":
            if extras:
                return _fail(EXIT_CONFIG, "config", f"unrecognized arguments {extras}")
            return _cmd_classify(args)
        if args.command == "run":
            return _cmd_run(args, extras)
        if args.command == "sweep":
            return _cmd_sweep(args, extras)
        if args.command == "mms":
            if extras:
                return _fail(EXIT_CONFIG, "config", f"unrecognized arguments {extras}")
            return _cmd_mms(args)
        if args.command == "bound-check":
            if extras:
                return _fail(EXIT_CONFIG, "config", f"unrecognized arguments {extras}")
            return _cmd_bound_check(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
