"""Plain-text run configuration: parsing, validation, artifacts.

Config files are line-oriented ``key = value`` with ``#`` comments and
dotted sections, e.g.::

    # subquadratic demo
    model.chi = 5.0
    model.alpha = 1.5
    grid.cells_x = 256
    ic.u = bump
    ic.u_mass = 4.0
    run.t_end = 50

Unknown keys, type mismatches and constraint violations are rejected with
the offending key and line number.  Every run echoes its fully resolved
configuration to ``resolved_config.txt``; re-parsing that file yields an
identical RunConfig, which keeps experiment definitions diffable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .grid import Grid, State, field_to_csv, integrate, write_snapshot
from .observables import summarize
from .params import ModelParams, mass_envelope
from .stepper import Recorder, RunResult, StepperConfig, Termination, run


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        ctx = ""
        if line is not None:
            ctx += f"line {line}: "
        if key is not None:
            ctx += f"{key}: "
        super().__init__(ctx + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class InitialCondition:
    """Builder settings for (u0, v0); every builder yields nonnegative fields."""

    u_kind: str = "constant"  # constant | bump | random
    u_value: float = 1.0
    u_mass: float = 1.0
    u_width: float = 0.05
    u_center: tuple[float, ...] = (0.5,)
    u_base: float = 1.0
    u_amplitude: float = 0.5
    seed: int = 1234
    v_kind: str = "constant"  # constant | equal_u
    v_value: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    grid: Grid
    stepper: StepperConfig
    ic: InitialCondition
    t_end: float = 10.0
    sample_interval: float = 0.1
    k_list: tuple[float, ...] = (2.0, 4.0, 8.0)
    output_dir: str = "out"


def _parse_float(s: str) -> float:
    return float(s)


def _parse_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError("integer required")
    return int(v)


def _parse_klist(s: str) -> tuple[float, ...]:
    parts = [p.strip() for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("at least one k value required")
    return tuple(float(p) for p in parts)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s

    return parse


def _check(cond_fn: Callable, message: str) -> Callable:
    def validate(v):
        if not cond_fn(v):
            raise ValueError(message)
        return v

    return validate


_ID = lambda v: v  # noqa: E731

# key -> (parser, default, validator); None default means "resolved later"
_KEYS: dict[str, tuple[Callable, object, Callable]] = {
    "model.chi": (_parse_float, 1.0, _check(lambda v: v >= 0, "chi >= 0 required")),
    "model.a": (_parse_float, 1.0, _check(lambda v: v >= 0, "a >= 0 required")),
    "model.b": (_parse_float, 1.0, _check(lambda v: v >= 0, "b >= 0 required")),
    "model.alpha": (_parse_float, 1.0, _check(lambda v: v >= 1, "alpha >= 1 required")),
    "model.beta": (_parse_float, 1.0, _check(lambda v: v >= 1, "beta >= 1 required")),
    "model.tau": (_parse_int, 1, _check(lambda v: v in (0, 1), "tau must be 0 or 1")),
    "grid.dim": (_parse_int, 1, _check(lambda v: v in (1, 2), "dim must be 1 or 2")),
    "grid.extent_x": (_parse_float, 1.0, _check(lambda v: v > 0, "extent_x > 0 required")),
    "grid.extent_y": (_parse_float, None, _check(lambda v: v > 0, "extent_y > 0 required")),
    "grid.cells_x": (_parse_int, 256, _check(lambda v: v >= 4, "cells_x >= 4 required")),
    "grid.cells_y": (_parse_int, None, _check(lambda v: v >= 4, "cells_y >= 4 required")),
    "ic.u": (_choice("constant", "bump", "random"), "constant", _ID),
    "ic.u_value": (_parse_float, 1.0, _check(lambda v: v >= 0, "u_value >= 0 required")),
    "ic.u_mass": (_parse_float, 1.0, _check(lambda v: v >= 0, "u_mass >= 0 required")),
    "ic.u_width": (_parse_float, 0.05, _check(lambda v: v > 0, "u_width > 0 required")),
    "ic.u_center_x": (_parse_float, None, _ID),
    "ic.u_center_y": (_parse_float, None, _ID),
    "ic.u_base": (_parse_float, 1.0, _check(lambda v: v >= 0, "u_base >= 0 required")),
    "ic.u_amplitude": (
        _parse_float,
        0.5,
        _check(lambda v: 0 <= v <= 1, "u_amplitude in [0, 1] required"),
    ),
    "ic.seed": (_parse_int, 1234, _check(lambda v: v >= 0, "seed >= 0 required")),
    "ic.v": (_choice("constant", "equal_u"), "constant", _ID),
    "ic.v_value": (_parse_float, 0.0, _check(lambda v: v >= 0, "v_value >= 0 required")),
    "stepper.dt_init": (_parse_float, 1e-4, _check(lambda v: v > 0, "dt_init > 0 required")),
    "stepper.dt_min": (_parse_float, 1e-12, _check(lambda v: v > 0, "dt_min > 0 required")),
    "stepper.dt_max": (_parse_float, 1e-2, _check(lambda v: v > 0, "dt_max > 0 required")),
    "stepper.cfl_safety": (
        _parse_float,
        0.4,
        _check(lambda v: 0 < v <= 1, "cfl_safety in (0, 1] required"),
    ),
    "stepper.linear_tol": (
        _parse_float,
        1e-10,
        _check(lambda v: v > 0, "linear_tol > 0 required"),
    ),
    "stepper.blowup_linf_threshold": (
        _parse_float,
        1e8,
        _check(lambda v: v > 0, "blowup_linf_threshold > 0 required"),
    ),
    "stepper.positivity_tol": (
        _parse_float,
        1e-12,
        _check(lambda v: v > 0, "positivity_tol > 0 required"),
    ),
    "stepper.face_scheme": (_choice("upwind", "central"), "upwind", _ID),
    "stepper.max_retries": (
        _parse_int,
        20,
        _check(lambda v: v >= 1, "max_retries >= 1 required"),
    ),
    "run.t_end": (_parse_float, 10.0, _check(lambda v: v > 0, "t_end > 0 required")),
    "run.sample_interval": (
        _parse_float,
        0.1,
        _check(lambda v: v > 0, "sample_interval > 0 required"),
    ),
    "run.k_list": (
        _parse_klist,
        (2.0, 4.0, 8.0),
        _check(lambda ks: all(k > 1 for k in ks), "k_list entries must exceed 1"),
    ),
    "run.output_dir": (_ID, "out", _check(lambda v: bool(v), "output_dir must be nonempty")),
}


def _read_raw(text: str) -> dict[str, tuple[str, int]]:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", key=key, line=lineno)
        raw[key] = (value, lineno)
    return raw


def parse_config(
    path=None, text: str | None = None, overrides: dict[str, str] | None = None
) -> RunConfig:
    """Parse and fully validate a run configuration.

    ``overrides`` maps keys to raw value strings (CLI flags); they replace
    file values before validation.
    """
    if (path is None) == (text is None):
        raise ValueError("provide exactly one of path or text")
    if path is not None:
        with open(path) as fh:
            text = fh.read()
    raw = _read_raw(text)
    if overrides:
        for key, value in overrides.items():
            if key not in _KEYS:
                raise ConfigError(f"unknown key {key!r}", key=key)
            raw[key] = (str(value), None)

    values: dict[str, object] = {}
    lines: dict[str, Optional[int]] = {}
    for key, (parser, default, validator) in _KEYS.items():
        if key in raw:
            text_value, lineno = raw[key]
            lines[key] = lineno
            try:
                values[key] = validator(parser(text_value))
            except ValueError as exc:
                raise ConfigError(str(exc), key=key, line=lineno) from None
        else:
            values[key] = default
            lines[key] = None

    # inherited defaults: y-axis mirrors x, bump centered in the domain
    if values["grid.extent_y"] is None:
        values["grid.extent_y"] = values["grid.extent_x"]
    if values["grid.cells_y"] is None:
        values["grid.cells_y"] = values["grid.cells_x"]
    if values["ic.u_center_x"] is None:
        values["ic.u_center_x"] = values["grid.extent_x"] / 2.0
    if values["ic.u_center_y"] is None:
        values["ic.u_center_y"] = values["grid.extent_y"] / 2.0

    dim = values["grid.dim"]
    try:
        model = ModelParams(
            chi=values["model.chi"],
            a=values["model.a"],
            b=values["model.b"],
            alpha=values["model.alpha"],
            beta=values["model.beta"],
            tau=values["model.tau"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="model.*") from None

    try:
        if dim == 1:
            grid = Grid(extent=(values["grid.extent_x"],), cells=(values["grid.cells_x"],))
        else:
            grid = Grid(
                extent=(values["grid.extent_x"], values["grid.extent_y"]),
                cells=(values["grid.cells_x"], values["grid.cells_y"]),
            )
    except ValueError as exc:
        raise ConfigError(str(exc), key="grid.*") from None

    try:
        stepper = StepperConfig(
            dt_init=values["stepper.dt_init"],
            dt_min=values["stepper.dt_min"],
            dt_max=values["stepper.dt_max"],
            cfl_safety=values["stepper.cfl_safety"],
            linear_tol=values["stepper.linear_tol"],
            blowup_linf_threshold=values["stepper.blowup_linf_threshold"],
            positivity_tol=values["stepper.positivity_tol"],
            face_scheme=values["stepper.face_scheme"],
            max_retries=values["stepper.max_retries"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="stepper.*") from None

    center = (values["ic.u_center_x"],) if dim == 1 else (
        values["ic.u_center_x"],
        values["ic.u_center_y"],
    )
    for c, L, key in zip(center, grid.extent, ("ic.u_center_x", "ic.u_center_y")):
        if not (0 <= c <= L):
            raise ConfigError(
                f"bump center {c} outside domain [0, {L}]", key=key, line=lines[key]
            )
    ic = InitialCondition(
        u_kind=values["ic.u"],
        u_value=values["ic.u_value"],
        u_mass=values["ic.u_mass"],
        u_width=values["ic.u_width"],
        u_center=center,
        u_base=values["ic.u_base"],
        u_amplitude=values["ic.u_amplitude"],
        seed=values["ic.seed"],
        v_kind=values["ic.v"],
        v_value=values["ic.v_value"],
    )

    return RunConfig(
        model=model,
        grid=grid,
        stepper=stepper,
        ic=ic,
        t_end=values["run.t_end"],
        sample_interval=values["run.sample_interval"],
        k_list=values["run.k_list"],
        output_dir=values["run.output_dir"],
    )


def config_items(cfg: RunConfig) -> dict[str, str]:
    """Serialize a RunConfig to the flat key/value form (repr round-trips)."""
    m, g, s, ic = cfg.model, cfg.grid, cfg.stepper, cfg.ic
    items = {
        "model.chi": repr(m.chi),
        "model.a": repr(m.a),
        "model.b": repr(m.b),
        "model.alpha": repr(m.alpha),
        "model.beta": repr(m.beta),
        "model.tau": str(m.tau),
        "grid.dim": str(g.dim),
        "grid.extent_x": repr(g.extent[0]),
        "grid.extent_y": repr(g.extent[1] if g.dim == 2 else g.extent[0]),
        "grid.cells_x": str(g.cells[0]),
        "grid.cells_y": str(g.cells[1] if g.dim == 2 else g.cells[0]),
        "ic.u": ic.u_kind,
        "ic.u_value": repr(ic.u_value),
        "ic.u_mass": repr(ic.u_mass),
        "ic.u_width": repr(ic.u_width),
        "ic.u_center_x": repr(ic.u_center[0]),
        "ic.u_center_y": repr(ic.u_center[1] if len(ic.u_center) == 2 else ic.u_center[0]),
        "ic.u_base": repr(ic.u_base),
        "ic.u_amplitude": repr(ic.u_amplitude),
        "ic.seed": str(ic.seed),
        "ic.v": ic.v_kind,
        "ic.v_value": repr(ic.v_value),
        "stepper.dt_init": repr(s.dt_init),
        "stepper.dt_min": repr(s.dt_min),
        "stepper.dt_max": repr(s.dt_max),
        "stepper.cfl_safety": repr(s.cfl_safety),
        "stepper.linear_tol": repr(s.linear_tol),
        "stepper.blowup_linf_threshold": repr(s.blowup_linf_threshold),
        "stepper.positivity_tol": repr(s.positivity_tol),
        "stepper.face_scheme": s.face_scheme,
        "stepper.max_retries": str(s.max_retries),
        "run.t_end": repr(cfg.t_end),
        "run.sample_interval": repr(cfg.sample_interval),
        "run.k_list": ",".join(repr(k) for k in cfg.k_list),
        "run.output_dir": cfg.output_dir,
    }
    return items


def write_resolved(cfg: RunConfig, path) -> None:
    items = config_items(cfg)
    with open(path, "w") as fh:
        for key in sorted(items):
            fh.write(f"{key} = {items[key]}\n")


def build_initial_state(cfg: RunConfig) -> State:
    """Construct (u0, v0) from the IC settings; reproducible for a fixed seed."""
    grid, ic = cfg.grid, cfg.ic
    if ic.u_kind == "constant":
        u0 = grid.full(ic.u_value)
    elif ic.u_kind == "bump":
        coords = grid.cell_centers()
        r2 = sum((c - c0) ** 2 for c, c0 in zip(coords, ic.u_center))
        profile = np.exp(-r2 / (2.0 * ic.u_width**2))
        total = integrate(profile, grid)
        u0 = (ic.u_mass / total) * profile if ic.u_mass > 0 else grid.zeros()
    else:  # random
        rng = np.random.default_rng(ic.seed)
        noise = 2.0 * rng.random(grid.shape) - 1.0
        u0 = ic.u_base * (1.0 + ic.u_amplitude * noise)
    if ic.v_kind == "constant":
        v0 = grid.full(ic.v_value)
    else:
        v0 = u0.copy()
    return State(u=u0, v=v0)


def refine_config(cfg: RunConfig, factor: int) -> RunConfig:
    """Same run, ``factor`` times finer in every axis and in dt."""
    grid = Grid(
        extent=cfg.grid.extent, cells=tuple(n * factor for n in cfg.grid.cells)
    )
    stepper = replace(
        cfg.stepper,
        dt_init=cfg.stepper.dt_init / factor,
        dt_min=cfg.stepper.dt_min / factor,
        dt_max=cfg.stepper.dt_max / factor,
    )
    return replace(cfg, grid=grid, stepper=stepper)


def _bool_str(flag) -> str:
    return "true" if flag else "false"


def summary_lines(cfg: RunConfig, result: RunResult) -> list[str]:
    """Machine-parsable summary of a finished run (one key=value per line)."""
    series = result.series
    lines = [
        f"termination={result.termination}",
        f"steps={result.diagnostics.steps}",
        f"total_retries={result.diagnostics.total_retries}",
        f"max_mass_identity_violation={result.diagnostics.max_mass_identity_violation:.17g}",
        f"min_u={result.diagnostics.min_u:.17g}",
        f"min_v={result.diagnostics.min_v:.17g}",
    ]
    if len(series) == 0:
        return lines
    mass0 = series.column("mass")[0]
    cap = None
    if cfg.model.b > 0:
        y1, m0 = mass_envelope(cfg.model, mass0, cfg.grid.measure)
        cap = m0
        lines += [f"y1={y1:.17g}", f"m0={m0:.17g}"]
    summary = summarize(
        series, mass_cap=cap, linf_threshold=cfg.stepper.blowup_linf_threshold
    )
    lines += [
        f"mass_max={summary.column_max['mass']:.17g}",
        f"linf_u_max={summary.column_max['linf_u']:.17g}",
    ]
    if summary.mass_envelope_ok is not None:
        lines.append(f"mass_envelope_ok={_bool_str(summary.mass_envelope_ok)}")
    lines.append(f"linf_bounded={_bool_str(summary.linf_bounded)}")
    for col in sorted(summary.plateau):
        lines.append(f"plateau_{col}={_bool_str(summary.plateau[col])}")
    lines.append(f"plateaus_ok={_bool_str(summary.plateaus_ok)}")
    return lines


def run_from_config(
    cfg: RunConfig, output_dir: str | None = "use-config", export_fields_csv: bool = False
) -> RunResult:
    """Run a configuration; write artifacts unless output_dir is None.

    Artifacts: resolved_config.txt, series.csv, summary.txt, initial and
    final snapshots of both fields (plus CSV field exports on request).
    """
    if output_dir == "use-config":
        output_dir = cfg.output_dir
    initial = build_initial_state(cfg)
    recorder = Recorder(k_list=cfg.k_list, sample_interval=cfg.sample_interval)

    out = None
    if output_dir is not None:
        out = output_dir
        os.makedirs(out, exist_ok=True)
        write_resolved(cfg, os.path.join(out, "resolved_config.txt"))
        write_snapshot(os.path.join(out, "u_initial.snap"), initial.u, cfg.grid, initial.t)
        write_snapshot(os.path.join(out, "v_initial.snap"), initial.v, cfg.grid, initial.t)

    result = run(initial, cfg.model, cfg.grid, cfg.stepper, cfg.t_end, recorder)

    if out is not None:
        result.series.to_csv(os.path.join(out, "series.csv"))
        final = result.state
        write_snapshot(os.path.join(out, "u_final.snap"), final.u, cfg.grid, final.t)
        write_snapshot(os.path.join(out, "v_final.snap"), final.v, cfg.grid, final.t)
        with open(os.path.join(out, "summary.txt"), "w") as fh:
            fh.write("\n".join(summary_lines(cfg, result)) + "\n")
        if export_fields_csv:
            field_to_csv(os.path.join(out, "u_final.csv"), final.u, cfg.grid)
            field_to_csv(os.path.join(out, "v_final.csv"), final.v, cfg.grid)
    return result
