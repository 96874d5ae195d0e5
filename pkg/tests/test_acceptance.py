"""Acceptance suite: every criterion prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute; the long boundedness runs are shared session fixtures.
"""

import math
import time

import numpy as np
import pytest

from kschemo import (
    Grid,
    ModelParams,
    Regime,
    State,
    StepperConfig,
    StepStatus,
    Termination,
    adapt_dt,
    classify_regime,
    integrate,
    mass_envelope,
    ode_comparison_oracle,
    step,
)
from kschemo.config import parse_config, run_from_config
from kschemo.observables import summarize
from kschemo.verification import build_mms_case, convergence_study, equilibrium_case

CRITERION_1 = """
model.chi = 5.0
model.a = 1.0
model.b = 1.0
model.alpha = 1.5
model.beta = 3.0
grid.dim = 1
grid.cells_x = 256
ic.u = bump
ic.u_mass = 4.0
ic.u_width = 0.05
run.t_end = 50.0
run.sample_interval = 0.05
"""

CRITERION_2 = """
model.chi = 10.0
model.a = 1.0
model.b = 1.0
model.alpha = 1.5
model.beta = 3.0
grid.dim = 1
grid.cells_x = 256
ic.u = bump
ic.u_mass = 8.0
ic.u_width = 0.05
run.t_end = 100.0
run.sample_interval = 0.1
"""

CRITERION_3 = """
model.chi = 5.0
model.a = 1.0
model.b = 1.0
model.alpha = 2.0
model.beta = 2.0
grid.dim = 2
grid.cells_x = 64
ic.u = bump
ic.u_mass = 8.0
ic.u_width = 0.1
run.t_end = 50.0
run.sample_interval = 0.1
"""


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {number:02d} {name}: {status}{suffix}")


def timed_run(text: str):
    cfg = parse_config(text=text)
    t0 = time.perf_counter()
    result = run_from_config(cfg, output_dir=None)
    wall = time.perf_counter() - t0
    return cfg, result, wall


@pytest.fixture(scope="session")
def run1():
    return timed_run(CRITERION_1)


@pytest.fixture(scope="session")
def run2():
    return timed_run(CRITERION_2)


@pytest.fixture(scope="session")
def run3():
    return timed_run(CRITERION_3)


class TestCriterion1MassEnvelope:
    def test_mass_envelope(self, run1):
        cfg, result, wall = run1
        mass = result.series.column("mass")
        y1, m0 = mass_envelope(cfg.model, mass[0], cfg.grid.measure)
        assert y1 == pytest.approx(1.0, rel=1e-12)
        assert m0 == pytest.approx(4.0, rel=1e-12)

        envelope_ok = bool(np.all(mass <= 4.0 * (1.0 + 1e-6)))
        tail = mass[(3 * len(mass)) // 4 :]
        falls_below = bool(np.max(tail) <= y1 * 1.1)
        finished = result.termination is Termination.REACHED_T_END
        in_time = wall <= 60.0
        ok = envelope_ok and falls_below and finished and in_time
        report(1, "mass-envelope", ok, f"mass_max={mass.max():.9g} wall={wall:.1f}s")
        assert finished
        assert envelope_ok
        assert falls_below
        assert in_time


class TestCriterion2SubquadraticBoundedness:
    def test_subquadratic_bounded(self, run2):
        cfg, result, wall = run2
        assert classify_regime(cfg.model, 1) is Regime.SUBQUADRATIC_BOUNDED
        summary = summarize(result.series)
        finished = result.termination is Termination.REACHED_T_END
        plateaus = summary.plateau
        all_k_ok = all(v for c, v in plateaus.items() if c.startswith("int_u_k"))
        linf_ok = plateaus["linf_u"]
        in_time = wall <= 300.0
        ok = finished and all_k_ok and linf_ok and in_time
        report(
            2, "subquadratic-boundedness", ok,
            f"linf_max={summary.column_max['linf_u']:.6g} wall={wall:.1f}s",
        )
        assert finished
        assert linf_ok
        assert all_k_ok
        assert in_time


class TestCriterion3SuperquadraticBoundedness:
    def test_superquadratic_bounded(self, run3):
        cfg, result, wall = run3
        assert classify_regime(cfg.model, 2) is Regime.SUPERQUADRATIC_BOUNDED
        summary = summarize(result.series)
        finished = result.termination is Termination.REACHED_T_END
        plateau_ok = summary.plateaus_ok
        in_time = wall <= 600.0
        ok = finished and plateau_ok and in_time
        report(
            3, "superquadratic-boundedness", ok,
            f"linf_max={summary.column_max['linf_u']:.6g} wall={wall:.1f}s",
        )
        assert finished
        assert plateau_ok
        assert in_time


class TestCriterion4SteadyState:
    def test_equilibrium_drift(self):
        params = ModelParams(chi=5.0, a=1.0, b=1.0, alpha=2.0, beta=2.0)
        grid = Grid(extent=(1.0,), cells=(64,))
        ustar = (params.a / (params.b * grid.measure)) ** (1.0 / params.beta)
        state = State(u=grid.full(ustar), v=grid.full(ustar))
        cfg = StepperConfig(dt_init=1e-3, dt_max=1e-3)
        from kschemo import Recorder, run

        result = run(state, params, grid, cfg, 1.0, Recorder(k_list=(2.0, 4.0, 8.0), sample_interval=0.01))
        assert result.diagnostics.steps == 1000
        worst = 0.0
        for col in result.series.columns:
            if col in ("t", "dt", "retries"):
                continue
            values = result.series.column(col)
            drift = np.max(np.abs(values - values[0])) / max(1.0, abs(values[0]))
            worst = max(worst, drift)
        ok = worst < 1e-9
        report(4, "steady-state-preservation", ok, f"max_drift={worst:.3e}")
        assert ok

    def test_drift_example_values(self):
        # sanity: the state itself stays put, not just its reductions
        params = ModelParams(chi=5.0, a=1.0, b=1.0, alpha=2.0, beta=2.0)
        grid = Grid(extent=(1.0,), cells=(64,))
        state = State(u=grid.full(1.0), v=grid.full(1.0))
        cfg = StepperConfig(dt_init=1e-3, dt_max=1e-3)
        for _ in range(10):
            state, outcome = step(state, params, grid, cfg)
            assert outcome.status is StepStatus.ADVANCED
        assert np.max(np.abs(state.u - 1.0)) < 1e-12


class TestCriterion5ConservationDegeneration:
    def test_pure_keller_segel_mass_constant(self):
        params = ModelParams(chi=5.0, a=0.0, b=0.0, alpha=1.0, beta=1.0)
        grid = Grid(extent=(1.0,), cells=(128,))
        x = grid.cell_centers()[0]
        u0 = np.exp(-((x - 0.5) ** 2) / (2 * 0.1**2))
        u0 *= 2.0 / integrate(u0, grid)
        cfg = StepperConfig(dt_init=1e-5, dt_max=1e-5)
        from kschemo import Recorder, run

        result = run(
            State(u=u0, v=grid.zeros()), params, grid, cfg, 0.1,
            Recorder(k_list=(2.0,), sample_interval=0.002),
        )
        assert result.termination is Termination.REACHED_T_END
        assert result.diagnostics.steps == 10000
        mass = result.series.column("mass")
        drift = np.max(np.abs(mass - mass[0])) / mass[0]
        ok = drift < 1e-8
        report(5, "conservation-degeneration", ok, f"rel_drift={drift:.3e} over 1e4 steps")
        assert ok


class TestCriterion6DiscreteMassIdentity:
    def test_identity_on_boundedness_runs(self, run1, run2, run3):
        tol = 10.0 * 1e-10  # 10 x linear_tol, relative to the current mass
        worst = 0.0
        for _, result, _ in (run1, run2, run3):
            worst = max(worst, result.diagnostics.max_mass_identity_violation)
        ok = worst <= tol
        report(6, "discrete-mass-identity", ok, f"max_violation={worst:.3e}")
        assert ok


class TestCriterion7MmsConvergence:
    def test_spatial_orders(self):
        params = ModelParams(chi=0.25, a=1.0, b=1.0, alpha=2.0, beta=2.0)
        cells = (32, 64, 128, 256)
        grids = [Grid(extent=(1.0,), cells=(n,)) for n in cells]
        h0 = 1.0 / cells[0]
        dts = [(h0 * cells[0] / n) ** 2 / 4.0 for n in cells]
        case = build_mms_case(params, grids[0])
        table = convergence_study(case, grids, dts, t_end=0.1, face_scheme="central")
        orders_u = [r.order_u for r in table.rows[1:]]
        orders_v = [r.order_v for r in table.rows[1:]]
        ok = all(o >= 1.9 for o in orders_u + orders_v)
        report(7, "mms-spatial-order", ok, "orders_u=" + ",".join(f"{o:.2f}" for o in orders_u))
        assert ok

    def test_temporal_orders(self):
        params = ModelParams(chi=0.25, a=1.0, b=1.0, alpha=2.0, beta=2.0)
        grid = Grid(extent=(1.0,), cells=(512,))
        case = build_mms_case(params, grid)
        dts = [2e-3, 1e-3, 5e-4]
        table = convergence_study(case, [grid] * 3, dts, t_end=0.5, face_scheme="central")
        orders = [r.order_u for r in table.rows[1:]] + [r.order_v for r in table.rows[1:]]
        ok = all(o >= 0.9 for o in orders)
        report(7, "mms-temporal-order", ok, "orders=" + ",".join(f"{o:.2f}" for o in orders))
        assert ok

    def test_equilibrium_zero_forcing(self):
        params = ModelParams(chi=0.25, a=1.0, b=1.0, alpha=2.0, beta=2.0)
        grid = Grid(extent=(1.0,), cells=(64,))
        case = equilibrium_case(params, grid)
        cfg = StepperConfig(dt_init=1e-3, dt_max=1e-3, cfl_safety=1.0)
        from kschemo import Recorder, run

        result = run(
            case.initial_state(grid), params, grid, cfg, 1.0,
            Recorder(k_list=(2.0,), sample_interval=1.0), forcing=case.forcing,
        )
        err = float(np.max(np.abs(result.state.u - case.u_exact(result.state.t, grid))))
        ok = err <= 1e-12
        report(7, "mms-equilibrium-zero-forcing", ok, f"error={err:.3e}")
        assert ok


class TestCriterion8ClassifierTable:
    # twelve hand-checked points, including every boundary equality:
    # beta = n/2, beta = (n+4)/2 - alpha, alpha = 1 + 2 beta / n, alpha = 2
    TABLE = [
        (1.0, 3.0, 3, Regime.SUBQUADRATIC_BOUNDED),
        (2.0, 2.0, 2, Regime.SUPERQUADRATIC_BOUNDED),
        (2.0, 1.0, 2, Regime.UNCOVERED),  # beta = n/2
        (1.5, 1.0, 3, Regime.UNCOVERED),
        (1.5, 2.0, 3, Regime.UNCOVERED),  # beta = (n+4)/2 - alpha
        (2.0, 1.0, 1, Regime.SUPERQUADRATIC_BOUNDED),
        (3.0, 2.0, 2, Regime.UNCOVERED),  # alpha = 1 + 2 beta / n
        (2.0, 4.0, 4, Regime.SUPERQUADRATIC_BOUNDED),  # alpha = 2 inclusive edge
        (1.0, 1.0, 1, Regime.UNCOVERED),
        (1.0, 2.0, 1, Regime.SUBQUADRATIC_BOUNDED),
        (2.0, 3.0, 2, Regime.SUPERQUADRATIC_BOUNDED),
        (1.99, 4.0, 2, Regime.SUBQUADRATIC_BOUNDED),  # just under alpha = 2
    ]

    def test_table(self):
        failures = []
        for alpha, beta, n, expected in self.TABLE:
            got = classify_regime(
                ModelParams(chi=1.0, a=1.0, b=1.0, alpha=alpha, beta=beta), n
            )
            if got is not expected:
                failures.append((alpha, beta, n, expected, got))
        ok = not failures
        report(8, "classifier-table", ok, f"{len(self.TABLE)} points")
        assert ok, failures


def _random_rate_case(rng):
    """Rate functions satisfying the sign hypothesis above their y1."""
    if rng.integers(0, 2) == 0:
        a = rng.uniform(0.5, 3.0)
        b = rng.uniform(0.5, 3.0)
        beta = rng.uniform(1.0, 4.0)
        c = rng.uniform(0.0, 2.0)
        om = rng.uniform(0.5, 3.0)
        ph = rng.uniform(0.0, 2.0 * math.pi)
        y1 = (a / b) ** (1.0 / beta)
        y0 = rng.uniform(0.0, 2.5 * y1)

        def phi(t, y, a=a, b=b, beta=beta, c=c, om=om, ph=ph):
            return (1.0 + c * math.sin(om * t + ph) ** 2) * (a - b * max(y, 0.0) ** beta)

    else:
        r0 = rng.uniform(0.5, 2.0)
        s = rng.uniform(0.5, 2.0)
        y1 = rng.uniform(0.5, 2.0)
        y0 = rng.uniform(0.0, 1.5 * y1)

        def phi(t, y, r0=r0, s=s, y1=y1):
            return r0 * (1.0 + math.sin(t) ** 2) if y <= y1 else -s * (y - y1)

    return phi, y0, y1


class TestCriterion9OdeComparisonOracle:
    def test_randomized_rates_respect_cap(self):
        rng = np.random.default_rng(2024)
        cases = [_random_rate_case(rng) for _ in range(100)]
        c_bound = 3.0
        overshoots = {}
        for dt in (2e-3, 1e-3):
            over = []
            for phi, y0, y1 in cases:
                res = ode_comparison_oracle(
                    phi, y0, y1, t_end=6.0, dt=dt, hypothesis_samples=(16, 16)
                )
                assert res.hypothesis_ok
                assert res.y_max <= max(y0, y1) + c_bound * dt
                over.append(max(0.0, res.y_max - max(y0, y1)))
            overshoots[dt] = np.array(over)
        mean_coarse = overshoots[2e-3].mean()
        mean_fine = overshoots[1e-3].mean()
        halves = mean_fine <= 0.6 * mean_coarse
        report(
            9, "ode-comparison-oracle", halves,
            f"mean_overshoot {mean_coarse:.2e} -> {mean_fine:.2e}",
        )
        assert halves


class TestCriterion10Positivity:
    def test_boundedness_runs_stay_nonnegative(self, run1, run2, run3):
        worst_u = min(r.diagnostics.min_u for _, r, _ in (run1, run2, run3))
        worst_v = min(r.diagnostics.min_v for _, r, _ in (run1, run2, run3))
        ok = worst_u >= -1e-12 and worst_v >= -1e-12
        report(10, "positivity", ok, f"min_u={worst_u:.3e} min_v={worst_v:.3e}")
        assert ok

    def test_oversized_dt_retries_without_negatives(self):
        params = ModelParams(chi=8.0, a=1.0, b=1.0, alpha=1.5, beta=3.0)
        grid = Grid(extent=(1.0,), cells=(256,))
        x = grid.cell_centers()[0]
        u0 = np.exp(-((x - 0.5) ** 2) / (2 * 0.03**2))
        u0 *= 4.0 / integrate(u0, grid)
        v0 = grid.sample(lambda x: 1.0 + np.cos(np.pi * x))
        cfg = StepperConfig()
        safe = adapt_dt(u0, v0, grid, params, cfg, 0.0)
        state, outcome = step(
            State(u=u0, v=v0), params, grid, cfg, dt_override=200.0 * safe
        )
        ok = (
            outcome.status is StepStatus.DT_REDUCED
            and outcome.retries >= 1
            and state.u.min() >= -1e-12
            and state.v.min() >= -1e-12
        )
        report(10, "positivity-retry-injection", ok, f"retries={outcome.retries}")
        assert ok


class TestCriterion11Determinism:
    def test_csv_bitwise_identical(self, run1, tmp_path):
        _, first, _ = run1
        cfg2, second, _ = timed_run(CRITERION_1)
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        first.series.to_csv(p1)
        second.series.to_csv(p2)
        ok = p1.read_bytes() == p2.read_bytes()
        report(11, "determinism", ok, f"{len(first.series)} rows")
        assert ok
