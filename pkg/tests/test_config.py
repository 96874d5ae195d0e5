import numpy as np
import pytest

from kschemo import integrate
from kschemo.config import (
    ConfigError,
    build_initial_state,
    config_items,
    parse_config,
    refine_config,
    run_from_config,
    write_resolved,
)
from kschemo.grid import read_snapshot
from kschemo.observables import ObservableSeries

MINIMAL = """
# growth side only; everything else defaults
model.alpha = 1.5
model.beta = 3.0
model.chi = 2.0
"""


class TestParse:
    def test_minimal_file_fills_defaults(self):
        cfg = parse_config(text=MINIMAL)
        assert cfg.model.alpha == 1.5
        assert cfg.grid.cells == (256,)
        assert cfg.stepper.dt_max == 1e-2
        assert cfg.k_list == (2.0, 4.0, 8.0)
        assert cfg.ic.u_kind == "constant"

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config(text="model.chi = 3.0  # inline comment\n\n# full line\n")
        assert cfg.model.chi == 3.0

    def test_alpha_below_one_rejected_with_location(self):
        with pytest.raises(ConfigError, match=r"line 2: model.alpha: alpha >= 1"):
            parse_config(text="\nmodel.alpha = 0.5\n")

    def test_tau_enum_rejected(self):
        with pytest.raises(ConfigError, match="tau"):
            parse_config(text="model.tau = 2\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match=r"line 1: unknown key 'model.gamma'"):
            parse_config(text="model.gamma = 1.0\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(text="model.chi = 1\nmodel.chi = 2\n")

    def test_type_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="grid.cells_x"):
            parse_config(text="grid.cells_x = many\n")
        with pytest.raises(ConfigError, match="integer"):
            parse_config(text="grid.cells_x = 12.5\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(text="model.chi 1.0\n")

    def test_overrides_replace_file_values(self):
        cfg = parse_config(text=MINIMAL, overrides={"model.alpha": "1.75"})
        assert cfg.model.alpha == 1.75

    def test_override_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(text=MINIMAL, overrides={"model.gamma": "1"})

    def test_y_axis_inherits_x(self):
        cfg = parse_config(text="grid.dim = 2\ngrid.cells_x = 16\ngrid.extent_x = 2.0\n")
        assert cfg.grid.cells == (16, 16)
        assert cfg.grid.extent == (2.0, 2.0)

    def test_bump_center_defaults_to_midpoint(self):
        cfg = parse_config(text="grid.extent_x = 4.0\nic.u = bump\n")
        assert cfg.ic.u_center == (2.0,)

    def test_bump_center_outside_domain_rejected(self):
        with pytest.raises(ConfigError, match="outside domain"):
            parse_config(text="ic.u = bump\nic.u_center_x = 2.0\n")

    def test_cross_field_dt_ordering(self):
        with pytest.raises(ConfigError, match="dt_min"):
            parse_config(text="stepper.dt_min = 1.0\nstepper.dt_init = 1e-4\n")


class TestRoundTrip:
    def test_resolved_config_roundtrips(self, tmp_path):
        cfg = parse_config(text=MINIMAL + "grid.dim = 2\nic.u = bump\nic.u_mass = 3.5\n")
        path = tmp_path / "resolved_config.txt"
        write_resolved(cfg, path)
        again = parse_config(path=path)
        assert again == cfg

    def test_items_cover_every_key(self):
        from kschemo.config import _KEYS

        cfg = parse_config(text=MINIMAL)
        items = config_items(cfg)
        assert set(items) == set(_KEYS)


class TestInitialConditions:
    def test_constant(self):
        cfg = parse_config(text="ic.u = constant\nic.u_value = 2.5\nic.v_value = 0.5\n")
        state = build_initial_state(cfg)
        np.testing.assert_array_equal(state.u, 2.5)
        np.testing.assert_array_equal(state.v, 0.5)

    def test_bump_mass_parameterization_exact(self):
        cfg = parse_config(
            text="ic.u = bump\nic.u_mass = 4.0\nic.u_width = 0.05\ngrid.cells_x = 128\n"
        )
        state = build_initial_state(cfg)
        assert integrate(state.u, cfg.grid) == pytest.approx(4.0, rel=1e-13)
        assert state.u.min() >= 0

    def test_bump_2d(self):
        cfg = parse_config(
            text="grid.dim = 2\ngrid.cells_x = 32\nic.u = bump\nic.u_mass = 8.0\nic.u_width = 0.1\n"
        )
        state = build_initial_state(cfg)
        assert integrate(state.u, cfg.grid) == pytest.approx(8.0, rel=1e-13)

    def test_random_reproducible_and_nonnegative(self):
        text = "ic.u = random\nic.u_base = 1.0\nic.u_amplitude = 1.0\nic.seed = 42\n"
        s1 = build_initial_state(parse_config(text=text))
        s2 = build_initial_state(parse_config(text=text))
        np.testing.assert_array_equal(s1.u, s2.u)
        assert s1.u.min() >= 0
        s3 = build_initial_state(parse_config(text=text.replace("42", "43")))
        assert not np.array_equal(s1.u, s3.u)

    def test_v_equal_u(self):
        cfg = parse_config(text="ic.u = constant\nic.u_value = 1.5\nic.v = equal_u\n")
        state = build_initial_state(cfg)
        np.testing.assert_array_equal(state.v, state.u)


class TestRefine:
    def test_refine_scales_grid_and_dt(self):
        cfg = parse_config(text=MINIMAL)
        fine = refine_config(cfg, 4)
        assert fine.grid.cells == (1024,)
        assert fine.stepper.dt_max == pytest.approx(cfg.stepper.dt_max / 4)
        assert fine.stepper.dt_init == pytest.approx(cfg.stepper.dt_init / 4)
        assert fine.t_end == cfg.t_end


RUN_CONFIG = """
model.chi = 2.0
model.alpha = 1.5
model.beta = 3.0
grid.cells_x = 64
ic.u = bump
ic.u_mass = 2.0
ic.u_width = 0.1
run.t_end = 0.5
run.sample_interval = 0.05
"""


class TestRunFromConfig:
    def test_artifacts_written(self, tmp_path):
        cfg = parse_config(text=RUN_CONFIG)
        out = tmp_path / "out"
        result = run_from_config(cfg, output_dir=str(out), export_fields_csv=True)
        assert result.termination.value == "ReachedTEnd"
        for name in (
            "resolved_config.txt",
            "series.csv",
            "summary.txt",
            "u_initial.snap",
            "v_initial.snap",
            "u_final.snap",
            "v_final.snap",
            "u_final.csv",
            "v_final.csv",
        ):
            assert (out / name).exists(), name
        values, t = read_snapshot(out / "u_final.snap")
        np.testing.assert_array_equal(values, result.state.u)
        series = ObservableSeries.from_csv(out / "series.csv")
        assert series.rows == result.series.rows
        again = parse_config(path=out / "resolved_config.txt")
        assert again == cfg

    def test_summary_machine_parsable(self, tmp_path):
        cfg = parse_config(text=RUN_CONFIG)
        out = tmp_path / "out"
        run_from_config(cfg, output_dir=str(out))
        entries = dict(
            line.split("=", 1) for line in (out / "summary.txt").read_text().splitlines()
        )
        assert entries["termination"] == "ReachedTEnd"
        assert entries["mass_envelope_ok"] == "true"
        assert float(entries["y1"]) == pytest.approx(1.0)
        assert float(entries["m0"]) == pytest.approx(2.0)
        assert "plateau_linf_u" in entries

    def test_no_artifacts_in_memory_mode(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = parse_config(text=RUN_CONFIG)
        run_from_config(cfg, output_dir=None)
        assert list(tmp_path.iterdir()) == []
