import json

import pytest

import channelsim.config as config
from channelsim.errors import ConfigError


def parse(d):
    return config.parse_config(json.dumps(d))


class TestParsing:
    def test_minimal_transit_gets_defaults(self):
        cfg = parse({"experiment": {"kind": "transit"}})
        assert cfg.grid.nx == 1344 and cfg.grid.ny == 384
        assert cfg.packet.sx == 8.0 and cfg.packet.sy == 12.0 and cfg.packet.k0 == 1.0
        assert cfg.geometry.ell == 50.0 and cfg.geometry.a == 10.0
        assert cfg.model.kind == "hard" and cfg.model.v0 is None
        assert cfg.stepper.dt == pytest.approx(0.25 * 0.25**2)
        assert cfg.stepper.sample_stride == 8
        assert cfg.output.formats == ("csv", "json")

    def test_syntax_error_reports_position(self):
        with pytest.raises(ConfigError, match=r"line 1 column"):
            config.parse_config("{not json")

    def test_negative_width_names_field(self):
        with pytest.raises(ConfigError, match=r"geometry\.a"):
            parse({"geometry": {"a": -1}})

    def test_unknown_key_suggests_ell(self):
        with pytest.raises(ConfigError, match=r"lenght.*ell"):
            parse({"geometry": {"lenght": 50}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse({"grids": {}})

    def test_unknown_stepper_key_suggested(self):
        with pytest.raises(ConfigError, match="did you mean"):
            parse({"stepper": {"dtt": 0.01}})

    def test_soft_model_gets_default_height(self):
        cfg = parse({"model": {"kind": "step"}})
        assert cfg.model.v0 == pytest.approx(config.V0_DEFAULT_ENERGY_FACTOR * 0.5)

    def test_smooth_model_gets_default_width(self):
        cfg = parse({"model": {"kind": "smooth"}})
        assert cfg.model.w == pytest.approx(0.5)

    def test_nsteps_stride_divisibility(self):
        with pytest.raises(ConfigError, match="multiple of sample_stride"):
            parse({"stepper": {"n_steps": 101, "sample_stride": 8}})

    def test_sweep_requires_axis_and_values(self):
        with pytest.raises(ConfigError, match=r"experiment\.axis"):
            parse({"experiment": {"kind": "sweep"}})
        with pytest.raises(ConfigError, match=r"experiment\.values"):
            parse({"experiment": {"kind": "sweep", "axis": "p"}})

    def test_sweep_values_positive(self):
        with pytest.raises(ConfigError, match=r"values\[1\]"):
            parse({"experiment": {"kind": "sweep", "axis": "p", "values": [1.0, -2.0]}})

    def test_bad_model_kind(self):
        with pytest.raises(ConfigError, match=r"model\.kind"):
            parse({"model": {"kind": "soft"}})

    def test_cap_parsed(self):
        cfg = parse({"stepper": {"cap": {"width": 5.0, "strength": 2.0}}})
        assert cfg.stepper.cap.width == 5.0

    def test_slab_must_fit_grid(self):
        with pytest.raises(ConfigError, match=r"geometry\.x_in"):
            parse({"geometry": {"x_in": -300.0}})


class TestRoundTrip:
    def test_parse_emit_parse_identity(self):
        cfg = parse({
            "experiment": {"kind": "sweep", "axis": "p", "values": [0.8, 1.0, 1.2]},
            "model": {"kind": "smooth", "v0": 55.0, "w": 1.0},
            "stepper": {"n_steps": 160, "sample_stride": 8},
        })
        again = config.parse_config(cfg.to_json())
        assert again == cfg

    def test_resolved_steps_round_trip(self):
        cfg = parse({"experiment": {"kind": "transit"}})
        resolved = config.with_resolved_steps(cfg, 2400)
        again = config.parse_config(resolved.to_json())
        assert again == resolved
        assert again.stepper.n_steps == 2400

    def test_hash_stable_and_sensitive(self):
        cfg1 = parse({"packet": {"k0": 1.0}})
        cfg2 = parse({"packet": {"k0": 1.0}})
        cfg3 = parse({"packet": {"k0": 1.5}})
        assert config.config_hash(cfg1) == config.config_hash(cfg2)
        assert config.config_hash(cfg1) != config.config_hash(cfg3)

    def test_reflection_defaults_parse(self):
        cfg = parse(config.reflection_defaults())
        assert cfg.experiment.kind == "reflect"
        assert cfg.geometry.a == 0.0
