import pytest

from aodesign import config as cfg
from aodesign import materials as mats


class TestKvParser:
    def test_basic_pairs_and_comments(self):
        pairs = cfg.parse_kv_text("a = 1 # trailing\n# full line\n\nb=2\n")
        assert pairs == {"a": "1", "b": "2"}

    def test_missing_equals(self):
        with pytest.raises(cfg.ConfigError, match="expected"):
            cfg.parse_kv_text("just words\n")

    def test_duplicate_key(self):
        with pytest.raises(cfg.ConfigError, match="duplicate"):
            cfg.parse_kv_text("a = 1\na = 2\n")

    def test_line_number_in_diagnostics(self):
        with pytest.raises(cfg.ConfigError, match=":3:"):
            cfg.parse_kv_text("a = 1\nb = 2\noops\n", source="f.cfg")


class TestMaterialConfig:
    def test_named_default_round_trip(self, teo2):
        text = cfg.dump_material(teo2)
        loaded = cfg.material_from_pairs(cfg.parse_kv_text(text))
        assert loaded.density == teo2.density
        assert loaded.indices[780.0].n_o == teo2.indices[780.0].n_o
        assert (loaded.stiffness == teo2.stiffness).all()

    def test_override_single_constant(self):
        material = cfg.material_from_pairs({"material.name": "TeO2",
                                            "density": "6000.0"})
        assert material.density == 6000.0
        assert material.name == "TeO2"

    def test_unknown_key_rejected(self):
        with pytest.raises(cfg.ConfigError, match="unknown keys"):
            cfg.material_from_pairs({"material.name": "TeO2",
                                     "stiffnes.c11": "5e10"})

    def test_invalid_material_reported(self):
        with pytest.raises(cfg.ConfigError, match="positive definite"):
            cfg.material_from_pairs({"material.name": "TeO2",
                                     "stiffness.c11": "-5e10"})

    def test_custom_material_requires_everything(self):
        with pytest.raises(cfg.ConfigError, match="missing required"):
            cfg.material_from_pairs({"material.name": "mystery"})

    def test_load_from_file(self, tmp_path, teo2):
        path = tmp_path / "teo2.cfg"
        path.write_text(cfg.dump_material(teo2))
        loaded = cfg.load_material(path)
        assert loaded.name == "TeO2"


class TestRunConfig:
    def test_defaults(self):
        run = cfg.default_run_config()
        assert run.geometry.optical_rotation == 10.0
        assert run.geometry.acoustic_rotation == 3.0
        assert run.transducer.shape == "diamond"
        assert run.wavelength_blue_nm == 480.0
        assert len(run.fom_phi_o) == 11
        assert len(run.fom_phi_a) == 11

    def test_range_spec(self):
        run = cfg.run_config_from_pairs({"fom.phi_o_deg": "4:14:2"})
        assert run.fom_phi_o == (4.0, 6.0, 8.0, 10.0, 12.0, 14.0)

    def test_comma_list_spec(self):
        run = cfg.run_config_from_pairs({"fom.phi_a_deg": "2.5,3.0"})
        assert run.fom_phi_a == (2.5, 3.0)

    def test_unknown_key_rejected(self):
        with pytest.raises(cfg.ConfigError, match="unknown keys"):
            cfg.run_config_from_pairs({"geometry.optical_rot_deg": "10"})

    def test_material_path_reference(self, tmp_path, teo2):
        mat_path = tmp_path / "mat.cfg"
        mat_path.write_text(cfg.dump_material(teo2))
        run = cfg.run_config_from_pairs({"material.path": str(mat_path)})
        assert run.material.name == "TeO2"

    def test_inline_material_override(self):
        run = cfg.run_config_from_pairs({"density": "6000"})
        assert run.material.density == 6000.0

    def test_bad_range_reported(self):
        with pytest.raises(cfg.ConfigError, match="bad range"):
            cfg.run_config_from_pairs({"fom.phi_o_deg": "4:14"})
