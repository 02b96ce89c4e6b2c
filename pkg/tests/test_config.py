import pytest

from rislink.config import ConfigError, ScenarioConfig, load_scenario


def write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDefaults:
    def test_empty_file_gives_evaluation_defaults(self, tmp_path):
        cfg = load_scenario(write(tmp_path, ""))
        assert cfg.n_users == 8
        assert cfg.n_ris_elements == 64
        assert cfg.n_bs_antennas == 128
        assert cfg.rician_factor == 10.0
        assert cfg.speed == 50.0
        assert cfg.carrier_f1 == 5.9e9
        assert cfg.symbol_period == 8e-6
        assert cfg.pathloss_exponents == (2.5, 2.3, 2.1)
        assert cfg.blocks_per_frame == 40 and cfg.pilot_len == 20
        assert cfg.symbols_per_frame == 1020

    def test_comment_only_file(self, tmp_path):
        cfg = load_scenario(write(tmp_path, "# just a comment\n\n"))
        assert cfg.n_users == 8

    def test_derived_quantities(self):
        cfg = ScenarioConfig()
        assert abs(cfg.carrier_f2 - (5.9e9 + 125000.0)) < 1e-3
        assert abs(cfg.doppler_max - 50.0 * 5.9e9 / 3e8) < 1e-6
        assert cfg.ris_grid == (8, 8)
        assert ScenarioConfig(n_ris_elements=12).ris_grid == (4, 3)


class TestParsing:
    def test_zero_speed_valid(self, tmp_path):
        cfg = load_scenario(write(tmp_path, "speed: 0\n"))
        assert cfg.speed == 0.0
        assert cfg.doppler_max == 0.0

    def test_zero_antennas_rejected(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_scenario(write(tmp_path, "n_bs_antennas: 0\n"))
        assert "n_bs_antennas" in str(err.value)

    def test_equals_separator_and_comments(self, tmp_path):
        cfg = load_scenario(write(tmp_path, "n_users = 4  # inline comment\n"))
        assert cfg.n_users == 4
        assert "n_users" in cfg.explicit_keys

    def test_vector_values(self, tmp_path):
        cfg = load_scenario(write(tmp_path, "bs_position: 1, 2, 3\n"))
        assert cfg.bs_position == (1.0, 2.0, 3.0)

    def test_unknown_key_reports_line(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_scenario(write(tmp_path, "\nnot_a_key: 3\n"))
        assert "line 2" in str(err.value)

    def test_bad_value_reports_key(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_scenario(write(tmp_path, "speed: fast\n"))
        assert "speed" in str(err.value)

    def test_missing_separator(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(write(tmp_path, "just words\n"))

    def test_grid_must_increase(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(write(tmp_path, "ebn0_db_grid: 0, 4, 2\n"))

    def test_phase_mode_choices(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(write(tmp_path, "ris_phase_mode: sideways\n"))
        cfg = load_scenario(write(tmp_path, "ris_phase_mode: random\n"))
        assert cfg.ris_phase_mode == "random"

    def test_noise_override(self, tmp_path):
        cfg = load_scenario(write(tmp_path, "noise_sigma2: 0\n"))
        assert cfg.noise_sigma2 == 0.0


class TestReplace:
    def test_replace_tracks_explicit_keys(self):
        cfg = ScenarioConfig().replace(speed=10.0)
        assert cfg.speed == 10.0
        assert "speed" in cfg.explicit_keys

    def test_replace_validates(self):
        with pytest.raises(ConfigError):
            ScenarioConfig().replace(n_users=0)
