"""Configuration resolution: defaults, file, env vars, flag precedence."""
import pytest

from tda.config import AdapterParams, TdaConfig, UpdateOrder, config_to_toml, load_config
from tda.errors import InvalidConfig


class TestDefaults:
    def test_searched_defaults(self):
        cfg = load_config()
        assert cfg.pos_capacity == 3
        assert cfg.neg_capacity == 2
        assert cfg.p_l == 0.03
        assert (cfg.tau_l, cfg.tau_h) == (0.2, 0.5)
        assert cfg.pos_params == AdapterParams(2.0, 5.0)
        assert cfg.neg_params == AdapterParams(2.0, 5.0)
        assert cfg.logit_scale == 100.0
        assert cfg.update_order is UpdateOrder.UPDATE_THEN_PREDICT

    def test_empty_file_keeps_defaults(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("")
        assert load_config(path) == TdaConfig()


class TestValidation:
    def test_tau_ordering(self):
        with pytest.raises(InvalidConfig, match="tau"):
            TdaConfig(tau_l=0.5, tau_h=0.2)

    def test_tau_equal_rejected(self):
        with pytest.raises(InvalidConfig, match="tau"):
            TdaConfig(tau_l=0.3, tau_h=0.3)

    def test_p_l_bounds(self):
        with pytest.raises(InvalidConfig, match="p_l"):
            TdaConfig(p_l=0.0)
        with pytest.raises(InvalidConfig, match="p_l"):
            TdaConfig(p_l=1.0)

    def test_capacities(self):
        with pytest.raises(InvalidConfig, match="pos_capacity"):
            TdaConfig(pos_capacity=0)
        with pytest.raises(InvalidConfig, match="neg_capacity"):
            TdaConfig(neg_capacity=-1)

    def test_logit_scale(self):
        with pytest.raises(InvalidConfig, match="logit_scale"):
            TdaConfig(logit_scale=0.0)


class TestPrecedence:
    def test_flag_beats_file(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("pos_capacity = 6\n")
        cfg = load_config(path, overrides={"pos_capacity": 3})
        assert cfg.pos_capacity == 3

    def test_file_beats_default(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("p_l = 0.1\nneg_alpha = 1.5\n")
        cfg = load_config(path)
        assert cfg.p_l == 0.1
        assert cfg.neg_params.alpha == 1.5
        assert cfg.pos_params.alpha == 2.0

    def test_env_beats_file_flag_beats_env(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("tau_h = 0.7\n")
        env = {"TDA_TAU_H": "0.8"}
        assert load_config(path, env=env).tau_h == 0.8
        assert load_config(path, env=env, overrides={"tau_h": 0.9}).tau_h == 0.9

    def test_none_overrides_ignored(self):
        cfg = load_config(overrides={"p_l": None, "tau_l": None})
        assert cfg == TdaConfig()


class TestRejection:
    def test_unknown_key(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("shot_count = 3\n")
        with pytest.raises(InvalidConfig, match="shot_count"):
            load_config(path)

    def test_invalid_combination_from_file(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("tau_l = 0.5\ntau_h = 0.2\n")
        with pytest.raises(InvalidConfig, match="tau"):
            load_config(path)

    def test_missing_file(self):
        with pytest.raises(InvalidConfig, match="not found"):
            load_config("/nonexistent/cfg.toml")

    def test_bad_type(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("pos_capacity = 2.5\n")
        with pytest.raises(InvalidConfig, match="pos_capacity"):
            load_config(path)

    def test_bad_update_order(self):
        with pytest.raises(InvalidConfig, match="update_order"):
            load_config(overrides={"update_order": "sideways"})


class TestRoundTrip:
    def test_toml_echo_reloads_identically(self, tmp_path):
        cfg = TdaConfig(
            pos_capacity=5, neg_capacity=4, p_l=0.07, tau_l=0.1, tau_h=0.9,
            pos_params=AdapterParams(1.0, 2.0), neg_params=AdapterParams(3.0, 4.0),
            logit_scale=50.0, update_order=UpdateOrder.PREDICT_THEN_UPDATE,
        )
        path = tmp_path / "echo.toml"
        path.write_text(config_to_toml(cfg))
        assert load_config(path) == cfg
