import json

import pytest

from c2f_retrieval.config import ConfigError, EngineConfig, config_from_dict, load_config, save_config


def test_defaults_are_the_reference_operating_point():
    config = EngineConfig()

    assert config.hsv_dims == (20, 10, 5)
    assert config.alpha == 0.5
    assert (config.codebook_size, config.d_b, config.h_t, config.sigma) == (20000, 128, 52, 26.0)
    assert config.ma == 3
    assert config.candidates == 1000


def test_save_and_load(tmp_path):
    config = EngineConfig(codebook_size=64, candidates=50, weights_enabled=False)

    assert load_config(save_config(config, tmp_path / "c.json")) == config


def test_overrides_skip_none_and_reject_unknown_keys():
    config = EngineConfig().with_overrides(candidates=10, ma=None)

    assert config.candidates == 10
    assert config.ma == 3
    with pytest.raises(ConfigError):
        EngineConfig().with_overrides(bins=4)


def test_fingerprint_tracks_values():
    assert EngineConfig().fingerprint() == EngineConfig().fingerprint()
    assert EngineConfig().fingerprint() != EngineConfig(seed=1).fingerprint()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 0.0},
        {"candidates": 0},
        {"h_t": 200},
        {"sigma": 0.0},
        {"tf_mode": "burst"},
        {"hsv_dims": (4, 4)},
        {"version": 99},
    ],
)
def test_out_of_range_values_are_rejected(kwargs):
    with pytest.raises(ConfigError):
        EngineConfig(**kwargs)


def test_unknown_keys_in_file_are_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"codebook_size": 8, "colour_space": "lab"}))

    with pytest.raises(ConfigError):
        load_config(path)


def test_broken_json_is_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{")

    with pytest.raises(ConfigError):
        load_config(path)


def test_pipeline_config_carries_run_parameters():
    config = config_from_dict({"candidates": 7, "ma": 2, "tf_mode": "word"})

    run = config.pipeline_config(mode="bow")

    assert (run.K, run.ma, run.tf_mode, run.mode) == (7, 2, "word", "bow")
