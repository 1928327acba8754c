import json

import pytest
from pydantic import ValidationError

from vsa_capacity.config import (
    ExperimentSpec,
    OptimizeRequest,
    Settings,
    SweepConfig,
    TheoryRequest,
    load_config,
    parse_config,
    read_raw_config,
    resolve_settings,
)
from vsa_capacity.exceptions import ConfigError, InvalidConfigError, InvalidParameterError
from vsa_capacity.memory import ActivationKind, NoiseKind


def test_settings():
    settings = Settings.create()
    assert settings["beta"] == 1.08
    assert settings["squash_bins"] == 400
    assert Settings.create(resolution=500)["resolution"] == 500
    with pytest.raises(ConfigError):
        Settings.create(colour="blue")
    with pytest.raises(ConfigError):
        Settings.create(resolution="fine")
    with pytest.raises(ConfigError):
        Settings.create(window=0)


def test_settings_overrides_are_coerced():
    settings = resolve_settings({"squash_bins": 300.0, "beta": "1.2"})
    assert settings["squash_bins"] == 300 and isinstance(settings["squash_bins"], int)
    assert settings["beta"] == 1.2
    assert resolve_settings() == Settings.create()


def test_models_carry_settings():
    spec = parse_config({"settings": {"beta": 1.2, "snr_floor": 0.01}}, ExperimentSpec)
    assert spec.settings == {"beta": 1.2, "snr_floor": 0.01}
    assert ExperimentSpec().settings == {}
    assert OptimizeRequest(settings={"tail_cap": 50}).settings["tail_cap"] == 50
    with pytest.raises(ConfigError):
        parse_config({"settings": {"colour": 1}}, ExperimentSpec)
    with pytest.raises(ConfigError):
        parse_config({"variant": "snr", "snr": [1.0], "settings": {"resolution": 1}}, TheoryRequest)


def test_json_config(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"scheme": "HRR", "binding": "Circulant", "n_dim": 300, "lookbacks": [0, 3]}))
    spec = load_config(path, ExperimentSpec, trials=50, seed=None)
    assert spec.n_dim == 300 and spec.lookbacks == (0, 3)
    assert spec.trials == 50 and spec.seed == 0


def test_flat_config(tmp_path):
    path = tmp_path / "spec.conf"
    path.write_text(
        "activation = ClippedLinear\nkappa = 4\nlength = 12\nlookbacks = [0, 11]\nnoise = readout\nnoise_level = 0.5\n"
    )
    spec = load_config(path, ExperimentSpec)
    assert spec.activation is ActivationKind.CLIPPED
    assert spec.kappa == 4 and spec.length == 12
    assert spec.noise is NoiseKind.READOUT
    assert spec.network_config().activation.bound == 4


def test_bad_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        read_raw_config(broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        read_raw_config(listing)
    with pytest.raises(ConfigError):
        read_raw_config(tmp_path / "missing.json")
    flat = tmp_path / "bad.conf"
    flat.write_text("no separator here\n")
    with pytest.raises(ConfigError):
        read_raw_config(flat)


def test_validation_errors():
    with pytest.raises(ConfigError):
        parse_config({"n_dim": "many"}, ExperimentSpec)
    with pytest.raises(ConfigError):
        parse_config({"unknown_field": 1}, ExperimentSpec)
    with pytest.raises(ConfigError):
        parse_config({"objective": "N"}, OptimizeRequest)
    with pytest.raises(InvalidParameterError):
        TheoryRequest()


def test_domain_errors_become_config_errors_when_parsed():
    with pytest.raises(ConfigError):
        parse_config({"length": 3, "lookbacks": [7]}, ExperimentSpec)
    with pytest.raises(ConfigError):
        parse_config(
            {"scheme": "HRR", "binding": "Circulant", "noise": "bit_flip", "noise_level": 0.1},
            ExperimentSpec,
        )
    with pytest.raises(ConfigError):
        parse_config({"variant": "snr"}, TheoryRequest)
    with pytest.raises(ConfigError):
        parse_config({"grid": {"n_dim": []}}, SweepConfig)


class TestExperimentSpec:
    def test_defaults(self):
        spec = ExperimentSpec()
        assert (spec.n_dim, spec.n_tokens, spec.trials) == (1000, 27, 1000)

    def test_frozen_and_replace(self):
        spec = ExperimentSpec()
        with pytest.raises(ValidationError):
            spec.n_dim = 5
        changed = spec.replace(n_dim=64)
        assert changed.n_dim == 64 and spec.n_dim == 1000

    def test_invalid_combinations(self):
        with pytest.raises(InvalidConfigError):
            ExperimentSpec(scheme="HRR", binding="Circulant", noise="bit_flip", noise_level=0.1)
        with pytest.raises(InvalidConfigError):
            ExperimentSpec(filled=True)
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(length=5, lookbacks=(5,))
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(lookbacks=())
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(input_sparsity=1.5)

    def test_filled_ignores_length(self):
        spec = ExperimentSpec(contraction=0.9, filled=True, length=0, lookbacks=(0, 200))
        assert spec.filled


def test_sweep_points():
    sweep = SweepConfig(grid={"n_dim": [100, 200], "length": [5, 10, 20]})
    points = sweep.points()
    assert [(p.n_dim, p.length) for p in points] == [
        (100, 5), (100, 10), (100, 20), (200, 5), (200, 10), (200, 20)
    ]
    assert SweepConfig().points() == [ExperimentSpec()]
