import pytest

from csit_sharing.channel import AntennaConfig
from csit_sharing.config import (
    antenna_config,
    describe,
    load_config,
    parse_config_text,
    parse_value,
    resolve,
)
from csit_sharing.errors import ConfigError


@pytest.mark.parametrize(
    "text, expected",
    [("3", 3), ("0.5", 0.5), ("yes", True), ("off", False), ("20, 30, 40", (20, 30, 40)), ("rvq", "rvq")],
)
def test_parse_value(text, expected):
    assert parse_value(text) == expected


def test_parse_nested_sections():
    nested = parse_config_text(
        """
        # heterogeneous network
        users = 3
        antennas.n_tx = 2, 1, 3   # per user
        topology.gamma = 0.5
        """
    )
    assert nested == {"users": 3, "antennas": {"n_tx": (2, 1, 3)}, "topology": {"gamma": 0.5}}


@pytest.mark.parametrize("text", ["users 3", "antennas. = 2", "a = 1\na.b = 2"])
def test_parse_errors_name_the_line(text):
    with pytest.raises(ConfigError, match="line"):
        parse_config_text(text)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))


def test_resolve_merges_and_coerces():
    defaults = {"draws": 100, "snr_db": (20.0,), "topology.gamma": 0.5, "precoder": "zf-distributed"}
    settings = resolve(defaults, {"draws": 7, "snr_db": 40, "topology": {"gamma": 1}})
    assert settings == {"draws": 7, "snr_db": (40.0,), "topology.gamma": 1.0, "precoder": "zf-distributed"}


def test_resolve_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="Valid settings: draws"):
        resolve({"draws": 1}, {"drawz": 2})


def test_resolve_rejects_wrong_types():
    with pytest.raises(ConfigError):
        resolve({"draws": 1}, {"draws": 2.5})
    with pytest.raises(ConfigError):
        resolve({"gamma": 0.5}, {"gamma": "high"})


def test_antenna_config_broadcasts_single_values():
    config = antenna_config({"users": 3, "antennas.n_tx": (2,), "antennas.n_rx": (2, 1, 3), "antennas.d": 1})
    assert config == AntennaConfig(K=3, n_tx=(2, 2, 2), n_rx=(2, 1, 3), d=(1, 1, 1))
    with pytest.raises(ConfigError):
        antenna_config({"users": 3, "antennas.n_tx": (2, 2), "antennas.n_rx": (2,), "antennas.d": (1,)})


def test_describe_lists_defaults():
    text = describe({"snr_db": (20.0, 30.0), "verbose": False, "users": 3})
    assert text.splitlines() == ["snr_db = 20.0, 30.0", "users = 3", "verbose = false"]
