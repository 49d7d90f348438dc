import pytest

from modules.config_loader import DEFAULTS, load_config


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("REEDY_MAX_SEARCH", "REEDY_LOG_LEVEL", "REEDY_SEED"):
        monkeypatch.delenv(name, raising=False)


def test_missing_file_gives_defaults(tmp_path):
    assert load_config(str(tmp_path / "absent.json")) == DEFAULTS


def test_file_keys_are_upper_cased(write_json):
    cfg = load_config(write_json("cfg.json", {"max_search": 50, "seed": 7}))
    assert cfg["MAX_SEARCH"] == 50
    assert cfg["SEED"] == 7
    assert cfg["LOG_LEVEL"] == DEFAULTS["LOG_LEVEL"]


def test_environment_wins_over_file(write_json, monkeypatch):
    monkeypatch.setenv("REEDY_MAX_SEARCH", "12")
    monkeypatch.setenv("REEDY_LOG_LEVEL", "DEBUG")
    cfg = load_config(write_json("cfg.json", {"MAX_SEARCH": 50}))
    assert cfg["MAX_SEARCH"] == 12
    assert cfg["LOG_LEVEL"] == "DEBUG"


def test_non_integer_override_is_ignored(tmp_path, monkeypatch):
    monkeypatch.setenv("REEDY_SEED", "soon")
    assert load_config(str(tmp_path / "absent.json"))["SEED"] == DEFAULTS["SEED"]


def test_unreadable_file_falls_back(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text("{not json", encoding="utf-8")
    assert load_config(str(bad)) == DEFAULTS
