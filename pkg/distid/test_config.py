#!/usr/bin/env python3
"""Tests for config.py: YAML loading, environment overrides and defaults."""

import sys
from pathlib import Path

_repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(_repo_root))

from distid.config import Config  # noqa: E402


def test_defaults_without_a_file(tmp_path, monkeypatch):
    monkeypatch.delenv('DISTID_BUDGET', raising=False)
    monkeypatch.delenv('DISTID_SEED', raising=False)
    cfg = Config()
    cfg.load(str(tmp_path / 'missing.yaml'))
    assert cfg.get('solver', 'budget') == 10_000_000
    assert cfg.get('corpus', 'seed') == 2024
    assert cfg.get('gadgets', 'max_ps_vertices') == 22
    assert cfg.get('cli', 'progress') is False
    assert cfg.get('nope', 'key', default='fallback') == 'fallback'


def test_yaml_values_win_over_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv('DISTID_BUDGET', raising=False)
    path = tmp_path / 'config.yaml'
    path.write_text('solver:\n  budget: 500\ncorpus:\n  max_n: 5\n')
    cfg = Config()
    cfg.load(str(path))
    assert cfg.get('solver', 'budget') == 500
    assert cfg.get('corpus', 'max_n') == 5
    assert cfg.get('corpus', 'count') == 50


def test_environment_overrides(tmp_path, monkeypatch):
    path = tmp_path / 'config.yaml'
    path.write_text('solver:\n  budget: 500\n')
    monkeypatch.setenv('DISTID_BUDGET', '42')
    monkeypatch.setenv('DISTID_PROGRESS', 'yes')
    monkeypatch.setenv('DISTID_LOG_LEVEL', 'debug')
    cfg = Config()
    cfg.load(str(path))
    assert cfg.get('solver', 'budget') == 42
    assert cfg.get('cli', 'progress') is True
    assert cfg.get('logging', 'level') == 'DEBUG'


def test_config_path_from_environment(tmp_path, monkeypatch):
    path = tmp_path / 'other.yaml'
    path.write_text('roundtrip:\n  variants: 9\n')
    monkeypatch.setenv('DISTID_CONFIG', str(path))
    cfg = Config()
    assert cfg.get('roundtrip', 'variants') == 9
