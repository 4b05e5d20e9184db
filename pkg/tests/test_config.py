import json

import pytest

from refine.config import Config, build_provider, load_config
from refine.errors import TransportError
from refine.providers import FixtureProvider, HttpProvider, ProviderRequest, TextPart


class TestLoadConfig:
    def test_defaults(self):
        config = load_config(env={})
        assert config.index_path is None
        assert config.data_dir == "refine-data"
        assert config.fixture_mode == "off"
        assert config.top_k == 8
        assert config.n_max == 10
        assert config.workers == 4
        assert config.request_timeout == 120.0

    def test_file_values(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"index_path": "papers.idx", "top_k": 5}))
        config = load_config(path, env={})
        assert config.index_path == "papers.idx"
        assert config.top_k == 5
        assert config.n_max == 10  # untouched default

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"topk": 5}))
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(path, env={})

    def test_env_overrides_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"top_k": 5}))
        config = load_config(path, env={"REFINE_TOP_K": "11"})
        assert config.top_k == 11

    def test_env_casts(self):
        config = load_config(env={
            "REFINE_TOP_K": "3",
            "REFINE_REQUEST_TIMEOUT": "7.5",
            "REFINE_FIXTURES": "fx.jsonl",
            "REFINE_FIXTURE_MODE": "replay_strict",
        })
        assert config.top_k == 3
        assert config.request_timeout == 7.5
        assert config.fixture_path == "fx.jsonl"
        assert config.fixture_mode == "replay_strict"

    def test_empty_env_value_ignored(self):
        config = load_config(env={"REFINE_INDEX": ""})
        assert config.index_path is None

    def test_bad_fixture_mode_rejected(self):
        with pytest.raises(ValueError, match="fixture_mode"):
            load_config(env={"REFINE_FIXTURE_MODE": "cache"})


class TestBuildProvider:
    def test_unconfigured_provider_fails_fast(self):
        provider = build_provider(Config())
        request = ProviderRequest(kind="chat", stage="compare_contrast",
                                  user_parts=(TextPart("x"),))
        with pytest.raises(TransportError, match="no model provider"):
            provider.send(request)

    def test_http_backend_when_urls_set(self):
        provider = build_provider(Config(provider_url="http://localhost:9",
                                         embed_url="http://localhost:9"))
        assert isinstance(provider, HttpProvider)

    def test_replay_strict_needs_no_backend(self, tmp_path):
        provider = build_provider(Config(
            fixture_mode="replay_strict",
            fixture_path=str(tmp_path / "fx.jsonl")))
        assert isinstance(provider, FixtureProvider)

    def test_record_without_backend_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="record"):
            build_provider(Config(fixture_mode="record",
                                  fixture_path=str(tmp_path / "fx.jsonl")))

    def test_fixture_mode_needs_a_path(self):
        with pytest.raises(ValueError, match="fixture_path"):
            build_provider(Config(fixture_mode="replay"))

    def test_replay_wraps_backend_when_present(self, tmp_path):
        provider = build_provider(Config(
            provider_url="http://localhost:9",
            fixture_mode="replay",
            fixture_path=str(tmp_path / "fx.jsonl")))
        assert isinstance(provider, FixtureProvider)
