"""Runtime configuration: JSON file plus REFINE_* environment overrides.

Also assembles the provider stack (HTTP backend wrapped in the fixture
store) that the CLI and service share.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import TransportError
from .providers import FixtureProvider, FixtureStore, HttpProvider

FIXTURE_MODES = ("off", "record", "replay", "replay_strict")


@dataclass
class Config:
    index_path: str | None = None
    data_dir: str = "refine-data"
    provider_url: str | None = None
    embed_url: str | None = None
    api_key: str | None = None
    request_timeout: float = 120.0
    fixture_path: str | None = None
    fixture_mode: str = "off"
    top_k: int = 8
    n_max: int = 10
    workers: int = 4
    token_budget: int = 12000


_ENV_KEYS = {
    "REFINE_INDEX": ("index_path", str),
    "REFINE_DATA_DIR": ("data_dir", str),
    "REFINE_PROVIDER_URL": ("provider_url", str),
    "REFINE_EMBED_URL": ("embed_url", str),
    "REFINE_API_KEY": ("api_key", str),
    "REFINE_REQUEST_TIMEOUT": ("request_timeout", float),
    "REFINE_FIXTURES": ("fixture_path", str),
    "REFINE_FIXTURE_MODE": ("fixture_mode", str),
    "REFINE_TOP_K": ("top_k", int),
    "REFINE_N_MAX": ("n_max", int),
    "REFINE_WORKERS": ("workers", int),
    "REFINE_TOKEN_BUDGET": ("token_budget", int),
}


def load_config(path=None, env=None) -> Config:
    """Read config JSON (when given/present) and apply env overrides."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(Config)}
        for key, value in data.items():
            if key in known:
                values[key] = value
            else:
                raise ValueError(f"unknown config key {key!r}")
    for env_key, (name, cast) in _ENV_KEYS.items():
        if env_key in env and env[env_key] != "":
            values[name] = cast(env[env_key])
    config = Config(**values)
    if config.fixture_mode not in FIXTURE_MODES:
        raise ValueError(f"fixture_mode must be one of {FIXTURE_MODES}, "
                         f"got {config.fixture_mode!r}")
    return config


class _UnconfiguredProvider:
    """Placeholder when no backend is configured: every call fails fast."""

    def send(self, request):
        raise TransportError(
            "no model provider configured (set provider_url/embed_url or "
            "run against recorded fixtures)")


def build_provider(config: Config):
    """Compose the provider stack for this config.

    fixture_mode off: plain HTTP backend. record/replay: fixture store in
    front of the backend. replay_strict: fixture store only, no network.
    """
    backend = None
    if config.provider_url or config.embed_url:
        backend = HttpProvider(
            provider_url=config.provider_url or "",
            embed_url=config.embed_url or "",
            api_key=config.api_key,
            timeout=config.request_timeout,
        )

    if config.fixture_mode == "off":
        return backend if backend is not None else _UnconfiguredProvider()

    if not config.fixture_path:
        raise ValueError(f"fixture_mode {config.fixture_mode!r} needs fixture_path")
    store = FixtureStore(config.fixture_path, mode=config.fixture_mode)
    inner = backend if config.fixture_mode != "replay_strict" else None
    if config.fixture_mode == "record" and inner is None:
        raise ValueError("record mode needs a configured provider backend")
    return FixtureProvider(store, inner=inner)
