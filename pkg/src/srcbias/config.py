"""Flat ``key = value`` run configuration with command-line overrides."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .metrics import DEFAULT_KS
from .ranking import Pooling
from .rng import derive_seed

DEFAULT_SEED = 42


class ConfigError(ValueError):
    pass


def _key(name: str) -> str:
    return name.strip().lower().replace("-", "_")


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines (``#`` comments allowed, no sections)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), delimiters=("=",))
    parser.optionxform = _key
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return dict(parser["run"])


def _parse_ks(value) -> tuple[int, ...]:
    if isinstance(value, (tuple, list)):
        ks = tuple(int(k) for k in value)
    else:
        ks = tuple(int(k) for k in str(value).replace(" ", "").split(",") if k)
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"ks must be positive integers, got {value!r}")
    return ks


@dataclass
class RunConfig:
    real: str | None = None
    ai: str | None = None
    queries: str | None = None
    rel: str | None = None
    pooling: str = "positional-ramp"
    frames: int | None = None
    seed: int = DEFAULT_SEED
    ks: tuple[int, ...] = DEFAULT_KS
    out: str = "out"
    seeds: int = 1
    workers: int = 1
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        try:
            Pooling.parse(self.pooling)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.frames is not None and self.frames < 1:
            raise ConfigError("frames must be at least 1")
        if self.seeds < 1 or self.workers < 1:
            raise ConfigError("seeds and workers must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @classmethod
    def build(cls, file_values: dict[str, str], overrides: dict) -> "RunConfig":
        """Merge config-file values with non-None command-line overrides."""
        merged: dict = {_key(k): v for k, v in file_values.items()}
        merged.update({_key(k): v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(cls)} - {"extra"}
        kwargs, extra = {}, {}
        for k, v in merged.items():
            if k in known:
                kwargs[k] = v
            else:
                extra[k] = v
        try:
            for name in ("frames", "seeds", "workers"):
                if name in kwargs and kwargs[name] not in (None, ""):
                    kwargs[name] = int(kwargs[name])
                elif name in kwargs:
                    kwargs[name] = None if name == "frames" else 1
            if "seed" in kwargs:
                kwargs["seed"] = int(kwargs["seed"])
        except ValueError as exc:
            raise ConfigError(f"invalid integer in config: {exc}") from None
        if "ks" in kwargs:
            kwargs["ks"] = _parse_ks(kwargs["ks"])
        return cls(**kwargs, extra=extra)

    def derived_seed(self, command: str) -> int:
        """Seed for one subcommand; distinct commands never share a stream."""
        return derive_seed(self.seed, command)

    def get(self, name: str, default=None, cast=str):
        value = self.extra.get(_key(name))
        if value is None or value == "":
            return default
        try:
            return cast(value)
        except (TypeError, ValueError):
            raise ConfigError(f"invalid value for {name}: {value!r}") from None

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"missing required setting(s): {', '.join(missing)}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ks"] = list(self.ks)
        d["extra"] = dict(sorted(self.extra.items()))
        return d
