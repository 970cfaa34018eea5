"""Experiment configuration stored as a JSON file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Unreadable, malformed or inconsistent configuration."""


DEFAULT_TOLERANCES = {
    "quadrature_epsrel": 1e-4,
}


@dataclass
class ExperimentConfig:
    """Everything one CLI command needs besides the seed.

    ``model`` is a model spec (``{"id": ..., **params}``), ``region`` a
    region dict as produced by ``SamplingRegion.to_dict``.  ``initial`` is the
    starting sequence for ``extend``; ``paradox`` holds ``x``, ``y``,
    ``interval`` and optionally ``theta_grid`` as ``[start, stop, num]``.
    """

    model: dict = field(default_factory=dict)
    region: dict | None = None
    seed: int = 0
    replicates: int = 1
    draws: int = 1000
    steps: int = 10_000
    paths: int = 1
    initial: list | None = None
    paradox: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str | None = None

    def __post_init__(self):
        if not isinstance(self.model, dict):
            raise ConfigError("'model' must be an object")
        for name in ("seed", "replicates", "draws", "steps", "paths"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name!r} must be a nonnegative integer")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}

    @property
    def tol(self) -> float:
        return float(self.tolerances["quadrature_epsrel"])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)
