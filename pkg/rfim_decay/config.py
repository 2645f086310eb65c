"""Experiment configuration: the SETTINGS table and the ``key = value`` file reader."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar

from .errors import ConfigError
from .montecarlo import DEFAULT_SWEEP_BUDGET

if TYPE_CHECKING:
    from collections.abc import Mapping

logger = logging.getLogger("rfim_decay")

SWEEP_ENGINES = ("auto", "exact", "mc")


def parse_float(value: Any) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    return float(value)


def _parse_int(value: Any) -> int:
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"{value!r} is not an integer")
    return int(value)


def _split(value: Any) -> list[Any]:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    if isinstance(value, Iterable):
        return list(value)
    return [value]


def _float_list(value: Any) -> tuple[float, ...]:
    out = tuple(parse_float(v) for v in _split(value))
    if not out:
        raise ValueError("empty list")
    return out


def _int_list(value: Any) -> tuple[int, ...]:
    out = tuple(_parse_int(v) for v in _split(value))
    if not out:
        raise ValueError("empty list")
    return out


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{value!r} is not a boolean")


def _optional(parse: Any) -> Any:
    def parse_optional(value: Any) -> Any:
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
            return None
        return parse(value)

    return parse_optional


def _engine(value: Any) -> str:
    text = str(value).strip()
    if text not in SWEEP_ENGINES:
        raise ValueError(f"{text!r} is not one of {', '.join(SWEEP_ENGINES)}")
    return text


def _positive_int(value: Any) -> int:
    out = _parse_int(value)
    if out < 1:
        raise ValueError(f"{value!r} must be >= 1")
    return out


SETTINGS: dict[str, dict[str, Any]] = {
    "region": {
        "name": "Region",
        "description": "Region for the block experiment: square:<n>, rect:<nx>x<ny> or sites:<path>",
        "default": "square:6",
        "validator": str,
    },
    "beta": {
        "name": "Inverse temperatures",
        "description": "Comma separated list of beta values; 'inf' selects the ground-state engine",
        "default": (1.0,),
        "validator": _float_list,
    },
    "v": {
        "name": "Field variance",
        "description": "Variance of the Gaussian random field",
        "default": 1.0,
        "validator": parse_float,
    },
    "n_list": {
        "name": "Square sides",
        "description": "Comma separated sides of the nested centred squares of the decay experiment",
        "default": (4, 8, 12, 16),
        "validator": _int_list,
    },
    "replicas": {
        "name": "Disorder replicas",
        "description": "Number of disorder realizations per (n, beta) row",
        "default": 20,
        "validator": _positive_int,
    },
    "seed": {
        "name": "Seed",
        "description": "Master seed of the disorder and sweep streams",
        "default": 0,
        "validator": _parse_int,
    },
    "engine": {
        "name": "Engine",
        "description": "exact, mc, or auto (exact when within capacity, otherwise mc)",
        "default": "auto",
        "validator": _engine,
    },
    "h": {
        "name": "Block shift",
        "description": "Field shift on the block; empty uses sqrt(v)*sqrt(log log n)/(2m)",
        "default": None,
        "validator": _optional(parse_float),
    },
    "block": {
        "name": "Block side",
        "description": "Side m of the centred block for the decoupling section; empty skips it",
        "default": None,
        "validator": _optional(_positive_int),
    },
    "out_dir": {
        "name": "Output directory",
        "description": "Directory receiving decay.csv, decay.json and decay.svg",
        "default": "results",
        "validator": str,
    },
    "workers": {
        "name": "Workers",
        "description": "Thread pool size for replica-level parallelism",
        "default": 1,
        "validator": _positive_int,
    },
    "samples": {
        "name": "CFTP samples",
        "description": "Coupled CFTP samples per disorder in mc mode",
        "default": 200,
        "validator": _positive_int,
    },
    "sweep_budget": {
        "name": "Sweep budget",
        "description": "Largest CFTP window before falling back to forward coupling",
        "default": DEFAULT_SWEEP_BUDGET,
        "validator": _positive_int,
    },
    "k_max": {
        "name": "Truncation order",
        "description": "Hermite truncation order of the block statistics",
        "default": 3,
        "validator": _positive_int,
    },
    "plot": {
        "name": "Plot",
        "description": "Write decay.svg",
        "default": True,
        "validator": _parse_bool,
    },
    "timing": {
        "name": "Timing",
        "description": "Record wall time per row; false writes 0.0 so outputs are byte-identical",
        "default": True,
        "validator": _parse_bool,
    },
}


def validate(key: str, value: Any) -> Any:
    """Run the SETTINGS validator for ``key``; failures become ConfigError."""
    try:
        setting = SETTINGS[key]
    except KeyError:
        raise ConfigError(f"Unknown config key {key!r}; valid keys: {', '.join(SETTINGS)}") from None
    try:
        return setting["validator"](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid value {value!r} for {key!r}: {exc}") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    """Raw ``key = value`` pairs; ``#`` starts a comment, blank lines are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"Config file {path} is not ASCII") from None
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line.strip()!r}")
        key = key.strip()
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep configuration; every field has the SETTINGS default."""

    region: str = SETTINGS["region"]["default"]
    beta: tuple[float, ...] = SETTINGS["beta"]["default"]
    v: float = SETTINGS["v"]["default"]
    n_list: tuple[int, ...] = SETTINGS["n_list"]["default"]
    replicas: int = SETTINGS["replicas"]["default"]
    seed: int = SETTINGS["seed"]["default"]
    engine: str = SETTINGS["engine"]["default"]
    h: float | None = SETTINGS["h"]["default"]
    block: int | None = SETTINGS["block"]["default"]
    out_dir: Path = field(default_factory=lambda: Path(SETTINGS["out_dir"]["default"]))
    workers: int = SETTINGS["workers"]["default"]
    samples: int = SETTINGS["samples"]["default"]
    sweep_budget: int = SETTINGS["sweep_budget"]["default"]
    k_max: int = SETTINGS["k_max"]["default"]
    plot: bool = SETTINGS["plot"]["default"]
    timing: bool = SETTINGS["timing"]["default"]

    PATH_KEYS: ClassVar[frozenset[str]] = frozenset({"out_dir"})

    def __post_init__(self) -> None:
        for beta in self.beta:
            if math.isnan(beta) or beta < 0:
                raise ConfigError(f"beta values must be in [0, inf], got {beta}")
        if not (self.v > 0 and math.isfinite(self.v)):
            raise ConfigError(f"v must be a positive real, got {self.v}")
        if any(n < 1 for n in self.n_list):
            raise ConfigError(f"n_list entries must be >= 1, got {list(self.n_list)}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> ExperimentConfig:
        values: dict[str, Any] = {}
        for key, raw in mapping.items():
            value = validate(key, raw)
            values[key] = Path(value) if key in cls.PATH_KEYS else value
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        config = cls.from_mapping(read_config_file(path))
        logger.debug("Loaded config from %s: %s", path, config)
        return config

    def as_dict(self) -> dict[str, Any]:
        return {key: str(getattr(self, key)) if key in self.PATH_KEYS else getattr(self, key) for key in SETTINGS}
