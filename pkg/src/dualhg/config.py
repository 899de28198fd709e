"""Run configuration: ``key = value`` files, flag overrides, validation."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, fields

from .errors import ConfigError
from .evaluate import COMBINERS, LinkProtocol
from .model import ArchConfig
from .train import NEG_MODES, TrainConfig

__all__ = ["RunConfig", "parse_config", "parse_value", "config_keys"]

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run, flat. ``lam`` is spelled ``lambda`` in files and flags."""

    # architecture
    mode: str = "asym"
    layers: int = 2
    dim: int = 32
    intra: bool = True
    inter: bool = True
    dropout: float = 0.5
    share_intra: bool = False
    # optimization
    lr: float = 0.002
    epochs: int = 3000
    weight_decay: float = 5e-4
    lam: float = 0.5
    neg_samples: int = 1
    neg_mode: str = "cross_domain"
    seed: int = 0
    # input features
    feature_dim: int = 32
    feature_epochs: int = 500
    feature_lr: float = 0.01
    # evaluation protocol
    train_fraction: float = 0.5
    repeats: int = 5
    folds: int = 5
    combiner: str = "concat"
    nc_lr: float = 0.05
    nc_epochs: int = 100
    # files
    edges: str | None = None
    attrs_u: str | None = None
    attrs_v: str | None = None
    labels: str | None = None
    log: str | None = None

    def __post_init__(self):
        if self.mode not in ("sym", "asym"):
            raise ConfigError(f"mode: must be sym or asym, got {self.mode!r}")
        if self.neg_mode not in NEG_MODES:
            raise ConfigError(f"neg_mode: must be one of {NEG_MODES}, got {self.neg_mode!r}")
        if self.combiner not in COMBINERS:
            raise ConfigError(f"combiner: must be one of {COMBINERS}, got {self.combiner!r}")
        checks = [
            ("layers", self.layers >= 1, ">= 1"),
            ("dim", self.dim >= 1, ">= 1"),
            ("dropout", 0.0 <= self.dropout < 1.0, "in [0, 1)"),
            ("lr", self.lr > 0, "> 0"),
            ("epochs", self.epochs >= 0, ">= 0"),
            ("weight_decay", self.weight_decay >= 0, ">= 0"),
            ("lambda", 0.0 <= self.lam <= 1.0, "in [0, 1]"),
            ("neg_samples", self.neg_samples >= 1, ">= 1"),
            ("seed", self.seed >= 0, ">= 0"),
            ("feature_dim", self.feature_dim >= 1, ">= 1"),
            ("feature_epochs", self.feature_epochs >= 0, ">= 0"),
            ("feature_lr", self.feature_lr > 0, "> 0"),
            ("train_fraction", 0.0 < self.train_fraction < 1.0, "in (0, 1)"),
            ("repeats", self.repeats >= 1, ">= 1"),
            ("folds", self.folds >= 1, ">= 1"),
            ("nc_lr", self.nc_lr > 0, "> 0"),
            ("nc_epochs", self.nc_epochs >= 1, ">= 1"),
        ]
        for key, ok, rule in checks:
            if not ok:
                raise ConfigError(f"{key}: must be {rule}, got {self.get(key)!r}")

    def get(self, key: str):
        return getattr(self, _attr(key))

    def arch(self, k: int) -> ArchConfig:
        return ArchConfig(mode=self.mode, num_layers=self.layers, dim=self.dim, intra=self.intra,
                          inter=self.inter, dropout=self.dropout, k=k,
                          share_intra_weights=self.share_intra)

    def train_config(self, log_path: str | None = None) -> TrainConfig:
        return TrainConfig(lr=self.lr, epochs=self.epochs, weight_decay=self.weight_decay,
                           lam=self.lam, neg_samples=self.neg_samples, neg_mode=self.neg_mode,
                           seed=self.seed, log_path=log_path)

    def protocol(self) -> LinkProtocol:
        return LinkProtocol(train_fraction=self.train_fraction, repeats=self.repeats,
                            folds=self.folds, combiner=self.combiner, seed=self.seed,
                            feature_dim=self.feature_dim, feature_epochs=self.feature_epochs,
                            feature_lr=self.feature_lr)

    def override(self, **values) -> "RunConfig":
        return dataclasses.replace(self, **{_attr(k): v for k, v in values.items()})

    def to_dict(self) -> dict:
        return {_key(f.name): getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        """Round-trippable ``key = value`` listing of the resolved config."""
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                continue
            lines.append(f"{key} = {json.dumps(value) if isinstance(value, bool) else value}")
        return "\n".join(lines) + "\n"


def _attr(key: str) -> str:
    return "lam" if key == "lambda" else key


def _key(attr: str) -> str:
    return "lambda" if attr == "lam" else attr


_FIELDS = {_key(f.name): f for f in fields(RunConfig)}


def config_keys() -> list[str]:
    return list(_FIELDS)


def parse_value(key: str, raw: str):
    """Convert the text of one value to the type of ``key``."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELDS[key].type
    text = raw.strip()
    if kind.startswith("str | None"):
        return text or None
    if kind == "str":
        return text
    if kind == "bool":
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from None


def _parse_lines(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = parse_value(key, raw)
    return values


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file's ``key = value`` lines, then ``overrides``.

    Override values may be raw strings (parsed like file values) or already
    typed. Unknown keys and out-of-range values raise :class:`ConfigError`.
    """
    values = _parse_lines(text or "")
    for key, value in (overrides or {}).items():
        values[key] = parse_value(key, value) if isinstance(value, str) else value
    unknown = set(values) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    try:
        return RunConfig(**{_attr(k): v for k, v in values.items()})
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
