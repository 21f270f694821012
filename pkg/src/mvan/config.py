"""Experiment configuration: dataclasses, INI file loading, overrides.

Defaults reproduce the reference setup: 300-d embeddings, 2-layer BiGRU with
hidden size 300, 5-head 2-layer graph attention, dropout 0.5, Adam at 0.001,
batch size 64, 70/30 split, 10 runs. Every run writes its fully resolved
configuration next to its outputs, so the effective values are always
auditable.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .synthetic import SyntheticConfig

OUTPUT_DIR_ENV = "MVAN_OUTPUT_DIR"

VARIANTS = ("MVAN", "MVAN_TSA", "MVAN_PSA", "TSAN", "PSAN")


class ConfigError(Exception):
    """Invalid configuration file, key, or value."""


def variant_display_name(variant: str) -> str:
    return variant.replace("_", "-")


def normalize_variant(name: str) -> str:
    v = name.strip().upper().replace("-", "_")
    if v not in VARIANTS:
        raise ConfigError(
            f"unknown variant {name!r}; expected one of "
            + ", ".join(variant_display_name(x) for x in VARIANTS)
        )
    return v


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "MVAN"
    embed_dim: int = 300
    gru_hidden: int = 300
    gru_layers: int = 2
    attn_dim: int = 128
    max_len: int = 30
    vocab_cap: int = 250_000
    gat_heads: int = 5
    gat_hidden_per_head: int = 32
    gat_output_dim: int = 64
    head_hidden: int = 64
    dropout: float = 0.5
    readout: str = "mean"
    builder: str = "chain(1)"

    def validate(self) -> None:
        normalize_variant(self.variant)
        for name in (
            "embed_dim", "gru_hidden", "gru_layers", "attn_dim", "max_len",
            "gat_heads", "gat_hidden_per_head", "gat_output_dim", "head_hidden",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"model.{name} must be >= 1")
        if self.vocab_cap < 2:
            raise ConfigError("model.vocab_cap must be >= 2")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("model.dropout must be in [0, 1)")
        if self.readout not in ("mean", "max", "first_by_order"):
            raise ConfigError(f"unknown readout mode: {self.readout!r}")

    @property
    def uses_text(self) -> bool:
        return normalize_variant(self.variant) != "PSAN"

    @property
    def uses_graph(self) -> bool:
        return normalize_variant(self.variant) != "TSAN"

    @property
    def uses_word_attention(self) -> bool:
        return normalize_variant(self.variant) in ("MVAN", "TSAN")

    @property
    def uses_graph_attention(self) -> bool:
        return normalize_variant(self.variant) in ("MVAN", "MVAN_TSA", "PSAN")


@dataclass(frozen=True)
class TrainerConfig:
    batch_size: int = 64
    learning_rate: float = 0.001
    epochs: int = 100
    patience: int = 10
    val_fraction: float = 0.1

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ConfigError("trainer.batch_size must be >= 1")
        if self.epochs < 1:
            raise ConfigError("trainer.epochs must be >= 1")
        if self.patience < 0:
            raise ConfigError("trainer.patience must be >= 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("trainer.val_fraction must be in [0, 1)")
        if self.learning_rate < 0:
            raise ConfigError("trainer.learning_rate must be >= 0")


@dataclass(frozen=True)
class DataConfig:
    tweets: Optional[str] = None
    retweets: Optional[str] = None
    users: Optional[str] = None
    embeddings: Optional[str] = None

    def validate(self) -> None:
        missing = [k for k in ("tweets", "retweets", "users") if not getattr(self, k)]
        if missing:
            raise ConfigError(f"data section requires paths for: {', '.join(missing)}")


@dataclass(frozen=True)
class EarlyDetectionConfig:
    fractions: Tuple[float, ...] = (0.1, 0.2, 0.4, 0.6, 0.8, 1.0)
    mode: str = "test_only"  # or "train_and_test"

    def validate(self) -> None:
        if not self.fractions:
            raise ConfigError("early_detection.fractions must not be empty")
        for f in self.fractions:
            if not 0.0 < f <= 1.0:
                raise ConfigError(f"early_detection fraction {f} outside (0, 1]")
        if self.mode not in ("test_only", "train_and_test"):
            raise ConfigError(f"unknown early_detection.mode: {self.mode!r}")


@dataclass(frozen=True)
class ExplainConfig:
    top_k: int = 3

    def validate(self) -> None:
        if self.top_k < 1:
            raise ConfigError("explain.top_k must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n_runs: int = 10
    output_dir: str = "runs/experiment"
    split_ratio: float = 0.7
    data: Optional[DataConfig] = None
    synthetic: Optional[SyntheticConfig] = None
    model: ModelConfig = field(default_factory=ModelConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    early_detection: EarlyDetectionConfig = field(default_factory=EarlyDetectionConfig)
    explain: ExplainConfig = field(default_factory=ExplainConfig)

    def validate(self) -> None:
        if self.n_runs < 1:
            raise ConfigError("experiment.n_runs must be >= 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("experiment.split_ratio must be in (0, 1)")
        if self.data is not None and self.synthetic is not None:
            raise ConfigError("configure either [data] or [synthetic], not both")
        if self.data is None and self.synthetic is None:
            raise ConfigError("one of [data] or [synthetic] must be configured")
        if self.data is not None:
            self.data.validate()
        if self.synthetic is not None:
            try:
                self.synthetic.validate()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        self.model.validate()
        self.trainer.validate()
        self.early_detection.validate()
        self.explain.validate()


_SECTIONS = {
    "experiment": None,  # scalar fields of ExperimentConfig
    "data": DataConfig,
    "synthetic": SyntheticConfig,
    "model": ModelConfig,
    "trainer": TrainerConfig,
    "early_detection": EarlyDetectionConfig,
    "explain": ExplainConfig,
}
_EXPERIMENT_SCALARS = ("seed", "n_runs", "output_dir", "split_ratio")


def _coerce(name: str, raw: str, py_type) -> object:
    raw = raw.strip()
    try:
        if py_type is int:
            return int(raw)
        if py_type is float:
            return float(raw)
        if py_type is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if py_type is str:
            return raw
        if py_type == Optional[str]:
            return raw or None
        if py_type == Tuple[float, ...]:
            return tuple(float(x) for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from None
    raise ConfigError(f"unsupported option type for {name}")


def _field_types(cls) -> Dict[str, object]:
    return {f.name: f.type for f in dataclasses.fields(cls)}


_TYPE_NAMES = {
    "int": int,
    "float": float,
    "bool": bool,
    "str": str,
    "Optional[str]": Optional[str],
    "Tuple[float, ...]": Tuple[float, ...],
}


def _resolve_type(t):
    return _TYPE_NAMES.get(t, t) if isinstance(t, str) else t


def load_config(path: Optional[str], overrides: Optional[List[str]] = None) -> ExperimentConfig:
    """Read an INI file (optional), apply section.key=value overrides, then
    the MVAN_OUTPUT_DIR environment variable, and validate."""
    values: Dict[str, Dict[str, object]] = {name: {} for name in _SECTIONS}
    present = set()

    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        read = parser.read(path, encoding="utf-8")
        if not read:
            raise ConfigError(f"cannot read config file: {path}")
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            present.add(section)
            for key, raw in parser.items(section):
                _set_value(values, section, key, raw)

    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section in override: {section!r}")
        present.add(section)
        _set_value(values, section, key, raw)

    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        values["experiment"]["output_dir"] = env_dir

    if "data" not in present and "synthetic" not in present:
        present.add("synthetic")  # default source: generated data
    if "data" in present and "synthetic" in present:
        raise ConfigError("configure either [data] or [synthetic], not both")

    if "variant" in values["model"]:
        values["model"]["variant"] = normalize_variant(str(values["model"]["variant"]))

    config = ExperimentConfig(
        **values["experiment"],
        data=DataConfig(**values["data"]) if "data" in present else None,
        synthetic=SyntheticConfig(**values["synthetic"]) if "synthetic" in present else None,
        model=ModelConfig(**values["model"]),
        trainer=TrainerConfig(**values["trainer"]),
        early_detection=EarlyDetectionConfig(**values["early_detection"]),
        explain=ExplainConfig(**values["explain"]),
    )
    config.validate()
    return config


def _set_value(values, section, key, raw):
    if section == "experiment":
        if key not in _EXPERIMENT_SCALARS:
            raise ConfigError(f"unknown option experiment.{key}")
        types = _field_types(ExperimentConfig)
    else:
        cls = _SECTIONS[section]
        types = _field_types(cls)
        if key not in types:
            raise ConfigError(f"unknown option {section}.{key}")
    values[section][key] = _coerce(f"{section}.{key}", raw, _resolve_type(types[key]))


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if v is None:
        return ""
    return str(v)


def resolved_ini(config: ExperimentConfig) -> str:
    """Render the fully resolved configuration as deterministic INI text."""
    lines: List[str] = []

    def emit(section: str, obj) -> None:
        lines.append(f"[{section}]")
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {_format_value(getattr(obj, f.name))}")
        lines.append("")

    lines.append("[experiment]")
    for name in _EXPERIMENT_SCALARS:
        lines.append(f"{name} = {_format_value(getattr(config, name))}")
    lines.append("")
    if config.data is not None:
        emit("data", config.data)
    if config.synthetic is not None:
        emit("synthetic", config.synthetic)
    emit("model", config.model)
    emit("trainer", config.trainer)
    emit("early_detection", config.early_detection)
    emit("explain", config.explain)
    return "\n".join(lines)
