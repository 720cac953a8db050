"""Shared YAML run-configuration handling for the CLI.

One file can carry `corpus`, `model`, and `train` sections; command-line flags
override file values, and every run writes the effective config next to its
outputs together with provenance digests."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import yaml

from .corpus.generate import CorpusConfig
from .corpus.manifest import config_digest
from .model.config import ModelConfig
from .training.data import MODEL_PHONEMES
from .training.loop import TrainConfig

SECTIONS = ("corpus", "model", "train")


def load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must contain a mapping")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ValueError(f"{path}: unknown config sections {sorted(unknown)}")
    return data


def _coerce_tuples(cls, values: dict) -> dict:
    coerced = dict(values)
    for f in dataclasses.fields(cls):
        if f.name in coerced and isinstance(coerced[f.name], list):
            entries = coerced[f.name]
            coerced[f.name] = tuple(
                tuple(e) if isinstance(e, list) else e for e in entries)
    return coerced


def build_section(cls, file_config: dict, section: str, overrides: dict):
    """Dataclass from file section + non-None overrides (flags win)."""
    values = dict(file_config.get(section, {}))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
    if unknown:
        raise ValueError(f"unknown {section} config keys: {sorted(unknown)}")
    return cls(**_coerce_tuples(cls, values))


def corpus_config(file_config: dict, **overrides) -> CorpusConfig:
    return build_section(CorpusConfig, file_config, "corpus", overrides)


def model_config(file_config: dict, corpus_cfg: CorpusConfig | None = None,
                 **overrides) -> ModelConfig:
    values = dict(file_config.get("model", {}))
    values.setdefault("num_phonemes", len(MODEL_PHONEMES))
    if corpus_cfg is not None:
        values.setdefault("num_speakers",
                          corpus_cfg.num_languages * corpus_cfg.speakers_per_language)
        values.setdefault("num_languages", corpus_cfg.num_languages)
        values.setdefault("sample_rate_hz", corpus_cfg.sample_rate_hz)
        values.setdefault("n_fft", corpus_cfg.n_fft)
        values.setdefault("hop", int(round(corpus_cfg.frame_shift_s
                                           * corpus_cfg.sample_rate_hz)))
        values.setdefault("win_length", int(round(corpus_cfg.frame_length_s
                                                  * corpus_cfg.sample_rate_hz)))
    shadowed = {"model": values}
    return build_section(ModelConfig, shadowed, "model", overrides)


def train_config(file_config: dict, **overrides) -> TrainConfig:
    return build_section(TrainConfig, file_config, "train", overrides)


def write_effective_config(out_dir: str | Path, sections: dict,
                           provenance: dict | None = None) -> Path:
    """Echo the effective configuration and provenance next to run outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    effective = {}
    for name, cfg in sections.items():
        effective[name] = dataclasses.asdict(cfg) if dataclasses.is_dataclass(cfg) else cfg
    payload = {"config": effective,
               "config_digest": config_digest(json.loads(json.dumps(effective))),
               "provenance": provenance or {}}
    path = out_dir / "run_info.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path
