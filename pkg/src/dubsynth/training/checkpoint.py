"""Versioned checkpoint container with config echo and mismatch detection."""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

import torch

from ..model import ModelConfig, ProsodyTransferModel

CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | os.PathLike, model: ProsodyTransferModel,
                    optimizer: torch.optim.Optimizer | None = None,
                    scheduler=None, step: int = 0, extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": CHECKPOINT_VERSION,
        "model_config": model.config.to_dict(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict() if optimizer is not None else None,
        "scheduler_state": scheduler.state_dict() if scheduler is not None else None,
        "step": step,
        "extra": extra or {},
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | os.PathLike) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:  # torch raises various unpickling errors
        raise ValueError(f"corrupted or unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise ValueError(f"corrupted checkpoint {path}: missing version field")
    if payload["version"] != CHECKPOINT_VERSION:
        raise ValueError(
            f"checkpoint version mismatch: file has {payload['version']}, "
            f"this build reads {CHECKPOINT_VERSION}"
        )
    return payload


def check_config_compatible(expected: ModelConfig, payload: dict) -> None:
    """Reject a checkpoint whose config differs, naming the first bad field."""
    stored = payload["model_config"]
    expected_dict = expected.to_dict()
    for key in sorted(set(stored) | set(expected_dict)):
        if stored.get(key) != expected_dict.get(key):
            raise ValueError(
                f"checkpoint config mismatch on field {key!r}: "
                f"checkpoint has {stored.get(key)!r}, model expects {expected_dict.get(key)!r}"
            )


def build_model(payload: dict) -> ProsodyTransferModel:
    config = ModelConfig.from_dict(payload["model_config"])
    model = ProsodyTransferModel(config)
    model.load_state_dict(payload["model_state"])
    return model


def restore_into(model: ProsodyTransferModel, payload: dict) -> None:
    check_config_compatible(model.config, payload)
    model.load_state_dict(payload["model_state"])


def checkpoint_digest(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
