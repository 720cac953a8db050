"""Utterance records and line-delimited manifest files."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..signal.render import SpeakerTimbre, SyntheticUtteranceSpec

MANIFEST_VERSION = 1
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class GroundTruth:
    """Paths to the stored clean/noise split plus the generating recipe."""

    clean_path: str
    noise_path: str
    spec: SyntheticUtteranceSpec

    def to_dict(self) -> dict:
        spec = self.spec
        return {
            "clean_path": self.clean_path,
            "noise_path": self.noise_path,
            "spec": {
                "phonemes": list(spec.phonemes),
                "durations_s": list(spec.durations_s),
                "pitch_contour_hz": [round(float(v), 4) for v in spec.pitch_contour_hz],
                "energy_contour": [round(float(v), 6) for v in spec.energy_contour],
                "timbre": asdict(spec.timbre),
                "archetype": spec.archetype,
                "snr_db": spec.snr_db,
                "noise_color": spec.noise_color,
                "noise_seed": spec.noise_seed,
                "silence_s": spec.silence_s,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        s = d["spec"]
        spec = SyntheticUtteranceSpec(
            phonemes=tuple(s["phonemes"]),
            durations_s=tuple(s["durations_s"]),
            pitch_contour_hz=np.array(s["pitch_contour_hz"], dtype=np.float64),
            energy_contour=np.array(s["energy_contour"], dtype=np.float64),
            timbre=SpeakerTimbre(**s["timbre"]),
            archetype=s["archetype"],
            snr_db=float(s["snr_db"]),
            noise_color=s["noise_color"],
            noise_seed=int(s["noise_seed"]),
            silence_s=float(s["silence_s"]),
        )
        return cls(d["clean_path"], d["noise_path"], spec)


@dataclass(frozen=True)
class Utterance:
    """One corpus record; paths are relative to the manifest directory."""

    id: str
    audio_path: str
    phonemes: tuple[str, ...]
    speaker_id: str
    language_id: str
    is_clean: bool
    split: str
    ground_truth: GroundTruth | None = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split: {self.split}")
        object.__setattr__(self, "phonemes", tuple(self.phonemes))

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "audio_path": self.audio_path,
            "phonemes": list(self.phonemes),
            "speaker_id": self.speaker_id,
            "language_id": self.language_id,
            "is_clean": self.is_clean,
            "split": self.split,
        }
        if self.ground_truth is not None:
            d["ground_truth"] = self.ground_truth.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Utterance":
        gt = d.get("ground_truth")
        return cls(
            id=d["id"],
            audio_path=d["audio_path"],
            phonemes=tuple(d["phonemes"]),
            speaker_id=d["speaker_id"],
            language_id=d["language_id"],
            is_clean=bool(d["is_clean"]),
            split=d["split"],
            ground_truth=GroundTruth.from_dict(gt) if gt else None,
        )


def config_digest(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class Manifest:
    """Ordered utterance records plus the digest of the producing config."""

    records: list[Utterance]
    corpus_config_digest: str
    header_extra: dict = field(default_factory=dict)
    root: Path | None = None

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate utterance ids in manifest: {dupes[:5]}")

    def __len__(self) -> int:
        return len(self.records)

    def split(self, name: str) -> list[Utterance]:
        if name not in SPLITS:
            raise ValueError(f"unknown split: {name}")
        return [r for r in self.records if r.split == name]

    def by_id(self, utt_id: str) -> Utterance:
        for r in self.records:
            if r.id == utt_id:
                return r
        raise KeyError(f"no utterance with id {utt_id!r}")

    def speakers(self) -> list[str]:
        return sorted({r.speaker_id for r in self.records})

    def languages(self) -> list[str]:
        return sorted({r.language_id for r in self.records})

    def resolve(self, rel_path: str) -> Path:
        p = Path(rel_path)
        if p.is_absolute():
            return p
        if self.root is None:
            raise ValueError("manifest has no root directory; load it from disk first")
        return self.root / p

    def write(self, path: str | os.PathLike) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "version": MANIFEST_VERSION,
            "corpus_config_digest": self.corpus_config_digest,
            **self.header_extra,
        }
        lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
        lines += [json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":"))
                  for r in self.records]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.root = path.parent

    @classmethod
    def read(cls, path: str | os.PathLike) -> "Manifest":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ValueError(f"{path}: empty manifest")
        header = json.loads(lines[0])
        if header.get("version") != MANIFEST_VERSION:
            raise ValueError(f"{path}: unsupported manifest version {header.get('version')}")
        records = [Utterance.from_dict(json.loads(line)) for line in lines[1:] if line]
        extra = {k: v for k, v in header.items()
                 if k not in ("version", "corpus_config_digest")}
        return cls(records, header["corpus_config_digest"], extra, root=path.parent)
