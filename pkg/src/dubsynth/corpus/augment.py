"""Clean-data augmentation: manifest merging and ratio-weighted sampling."""

from __future__ import annotations

import hashlib

import numpy as np

from .manifest import GroundTruth, Manifest, Utterance


def _absolutized(record: Utterance, manifest: Manifest, force_clean: bool) -> Utterance:
    gt = record.ground_truth
    if gt is not None:
        gt = GroundTruth(str(manifest.resolve(gt.clean_path)),
                         str(manifest.resolve(gt.noise_path)), gt.spec)
    return Utterance(record.id, str(manifest.resolve(record.audio_path)),
                     record.phonemes, record.speaker_id, record.language_id,
                     record.is_clean or force_clean, record.split, gt)


def augment_with_clean(noisy: Manifest, clean: Manifest, ratio: float) -> Manifest:
    """Merge a clean corpus into a noisy one; clean records are flagged and
    sampled `ratio` times as often as noisy records in aggregate. Record paths
    become absolute so the merged manifest can span two corpus directories."""
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    if ratio == 0:
        return noisy
    if len(clean) == 0:
        raise ValueError("clean manifest is empty but ratio > 0")

    collisions = {r.id for r in noisy.records} & {r.id for r in clean.records}
    if collisions:
        raise ValueError(f"utterance id collision between manifests: {sorted(collisions)[:5]}")
    spk_collisions = set(noisy.speakers()) & set(clean.speakers())
    if spk_collisions:
        raise ValueError(f"speaker id collision between manifests: {sorted(spk_collisions)[:5]}")

    merged = [_absolutized(r, noisy, force_clean=False) for r in noisy.records]
    merged += [_absolutized(r, clean, force_clean=True) for r in clean.records]
    header = {
        "augmented": {
            "clean_ratio": ratio,
            "noisy_digest": noisy.corpus_config_digest,
            "clean_digest": clean.corpus_config_digest,
        }
    }
    digest_source = f"{noisy.corpus_config_digest}+{clean.corpus_config_digest}@{ratio}"
    combined = hashlib.sha256(digest_source.encode()).hexdigest()
    return Manifest(merged, combined, header, root=noisy.root)


def sampling_weights(manifest: Manifest, clean_ratio: float,
                     split: str = "train") -> tuple[list[Utterance], np.ndarray]:
    """Per-record draw weights: total clean mass = clean_ratio x noisy mass."""
    records = manifest.split(split)
    is_clean = np.array([r.is_clean for r in records])
    n_clean = int(is_clean.sum())
    n_noisy = len(records) - n_clean
    weights = np.ones(len(records))
    if n_clean and n_noisy and clean_ratio > 0:
        weights[is_clean] = clean_ratio * n_noisy / n_clean
    return records, weights / weights.sum()


class RecordSampler:
    """Seeded with-replacement sampler honoring clean/noisy weighting."""

    def __init__(self, manifest: Manifest, clean_ratio: float = 0.0,
                 split: str = "train", seed: int = 0):
        self.records, self.probabilities = sampling_weights(manifest, clean_ratio, split)
        if not self.records:
            raise ValueError(f"no records in split {split!r}")
        self._rng = np.random.default_rng(seed)

    def draw(self, batch_size: int) -> list[Utterance]:
        idx = self._rng.choice(len(self.records), size=batch_size, p=self.probabilities)
        return [self.records[i] for i in idx]
