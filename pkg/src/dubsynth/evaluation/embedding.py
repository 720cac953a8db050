"""Prosody-embedding space analysis: 2-D projection and clustering scores."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..corpus.denoise import denoise_record
from ..corpus.manifest import Manifest
from ..model import ProsodyTransferModel
from ..training.data import linear_spectrogram

PROJECTION_METHODS = ("tsne", "pca")
DEFAULT_PERPLEXITY = 30.0
TSNE_ITERATIONS = 1000


@dataclass
class EmbeddingAnalysisReport:
    points: np.ndarray  # [n, 2]
    labels: list[str]
    method: str
    seed: int
    clustering_scores: dict[str, float]

    def __post_init__(self):
        if self.points.shape[0] != len(self.labels):
            raise ValueError("point count must equal label count")

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps({"kind": "header", "method": self.method, "seed": self.seed,
                             "clustering_scores": {k: round(v, 6) for k, v
                                                   in self.clustering_scores.items()}},
                            sort_keys=True)]
        for (x, y), label in zip(self.points, self.labels):
            lines.append(json.dumps({"label": label, "x": round(float(x), 6),
                                     "y": round(float(y), 6)}, sort_keys=True))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def plot(self, path: str | Path) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig, ax = plt.subplots(figsize=(6, 5))
        for label in sorted(set(self.labels)):
            mask = np.array([l == label for l in self.labels])
            ax.scatter(self.points[mask, 0], self.points[mask, 1], s=12,
                       alpha=0.7, label=label)
        ax.legend(fontsize=8)
        ax.set_title(f"{self.method} projection of prosody embedding means")
        fig.tight_layout()
        fig.savefig(path, dpi=110)
        plt.close(fig)


def collect_prosody_embeddings(model: ProsodyTransferModel, manifest: Manifest,
                               max_per_language: int | None = None,
                               denoise_mode: str = "oracle",
                               ) -> tuple[np.ndarray, list[str], list[str]]:
    """Encoder output means per utterance, with language and speaker labels."""
    model.eval()
    means, languages, speakers = [], [], []
    taken: dict[str, int] = {}
    with torch.no_grad():
        for record in manifest.records:
            if max_per_language is not None and \
                    taken.get(record.language_id, 0) >= max_per_language:
                continue
            denoised, _ = denoise_record(record, manifest, denoise_mode)
            spec = torch.from_numpy(linear_spectrogram(denoised, model.config)).unsqueeze(0)
            emb = model.prosody_encode(spec, torch.tensor([spec.size(2)]),
                                       deterministic=True)
            means.append(emb.mean.squeeze(0).numpy())
            languages.append(record.language_id)
            speakers.append(record.speaker_id)
            taken[record.language_id] = taken.get(record.language_id, 0) + 1
    return np.array(means), languages, speakers


def project_embeddings(embeddings: np.ndarray, labels: list[str],
                       method: str = "tsne", seed: int = 0,
                       perplexity: float | None = None) -> EmbeddingAnalysisReport:
    """Deterministic 2-D projection of embedding means.

    perplexity=None uses the default (30), auto-reduced for small inputs; an
    explicit perplexity that the input cannot support is an error."""
    if method not in PROJECTION_METHODS:
        raise ValueError(f"unknown projection method: {method}")
    embeddings = np.asarray(embeddings, dtype=np.float64)
    n = embeddings.shape[0]
    if n < 10:
        raise ValueError(f"need at least 10 embeddings, got {n}")
    if len(labels) != n:
        raise ValueError("labels must match embeddings")

    if method == "pca":
        from sklearn.decomposition import PCA

        points = PCA(n_components=2, random_state=seed).fit_transform(embeddings)
    else:
        from sklearn.manifold import TSNE

        max_perplexity = (n - 1) / 3.0
        if perplexity is None:
            effective = min(DEFAULT_PERPLEXITY, max_perplexity)
        elif perplexity >= n:
            raise ValueError(
                f"perplexity {perplexity} needs more than {n} embeddings; "
                f"try perplexity <= {max_perplexity:.0f}"
            )
        else:
            effective = float(perplexity)
        points = TSNE(n_components=2, random_state=seed, perplexity=effective,
                      max_iter=TSNE_ITERATIONS, init="pca").fit_transform(embeddings)

    scores = {}
    if len(set(labels)) >= 2:
        scores["label_silhouette"] = language_clustering_score(embeddings, labels,
                                                               min_per_label=1)
    return EmbeddingAnalysisReport(np.asarray(points, dtype=np.float64),
                                   list(labels), method, seed, scores)


def language_clustering_score(embeddings: np.ndarray, language_labels: list[str],
                              min_per_label: int = 10) -> float:
    """Silhouette coefficient of raw embedding means under language labels.

    Near zero means no language clustering, the precondition for treating the
    space as language independent."""
    from sklearn.metrics import silhouette_score

    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = list(language_labels)
    unique = sorted(set(labels))
    if len(unique) < 2:
        raise ValueError("clustering score needs at least 2 languages")
    counts = {u: labels.count(u) for u in unique}
    thin = {u: c for u, c in counts.items() if c < min_per_label}
    if thin:
        raise ValueError(f"need >= {min_per_label} embeddings per language; got {thin}")
    if np.allclose(np.var(embeddings, axis=0), 0.0):
        raise ValueError("degenerate embeddings: all points identical across languages")
    value = silhouette_score(embeddings, labels, metric="euclidean")
    return float(np.nan_to_num(value))
