"""Side-by-side F0 metric comparison of synthesis systems."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..signal.pitch import F0Contour
from .f0_metrics import DEFAULT_ALIGN_POINTS, f0_mse, f0_pearson


@dataclass
class SystemScore:
    system: str
    mse: float
    pearson: float
    pairs: int
    skipped: list[str]


@dataclass
class ComparisonReport:
    scores: list[SystemScore]  # ranked best-first by pearson
    n_points: int
    excluded_ids: dict[str, list[str]]

    def table(self) -> str:
        lines = [
            f"F0 metrics over voiced-region contours resampled to {self.n_points} points",
            f"{'System':28s} {'MSE (Hz^2)':>12s} {'Correlation':>12s} {'pairs':>6s}",
        ]
        for s in self.scores:
            lines.append(f"{s.system:28s} {s.mse:12.1f} {s.pearson:12.3f} {s.pairs:6d}")
        return "\n".join(lines)

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps({"kind": "header", "n_points": self.n_points,
                             "excluded_ids": self.excluded_ids}, sort_keys=True)]
        for s in self.scores:
            lines.append(json.dumps({"system": s.system, "mse": round(s.mse, 4),
                                     "pearson": round(s.pearson, 6),
                                     "pairs": s.pairs, "skipped": s.skipped},
                                    sort_keys=True))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def compare_systems(systems: dict[str, dict[str, F0Contour]],
                    references: dict[str, F0Contour],
                    n_points: int = DEFAULT_ALIGN_POINTS) -> ComparisonReport:
    """Aggregate F0 MSE and Pearson per system against shared references.

    Hypotheses are matched to references by utterance id; ids missing on
    either side are excluded and listed. Pairs whose contours cannot be
    aligned (too little voicing, flat contour) are skipped and listed."""
    excluded: dict[str, list[str]] = {}
    scores: list[SystemScore] = []
    for name, outputs in systems.items():
        shared = sorted(set(outputs) & set(references))
        excluded[name] = sorted((set(outputs) | set(references)) - set(shared))
        if not shared:
            raise ValueError(f"system {name!r} shares no utterance ids with references")
        mses, rhos, skipped = [], [], []
        for utt_id in shared:
            try:
                mses.append(f0_mse(references[utt_id], outputs[utt_id], n_points))
                rhos.append(f0_pearson(references[utt_id], outputs[utt_id], n_points))
            except ValueError as exc:
                skipped.append(f"{utt_id}: {exc}")
        if not mses:
            raise ValueError(f"system {name!r} has no alignable pairs")
        scores.append(SystemScore(name, float(np.mean(mses)), float(np.mean(rhos)),
                                  len(mses), skipped))
    scores.sort(key=lambda s: -s.pearson)
    return ComparisonReport(scores, n_points, excluded)
