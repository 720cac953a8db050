"""Per-utterance and aggregate SNR of audio referenced by a manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus.denoise import denoise_record
from ..corpus.manifest import Manifest


@dataclass
class SnrReport:
    rows: list[dict]
    mean_db: float
    std_db: float
    denoiser_mode: str

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps({"kind": "header", "denoiser_mode": self.denoiser_mode,
                             "mean_db": round(self.mean_db, 3),
                             "std_db": round(self.std_db, 3)}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def table(self) -> str:
        out = [f"SNR report (denoiser: {self.denoiser_mode})",
               f"{'utterance':24s} {'snr_db':>8s}"]
        for r in self.rows:
            out.append(f"{r['id']:24s} {r['snr_db']:8.2f}")
        out.append(f"{'mean':24s} {self.mean_db:8.2f}")
        out.append(f"{'std':24s} {self.std_db:8.2f}")
        return "\n".join(out)


def snr_report(outputs: Manifest, denoiser_mode: str = "spectral_subtraction") -> SnrReport:
    """Split every referenced file with the chosen denoiser and report SNR."""
    from ..signal.snr import snr_db as _snr

    rows = []
    values = []
    for record in outputs.records:
        denoised, residual = denoise_record(record, outputs, denoiser_mode)
        value = _snr(denoised, residual)
        values.append(value)
        rows.append({"id": record.id, "snr_db": round(value, 3)})
    if not values:
        return SnrReport([], float("nan"), float("nan"), denoiser_mode)
    return SnrReport(rows, float(np.mean(values)), float(np.std(values)), denoiser_mode)
