"""Batch dubbing: one synthesis per source test utterance."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus.manifest import Manifest, Utterance
from ..signal.audio import write_wav
from .synthesizer import Synthesizer


@dataclass
class BatchDubResult:
    output_manifest: Manifest
    manifest_path: Path
    failures: list[tuple[str, str]] = field(default_factory=list)
    diagnostics_digest: str = ""


def batch_dub(synthesizer: Synthesizer, source_manifest: Manifest,
              target_speaker: str, target_language: str, mode: str,
              out_dir: str | Path, split: str = "test",
              noise_reference=None, limit: int | None = None) -> BatchDubResult:
    """Synthesize every source utterance in the chosen split toward the target
    speaker/language. Per-utterance errors are collected, not raised."""
    out_dir = Path(out_dir)
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    sources = source_manifest.split(split)
    if limit is not None:
        sources = sources[:limit]

    records: list[Utterance] = []
    failures: list[tuple[str, str]] = []
    diag_lines: list[str] = []
    for source in sources:
        out_id = f"{source.id}--{target_speaker}"
        try:
            request = synthesizer.request_from_record(
                source, source_manifest, target_speaker, target_language, mode,
                noise_reference=noise_reference)
            result = synthesizer.synthesize(request)
        except Exception as exc:  # keep going; report at the end
            failures.append((source.id, str(exc)))
            continue
        rel = f"audio/{out_id}.wav"
        write_wav(out_dir / rel, result.waveform)
        records.append(Utterance(
            id=out_id, audio_path=rel, phonemes=source.phonemes,
            speaker_id=target_speaker, language_id=target_language,
            is_clean=False, split=split, ground_truth=None))
        diag_lines.append(json.dumps({"id": out_id, "source_id": source.id,
                                      **result.diagnostics()}, sort_keys=True))

    digest = hashlib.sha256("\n".join(diag_lines).encode()).hexdigest()
    manifest = Manifest(records, corpus_config_digest=digest, header_extra={
        "dub": {"mode": mode, "target_speaker": target_speaker,
                "target_language": target_language, "split": split,
                "source_digest": source_manifest.corpus_config_digest,
                "failures": [{"id": i, "error": e} for i, e in failures]},
    })
    manifest_path = out_dir / "manifest.jsonl"
    manifest.write(manifest_path)
    (out_dir / "diagnostics.jsonl").write_text(
        "\n".join(diag_lines) + ("\n" if diag_lines else ""), encoding="utf-8")
    return BatchDubResult(manifest, manifest_path, failures, digest)
