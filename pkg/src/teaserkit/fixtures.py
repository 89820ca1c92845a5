"""Synthetic desk-scale corpus generation.

Everything is derived from one seeded generator, so a corpus is a pure
function of (seed, frames, sentences) and regenerating it is byte-identical.
The score curves carry one clear bump per sentence at well-separated centers,
which keeps threshold selection feasible under the overlap constraint.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio import Waveform, save_waveform
from .pipeline import save_pairs
from .store import (
    EmbeddingSequence,
    FrameBank,
    ScoreCurveSet,
    Selection,
    Sentence,
    SentenceSelection,
    SentenceTrack,
    _write_json,
    save_embedding_sequence,
    save_frame_bank,
    save_score_curves,
    save_selection,
    save_sentence_track,
    tau_to_frames,
)

DIM = 32
AUDIO_RATE = 8000


def _unit(rng: np.random.Generator, count: int, dim: int = DIM) -> np.ndarray:
    rows = rng.normal(size=(count, dim))
    return (rows / np.linalg.norm(rows, axis=1, keepdims=True)).astype(np.float32)


def _bump_curve(n: int, center: int, rng: np.random.Generator) -> np.ndarray:
    base = 0.15 * np.abs(np.convolve(rng.normal(size=n), np.ones(5) / 5, mode="same"))
    peak = np.exp(-0.5 * ((np.arange(n) - center) / 4.0) ** 2)
    return np.clip(base + peak, 0.0, 1.0).astype(np.float32)


def generate_corpus(
    out_dir: str | Path, seed: int = 0, frames: int = 120, sentences: int = 4
) -> dict[str, Path]:
    """Write the full fixture set and return a name -> path manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n, m = frames, sentences
    if n < 30 or m < 1:
        raise ValueError("corpus needs frames >= 30 and sentences >= 1")

    bank = FrameBank(
        embeddings=_unit(rng, n),
        brightness=rng.uniform(40.0, 220.0, size=n).astype(np.float32),
        source_id="fixture-body",
    )
    save_frame_bank(bank, out / "bank.tgfb")

    taus = [float(4 + (i % 5)) + 0.3 for i in range(m)]
    track = SentenceTrack(
        sentences=[
            Sentence(
                index=i,
                text=f"synthetic sentence {i}",
                tau_seconds=taus[i],
                embedding=_unit(rng, 1)[0],
            )
            for i in range(m)
        ]
    )
    save_sentence_track(track, out / "narration.json")

    gap = max((n - 30) // max(m - 1, 1), 1)
    centers = [min(15 + i * gap, n - 15) for i in range(m)]
    curves = ScoreCurveSet(
        curves=np.stack([_bump_curve(n, c, rng) for c in centers]),
        score_kind="external-highlight",
    )
    save_score_curves(curves, out / "curves.json")

    per_sentence = []
    for i, c in enumerate(centers):
        slots = tau_to_frames(taus[i])
        rows = []
        for j in range(slots):
            anchor = bank.embeddings[min(c + j, n - 1)].astype(np.float64)
            rows.append(anchor + 0.05 * rng.normal(size=DIM))
        per_sentence.append(np.asarray(rows, dtype=np.float32))
    generated = EmbeddingSequence.from_sentence_rows(per_sentence)
    save_embedding_sequence(generated, out / "generated.json")

    gt = Selection(
        sentences=[
            SentenceSelection(
                index=i,
                intervals=((max(centers[i] - 2, 0), max(centers[i] - 2, 0) + tau_to_frames(taus[i])),),
                achieved_frames=tau_to_frames(taus[i]),
            )
            for i in range(m)
        ]
    )
    gt.validate(n=n)
    save_selection(gt, out / "gt-selection.json")

    save_pairs(
        [(track.sentences[i].embedding, bank.embeddings[centers[i]]) for i in range(m)],
        out / "pairs.json",
    )

    t = np.arange(5 * AUDIO_RATE) / AUDIO_RATE
    tone = 0.5 * np.sin(2 * np.pi * 440 * t)
    tone[2 * AUDIO_RATE : 3 * AUDIO_RATE] *= 0.006  # quiet stretch in the middle
    save_waveform(
        Waveform(samples=tone.astype(np.float32), sample_rate=AUDIO_RATE),
        out / "audio.wav",
    )

    for composer, name in (("pt", "pipeline-pt.json"), ("lr-beam", "pipeline-lr.json")):
        _write_json(
            {
                "format": "pipeline-config",
                "version": 1,
                "composer": composer,
                "bank": "bank.tgfb",
                "narration": "narration.json",
                "curves": "curves.json",
                "generated": "generated.json",
                "out_dir": f"out-{composer}",
                "smoothing": True,
                "seed": seed,
            },
            out / name,
        )

    return {
        "bank": out / "bank.tgfb",
        "narration": out / "narration.json",
        "curves": out / "curves.json",
        "generated": out / "generated.json",
        "gt_selection": out / "gt-selection.json",
        "pairs": out / "pairs.json",
        "audio": out / "audio.wav",
        "pipeline_pt": out / "pipeline-pt.json",
        "pipeline_lr": out / "pipeline-lr.json",
    }
