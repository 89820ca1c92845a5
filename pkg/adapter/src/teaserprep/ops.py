"""Adapter jobs: call model services, write composer-ready input files.

Each operation takes a ``ModelService`` and wraps every remote call in the
retry policy. The outputs are plain files in the primary package's formats;
nothing here imports the primary package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import formats, prompts
from .errors import AdapterError
from .services import ModelService, with_retries

DEFAULT_DIM = 32
DEFAULT_DURATION_S = 120.0


@dataclass
class AdapterJob:
    """One documentary's worth of extraction work."""

    video: str  # source id or path of the body content
    transcript: Path | None  # narration transcript, None for dry-run synthesis
    title: str
    out_dir: Path
    dim: int = DEFAULT_DIM  # embedding width shared by every emitted file
    duration_s: float = DEFAULT_DURATION_S  # body length when no video is probed
    segments: int = prompts.DEFAULT_SEGMENTS
    summary_template: str = prompts.DEFAULT_SUMMARY_TEMPLATE
    language_model: str = "placeholder"  # recorded for reproducibility
    vision_model: str = "placeholder"
    temperature: float = 0.0
    retry_attempts: int = 4
    extra: dict = field(default_factory=dict)


def extract_frame_embeddings(
    service: ModelService,
    video: str,
    duration_s: float,
    out_path: Path,
    dim: int = DEFAULT_DIM,
    fps: int = 1,
    attempts: int = 4,
) -> int:
    """Write a frame bank with one row per sampled frame; returns the count."""
    if duration_s <= 0 or not math.isfinite(duration_s):
        raise AdapterError(f"invalid video duration {duration_s!r}")
    if fps < 1:
        raise AdapterError(f"fps must be >= 1, got {fps}")
    count = int(math.floor(duration_s * fps))
    if count < 1:
        raise AdapterError(f"video too short: {duration_s} s at {fps} fps")
    rows = with_retries(
        lambda: service.embed_frames(video, count, dim), attempts=attempts
    )
    formats.write_frame_bank(rows, out_path)
    return count


def generate_teaser_narration(
    service: ModelService,
    transcript: str,
    title: str,
    out_path: Path,
    dim: int = DEFAULT_DIM,
    segments: int = prompts.DEFAULT_SEGMENTS,
    summary_template: str = prompts.DEFAULT_SUMMARY_TEMPLATE,
    attempts: int = 4,
) -> int:
    """Summarize, rewrite as a story opening, append the ending question.

    Writes a sentence track whose durations come from the speech service;
    returns the sentence count (story sentences plus one question).
    """
    if not transcript.strip():
        raise AdapterError("empty transcript")
    pieces = prompts.split_into_segments(transcript, segments)
    summaries = [
        with_retries(
            lambda p=piece: service.complete(
                prompts.summary_prompt(p, summary_template)
            ),
            attempts=attempts,
        )
        for piece in pieces
    ]
    paragraph = " ".join(summaries)
    story = with_retries(
        lambda: service.complete(prompts.story_prompt(paragraph)), attempts=attempts
    )
    question = with_retries(
        lambda: service.complete(prompts.ending_question_prompt(title, paragraph)),
        attempts=attempts,
    )
    texts = prompts.split_sentences(story)[:10] + [question.strip()]
    if len(texts) < 2:
        raise AdapterError("story rewrite produced no sentences")
    rows = []
    for text in texts:
        tau = float(with_retries(lambda t=text: service.tts_duration(t), attempts=attempts))
        if not (math.isfinite(tau) and tau > 0):
            raise AdapterError(f"speech service returned invalid duration {tau!r}")
        embedding = with_retries(
            lambda t=text: service.embed_text(t, dim), attempts=attempts
        )
        rows.append({"text": text, "tau_seconds": tau, "embedding": embedding})
    formats.write_sentence_track(rows, out_path)
    return len(rows)


def score_curves_from_grounding_model(
    service: ModelService,
    video: str,
    narration_path: Path,
    bank_path: Path,
    out_path: Path,
    attempts: int = 4,
) -> tuple[int, int]:
    """One highlight curve per narration sentence, bank-length columns."""
    texts = formats.read_sentence_texts(narration_path)
    if not texts:
        raise AdapterError(f"{narration_path.name}: no sentences")
    frames, _ = formats.read_frame_bank_shape(bank_path)
    curves = np.stack(
        [
            with_retries(
                lambda t=text: service.highlight_scores(t, frames), attempts=attempts
            )
            for text in texts
        ]
    )
    formats.write_score_curves(curves, out_path)
    return curves.shape[0], curves.shape[1]


def generate_embedding_sequence(
    service: ModelService,
    narration_path: Path,
    out_path: Path,
    dim: int = DEFAULT_DIM,
    attempts: int = 4,
) -> int:
    """Per-second generated embeddings, one slot per rounded narration second."""
    taus = formats.read_sentence_taus(narration_path)
    texts = formats.read_sentence_texts(narration_path)
    blocks = []
    for pos, (text, tau) in enumerate(zip(texts, taus)):
        slots = formats.tau_to_frames(tau)
        if slots < 1:
            raise AdapterError(f"sentence {pos} rounds to zero slots (tau={tau})")
        rows = [
            with_retries(
                lambda t=f"{pos}:{slot}:{text}": service.embed_text(t, dim),
                attempts=attempts,
            )
            for slot in range(slots)
        ]
        blocks.append(np.stack(rows))
    formats.write_embedding_sequence(blocks, out_path)
    return sum(len(b) for b in blocks)


def run_all(service: ModelService, job: AdapterJob) -> dict[str, Path]:
    """Emit every composer input plus ready-to-run pipeline configs."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    if job.transcript is not None:
        transcript = Path(job.transcript).read_text(encoding="utf-8")
    else:
        transcript = _placeholder_transcript(job)
        (job.out_dir / "transcript.txt").write_text(transcript, encoding="utf-8")

    paths = {
        "bank": job.out_dir / "bank.tgfb",
        "narration": job.out_dir / "narration.json",
        "curves": job.out_dir / "curves.json",
        "generated": job.out_dir / "generated.json",
        "pipeline_pt": job.out_dir / "pipeline-pt.json",
        "pipeline_lr": job.out_dir / "pipeline-lr.json",
    }
    extract_frame_embeddings(
        service, job.video, job.duration_s, paths["bank"], dim=job.dim,
        attempts=job.retry_attempts,
    )
    generate_teaser_narration(
        service, transcript, job.title, paths["narration"], dim=job.dim,
        segments=job.segments, summary_template=job.summary_template,
        attempts=job.retry_attempts,
    )
    score_curves_from_grounding_model(
        service, job.video, paths["narration"], paths["bank"], paths["curves"],
        attempts=job.retry_attempts,
    )
    generate_embedding_sequence(
        service, paths["narration"], paths["generated"], dim=job.dim,
        attempts=job.retry_attempts,
    )
    formats.write_pipeline_config("pt", "out-pt", paths["pipeline_pt"])
    formats.write_pipeline_config("lr-beam", "out-lr", paths["pipeline_lr"])
    return paths


def _placeholder_transcript(job: AdapterJob) -> str:
    lines = [
        f"Scene {k}: the crew of {job.title} documents placeholder events on location."
        for k in range(1, 2 * job.segments + 1)
    ]
    return "\n".join(lines) + "\n"
