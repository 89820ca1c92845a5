"""Pipeline orchestration: config, input validation, and composition runs.

A pipeline loads a frame bank plus narration, composes a selection with one of
the three composers, lays it onto a timeline, and writes selection, timeline,
cutlist, and metrics report files.  All outputs are deterministic functions of
the inputs and the config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import PipelineError, TeaserkitError
from .lr import BeamConfig, beam_decode, greedy_decode, smooth
from .metrics import GT_REP_LOWER_BOUND, GT_SCR_REFERENCE, clip_score, f1, rep, scr
from .pt import PtConfig, select_for_narration
from .store import (
    FrameBank,
    Selection,
    SentenceSelection,
    SentenceTrack,
    _normalize_rows,
    _read_json,
    _write_json,
    load_embedding_sequence,
    load_frame_bank,
    load_score_curves,
    load_selection,
    load_sentence_track,
    save_selection,
    tau_to_frames,
)
from .timeline import Timeline, assemble, save_cutlist

COMPOSERS = ("pt", "lr-greedy", "lr-beam")

SELECTION_FILE = "selection.json"
TIMELINE_FILE = "timeline.json"
CUTLIST_FILE = "cutlist.ffconcat"
REPORT_FILE = "report.json"


@dataclass
class Diagnostic:
    severity: str  # "error" blocks the run, "warning" does not
    module: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} [{self.module}] {self.message}"


@dataclass
class PipelineConfig:
    composer: str
    bank_path: Path
    narration_path: Path
    curves_path: Path | None = None  # required for pt
    generated_path: Path | None = None  # required for lr-*
    out_dir: Path = Path(".")
    pt: PtConfig = field(default_factory=PtConfig)
    beam: BeamConfig = field(default_factory=BeamConfig)
    smoothing: bool = True
    seed: int = 0  # consumed only by fixture generation, never by composition

    def __post_init__(self) -> None:
        if self.composer not in COMPOSERS:
            raise PipelineError(
                f"composer must be one of {', '.join(COMPOSERS)}, got {self.composer!r}"
            )
        self.bank_path = Path(self.bank_path)
        self.narration_path = Path(self.narration_path)
        self.curves_path = Path(self.curves_path) if self.curves_path else None
        self.generated_path = Path(self.generated_path) if self.generated_path else None
        self.out_dir = Path(self.out_dir)


def config_from_file(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    """Load a pipeline config document; explicit overrides win over the file."""
    doc = _read_json(path, "pipeline-config")
    merged = {**doc, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    base = Path(path).parent

    def resolve(key):
        return base / merged[key] if merged.get(key) else None

    pt_doc = merged.get("pt", {})
    beam_doc = merged.get("beam", {})
    return PipelineConfig(
        composer=merged.get("composer", "pt"),
        bank_path=resolve("bank"),
        narration_path=resolve("narration"),
        curves_path=resolve("curves"),
        generated_path=resolve("generated"),
        out_dir=base / merged.get("out_dir", "out"),
        pt=PtConfig(
            min_clip_seconds=pt_doc.get("min_clip_seconds", 3),
            max_overlap_seconds=pt_doc.get("max_overlap_seconds", 1),
            lookback_sentences=pt_doc.get("lookback_sentences", 2),
        ),
        beam=BeamConfig(
            lam=beam_doc.get("lambda", 1.0),
            beam_size=beam_doc.get("beam_size", 5),
            candidates=beam_doc.get("candidates", 10),
        ),
        smoothing=bool(merged.get("smoothing", True)),
        seed=int(merged.get("seed", 0)),
    )


def _check_exists(diags: list[Diagnostic], path: Path | None, label: str) -> bool:
    if path is None or not path.exists():
        where = "missing" if path is None else f"not found at {path}"
        diags.append(Diagnostic("error", "cli", f"{label} file {where}"))
        return False
    return True


def validate_inputs(
    bank_path: Path,
    narration_path: Path | None = None,
    curves_path: Path | None = None,
    generated_path: Path | None = None,
) -> list[Diagnostic]:
    """Cross-check whichever input files are supplied; [] means consistent."""
    diags: list[Diagnostic] = []
    inputs_ok = _check_exists(diags, bank_path, "bank")
    for path, label in (
        (narration_path, "narration"),
        (curves_path, "curves"),
        (generated_path, "generated embeddings"),
    ):
        if path is not None:
            inputs_ok &= _check_exists(diags, path, label)
    if not inputs_ok:
        return diags

    try:
        bank = load_frame_bank(bank_path)
        track = load_sentence_track(narration_path) if narration_path else None
    except TeaserkitError as exc:
        diags.append(Diagnostic("error", exc.module, str(exc)))
        return diags

    if track is not None:
        if track.dim != bank.dim:
            diags.append(
                Diagnostic(
                    "error",
                    "media-store",
                    f"narration dim {track.dim} != bank dim {bank.dim}",
                )
            )
        total_tau = sum(tau_to_frames(s.tau_seconds) for s in track.sentences)
        if total_tau > bank.n:
            diags.append(
                Diagnostic(
                    "warning",
                    "cli",
                    f"narration total {total_tau} s exceeds body length {bank.n} s",
                )
            )

    if curves_path is not None:
        try:
            curves = load_score_curves(curves_path)
        except TeaserkitError as exc:
            diags.append(Diagnostic("error", exc.module, str(exc)))
            return diags
        if curves.n != bank.n:
            diags.append(
                Diagnostic(
                    "error",
                    "media-store",
                    f"curve length {curves.n} != bank frames {bank.n}",
                )
            )
        if track is not None and curves.m != track.m:
            diags.append(
                Diagnostic(
                    "error",
                    "pt-selector",
                    f"curve count {curves.m} != sentence count {track.m}",
                )
            )
        if track is not None:
            # threshold selection cannot repeat frames, so each sentence must
            # fit inside the body; the lr decoders have no such limit
            for s in track.sentences:
                if tau_to_frames(s.tau_seconds) > bank.n:
                    diags.append(
                        Diagnostic(
                            "error",
                            "pt-selector",
                            f"sentence {s.index}: narration longer than body content",
                        )
                    )

    if generated_path is not None:
        try:
            generated = load_embedding_sequence(generated_path)
        except TeaserkitError as exc:
            diags.append(Diagnostic("error", exc.module, str(exc)))
            return diags
        if generated.dim != bank.dim:
            diags.append(
                Diagnostic(
                    "error",
                    "media-store",
                    f"generated dim {generated.dim} != bank dim {bank.dim}",
                )
            )
        if track is not None:
            if generated.num_sentences != track.m:
                diags.append(
                    Diagnostic(
                        "error",
                        "lr-decoder",
                        f"generated has {generated.num_sentences} sentences, narration {track.m}",
                    )
                )
            else:
                for start, end, sent in generated.boundaries:
                    want = tau_to_frames(track.sentences[sent].tau_seconds)
                    if end - start != want:
                        diags.append(
                            Diagnostic(
                                "error",
                                "lr-decoder",
                                f"sentence {sent}: {end - start} slots, narration needs {want}",
                            )
                        )
    return diags


def validate(cfg: PipelineConfig) -> list[Diagnostic]:
    """Consistency diagnostics for a pipeline config; empty list means runnable."""
    if cfg.composer == "pt" and cfg.curves_path is None:
        return [Diagnostic("error", "cli", "curves required for pt")]
    if cfg.composer.startswith("lr") and cfg.generated_path is None:
        return [
            Diagnostic("error", "cli", f"generated embeddings required for {cfg.composer}")
        ]
    return validate_inputs(
        cfg.bank_path,
        cfg.narration_path,
        curves_path=cfg.curves_path if cfg.composer == "pt" else None,
        generated_path=cfg.generated_path if cfg.composer != "pt" else None,
    )


def _compose(cfg: PipelineConfig, bank: FrameBank, track: SentenceTrack) -> Selection:
    if cfg.composer == "pt":
        curves = load_score_curves(cfg.curves_path, bank=bank)
        return select_for_narration(curves, track, cfg.pt)
    generated = load_embedding_sequence(cfg.generated_path)
    if cfg.composer == "lr-greedy":
        decoded = greedy_decode(generated, bank)
    else:
        decoded = beam_decode(generated, bank, cfg.beam)
    if cfg.smoothing:
        decoded = smooth(decoded, generated.boundaries, bank.n)
    sentences = [
        SentenceSelection(
            index=sent,
            frames=tuple(decoded[start:end]),
            achieved_frames=end - start,
        )
        for start, end, sent in generated.boundaries
    ]
    return Selection(sentences=sentences)


def selection_report(
    selection: Selection,
    bank: FrameBank | None = None,
    track: SentenceTrack | None = None,
    gt_selection: Selection | None = None,
    pairs: list | None = None,
) -> dict:
    """Metric block shared by run_pipeline and the evaluate subcommand."""
    frames = selection.frame_sequence()
    metrics: dict = {"rep": rep(frames), "scr": scr(frames)}
    if pairs is not None:
        metrics["clip_score"] = clip_score(pairs)
    elif bank is not None and track is not None:
        auto_pairs = [
            (track.sentences[s.index].embedding, bank.embeddings[fidx])
            for s in selection.sentences
            for fidx in s.frame_sequence()
        ]
        metrics["clip_score"] = clip_score(auto_pairs)
    else:
        metrics["clip_score"] = None
    if gt_selection is not None:
        metrics["f1"] = f1(set(frames), set(gt_selection.frame_sequence()))
        metrics["reference"] = {
            "gt_rep_lower_bound": GT_REP_LOWER_BOUND,
            "gt_scr_reference": GT_SCR_REFERENCE,
        }
    else:
        metrics["f1"] = None
    return metrics


@dataclass
class PipelineResult:
    selection: Selection
    timeline: Timeline
    report: dict
    out_dir: Path


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Compose, assemble, evaluate, and write all artifacts for one config."""
    diags = validate(cfg)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise PipelineError("; ".join(str(d) for d in errors))

    bank = load_frame_bank(cfg.bank_path)
    track = load_sentence_track(cfg.narration_path)
    selection = _compose(cfg, bank, track)
    timeline = replace(assemble(selection, track), source_id=bank.source_id)

    report = {
        "format": "pipeline-report",
        "version": 1,
        "composer": cfg.composer,
        "params": _param_block(cfg),
        "warnings": [str(d) for d in diags if d.severity == "warning"],
        "selection": {
            "sentences": selection.m,
            "total_frames": len(selection.frame_sequence()),
            "shortfalls": list(timeline.shortfalls),
        },
        "metrics": selection_report(selection, bank=bank, track=track),
    }

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    save_selection(selection, cfg.out_dir / SELECTION_FILE)
    save_cutlist(timeline, cfg.out_dir / TIMELINE_FILE, "edl-json")
    save_cutlist(timeline, cfg.out_dir / CUTLIST_FILE, "ffconcat-text")
    _write_json(report, cfg.out_dir / REPORT_FILE)
    return PipelineResult(
        selection=selection, timeline=timeline, report=report, out_dir=cfg.out_dir
    )


def _param_block(cfg: PipelineConfig) -> dict:
    if cfg.composer == "pt":
        return {
            "min_clip_seconds": cfg.pt.min_clip_seconds,
            "max_overlap_seconds": cfg.pt.max_overlap_seconds,
            "lookback_sentences": cfg.pt.lookback_sentences,
        }
    return {
        "lambda": cfg.beam.lam,
        "beam_size": cfg.beam.beam_size,
        "candidates": cfg.beam.candidates,
        "smoothing": cfg.smoothing,
    }


def load_pairs(path: str | Path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Read a text/image embedding-pair file for CLIPScore evaluation."""
    doc = _read_json(path, "embedding-pairs")
    out = []
    for pos, pair in enumerate(doc.get("pairs", [])):
        text = _normalize_rows(
            np.asarray([pair["text"]], dtype=np.float32), f"pair {pos} text"
        )[0]
        image = _normalize_rows(
            np.asarray([pair["image"]], dtype=np.float32), f"pair {pos} image"
        )[0]
        out.append((text, image))
    return out


def save_pairs(pairs, path: str | Path) -> None:
    doc = {
        "format": "embedding-pairs",
        "version": 1,
        "pairs": [
            {
                "text": [float(x) for x in text],
                "image": [float(x) for x in image],
            }
            for text, image in pairs
        ],
    }
    _write_json(doc, path)


def evaluate_files(
    selection_path: Path,
    bank_path: Path,
    gt_selection_path: Path | None = None,
    pairs_path: Path | None = None,
) -> dict:
    """Build the evaluation report document for the evaluate subcommand."""
    bank = load_frame_bank(bank_path)
    selection = load_selection(selection_path)
    selection.validate(n=bank.n)
    gt = load_selection(gt_selection_path) if gt_selection_path else None
    if gt is not None:
        gt.validate(n=bank.n)
    pairs = load_pairs(pairs_path) if pairs_path else None
    metrics = selection_report(selection, gt_selection=gt, pairs=pairs)
    return {
        "format": "evaluation-report",
        "version": 1,
        "params": {
            "selection": selection_path.name,
            "bank": bank_path.name,
            "gt_selection": gt_selection_path.name if gt_selection_path else None,
            "pairs": pairs_path.name if pairs_path else None,
        },
        "metrics": metrics,
    }
