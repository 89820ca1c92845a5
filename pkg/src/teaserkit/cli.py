"""Command-line entry points.

Exit codes: 0 success, 2 validation failure (bad config or inconsistent
inputs), 3 runtime error inside a module.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .audio import (
    DEFAULT_CHUNK_SECONDS,
    DEFAULT_WINDOW_FRACTION,
    SilenceConfig,
    chunk,
    chunk_with_overlap,
    crossfade_merge,
    load_waveform,
    save_waveform,
    silence_labels,
)
from .errors import PipelineError, TeaserkitError
from .fixtures import generate_corpus
from .lr import BeamConfig, beam_decode, greedy_decode, smooth
from .pipeline import (
    PipelineConfig,
    config_from_file,
    evaluate_files,
    run_pipeline,
    validate,
    validate_inputs,
)
from .pt import PtConfig, select_for_narration
from .store import (
    Selection,
    SentenceSelection,
    _write_json,
    load_embedding_sequence,
    load_frame_bank,
    load_score_curves,
    load_selection,
    load_sentence_track,
    save_selection,
)
from .timeline import CUTLIST_FORMATS, assemble, save_cutlist


def _require(path: str, label: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise PipelineError(f"{label} file not found at {p}")
    return p


def _cmd_compose_pt(args) -> int:
    bank = load_frame_bank(_require(args.bank, "bank"))
    track = load_sentence_track(_require(args.narration, "narration"))
    curves = load_score_curves(_require(args.curves, "curves"), bank=bank)
    cfg = PtConfig(
        min_clip_seconds=args.min_clip,
        max_overlap_seconds=args.max_overlap,
        lookback_sentences=args.lookback,
    )
    selection = select_for_narration(curves, track, cfg)
    save_selection(selection, args.out)
    shortfalls = [s.index for s in selection.sentences if s.shortfall]
    if shortfalls:
        print(f"warning [pt-selector] shortfall on sentences {shortfalls}", file=sys.stderr)
    return 0


def _cmd_compose_lr(args) -> int:
    bank = load_frame_bank(_require(args.bank, "bank"))
    generated = load_embedding_sequence(_require(args.generated, "generated embeddings"))
    if args.greedy:
        decoded = greedy_decode(generated, bank)
    else:
        cfg = BeamConfig(lam=args.lam, beam_size=args.beam, candidates=args.cands)
        decoded = beam_decode(generated, bank, cfg)
    if args.smoothing == "on":
        decoded = smooth(decoded, generated.boundaries, bank.n)
    selection = Selection(
        sentences=[
            SentenceSelection(
                index=sent,
                frames=tuple(decoded[start:end]),
                achieved_frames=end - start,
            )
            for start, end, sent in generated.boundaries
        ]
    )
    save_selection(selection, args.out)
    return 0


def _cmd_evaluate(args) -> int:
    report = evaluate_files(
        _require(args.selection, "selection"),
        _require(args.bank, "bank"),
        gt_selection_path=_require(args.gt_selection, "gt selection") if args.gt_selection else None,
        pairs_path=_require(args.pairs, "pairs") if args.pairs else None,
    )
    _write_json(report, args.report)
    return 0


def _cmd_assemble(args) -> int:
    selection = load_selection(_require(args.selection, "selection"))
    track = load_sentence_track(_require(args.narration, "narration"))
    timeline = assemble(selection, track)
    save_cutlist(timeline, args.out, "edl-json")
    if args.cutlist:
        save_cutlist(timeline, args.cutlist, args.cutlist_format)
    return 0


def _cmd_audio(args) -> int:
    if args.audio_command == "chunk":
        w = load_waveform(_require(args.infile, "audio"))
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.no_overlap:
            pieces = chunk(w, args.chunk_seconds)
        else:
            pieces = chunk_with_overlap(w, args.chunk_seconds, args.window_fraction)
        for i, piece in enumerate(pieces):
            save_waveform(piece, out_dir / f"chunk-{i:03d}.wav")
        print(f"wrote {len(pieces)} chunks to {out_dir}")
        return 0
    if args.audio_command == "merge":
        paths = sorted(Path(args.in_dir).glob("chunk-*.wav"))
        if not paths:
            raise PipelineError(f"no chunk-*.wav files in {args.in_dir}")
        merged = crossfade_merge([load_waveform(p) for p in paths], args.window_fraction)
        save_waveform(merged, args.out)
        return 0
    w = load_waveform(_require(args.infile, "audio"))  # silence
    if args.threshold_db is not None:
        cfg = SilenceConfig(threshold_db=args.threshold_db, frame_ms=args.frame_ms)
    else:
        cfg = SilenceConfig.for_stem(args.stem, frame_ms=args.frame_ms)
    labels = silence_labels(w, cfg)
    _write_json(
        {
            "format": "silence-labels",
            "version": 1,
            "threshold_db": cfg.threshold_db,
            "frame_ms": cfg.frame_ms,
            "labels": [int(x) for x in labels],
        },
        args.out,
    )
    return 0


def _cmd_validate(args) -> int:
    diags = validate_inputs(
        Path(args.bank),
        Path(args.narration) if args.narration else None,
        curves_path=Path(args.curves) if args.curves else None,
        generated_path=Path(args.generated) if args.generated else None,
    )
    for d in diags:
        print(str(d), file=sys.stderr)
    if not diags:
        print("ok: inputs are consistent")
    return 2 if any(d.severity == "error" for d in diags) else 0


def _cmd_fixtures(args) -> int:
    manifest = generate_corpus(
        args.out_dir, seed=args.seed, frames=args.frames, sentences=args.sentences
    )
    for name, path in sorted(manifest.items()):
        print(f"{name}: {path}")
    return 0


def _cmd_run(args) -> int:
    overrides = {
        "composer": args.composer,
        "out_dir": args.out_dir,
        "smoothing": args.smoothing == "on" if args.smoothing else None,
    }
    cfg = config_from_file(_require(args.config, "config"), overrides)
    diags = validate(cfg)
    for d in diags:
        print(str(d), file=sys.stderr)
    result = run_pipeline(cfg)
    print(f"wrote pipeline outputs to {result.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teaserkit", description="Compose documentary teasers from embeddings."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose-pt", help="threshold-based interval selection")
    p.add_argument("--bank", required=True)
    p.add_argument("--curves", required=True)
    p.add_argument("--narration", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-clip", type=int, default=3)
    p.add_argument("--max-overlap", type=int, default=1)
    p.add_argument("--lookback", type=int, default=2)
    p.set_defaults(func=_cmd_compose_pt)

    p = sub.add_parser("compose-lr", help="decode generated embeddings to frames")
    p.add_argument("--bank", required=True)
    p.add_argument("--generated", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--cands", type=int, default=10)
    p.add_argument("--smoothing", choices=("on", "off"), default="on")
    p.add_argument("--greedy", action="store_true", help="nearest neighbor per slot")
    p.set_defaults(func=_cmd_compose_lr)

    p = sub.add_parser("evaluate", help="score a selection file")
    p.add_argument("--selection", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("--gt-selection")
    p.add_argument("--pairs")
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("assemble", help="turn a selection into a timeline and cutlist")
    p.add_argument("--selection", required=True)
    p.add_argument("--narration", required=True)
    p.add_argument("--out", required=True, help="timeline path (edl-json)")
    p.add_argument("--cutlist", help="optional second cutlist file")
    p.add_argument("--cutlist-format", choices=CUTLIST_FORMATS, default="ffconcat-text")
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("audio-prep", help="chunk, merge, or label audio")
    asub = p.add_subparsers(dest="audio_command", required=True)
    pc = asub.add_parser("chunk")
    pc.add_argument("--in", dest="infile", required=True)
    pc.add_argument("--out-dir", required=True)
    pc.add_argument("--chunk-seconds", type=int, default=DEFAULT_CHUNK_SECONDS)
    pc.add_argument("--window-fraction", type=float, default=DEFAULT_WINDOW_FRACTION)
    pc.add_argument("--no-overlap", action="store_true")
    pc.set_defaults(func=_cmd_audio)
    pm = asub.add_parser("merge")
    pm.add_argument("--in-dir", required=True)
    pm.add_argument("--out", required=True)
    pm.add_argument("--window-fraction", type=float, default=DEFAULT_WINDOW_FRACTION)
    pm.set_defaults(func=_cmd_audio)
    ps = asub.add_parser("silence")
    ps.add_argument("--in", dest="infile", required=True)
    ps.add_argument("--out", required=True)
    ps.add_argument("--stem", choices=("music", "dialogue", "sfx"), default="music")
    ps.add_argument("--threshold-db", type=float)
    ps.add_argument("--frame-ms", type=int, default=100)
    ps.set_defaults(func=_cmd_audio)

    p = sub.add_parser("validate", help="cross-check input files")
    p.add_argument("--bank", required=True)
    p.add_argument("--narration")
    p.add_argument("--curves")
    p.add_argument("--generated")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fixtures", help="synthetic corpus tools")
    fsub = p.add_subparsers(dest="fixtures_command", required=True)
    pg = fsub.add_parser("gen")
    pg.add_argument("--out-dir", required=True)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--frames", type=int, default=120)
    pg.add_argument("--sentences", type=int, default=4)
    pg.set_defaults(func=_cmd_fixtures)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--composer", choices=("pt", "lr-greedy", "lr-beam"))
    p.add_argument("--out-dir")
    p.add_argument("--smoothing", choices=("on", "off"))
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error [cli] {exc}", file=sys.stderr)
        return 2
    except TeaserkitError as exc:
        print(f"error [{exc.module}] {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error [cli] {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
