"""Command line for the adapter jobs.

Every subcommand accepts --dry-run, which swaps the live model service for a
deterministic placeholder; the emitted files are schema-valid and drive the
composer pipelines end to end, so CI never needs credentials.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import ops, prompts
from .errors import AdapterError
from .services import resolve_service


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teaserprep",
        description="prepare composer input files by calling model services",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-frames", help="frame bank from a video")
    p.add_argument("--video", required=True, help="video path or source id")
    p.add_argument("--out", required=True)
    p.add_argument("--fps", type=int, default=1)
    p.add_argument("--dim", type=int, default=ops.DEFAULT_DIM)
    p.add_argument("--duration-s", type=float, default=ops.DEFAULT_DURATION_S,
                   help="body length when the video is not probed")
    _common(p)

    p = sub.add_parser("narration", help="teaser narration from a transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--segments", type=int, default=prompts.DEFAULT_SEGMENTS)
    p.add_argument("--summary-template", default=prompts.DEFAULT_SUMMARY_TEMPLATE)
    p.add_argument("--dim", type=int, default=ops.DEFAULT_DIM)
    _common(p)

    p = sub.add_parser("curves", help="highlight curves for each sentence")
    p.add_argument("--video", required=True)
    p.add_argument("--narration", required=True)
    p.add_argument("--bank", required=True, help="frame bank fixing the curve length")
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("generated", help="per-second embeddings for the decoder")
    p.add_argument("--narration", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=ops.DEFAULT_DIM)
    _common(p)

    p = sub.add_parser("all", help="every composer input plus pipeline configs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--video", default="body", help="video path or source id")
    p.add_argument("--transcript", help="omit under --dry-run to synthesize one")
    p.add_argument("--title", default="Placeholder Documentary")
    p.add_argument("--segments", type=int, default=prompts.DEFAULT_SEGMENTS)
    p.add_argument("--summary-template", default=prompts.DEFAULT_SUMMARY_TEMPLATE)
    p.add_argument("--dim", type=int, default=ops.DEFAULT_DIM)
    p.add_argument("--duration-s", type=float, default=ops.DEFAULT_DURATION_S)
    _common(p)

    return parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dry-run", action="store_true",
                   help="use the deterministic placeholder service")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attempts", type=int, default=4,
                   help="retry attempts per service call")


def _read_transcript(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise AdapterError(f"transcript not found at {p}")
    return p.read_text(encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        service = resolve_service(args.dry_run, seed=args.seed)
        if args.command == "extract-frames":
            count = ops.extract_frame_embeddings(
                service, args.video, args.duration_s, Path(args.out),
                dim=args.dim, fps=args.fps, attempts=args.attempts,
            )
            print(f"wrote {count} frame embeddings to {args.out}")
        elif args.command == "narration":
            count = ops.generate_teaser_narration(
                service, _read_transcript(args.transcript), args.title,
                Path(args.out), dim=args.dim, segments=args.segments,
                summary_template=args.summary_template, attempts=args.attempts,
            )
            print(f"wrote {count} narration sentences to {args.out}")
        elif args.command == "curves":
            m, n = ops.score_curves_from_grounding_model(
                service, args.video, Path(args.narration), Path(args.bank),
                Path(args.out), attempts=args.attempts,
            )
            print(f"wrote {m} curves of length {n} to {args.out}")
        elif args.command == "generated":
            slots = ops.generate_embedding_sequence(
                service, Path(args.narration), Path(args.out),
                dim=args.dim, attempts=args.attempts,
            )
            print(f"wrote {slots} generated embeddings to {args.out}")
        elif args.command == "all":
            job = ops.AdapterJob(
                video=args.video,
                transcript=Path(args.transcript) if args.transcript else None,
                title=args.title,
                out_dir=Path(args.out_dir),
                dim=args.dim,
                duration_s=args.duration_s,
                segments=args.segments,
                summary_template=args.summary_template,
                retry_attempts=args.attempts,
            )
            if job.transcript is not None and not job.transcript.exists():
                raise AdapterError(f"transcript not found at {job.transcript}")
            paths = ops.run_all(service, job)
            for name, path in sorted(paths.items()):
                print(f"{name}: {path}")
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
