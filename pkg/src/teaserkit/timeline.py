"""Edit-decision lists: mapping selected body material onto teaser time.

At 1 fps a frame index is a second, so segments carry integer second ranges.
Each narration sentence contributes a contiguous span of teaser time whose
segments point back into the body content.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import TimelineError
from .store import Selection, SentenceTrack, tau_to_frames

CUTLIST_FORMATS = ("edl-json", "ffconcat-text")


@dataclass(frozen=True)
class Segment:
    sentence_index: int
    body_start_s: int  # [body_start_s, body_end_s) in body-content seconds
    body_end_s: int
    teaser_start_s: int  # [teaser_start_s, teaser_end_s) in teaser seconds
    teaser_end_s: int

    @property
    def duration_s(self) -> int:
        return self.body_end_s - self.body_start_s


@dataclass
class Timeline:
    segments: tuple[Segment, ...]
    total_seconds: int
    source_id: str = ""  # body-content identifier used by cutlist emitters
    shortfalls: tuple[int, ...] = ()  # sentences that under-filled their slot

    def validate(self) -> None:
        cursor = 0
        last_sentence = None
        for pos, seg in enumerate(self.segments):
            if seg.body_end_s <= seg.body_start_s or seg.body_start_s < 0:
                raise TimelineError(f"segment {pos}: degenerate body range")
            if seg.teaser_start_s != cursor:
                raise TimelineError(f"segment {pos}: teaser time not contiguous")
            if seg.teaser_end_s - seg.teaser_start_s != seg.duration_s:
                raise TimelineError(f"segment {pos}: teaser/body duration mismatch")
            if last_sentence is not None and seg.sentence_index < last_sentence:
                raise TimelineError(f"segment {pos}: sentences out of order")
            last_sentence = seg.sentence_index
            cursor = seg.teaser_end_s
        if cursor != self.total_seconds:
            raise TimelineError(
                f"segments cover {cursor} s, total_seconds says {self.total_seconds}"
            )


def assemble(selection: Selection, track: SentenceTrack, fps: int = 1) -> Timeline:
    """Lay the per-sentence selection onto teaser time, in narration order.

    A sentence whose selection is not flagged as a shortfall must cover its
    narration duration exactly; flagged sentences are recorded and laid out
    with whatever material they have.
    """
    if fps != 1:
        raise TimelineError("only 1 fps timelines are supported")
    if selection.fps != fps:
        raise TimelineError(f"selection is at {selection.fps} fps, expected {fps}")
    selection.validate()
    track.validate()
    if selection.m != track.m:
        raise TimelineError(
            f"selection has {selection.m} sentences, narration has {track.m}"
        )
    segments: list[Segment] = []
    shortfalls: list[int] = []
    cursor = 0
    for sent, chosen in zip(track.sentences, selection.sentences):
        pieces = sorted(chosen.merged_intervals())
        got = sum(e - s for s, e in pieces)
        want = tau_to_frames(sent.tau_seconds)
        if got != want:
            if chosen.shortfall and got < want:
                shortfalls.append(sent.index)
            else:
                raise TimelineError(
                    f"sentence {sent.index}: selected {got} s, narration needs {want} s"
                )
        for start, end in pieces:
            segments.append(
                Segment(
                    sentence_index=sent.index,
                    body_start_s=start,
                    body_end_s=end,
                    teaser_start_s=cursor,
                    teaser_end_s=cursor + (end - start),
                )
            )
            cursor += end - start
    timeline = Timeline(
        segments=tuple(segments),
        total_seconds=cursor,
        shortfalls=tuple(shortfalls),
    )
    timeline.validate()
    return timeline


def _quote_concat(name: str) -> str:
    # ffmpeg concat-demuxer quoting: wrap in single quotes, splice escaped
    # quotes between the pieces
    return "'" + name.replace("'", "'\\''") + "'"


def emit_cutlist(timeline: Timeline, fmt: str) -> str:
    """Render the timeline for downstream tools; deterministic text."""
    timeline.validate()
    if fmt == "edl-json":
        doc = {
            "format": "edl",
            "version": 1,
            "source_id": timeline.source_id,
            "total_seconds": timeline.total_seconds,
            "shortfalls": list(timeline.shortfalls),
            "segments": [
                {
                    "sentence_index": seg.sentence_index,
                    "body_start_s": seg.body_start_s,
                    "body_end_s": seg.body_end_s,
                    "teaser_start_s": seg.teaser_start_s,
                    "teaser_end_s": seg.teaser_end_s,
                }
                for seg in timeline.segments
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "ffconcat-text":
        source = _quote_concat(timeline.source_id or "body")
        lines = ["ffconcat version 1.0", ""]
        for seg in timeline.segments:
            lines.append(f"file {source}")
            lines.append(f"inpoint {seg.body_start_s:.3f}")
            lines.append(f"outpoint {seg.body_end_s:.3f}")
        return "\n".join(lines) + "\n"
    raise TimelineError(f"unsupported cutlist format {fmt!r}")


def parse_edl_json(text: str) -> Timeline:
    """Inverse of emit_cutlist(..., "edl-json")."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TimelineError(f"not valid edl-json: {exc}") from exc
    if doc.get("format") != "edl" or doc.get("version") != 1:
        raise TimelineError("not an edl-json version 1 document")
    timeline = Timeline(
        segments=tuple(
            Segment(
                sentence_index=int(seg["sentence_index"]),
                body_start_s=int(seg["body_start_s"]),
                body_end_s=int(seg["body_end_s"]),
                teaser_start_s=int(seg["teaser_start_s"]),
                teaser_end_s=int(seg["teaser_end_s"]),
            )
            for seg in doc["segments"]
        ),
        total_seconds=int(doc["total_seconds"]),
        source_id=str(doc.get("source_id", "")),
        shortfalls=tuple(int(i) for i in doc.get("shortfalls", [])),
    )
    timeline.validate()
    return timeline


def save_cutlist(timeline: Timeline, path: str | Path, fmt: str) -> None:
    Path(path).write_text(emit_cutlist(timeline, fmt), encoding="utf-8")


def load_timeline(path: str | Path) -> Timeline:
    return parse_edl_json(Path(path).read_text(encoding="utf-8"))
