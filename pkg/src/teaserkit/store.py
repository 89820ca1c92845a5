"""Data model and file formats for embeddings, narration tracks, score curves,
and selections.

Frame banks use a small binary container (magic ``TGFB``); narration tracks,
score curves, selections, and generated embedding sequences use canonical JSON
sidecars.  Serialization is deterministic: saving a loaded value reproduces the
file byte for byte.  All embedding rows are unit-normalized on load so cosine
similarity reduces to a dot product everywhere downstream.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import StoreError

FRAME_BANK_MAGIC = b"TGFB"
FRAME_BANK_VERSION = 1

SCORE_KINDS = ("external-highlight", "clip-similarity")

# Rows whose L2 norm is already within this tolerance of 1 are left untouched,
# which makes normalization idempotent at float32 precision (byte-exact
# save/load round trips).
NORM_TOLERANCE = 1e-6

_ZERO_NORM = 1e-12


def _normalize_rows(rows: np.ndarray, entity: str) -> np.ndarray:
    """Return ``rows`` as float32 with unit L2 rows; reject zero/non-finite rows."""
    rows = np.ascontiguousarray(rows, dtype=np.float32)
    if rows.ndim != 2:
        raise StoreError(f"expected a 2-D array of {entity}s, got shape {rows.shape}")
    finite = np.isfinite(rows).all(axis=1)
    if not finite.all():
        raise StoreError(f"non-finite value in {entity} {int(np.flatnonzero(~finite)[0])}")
    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    if (norms < _ZERO_NORM).any():
        raise StoreError(f"zero-norm {entity} {int(np.flatnonzero(norms < _ZERO_NORM)[0])}")
    scale = np.where(np.abs(norms - 1.0) <= NORM_TOLERANCE, 1.0, norms)
    return (rows.astype(np.float64) / scale[:, None]).astype(np.float32)


def _normalize_vector(vec: np.ndarray, entity: str) -> np.ndarray:
    return _normalize_rows(np.asarray(vec, dtype=np.float32).reshape(1, -1), entity)[0]


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit-norm vectors (their dot product).

    Raises StoreError on dimension mismatch.  The result is clamped to
    [-1, 1] to absorb float32 rounding.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise StoreError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def batch_cosine(rows: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine similarity of every unit-norm row against a unit-norm query."""
    rows = np.asarray(rows, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    if rows.shape[1] != query.shape[0]:
        raise StoreError(f"dimension mismatch: {rows.shape[1]} vs {query.shape[0]}")
    return np.clip(rows @ query, -1.0, 1.0)


def tau_to_frames(tau_seconds: float) -> int:
    """Narration duration in seconds -> output frame slots (round half up)."""
    if not math.isfinite(tau_seconds) or tau_seconds < 0:
        raise StoreError(f"invalid duration {tau_seconds!r}")
    return int(math.floor(tau_seconds + 0.5))


# ---------------------------------------------------------------------------
# Frame bank (binary container)
# ---------------------------------------------------------------------------

@dataclass
class FrameBank:
    """Per-frame embedding matrix of the body content, sampled at 1 fps.

    ``embeddings`` is (n, dim) float32 with unit-norm rows; ``brightness`` is an
    optional per-frame mean raw-pixel value in [0, 255].
    """

    embeddings: np.ndarray
    brightness: np.ndarray | None = None
    source_id: str = ""

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @classmethod
    def from_rows(
        cls,
        rows: np.ndarray,
        brightness: np.ndarray | None = None,
        source_id: str = "",
    ) -> "FrameBank":
        """Build a bank from raw rows, normalizing and validating them."""
        emb = _normalize_rows(rows, "row")
        if emb.shape[0] < 1 or emb.shape[1] < 1:
            raise StoreError("frame bank must have n >= 1 and dim >= 1")
        if brightness is not None:
            brightness = np.ascontiguousarray(brightness, dtype=np.float32)
            if brightness.shape != (emb.shape[0],):
                raise StoreError(
                    f"brightness length {brightness.shape[0]} != frame count {emb.shape[0]}"
                )
            if not np.isfinite(brightness).all():
                raise StoreError("non-finite brightness value")
        return cls(embeddings=emb, brightness=brightness, source_id=source_id)


def save_frame_bank(bank: FrameBank, path: str | Path) -> None:
    """Write the TGFB container: header, f32-LE rows, optional brightness."""
    path = Path(path)
    has_brightness = bank.brightness is not None
    header = FRAME_BANK_MAGIC + struct.pack(
        "<IIIB", FRAME_BANK_VERSION, bank.n, bank.dim, int(has_brightness)
    )
    payload = bank.embeddings.astype("<f4", copy=False).tobytes()
    blob = header + payload
    if has_brightness:
        blob += bank.brightness.astype("<f4", copy=False).tobytes()
    path.write_bytes(blob)


def load_frame_bank(path: str | Path) -> FrameBank:
    """Read a TGFB container; rows are unit-normalized, zero rows rejected."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 17:
        raise StoreError(f"{path.name}: truncated header")
    if blob[:4] != FRAME_BANK_MAGIC:
        raise StoreError(f"{path.name}: bad magic {blob[:4]!r}")
    version, n, dim, has_brightness = struct.unpack("<IIIB", blob[4:17])
    if version != FRAME_BANK_VERSION:
        raise StoreError(f"{path.name}: unsupported version {version}")
    if n < 1 or dim < 1:
        raise StoreError(f"{path.name}: invalid shape n={n} dim={dim}")
    offset = 17
    need = n * dim * 4 + (n * 4 if has_brightness else 0)
    if len(blob) - offset != need:
        raise StoreError(f"{path.name}: payload size {len(blob) - offset}, expected {need}")
    rows = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=offset).reshape(n, dim)
    offset += n * dim * 4
    brightness = None
    if has_brightness:
        brightness = np.frombuffer(blob, dtype="<f4", count=n, offset=offset).copy()
    return FrameBank(
        embeddings=_normalize_rows(rows, "row"),
        brightness=brightness,
        source_id=path.stem,
    )


# ---------------------------------------------------------------------------
# Sentence track (JSON sidecar)
# ---------------------------------------------------------------------------

@dataclass
class Sentence:
    index: int
    text: str
    tau_seconds: float  # synthesized-speech duration, > 0
    embedding: np.ndarray  # unit-norm dim-vector

    @property
    def slots(self) -> int:
        return tau_to_frames(self.tau_seconds)


@dataclass
class SentenceTrack:
    """Ordered teaser-narration sentences with synthesized-speech durations."""

    sentences: list[Sentence]

    @property
    def m(self) -> int:
        return len(self.sentences)

    @property
    def dim(self) -> int:
        return self.sentences[0].embedding.shape[0]

    def validate(self) -> None:
        if len(self.sentences) < 1:
            raise StoreError("m must be >= 1")
        for pos, s in enumerate(self.sentences):
            if s.index != pos:
                raise StoreError(f"sentence indices must be contiguous, got {s.index} at {pos}")
            if not (math.isfinite(s.tau_seconds) and s.tau_seconds > 0):
                raise StoreError(f"tau_seconds must be > 0 for sentence {pos}")
            if s.embedding.shape != self.sentences[0].embedding.shape:
                raise StoreError(f"embedding dim mismatch at sentence {pos}")


def save_sentence_track(track: SentenceTrack, path: str | Path) -> None:
    track.validate()
    doc = {
        "format": "sentence-track",
        "version": 1,
        "sentences": [
            {
                "index": s.index,
                "text": s.text,
                "tau_seconds": float(s.tau_seconds),
                "embedding": [float(x) for x in s.embedding],
            }
            for s in track.sentences
        ],
    }
    _write_json(doc, path)


def load_sentence_track(path: str | Path) -> SentenceTrack:
    doc = _read_json(path, "sentence-track")
    raw = doc.get("sentences", [])
    if not raw:
        raise StoreError("m must be >= 1")
    sentences = []
    for entry in raw:
        emb = _normalize_vector(
            np.asarray(entry["embedding"], dtype=np.float32), "sentence embedding"
        )
        sentences.append(
            Sentence(
                index=int(entry["index"]),
                text=str(entry["text"]),
                tau_seconds=float(entry["tau_seconds"]),
                embedding=emb,
            )
        )
    track = SentenceTrack(sentences=sentences)
    track.validate()
    return track


# ---------------------------------------------------------------------------
# Score curves (JSON sidecar)
# ---------------------------------------------------------------------------

@dataclass
class ScoreCurveSet:
    """One score curve per sentence over all body frames."""

    curves: np.ndarray  # (m, n) float32
    score_kind: str = "clip-similarity"

    @property
    def m(self) -> int:
        return self.curves.shape[0]

    @property
    def n(self) -> int:
        return self.curves.shape[1]

    def validate(self, expected_n: int | None = None) -> None:
        if self.score_kind not in SCORE_KINDS:
            raise StoreError(f"unknown score_kind {self.score_kind!r}")
        if self.curves.ndim != 2 or self.m < 1:
            raise StoreError("score curve set must hold at least one curve")
        for i in range(self.m):
            if not np.isfinite(self.curves[i]).all():
                raise StoreError(f"non-finite value in curve {i}")
            if expected_n is not None and self.curves.shape[1] != expected_n:
                raise StoreError(
                    f"curve {i} has length {self.curves.shape[1]}, expected {expected_n}"
                )


def save_score_curves(curves: ScoreCurveSet, path: str | Path) -> None:
    curves.validate()
    doc = {
        "format": "score-curves",
        "version": 1,
        "score_kind": curves.score_kind,
        "curves": [[float(x) for x in row] for row in curves.curves],
    }
    _write_json(doc, path)


def load_score_curves(path: str | Path, bank: FrameBank | None = None) -> ScoreCurveSet:
    """Load curves; when ``bank`` is given every curve length is checked against bank.n."""
    doc = _read_json(path, "score-curves")
    raw = doc.get("curves", [])
    if not raw:
        raise StoreError("score curve set must hold at least one curve")
    lengths = {len(row) for row in raw}
    if len(lengths) != 1:
        raise StoreError("curves have inconsistent lengths")
    curves = ScoreCurveSet(
        curves=np.asarray(raw, dtype=np.float32),
        score_kind=str(doc.get("score_kind", "clip-similarity")),
    )
    curves.validate(expected_n=bank.n if bank is not None else None)
    return curves


# ---------------------------------------------------------------------------
# Selection (JSON sidecar)
# ---------------------------------------------------------------------------

@dataclass
class SentenceSelection:
    """Chosen body material for one sentence: intervals or a frame sequence.

    Exactly one of ``intervals`` / ``frames`` is the canonical form; the other
    is derived on save.  ``shortfall`` marks sentences whose constrained
    selection could not reach the narration duration.
    """

    index: int
    intervals: tuple[tuple[int, int], ...] | None = None  # [start, end) frames
    frames: tuple[int, ...] | None = None
    achieved_frames: int = 0
    shortfall: bool = False

    @property
    def kind(self) -> str:
        return "frames" if self.frames is not None else "intervals"

    def frame_sequence(self) -> list[int]:
        """All selected frame indices in playback order."""
        if self.frames is not None:
            return list(self.frames)
        out: list[int] = []
        for start, end in self.intervals or ():
            out.extend(range(start, end))
        return out

    def merged_intervals(self) -> tuple[tuple[int, int], ...]:
        """Intervals in playback order; consecutive frame indices are merged."""
        if self.frames is None:
            return tuple(self.intervals or ())
        runs: list[tuple[int, int]] = []
        for idx in self.frames:
            if runs and idx == runs[-1][1]:
                runs[-1] = (runs[-1][0], idx + 1)
            else:
                runs.append((idx, idx + 1))
        return tuple(runs)


@dataclass
class Selection:
    """Per-sentence chosen body-frame material, the unit all metrics consume."""

    sentences: list[SentenceSelection]
    fps: int = 1

    @property
    def m(self) -> int:
        return len(self.sentences)

    def frame_sequence(self) -> list[int]:
        """Concatenated frame indices across sentences, in narration order."""
        out: list[int] = []
        for s in self.sentences:
            out.extend(s.frame_sequence())
        return out

    def validate(self, n: int | None = None) -> None:
        if len(self.sentences) < 1:
            raise StoreError("m must be >= 1")
        for pos, s in enumerate(self.sentences):
            if s.index != pos:
                raise StoreError(f"selection indices must be contiguous, got {s.index} at {pos}")
            if (s.intervals is None) == (s.frames is None):
                raise StoreError(f"sentence {pos}: exactly one of intervals/frames required")
            if s.intervals is not None:
                prev_end = None
                for start, end in s.intervals:
                    if end <= start or start < 0:
                        raise StoreError(f"sentence {pos}: degenerate interval [{start}, {end})")
                    if prev_end is not None and start < prev_end:
                        raise StoreError(f"sentence {pos}: intervals overlap or are unsorted")
                    if n is not None and end > n:
                        raise StoreError(f"sentence {pos}: interval end {end} out of range ({n})")
                    prev_end = end
            else:
                for idx in s.frames:
                    if idx < 0 or (n is not None and idx >= n):
                        raise StoreError(f"sentence {pos}: frame index {idx} out of range")


def save_selection(selection: Selection, path: str | Path) -> None:
    """Write per-sentence intervals (seconds at 1 fps) and frame indices."""
    selection.validate()
    entries = []
    for s in selection.sentences:
        entries.append(
            {
                "index": s.index,
                "kind": s.kind,
                "intervals": [[int(a), int(b)] for a, b in s.merged_intervals()],
                "frames": [int(x) for x in s.frame_sequence()],
                "achieved_frames": int(s.achieved_frames),
                "shortfall": bool(s.shortfall),
            }
        )
    doc = {
        "format": "selection",
        "version": 1,
        "fps": selection.fps,
        "sentences": entries,
    }
    _write_json(doc, path)


def load_selection(path: str | Path) -> Selection:
    doc = _read_json(path, "selection")
    sentences = []
    for entry in doc.get("sentences", []):
        kind = entry.get("kind", "intervals")
        if kind == "frames":
            sel = SentenceSelection(
                index=int(entry["index"]),
                frames=tuple(int(x) for x in entry["frames"]),
                achieved_frames=int(entry["achieved_frames"]),
                shortfall=bool(entry["shortfall"]),
            )
        else:
            sel = SentenceSelection(
                index=int(entry["index"]),
                intervals=tuple((int(a), int(b)) for a, b in entry["intervals"]),
                achieved_frames=int(entry["achieved_frames"]),
                shortfall=bool(entry["shortfall"]),
            )
        sentences.append(sel)
    selection = Selection(sentences=sentences, fps=int(doc.get("fps", 1)))
    selection.validate()
    return selection


# ---------------------------------------------------------------------------
# Generated embedding sequence (JSON sidecar)
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingSequence:
    """Generated image-embedding rows, one per output frame slot, grouped by sentence.

    ``boundaries`` holds (start_slot, end_slot, sentence_index) triples that
    partition [0, length) with no gaps or overlaps.
    """

    rows: np.ndarray  # (n_t, dim) float32, unit rows
    boundaries: tuple[tuple[int, int, int], ...]

    @property
    def length(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def num_sentences(self) -> int:
        return len(self.boundaries)

    def sentence_of_slot(self) -> np.ndarray:
        out = np.empty(self.length, dtype=np.int64)
        for start, end, sent in self.boundaries:
            out[start:end] = sent
        return out

    def validate(self) -> None:
        cursor = 0
        for pos, (start, end, sent) in enumerate(self.boundaries):
            if start != cursor or end <= start:
                raise StoreError(f"boundaries must partition the slot range (entry {pos})")
            if sent != pos:
                raise StoreError(f"sentence indices must be contiguous, got {sent} at {pos}")
            cursor = end
        if cursor != self.length:
            raise StoreError(f"boundaries cover {cursor} slots, rows hold {self.length}")

    @classmethod
    def from_sentence_rows(cls, per_sentence: list[np.ndarray]) -> "EmbeddingSequence":
        if not per_sentence:
            raise StoreError("m must be >= 1")
        rows = _normalize_rows(np.concatenate(per_sentence, axis=0), "slot row")
        boundaries = []
        cursor = 0
        for sent, block in enumerate(per_sentence):
            boundaries.append((cursor, cursor + block.shape[0], sent))
            cursor += block.shape[0]
        seq = cls(rows=rows, boundaries=tuple(boundaries))
        seq.validate()
        return seq


def save_embedding_sequence(seq: EmbeddingSequence, path: str | Path) -> None:
    seq.validate()
    doc = {
        "format": "embedding-sequence",
        "version": 1,
        "dim": seq.dim,
        "sentences": [
            {
                "index": sent,
                "embeddings": [[float(x) for x in seq.rows[t]] for t in range(start, end)],
            }
            for start, end, sent in seq.boundaries
        ],
    }
    _write_json(doc, path)


def load_embedding_sequence(path: str | Path) -> EmbeddingSequence:
    doc = _read_json(path, "embedding-sequence")
    blocks = []
    for entry in doc.get("sentences", []):
        block = np.asarray(entry["embeddings"], dtype=np.float32)
        if block.ndim != 2 or block.shape[0] < 1:
            raise StoreError(f"sentence {entry.get('index')}: empty slot block")
        blocks.append(block)
    return EmbeddingSequence.from_sentence_rows(blocks)


# ---------------------------------------------------------------------------
# JSON plumbing
# ---------------------------------------------------------------------------

def _write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _read_json(path: str | Path, expected_format: str) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StoreError(f"{path.name}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != expected_format:
        raise StoreError(f"{path.name}: not a {expected_format} file")
    if doc.get("version") != 1:
        raise StoreError(f"{path.name}: unsupported version {doc.get('version')!r}")
    return doc
