"""Writers for the composition toolkit's file formats.

The adapter talks to the primary package through files only, so the formats
are reproduced here rather than imported: canonical JSON (2-space indent,
trailing newline) and the TGFB binary frame-bank container. Every document
written here must pass `teaserkit validate` with zero diagnostics.
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import AdapterError

FRAME_BANK_MAGIC = b"TGFB"
FRAME_BANK_VERSION = 1


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def tau_to_frames(tau_seconds: float) -> int:
    """Round half up, matching the composer's duration conversion."""
    return int(math.floor(tau_seconds + 0.5))


def write_frame_bank(embeddings: np.ndarray, path: str | Path) -> None:
    emb = np.asarray(embeddings, dtype=np.float32)
    if emb.ndim != 2 or emb.shape[0] < 1 or emb.shape[1] < 1:
        raise AdapterError(f"frame bank needs a (n, dim) matrix, got {emb.shape}")
    n, dim = emb.shape
    header = FRAME_BANK_MAGIC + struct.pack("<IIIB", FRAME_BANK_VERSION, n, dim, 0)
    Path(path).write_bytes(header + emb.astype("<f4", copy=False).tobytes())


def read_frame_bank_shape(path: str | Path) -> tuple[int, int]:
    """(n, dim) from a TGFB header, without loading the payload."""
    blob = Path(path).read_bytes()[:17]
    if len(blob) < 17 or blob[:4] != FRAME_BANK_MAGIC:
        raise AdapterError(f"{Path(path).name}: not a frame bank")
    version, n, dim, _ = struct.unpack("<IIIB", blob[4:17])
    if version != FRAME_BANK_VERSION:
        raise AdapterError(f"{Path(path).name}: unsupported version {version}")
    return n, dim


def write_sentence_track(sentences: list[dict], path: str | Path) -> None:
    """`sentences` rows carry text, tau_seconds, and a unit embedding."""
    doc = {
        "format": "sentence-track",
        "version": 1,
        "sentences": [
            {
                "index": pos,
                "text": s["text"],
                "tau_seconds": float(s["tau_seconds"]),
                "embedding": [float(x) for x in s["embedding"]],
            }
            for pos, s in enumerate(sentences)
        ],
    }
    write_json(doc, path)


def read_sentence_texts(path: str | Path) -> list[str]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != "sentence-track":
        raise AdapterError(f"{Path(path).name}: not a sentence track")
    return [s["text"] for s in doc.get("sentences", [])]


def read_sentence_taus(path: str | Path) -> list[float]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != "sentence-track":
        raise AdapterError(f"{Path(path).name}: not a sentence track")
    return [float(s["tau_seconds"]) for s in doc.get("sentences", [])]


def write_score_curves(curves: np.ndarray, path: str | Path) -> None:
    arr = np.asarray(curves, dtype=np.float32)
    if arr.ndim != 2:
        raise AdapterError(f"score curves need a (m, n) matrix, got {arr.shape}")
    doc = {
        "format": "score-curves",
        "version": 1,
        "score_kind": "external-highlight",
        "curves": [[float(x) for x in row] for row in arr],
    }
    write_json(doc, path)


def write_embedding_sequence(per_sentence: list[np.ndarray], path: str | Path) -> None:
    """One (slots, dim) block of generated embeddings per sentence."""
    if not per_sentence:
        raise AdapterError("embedding sequence needs at least one sentence")
    dim = int(np.asarray(per_sentence[0]).shape[1])
    doc = {
        "format": "embedding-sequence",
        "version": 1,
        "dim": dim,
        "sentences": [
            {
                "index": pos,
                "embeddings": [[float(x) for x in row] for row in np.asarray(block)],
            }
            for pos, block in enumerate(per_sentence)
        ],
    }
    write_json(doc, path)


def write_pipeline_config(
    composer: str, out_dir_name: str, path: str | Path
) -> None:
    """Ready-to-run config with file names relative to the config location."""
    doc = {
        "format": "pipeline-config",
        "version": 1,
        "composer": composer,
        "bank": "bank.tgfb",
        "narration": "narration.json",
        "curves": "curves.json",
        "generated": "generated.json",
        "out_dir": out_dir_name,
    }
    write_json(doc, path)
