"""Objective metrics for composed teasers.

Covers repetitiveness (REP), scene change rate (SCR), CLIPScore, F1 against a
ground-truth frame set, and the embedding-then-pixel matching procedure that
recovers which body frame a ground-truth teaser frame came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import MetricError
from .store import FrameBank

# reference points for human-made teasers; reported alongside GT metrics
GT_REP_LOWER_BOUND = 0.0786
GT_SCR_REFERENCE = 0.276


@dataclass
class MatchParams:
    top_k_cosine: int = 20  # body candidates per teaser frame, by embedding
    l2_threshold: float = 88.92  # max raw-pixel L2 for an accepted match
    dark_fraction: float = 0.05  # teaser frames darker than this body quantile skip matching

    def __post_init__(self) -> None:
        if self.top_k_cosine < 1:
            raise MetricError("top_k_cosine must be >= 1")
        if self.l2_threshold <= 0:
            raise MetricError("l2_threshold must be > 0")
        if not 0 <= self.dark_fraction < 1:
            raise MetricError("dark_fraction must be in [0, 1)")


class PixelAccessor(Protocol):
    """Mapping from frame index to a raw pixel array (u8, fixed resolution)."""

    def pixels(self, index: int) -> np.ndarray: ...


@dataclass
class ArrayPixels:
    """Pixel accessor backed by one in-memory array of frames."""

    frames: np.ndarray  # (n, ...) u8

    def pixels(self, index: int) -> np.ndarray:
        if index < 0 or index >= self.frames.shape[0]:
            raise MetricError(f"missing pixels for frame {index}")
        return self.frames[index]


def rep(frames) -> float:
    """Repetitiveness: 1 - unique frames / total frames."""
    frames = list(frames)
    if not frames:
        raise MetricError("rep needs a non-empty frame sequence")
    return 1.0 - len(set(frames)) / len(frames)


def scr(frames) -> float:
    """Scene change rate: maximal consecutive-index runs / total frames."""
    frames = [int(f) for f in frames]
    if not frames:
        raise MetricError("scr needs a non-empty frame sequence")
    runs = 1
    for prev, cur in zip(frames, frames[1:]):
        if cur != prev + 1:
            runs += 1
    return runs / len(frames)


def clip_score(pairs) -> float:
    """2.5 times the mean over pairs of max(cosine, 0)."""
    pairs = list(pairs)
    if not pairs:
        raise MetricError("clip_score needs at least one pair")
    total = 0.0
    for text, image in pairs:
        text = np.asarray(text, dtype=np.float64)
        image = np.asarray(image, dtype=np.float64)
        if text.shape != image.shape:
            raise MetricError(
                f"dimension mismatch in pair: {text.shape} vs {image.shape}"
            )
        total += max(float(np.dot(text, image)), 0.0)
    return 2.5 * total / len(pairs)


def f1(selected, gt) -> float:
    """F1 between a selected body-frame set and a ground-truth frame set."""
    selected = set(selected)
    gt = set(gt)
    hit = len(selected & gt)
    if not selected or not gt or hit == 0:
        return 0.0
    precision = hit / len(selected)
    recall = hit / len(gt)
    return 2 * precision * recall / (precision + recall)


def _frame_brightness(bank: FrameBank, pixel_source: PixelAccessor) -> np.ndarray:
    """Per-frame mean pixel value, from the bank if it carries one."""
    if bank.brightness is not None:
        return bank.brightness.astype(np.float64)
    return np.array(
        [float(np.mean(pixel_source.pixels(i).astype(np.float64))) for i in range(bank.n)]
    )


def _pixel_l2(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise MetricError(f"pixel resolution mismatch: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64).ravel() - b.astype(np.float64).ravel()
    return float(np.linalg.norm(diff))


def match_ground_truth(
    teaser_bank: FrameBank,
    body_bank: FrameBank,
    teaser_pixels: PixelAccessor,
    body_pixels: PixelAccessor,
    params: MatchParams | None = None,
) -> dict[int, int | None]:
    """Source body frame for each teaser frame, or None when unmatched.

    Candidates are the ``top_k_cosine`` body frames by embedding similarity;
    among them the raw-pixel L2 argmin wins iff its distance is at most
    ``l2_threshold``.  Teaser frames darker than the ``dark_fraction``
    quantile of body brightness are skipped (mapped to None).
    """
    params = params or MatchParams()
    body_emb = body_bank.embeddings.astype(np.float64)
    teaser_bright = _frame_brightness(teaser_bank, teaser_pixels)
    body_bright = _frame_brightness(body_bank, body_pixels)
    dark_cut = float(np.quantile(body_bright, params.dark_fraction))
    out: dict[int, int | None] = {}
    for i in range(teaser_bank.n):
        if teaser_bright[i] < dark_cut:
            out[i] = None
            continue
        sims = body_emb @ teaser_bank.embeddings[i].astype(np.float64)
        cands = np.argsort(-sims, kind="stable")[: min(params.top_k_cosine, body_bank.n)]
        ref = teaser_pixels.pixels(i)
        best_j, best_d = None, None
        for j in cands:
            d = _pixel_l2(ref, body_pixels.pixels(int(j)))
            if best_d is None or d < best_d or (d == best_d and int(j) < best_j):
                best_j, best_d = int(j), d
        out[i] = best_j if best_d is not None and best_d <= params.l2_threshold else None
    return out
