"""Per-sentence constrained interval selection.

For each narration sentence, a score curve over all body frames is thresholded
into candidate clips; binary search over the threshold finds the strictest
value whose surviving clips still cover the narration duration, and overshoot
is trimmed away.  Clips must be at least ``min_clip_seconds`` long and may
overlap material chosen for the previous ``lookback_sentences`` sentences by at
most ``max_overlap_seconds``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SelectorError
from .store import ScoreCurveSet, Selection, SentenceSelection, SentenceTrack

Interval = tuple[int, int]  # [start_frame, end_frame) at 1 fps


@dataclass
class PtConfig:
    min_clip_seconds: int = 3  # clips shorter than this are never selected
    max_overlap_seconds: int = 1  # allowed reuse per clip of recent sentences
    lookback_sentences: int = 2  # how many previous sentences constrain reuse
    duration_tolerance_frames: int = 1  # shortfall slack before validation escalates
    max_bisection_iters: int = 64

    def __post_init__(self) -> None:
        if self.min_clip_seconds < 1:
            raise SelectorError("min_clip_seconds must be >= 1")
        if self.max_bisection_iters < 1:
            raise SelectorError("max_bisection_iters must be >= 1")
        if self.max_overlap_seconds < 0 or self.duration_tolerance_frames < 0:
            raise SelectorError("overlap and tolerance must be >= 0")
        if self.lookback_sentences < 1:
            raise SelectorError("lookback_sentences must be >= 1")


@dataclass
class ThresholdResult:
    """Outcome of the per-sentence threshold search."""

    theta: float
    intervals: tuple[Interval, ...]
    achieved_frames: int
    shortfall: bool  # set when no constrained selection reaches the target


def runs_above_threshold(curve: np.ndarray, theta: float, min_len: int) -> list[Interval]:
    """Maximal runs of consecutive frames scoring >= theta, at least min_len long."""
    curve = np.asarray(curve, dtype=np.float64)
    if not np.isfinite(curve).all():
        raise SelectorError("curve contains non-finite values")
    mask = np.concatenate(([False], curve >= theta, [False]))
    edges = np.diff(mask.astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [(int(s), int(e)) for s, e in zip(starts, ends) if e - s >= min_len]


def _truncate_against(candidate: Interval, hist: Interval, max_overlap: int) -> list[Interval]:
    """Shrink a candidate so its overlap with one historical interval is <= max_overlap.

    The cut happens on the side where the candidate runs into the history;
    max_overlap frames of overlap adjacent to the kept material survive.  A
    candidate that straddles the history entirely is split in two.
    """
    cs, ce = candidate
    hs, he = hist
    overlap = min(ce, he) - max(cs, hs)
    if overlap <= max_overlap:
        return [candidate]
    enters_left = cs < hs
    exits_right = ce > he
    if enters_left and exits_right:
        left = (cs, hs + max_overlap)
        right = (max(he - max_overlap, hs + max_overlap), ce)
        return [p for p in (left, right) if p[1] > p[0]]
    if enters_left:
        return [(cs, hs + max_overlap)]
    if exits_right:
        return [(he - max_overlap, ce)]
    # fully inside the historical interval
    return [(cs, cs + max_overlap)] if max_overlap > 0 else []


def apply_overlap_constraint(
    candidates: list[Interval],
    history: list[Interval],
    max_overlap: int,
    min_len: int,
) -> list[Interval]:
    """Truncate candidates so each overlaps every historical interval by <= max_overlap.

    Candidates must be disjoint and sorted.  Pieces that shrink below min_len
    are dropped; the result is disjoint and sorted by start.
    """
    pieces = list(candidates)
    for hist in history:
        pieces = [p for c in pieces for p in _truncate_against(c, hist, max_overlap)]
    pieces = [p for p in pieces if p[1] - p[0] >= min_len]
    return sorted(pieces)


def _constrained_selection(
    curve: np.ndarray, theta: float, history: list[Interval], cfg: PtConfig
) -> list[Interval]:
    runs = runs_above_threshold(curve, theta, cfg.min_clip_seconds)
    return apply_overlap_constraint(
        runs, history, cfg.max_overlap_seconds, cfg.min_clip_seconds
    )


def _total_frames(intervals: list[Interval]) -> int:
    return sum(e - s for s, e in intervals)


def _trim_to_target(
    intervals: list[Interval], curve: np.ndarray, target: int
) -> list[Interval]:
    """Remove overshoot from the tail of the lowest-mean-score interval.

    Ties on mean score pick the latest-starting interval.  Fully consumed
    intervals are dropped; this final stage may leave one interval shorter
    than the minimum clip length.
    """
    ivals = list(intervals)
    total = _total_frames(ivals)
    while total > target:
        pick = min(
            range(len(ivals)),
            key=lambda i: (float(np.mean(curve[ivals[i][0] : ivals[i][1]])), -ivals[i][0]),
        )
        start, end = ivals[pick]
        cut = min(total - target, end - start)
        end -= cut
        total -= cut
        if end <= start:
            del ivals[pick]
        else:
            ivals[pick] = (start, end)
    return ivals


def binary_search_threshold(
    curve: np.ndarray,
    tau_frames: int,
    history: list[Interval],
    cfg: PtConfig,
) -> ThresholdResult:
    """Find the strictest threshold whose constrained clips cover tau_frames.

    The selected duration is a step function of the threshold, changing only at
    distinct curve values, so the search bisects the sorted unique values; the
    returned theta is the largest value still reaching the target.  Overshoot
    is trimmed to exactly tau_frames.  When even the loosest threshold falls
    short, the result carries the maximum achievable duration and a shortfall
    flag.
    """
    curve = np.asarray(curve, dtype=np.float64)
    n = curve.shape[0]
    if tau_frames < 0:
        raise SelectorError("tau_frames must be >= 0")
    if tau_frames > n:
        raise SelectorError("narration longer than body content")
    values = np.unique(curve)
    best: tuple[float, list[Interval], int] | None = None
    lo, hi = 0, len(values) - 1
    iters = 0
    while lo <= hi and iters < cfg.max_bisection_iters:
        iters += 1
        mid = (lo + hi) // 2
        selection = _constrained_selection(curve, float(values[mid]), history, cfg)
        total = _total_frames(selection)
        if total >= tau_frames:
            best = (float(values[mid]), selection, total)
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        selection = _constrained_selection(curve, float(values[0]), history, cfg)
        total = _total_frames(selection)
        return ThresholdResult(
            theta=float(values[0]),
            intervals=tuple(selection),
            achieved_frames=total,
            shortfall=total < tau_frames,
        )
    theta, selection, total = best
    if total > tau_frames:
        selection = _trim_to_target(selection, curve, tau_frames)
    return ThresholdResult(
        theta=theta,
        intervals=tuple(selection),
        achieved_frames=_total_frames(selection),
        shortfall=False,
    )


def select_for_narration(
    curves: ScoreCurveSet, track: SentenceTrack, cfg: PtConfig | None = None
) -> Selection:
    """Select clips sentence by sentence, threading the overlap history.

    Each sentence is constrained against the final intervals of the previous
    ``lookback_sentences`` sentences.
    """
    cfg = cfg or PtConfig()
    if curves.m != track.m:
        raise SelectorError(f"curve count {curves.m} != sentence count {track.m}")
    chosen: list[tuple[Interval, ...]] = []
    out: list[SentenceSelection] = []
    for sentence in track.sentences:
        history = [iv for prev in chosen[-cfg.lookback_sentences :] for iv in prev]
        result = binary_search_threshold(
            curves.curves[sentence.index], sentence.slots, history, cfg
        )
        chosen.append(result.intervals)
        out.append(
            SentenceSelection(
                index=sentence.index,
                intervals=result.intervals,
                achieved_frames=result.achieved_frames,
                shortfall=result.shortfall,
            )
        )
    return Selection(sentences=out)
