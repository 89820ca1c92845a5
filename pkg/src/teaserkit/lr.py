"""Decoding generated embedding sequences against a frame bank.

Each generated slot embedding is resolved to a body frame, either greedily
(nearest neighbor per slot) or with a regularized beam search that penalizes
visual similarity between frames decoded for different sentences.  A smoothing
pass then spreads runs of repeated frames into short consecutive windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecoderError
from .store import EmbeddingSequence, FrameBank


@dataclass
class BeamConfig:
    lam: float = 1.0  # strength of the cross-sentence similarity penalty
    beam_size: int = 5  # partial sequences kept per slot (K1)
    candidates: int = 10  # nearest frames considered per slot (K2)
    # ties in similarity or score always resolve toward the lower frame
    # index / lexicographically smaller sequence, so decoding is reproducible

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise DecoderError("lam must be >= 0")
        if self.beam_size < 1 or self.candidates < 1:
            raise DecoderError("beam_size and candidates must be >= 1")


def nearest_frames(
    query: np.ndarray, bank: FrameBank, k: int
) -> list[tuple[int, float]]:
    """Top-k bank frames by cosine to ``query``, ties toward lower index."""
    sims = bank.embeddings.astype(np.float64) @ np.asarray(query, dtype=np.float64)
    order = np.argsort(-sims, kind="stable")[: min(k, bank.n)]
    return [(int(i), float(sims[i])) for i in order]


def phi_score(
    generated: EmbeddingSequence,
    decoded: list[int] | tuple[int, ...] | np.ndarray,
    bank: FrameBank,
    lam: float,
) -> float:
    """Objective value of a decoded sequence.

    Sum of slot-to-frame cosines, minus ``lam`` times the sum of cosines over
    every unordered pair of decoded frames whose slots belong to different
    sentences.
    """
    decoded = np.asarray(decoded, dtype=np.int64)
    if decoded.shape[0] != generated.length:
        raise DecoderError(
            f"decoded length {decoded.shape[0]} != generated length {generated.length}"
        )
    if decoded.shape[0] == 0:
        return 0.0
    if np.any(decoded < 0) or np.any(decoded >= bank.n):
        raise DecoderError("frame index out of range")
    picked = bank.embeddings[decoded].astype(np.float64)
    fidelity = float(np.sum(np.einsum("ij,ij->i", generated.rows.astype(np.float64), picked)))
    sent = generated.sentence_of_slot()
    gram = picked @ picked.T
    cross = (sent[:, None] != sent[None, :]) & (np.arange(len(sent))[:, None] < np.arange(len(sent))[None, :])
    return fidelity - lam * float(np.sum(gram[cross]))


def greedy_decode(generated: EmbeddingSequence, bank: FrameBank) -> list[int]:
    """Nearest bank frame for each slot independently."""
    if generated.length == 0:
        return []
    sims = generated.rows.astype(np.float64) @ bank.embeddings.astype(np.float64).T
    return [int(i) for i in np.argmax(sims, axis=1)]  # argmax takes the first max


@dataclass
class _Beam:
    indices: tuple[int, ...]
    score: float  # incrementally accumulated objective
    sums: np.ndarray  # (num_sentences, dim) f64, decoded-embedding sum per sentence


def _beam_search(
    generated: EmbeddingSequence, bank: FrameBank, cfg: BeamConfig
) -> list[_Beam]:
    """Run the search and return all completed beams (internal, for checks)."""
    sent_of = generated.sentence_of_slot()
    beams = [
        _Beam(
            indices=(),
            score=0.0,
            sums=np.zeros((generated.num_sentences, bank.dim), dtype=np.float64),
        )
    ]
    frames = bank.embeddings.astype(np.float64)
    for t in range(generated.length):
        cands = nearest_frames(generated.rows[t], bank, cfg.candidates)
        s = int(sent_of[t])
        grown = []
        for beam in beams:
            other = beam.sums.sum(axis=0) - beam.sums[s]
            for idx, sim in cands:
                delta = sim - cfg.lam * float(frames[idx] @ other)
                sums = beam.sums.copy()
                sums[s] += frames[idx]
                grown.append(
                    _Beam(indices=beam.indices + (idx,), score=beam.score + delta, sums=sums)
                )
        grown.sort(key=lambda b: (-b.score, b.indices))
        beams = grown[: cfg.beam_size]
    return beams


def _hill_climb(
    generated: EmbeddingSequence,
    bank: FrameBank,
    lam: float,
    cands: list[list[tuple[int, float]]],
    start: tuple[int, ...],
) -> tuple[int, ...]:
    """Single-slot best-improvement sweeps over the candidate lattice.

    Only strictly improving moves (margin 1e-12) are taken, so a sequence
    that is already the lattice optimum is returned unchanged.
    """
    frames = bank.embeddings.astype(np.float64)
    sent = generated.sentence_of_slot()
    seq = list(start)
    sums = np.zeros((generated.num_sentences, bank.dim), dtype=np.float64)
    for t, f in enumerate(seq):
        sums[sent[t]] += frames[f]
    sim = [dict(row) for row in cands]
    for _ in range(50):  # each sweep strictly improves, cap is defensive
        moved = False
        for t in range(len(seq)):
            s = int(sent[t])
            other = sums.sum(axis=0) - sums[s]
            cur = seq[t]
            base = sim[t][cur] - lam * float(frames[cur] @ other)
            best_gain, best_g = 1e-12, None
            for g, sim_g in cands[t]:
                if g == cur:
                    continue
                gain = sim_g - lam * float(frames[g] @ other) - base
                if gain > best_gain:
                    best_gain, best_g = gain, g
            if best_g is not None:
                sums[s] += frames[best_g] - frames[cur]
                seq[t] = best_g
                moved = True
        if not moved:
            break
    return tuple(seq)


def beam_decode(
    generated: EmbeddingSequence, bank: FrameBank, cfg: BeamConfig | None = None
) -> list[int]:
    """Regularized beam search over per-slot top-``candidates`` frames.

    Among completed beams the sequence with the highest ``phi_score`` wins.
    Two refinements guard against aggressive pruning: the greedy sequence is
    considered whenever all of its choices lie inside the candidate sets, and
    the winner is polished with single-slot hill climbing on the same lattice.
    Neither can change a result that is already the lattice optimum.
    """
    cfg = cfg or BeamConfig()
    if generated.length == 0:
        return []
    cands = [
        nearest_frames(generated.rows[t], bank, cfg.candidates)
        for t in range(generated.length)
    ]
    beams = _beam_search(generated, bank, cfg)
    # Exact rescoring is limited to beams whose incremental score sits within
    # float-accumulation distance of the top; anything further behind cannot be
    # the phi_score argmax, so pruning here never changes the result.
    margin = 1e-9 * (1.0 + abs(beams[0].score))
    pool = {b.indices for b in beams if b.score >= beams[0].score - margin}
    seeds = [b.indices for b in beams[:8]]
    greedy = tuple(greedy_decode(generated, bank))
    if all(f in sim for f, sim in zip(greedy, (dict(row) for row in cands))):
        pool.add(greedy)
        seeds.append(greedy)
    for seq in seeds:
        pool.add(_hill_climb(generated, bank, cfg.lam, cands, seq))
    best = min(pool, key=lambda seq: (-phi_score(generated, seq, bank, cfg.lam), seq))
    return list(best)


def smooth(
    decoded: list[int] | tuple[int, ...] | np.ndarray,
    boundaries,
    n: int,
) -> list[int]:
    """Spread within-sentence runs of one repeated frame into consecutive frames.

    A run of k identical indices i becomes the window of k consecutive indices
    starting at i - floor(k/2); windows poking outside [0, n) are shifted back
    in rather than truncated, so the length never changes.  Replacements are
    applied leftmost-first until no run remains.
    """
    out = [int(x) for x in decoded]
    if any(x < 0 or x >= n for x in out):
        raise DecoderError("frame index out of range")
    spans = [(int(b[0]), int(b[1])) for b in boundaries]
    for start, end in spans:
        _smooth_span(out, start, end, n)
    return out


def _find_run(out: list[int], start: int, end: int) -> tuple[int, int] | None:
    pos = start
    while pos < end:
        q = pos
        while q < end and out[q] == out[pos]:
            q += 1
        if q - pos > 1:
            return pos, q
        pos = q
    return None


def _smooth_span(out: list[int], start: int, end: int, n: int) -> None:
    # replacing one run can butt a new duplicate against a neighbor, so loop;
    # a repeated state means the window rule alone cannot settle this span
    seen = set()
    while True:
        run = _find_run(out, start, end)
        if run is None:
            return
        state = tuple(out[start:end])
        if state in seen or n < 2:
            break
        seen.add(state)
        pos, q = run
        k = q - pos
        if n >= k:
            w = min(max(out[pos] - k // 2, 0), n - k)
            out[pos:q] = range(w, w + k)
        else:
            w = max(out[pos] - k // 2, 0)
            out[pos:q] = [min(w + j, n - 1) for j in range(k)]
    if n < 2:
        return
    # fallback: make each slot differ from both neighbors (always possible
    # for n >= 3; for n == 2 differing from the left suffices to kill runs)
    for j in range(start + 1, end):
        if out[j] != out[j - 1]:
            continue
        right = out[j + 1] if j + 1 < end else None
        for v in range(n):
            if v != out[j - 1] and v != right:
                out[j] = v
                break
        else:
            out[j] = (out[j - 1] + 1) % n
