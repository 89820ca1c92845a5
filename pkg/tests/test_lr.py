"""Tests for greedy and beam decoding, with enumeration oracles."""

import itertools

import numpy as np
import pytest

from teaserkit import DecoderError, EmbeddingSequence, FrameBank
from teaserkit.lr import (
    BeamConfig,
    _beam_search,
    beam_decode,
    greedy_decode,
    nearest_frames,
    phi_score,
    smooth,
)

from test_store import unit_rows


# --- independent oracles -----------------------------------------------------

def scan_nearest(query, bank, k):
    """Full scan with an explicit sort, independent of the argsort path."""
    sims = [float(np.dot(row.astype(np.float64), query)) for row in bank.embeddings]
    order = sorted(range(bank.n), key=lambda i: (-sims[i], i))
    return [(i, sims[i]) for i in order[:k]]


def loop_phi(generated, decoded, bank, lam):
    """Eq. written out as nested loops over slots and slot pairs."""
    sent = generated.sentence_of_slot()
    fid = 0.0
    for t, f in enumerate(decoded):
        fid += float(
            np.dot(generated.rows[t].astype(np.float64), bank.embeddings[f].astype(np.float64))
        )
    reg = 0.0
    for t in range(len(decoded)):
        for u in range(t + 1, len(decoded)):
            if sent[t] != sent[u]:
                reg += float(
                    np.dot(
                        bank.embeddings[decoded[t]].astype(np.float64),
                        bank.embeddings[decoded[u]].astype(np.float64),
                    )
                )
    return fid - lam * reg


def enumerate_best(generated, bank, k2, lam):
    """Try every sequence on the per-slot candidate lattice."""
    lattice = [
        [idx for idx, _ in scan_nearest(generated.rows[t], bank, k2)]
        for t in range(generated.length)
    ]
    return min(
        itertools.product(*lattice),
        key=lambda seq: (-phi_score(generated, list(seq), bank, lam), seq),
    )


def random_instance(rng, max_sentences=3, max_slots=2, max_n=8, dim=6):
    counts = [int(rng.integers(1, max_slots + 1)) for _ in range(int(rng.integers(1, max_sentences + 1)))]
    generated = EmbeddingSequence.from_sentence_rows(
        [unit_rows(rng, c, dim) for c in counts]
    )
    bank = FrameBank.from_rows(unit_rows(rng, int(rng.integers(2, max_n + 1)), dim))
    return generated, bank


def basis_bank(n):
    return FrameBank.from_rows(np.eye(n, dtype=np.float32))


# --- nearest_frames ----------------------------------------------------------

class TestNearestFrames:
    def test_exact_match(self):
        bank = basis_bank(4)
        got = nearest_frames(np.eye(4, dtype=np.float32)[2], bank, 1)
        assert got == [(2, 1.0)]

    def test_tie_prefers_lower_index(self):
        bank = basis_bank(3)
        query = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
        assert nearest_frames(query, bank, 1)[0][0] == 0

    def test_k_clamped_to_bank_size(self):
        bank = basis_bank(3)
        assert len(nearest_frames(np.eye(3, dtype=np.float32)[0], bank, 10)) == 3

    def test_matches_scan_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            bank = FrameBank.from_rows(unit_rows(rng, 20, 8))
            query = unit_rows(rng, 1, 8)[0]
            got = nearest_frames(query, bank, 5)
            want = scan_nearest(query, bank, 5)
            assert [i for i, _ in got] == [i for i, _ in want]
            assert np.allclose([s for _, s in got], [s for _, s in want])


# --- phi_score ---------------------------------------------------------------

class TestPhiScore:
    def test_single_sentence_has_no_penalty(self):
        rng = np.random.default_rng(11)
        generated = EmbeddingSequence.from_sentence_rows([unit_rows(rng, 3, 5)])
        bank = FrameBank.from_rows(unit_rows(rng, 6, 5))
        decoded = [0, 2, 4]
        fid = sum(
            float(np.dot(generated.rows[t].astype(np.float64), bank.embeddings[f].astype(np.float64)))
            for t, f in enumerate(decoded)
        )
        assert phi_score(generated, decoded, bank, 100.0) == pytest.approx(fid)

    def test_lambda_zero_is_pure_fidelity(self):
        rng = np.random.default_rng(12)
        generated, bank = random_instance(rng)
        decoded = [0] * generated.length
        assert phi_score(generated, decoded, bank, 0.0) == pytest.approx(
            loop_phi(generated, decoded, bank, 0.0)
        )

    def test_orthonormal_hand_case(self):
        bank = basis_bank(4)
        eye = np.eye(4, dtype=np.float32)
        generated = EmbeddingSequence.from_sentence_rows([eye[0:2], eye[2:4]])
        # perfect decode: fidelity 4, all cross pairs orthogonal
        assert phi_score(generated, [0, 1, 2, 3], bank, 1.0) == pytest.approx(4.0)
        # second sentence reuses the first's frames: fidelity 2, penalty 2
        assert phi_score(generated, [0, 1, 0, 1], bank, 1.0) == pytest.approx(0.0)
        assert phi_score(generated, [0, 1, 0, 1], bank, 3.0) == pytest.approx(-4.0)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            generated, bank = random_instance(rng)
            decoded = [int(rng.integers(0, bank.n)) for _ in range(generated.length)]
            lam = float(rng.choice([0.0, 0.5, 1.0, 10.0]))
            assert phi_score(generated, decoded, bank, lam) == pytest.approx(
                loop_phi(generated, decoded, bank, lam), abs=1e-9
            )

    def test_length_mismatch(self):
        rng = np.random.default_rng(14)
        generated, bank = random_instance(rng)
        with pytest.raises(DecoderError, match="length"):
            phi_score(generated, [0] * (generated.length + 1), bank, 1.0)

    def test_index_out_of_range(self):
        rng = np.random.default_rng(15)
        generated, bank = random_instance(rng)
        with pytest.raises(DecoderError, match="out of range"):
            phi_score(generated, [-1] * generated.length, bank, 1.0)


# --- greedy_decode -----------------------------------------------------------

class TestGreedyDecode:
    def test_recovers_exact_rows(self):
        bank = basis_bank(6)
        eye = np.eye(6, dtype=np.float32)
        generated = EmbeddingSequence.from_sentence_rows([eye[[3, 1, 4]]])
        assert greedy_decode(generated, bank) == [3, 1, 4]

    def test_identical_slots_collapse(self):
        rng = np.random.default_rng(16)
        bank = FrameBank.from_rows(unit_rows(rng, 8, 5))
        row = unit_rows(rng, 1, 5)
        generated = EmbeddingSequence.from_sentence_rows([np.repeat(row, 4, axis=0)])
        out = greedy_decode(generated, bank)
        assert len(set(out)) == 1

    def test_equals_minimal_beam(self):
        rng = np.random.default_rng(17)
        cfg = BeamConfig(lam=0.0, beam_size=1, candidates=1)
        for _ in range(100):
            generated, bank = random_instance(rng)
            assert greedy_decode(generated, bank) == beam_decode(generated, bank, cfg)


# --- beam_decode -------------------------------------------------------------

class TestBeamDecode:
    def test_exhaustive_oracle_equality(self):
        rng = np.random.default_rng(18)
        for _ in range(60):
            generated, bank = random_instance(rng)
            k2 = int(rng.integers(1, 4))
            lam = float(rng.choice([0.0, 1.0, 10.0, 100.0]))
            cfg = BeamConfig(lam=lam, beam_size=k2 ** generated.length, candidates=k2)
            got = beam_decode(generated, bank, cfg)
            assert tuple(got) == enumerate_best(generated, bank, k2, lam)

    def test_lambda_zero_is_per_slot_argmax(self):
        rng = np.random.default_rng(19)
        for _ in range(30):
            generated, bank = random_instance(rng)
            cfg = BeamConfig(lam=0.0, beam_size=4, candidates=3)
            got = beam_decode(generated, bank, cfg)
            want = [nearest_frames(generated.rows[t], bank, 3)[0][0] for t in range(generated.length)]
            assert got == want

    def test_large_lambda_forces_distinct_sentences(self):
        # both sentences' slots sit closest to the same bank frame
        rng = np.random.default_rng(20)
        bank = FrameBank.from_rows(unit_rows(rng, 5, 6))
        target = bank.embeddings[3]
        jitter = unit_rows(rng, 2, 6) * 0.05
        rows = np.stack([target + jitter[0], target + jitter[1]])
        generated = EmbeddingSequence.from_sentence_rows([rows[0:1], rows[1:2]])
        assert greedy_decode(generated, bank) == [3, 3]
        cfg = BeamConfig(lam=100.0, beam_size=9, candidates=3)
        got = beam_decode(generated, bank, cfg)
        assert got[0] != got[1]
        assert tuple(got) == enumerate_best(generated, bank, 3, 100.0)

    def test_output_shape_and_range(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            generated, bank = random_instance(rng)
            got = beam_decode(generated, bank, BeamConfig())
            assert len(got) == generated.length
            assert all(0 <= f < bank.n for f in got)

    def test_beats_random_lattice_draws(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            generated, bank = random_instance(rng)
            cfg = BeamConfig(lam=1.0, beam_size=3, candidates=3)
            best = phi_score(generated, beam_decode(generated, bank, cfg), bank, cfg.lam)
            lattice = [
                [idx for idx, _ in nearest_frames(generated.rows[t], bank, cfg.candidates)]
                for t in range(generated.length)
            ]
            for _ in range(100):
                draw = [row[int(rng.integers(0, len(row)))] for row in lattice]
                assert best >= phi_score(generated, draw, bank, cfg.lam) - 1e-9

    def test_incremental_score_matches_phi(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            generated, bank = random_instance(rng)
            cfg = BeamConfig(lam=float(rng.choice([0.0, 1.0, 10.0])), beam_size=4, candidates=3)
            for beam in _beam_search(generated, bank, cfg):
                direct = phi_score(generated, list(beam.indices), bank, cfg.lam)
                assert beam.score == pytest.approx(direct, abs=1e-5)

    def test_never_below_greedy_on_lattice(self):
        # tight beams can prune the greedy path; the result must not lose to it
        rng = np.random.default_rng(24)
        for _ in range(50):
            generated, bank = random_instance(rng, max_sentences=3, max_slots=2)
            cfg = BeamConfig(lam=1.0, beam_size=1, candidates=3)
            greedy = greedy_decode(generated, bank)
            lattice = [
                {idx for idx, _ in nearest_frames(generated.rows[t], bank, cfg.candidates)}
                for t in range(generated.length)
            ]
            if not all(f in lattice[t] for t, f in enumerate(greedy)):
                continue
            got = phi_score(generated, beam_decode(generated, bank, cfg), bank, cfg.lam)
            assert got >= phi_score(generated, greedy, bank, cfg.lam) - 1e-9


# --- smooth ------------------------------------------------------------------

def runs_in(seq, spans):
    found = []
    for start, end in spans:
        pos = start
        while pos < end:
            q = pos
            while q < end and seq[q] == seq[pos]:
                q += 1
            if q - pos > 1:
                found.append((pos, q))
            pos = q
    return found


class TestSmooth:
    def test_odd_run_centers(self):
        assert smooth([7, 7, 7], [(0, 3)], 20) == [6, 7, 8]

    def test_even_run(self):
        assert smooth([5, 5], [(0, 2)], 20) == [4, 5]

    def test_left_edge_shifts_right(self):
        assert smooth([0, 0, 0], [(0, 3)], 10) == [0, 1, 2]

    def test_right_edge_shifts_left(self):
        assert smooth([9, 9, 9], [(0, 3)], 10) == [7, 8, 9]

    def test_runs_across_sentence_boundary_kept(self):
        assert smooth([4, 4], [(0, 1), (1, 2)], 10) == [4, 4]

    def test_two_value_cycle_still_settles(self):
        out = smooth([0, 1, 1], [(0, 3)], 2)
        assert len(out) == 3
        assert runs_in(out, [(0, 3)]) == []

    def test_random_no_runs_and_rep_not_increased(self):
        rng = np.random.default_rng(25)
        for _ in range(1000):
            n = int(rng.integers(2, 30))
            length = int(rng.integers(1, 15))
            cut = sorted(set(int(x) for x in rng.integers(1, length, size=2))) if length > 1 else []
            edges = [0] + [c for c in cut] + [length]
            spans = [(a, b) for a, b in zip(edges, edges[1:]) if b > a]
            seq = [int(rng.integers(0, n)) for _ in range(length)]
            out = smooth(seq, spans, n)
            assert len(out) == length
            assert all(0 <= v < n for v in out)
            assert runs_in(out, spans) == []
            before = 1 - len(set(seq)) / length
            after = 1 - len(set(out)) / length
            assert after <= before + 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(DecoderError, match="out of range"):
            smooth([5], [(0, 1)], 5)
