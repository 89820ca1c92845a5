"""Tests for chunking, crossfade merge, and silence labeling."""

import numpy as np
import pytest

from teaserkit import AudioError
from teaserkit.audio import (
    STEM_THRESHOLDS_DB,
    SilenceConfig,
    Waveform,
    chunk,
    chunk_with_overlap,
    crossfade_merge,
    crossfade_ramps,
    dbfs,
    load_waveform,
    save_waveform,
    silence_labels,
)


def sine(seconds, freq, rate, amplitude=0.8):
    t = np.arange(int(seconds * rate)) / rate
    return Waveform(
        samples=(amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32),
        sample_rate=rate,
    )


class TestWaveform:
    def test_range_validation(self):
        with pytest.raises(AudioError, match="range"):
            Waveform(samples=np.array([0.0, 1.5], dtype=np.float32))

    def test_finite_validation(self):
        with pytest.raises(AudioError, match="non-finite"):
            Waveform(samples=np.array([0.0, np.nan], dtype=np.float32))

    def test_mono_required(self):
        with pytest.raises(AudioError, match="mono"):
            Waveform(samples=np.zeros((4, 2), dtype=np.float32))

    def test_sample_rate_positive(self):
        with pytest.raises(AudioError, match="sample_rate"):
            Waveform(samples=np.zeros(4, dtype=np.float32), sample_rate=0)


class TestChunk:
    def test_150s_splits_60_60_30(self):
        w = Waveform(samples=np.zeros(1500, dtype=np.float32), sample_rate=10)
        assert [c.seconds for c in chunk(w)] == [60.0, 60.0, 30.0]

    def test_short_input_single_chunk(self):
        w = Waveform(samples=np.zeros(100, dtype=np.float32), sample_rate=10)
        assert [c.seconds for c in chunk(w)] == [10.0]

    def test_exact_length_single_chunk(self):
        w = Waveform(samples=np.zeros(600, dtype=np.float32), sample_rate=10)
        assert len(chunk(w)) == 1

    def test_concat_restores_input_bit_exact(self):
        rng = np.random.default_rng(50)
        w = Waveform(
            samples=rng.uniform(-1, 1, size=1507).astype(np.float32), sample_rate=10
        )
        rebuilt = np.concatenate([c.samples for c in chunk(w)])
        assert np.array_equal(rebuilt, w.samples)

    def test_empty_rejected(self):
        with pytest.raises(AudioError, match="empty"):
            chunk(Waveform(samples=np.zeros(0, dtype=np.float32)))

    def test_overlap_variant_repeats_boundary_samples(self):
        rng = np.random.default_rng(51)
        w = Waveform(
            samples=rng.uniform(-1, 1, size=2500).astype(np.float32), sample_rate=1000
        )
        pieces = chunk_with_overlap(w, chunk_seconds=1, window_fraction=0.05)
        win = 50
        assert [p.samples.size for p in pieces] == [1000, 1050, 550]
        assert np.array_equal(pieces[1].samples[:win], w.samples[1000 - win : 1000])
        assert np.array_equal(pieces[2].samples[:win], w.samples[2000 - win : 2000])


class TestCrossfade:
    @pytest.mark.parametrize("win", [1, 7, 400, 2205])
    def test_ramps_are_exact_partition_of_unity(self, win):
        up, down = crossfade_ramps(win)
        assert up.size == down.size == win
        assert np.all(up + down == 1.0)
        assert np.all(np.diff(up) >= 0)
        assert 0.0 < up[0] and up[-1] < 1.0

    def test_default_window_is_2205_samples_at_44100(self):
        assert int(round(0.05 * 44100)) == 2205

    def test_single_chunk_identity(self):
        w = sine(1, 440, 8000)
        merged = crossfade_merge([w])
        assert np.array_equal(merged.samples, w.samples)

    def test_constant_chunks_remain_constant(self):
        ones = np.ones(1000, dtype=np.float32)
        chunks = [Waveform(samples=ones.copy(), sample_rate=1000) for _ in range(3)]
        merged = crossfade_merge(chunks, window_fraction=0.05)
        assert np.all(merged.samples == 1.0)

    def test_sine_reconstruction(self):
        rate = 8000
        original = sine(5, 440, rate)
        pieces = chunk_with_overlap(original, chunk_seconds=2, window_fraction=0.05)
        merged = crossfade_merge(pieces, window_fraction=0.05)
        assert merged.samples.size == original.samples.size
        win = int(round(0.05 * rate))
        inside = np.zeros(original.samples.size, dtype=bool)
        for boundary in (2 * rate, 4 * rate):
            inside[boundary - win : boundary] = True
        err = np.abs(merged.samples.astype(np.float64) - original.samples.astype(np.float64))
        assert np.array_equal(merged.samples[~inside], original.samples[~inside])
        assert float(np.max(err[~inside])) < 1e-3
        assert float(np.max(err[inside])) < 2e-2

    def test_sample_rate_mismatch(self):
        a = Waveform(samples=np.zeros(100, dtype=np.float32), sample_rate=1000)
        b = Waveform(samples=np.zeros(100, dtype=np.float32), sample_rate=2000)
        with pytest.raises(AudioError, match="sample-rate mismatch"):
            crossfade_merge([a, b])

    def test_empty_chunk_list(self):
        with pytest.raises(AudioError, match="no chunks"):
            crossfade_merge([])


class TestSilence:
    def test_all_zero_is_silent(self):
        w = Waveform(samples=np.zeros(4410, dtype=np.float32))
        assert np.all(silence_labels(w, SilenceConfig(threshold_db=-25.0)) == 0)

    def test_full_scale_square_wave_is_sound(self):
        square = np.tile(np.array([1.0, -1.0], dtype=np.float32), 2205)
        w = Waveform(samples=square)
        assert dbfs(square) == pytest.approx(0.0)
        assert np.all(silence_labels(w, SilenceConfig(threshold_db=-25.0)) == 1)

    def test_quiet_sine_below_music_threshold(self):
        w = sine(1, 440, 44100, amplitude=0.01)  # RMS ~= -43 dBFS
        assert dbfs(w.samples) == pytest.approx(-43.01, abs=0.05)
        assert np.all(silence_labels(w, SilenceConfig(threshold_db=-40.0)) == 0)

    def test_moderate_sine_against_dialogue_threshold(self):
        w = sine(1, 440, 44100, amplitude=0.1)  # RMS ~= -23 dBFS
        assert np.all(silence_labels(w, SilenceConfig.for_stem("dialogue")) == 1)
        assert np.all(silence_labels(w, SilenceConfig(threshold_db=-20.0)) == 0)

    def test_window_count(self):
        w = Waveform(samples=np.zeros(4410 + 100, dtype=np.float32))
        assert silence_labels(w, SilenceConfig()).size == 2  # 4410-sample windows

    def test_threshold_monotone(self):
        rng = np.random.default_rng(52)
        w = Waveform(
            samples=(rng.uniform(-1, 1, size=44100) * rng.uniform(0, 1)).astype(np.float32)
        )
        for hi in (-50.0, -30.0, -10.0):
            lo = hi - 15.0
            l_lo = silence_labels(w, SilenceConfig(threshold_db=lo))
            l_hi = silence_labels(w, SilenceConfig(threshold_db=hi))
            assert np.all(l_lo >= l_hi)

    def test_stem_presets(self):
        assert SilenceConfig.for_stem("music").threshold_db == -40.0
        assert SilenceConfig.for_stem("dialogue").threshold_db == -25.0
        assert SilenceConfig.for_stem("sfx").threshold_db == -40.0
        with pytest.raises(AudioError, match="unknown stem"):
            SilenceConfig.for_stem("vocals")
        assert STEM_THRESHOLDS_DB["music"] == -40.0

    def test_config_validation(self):
        with pytest.raises(AudioError):
            SilenceConfig(threshold_db=0.0)
        with pytest.raises(AudioError):
            SilenceConfig(frame_ms=0)


class TestWavIO:
    def test_float32_round_trip(self, tmp_path):
        w = sine(1, 440, 8000)
        save_waveform(w, tmp_path / "tone.wav")
        back = load_waveform(tmp_path / "tone.wav")
        assert back.sample_rate == 8000
        assert np.array_equal(back.samples, w.samples)

    def test_int16_input_converted(self, tmp_path):
        from scipy.io import wavfile

        data = (np.array([0, 16384, -32768], dtype=np.int16))
        wavfile.write(str(tmp_path / "pcm.wav"), 8000, data)
        back = load_waveform(tmp_path / "pcm.wav")
        assert back.samples == pytest.approx([0.0, 0.5, -1.0])

    def test_missing_file(self, tmp_path):
        with pytest.raises(AudioError, match="cannot read"):
            load_waveform(tmp_path / "absent.wav")
