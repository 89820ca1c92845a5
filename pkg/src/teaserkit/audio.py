"""Audio utilities for dataset preparation.

Long tracks are split into fixed-length chunks for per-chunk processing, then
merged back with a linear crossfade; per-stem silence detection labels short
RMS windows against a dBFS threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import AudioError

DEFAULT_SAMPLE_RATE = 44100
DEFAULT_CHUNK_SECONDS = 60
DEFAULT_WINDOW_FRACTION = 0.05  # of the sample rate: 2205 samples at 44.1 kHz
RMS_FLOOR = 1e-9  # keeps log10 finite on all-zero windows

# per-stem silence thresholds in dBFS
STEM_THRESHOLDS_DB = {"music": -40.0, "dialogue": -25.0, "sfx": -40.0}


@dataclass
class Waveform:
    samples: np.ndarray  # mono f32 in [-1, 1]
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise AudioError("mono audio required")
        if self.sample_rate <= 0:
            raise AudioError("sample_rate must be > 0")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise AudioError("non-finite sample value")
        if self.samples.size and float(np.max(np.abs(self.samples))) > 1.0:
            raise AudioError("samples out of [-1, 1] range")

    @property
    def seconds(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class SilenceConfig:
    threshold_db: float = STEM_THRESHOLDS_DB["music"]
    frame_ms: int = 100  # RMS measurement window

    def __post_init__(self) -> None:
        if self.threshold_db >= 0:
            raise AudioError("threshold_db must be < 0")
        if self.frame_ms <= 0:
            raise AudioError("frame_ms must be > 0")

    @classmethod
    def for_stem(cls, stem: str, frame_ms: int = 100) -> "SilenceConfig":
        if stem not in STEM_THRESHOLDS_DB:
            raise AudioError(f"unknown stem {stem!r}, expected one of {sorted(STEM_THRESHOLDS_DB)}")
        return cls(threshold_db=STEM_THRESHOLDS_DB[stem], frame_ms=frame_ms)


def _window_samples(sample_rate: int, window_fraction: float) -> int:
    if window_fraction < 0:
        raise AudioError("window_fraction must be >= 0")
    return int(round(window_fraction * sample_rate))


def chunk(w: Waveform, chunk_seconds: int = DEFAULT_CHUNK_SECONDS) -> list[Waveform]:
    """Split into fixed-length pieces; concatenating them restores the input."""
    if w.samples.size == 0:
        raise AudioError("empty waveform")
    if chunk_seconds <= 0:
        raise AudioError("chunk_seconds must be > 0")
    step = chunk_seconds * w.sample_rate
    return [
        Waveform(samples=w.samples[i : i + step], sample_rate=w.sample_rate)
        for i in range(0, w.samples.size, step)
    ]


def chunk_with_overlap(
    w: Waveform,
    chunk_seconds: int = DEFAULT_CHUNK_SECONDS,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
) -> list[Waveform]:
    """Like chunk, but every piece after the first repeats the previous
    window worth of samples so crossfade_merge has material to blend."""
    if w.samples.size == 0:
        raise AudioError("empty waveform")
    if chunk_seconds <= 0:
        raise AudioError("chunk_seconds must be > 0")
    step = chunk_seconds * w.sample_rate
    win = _window_samples(w.sample_rate, window_fraction)
    out = []
    for start in range(0, w.samples.size, step):
        lead = win if start > 0 else 0
        out.append(
            Waveform(samples=w.samples[start - lead : start + step], sample_rate=w.sample_rate)
        )
    return out


def crossfade_ramps(win: int) -> tuple[np.ndarray, np.ndarray]:
    """Up and down ramps that sum to exactly 1.0 at every window sample.

    The up ramp is quantized to multiples of 2^-20 so that 1 - up is exact in
    binary floating point; the pair is therefore an exact partition of unity.
    """
    if win <= 0:
        return np.zeros(0), np.zeros(0)
    scale = 2.0**20
    up = np.round(np.arange(1, win + 1) / (win + 1) * scale) / scale
    return up, 1.0 - up


def crossfade_merge(
    chunks: list[Waveform], window_fraction: float = DEFAULT_WINDOW_FRACTION
) -> Waveform:
    """Concatenate overlapped chunks, linearly blending each shared window.

    Samples outside the blend windows are copied through untouched.
    """
    if not chunks:
        raise AudioError("no chunks to merge")
    rate = chunks[0].sample_rate
    for pos, c in enumerate(chunks[1:], start=1):
        if c.sample_rate != rate:
            raise AudioError(
                f"sample-rate mismatch: chunk {pos} has {c.sample_rate}, expected {rate}"
            )
    win = _window_samples(rate, window_fraction)
    up, down = crossfade_ramps(win)
    # blending happens in f64; every sample outside a window only round-trips
    # f32 -> f64 -> f32, which is bit-exact
    out = chunks[0].samples.astype(np.float64)
    for c in chunks[1:]:
        nxt = c.samples.astype(np.float64)
        k = min(win, out.size, nxt.size)
        if k == 0:
            out = np.concatenate([out, nxt])
            continue
        blend = out[-k:] * down[win - k :] + nxt[:k] * up[win - k :]
        out = np.concatenate([out[:-k], blend, nxt[k:]])
    return Waveform(samples=out.astype(np.float32), sample_rate=rate)


def dbfs(samples: np.ndarray) -> float:
    """RMS level in dB relative to full scale (RMS 1.0)."""
    rms = float(np.sqrt(np.mean(np.square(samples.astype(np.float64)))))
    return 20.0 * np.log10(max(rms, RMS_FLOOR))


def silence_labels(w: Waveform, cfg: SilenceConfig | None = None) -> np.ndarray:
    """1 per RMS window at or above the threshold, 0 below (0 = silence)."""
    cfg = cfg or SilenceConfig()
    if w.samples.size == 0:
        raise AudioError("empty waveform")
    frame = max(1, int(round(w.sample_rate * cfg.frame_ms / 1000.0)))
    labels = []
    for start in range(0, w.samples.size, frame):
        window = w.samples[start : start + frame]
        labels.append(1 if dbfs(window) >= cfg.threshold_db else 0)
    return np.array(labels, dtype=np.int8)


def save_waveform(w: Waveform, path: str | Path) -> None:
    wavfile.write(str(path), w.sample_rate, w.samples.astype(np.float32))


def load_waveform(path: str | Path) -> Waveform:
    try:
        rate, data = wavfile.read(str(path))
    except (ValueError, FileNotFoundError) as exc:
        raise AudioError(f"cannot read audio file {path}: {exc}") from exc
    if data.ndim != 1:
        raise AudioError("mono audio required")
    if data.dtype == np.float32 or data.dtype == np.float64:
        samples = data.astype(np.float32)
    elif data.dtype == np.int16:
        samples = (data.astype(np.float32)) / 32768.0
    elif data.dtype == np.int32:
        samples = (data.astype(np.float32)) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float32) - 128.0) / 128.0
    else:
        raise AudioError(f"unsupported sample format {data.dtype}")
    return Waveform(samples=samples, sample_rate=int(rate))
