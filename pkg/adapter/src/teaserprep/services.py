"""Model-service interface, retry policy, and the dry-run stand-in.

Real deployments put credentials in ``TEASERPREP_SERVICE_URL`` and
``TEASERPREP_SERVICE_TOKEN`` and plug a transport into ``ModelService``; this
package ships only the deterministic placeholder used by ``--dry-run``, so CI
never needs a network.
"""

from __future__ import annotations

import hashlib
import os
import time
from typing import Callable, Protocol, TypeVar

import numpy as np

from .errors import AdapterError, ServiceError

SERVICE_URL_VAR = "TEASERPREP_SERVICE_URL"
SERVICE_TOKEN_VAR = "TEASERPREP_SERVICE_TOKEN"

T = TypeVar("T")


class ModelService(Protocol):
    """Everything an adapter job may ask of external pretrained models."""

    def complete(self, prompt: str) -> str:
        """LLM completion at temperature 0."""
        ...

    def embed_text(self, text: str, dim: int) -> np.ndarray:
        """Unit-norm text embedding."""
        ...

    def embed_frames(self, source_id: str, count: int, dim: int) -> np.ndarray:
        """Unit-norm embedding per frame, sampled at 1 fps."""
        ...

    def highlight_scores(self, sentence: str, frames: int) -> np.ndarray:
        """Per-frame highlight curve for one sentence, values in [0, 1]."""
        ...

    def tts_duration(self, text: str) -> float:
        """Synthesized-speech duration of the text in seconds."""
        ...


def with_retries(
    call: Callable[[], T],
    attempts: int = 4,
    base_delay: float = 0.05,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Run a service call with exponential backoff between failures."""
    if attempts < 1:
        raise AdapterError(f"attempts must be >= 1, got {attempts}")
    for attempt in range(attempts):
        try:
            return call()
        except ServiceError:
            if attempt == attempts - 1:
                raise
            sleep(base_delay * 2**attempt)
    raise AssertionError("unreachable")


def _seed_from(*parts) -> int:
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _unit_rows(raw: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return (raw / norms).astype(np.float32)


class PlaceholderService:
    """Deterministic stand-in for every model service.

    Text output is canned, embeddings and curves are seeded by their inputs,
    so re-running a dry-run job reproduces identical bytes.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed  # folded into every derived RNG stream

    def complete(self, prompt: str) -> str:
        from . import prompts

        if prompt.startswith(prompts.STORY_PROMPT):
            return " ".join(
                f"Placeholder sentence {k} keeps the documentary names in view."
                for k in range(1, 11)
            )
        if prompt.startswith(prompts.ENDING_QUESTION_PROMPT):
            return "What will the placeholder journey finally reveal?"
        tag = hashlib.sha256(prompt.encode()).hexdigest()[:8]
        return f"Placeholder summary {tag} of this segment."

    def embed_text(self, text: str, dim: int) -> np.ndarray:
        rng = np.random.default_rng(_seed_from("text", self.seed, dim, text))
        return _unit_rows(rng.normal(size=(1, dim)))[0]

    def embed_frames(self, source_id: str, count: int, dim: int) -> np.ndarray:
        rng = np.random.default_rng(_seed_from("frames", self.seed, dim, source_id))
        return _unit_rows(rng.normal(size=(count, dim)))

    def highlight_scores(self, sentence: str, frames: int) -> np.ndarray:
        rng = np.random.default_rng(_seed_from("curve", self.seed, sentence))
        raw = np.convolve(rng.normal(size=frames), np.ones(5) / 5.0, mode="same")
        span = raw.max() - raw.min()
        if span == 0:
            return np.zeros(frames, dtype=np.float32)
        return ((raw - raw.min()) / span).astype(np.float32)

    def tts_duration(self, text: str) -> float:
        words = len(text.split())
        return round(1.5 + 0.3 * words, 1)


def resolve_service(dry_run: bool, seed: int = 0) -> ModelService:
    """Placeholder for dry runs; otherwise a configured live service is required."""
    if dry_run:
        return PlaceholderService(seed=seed)
    if not os.environ.get(SERVICE_URL_VAR):
        raise AdapterError(
            f"no model service configured: set {SERVICE_URL_VAR} and "
            f"{SERVICE_TOKEN_VAR}, or pass --dry-run"
        )
    raise AdapterError(
        "live model transport is not bundled; point a ModelService "
        "implementation at the job functions or use --dry-run"
    )
