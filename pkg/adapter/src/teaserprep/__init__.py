"""Adapters that turn model-service output into composer input files."""

from .errors import AdapterError, ServiceError
from .ops import (
    AdapterJob,
    extract_frame_embeddings,
    generate_embedding_sequence,
    generate_teaser_narration,
    run_all,
    score_curves_from_grounding_model,
)
from .prompts import (
    DEFAULT_SEGMENTS,
    DEFAULT_SUMMARY_TEMPLATE,
    ENDING_QUESTION_PROMPT,
    STORY_PROMPT,
    split_into_segments,
)
from .services import ModelService, PlaceholderService, resolve_service, with_retries

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "AdapterJob",
    "DEFAULT_SEGMENTS",
    "DEFAULT_SUMMARY_TEMPLATE",
    "ENDING_QUESTION_PROMPT",
    "ModelService",
    "PlaceholderService",
    "STORY_PROMPT",
    "ServiceError",
    "extract_frame_embeddings",
    "generate_embedding_sequence",
    "generate_teaser_narration",
    "resolve_service",
    "run_all",
    "score_curves_from_grounding_model",
    "split_into_segments",
    "with_retries",
    "__version__",
]
