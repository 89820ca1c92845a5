"""Teaser composition toolkit: constrained clip selection, regularized
decoding, objective metrics, edit-decision lists, and audio prep utilities."""

from .errors import (
    AudioError,
    DecoderError,
    MetricError,
    PipelineError,
    SelectorError,
    StoreError,
    TeaserkitError,
    TimelineError,
)
from .store import (
    EmbeddingSequence,
    FrameBank,
    ScoreCurveSet,
    Selection,
    Sentence,
    SentenceSelection,
    SentenceTrack,
    batch_cosine,
    cosine_sim,
    load_embedding_sequence,
    load_frame_bank,
    load_score_curves,
    load_selection,
    load_sentence_track,
    save_embedding_sequence,
    save_frame_bank,
    save_score_curves,
    save_selection,
    save_sentence_track,
    tau_to_frames,
)
from .pt import (
    PtConfig,
    ThresholdResult,
    apply_overlap_constraint,
    binary_search_threshold,
    runs_above_threshold,
    select_for_narration,
)
from .lr import (
    BeamConfig,
    beam_decode,
    greedy_decode,
    nearest_frames,
    phi_score,
    smooth,
)
from .metrics import (
    ArrayPixels,
    MatchParams,
    clip_score,
    f1,
    match_ground_truth,
    rep,
    scr,
)
from .timeline import (
    Segment,
    Timeline,
    assemble,
    emit_cutlist,
    load_timeline,
    parse_edl_json,
    save_cutlist,
)
from .audio import (
    SilenceConfig,
    Waveform,
    chunk,
    chunk_with_overlap,
    crossfade_merge,
    load_waveform,
    save_waveform,
    silence_labels,
)
from .pipeline import (
    Diagnostic,
    PipelineConfig,
    PipelineResult,
    run_pipeline,
    validate,
    validate_inputs,
)
from .fixtures import generate_corpus

__version__ = "0.1.0"
