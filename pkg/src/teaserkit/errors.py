"""Exception hierarchy; the CLI maps these to exit codes and module names."""


class TeaserkitError(Exception):
    """Base class for all package errors."""

    module = "teaserkit"


class StoreError(TeaserkitError):
    """Malformed or inconsistent embedding/track/curve/selection data."""

    module = "media-store"


class SelectorError(TeaserkitError):
    """Threshold-based interval selection failed."""

    module = "pt-selector"


class DecoderError(TeaserkitError):
    """Embedding-sequence decoding failed."""

    module = "lr-decoder"


class MetricError(TeaserkitError):
    """Metric computation rejected its input."""

    module = "metrics"


class TimelineError(TeaserkitError):
    """Edit-decision-list assembly or serialization failed."""

    module = "timeline"


class AudioError(TeaserkitError):
    """Waveform processing rejected its input."""

    module = "audio-prep"


class PipelineError(TeaserkitError):
    """Pipeline orchestration failed."""

    module = "cli"
