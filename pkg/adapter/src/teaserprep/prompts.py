"""Prompt strings and transcript segmentation.

The story and ending-question instructions are fixed strings; downstream
pipelines depend on their exact wording, so they must never be edited. The
per-segment summary instruction is a configurable template.
"""

from .errors import AdapterError

STORY_PROMPT = (
    "Rewrite the paragraph into an engaging story opening in 10 sentences or "
    "less, keeping all names and avoiding being replaced by pronouns."
)

ENDING_QUESTION_PROMPT = (
    "Given the title and the provided summary, formulate one thought-provoking "
    "and concise question that relate directly to the summary."
)

# {segment} is replaced with the transcript slice to summarize.
DEFAULT_SUMMARY_TEMPLATE = (
    "Write a one-sentence summary of the following documentary segment, "
    "keeping all names.\n\n{segment}"
)

DEFAULT_SEGMENTS = 10


def split_into_segments(text: str, segments: int = DEFAULT_SEGMENTS) -> list[str]:
    """Split a transcript into up to ``segments`` near-equal word spans."""
    if segments < 1:
        raise AdapterError(f"segment count must be >= 1, got {segments}")
    words = text.split()
    if not words:
        raise AdapterError("empty transcript")
    segments = min(segments, len(words))
    out = []
    for k in range(segments):
        start = k * len(words) // segments
        end = (k + 1) * len(words) // segments
        out.append(" ".join(words[start:end]))
    return out


def summary_prompt(segment: str, template: str = DEFAULT_SUMMARY_TEMPLATE) -> str:
    if "{segment}" not in template:
        raise AdapterError("summary template must contain {segment}")
    return template.replace("{segment}", segment)


def story_prompt(paragraph: str) -> str:
    return f"{STORY_PROMPT}\n\n{paragraph}"


def ending_question_prompt(title: str, summary: str) -> str:
    return f"{ENDING_QUESTION_PROMPT}\n\nTitle: {title}\nSummary: {summary}"


def split_sentences(text: str) -> list[str]:
    """Period/question/exclamation-terminated sentences, whitespace-trimmed."""
    out = []
    current: list[str] = []
    for ch in text:
        current.append(ch)
        if ch in ".?!":
            sentence = "".join(current).strip()
            if sentence:
                out.append(sentence)
            current = []
    tail = "".join(current).strip()
    if tail:
        out.append(tail)
    return out
