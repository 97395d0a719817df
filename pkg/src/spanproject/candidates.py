"""Target-side candidate span generation.

Candidates come from one of two sources: exhaustive n-gram enumeration over
the target sentence, or spans predicted by an external NER model and read
from a span-record file. Either way the candidate spans are unlabeled; the
matching step assigns labels by pairing them with source entities.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import EntitySpan, Sentence, spans_overlap
from .errors import DataError


class SourceKind(Enum):
    NGRAM = "ngram"
    EXTERNAL_NER = "ner"


@dataclass(frozen=True, slots=True)
class CandidateSet:
    """Unlabeled candidate spans for one target sentence.

    Spans are deduplicated and kept sorted by (start, end). External NER
    candidates must be pairwise non-overlapping; that premise is what lets
    the matcher take the exact assignment fast path.
    """

    sentence_id: int
    spans: tuple[EntitySpan, ...]
    source_kind: SourceKind

    def __post_init__(self):
        spans = tuple(sorted(set(self.spans), key=EntitySpan.sort_key))
        object.__setattr__(self, "spans", spans)
        if self.sentence_id < 0:
            raise DataError(f"sentence id must be non-negative, got {self.sentence_id}")
        for span in spans:
            if span.label is not None:
                raise DataError(f"candidate {span} must not carry a label")
        if self.source_kind is SourceKind.EXTERNAL_NER and not self.is_disjoint():
            raise DataError(
                f"external candidates for sentence {self.sentence_id} overlap; "
                "NER-predicted spans are expected to be disjoint"
            )

    def __len__(self) -> int:
        return len(self.spans)

    def is_disjoint(self) -> bool:
        """True when no two candidate spans overlap.

        Spans are sorted by start, so checking neighbours suffices: if each
        span ends before the next begins, no later span can reach back.
        """
        return all(
            not spans_overlap(a, b) for a, b in zip(self.spans, self.spans[1:])
        )


def ngram_candidates(sentence: Sentence, max_len: int | None = 8) -> CandidateSet:
    """Enumerate every contiguous word span of length 1..max_len.

    ``max_len=None`` means unbounded, which yields all n(n+1)/2 spans of an
    n-word sentence.
    """
    if max_len is not None and max_len < 1:
        raise DataError(f"max_len must be at least 1, got {max_len}")
    n = len(sentence)
    cap = n if max_len is None else min(max_len, n)
    spans = tuple(
        EntitySpan(i, i + length)
        for length in range(1, cap + 1)
        for i in range(n - length + 1)
    )
    return CandidateSet(sentence.id, spans, SourceKind.NGRAM)


def external_candidates(sentence: Sentence, spans: list[EntitySpan]) -> CandidateSet:
    """Ingest externally predicted spans as candidates, discarding their labels."""
    stripped = []
    for span in spans:
        if span.end > len(sentence):
            raise DataError(
                f"candidate ({span.start}, {span.end}) exceeds sentence {sentence.id} "
                f"of length {len(sentence)}"
            )
        stripped.append(span.with_label(None))
    return CandidateSet(sentence.id, tuple(stripped), SourceKind.EXTERNAL_NER)
