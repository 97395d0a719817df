"""Cross-lingual entity span projection via alignment-weighted span matching."""

from .candidates import CandidateSet, SourceKind, external_candidates, ngram_candidates
from .core import (
    AlignmentSet,
    EntitySpan,
    LabeledSentence,
    Sentence,
    bio_decode,
    bio_encode,
    spans_overlap,
)
from .errors import (
    DataError,
    FormatError,
    GuardError,
    InfeasibleError,
    SpanProjectError,
    UsageError,
)
from .evaluation import EvalReport, LabelScores, evaluate, render_report, report_record
from .formats import (
    CorpusDocument,
    MarkedSentence,
    parse_conll,
    parse_marked_sentence,
    parse_pharaoh,
    parse_span_records,
    parse_translations_line,
    serialize_conll,
    serialize_pharaoh,
    serialize_span_records,
)
from .matching import (
    MatchingProblem,
    MatchingSolution,
    MatchMode,
    build_problem,
    matching_cost,
    render_problem,
    solve_assignment_exact,
    solve_bruteforce,
    solve_greedy,
    solve_relaxed_mwis,
    validate_solution,
)
from .projection import (
    Method,
    ProjectionConfig,
    Solver,
    assign_marker_labels,
    edit_distance,
    fuzzy_similarity,
    project_heuristic,
    project_matching,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentSet",
    "CandidateSet",
    "CorpusDocument",
    "DataError",
    "EntitySpan",
    "EvalReport",
    "FormatError",
    "GuardError",
    "InfeasibleError",
    "LabelScores",
    "LabeledSentence",
    "MarkedSentence",
    "MatchMode",
    "MatchingProblem",
    "MatchingSolution",
    "Method",
    "ProjectionConfig",
    "Sentence",
    "SourceKind",
    "Solver",
    "SpanProjectError",
    "UsageError",
    "assign_marker_labels",
    "bio_decode",
    "bio_encode",
    "build_problem",
    "edit_distance",
    "evaluate",
    "external_candidates",
    "fuzzy_similarity",
    "matching_cost",
    "ngram_candidates",
    "parse_conll",
    "parse_marked_sentence",
    "parse_pharaoh",
    "parse_span_records",
    "parse_translations_line",
    "project_heuristic",
    "project_matching",
    "render_problem",
    "render_report",
    "report_record",
    "serialize_conll",
    "serialize_pharaoh",
    "serialize_span_records",
    "solve_assignment_exact",
    "solve_bruteforce",
    "solve_greedy",
    "solve_relaxed_mwis",
    "spans_overlap",
    "validate_solution",
]
