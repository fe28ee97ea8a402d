"""Post-judging filters: score threshold plus deterministic per-tag and
per-language rules deciding which issues reach developers.

Rule ids are stable strings recorded on every outcome:
score-threshold, line-unresolved, file-missing, tag-disabled, doc-exists,
no-division, short-function.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .diffs import Diff, line_lookup, span_at, span_lines, span_named
from .errors import ContractError
from .heuristics import contains_docstring, division_divisors, language_for_path
from .issues import Issue, Review
from .judge import JudgeVerdict, judge

DEFAULT_SCORE_THRESHOLD = 7
DEFAULT_LONG_FUNCTION_MIN_LINES = 50

RULE_SCORE = "score-threshold"
RULE_LINE = "line-unresolved"
RULE_FILE = "file-missing"
RULE_TAG = "tag-disabled"
RULE_DOC = "doc-exists"
RULE_DIV = "no-division"
RULE_SHORT = "short-function"


@dataclass(frozen=True)
class FilterConfig:
    score_threshold: int = DEFAULT_SCORE_THRESHOLD
    line_tolerance: int = 0
    long_function_min_lines: int = DEFAULT_LONG_FUNCTION_MIN_LINES
    # Pairs of (tag name, language) for which issues are suppressed.
    disabled: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        if not 0 <= self.score_threshold <= 10:
            raise ValueError("score_threshold must be within 0-10")
        if self.line_tolerance < 0:
            raise ValueError("line_tolerance must be >= 0")

    @classmethod
    def from_toml(cls, path: str) -> "FilterConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        section = data.get("filters", {})
        disabled = frozenset(
            tuple(entry.split(":", 1)) for entry in section.get("disabled_tags", [])
        )
        return cls(
            score_threshold=section.get("score_threshold", DEFAULT_SCORE_THRESHOLD),
            line_tolerance=section.get("line_tolerance", 0),
            long_function_min_lines=section.get(
                "long_function_min_lines", DEFAULT_LONG_FUNCTION_MIN_LINES
            ),
            disabled=disabled,
        )


@dataclass(frozen=True)
class FilterOutcome:
    issue: Issue
    verdict: JudgeVerdict
    decision: str  # kept | dropped
    reasons: tuple[str, ...]

    def __post_init__(self):
        if self.decision == "dropped" and not self.reasons:
            raise ContractError("dropped outcome requires at least one reason")

    def to_dict(self) -> dict:
        return {
            "issue": self.issue.to_dict(),
            "verdict": self.verdict.to_dict(),
            "decision": self.decision,
            "reasons": list(self.reasons),
        }


def _file_languages(diff: Diff, file: str) -> tuple[str, ...]:
    lang = language_for_path(file)
    if lang:
        return (lang,)
    return tuple(diff.meta.languages)


def _line_resolves(diff: Diff, issue: Issue, tolerance: int) -> bool:
    for offset in range(-tolerance, tolerance + 1):
        candidate = issue.line + offset
        if candidate < 1:
            continue
        if line_lookup(diff, issue.file, candidate) is not None:
            return True
    return False


def _doc_exists(diff: Diff, issue: Issue) -> bool:
    langs = _file_languages(diff, issue.file)
    span = None
    if issue.function:
        span = span_named(diff, issue.file, issue.function, langs)
    if span is None:
        span = span_at(diff, issue.file, issue.line, langs)
    if span is None:
        return False
    body = [ln.content for ln in span_lines(diff, span)[1:]]
    return contains_docstring(body, language_for_path(issue.file))


def _no_real_division(diff: Diff, issue: Issue) -> bool:
    cited = line_lookup(diff, issue.file, issue.line)
    if cited is None:
        return False  # the line rule already covers unresolved lines
    return not division_divisors(cited.content, language_for_path(issue.file))


def _function_too_short(diff: Diff, issue: Issue, min_lines: int) -> bool:
    langs = _file_languages(diff, issue.file)
    span = None
    if issue.function:
        span = span_named(diff, issue.file, issue.function, langs)
    if span is None:
        span = span_at(diff, issue.file, issue.line, langs)
    if span is None:
        return True  # length cannot be confirmed from the diff; drop
    return span["length"] <= min_lines


def apply_filters(
    diff: Diff,
    review: Review,
    verdicts: list[JudgeVerdict],
    cfg: FilterConfig | None = None,
) -> list[FilterOutcome]:
    """Evaluate every rule for every issue; all violated rules are recorded."""
    cfg = cfg or FilterConfig()
    if len(verdicts) != len(review.issues):
        raise ContractError(
            f"verdicts ({len(verdicts)}) are not aligned with issues ({len(review.issues)})"
        )
    outcomes = []
    for issue, verdict in zip(review.issues, verdicts):
        reasons: list[str] = []
        if verdict.score < cfg.score_threshold:
            reasons.append(RULE_SCORE)
        file_known = any(f.path == issue.file for f in diff.files)
        if file_known:
            if not _line_resolves(diff, issue, cfg.line_tolerance):
                reasons.append(RULE_LINE)
        else:
            reasons.append(RULE_FILE)
        if any((issue.tag.name, lang) in cfg.disabled for lang in diff.meta.languages):
            reasons.append(RULE_TAG)
        if file_known:
            if issue.tag.name == "Documentation" and _doc_exists(diff, issue):
                reasons.append(RULE_DOC)
            if issue.tag.name == "DivisionByZero" and _no_real_division(diff, issue):
                reasons.append(RULE_DIV)
            if issue.tag.name == "BreakdownLongFunction" and _function_too_short(
                diff, issue, cfg.long_function_min_lines
            ):
                reasons.append(RULE_SHORT)
        outcomes.append(
            FilterOutcome(
                issue=issue,
                verdict=verdict,
                decision="kept" if not reasons else "dropped",
                reasons=tuple(reasons),
            )
        )
    return outcomes


@dataclass(frozen=True)
class ValidationResult:
    final: Review
    audit: tuple[FilterOutcome, ...]

    def to_dict(self) -> dict:
        return {
            "final": self.final.to_dict(),
            "audit": [o.to_dict() for o in self.audit],
        }


def validate(
    diff: Diff,
    review: Review,
    cfg: FilterConfig | None = None,
    backend=None,
) -> ValidationResult:
    """Judge then filter; the final review keeps surviving issues in order."""
    verdicts = judge(diff, review, backend)
    outcomes = apply_filters(diff, review, verdicts, cfg)
    kept = tuple(o.issue for o in outcomes if o.decision == "kept")
    final = Review(
        diff_id=review.diff_id,
        issues=kept,
        provenance=review.provenance,
        warnings=review.warnings,
    )
    return ValidationResult(final=final, audit=tuple(outcomes))
