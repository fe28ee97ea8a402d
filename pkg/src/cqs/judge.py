"""Judging: score each issue of a review 0-10 and return structured verdicts.

Verdicts are normalized onto a single scale: a parsed negative score or an
"invalid" status both map to score 0, so downstream thresholds and pair
building only ever see 0-10.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diffs import Diff
from .errors import UnscoredReviewError, VerdictError
from .gateway import ChatRequest
from .issues import Issue, Review
from .prompts import JUDGE_SYSTEM, judge_scoring_prompt

VALID_STATUSES = ("valid", "invalid")
VALID_SENTIMENTS = ("positive", "negative", "neutral")


@dataclass(frozen=True)
class JudgeVerdict:
    suggestion_content: str
    status: str
    sentiment: str
    line_matching: bool
    score: int
    reason: str

    def __post_init__(self):
        if self.status not in VALID_STATUSES:
            raise VerdictError(f"bad status: {self.status!r}")
        if self.sentiment not in VALID_SENTIMENTS:
            raise VerdictError(f"bad sentiment: {self.sentiment!r}")
        if not 0 <= self.score <= 10:
            raise VerdictError(f"score out of range: {self.score}")

    def to_dict(self) -> dict:
        return {
            "suggestion_content": self.suggestion_content,
            "status": self.status,
            "sentiment": self.sentiment,
            "line_matching": self.line_matching,
            "score": self.score,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JudgeVerdict":
        return cls(
            suggestion_content=d["suggestion_content"],
            status=d["status"],
            sentiment=d["sentiment"],
            line_matching=d["line_matching"],
            score=d["score"],
            reason=d["reason"],
        )


def build_judge_prompt(diff: Diff, issues: list[Issue]) -> ChatRequest:
    return ChatRequest(system=JUDGE_SYSTEM, user=judge_scoring_prompt(diff, issues))


_FIELD_RE = re.compile(r'^\s*"?([A-Za-z_ ]+?)"?\s*:\s*(.*?),?\s*$')
_BLOCK_BOUNDARY_RE = re.compile(r"^\s*[{}]\s*$")
_CANON_KEYS = {
    "suggestion_content": "suggestion_content",
    "status": "status",
    "sentiment": "sentiment",
    "line_matching": "line_matching",
    "suggested_score": "score",
    "score_reason": "reason",
}


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1]
    return value


def parse_verdicts(text: str) -> list[JudgeVerdict]:
    """Parse the judge's YAML-shaped reply into verdicts, in reply order.

    A malformed score (non-integer or > 10) raises VerdictError naming the
    verdict index; negative scores and invalid statuses normalize to 0.
    """
    raw_blocks: list[dict] = []
    current: dict | None = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("```"):
            continue
        if _BLOCK_BOUNDARY_RE.match(line):
            if stripped == "{":
                current = {}
                raw_blocks.append(current)
            else:
                current = None
            continue
        m = _FIELD_RE.match(line)
        if not m:
            continue
        key = m.group(1).strip().lower().replace(" ", "_")
        key = _CANON_KEYS.get(key)
        if key is None:
            continue
        if current is None:
            current = {}
            raw_blocks.append(current)
        current[key] = _unquote(m.group(2))

    verdicts = []
    for idx, raw in enumerate(raw_blocks):
        score_text = raw.get("score", "")
        if not re.fullmatch(r"-?\d+", score_text or ""):
            raise VerdictError(f"malformed verdict at index {idx}: score {score_text!r}", idx)
        score = int(score_text)
        if score > 10:
            raise VerdictError(f"malformed verdict at index {idx}: score {score} out of range", idx)
        status = raw.get("status", "").lower()
        if status not in VALID_STATUSES:
            raise VerdictError(f"malformed verdict at index {idx}: status {raw.get('status')!r}", idx)
        if score < 0 or status == "invalid":
            score = 0
        sentiment = raw.get("sentiment", "neutral").lower()
        if sentiment not in VALID_SENTIMENTS:
            sentiment = "neutral"
        verdicts.append(
            JudgeVerdict(
                suggestion_content=raw.get("suggestion_content", ""),
                status=status,
                sentiment=sentiment,
                line_matching=raw.get("line_matching", "").lower() in ("yes", "true"),
                score=score,
                reason=raw.get("reason", ""),
            )
        )
    return verdicts


def judge(diff: Diff, review: Review, backend) -> list[JudgeVerdict]:
    """Score a review's issues; verdict order mirrors issue order.

    A verdict-count mismatch is retried once with a fresh call, then raised
    as UnscoredReviewError.
    """
    if not review.issues:
        return []
    req = build_judge_prompt(diff, list(review.issues))
    for attempt in range(2):
        result = backend.complete(req)
        verdicts = parse_verdicts(result.text)
        if len(verdicts) == len(review.issues):
            return verdicts
    raise UnscoredReviewError(
        f"judge returned {len(verdicts)} verdicts for {len(review.issues)} issues "
        f"(diff {diff.diff_id})"
    )
