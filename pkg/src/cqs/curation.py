"""Dataset curation: grade and rewrite human review comments into SFT rows,
and distill developer thumbs/critique feedback into judge-training samples."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .collector import build_collector_prompt
from .diffs import Diff, parse_unified
from .errors import CqsError, IssueParseError
from .gateway import ChatRequest
from .issues import DiffMeta, Issue, Provenance, Review, serialize_issue
from .prompts import REWRITE_SYSTEM, feedback_grading_prompt, review_quality_prompt

DEFAULT_CRITIQUE_KEEP_THRESHOLD = 3


@dataclass(frozen=True)
class HumanReviewRecord:
    """A diff with its human-authored review; each issue carries the raw
    reviewer comment it was derived from."""

    diff: Diff
    review: Review
    raw_comments: tuple[str, ...]

    def __post_init__(self):
        if len(self.raw_comments) != len(self.review.issues):
            raise ValueError("one raw comment required per issue")
        if any(not c for c in self.raw_comments):
            raise ValueError("raw comments must be non-empty")


@dataclass(frozen=True)
class CritiqueSample:
    diff_id: str
    issue: Issue
    sentiment: str  # up | down
    critique: str
    quality: int
    kept: bool

    def __post_init__(self):
        if self.sentiment not in ("up", "down"):
            raise ValueError(f"bad sentiment: {self.sentiment!r}")
        if not 0 <= self.quality <= 5:
            raise ValueError(f"quality out of range: {self.quality}")

    def to_dict(self) -> dict:
        return {
            "diff_id": self.diff_id,
            "issue": self.issue.to_dict(),
            "sentiment": self.sentiment,
            "critique": self.critique,
            "quality": self.quality,
            "kept": self.kept,
        }


def diff_eligibility(meta: DiffMeta) -> dict:
    """Training-data gate: multiple human comments, human author, not test-only."""
    reasons = []
    if meta.human_comment_count <= 1:
        reasons.append("too-few-comments")
    if meta.author_is_bot:
        reasons.append("bot-author")
    if meta.is_test_only:
        reasons.append("test-only")
    return {"eligible": not reasons, "reasons": reasons}


_CONCLUSION_RE = re.compile(r"<conclusion>(.*?)</conclusion>", re.DOTALL)


def parse_review_quality_reply(text: str) -> dict:
    """Extract review_quality / review_rewrite from a <conclusion> block."""
    m = _CONCLUSION_RE.search(text)
    if not m:
        raise IssueParseError("reply has no <conclusion> block")
    quality = None
    rewrite = None
    for line in m.group(1).splitlines():
        stripped = line.strip()
        if stripped.startswith("review_quality:"):
            quality = stripped.split(":", 1)[1].strip().lower()
        elif stripped.startswith("review_rewrite:"):
            rewrite = stripped.split(":", 1)[1].strip()
    if quality not in ("good", "bad"):
        raise IssueParseError(f"conclusion has no good/bad review_quality: {quality!r}")
    if rewrite in (None, "null", "None", ""):
        rewrite = None
    return {"quality": quality, "rewrite": rewrite}


def rewrite_human_review(record: HumanReviewRecord, backend) -> list[dict]:
    """Grade each human comment and capture its rewritten rationale.

    A reply without a parseable conclusion marks that issue as skipped; the
    record keeps flowing.
    """
    results = []
    for issue, comment in zip(record.review.issues, record.raw_comments):
        req = ChatRequest(
            system=REWRITE_SYSTEM, user=review_quality_prompt(record.diff, issue, comment)
        )
        reply = backend.complete(req)
        try:
            results.append(parse_review_quality_reply(reply.text))
        except IssueParseError as exc:
            results.append({"quality": "skipped", "rewrite": None, "error": str(exc)})
    return results


def curate_sft_dataset(records: list[HumanReviewRecord], backend) -> tuple[list[dict], dict]:
    """Build (prompt, target) rows from eligible records.

    The target serializes only good-quality issues, with their rationales
    replaced by the rewrites; records whose issues are all bad are omitted.
    """
    rows = []
    summary = {"records": len(records), "kept": 0, "dropped": 0, "issues_kept": 0, "issues_dropped": 0, "skipped_issues": 0}
    for record in records:
        gate = diff_eligibility(record.diff.meta)
        if not gate["eligible"]:
            summary["dropped"] += 1
            continue
        graded = rewrite_human_review(record, backend)
        kept_issues = []
        for issue, verdict in zip(record.review.issues, graded):
            if verdict["quality"] == "skipped":
                summary["skipped_issues"] += 1
                continue
            if verdict["quality"] != "good":
                summary["issues_dropped"] += 1
                continue
            rationale = verdict["rewrite"] or issue.rationale
            kept_issues.append(
                Issue(
                    tag=issue.tag,
                    function=issue.function,
                    rationale=rationale,
                    file=issue.file,
                    line=issue.line,
                )
            )
        if not kept_issues:
            summary["dropped"] += 1
            continue
        summary["kept"] += 1
        summary["issues_kept"] += len(kept_issues)
        prompt = build_collector_prompt(record.diff, record.diff.meta).user
        target = "\n\n".join(serialize_issue(i) for i in kept_issues)
        rows.append({"diff_id": record.diff.diff_id, "prompt": prompt, "target": target})
    return rows, summary


_YAML_FIELD_RE = re.compile(r'^\s*"?([A-Za-z_ ]+?)"?\s*:\s*(.*?)\s*$')


def parse_feedback_grading_reply(text: str) -> dict:
    """Extract human_feedback_quality / critique from the YAML-shaped reply."""
    quality = None
    critique = None
    for line in text.splitlines():
        if line.strip().startswith("```"):
            continue
        m = _YAML_FIELD_RE.match(line)
        if not m:
            continue
        key = m.group(1).strip().lower()
        value = m.group(2).strip()
        if len(value) >= 2 and value[0] == value[-1] == '"':
            value = value[1:-1]
        if key == "human_feedback_quality":
            if not re.fullmatch(r"\d+", value):
                raise IssueParseError(f"human_feedback_quality is not an integer: {value!r}")
            quality = int(value)
        elif key == "critique":
            critique = value
    if quality is None or critique is None:
        raise IssueParseError("reply is missing human_feedback_quality or critique")
    if not 0 <= quality <= 5:
        raise IssueParseError(f"human_feedback_quality out of range: {quality}")
    return {"quality": quality, "critique": critique}


def rewrite_feedback_critique(
    diff: Diff,
    issue: Issue,
    sentiment: str,
    comment: str | None,
    backend,
    keep_threshold: int = DEFAULT_CRITIQUE_KEEP_THRESHOLD,
) -> CritiqueSample:
    """Distill one piece of developer feedback into a graded critique sample."""
    req = ChatRequest(
        system=REWRITE_SYSTEM,
        user=feedback_grading_prompt(diff, issue, sentiment, comment),
    )
    reply = backend.complete(req)
    parsed = parse_feedback_grading_reply(reply.text)
    return CritiqueSample(
        diff_id=diff.diff_id,
        issue=issue,
        sentiment=sentiment,
        critique=parsed["critique"],
        quality=parsed["quality"],
        kept=parsed["quality"] >= keep_threshold,
    )


# ---------------------------------------------------------------------------
# JSONL record loading (CLI + service export both speak these schemas)
# ---------------------------------------------------------------------------

def load_human_review_records(path: str) -> list[HumanReviewRecord]:
    """Rows: {"diff_id", "diff_text", "meta", "issues": [{...issue, "raw_comment"}]}"""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            meta = DiffMeta.from_dict(row.get("meta", {}))
            diff = parse_unified(row["diff_text"], meta, diff_id=row["diff_id"])
            issues = tuple(Issue.from_dict(i) for i in row["issues"])
            comments = tuple(i["raw_comment"] for i in row["issues"])
            review = Review(
                diff_id=diff.diff_id,
                issues=issues,
                provenance=Provenance("human", 0.0, 0),
            )
            records.append(HumanReviewRecord(diff=diff, review=review, raw_comments=comments))
    return records


def load_feedback_rows(path: str) -> list[dict]:
    """Rows: {"diff_id", "diff_text", "meta", "issue", "sentiment", "comment"}"""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            meta = DiffMeta.from_dict(row.get("meta", {}))
            rows.append(
                {
                    "diff": parse_unified(row["diff_text"], meta, diff_id=row["diff_id"]),
                    "issue": Issue.from_dict(row["issue"]),
                    "sentiment": row["sentiment"],
                    "comment": row.get("comment"),
                }
            )
    return rows


def curate_critiques(
    feedback_rows: list[dict],
    backend,
    keep_threshold: int = DEFAULT_CRITIQUE_KEEP_THRESHOLD,
) -> tuple[list[CritiqueSample], dict]:
    samples = []
    summary = {"rows": len(feedback_rows), "kept": 0, "filtered": 0, "errors": 0}
    for row in feedback_rows:
        try:
            sample = rewrite_feedback_critique(
                row["diff"], row["issue"], row["sentiment"], row.get("comment"),
                backend, keep_threshold,
            )
        except (IssueParseError, CqsError):
            summary["errors"] += 1
            continue
        samples.append(sample)
        summary["kept" if sample.kept else "filtered"] += 1
    return samples, summary
