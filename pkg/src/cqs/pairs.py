"""Preference-pair construction: turn judge-scored sampled reviews into
issue-wise (chosen, rejected) training rows.

Two issues drawn from any two samples (the same sample included) form a
pair when their tags match and their score gap reaches the margin
threshold; the higher-scored issue is the chosen one. Exact duplicate rows
are collapsed and the output order is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .diffs import Diff, render_numbered
from .issues import Issue, IssueTag, canonical_tag, parse_issue_block, serialize_issue

DEFAULT_MARGIN = 3


@dataclass(frozen=True)
class ScoredIssue:
    issue: Issue
    score: int
    source_sample: int

    def __post_init__(self):
        if not 0 <= self.score <= 10:
            raise ValueError(f"score out of range: {self.score}")


@dataclass(frozen=True)
class PreferencePair:
    diff_id: str
    input: str
    chosen: Issue
    rejected: Issue
    tag: IssueTag
    chosen_score: int
    rejected_score: int
    margin: int

    def __post_init__(self):
        if self.chosen.tag != self.tag or self.rejected.tag != self.tag:
            raise ValueError("pair tag must match both issues")
        if self.chosen_score - self.rejected_score != self.margin or self.margin < 1:
            raise ValueError("margin must equal the positive score difference")
        if self.chosen == self.rejected:
            raise ValueError("chosen and rejected must differ")

    def to_row(self) -> dict:
        return {
            "diff_id": self.diff_id,
            "prompt": self.input,
            "chosen": serialize_issue(self.chosen),
            "rejected": serialize_issue(self.rejected),
            "tag": self.tag.name,
            "chosen_score": self.chosen_score,
            "rejected_score": self.rejected_score,
            "margin": self.margin,
        }

    @classmethod
    def from_row(cls, row: dict) -> "PreferencePair":
        return cls(
            diff_id=row["diff_id"],
            input=row["prompt"],
            chosen=parse_issue_block(row["chosen"]),
            rejected=parse_issue_block(row["rejected"]),
            tag=canonical_tag(row["tag"]),
            chosen_score=row["chosen_score"],
            rejected_score=row["rejected_score"],
            margin=row["margin"],
        )


def build_pairs(
    diff: Diff, scored: list[list[ScoredIssue]], margin_threshold: int = DEFAULT_MARGIN
) -> list[PreferencePair]:
    """Enumerate qualifying pairs over the union of all samples' issues."""
    if margin_threshold < 1:
        raise ValueError("margin threshold must be >= 1")
    rendered = render_numbered(diff)
    flat: list[ScoredIssue] = [si for sample in scored for si in sample]
    candidates: list[tuple] = []
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            a, b = flat[i], flat[j]
            if a.issue.tag != b.issue.tag:
                continue
            gap = abs(a.score - b.score)
            if gap < margin_threshold:
                continue
            if a.issue == b.issue:
                continue
            winner, loser = (a, b) if a.score > b.score else (b, a)
            candidates.append((a.issue.tag.name, -gap, i, j, winner, loser))
    candidates.sort(key=lambda c: c[:4])
    pairs: list[PreferencePair] = []
    seen: set[tuple] = set()
    for tag_name, neg_gap, _i, _j, winner, loser in candidates:
        key = (rendered, serialize_issue(winner.issue), serialize_issue(loser.issue))
        if key in seen:
            continue
        seen.add(key)
        pairs.append(
            PreferencePair(
                diff_id=diff.diff_id,
                input=rendered,
                chosen=winner.issue,
                rejected=loser.issue,
                tag=winner.issue.tag,
                chosen_score=winner.score,
                rejected_score=loser.score,
                margin=-neg_gap,
            )
        )
    return pairs


@dataclass
class DatasetSummary:
    pair_count: int = 0
    pairs_per_tag: dict = field(default_factory=dict)
    margin_histogram: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "pairs_per_tag": dict(sorted(self.pairs_per_tag.items())),
            "margin_histogram": {str(k): v for k, v in sorted(self.margin_histogram.items())},
            "failures": list(self.failures),
        }


def build_dataset(
    diffs_with_scores: list[tuple[Diff, list[list[ScoredIssue]]]],
    margin_threshold: int = DEFAULT_MARGIN,
) -> tuple[list[PreferencePair], DatasetSummary]:
    """Concatenate per-diff pairs; per-diff failures are recorded, not fatal."""
    all_pairs: list[PreferencePair] = []
    summary = DatasetSummary()
    for diff, scored in diffs_with_scores:
        try:
            pairs = build_pairs(diff, scored, margin_threshold)
        except Exception as exc:
            summary.failures.append(f"{diff.diff_id}: {exc}")
            continue
        all_pairs.extend(pairs)
    summary.pair_count = len(all_pairs)
    for pair in all_pairs:
        summary.pairs_per_tag[pair.tag.name] = summary.pairs_per_tag.get(pair.tag.name, 0) + 1
        summary.margin_histogram[pair.margin] = summary.margin_histogram.get(pair.margin, 0) + 1
    return all_pairs, summary


def emit_dpo_jsonl(pairs: list[PreferencePair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_row()) + "\n")


def load_dpo_jsonl(path: str) -> list[PreferencePair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pairs.append(PreferencePair.from_row(json.loads(line)))
    return pairs
