"""Benchmark evaluation: match predicted issues against consensus issues,
compute precision/recall, average over repeated runs, and measure judge
accuracy against thumbs labels."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .collector import collect
from .diffs import Diff, parse_unified
from .errors import EvalError, GatewayError
from .gateway import ChatRequest, sample_seed
from .heuristics import token_overlap_equivalent
from .issues import DiffMeta, Issue, Provenance, Review
from .judge import judge
from .prompts import JUDGE_SYSTEM, equivalence_prompt
from .validator import FilterConfig, validate

DEFAULT_LINE_TOLERANCE = 3
DEFAULT_RUNS = 10
DEFAULT_ACCURACY_THRESHOLD = 5


@dataclass(frozen=True)
class BenchmarkEntry:
    diff: Diff
    consensus_issues: tuple[Issue, ...]

    def __post_init__(self):
        if not self.consensus_issues:
            raise EvalError("benchmark entry must carry at least one consensus issue")


def load_benchmark(path: str) -> list[BenchmarkEntry]:
    """Rows: {"diff_id", "diff_text", "meta", "consensus_issues": [...]}"""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            meta = DiffMeta.from_dict(row.get("meta", {}))
            entries.append(
                BenchmarkEntry(
                    diff=parse_unified(row["diff_text"], meta, diff_id=row["diff_id"]),
                    consensus_issues=tuple(
                        Issue.from_dict(i) for i in row["consensus_issues"]
                    ),
                )
            )
    return entries


@dataclass(frozen=True)
class MatchConfig:
    line_tolerance: int = DEFAULT_LINE_TOLERANCE
    require_file_match: bool = True
    overlap_threshold: float = 0.5

    def __post_init__(self):
        if self.line_tolerance < 0:
            raise ValueError("line_tolerance must be >= 0")


def overlap_comparator(cfg: MatchConfig):
    """The deterministic offline comparator."""

    def compare(a: str, b: str) -> bool:
        return token_overlap_equivalent(a, b, cfg.overlap_threshold)

    return compare


def backend_comparator(backend):
    """Rationale equivalence asked of a backend; failures abort the run."""

    def compare(a: str, b: str) -> bool:
        try:
            result = backend.complete(
                ChatRequest(system=JUDGE_SYSTEM, user=equivalence_prompt(a, b))
            )
        except GatewayError as exc:
            raise EvalError(f"semantic comparator failed: {exc}")
        return result.text.strip().lower().startswith("yes")

    return compare


def match_issues(
    pred: list[Issue],
    gold: list[Issue],
    cfg: MatchConfig | None = None,
    comparator=None,
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching in gold order; returns (gold_i, pred_i) pairs.

    An edge requires exact tag equality, file equality when configured, a
    line gap within tolerance, and an equivalent-rationale verdict.
    """
    cfg = cfg or MatchConfig()
    comparator = comparator or overlap_comparator(cfg)
    matches: list[tuple[int, int]] = []
    used_pred: set[int] = set()
    for gi, g in enumerate(gold):
        for pi, p in enumerate(pred):
            if pi in used_pred:
                continue
            if p.tag.name != g.tag.name:
                continue
            if cfg.require_file_match and p.file != g.file:
                continue
            if abs(p.line - g.line) > cfg.line_tolerance:
                continue
            if not comparator(p.rationale, g.rationale):
                continue
            matches.append((gi, pi))
            used_pred.add(pi)
            break
    return matches


@dataclass(frozen=True)
class Metrics:
    issues_found: int
    precision: float | None
    recall: float

    def to_dict(self) -> dict:
        return {
            "issues_found": self.issues_found,
            "precision": self.precision,
            "recall": self.recall,
        }


def compute_metrics(matchings: list[dict]) -> Metrics:
    """Corpus-level metrics from per-entry matchings.

    Each matching: {"matched": int, "predicted": int, "gold": int}.
    Precision is absent (None) when nothing was predicted at all.
    """
    total_pred = sum(m["predicted"] for m in matchings)
    total_gold = sum(m["gold"] for m in matchings)
    total_matched = sum(m["matched"] for m in matchings)
    if total_gold == 0:
        raise EvalError("benchmark is empty")
    precision = total_matched / total_pred if total_pred else None
    return Metrics(
        issues_found=total_pred,
        precision=precision,
        recall=total_matched / total_gold,
    )


@dataclass
class EvalConfig:
    method: str
    backend: object
    use_validator: bool = True
    filter_cfg: FilterConfig = field(default_factory=FilterConfig)
    match_cfg: MatchConfig = field(default_factory=MatchConfig)
    comparator: object = None  # defaults to the deterministic overlap comparator


def _predict(entry: BenchmarkEntry, cfg: EvalConfig, run_index: int) -> list[Issue]:
    seed = sample_seed(entry.diff.diff_id, run_index)
    review = collect(entry.diff, cfg.backend, seed=seed)
    if cfg.use_validator:
        result = validate(entry.diff, review, cfg.filter_cfg, cfg.backend)
        review = result.final
    return list(review.issues)


def run_eval(
    cfg: EvalConfig, benchmark: list[BenchmarkEntry], runs: int = DEFAULT_RUNS
) -> dict:
    """Run the configured pipeline over the benchmark `runs` times and
    average the metrics; every run uses fresh sampling seeds."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if not benchmark:
        raise EvalError("benchmark is empty")
    comparator = cfg.comparator or overlap_comparator(cfg.match_cfg)
    per_run: list[Metrics] = []
    failed: str | None = None
    for run_index in range(runs):
        try:
            matchings = []
            for entry in benchmark:
                pred = _predict(entry, cfg, run_index)
                matches = match_issues(pred, list(entry.consensus_issues), cfg.match_cfg, comparator)
                matchings.append(
                    {
                        "matched": len(matches),
                        "predicted": len(pred),
                        "gold": len(entry.consensus_issues),
                    }
                )
            per_run.append(compute_metrics(matchings))
        except (EvalError, GatewayError) as exc:
            failed = str(exc)
            break

    row: dict = {"method": cfg.method, "runs": runs}
    if failed is not None:
        row.update({"status": "failed", "error": failed})
        return {"rows": [row]}
    precisions = [m.precision for m in per_run if m.precision is not None]
    recalls = [m.recall for m in per_run]
    found = [m.issues_found for m in per_run]
    row.update(
        {
            "status": "ok",
            "issues_found": sum(found) / len(found),
            "precision": sum(precisions) / len(precisions) if precisions else None,
            "recall": sum(recalls) / len(recalls),
            "precision_spread": (max(precisions) - min(precisions)) if precisions else None,
            "recall_spread": max(recalls) - min(recalls),
        }
    )
    return {"rows": [row]}


def render_report(report: dict) -> str:
    """Text table with the familiar method/#found/precision/recall columns."""
    header = f"{'Method':<40} {'# issues found':>14} {'precision (%)':>14} {'recall (%)':>12}"
    lines = [header, "-" * len(header)]
    for row in report["rows"]:
        if row.get("status") == "failed":
            lines.append(f"{row['method']:<40} {'FAILED: ' + row['error']}")
            continue
        precision = f"{row['precision'] * 100:.2f}" if row["precision"] is not None else "-"
        recall = f"{row['recall'] * 100:.2f}"
        found = f"{row['issues_found']:.0f}"
        lines.append(f"{row['method']:<40} {found:>14} {precision:>14} {recall:>12}")
    return "\n".join(lines)


def judge_accuracy(
    backend,
    labeled: list[dict],
    threshold: int = DEFAULT_ACCURACY_THRESHOLD,
) -> dict:
    """Predict thumbs-up iff the judge score reaches the threshold; report
    accuracy with class counts.

    Each labeled row: {"diff": Diff, "issue": Issue, "sentiment": "up"|"down"}.
    """
    if not labeled:
        raise EvalError("labeled set is empty")
    correct = 0
    up_count = down_count = 0
    for row in labeled:
        sentiment = row["sentiment"]
        if sentiment == "up":
            up_count += 1
        elif sentiment == "down":
            down_count += 1
        else:
            raise EvalError(f"bad sentiment label: {sentiment!r}")
        review = Review(
            diff_id=row["diff"].diff_id,
            issues=(row["issue"],),
            provenance=Provenance("labeled", 0.0, 0),
        )
        verdicts = judge(row["diff"], review, backend)
        predicted = "up" if verdicts[0].score >= threshold else "down"
        if predicted == sentiment:
            correct += 1
    total = len(labeled)
    return {
        "accuracy": correct / total,
        "total": total,
        "correct": correct,
        "up_count": up_count,
        "down_count": down_count,
        "threshold": threshold,
    }
