"""Issue collection: prompt the backend over a diff, parse the reply into a
Review, and sample several diverse reviews per diff."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import GatewayError, SamplingError
from .gateway import ChatRequest, sample_seed
from .issues import DiffMeta, IssueTag, Provenance, Review, parse_issue_block, split_issue_blocks
from .prompts import COLLECTOR_SYSTEM, collector_prompt
from .diffs import Diff

DEFAULT_SAMPLES = 10
DEFAULT_SAMPLING_TEMPERATURE = 1.0


def build_collector_prompt(
    diff: Diff,
    meta: DiffMeta,
    tags: list[IssueTag] | None = None,
    temperature: float = 0.0,
    seed: int | None = None,
) -> ChatRequest:
    return ChatRequest(
        system=COLLECTOR_SYSTEM,
        user=collector_prompt(diff, meta, tags),
        temperature=temperature,
        sample_seed=seed,
    )


def parse_review(
    text: str, diff_id: str, provenance: Provenance
) -> Review:
    """Split a generation into blocks and keep the ones that parse.

    Unparseable blocks are dropped and counted, never fatal.
    """
    blocks = split_issue_blocks(text)
    issues = []
    warnings = 0
    for block in blocks:
        try:
            issues.append(parse_issue_block(block))
        except Exception:
            warnings += 1
    if not blocks and text.strip():
        warnings += 1
    return Review(diff_id=diff_id, issues=tuple(issues), provenance=provenance, warnings=warnings)


def collect(
    diff: Diff,
    backend,
    temperature: float = 0.0,
    seed: int | None = None,
    sample_index: int = 0,
    tags: list[IssueTag] | None = None,
) -> Review:
    req = build_collector_prompt(diff, diff.meta, tags, temperature=temperature, seed=seed)
    result = backend.complete(req)
    provenance = Provenance(result.backend_id, temperature, sample_index)
    return parse_review(result.text, diff.diff_id, provenance)


@dataclass
class SampleReport:
    reviews: list[Review] = field(default_factory=list)
    failed_indices: list[int] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def sample_reviews(
    diff: Diff,
    backend,
    n: int = DEFAULT_SAMPLES,
    temperature: float = DEFAULT_SAMPLING_TEMPERATURE,
    max_workers: int = 4,
) -> SampleReport:
    """Draw n reviews with per-slot seeds derived from (diff_id, slot).

    Survivors are re-indexed 0..k-1 in original slot order; the report lists
    the original indices of failed slots. All slots failing is an error.
    """
    if n < 1:
        raise ValueError("n must be >= 1")

    def one(slot: int):
        seed = sample_seed(diff.diff_id, slot)
        return collect(diff, backend, temperature=temperature, seed=seed, sample_index=slot)

    results: list[tuple[int, Review | None, str | None]] = []
    with ThreadPoolExecutor(max_workers=min(max_workers, n)) as pool:
        futures = {slot: pool.submit(one, slot) for slot in range(n)}
        for slot in range(n):
            try:
                results.append((slot, futures[slot].result(), None))
            except GatewayError as exc:
                results.append((slot, None, str(exc)))

    report = SampleReport()
    next_index = 0
    for slot, review, error in results:
        if review is None:
            report.failed_indices.append(slot)
            report.errors.append(f"sample {slot}: {error}")
            continue
        report.reviews.append(
            Review(
                diff_id=review.diff_id,
                issues=review.issues,
                provenance=Provenance(
                    review.provenance.backend_id, review.provenance.temperature, next_index
                ),
                warnings=review.warnings,
            )
        )
        next_index += 1
    if not report.reviews:
        raise SamplingError(
            f"all {n} samples failed for diff {diff.diff_id}: {'; '.join(report.errors)}"
        )
    return report
