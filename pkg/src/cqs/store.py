"""Append-only JSONL persistence for served reviews and developer feedback.

Two logs (reviews.log, feedback.log) are the source of truth; an in-memory
index is rebuilt by replaying them on start. Feedback is last-write-wins
per (review_id, issue_index, reviewer_id): later log lines shadow earlier
ones during replay exactly as they did live.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class FeedbackRecord:
    feedback_id: str
    review_id: str
    issue_index: int
    sentiment: str  # up | down
    comment: str | None
    reviewer_id: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "feedback_id": self.feedback_id,
            "review_id": self.review_id,
            "issue_index": self.issue_index,
            "sentiment": self.sentiment,
            "comment": self.comment,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackRecord":
        return cls(
            feedback_id=d["feedback_id"],
            review_id=d["review_id"],
            issue_index=d["issue_index"],
            sentiment=d["sentiment"],
            comment=d.get("comment"),
            reviewer_id=d["reviewer_id"],
            timestamp=d["timestamp"],
        )


class ReviewStore:
    def __init__(self, directory: str | Path, now_fn=utc_now_iso):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.reviews_log = self.dir / "reviews.log"
        self.feedback_log = self.dir / "feedback.log"
        self._now = now_fn
        self._write_lock = threading.Lock()
        self.reviews: dict[str, dict] = {}
        self.feedback: dict[tuple[str, int, str], FeedbackRecord] = {}
        self._replay()

    def _replay(self) -> None:
        if self.reviews_log.exists():
            with open(self.reviews_log, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        row = json.loads(line)
                        self.reviews[row["review_id"]] = row
        if self.feedback_log.exists():
            with open(self.feedback_log, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = FeedbackRecord.from_dict(json.loads(line))
                        key = (record.review_id, record.issue_index, record.reviewer_id)
                        self.feedback[key] = record

    def _append(self, path: Path, row: dict) -> None:
        with self._write_lock:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(row) + "\n")
                fh.flush()

    # -- reviews ----------------------------------------------------------
    def add_review(
        self,
        diff_id: str,
        diff_text: str,
        meta: dict,
        final: dict,
        audit: list[dict],
    ) -> dict:
        row = {
            "review_id": uuid.uuid4().hex,
            "diff_id": diff_id,
            "diff_text": diff_text,
            "meta": meta,
            "final": final,
            "audit": audit,
            "created_at": self._now(),
        }
        self._append(self.reviews_log, row)
        self.reviews[row["review_id"]] = row
        return row

    def get_review(self, review_id: str) -> dict | None:
        return self.reviews.get(review_id)

    def list_reviews(self) -> list[dict]:
        return sorted(self.reviews.values(), key=lambda r: (r["created_at"], r["review_id"]))

    # -- feedback ---------------------------------------------------------
    def add_feedback(
        self,
        review_id: str,
        issue_index: int,
        sentiment: str,
        comment: str | None,
        reviewer_id: str,
    ) -> FeedbackRecord:
        record = FeedbackRecord(
            feedback_id=uuid.uuid4().hex,
            review_id=review_id,
            issue_index=issue_index,
            sentiment=sentiment,
            comment=comment,
            reviewer_id=reviewer_id,
            timestamp=self._now(),
        )
        self._append(self.feedback_log, record.to_dict())
        self.feedback[(review_id, issue_index, reviewer_id)] = record
        return record

    def live_feedback(self) -> list[FeedbackRecord]:
        return sorted(self.feedback.values(), key=lambda r: (r.timestamp, r.feedback_id))

    def feedback_for_review(self, review_id: str) -> list[FeedbackRecord]:
        return [r for r in self.live_feedback() if r.review_id == review_id]
