"""HTTP service: submit diffs for review, serve validated reviews, capture
thumbs/critique feedback, and export it as curation input.

Endpoints:
  POST /v1/reviews            submit {diff, meta}; runs collect + validate
  GET  /v1/reviews            list review summaries (queue support)
  GET  /v1/reviews/{id}       one review; ?debug=1 adds the filter audit
  POST /v1/issues/feedback    thumbs up/down + optional comment per issue
  GET  /v1/export/critiques   JSONL stream in the curation input schema
  GET  /v1/metrics            counters incl. helpfulness fractions

The reviewer identity comes from the X-Reviewer-Id header (static ids, no
auth). CQS_LLM_TOKEN passes through to the remote backend if one is used.
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi import FastAPI, Header, Query
from fastapi.responses import JSONResponse, PlainTextResponse

from .collector import collect
from .diffs import Diff, Marker, parse_unified
from .errors import CqsError, DiffParseError, GatewayError
from .issues import DiffMeta
from .validator import FilterConfig, validate


def _rendered_lines(diff: Diff) -> list[dict]:
    """The numbered rendering as structured rows (file, line no, symbol,
    content) so clients show exactly the numbers the prompts saw."""
    files = []
    for f in diff.files:
        lines = []
        for hunk in f.hunks:
            for ln in hunk.lines:
                n = ln.new_no if ln.marker is not Marker.REMOVED else ln.old_no
                lines.append({"no": n, "sym": ln.marker.value, "content": ln.content})
        files.append({"path": f.path, "lines": lines})
    return files


def create_app(
    backend,
    store,
    filter_cfg: FilterConfig | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="cqs")
    filter_cfg = filter_cfg or FilterConfig()

    def _review_payload(row: dict, debug: bool, reviewer_id: str | None) -> dict:
        diff = parse_unified(
            row["diff_text"], DiffMeta.from_dict(row["meta"]), diff_id=row["diff_id"]
        )
        payload = {
            "review_id": row["review_id"],
            "diff_id": row["diff_id"],
            "created_at": row["created_at"],
            "issues": row["final"]["issues"],
            "diff": _rendered_lines(diff),
            "feedback": [r.to_dict() for r in store.feedback_for_review(row["review_id"])],
        }
        if debug:
            payload["audit"] = row["audit"]
        return payload

    @app.post("/v1/reviews")
    def submit_review(body: dict):
        diff_text = body.get("diff", "")
        try:
            meta = DiffMeta.from_dict(body.get("meta", {}))
            diff = parse_unified(diff_text, meta, diff_id=body.get("diff_id", ""))
        except (DiffParseError, ValueError, KeyError, TypeError) as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        try:
            review = collect(diff, backend)
            result = validate(diff, review, filter_cfg, backend)
        except GatewayError as exc:
            return JSONResponse(
                status_code=502,
                content={"error": str(exc), "backend_id": exc.backend_id},
            )
        except CqsError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        row = store.add_review(
            diff_id=diff.diff_id or "",
            diff_text=diff_text,
            meta=meta.to_dict(),
            final=result.final.to_dict(),
            audit=[o.to_dict() for o in result.audit],
        )
        return {
            "review_id": row["review_id"],
            "diff_id": row["diff_id"],
            "issues": row["final"]["issues"],
        }

    @app.get("/v1/reviews")
    def list_reviews(x_reviewer_id: str | None = Header(default=None)):
        rows = []
        for row in store.list_reviews():
            reviewed = False
            if x_reviewer_id:
                reviewed = any(
                    r.reviewer_id == x_reviewer_id
                    for r in store.feedback_for_review(row["review_id"])
                )
            rows.append(
                {
                    "review_id": row["review_id"],
                    "diff_id": row["diff_id"],
                    "created_at": row["created_at"],
                    "issue_count": len(row["final"]["issues"]),
                    "reviewed": reviewed,
                }
            )
        return {"reviews": rows}

    @app.get("/v1/reviews/{review_id}")
    def get_review(
        review_id: str,
        debug: int = Query(default=0),
        x_reviewer_id: str | None = Header(default=None),
    ):
        row = store.get_review(review_id)
        if row is None:
            return JSONResponse(status_code=404, content={"error": "unknown review"})
        return _review_payload(row, debug=bool(debug), reviewer_id=x_reviewer_id)

    @app.post("/v1/issues/feedback")
    def record_feedback(body: dict, x_reviewer_id: str = Header(default="anonymous")):
        review_id = body.get("review_id", "")
        row = store.get_review(review_id)
        if row is None:
            return JSONResponse(status_code=404, content={"error": "unknown review"})
        issue_index = body.get("issue_index")
        issue_count = len(row["final"]["issues"])
        if not isinstance(issue_index, int) or not 0 <= issue_index < issue_count:
            return JSONResponse(
                status_code=422,
                content={"error": f"issue_index out of range (review has {issue_count} issues)"},
            )
        sentiment = body.get("sentiment")
        if sentiment not in ("up", "down"):
            return JSONResponse(status_code=422, content={"error": "sentiment must be up or down"})
        record = store.add_feedback(
            review_id=review_id,
            issue_index=issue_index,
            sentiment=sentiment,
            comment=body.get("comment"),
            reviewer_id=x_reviewer_id,
        )
        return record.to_dict()

    @app.get("/v1/export/critiques")
    def export_critiques():
        lines = []
        skipped = 0
        for record in store.live_feedback():
            row = store.get_review(record.review_id)
            if row is None or record.issue_index >= len(row["final"]["issues"]):
                skipped += 1
                continue
            issue = row["final"]["issues"][record.issue_index]
            lines.append(
                json.dumps(
                    {
                        "diff_id": row["diff_id"],
                        "diff_text": row["diff_text"],
                        "meta": row["meta"],
                        "issue": issue,
                        "sentiment": record.sentiment,
                        "comment": record.comment,
                        "reviewer_id": record.reviewer_id,
                        "timestamp": record.timestamp,
                    }
                )
            )
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(
            content=body,
            media_type="application/jsonl",
            headers={"X-Skipped-Records": str(skipped)},
        )

    @app.get("/v1/metrics")
    def metrics():
        dropped_by_reason: dict[str, int] = {}
        kept = dropped = 0
        for row in store.reviews.values():
            for outcome in row["audit"]:
                if outcome["decision"] == "kept":
                    kept += 1
                else:
                    dropped += 1
                    # primary (first) reason so the per-reason counts sum to the total
                    reason = outcome["reasons"][0]
                    dropped_by_reason[reason] = dropped_by_reason.get(reason, 0) + 1
        live = store.live_feedback()
        up = sum(1 for r in live if r.sentiment == "up")
        down = len(live) - up
        helpfulness = up / (up + down) if (up + down) else None
        cutoff = datetime.now(timezone.utc) - timedelta(days=7)
        recent = [r for r in live if datetime.fromisoformat(r.timestamp) >= cutoff]
        recent_up = sum(1 for r in recent if r.sentiment == "up")
        helpfulness_7d = recent_up / len(recent) if recent else None
        return {
            "reviews_served": len(store.reviews),
            "issues_kept": kept,
            "issues_dropped": dropped,
            "dropped_by_reason": dict(sorted(dropped_by_reason.items())),
            "feedback_up": up,
            "feedback_down": down,
            "helpfulness": helpfulness,
            "helpfulness_7d": helpfulness_7d,
        }

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
