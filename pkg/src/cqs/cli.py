"""Command-line entry point; one subcommand per pipeline stage.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import curation
from .collector import collect, sample_reviews
from .diffs import parse_unified
from .dpo import DpoConfig, SequenceLogProbs, dpo_grad, dpo_loss, example_margin
from .errors import CqsError
from .evaluation import EvalConfig, judge_accuracy, load_benchmark, render_report, run_eval
from .gateway import BackendConfig, make_backend
from .issues import DiffMeta, Issue, Review
from .judge import judge
from .pairs import ScoredIssue, build_dataset, emit_dpo_jsonl
from .validator import FilterConfig, validate


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _filter_cfg(config: dict) -> FilterConfig:
    section = config.get("filters", {})
    disabled = frozenset(tuple(e.split(":", 1)) for e in section.get("disabled_tags", []))
    return FilterConfig(
        score_threshold=section.get("score_threshold", FilterConfig().score_threshold),
        line_tolerance=section.get("line_tolerance", 0),
        long_function_min_lines=section.get(
            "long_function_min_lines", FilterConfig().long_function_min_lines
        ),
        disabled=disabled,
    )


def _backend(config: dict, override_id: str | None):
    section = dict(config.get("backend", {}))
    if override_id:
        if override_id in ("heuristic", "scripted"):
            section.setdefault("id", override_id)
            section["kind"] = override_id
        else:
            section["id"] = override_id
    section.setdefault("id", "heuristic")
    section.setdefault("kind", "heuristic")
    cfg = BackendConfig(
        backend_id=section["id"],
        kind=section["kind"],
        endpoint=section.get("endpoint"),
        timeout=section.get("timeout", 30.0),
        max_retries=section.get("max_retries", 2),
        max_in_flight=section.get("max_in_flight", 4),
    )
    kwargs = {}
    if cfg.kind == "scripted" and section.get("responses"):
        with open(section["responses"], encoding="utf-8") as fh:
            kwargs["responses"] = json.load(fh)
    return make_backend(cfg, **kwargs)


def _load_diff(args) -> tuple:
    with open(args.diff, encoding="utf-8") as fh:
        diff_text = fh.read()
    meta = DiffMeta()
    if getattr(args, "meta", None):
        with open(args.meta, encoding="utf-8") as fh:
            meta = DiffMeta.from_dict(json.load(fh))
    diff_id = getattr(args, "diff_id", None) or args.diff
    return parse_unified(diff_text, meta, diff_id=diff_id), diff_text


def _print(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_review(args) -> int:
    diff, _ = _load_diff(args)
    backend = _backend(_load_config(args.config), args.backend)
    review = collect(diff, backend, seed=args.seed)
    result = validate(diff, review, _filter_cfg(_load_config(args.config)), backend)
    out = result.to_dict() if args.debug else result.final.to_dict()
    _print(out)
    return 0


def cmd_collect(args) -> int:
    diff, _ = _load_diff(args)
    backend = _backend(_load_config(args.config), args.backend)
    if args.n == 1:
        reviews = [collect(diff, backend, temperature=args.temperature, seed=args.seed)]
    else:
        report = sample_reviews(diff, backend, n=args.n, temperature=args.temperature)
        reviews = report.reviews
        if report.failed_indices:
            sys.stderr.write(f"failed sample indices: {report.failed_indices}\n")
    for review in reviews:
        sys.stdout.write(json.dumps(review.to_dict()) + "\n")
    return 0


def _read_reviews(path: str) -> list[Review]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Review.from_dict(json.loads(line)))
    return out


def cmd_judge(args) -> int:
    diff, diff_text = _load_diff(args)
    backend = _backend(_load_config(args.config), args.backend)
    reviews = _read_reviews(args.review)
    scored_samples = []
    for review in reviews:
        verdicts = judge(diff, review, backend)
        for issue_index, verdict in enumerate(verdicts):
            sys.stdout.write(
                json.dumps(
                    {
                        "diff_id": review.diff_id,
                        "sample_index": review.provenance.sample_index,
                        "issue_index": issue_index,
                        **verdict.to_dict(),
                    }
                )
                + "\n"
            )
        scored_samples.append(
            [
                {**issue.to_dict(), "score": verdict.score}
                for issue, verdict in zip(review.issues, verdicts)
            ]
        )
    if args.scored_out:
        with open(args.scored_out, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "diff_id": diff.diff_id,
                        "diff_text": diff_text,
                        "meta": diff.meta.to_dict(),
                        "samples": scored_samples,
                    }
                )
                + "\n"
            )
    return 0


def cmd_validate(args) -> int:
    diff, _ = _load_diff(args)
    config = _load_config(args.config)
    backend = _backend(config, args.backend)
    for review in _read_reviews(args.review):
        result = validate(diff, review, _filter_cfg(config), backend)
        sys.stdout.write(json.dumps(result.to_dict()) + "\n")
    return 0


def cmd_pairs(args) -> int:
    diffs_with_scores = []
    with open(args.scored, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            diff = parse_unified(
                row["diff_text"], DiffMeta.from_dict(row.get("meta", {})), diff_id=row["diff_id"]
            )
            samples = [
                [
                    ScoredIssue(
                        issue=Issue.from_dict(item),
                        score=item["score"],
                        source_sample=sample_index,
                    )
                    for item in sample
                ]
                for sample_index, sample in enumerate(row["samples"])
            ]
            diffs_with_scores.append((diff, samples))
    all_pairs, summary = build_dataset(diffs_with_scores, margin_threshold=args.delta)
    emit_dpo_jsonl(all_pairs, args.out)
    _print(summary.to_dict())
    return 0


def cmd_dpo_check(args) -> int:
    batch = []
    with open(args.batch, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                batch.append(SequenceLogProbs.from_dict(json.loads(line)))
    cfg = DpoConfig(beta=args.beta)
    loss = dpo_loss(batch, cfg)
    worst = 0.0
    h = 1e-5
    for example in batch:
        grads = dpo_grad(example, cfg)
        for t in range(len(example.policy_chosen)):
            for direction, name in ((1, "policy_chosen"), (-1, "policy_rejected")):
                tokens = list(getattr(example, name))
                if t >= len(tokens):
                    continue
                bumped_up = tokens.copy()
                bumped_up[t] += h
                bumped_down = tokens.copy()
                bumped_down[t] -= h
                up = SequenceLogProbs(**{**_as_kwargs(example), name: tuple(bumped_up)})
                down = SequenceLogProbs(**{**_as_kwargs(example), name: tuple(bumped_down)})
                numeric = (dpo_loss([up], cfg)["mean_loss"] - dpo_loss([down], cfg)["mean_loss"]) / (2 * h)
                analytic = grads[name][t]
                denom = max(abs(numeric), abs(analytic), 1e-12)
                worst = max(worst, abs(numeric - analytic) / denom)
    _print(
        {
            "mean_loss": loss["mean_loss"],
            "per_example": loss["per_example"],
            "margins": [example_margin(ex, cfg) for ex in batch],
            "max_gradient_relative_error": worst,
            "gradient_check": "pass" if worst < 1e-4 else "fail",
        }
    )
    return 0


def _as_kwargs(example: SequenceLogProbs) -> dict:
    return {
        "policy_chosen": example.policy_chosen,
        "ref_chosen": example.ref_chosen,
        "policy_rejected": example.policy_rejected,
        "ref_rejected": example.ref_rejected,
    }


def cmd_curate(args) -> int:
    backend = _backend(_load_config(args.config), args.backend)
    if args.what == "sft":
        records = curation.load_human_review_records(args.infile)
        rows, summary = curation.curate_sft_dataset(records, backend)
        with open(args.out, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    else:
        feedback_rows = curation.load_feedback_rows(args.infile)
        samples, summary = curation.curate_critiques(feedback_rows, backend)
        with open(args.out, "w", encoding="utf-8") as fh:
            for sample in samples:
                fh.write(json.dumps(sample.to_dict()) + "\n")
    _print(summary)
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    backend = _backend(config, args.backend)
    benchmark = load_benchmark(args.benchmark)
    cfg = EvalConfig(
        method=args.method,
        backend=backend,
        use_validator=not args.no_validator,
        filter_cfg=_filter_cfg(config),
    )
    report = run_eval(cfg, benchmark, runs=args.runs)
    if args.format == "json":
        _print(report)
    else:
        sys.stdout.write(render_report(report) + "\n")
    return 0 if all(r.get("status") == "ok" for r in report["rows"]) else 1


def cmd_judge_accuracy(args) -> int:
    backend = _backend(_load_config(args.config), args.backend)
    rows = []
    with open(args.labeled, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            rows.append(
                {
                    "diff": parse_unified(
                        row["diff_text"],
                        DiffMeta.from_dict(row.get("meta", {})),
                        diff_id=row["diff_id"],
                    ),
                    "issue": Issue.from_dict(row["issue"]),
                    "sentiment": row["sentiment"],
                }
            )
    _print(judge_accuracy(backend, rows, threshold=args.threshold))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import ReviewStore

    config = _load_config(args.config)
    store_dir = args.store or config.get("service", {}).get("store_dir", "cqs-data")
    static_dir = args.static or config.get("service", {}).get("static_dir")
    backend = _backend(config, args.backend)
    app = create_app(backend, ReviewStore(store_dir), _filter_cfg(config), static_dir=static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqs", description="Code quality review pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, meta=True):
        p.add_argument("--config", default=None)
        p.add_argument("--backend", default=None)
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("review", help="collect + validate one diff, print the final review")
    p.add_argument("--diff", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--diff-id", default=None)
    p.add_argument("--debug", action="store_true", help="include the filter audit")
    common(p)
    p.set_defaults(fn=cmd_review)

    p = sub.add_parser("collect", help="sample reviews for a diff as JSONL")
    p.add_argument("--diff", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--diff-id", default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--temperature", type=float, default=1.0)
    common(p)
    p.set_defaults(fn=cmd_collect)

    p = sub.add_parser("judge", help="score reviews; emits one verdict per line")
    p.add_argument("--diff", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--diff-id", default=None)
    p.add_argument("--review", required=True)
    p.add_argument("--scored-out", default=None, help="append a scored row for `cqs pairs`")
    common(p)
    p.set_defaults(fn=cmd_judge)

    p = sub.add_parser("validate", help="judge + filter reviews")
    p.add_argument("--diff", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--diff-id", default=None)
    p.add_argument("--review", required=True)
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("pairs", help="build preference pairs from scored reviews")
    p.add_argument("--scored", required=True)
    p.add_argument("--delta", type=int, default=3)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_pairs)

    p = sub.add_parser("dpo-check", help="evaluate the preference loss on a batch")
    p.add_argument("--batch", required=True)
    p.add_argument("--beta", type=float, default=0.1)
    common(p)
    p.set_defaults(fn=cmd_dpo_check)

    p = sub.add_parser("curate", help="build SFT or critique training datasets")
    p.add_argument("what", choices=["sft", "critiques"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_curate)

    p = sub.add_parser("eval", help="precision/recall against a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--method", default="collector+validator")
    p.add_argument("--no-validator", action="store_true")
    p.add_argument("--format", choices=["json", "text"], default="text")
    common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("judge-accuracy", help="judge accuracy on thumbs-labeled issues")
    p.add_argument("--labeled", required=True)
    p.add_argument("--threshold", type=int, default=5)
    common(p)
    p.set_defaults(fn=cmd_judge_accuracy)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", default=None)
    p.add_argument("--static", default=None, help="directory of built UI assets to serve at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    common(p)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CqsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
