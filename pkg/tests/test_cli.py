import json

import pytest

from cqs.cli import main

from conftest import FIXTURES, RATIO_DIFF

DIFF = str(FIXTURES / "fix.patch")
META = str(FIXTURES / "meta.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestReviewCommand:
    def test_final_review_json(self, capsys):
        code, out, _ = run(
            capsys, "review", "--diff", DIFF, "--meta", META,
            "--diff-id", "fix-1", "--backend", "heuristic",
        )
        assert code == 0
        body = json.loads(out)
        assert [i["tag"] for i in body["issues"]] == ["Documentation", "DivisionByZero"]

    def test_byte_identical_across_runs(self, capsys):
        argv = ["review", "--diff", DIFF, "--meta", META, "--diff-id", "fix-1",
                "--backend", "heuristic"]
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second

    def test_debug_includes_audit(self, capsys):
        code, out, _ = run(
            capsys, "review", "--diff", DIFF, "--meta", META, "--debug",
            "--diff-id", "fix-1",
        )
        assert code == 0
        assert "audit" in json.loads(out)

    def test_missing_file_is_domain_error(self, capsys):
        code, _, err = run(capsys, "review", "--diff", "no-such-file.patch")
        assert code == 1
        assert "error" in err


class TestUsageErrors:
    def test_unknown_subcommand_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_missing_required_flag_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["review"])
        assert exc.value.code == 2


class TestCollectCommand:
    def test_jsonl_reviews(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "collect", "--diff", DIFF, "--meta", META,
            "--diff-id", "fix-1", "--n", "3",
        )
        assert code == 0
        rows = [json.loads(ln) for ln in out.splitlines()]
        assert [r["provenance"]["sample_index"] for r in rows] == [0, 1, 2]


class TestJudgeValidatePipeline:
    def test_judge_emits_aligned_verdicts(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "collect", "--diff", DIFF, "--meta", META, "--diff-id", "fix-1",
        )
        reviews = tmp_path / "reviews.jsonl"
        reviews.write_text(out)
        scored = tmp_path / "scored.jsonl"
        code, out, _ = run(
            capsys, "judge", "--diff", DIFF, "--meta", META, "--diff-id", "fix-1",
            "--review", str(reviews), "--scored-out", str(scored),
        )
        assert code == 0
        rows = [json.loads(ln) for ln in out.splitlines()]
        assert [r["issue_index"] for r in rows] == [0, 1]
        assert all(r["score"] == 8 for r in rows)
        assert scored.exists()

    def test_validate_command(self, capsys, tmp_path):
        _, out, _ = run(capsys, "collect", "--diff", DIFF, "--meta", META, "--diff-id", "fix-1")
        reviews = tmp_path / "reviews.jsonl"
        reviews.write_text(out)
        code, out, _ = run(
            capsys, "validate", "--diff", DIFF, "--meta", META, "--diff-id", "fix-1",
            "--review", str(reviews),
        )
        assert code == 0
        body = json.loads(out.splitlines()[0])
        assert len(body["final"]["issues"]) == 2


class TestPairsCommand:
    def test_delegates_and_summarizes(self, capsys, tmp_path):
        issue = {
            "tag": "Typo", "function": None, "rationale": "r1",
            "file": "metrics/ratio.py", "line": 3,
        }
        other = dict(issue, rationale="r2")
        scored_row = {
            "diff_id": "fix-1",
            "diff_text": RATIO_DIFF,
            "meta": {},
            "samples": [[{**issue, "score": 9}], [{**other, "score": 2}]],
        }
        scored = tmp_path / "scored.jsonl"
        scored.write_text(json.dumps(scored_row) + "\n")
        out_path = tmp_path / "pairs.jsonl"
        code, out, _ = run(
            capsys, "pairs", "--scored", str(scored), "--delta", "3", "--out", str(out_path),
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["pair_count"] == 1
        row = json.loads(out_path.read_text().splitlines()[0])
        assert row["margin"] == 7


class TestDpoCheckCommand:
    def test_loss_and_gradient_report(self, capsys, tmp_path):
        batch = tmp_path / "batch.jsonl"
        batch.write_text(
            json.dumps(
                {
                    "policy_chosen": [-1.0],
                    "ref_chosen": [-3.0],
                    "policy_rejected": [-3.0],
                    "ref_rejected": [-2.0],
                }
            )
            + "\n"
        )
        code, out, _ = run(capsys, "dpo-check", "--batch", str(batch), "--beta", "0.1")
        assert code == 0
        body = json.loads(out)
        assert body["mean_loss"] == pytest.approx(0.5543552444685271)
        assert body["gradient_check"] == "pass"


class TestCurateCommand:
    def test_critiques_offline(self, capsys, tmp_path):
        row = {
            "diff_id": "fix-1",
            "diff_text": RATIO_DIFF,
            "meta": {"languages": ["python"]},
            "issue": {
                "tag": "DivisionByZero", "function": "safe_ratio",
                "rationale": "divisor unchecked", "file": "metrics/ratio.py", "line": 5,
            },
            "sentiment": "down",
            "comment": "the denominator is validated upstream of this call",
        }
        infile = tmp_path / "feedback.jsonl"
        infile.write_text(json.dumps(row) + "\n")
        outfile = tmp_path / "critiques.jsonl"
        code, out, _ = run(
            capsys, "curate", "critiques", "--in", str(infile), "--out", str(outfile),
        )
        assert code == 0
        assert json.loads(out)["kept"] == 1
        assert outfile.read_text().strip()


class TestEvalCommand:
    def test_text_report(self, capsys, tmp_path):
        bench = tmp_path / "bench.jsonl"
        bench.write_text(
            json.dumps(
                {
                    "diff_id": "fix-1",
                    "diff_text": RATIO_DIFF,
                    "meta": {"title": "Add safe_ratio", "summary": "ratio helper",
                             "languages": ["python"]},
                    "consensus_issues": [
                        {
                            "tag": "DivisionByZero", "function": "safe_ratio",
                            "rationale": "The divisor 'den' is not checked against zero "
                                         "before this division. Could you validate it is "
                                         "non-zero first?",
                            "file": "metrics/ratio.py", "line": 5,
                        }
                    ],
                }
            )
            + "\n"
        )
        code, out, _ = run(
            capsys, "eval", "--benchmark", str(bench), "--runs", "3", "--format", "text",
        )
        assert code == 0
        assert "recall (%)" in out
        assert "100.00" in out  # recall: the single consensus issue is found
