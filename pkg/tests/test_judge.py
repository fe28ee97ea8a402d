import pytest

from cqs.errors import UnscoredReviewError, VerdictError
from cqs.gateway import ScriptedBackend
from cqs.issues import Provenance, Review
from cqs.judge import JudgeVerdict, build_judge_prompt, judge, parse_verdicts

from test_prompts import DIV_ISSUE, DOC_ISSUE


def verdict_block(content="looks right", status="valid", sentiment="negative",
                  line_matching="yes", score=9, reason="correct and actionable"):
    return (
        "{\n"
        f'"Suggestion_content": "{content}"\n'
        f'"Status": {status}\n'
        f'"Sentiment": {sentiment}\n'
        f'"Line_matching": {line_matching}\n'
        f'"Suggested score": {score}\n'
        f'"Score reason": {reason}\n'
        "}"
    )


def review_of(diff, *issues):
    return Review(diff_id=diff.diff_id, issues=tuple(issues), provenance=Provenance("t", 0.0))


class TestParseVerdicts:
    def test_two_verdicts_in_order(self):
        text = "```yaml\n" + verdict_block(score=9) + "\n" + verdict_block(score=3) + "\n```"
        verdicts = parse_verdicts(text)
        assert [v.score for v in verdicts] == [9, 3]

    def test_invalid_status_normalizes_to_zero(self):
        verdicts = parse_verdicts(verdict_block(status="invalid", score=6))
        assert verdicts[0].score == 0
        assert verdicts[0].status == "invalid"

    def test_negative_score_normalizes_to_zero(self):
        verdicts = parse_verdicts(verdict_block(score=-1))
        assert verdicts[0].score == 0

    def test_score_above_ten_is_error_at_index(self):
        with pytest.raises(VerdictError, match="index 0"):
            parse_verdicts(verdict_block(score=12))

    def test_non_integer_score_is_error(self):
        with pytest.raises(VerdictError, match="index 1"):
            parse_verdicts(verdict_block(score=5) + "\n" + verdict_block(score="high"))

    def test_line_matching_parsed(self):
        assert parse_verdicts(verdict_block(line_matching="no"))[0].line_matching is False

    def test_empty_reply_is_no_verdicts(self):
        assert parse_verdicts("") == []
        assert parse_verdicts("```yaml\n```") == []


class TestJudge:
    def test_empty_review_empty_verdicts(self, ratio_diff, heuristic_backend):
        review = review_of(ratio_diff)
        assert judge(ratio_diff, review, heuristic_backend) == []

    def test_scripted_pair(self, ratio_diff):
        review = review_of(ratio_diff, DOC_ISSUE, DIV_ISSUE)
        backend = ScriptedBackend()
        backend.add(
            build_judge_prompt(ratio_diff, [DOC_ISSUE, DIV_ISSUE]),
            verdict_block(score=9) + "\n" + verdict_block(score=3),
        )
        verdicts = judge(ratio_diff, review, backend)
        assert [v.score for v in verdicts] == [9, 3]

    def test_count_mismatch_reasked_then_error(self, ratio_diff):
        review = review_of(ratio_diff, DOC_ISSUE, DIV_ISSUE)
        calls = {"n": 0}

        class ShortBackend:
            backend_id = "short"

            def complete(self, req):
                from cqs.gateway import CompletionResult

                calls["n"] += 1
                return CompletionResult(verdict_block(score=5), "short")

        with pytest.raises(UnscoredReviewError):
            judge(ratio_diff, review, ShortBackend())
        assert calls["n"] == 2  # one re-ask before giving up

    def test_heuristic_end_to_end(self, ratio_diff, heuristic_backend):
        review = review_of(ratio_diff, DOC_ISSUE, DIV_ISSUE)
        verdicts = judge(ratio_diff, review, heuristic_backend)
        assert len(verdicts) == 2
        assert all(v.status == "valid" for v in verdicts)


class TestVerdictInvariants:
    def test_score_range_enforced(self):
        with pytest.raises(VerdictError):
            JudgeVerdict(
                suggestion_content="", status="valid", sentiment="neutral",
                line_matching=True, score=11, reason="",
            )

    def test_bad_status_rejected(self):
        with pytest.raises(VerdictError):
            JudgeVerdict(
                suggestion_content="", status="maybe", sentiment="neutral",
                line_matching=True, score=5, reason="",
            )
