"""Golden-file tests: prompt builders must be byte-stable."""

from cqs.issues import Issue, IssueTag, canonical_tag
from cqs.prompts import (
    collector_prompt,
    default_tag_menu,
    feedback_grading_prompt,
    judge_scoring_prompt,
    review_quality_prompt,
    validator_system_instruction,
)

from conftest import GOLDEN

DOC_ISSUE = Issue(
    tag=canonical_tag("Documentation"),
    function="safe_ratio",
    rationale=(
        "The new function 'safe_ratio' does not appear to have a docstring. "
        "Could you add one describing its purpose?"
    ),
    file="metrics/ratio.py",
    line=3,
)
DIV_ISSUE = Issue(
    tag=canonical_tag("DivisionByZero"),
    function="safe_ratio",
    rationale=(
        "The divisor 'den' is not checked against zero before this division. "
        "Could you validate it is non-zero first?"
    ),
    file="metrics/ratio.py",
    line=5,
)


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


class TestCollectorPrompt:
    def test_matches_golden(self, ratio_diff):
        assert collector_prompt(ratio_diff, ratio_diff.meta) == golden("collector_prompt.txt")

    def test_deterministic(self, ratio_diff):
        a = collector_prompt(ratio_diff, ratio_diff.meta)
        b = collector_prompt(ratio_diff, ratio_diff.meta)
        assert a == b

    def test_empty_summary_slot_present(self, ratio_diff):
        meta = ratio_diff.meta.__class__(title="t", summary="")
        text = collector_prompt(ratio_diff, meta)
        assert "\nSummary: \n" in text

    def test_custom_tag_after_canonical(self, ratio_diff):
        menu = default_tag_menu() + [IssueTag("HardcodedTimeout", canonical=False)]
        text = collector_prompt(ratio_diff, ratio_diff.meta, menu)
        assert text.index("- RenamingFunction:") < text.index("- HardcodedTimeout")


class TestJudgePrompt:
    def test_matches_golden(self, ratio_diff):
        assert judge_scoring_prompt(ratio_diff, [DOC_ISSUE, DIV_ISSUE]) == golden(
            "judge_prompt.txt"
        )

    def test_empty_issue_list_still_renders(self, ratio_diff):
        text = judge_scoring_prompt(ratio_diff, [])
        assert "=== Suggestions (YAML Format) BEGIN ===" in text
        assert "just return an empty YAML string" in text

    def test_single_issue_block_count(self, ratio_diff):
        text = judge_scoring_prompt(ratio_diff, [DOC_ISSUE])
        suggestions = text.split("=== Suggestions (YAML Format) BEGIN ===")[1].split(
            "=== Suggestions (YAML Format) END ==="
        )[0]
        assert suggestions.count('"Function"') == 1


class TestRewritePrompts:
    def test_review_quality_matches_golden(self, ratio_diff):
        text = review_quality_prompt(
            ratio_diff, DOC_ISSUE, "please add docs here, hard to follow"
        )
        assert text == golden("review_quality_prompt.txt")

    def test_feedback_grading_matches_golden(self, ratio_diff):
        text = feedback_grading_prompt(
            ratio_diff, DIV_ISSUE, "down", "the denominator is always positive here"
        )
        assert text == golden("feedback_grading_prompt.txt")

    def test_feedback_grading_empty_comment(self, ratio_diff):
        text = feedback_grading_prompt(ratio_diff, DIV_ISSUE, "up", None)
        assert '"human sentiment": positive\n' in text
        assert '"human feedback comments": \n' in text


class TestValidatorInstruction:
    def test_matches_golden(self):
        assert validator_system_instruction() == golden("validator_system.txt")
