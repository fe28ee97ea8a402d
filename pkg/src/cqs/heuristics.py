"""Deterministic heuristic reviewer and text-level code heuristics.

heuristic_review applies four fixed rules to a diff:
  1. a new function without a docstring/comment -> Documentation
  2. a new function span longer than 50 lines   -> BreakdownLongFunction
  3. an added division by an unguarded variable -> DivisionByZero
  4. an added block (>= 3 lines) repeating an earlier added block -> DedupeLogic

heuristic_reply additionally recognizes the other prompt shapes (judging,
comment rewriting, feedback grading, rationale equivalence) and answers
them with fixed rules, so every pipeline stage can run offline.
"""

from __future__ import annotations

import re

from .diffs import (
    Diff,
    DiffLine,
    FileDiff,
    Hunk,
    Marker,
    changed_function_spans,
    line_lookup,
    span_lines,
)
from .issues import Issue, canonical_tag, parse_issue_block, serialize_issue, split_issue_blocks

LONG_FUNCTION_LINES = 50
DUPLICATE_BLOCK_LINES = 3

_EXTENSION_LANGUAGES = {
    ".py": "python",
    ".go": "go",
    ".js": "javascript",
    ".jsx": "javascript",
    ".ts": "javascript",
    ".tsx": "javascript",
    ".php": "php",
    ".hack": "hack",
    ".java": "java",
    ".cpp": "cpp",
    ".cc": "cpp",
    ".cxx": "cpp",
    ".c": "cpp",
    ".h": "cpp",
    ".hpp": "cpp",
    ".hh": "hack",
}

_C_FAMILY = ("cpp", "java", "javascript", "go", "php", "hack")


def language_for_path(path: str) -> str | None:
    for ext, lang in _EXTENSION_LANGUAGES.items():
        if path.endswith(ext):
            return lang
    return None


def contains_docstring(contents: list[str], language: str | None) -> bool:
    """True when the lines carry any form of documentation: a docstring,
    a block comment, or a line comment."""
    for raw in contents:
        stripped = raw.strip()
        if '"""' in stripped or "'''" in stripped:
            return True
        if language in _C_FAMILY and ("/*" in stripped or stripped.startswith(("//", "*"))):
            return True
        if language in ("python", "php", "hack", None) and stripped.startswith("#"):
            return True
        if language is None and (("/*" in stripped) or stripped.startswith("//")):
            return True
    return False


def _strip_strings(content: str) -> str:
    return re.sub(r"(\"[^\"]*\"|'[^']*')", "''", content)


_DIVISOR_RE = re.compile(r"/=?\s*([A-Za-z_][\w.]*|\d[\w.]*|\()")


def division_divisors(content: str, language: str | None) -> list[str]:
    """Divisor tokens of division operations on a line; literals excluded.

    Comment tails are cut per language; Python's ``//`` floor division is
    treated as a division, C-family ``//`` as a comment.
    """
    code = _strip_strings(content)
    if language == "python" or language is None and "#" in code:
        code = code.split("#")[0]
    if language == "python":
        code = code.replace("//", "/")
    else:
        code = code.split("//")[0]
        code = code.split("/*")[0]
    out = []
    for m in _DIVISOR_RE.finditer(code):
        token = m.group(1)
        if token[0].isdigit():
            continue
        out.append(token)
    return out


_GUARD_PATTERNS = ("!= 0", "!== 0", "> 0", "== 0", "=== 0", "is not 0")


def _zero_guard_nearby(token: str, line: DiffLine, recent: list[DiffLine]) -> bool:
    base = token.split(".")[0].split("(")[0]
    if not base or base == "(":
        return False
    probe = [line.content] + [ln.content for ln in recent]
    for content in probe:
        if base not in content:
            continue
        if f"if {base}" in content or f"if ({base}" in content or f"assert {base}" in content:
            return True
        if any(f"{base}{suffix}" in content.replace(" ", "") for suffix in ("!=0", ">0", "==0", "!==0", "===0")):
            return True
        if any(p in content for p in _GUARD_PATTERNS) and base in content:
            return True
    return False


def heuristic_review(diff: Diff) -> str:
    """Run the fixed review rules over a diff; returns issue blocks."""
    issues: list[Issue] = []
    for f in diff.files:
        lang = language_for_path(f.path)
        file_spans = [
            s
            for s in (changed_function_spans(diff, lang) if lang else [])
            if s["file"] == f.path
        ]
        doc_issues: list[Issue] = []
        long_issues: list[Issue] = []
        for span in sorted(file_spans, key=lambda s: s["start"]):
            header = line_lookup(diff, f.path, span["start"])
            if header is None or header.marker is not Marker.ADDED:
                continue
            body = [ln.content for ln in span_lines(diff, span)[1:]]
            if not contains_docstring(body, lang):
                doc_issues.append(
                    Issue(
                        tag=canonical_tag("Documentation"),
                        function=span["name"],
                        rationale=(
                            f"The new function '{span['name']}' does not appear to have a "
                            "docstring. Could you add one describing its purpose?"
                        ),
                        file=f.path,
                        line=span["start"],
                    )
                )
            if span["length"] > LONG_FUNCTION_LINES:
                long_issues.append(
                    Issue(
                        tag=canonical_tag("BreakdownLongFunction"),
                        function=span["name"],
                        rationale=(
                            f"The function '{span['name']}' spans {span['length']} lines. "
                            "Would it be worth breaking it down into smaller, more focused "
                            "functions?"
                        ),
                        file=f.path,
                        line=span["start"],
                    )
                )
        issues.extend(doc_issues)
        issues.extend(long_issues)
        issues.extend(_division_issues(diff, f, lang, file_spans))
        issues.extend(_dedupe_issues(diff, f, file_spans))
    return "\n\n".join(serialize_issue(i) for i in issues)


def _enclosing_name(spans: list[dict], line: int) -> str | None:
    best = None
    for s in spans:
        if s["start"] <= line <= s["end"] and (best is None or s["start"] >= best["start"]):
            best = s
    return best["name"] if best else None


def _division_issues(diff: Diff, f: FileDiff, lang: str | None, spans: list[dict]) -> list[Issue]:
    out: list[Issue] = []
    for hunk in f.hunks:
        new_side = [ln for ln in hunk.lines if ln.marker is not Marker.REMOVED]
        for idx, ln in enumerate(new_side):
            if ln.marker is not Marker.ADDED:
                continue
            recent = new_side[max(0, idx - 3) : idx]
            for token in division_divisors(ln.content, lang):
                if _zero_guard_nearby(token, ln, recent):
                    continue
                out.append(
                    Issue(
                        tag=canonical_tag("DivisionByZero"),
                        function=_enclosing_name(spans, ln.new_no),
                        rationale=(
                            f"The divisor '{token}' is not checked against zero before this "
                            "division. Could you validate it is non-zero first?"
                        ),
                        file=f.path,
                        line=ln.new_no,
                    )
                )
                break  # one issue per line is enough
    return out


def _dedupe_issues(diff: Diff, f: FileDiff, spans: list[dict]) -> list[Issue]:
    added: list[DiffLine] = [
        ln for hunk in f.hunks for ln in hunk.lines if ln.marker is Marker.ADDED
    ]
    seen: dict[tuple, int] = {}
    flagged: set[tuple] = set()
    out: list[Issue] = []
    k = DUPLICATE_BLOCK_LINES
    next_allowed = 0  # suppress overlapping windows of one duplicated region
    for i in range(len(added) - k + 1):
        window = tuple(ln.content.strip() for ln in added[i : i + k])
        if any(not w for w in window):
            continue
        if window in seen:
            if window not in flagged and i >= seen[window] + k and i >= next_allowed:
                flagged.add(window)
                next_allowed = i + k
                line = added[i].new_no
                out.append(
                    Issue(
                        tag=canonical_tag("DedupeLogic"),
                        function=_enclosing_name(spans, line),
                        rationale=(
                            "These lines repeat an earlier block in this file. Could the "
                            "shared logic be extracted into a helper function?"
                        ),
                        file=f.path,
                        line=line,
                    )
                )
        else:
            seen[window] = i
    return out


# ---------------------------------------------------------------------------
# Prompt-shape dispatch for the offline backend
# ---------------------------------------------------------------------------

_COLLECT_BEGIN = "=== Raw Source Control Code Changes BEGIN ==="
_COLLECT_END = "=== Raw Source Control Code Changes END ==="
_JUDGE_PREFIX = "You are a language model that specializes in evaluating reviews"
_SUGGESTIONS_BEGIN = "=== Suggestions (YAML Format) BEGIN ==="
_SUGGESTIONS_END = "=== Suggestions (YAML Format) END ==="
_REWRITE_PREFIX = "You are given a code change and a corresponding code review."
_REVIEW_BEGIN = "=== Code Review (YAML FORMAT) BEGIN ==="
_REVIEW_END = "=== Code Review (YAML FORMAT) END ==="
_FEEDBACK_PREFIX = "You are given a code review and a corresponding feedback"
_EQUIVALENCE_PREFIX = "Do these two code review rationales describe the same underlying issue?"

_NUMBERED_LINE_RE = re.compile(r"^(\d+)([+\- ]) (.*)$")


def diff_from_numbered(text: str) -> Diff:
    """Reconstruct a diff structure from the numbered rendering.

    Lossy: old-file numbers of context lines are approximated with the
    new-file numbers, which is irrelevant to the review rules (they only
    read the new side).
    """
    files: list[FileDiff] = []
    for section in text.split("\n\n"):
        rows = section.splitlines()
        if not rows:
            continue
        path = rows[0].strip()
        if not path or _NUMBERED_LINE_RE.match(rows[0]):
            continue
        lines: list[DiffLine] = []
        for row in rows[1:]:
            m = _NUMBERED_LINE_RE.match(row)
            if not m:
                continue
            n, sym, content = int(m.group(1)), m.group(2), m.group(3)
            if sym == "+":
                lines.append(DiffLine(Marker.ADDED, content, new_no=n))
            elif sym == "-":
                lines.append(DiffLine(Marker.REMOVED, content, old_no=n))
            else:
                lines.append(DiffLine(Marker.CONTEXT, content, old_no=n, new_no=n))
        if not lines:
            continue
        files.append(FileDiff(path, tuple(_pseudo_hunks(lines))))
    if not files:
        files.append(FileDiff("<unknown>", ()))
    return Diff(diff_id="<from-prompt>", files=tuple(files))


def _pseudo_hunks(lines: list[DiffLine]) -> list[Hunk]:
    hunks: list[Hunk] = []
    current: list[DiffLine] = []
    last_new: int | None = None
    for ln in lines:
        n = ln.new_no
        if n is not None and last_new is not None and n > last_new + 1 and current:
            hunks.append(_as_hunk(current))
            current = []
        current.append(ln)
        if n is not None:
            last_new = n
    if current:
        hunks.append(_as_hunk(current))
    return hunks


def _as_hunk(lines: list[DiffLine]) -> Hunk:
    old = [ln.old_no for ln in lines if ln.old_no is not None]
    new = [ln.new_no for ln in lines if ln.new_no is not None]
    return Hunk(
        old_start=min(old) if old else 0,
        old_len=len(old),
        new_start=min(new) if new else 0,
        new_len=len(new),
        lines=tuple(lines),
    )


def _between(text: str, begin: str, end: str) -> str:
    start = text.index(begin) + len(begin)
    stop = text.index(end, start)
    return text[start:stop].strip("\n")


def _judge_reply(prompt: str) -> str:
    section = _between(prompt, _SUGGESTIONS_BEGIN, _SUGGESTIONS_END)
    blocks = split_issue_blocks(section)
    verdicts = []
    for block in blocks:
        try:
            issue = parse_issue_block(block)
            rationale = issue.rationale
        except Exception:
            rationale = ""
        verdicts.append(
            "{\n"
            f'"Suggestion_content": "{rationale}"\n'
            '"Status": valid\n'
            '"Sentiment": negative\n'
            '"Line_matching": yes\n'
            '"Suggested score": 8\n'
            '"Score reason": the suggestion is specific to the changed lines and actionable\n'
            "}"
        )
    return "```yaml\n" + "\n".join(verdicts) + "\n```" if verdicts else ""


_NITPICK_MARKERS = ("nit", "http://", "https://")


def _rewrite_reply(prompt: str) -> str:
    section = _between(prompt, _REVIEW_BEGIN, _REVIEW_END)
    comment = ""
    try:
        comment = parse_issue_block(section).rationale
    except Exception:
        pass
    lowered = comment.lower()
    bad = (
        not comment
        or len(comment.split()) < 3
        or any(marker in lowered for marker in _NITPICK_MARKERS)
    )
    if bad:
        return "<conclusion>\n   review_quality: bad\n   review_rewrite: null\n</conclusion>"
    return (
        "<conclusion>\n"
        "   review_quality: good\n"
        f"   review_rewrite: {comment}\n"
        "</conclusion>"
    )


def _feedback_reply(prompt: str) -> str:
    sentiment = "negative"
    comment = ""
    for line in prompt.splitlines():
        stripped = line.strip()
        if stripped.startswith('"human sentiment":'):
            sentiment = stripped.split(":", 1)[1].strip()
        elif stripped.startswith('"human feedback comments":'):
            comment = stripped.split(":", 1)[1].strip()
    words = comment.split()
    if not words:
        quality = 2
        critique = (
            "The review is accurate and helpful."
            if sentiment == "positive"
            else "The review does not apply to this code change."
        )
    else:
        quality = 2 if len(words) < 4 else 4
        critique = comment.split(".")[0].strip() + "."
    return (
        "```yaml\n"
        f'"human_feedback_quality": {quality}\n'
        f'"critique": {critique}\n'
        "```"
    )


def token_overlap_equivalent(a: str, b: str, threshold: float = 0.5) -> bool:
    """Deterministic rationale comparator: Jaccard overlap of word sets."""
    ta = set(re.findall(r"[a-z0-9]+", a.lower()))
    tb = set(re.findall(r"[a-z0-9]+", b.lower()))
    if not ta and not tb:
        return True
    if not ta or not tb:
        return False
    return len(ta & tb) / len(ta | tb) >= threshold


def _equivalence_reply(prompt: str) -> str:
    a = b = ""
    for line in prompt.splitlines():
        if line.startswith("Rationale A: "):
            a = line[len("Rationale A: ") :]
        elif line.startswith("Rationale B: "):
            b = line[len("Rationale B: ") :]
    return "yes" if token_overlap_equivalent(a, b) else "no"


def heuristic_reply(prompt: str) -> str | None:
    """Answer a recognized prompt deterministically; None when unrecognized."""
    if _COLLECT_BEGIN in prompt and _COLLECT_END in prompt:
        rendered = _between(prompt, _COLLECT_BEGIN, _COLLECT_END)
        return heuristic_review(diff_from_numbered(rendered))
    if prompt.startswith(_JUDGE_PREFIX):
        return _judge_reply(prompt)
    if prompt.startswith(_REWRITE_PREFIX):
        return _rewrite_reply(prompt)
    if prompt.startswith(_FEEDBACK_PREFIX):
        return _feedback_reply(prompt)
    if prompt.startswith(_EQUIVALENCE_PREFIX):
        return _equivalence_reply(prompt)
    return None
