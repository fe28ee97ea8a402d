"""Canonical domain types: issue tags, issues, reviews, and the issue block
wire format shared by every pipeline stage.

The wire format is a brace-delimited key/value block with keys exactly
``function``, ``rationale``, ``file``, ``line``, ``tag`` (aliases
``problematic_function`` and ``relevant_file`` accepted on input only).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import IssueParseError, TagError

# The twelve tags offered in the collector prompt menu, byte-exact.
CANONICAL_TAGS: tuple[str, ...] = (
    "DedupeLogic",
    "DictionaryKeyExistenceCheck",
    "UseConstant",
    "RenamingVariable",
    "DomainSpecificName",
    "BreakdownLongFunction",
    "ExtractMethod",
    "ResourceLeak",
    "Documentation",
    "DivisionByZero",
    "Typo",
    "RenamingFunction",
)

TAG_DESCRIPTIONS: dict[str, str] = {
    "DedupeLogic": "Deduplicate logic into shared functions except for logging.",
    "DictionaryKeyExistenceCheck": "Check for dictionary key existence before accessing it.",
    "UseConstant": "Use constants instead of literals, unless it's a constant definition.",
    "RenamingVariable": "Variable names should be pronounceable, easily readable, and reveal intent.",
    "DomainSpecificName": (
        "Use solution domain names, computer science (CS) terms, algorithm names, "
        "pattern names, math terms. When there is no name from the solution domain "
        "then prefer problem domain names."
    ),
    "BreakdownLongFunction": (
        "Break down long functions into smaller, more focused functions. Only include "
        "this issue if the length of the current function is longer than 50 lines."
    ),
    "ExtractMethod": (
        "When we have a block of code that can be extracted into a separate method, "
        "we should do so."
    ),
    "ResourceLeak": (
        "A resource handle (e.g., file, socket, connection) is not properly wrapped in "
        "a context manager or try-with-resources construct or use a with statement in Python."
    ),
    "Documentation": (
        "Docstring should match the code, and be added for each major unit. Pay extra "
        "attention to different types of docstrings."
    ),
    "DivisionByZero": (
        "When performing division operations, ensure that the divisor is checked to be "
        "non-zero before proceeding with the calculation."
    ),
    "Typo": "A typo is detected in the code.",
    "RenamingFunction": "Function names should be pronounceable, easily readable, and reveal intent.",
}


@dataclass(frozen=True)
class IssueTag:
    """Either one of the twelve canonical tags or a model-invented custom tag.

    Matching is case-sensitive: downstream evaluation compares tags with exact
    string equality, so no normalization happens here.
    """

    name: str
    canonical: bool

    def __post_init__(self):
        if not self.name or self.name != self.name.strip() or "\n" in self.name:
            raise TagError(f"invalid tag name: {self.name!r}")


def canonical_tag(s: str) -> IssueTag:
    """Map a tag string onto the canonical menu, else carry it as custom."""
    trimmed = s.strip() if isinstance(s, str) else ""
    if not trimmed:
        raise TagError("tag must be a non-empty string")
    return IssueTag(trimmed, canonical=trimmed in CANONICAL_TAGS)


@dataclass(frozen=True)
class Issue:
    tag: IssueTag
    rationale: str
    file: str
    line: int
    function: str | None = None

    def __post_init__(self):
        if not self.rationale:
            raise IssueParseError("rationale must be non-empty")
        if not self.file:
            raise IssueParseError("file must be non-empty")
        if not isinstance(self.line, int) or isinstance(self.line, bool) or self.line < 1:
            raise IssueParseError(f"line must be an integer >= 1, got {self.line!r}")

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.name,
            "function": self.function,
            "rationale": self.rationale,
            "file": self.file,
            "line": self.line,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Issue":
        return cls(
            tag=canonical_tag(d["tag"]),
            function=d.get("function"),
            rationale=d["rationale"],
            file=d["file"],
            line=d["line"],
        )


@dataclass(frozen=True)
class Provenance:
    backend_id: str
    temperature: float
    sample_index: int = 0

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "temperature": self.temperature,
            "sample_index": self.sample_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(d["backend_id"], d["temperature"], d.get("sample_index", 0))


@dataclass(frozen=True)
class Review:
    """One generated code review: an ordered issue list plus where it came from.

    ``warnings`` counts response fragments that looked like issue blocks but
    failed to parse and were dropped.
    """

    diff_id: str
    issues: tuple[Issue, ...]
    provenance: Provenance
    warnings: int = 0

    def to_dict(self) -> dict:
        return {
            "diff_id": self.diff_id,
            "issues": [i.to_dict() for i in self.issues],
            "provenance": self.provenance.to_dict(),
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Review":
        return cls(
            diff_id=d["diff_id"],
            issues=tuple(Issue.from_dict(i) for i in d["issues"]),
            provenance=Provenance.from_dict(d["provenance"]),
            warnings=d.get("warnings", 0),
        )


@dataclass(frozen=True)
class DiffMeta:
    title: str = ""
    summary: str = ""
    author_is_bot: bool = False
    is_test_only: bool = False
    human_comment_count: int = 0
    languages: tuple[str, ...] = ()

    def __post_init__(self):
        if self.human_comment_count < 0:
            raise ValueError("human_comment_count must be >= 0")

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "summary": self.summary,
            "author_is_bot": self.author_is_bot,
            "is_test_only": self.is_test_only,
            "human_comment_count": self.human_comment_count,
            "languages": list(self.languages),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiffMeta":
        return cls(
            title=d.get("title", ""),
            summary=d.get("summary", ""),
            author_is_bot=d.get("author_is_bot", False),
            is_test_only=d.get("is_test_only", False),
            human_comment_count=d.get("human_comment_count", 0),
            languages=tuple(d.get("languages", ())),
        )


# ---------------------------------------------------------------------------
# Issue block wire format
# ---------------------------------------------------------------------------

# Input key aliases: the collector prompt's prose names two fields differently
# from its example output; both spellings are accepted when parsing.
_KEY_ALIASES = {"problematic_function": "function", "relevant_file": "file"}
_REQUIRED_KEYS = ("rationale", "file", "line", "tag")

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\s*$")
_KV_RE = re.compile(r'^\s*"?([A-Za-z_ ]+?)"?\s*:\s*(.*?),?\s*$')


def serialize_issue(issue: Issue) -> str:
    """Emit the canonical issue block; an absent function becomes "NULL"."""
    fn = issue.function if issue.function is not None else "NULL"
    return (
        "{\n"
        f'  "function": {json.dumps(fn)},\n'
        f'  "rationale": {json.dumps(issue.rationale)},\n'
        f'  "file": {json.dumps(issue.file)},\n'
        f'  "line": {issue.line},\n'
        f'  "tag": {json.dumps(issue.tag.name)}\n'
        "}"
    )


def issue_to_prompt_block(issue: Issue, rationale: str | None = None) -> str:
    """Render an issue with capitalized keys, the form embedded in the
    judging and rewriting prompts."""
    fn = issue.function if issue.function is not None else "NULL"
    return (
        "{\n"
        f'  "Function": {json.dumps(fn)},\n'
        f'  "Rationale": {json.dumps(rationale if rationale is not None else issue.rationale)},\n'
        f'  "File": {json.dumps(issue.file)},\n'
        f'  "Line": {issue.line},\n'
        f'  "Tag": {json.dumps(issue.tag.name)}\n'
        "}"
    )


def _strip_wrapping(text: str) -> str:
    lines = [ln for ln in text.strip().splitlines() if not _FENCE_RE.match(ln)]
    return "\n".join(lines).strip()


def _from_mapping(data: dict) -> Issue:
    fields: dict = {}
    for raw_key, value in data.items():
        key = str(raw_key).strip().lower().replace(" ", "_")
        key = _KEY_ALIASES.get(key, key)
        if key in ("function", "rationale", "file", "line", "tag"):
            fields[key] = value
    for key in _REQUIRED_KEYS:
        if key not in fields or fields[key] in ("", None):
            raise IssueParseError(f"issue block is missing required key: {key}")
    line = fields["line"]
    if isinstance(line, bool) or not isinstance(line, int):
        if isinstance(line, str) and re.fullmatch(r"\d+", line.strip()):
            line = int(line.strip())
        else:
            raise IssueParseError(f"issue line is not numeric: {fields['line']!r}")
    function = fields.get("function")
    if isinstance(function, str) and function.strip().upper() in ("NULL", "NONE", ""):
        function = None
    return Issue(
        tag=canonical_tag(str(fields["tag"])),
        function=function,
        rationale=str(fields["rationale"]),
        file=str(fields["file"]),
        line=line,
    )


def parse_issue_block(text: str) -> Issue:
    """Parse one issue block, JSON-like or loose key/value lines."""
    body = _strip_wrapping(text)
    if not body:
        raise IssueParseError("empty issue block")
    try:
        data = json.loads(body)
        if isinstance(data, dict):
            return _from_mapping(data)
    except (json.JSONDecodeError, ValueError):
        pass
    # Loose mode: one "key": value pair per line, quoting optional.
    inner = body
    if inner.startswith("{") and inner.endswith("}"):
        inner = inner[1:-1]
    data = {}
    for ln in inner.splitlines():
        if not ln.strip():
            continue
        m = _KV_RE.match(ln)
        if not m:
            continue
        value = m.group(2).strip()
        if len(value) >= 2 and value[0] == value[-1] == '"':
            value = value[1:-1]
        data[m.group(1)] = value
    if not data:
        raise IssueParseError("no key/value pairs found in issue block")
    return _from_mapping(data)


def split_issue_blocks(text: str) -> list[str]:
    """Split a generation into candidate issue blocks.

    Brace-delimited regions win; a brace-less reply with key/value lines is
    treated as a single candidate block.
    """
    blocks: list[str] = []
    depth = 0
    start = -1
    for i, ch in enumerate(text):
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                blocks.append(text[start : i + 1])
    if blocks:
        return blocks
    stripped = _strip_wrapping(text)
    if stripped and ":" in stripped:
        return [stripped]
    return []
