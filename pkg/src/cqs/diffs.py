"""Unified diff parsing and the line-numbered rendering fed to every prompt.

Rendered lines look like ``12+ x = 1``: the line number, one of '+', '-',
' ', a separating space, then the content. Added and context lines carry
new-file numbers; removed lines carry old-file numbers (reviews target new
code, so lookups resolve against new-file numbering only).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DiffParseError, UnknownFileError
from .issues import DiffMeta


class Marker(Enum):
    ADDED = "+"
    REMOVED = "-"
    CONTEXT = " "


@dataclass(frozen=True)
class DiffLine:
    marker: Marker
    content: str
    old_no: int | None = None
    new_no: int | None = None

    def __post_init__(self):
        if self.marker is Marker.ADDED and not (self.new_no and self.old_no is None):
            raise DiffParseError("added line must carry only a new-file number")
        if self.marker is Marker.REMOVED and not (self.old_no and self.new_no is None):
            raise DiffParseError("removed line must carry only an old-file number")
        if self.marker is Marker.CONTEXT and not (self.old_no and self.new_no):
            raise DiffParseError("context line must carry both numbers")


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[DiffLine, ...]


@dataclass(frozen=True)
class FileDiff:
    path: str
    hunks: tuple[Hunk, ...]


@dataclass(frozen=True)
class Diff:
    diff_id: str
    files: tuple[FileDiff, ...]
    meta: DiffMeta = field(default_factory=DiffMeta)

    def __post_init__(self):
        if not self.files:
            raise DiffParseError("no files")
        paths = [f.path for f in self.files]
        if len(set(paths)) != len(paths):
            raise DiffParseError("duplicate file paths in diff")

    def file(self, path: str) -> FileDiff:
        for f in self.files:
            if f.path == path:
                return f
        raise UnknownFileError(f"file not in diff: {path}")


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
# Header noise tolerated between files (git extended headers etc.).
_SKIP_PREFIXES = (
    "diff --git",
    "index ",
    "new file mode",
    "deleted file mode",
    "old mode",
    "new mode",
    "similarity index",
    "rename from",
    "rename to",
    "copy from",
    "copy to",
    "Binary files",
)


def _clean_path(header: str) -> str:
    path = header.split("\t")[0].strip()
    if path.startswith(("a/", "b/")):
        path = path[2:]
    return path


def parse_unified(text: str, meta: DiffMeta | None = None, diff_id: str = "") -> Diff:
    """Parse unified diff text; git-style extended headers are skipped.

    Raises DiffParseError on malformed hunk headers and whenever a hunk's
    declared lengths disagree with its actual line count (the message names
    the file and the hunk header).
    """
    meta = meta or DiffMeta()
    files: list[FileDiff] = []
    lines = text.splitlines()
    i = 0
    current_path: str | None = None
    current_hunks: list[Hunk] = []

    def flush_file():
        nonlocal current_path, current_hunks
        if current_path is not None and current_hunks:
            files.append(FileDiff(current_path, tuple(current_hunks)))
        current_path = None
        current_hunks = []

    while i < len(lines):
        line = lines[i]
        if line.startswith("--- "):
            flush_file()
            old_path = _clean_path(line[4:])
            i += 1
            if i >= len(lines) or not lines[i].startswith("+++ "):
                raise DiffParseError(f"missing +++ header after --- {old_path}")
            new_path = _clean_path(lines[i][4:])
            current_path = new_path if new_path != "/dev/null" else old_path
            i += 1
            continue
        m = _HUNK_RE.match(line)
        if m:
            if current_path is None:
                raise DiffParseError(f"hunk header before any file header: {line}")
            hunk, i = _parse_hunk(lines, i, current_path)
            current_hunks.append(hunk)
            continue
        if line.startswith("@@"):
            raise DiffParseError(
                f"malformed hunk header in {current_path or '<no file>'}: {line}"
            )
        i += 1
    flush_file()
    if not files:
        raise DiffParseError("no files")
    return Diff(diff_id=diff_id, files=tuple(files), meta=meta)


def _parse_hunk(lines: list[str], i: int, path: str) -> tuple[Hunk, int]:
    header = lines[i]
    m = _HUNK_RE.match(header)
    old_start = int(m.group(1))
    old_len = int(m.group(2)) if m.group(2) is not None else 1
    new_start = int(m.group(3))
    new_len = int(m.group(4)) if m.group(4) is not None else 1
    i += 1
    body: list[DiffLine] = []
    old_no, new_no = old_start, new_start
    old_seen = new_seen = 0
    while i < len(lines) and (old_seen < old_len or new_seen < new_len):
        raw = lines[i]
        if raw.startswith("\\"):  # "\ No newline at end of file"
            i += 1
            continue
        if raw.startswith("+"):
            body.append(DiffLine(Marker.ADDED, raw[1:], new_no=new_no))
            new_no += 1
            new_seen += 1
        elif raw.startswith("-"):
            body.append(DiffLine(Marker.REMOVED, raw[1:], old_no=old_no))
            old_no += 1
            old_seen += 1
        elif raw.startswith(" ") or raw == "":
            body.append(DiffLine(Marker.CONTEXT, raw[1:], old_no=old_no, new_no=new_no))
            old_no += 1
            new_no += 1
            old_seen += 1
            new_seen += 1
        else:
            break
        i += 1
    if old_seen != old_len or new_seen != new_len:
        raise DiffParseError(
            f"hunk length mismatch in {path} at {header!r}: "
            f"declared -{old_len}/+{new_len}, found -{old_seen}/+{new_seen}"
        )
    return Hunk(old_start, old_len, new_start, new_len, tuple(body)), i


def render_numbered(diff: Diff) -> str:
    """Deterministic numbered rendering; each file section starts with its path."""
    sections: list[str] = []
    for f in diff.files:
        out = [f.path]
        for hunk in f.hunks:
            for ln in hunk.lines:
                n = ln.new_no if ln.marker is not Marker.REMOVED else ln.old_no
                out.append(f"{n}{ln.marker.value} {ln.content}")
        sections.append("\n".join(out))
    return "\n\n".join(sections)


def line_lookup(diff: Diff, file: str, line: int) -> DiffLine | None:
    """Resolve a new-file line number to its added or context line.

    Removed lines never match: issues target new code. Unknown paths raise
    UnknownFileError so callers can tell "bad file" from "line absent".
    """
    if line < 1:
        raise ValueError("line must be >= 1")
    fd = diff.file(file)
    for hunk in fd.hunks:
        for ln in hunk.lines:
            if ln.marker is not Marker.REMOVED and ln.new_no == line:
                return ln
    return None


# ---------------------------------------------------------------------------
# Function span detection (regex heuristics over diff text; no AST)
# ---------------------------------------------------------------------------

_HEADER_PATTERNS: dict[str, re.Pattern] = {
    "python": re.compile(r"^\s*(?:async\s+)?def\s+([A-Za-z_]\w*)\s*\("),
    "go": re.compile(r"^\s*func\s+(?:\([^)]*\)\s*)?([A-Za-z_]\w*)\s*\("),
    "javascript": re.compile(r"^\s*(?:export\s+)?(?:async\s+)?function\s*\*?\s*([A-Za-z_$][\w$]*)\s*\("),
    "php": re.compile(r"^\s*(?:(?:public|private|protected|static|final|abstract)\s+)*function\s+([A-Za-z_]\w*)\s*\("),
    "hack": re.compile(r"^\s*(?:(?:public|private|protected|static|final|abstract|async)\s+)*function\s+([A-Za-z_]\w*)\s*\("),
    "java": re.compile(
        r"^\s*(?:(?:public|private|protected|static|final|abstract|synchronized|native)\s+)+"
        r"[\w<>\[\],.\s]*?\b([A-Za-z_]\w*)\s*\([^;]*$"
    ),
    "cpp": re.compile(r"^\s*(?:[\w:<>~*&\[\]]+\s+)+[*&]?([A-Za-z_]\w*)\s*\([^;]*$"),
}


def _indent(s: str) -> int:
    return len(s) - len(s.lstrip(" \t"))


def changed_function_spans(diff: Diff, language: str) -> list[dict]:
    """Best-effort spans of functions visible on the new side of the diff.

    A span starts at a line matching the language's header pattern and ends
    just before the next header at the same or lower indentation, or at the
    end of the hunk. Spans are new-file line ranges. Unconfigured languages
    yield an empty list.
    """
    pattern = _HEADER_PATTERNS.get(language)
    if pattern is None:
        return []
    spans: list[dict] = []
    for f in diff.files:
        for hunk in f.hunks:
            new_side = [ln for ln in hunk.lines if ln.marker is not Marker.REMOVED]
            headers = []
            for idx, ln in enumerate(new_side):
                m = pattern.match(ln.content)
                if m:
                    headers.append((idx, ln, m.group(1), _indent(ln.content)))
            for h, (idx, ln, name, indent) in enumerate(headers):
                end_idx = len(new_side) - 1
                for later_idx, _, _, later_indent in headers[h + 1 :]:
                    if later_indent <= indent:
                        end_idx = later_idx - 1
                        break
                start = ln.new_no
                end = new_side[end_idx].new_no
                spans.append(
                    {
                        "name": name,
                        "start": start,
                        "end": end,
                        "length": end - start + 1,
                        "file": f.path,
                    }
                )
    return spans


def span_at(diff: Diff, file: str, line: int, languages: tuple[str, ...]) -> dict | None:
    """Find the innermost detected span covering (file, line), if any."""
    best = None
    for lang in languages or tuple(_HEADER_PATTERNS):
        for span in changed_function_spans(diff, lang):
            if span["file"] == file and span["start"] <= line <= span["end"]:
                if best is None or span["start"] >= best["start"]:
                    best = span
    return best


def span_named(diff: Diff, file: str, name: str, languages: tuple[str, ...]) -> dict | None:
    for lang in languages or tuple(_HEADER_PATTERNS):
        for span in changed_function_spans(diff, lang):
            if span["file"] == file and span["name"] == name:
                return span
    return None


def span_lines(diff: Diff, span: dict) -> list[DiffLine]:
    """New-side lines falling inside a span."""
    fd = diff.file(span["file"])
    out = []
    for hunk in fd.hunks:
        for ln in hunk.lines:
            if ln.marker is not Marker.REMOVED and span["start"] <= ln.new_no <= span["end"]:
                out.append(ln)
    return out
