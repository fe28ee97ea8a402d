import pathlib

import pytest

from cqs.diffs import parse_unified
from cqs.gateway import HeuristicBackend
from cqs.issues import DiffMeta

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
GOLDEN = pathlib.Path(__file__).parent / "golden"

RATIO_DIFF = """\
--- a/metrics/ratio.py
+++ b/metrics/ratio.py
@@ -1,4 +1,8 @@
 import math

+def safe_ratio(num, den):
+    scaled = num * 100
+    return scaled / den
+
 def existing():
     return 1
"""

DOCUMENTED_DIFF = """\
--- a/metrics/documented.py
+++ b/metrics/documented.py
@@ -1,2 +1,7 @@
 import math

+def documented(x):
+    \"\"\"Scale a value.\"\"\"
+    total = x * 2
+    return total + 1
+
"""

DEDUPE_DIFF = """\
--- a/pipeline/steps.py
+++ b/pipeline/steps.py
@@ -1,2 +1,14 @@
 import io

+def load_a(path):
+    handle = open(path)
+    data = handle.read()
+    rows = data.splitlines()
+    return rows
+
+def load_b(path):
+    handle = open(path)
+    data = handle.read()
+    rows = data.splitlines()
+    return rows
+
"""

# Line 17 exists only as an old-file number on a removed line.
REMOVED17_DIFF = """\
--- a/legacy/cleanup.py
+++ b/legacy/cleanup.py
@@ -16,3 +10,2 @@
 def keep():
-    stale = 1
     return 2
"""


@pytest.fixture
def ratio_diff():
    meta = DiffMeta(title="Add safe_ratio", summary="ratio helper", languages=("python",))
    return parse_unified(RATIO_DIFF, meta, diff_id="fix-1")


@pytest.fixture
def documented_diff():
    meta = DiffMeta(title="Add documented", summary="", languages=("python",))
    return parse_unified(DOCUMENTED_DIFF, meta, diff_id="doc-1")


@pytest.fixture
def dedupe_diff():
    meta = DiffMeta(title="Add loaders", summary="", languages=("python",))
    return parse_unified(DEDUPE_DIFF, meta, diff_id="dup-1")


@pytest.fixture
def removed17_diff():
    meta = DiffMeta(title="Drop stale", summary="", languages=("python",))
    return parse_unified(REMOVED17_DIFF, meta, diff_id="rm-1")


@pytest.fixture
def heuristic_backend():
    return HeuristicBackend()


def make_long_function_diff(body_lines: int = 59) -> str:
    """A new Python function whose span is body_lines + 1 lines long."""
    added = ["+def process_everything(data):"]
    for i in range(body_lines):
        added.append(f"+    step_{i} = data + {i}")
    count = len(added)
    return (
        "--- a/big/module.py\n"
        "+++ b/big/module.py\n"
        f"@@ -1,1 +1,{count + 1} @@\n"
        " import os\n" + "\n".join(added) + "\n"
    )


@pytest.fixture
def long_function_diff():
    meta = DiffMeta(title="Add processor", summary="", languages=("python",))
    return parse_unified(make_long_function_diff(), meta, diff_id="long-1")
