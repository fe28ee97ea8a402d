"""cqs: collect code-quality issues for a diff, judge and filter them, serve
the surviving review, and turn generations plus developer feedback into
training datasets."""

__version__ = "0.1.0"
