import random
import threading
import time

import pytest

from cqs.diffs import parse_unified
from cqs.errors import BadStatusError, RetriesExhaustedError, TransportError
from cqs.gateway import (
    BackendConfig,
    ChatRequest,
    HeuristicBackend,
    RemoteBackend,
    ScriptedBackend,
    complete,
    request_key,
    sample_seed,
)
from cqs.heuristics import heuristic_review
from cqs.issues import DiffMeta, parse_issue_block, split_issue_blocks

from conftest import DEDUPE_DIFF, RATIO_DIFF, make_long_function_diff


def req(user="hello", temperature=0.5, seed=None):
    return ChatRequest(system="sys", user=user, temperature=temperature, sample_seed=seed)


class TestChatRequest:
    def test_temperature_range(self):
        with pytest.raises(ValueError):
            ChatRequest(system="s", user="u", temperature=2.5)

    def test_empty_prompts_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(system="", user="u")


class TestScriptedBackend:
    def test_keyed_lookup(self):
        backend = ScriptedBackend()
        backend.add(req(), "canned")
        assert backend.complete(req()).text == "canned"

    def test_deterministic(self):
        backend = ScriptedBackend()
        backend.add(req(seed=7), "a")
        assert backend.complete(req(seed=7)).text == backend.complete(req(seed=7)).text

    def test_seed_changes_key(self):
        assert request_key(req(seed=1)) != request_key(req(seed=2))

    def test_missing_key_errors(self):
        with pytest.raises(TransportError):
            ScriptedBackend().complete(req())


class TestSampleSeed:
    def test_stable(self):
        assert sample_seed("d1", 0) == sample_seed("d1", 0)

    def test_distinct_per_index(self):
        seeds = {sample_seed("d1", i) for i in range(10)}
        assert len(seeds) == 10


class FakeResponse:
    def __init__(self, status_code, body=None):
        self.status_code = status_code
        self._body = body or {}

    def json(self):
        return self._body


class FakeSession:
    """Scripted transport; also counts concurrent in-flight calls."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = 0
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()
        self.hold = 0.0

    def post(self, url, json=None, headers=None, timeout=None):
        with self._lock:
            self.calls += 1
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
            outcome = self.outcomes.pop(0) if self.outcomes else self.outcomes_default()
        try:
            if self.hold:
                time.sleep(self.hold)
            if isinstance(outcome, Exception):
                raise outcome
            return outcome
        finally:
            with self._lock:
                self.in_flight -= 1

    def outcomes_default(self):
        return FakeResponse(200, {"choices": [{"message": {"content": "ok"}}]})


def remote(session, max_retries=3, max_in_flight=4):
    cfg = BackendConfig(
        backend_id="remote-test",
        kind="remote",
        endpoint="http://example.invalid/chat",
        max_retries=max_retries,
        max_in_flight=max_in_flight,
    )
    return RemoteBackend(cfg, session=session, sleep_fn=lambda _: None, rng=random.Random(0))


class TestRemoteBackend:
    def test_success_after_two_500s(self):
        session = FakeSession(
            [
                FakeResponse(500),
                FakeResponse(500),
                FakeResponse(200, {"choices": [{"message": {"content": "fine"}}]}),
            ]
        )
        result = remote(session, max_retries=3).complete(req())
        assert result.text == "fine"
        assert session.calls == 3

    def test_retries_exhausted(self):
        session = FakeSession([FakeResponse(500)] * 4)
        with pytest.raises(RetriesExhaustedError) as err:
            remote(session, max_retries=3).complete(req())
        assert err.value.backend_id == "remote-test"
        assert session.calls == 4

    def test_client_error_no_retry(self):
        session = FakeSession([FakeResponse(403)])
        with pytest.raises(BadStatusError) as err:
            remote(session).complete(req())
        assert err.value.status == 403
        assert session.calls == 1

    def test_bounded_concurrency(self):
        session = FakeSession([])
        session.hold = 0.02
        backend = remote(session, max_in_flight=2)
        threads = [threading.Thread(target=lambda: backend.complete(req())) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert session.calls == 8
        assert session.max_in_flight <= 2

    def test_bearer_token_from_env(self, monkeypatch):
        captured = {}

        class CapturingSession(FakeSession):
            def post(self, url, json=None, headers=None, timeout=None):
                captured.update(headers)
                return super().post(url, json=json, headers=headers, timeout=timeout)

        monkeypatch.setenv("CQS_LLM_TOKEN", "sekrit")
        remote(CapturingSession([])).complete(req())
        assert captured["Authorization"] == "Bearer sekrit"


class TestHeuristicReviewer:
    def test_undocumented_long_function(self):
        diff = parse_unified(make_long_function_diff(), DiffMeta(), diff_id="long")
        tags = [parse_issue_block(b).tag.name for b in split_issue_blocks(heuristic_review(diff))]
        assert tags == ["Documentation", "BreakdownLongFunction"]

    def test_division_rule(self):
        diff = parse_unified(RATIO_DIFF, DiffMeta(), diff_id="fix-1")
        issues = [parse_issue_block(b) for b in split_issue_blocks(heuristic_review(diff))]
        div = [i for i in issues if i.tag.name == "DivisionByZero"]
        assert len(div) == 1 and div[0].line == 5

    def test_guarded_division_not_flagged(self):
        text = (
            "--- a/g.py\n"
            "+++ b/g.py\n"
            "@@ -1,1 +1,4 @@\n"
            " import math\n"
            "+def f(a, b):\n"
            "+    # ratio of a to b\n"
            "+    return a / b if b else 0\n"
        )
        diff = parse_unified(text, DiffMeta(), diff_id="g")
        issues = [parse_issue_block(b) for b in split_issue_blocks(heuristic_review(diff))]
        assert not [i for i in issues if i.tag.name == "DivisionByZero"]

    def test_duplicate_blocks(self):
        diff = parse_unified(DEDUPE_DIFF, DiffMeta(), diff_id="dup")
        issues = [parse_issue_block(b) for b in split_issue_blocks(heuristic_review(diff))]
        dupes = [i for i in issues if i.tag.name == "DedupeLogic"]
        assert len(dupes) == 1
        assert dupes[0].function == "load_b"

    def test_comment_only_diff_empty(self):
        text = (
            "--- a/c.py\n"
            "+++ b/c.py\n"
            "@@ -1,1 +1,2 @@\n"
            " x = 1\n"
            "+# just a comment\n"
        )
        diff = parse_unified(text, DiffMeta(), diff_id="c")
        assert heuristic_review(diff) == ""

    def test_backend_is_deterministic(self, ratio_diff):
        from cqs.collector import build_collector_prompt

        backend = HeuristicBackend()
        request = build_collector_prompt(ratio_diff, ratio_diff.meta)
        assert backend.complete(request).text == backend.complete(request).text

    def test_unrecognized_prompt_errors(self):
        with pytest.raises(TransportError):
            HeuristicBackend().complete(req(user="what is the weather"))


class TestCompleteDispatch:
    def test_heuristic_config(self, ratio_diff):
        from cqs.collector import build_collector_prompt

        cfg = BackendConfig(backend_id="h", kind="heuristic")
        request = build_collector_prompt(ratio_diff, ratio_diff.meta)
        result = complete(request, cfg)
        assert result.backend_id == "h"
        assert "Documentation" in result.text
