"""Transcript record/replay determinism and key stability."""

import json

import pytest

from respec.clock import FixedStepClock
from respec.gateway import (
    GatewayClient,
    GatewayPolicy,
    MissingTranscript,
    Prompt,
    ProviderError,
    TranscriptStore,
    complete,
)


class CountingProvider:
    def __init__(self, response="stub response"):
        self.calls = 0
        self.response = response

    def generate(self, prompt):
        self.calls += 1
        return self.response


def make_prompt(**overrides):
    defaults = dict(
        sections=(("task", "draft a spec"), ("method-source", "int f() { return 1; }")),
        model_id="llama-3.1-405b",
        temperature=0.0,
        max_tokens=512,
    )
    defaults.update(overrides)
    return Prompt(**defaults)


class TestKeys:
    def test_identical_prompts_share_a_key(self):
        assert make_prompt().key() == make_prompt().key()

    def test_section_order_changes_the_key(self):
        a = make_prompt()
        b = make_prompt(sections=tuple(reversed(a.sections)))
        assert a.key() != b.key()

    def test_newline_normalization(self):
        a = make_prompt(sections=(("task", "line1\nline2"),))
        b = make_prompt(sections=(("task", "line1\r\nline2"),))
        assert a.key() == b.key()

    def test_key_pinned_across_processes(self):
        # frozen value: a changed digest would invalidate every stored transcript
        assert make_prompt().key() == (
            "16ece1cac72b40ee63f8d9de7e3a9e7791383982e1803b9f482e9de24b8c77dc"
        )

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            make_prompt(sections=(("task", "a"), ("task", "b")))


class TestReplay:
    def test_replay_returns_bytes_identical_response(self, tmp_path):
        store = TranscriptStore(tmp_path)
        prompt = make_prompt()
        store.put(prompt, "response with unicode é and\nnewlines")
        responses = {
            complete(prompt, store, GatewayPolicy.REPLAY_ONLY) for _ in range(100)
        }
        assert responses == {"response with unicode é and\nnewlines"}

    def test_replay_only_missing_raises(self, tmp_path):
        store = TranscriptStore(tmp_path)
        with pytest.raises(MissingTranscript):
            complete(make_prompt(), store, GatewayPolicy.REPLAY_ONLY)

    def test_record_if_missing_persists_then_replays(self, tmp_path):
        store = TranscriptStore(tmp_path)
        provider = CountingProvider("fresh")
        prompt = make_prompt()
        first = complete(prompt, store, GatewayPolicy.RECORD_IF_MISSING, provider)
        second = complete(prompt, store, GatewayPolicy.RECORD_IF_MISSING, provider)
        assert first == second == "fresh"
        assert provider.calls == 1

    def test_replay_corpus_makes_zero_provider_calls(self, tmp_path):
        store = TranscriptStore(tmp_path)
        prompts = [make_prompt(sections=(("task", f"task {i}"),)) for i in range(12)]
        for i, prompt in enumerate(prompts):
            store.put(prompt, f"answer {i}")
        provider = CountingProvider()
        for i, prompt in enumerate(prompts):
            assert complete(prompt, store, GatewayPolicy.REPLAY_ONLY, provider) == f"answer {i}"
        assert provider.calls == 0

    def test_live_only_never_touches_store(self, tmp_path):
        store = TranscriptStore(tmp_path)
        provider = CountingProvider("live")
        assert complete(make_prompt(), store, GatewayPolicy.LIVE_ONLY, provider) == "live"
        assert store.keys() == []

    def test_no_provider_for_live_call(self, tmp_path):
        store = TranscriptStore(tmp_path)
        with pytest.raises(ProviderError):
            complete(make_prompt(), store, GatewayPolicy.RECORD_IF_MISSING, provider=None)


class TestStore:
    def test_envelope_format(self, tmp_path):
        store = TranscriptStore(tmp_path)
        prompt = make_prompt()
        transcript = store.put(prompt, "hello", clock=FixedStepClock())
        path = tmp_path / f"{transcript.key}.json"
        data = json.loads(path.read_text())
        assert set(data) == {
            "key", "model_id", "temperature", "sections", "response", "recorded_at",
        }
        assert data["sections"][0] == {"label": "task", "text": "draft a spec"}
        assert data["recorded_at"] == "2000-01-01T00:00:00Z"

    def test_verify_clean_store(self, tmp_path):
        store = TranscriptStore(tmp_path)
        store.put(make_prompt(), "a")
        store.put(make_prompt(sections=(("x", "y"),)), "b")
        assert store.verify() == []

    def test_verify_flags_tampering(self, tmp_path):
        store = TranscriptStore(tmp_path)
        transcript = store.put(make_prompt(), "a")
        path = tmp_path / f"{transcript.key}.json"
        data = json.loads(path.read_text())
        data["sections"][0]["text"] = "edited"
        path.write_text(json.dumps(data))
        problems = store.verify()
        assert len(problems) >= 1
        assert "key" in problems[0]


class TestHttpProvider:
    class _Response:
        def __init__(self, status_code, payload):
            self.status_code = status_code
            self._payload = payload
            self.text = json.dumps(payload)

        def json(self):
            return self._payload

    def test_parses_chat_completion_payload(self, monkeypatch):
        from respec import gateway

        captured = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            captured.update(url=url, payload=json)
            return self._Response(
                200, {"choices": [{"message": {"content": "patched body"}}]}
            )

        monkeypatch.setattr(gateway.httpx, "post", fake_post)
        provider = gateway.HttpChatProvider("http://model.internal/v1/chat")
        assert provider.generate(make_prompt()) == "patched body"
        assert captured["url"] == "http://model.internal/v1/chat"
        assert captured["payload"]["temperature"] == 0.0
        assert "## task" in captured["payload"]["messages"][0]["content"]

    def test_non_200_raises_provider_error(self, monkeypatch):
        from respec import gateway

        monkeypatch.setattr(
            gateway.httpx, "post", lambda *a, **k: self._Response(503, {"detail": "down"})
        )
        provider = gateway.HttpChatProvider("http://model.internal/v1/chat")
        with pytest.raises(ProviderError) as err:
            provider.generate(make_prompt())
        assert err.value.status == 503

    def test_malformed_payload_raises(self, monkeypatch):
        from respec import gateway

        monkeypatch.setattr(
            gateway.httpx, "post", lambda *a, **k: self._Response(200, {"nope": 1})
        )
        provider = gateway.HttpChatProvider("http://model.internal/v1/chat")
        with pytest.raises(ProviderError):
            provider.generate(make_prompt())


def test_gateway_client_counts_through_sections(tmp_path):
    provider = CountingProvider("ok")
    client = GatewayClient(
        store=TranscriptStore(tmp_path),
        policy=GatewayPolicy.RECORD_IF_MISSING,
        model_id="m",
        provider=provider,
    )
    assert client.complete_sections([("task", "t")]) == "ok"
    assert client.complete_sections([("task", "t")]) == "ok"
    assert provider.calls == 1
