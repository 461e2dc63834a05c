import json

import httpx
import numpy as np
import pytest

from agents.backend import (EXCHANGES_FILE, BackendConfig, ChatExchange, ExchangeLog, ReplayBackend, RemoteBackend,
                            build_backend, load_exchanges, prompt_hash)
from agents.mock_backend import MockBackend
from agents.prompts import TASK_QUERIES, system_prompt
from errors import BackendError, BackendTimeout, ConfigError, HttpStatus, ParseError, RetriesExhausted


def remote(handler, **overrides):
    config = BackendConfig(kind="remote", base_url="http://llm.test/v1", model="m", embed_model="e",
                           backoff_ms=10, **overrides)
    sleeps = []
    backend = RemoteBackend(config, transport=httpx.MockTransport(handler), sleep=sleeps.append)
    return backend, sleeps


def chat_reply(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def test_remote_chat_posts_both_messages():
    seen = []

    def handler(request):
        seen.append(json.loads(request.content))
        assert request.url.path == "/v1/chat/completions"
        return chat_reply("hello")

    backend, _ = remote(handler)
    assert backend.chat("sys", "usr") == "hello"
    assert seen[0]["model"] == "m"
    assert [m["role"] for m in seen[0]["messages"]] == ["system", "user"]
    assert backend.stats.take()[0] == 1
    assert backend.stats.take()[0] == 0


def test_remote_retries_server_errors_with_backoff():
    statuses = iter([503, 429, 200])

    def handler(request):
        status = next(statuses)
        return chat_reply("ok") if status == 200 else httpx.Response(status, text="busy")

    backend, sleeps = remote(handler)
    assert backend.chat("s", "u") == "ok"
    assert sleeps == [0.01, 0.02]


def test_remote_gives_up_after_max_retries():
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ReadTimeout("slow", request=request)

    backend, sleeps = remote(handler, max_retries=2)
    with pytest.raises(RetriesExhausted) as excinfo:
        backend.chat("s", "u")
    assert len(calls) == 3
    assert excinfo.value.attempts == 3
    assert isinstance(excinfo.value.last_error, BackendTimeout)
    assert len(sleeps) == 2


def test_remote_client_errors_are_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="bad key")

    backend, _ = remote(handler)
    with pytest.raises(HttpStatus) as excinfo:
        backend.chat("s", "u")
    assert excinfo.value.code == 401
    assert len(calls) == 1


def test_remote_embeddings_are_ordered_and_normalized():
    def handler(request):
        assert request.url.path == "/v1/embeddings"
        return httpx.Response(200, json={"data": [{"index": 1, "embedding": [0.0, 2.0]},
                                                  {"index": 0, "embedding": [3.0, 4.0]}]})

    backend, _ = remote(handler)
    vectors = backend.embed(["a", "b"])
    assert np.allclose(vectors, [[0.6, 0.8], [0.0, 1.0]])


def test_remote_response_without_choices():
    backend, _ = remote(lambda request: httpx.Response(200, json={"choices": []}))
    with pytest.raises(BackendError):
        backend.chat("s", "u")


def test_config_reads_environment():
    config = BackendConfig.from_dict({"kind": "remote", "model": "m"},
                                     env={"GAG_API_BASE": "http://x", "GAG_API_KEY": "k"})
    assert config.base_url == "http://x"
    assert config.api_key == "k"
    with pytest.raises(ConfigError):
        BackendConfig.from_dict({"kind": "remote"}, env={})
    with pytest.raises(ConfigError):
        BackendConfig(kind="replay")
    with pytest.raises(ConfigError):
        BackendConfig(kind="carrier-pigeon")


def test_mock_backend_is_deterministic():
    system = system_prompt(TASK_QUERIES, "SC")
    user = "name: Ann\n\nMemory summary: x\nKeywords: AI, databases\n"
    assert MockBackend(seed=1).chat(system, user) == MockBackend(seed=1).chat(system, user)
    assert json.loads(MockBackend().chat(system, user)) == ["AI", "databases"]
    assert MockBackend().chat("no task header", "hi") == "OK"


def test_exchanges_are_recorded_and_replayed(tmp_path):
    backend = build_backend(BackendConfig(seed=3), out_dir=str(tmp_path))
    system = system_prompt(TASK_QUERIES, "SC")
    first = backend.chat(system, "Keywords: AI\n")
    second = backend.chat(system, "Keywords: security\n")
    backend.close()

    path = tmp_path / EXCHANGES_FILE
    exchanges = load_exchanges(str(path))
    assert [e.response for e in exchanges] == [first, second]
    assert exchanges[0].prompt_hash == prompt_hash(system, "Keywords: AI\n")

    replay = build_backend(BackendConfig(kind="replay", replay_path=str(path)), out_dir=str(tmp_path))
    assert replay.chat(system, "Keywords: security\n") == second
    assert replay.chat(system, "Keywords: AI\n") == first
    with pytest.raises(BackendError):
        replay.chat(system, "Keywords: graphics\n")
    # replaying from the recording's own directory leaves the recording intact
    assert len(load_exchanges(str(path))) == 2


def test_replay_consumes_repeated_prompts_in_order(tmp_path):
    path = tmp_path / EXCHANGES_FILE
    log = ExchangeLog(str(path))
    for response in ("one", "two"):
        log.write(ChatExchange(prompt_hash("s", "u"), "s", "u", response, 1.0))
    log.close()
    replay = ReplayBackend(str(path))
    assert [replay.chat("s", "u") for _ in range(3)] == ["one", "two", "two"]


def test_bad_exchange_lines_carry_their_number(tmp_path):
    path = tmp_path / EXCHANGES_FILE
    path.write_text('{"prompt_hash": "x"}\n', encoding="utf-8")
    with pytest.raises(ParseError) as excinfo:
        load_exchanges(str(path))
    assert excinfo.value.line == 1
