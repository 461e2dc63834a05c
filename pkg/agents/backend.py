import hashlib
import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional

import httpx
import numpy as np

from errors import BackendError, BackendTimeout, ConfigError, EncoderError, HttpStatus, ParseError, RetriesExhausted

logger = logging.getLogger(__name__)

MOCK = "mock"
REMOTE = "remote"
REPLAY = "replay"

EXCHANGES_FILE = "exchanges.jsonl"
API_KEY_ENV = "GAG_API_KEY"
API_BASE_ENV = "GAG_API_BASE"


@dataclass(frozen=True)
class BackendConfig:
    kind: str = MOCK
    seed: int = 0
    base_url: str = ""
    model: str = ""
    embed_model: str = ""
    api_key: str = ""
    timeout_ms: int = 60000
    max_retries: int = 2
    backoff_ms: int = 500
    max_in_flight: int = 8
    replay_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (MOCK, REMOTE, REPLAY):
            raise ConfigError(f"unknown backend kind '{self.kind}'")
        if self.kind == REMOTE and not self.base_url:
            raise ConfigError(f"remote backend needs a base_url (or {API_BASE_ENV})")
        if self.kind == REPLAY and not self.replay_path:
            raise ConfigError("replay backend needs a replay_path")
        if self.max_retries < 0:
            raise ConfigError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.timeout_ms <= 0 or self.max_in_flight < 1:
            raise ConfigError("timeout_ms must be > 0 and max_in_flight >= 1")

    @classmethod
    def from_dict(cls, data, env=None):
        env = os.environ if env is None else env
        data = dict(data or {})
        return cls(
            kind=data.get("kind", MOCK),
            seed=int(data.get("seed", 0)),
            base_url=env.get(API_BASE_ENV) or data.get("base_url") or "",
            model=data.get("model") or "",
            embed_model=data.get("embed_model") or "",
            api_key=env.get(API_KEY_ENV, ""),
            timeout_ms=int(data.get("timeout_ms", 60000)),
            max_retries=int(data.get("max_retries", 2)),
            backoff_ms=int(data.get("backoff_ms", 500)),
            max_in_flight=int(data.get("max_in_flight", 8)),
            replay_path=data.get("replay_path"),
        )


@dataclass(frozen=True)
class ChatExchange:
    prompt_hash: str
    system: str
    user: str
    response: str
    latency_ms: float


def prompt_hash(system, user):
    return hashlib.sha256(f"{system}\n{user}".encode("utf-8")).hexdigest()


class BackendStats:
    """Call and latency counters; `take` returns what accumulated since the last take."""

    def __init__(self):
        self._lock = threading.Lock()
        self.calls = 0
        self.latency_ms = 0.0
        self._taken = (0, 0.0)

    def add(self, latency_ms):
        with self._lock:
            self.calls += 1
            self.latency_ms += latency_ms

    def take(self):
        with self._lock:
            calls = self.calls - self._taken[0]
            latency = self.latency_ms - self._taken[1]
            self._taken = (self.calls, self.latency_ms)
        return calls, round(latency, 3)


class ExchangeLog:
    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._file = open(path, "w", encoding="utf-8")
        logger.info(f"Recording LLM exchanges to {path}")

    def write(self, exchange):
        line = json.dumps(asdict(exchange), ensure_ascii=False)
        with self._lock:
            self._file.write(line + "\n")
            self._file.flush()

    def close(self):
        with self._lock:
            if not self._file.closed:
                self._file.close()


def load_exchanges(path):
    exchanges = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                exchanges.append(ChatExchange(**json.loads(line)))
            except (ValueError, TypeError) as e:
                raise ParseError(f"bad exchange record: {e}", line=n)
    return exchanges


class ChatBackend:
    """Shared chat bookkeeping: timing, stats and the optional exchange log."""

    def __init__(self, exchange_log=None):
        self.exchange_log = exchange_log
        self.stats = BackendStats()

    def chat(self, system, user):
        start = time.perf_counter()
        text = self._complete(system, user)
        latency_ms = round((time.perf_counter() - start) * 1000.0, 3)
        self.stats.add(latency_ms)
        if self.exchange_log is not None:
            self.exchange_log.write(ChatExchange(prompt_hash(system, user), system, user, text, latency_ms))
        return text

    def _complete(self, system, user):
        raise NotImplementedError

    def embed(self, texts):
        raise BackendError(f"{type(self).__name__} does not provide embeddings")

    def close(self):
        if self.exchange_log is not None:
            self.exchange_log.close()


def normalize_rows(vectors):
    matrix = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0):
        raise EncoderError("embedding backend returned a zero vector")
    return matrix / norms[:, None]


class RemoteBackend(ChatBackend):
    """Chat-completions style endpoint over httpx with bounded concurrency and backoff."""

    def __init__(self, config, exchange_log=None, transport=None, sleep=time.sleep):
        super().__init__(exchange_log)
        self.config = config
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        headers = {"Authorization": f"Bearer {config.api_key}"} if config.api_key else {}
        self.client = httpx.Client(base_url=config.base_url, headers=headers,
                                   timeout=config.timeout_ms / 1000.0, transport=transport)

    def _post(self, path, body):
        attempts = self.config.max_retries + 1
        last_error = None
        for attempt in range(1, attempts + 1):
            try:
                with self._slots:
                    response = self.client.post(path, json=body)
            except httpx.TimeoutException as e:
                last_error = BackendTimeout(f"{path} timed out: {e}")
            except httpx.TransportError as e:
                last_error = BackendError(f"{path} transport error: {e}")
            else:
                if response.status_code < 400:
                    try:
                        return response.json()
                    except ValueError as e:
                        raise BackendError(f"{path} returned a non-JSON body: {e}")
                error = HttpStatus(response.status_code, response.text[:200])
                if response.status_code != 429 and response.status_code < 500:
                    raise error
                last_error = error
            if attempt < attempts:
                delay_ms = self.config.backoff_ms * 2 ** (attempt - 1)
                logger.warning(f"⚠️ {last_error} (attempt {attempt}/{attempts}), retrying in {delay_ms} ms")
                self._sleep(delay_ms / 1000.0)
        raise RetriesExhausted(attempts, last_error)

    def _complete(self, system, user):
        body = {"model": self.config.model,
                "messages": [{"role": "system", "content": system}, {"role": "user", "content": user}]}
        data = self._post("/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise BackendError("chat response without choices[0].message.content")

    def embed(self, texts):
        if not texts:
            raise EncoderError("embed needs at least one text")
        data = self._post("/embeddings", {"model": self.config.embed_model, "input": list(texts)})
        try:
            rows = sorted(data["data"], key=lambda row: row.get("index", 0))
            vectors = [row["embedding"] for row in rows]
        except (KeyError, TypeError):
            raise BackendError("embedding response without data[].embedding")
        if len(vectors) != len(texts):
            raise BackendError(f"asked for {len(texts)} embeddings, got {len(vectors)}")
        return normalize_rows(vectors)

    def close(self):
        self.client.close()
        super().close()


class ReplayBackend(ChatBackend):
    """Answers from a recorded exchange log; repeated prompts consume their responses in order
    and the last one is reused once the queue runs down."""

    def __init__(self, path, exchange_log=None):
        super().__init__(exchange_log)
        self._queues = {}
        self._lock = threading.Lock()
        for exchange in load_exchanges(path):
            self._queues.setdefault(exchange.prompt_hash, deque()).append(exchange.response)
        logger.info(f"Loaded {sum(len(q) for q in self._queues.values())} recorded exchanges from {path}")

    def _complete(self, system, user):
        key = prompt_hash(system, user)
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                raise BackendError(f"no recorded response for prompt {key[:12]}")
            return queue.popleft() if len(queue) > 1 else queue[0]


def build_backend(config, out_dir=None, transport=None, embed_dim=384):
    """Backend for `config`; chat exchanges are recorded under `out_dir` when given."""
    log_path = os.path.join(out_dir, EXCHANGES_FILE) if out_dir else None
    if config.kind == REPLAY:
        backend = ReplayBackend(config.replay_path)
        # replaying into the directory that holds the recording must not truncate it
        if log_path and os.path.abspath(log_path) != os.path.abspath(config.replay_path):
            backend.exchange_log = ExchangeLog(log_path)
        return backend
    exchange_log = ExchangeLog(log_path) if log_path else None
    if config.kind == REMOTE:
        return RemoteBackend(config, exchange_log, transport=transport)
    from agents.mock_backend import MockBackend
    return MockBackend(config.seed, exchange_log, embed_dim=embed_dim)
