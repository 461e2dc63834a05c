import hashlib
import logging
import re
from abc import ABC, abstractmethod

import numpy as np

from errors import ConfigError, EncoderError

logger = logging.getLogger(__name__)

DEFAULT_DIM = 384
HASHING = "hashing"
BACKEND = "backend"


def tokenize(text):
    return re.findall(r"\w+", str(text).casefold())


def _hash64(token):
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")


def hash_embed(text, dim=DEFAULT_DIM):
    """Signed feature hashing of the token bag, L2-normalized."""
    if dim < 1:
        raise EncoderError(f"embedding dimension must be >= 1, got {dim}")
    vector = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        h = _hash64(token)
        vector[h % dim] += -1.0 if h >> 63 else 1.0
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        # empty text, or signs that cancel out: fall back to one bucket for the whole string
        vector[_hash64(str(text)) % dim] = 1.0
        return vector
    return vector / norm


class Encoder(ABC):
    dim = DEFAULT_DIM

    @abstractmethod
    def encode(self, text):
        ...

    def encode_many(self, texts):
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.vstack([self.encode(t) for t in texts])


class HashingEncoder(Encoder):
    def __init__(self, dim=DEFAULT_DIM):
        if dim < 1:
            raise ConfigError(f"embed_dim must be >= 1, got {dim}")
        self.dim = dim

    def encode(self, text):
        return hash_embed(text, self.dim)


class BackendEncoder(Encoder):
    """Embeddings from the LLM backend's embedding endpoint."""

    def __init__(self, backend, dim=DEFAULT_DIM):
        self.backend = backend
        self.dim = dim

    def encode(self, text):
        return self.encode_many([text])[0]

    def encode_many(self, texts):
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        matrix = np.asarray(self.backend.embed(list(texts)), dtype=np.float64)
        if matrix.shape[0] != len(texts):
            raise EncoderError(f"expected {len(texts)} embeddings, got {matrix.shape[0]}")
        self.dim = matrix.shape[1]
        return matrix


def build_encoder(kind, dim=DEFAULT_DIM, backend=None):
    if kind == HASHING:
        return HashingEncoder(dim)
    if kind == BACKEND:
        if backend is None:
            raise ConfigError("backend encoder needs an LLM backend")
        return BackendEncoder(backend, dim)
    raise ConfigError(f"unknown encoder '{kind}'")
