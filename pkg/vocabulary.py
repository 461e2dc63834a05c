import logging
import os
from functools import lru_cache

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


@lru_cache(maxsize=None)
def load_vocabulary(name, data_dir=DATA_DIR):
    """One token per line, blank lines skipped. Returned as a tuple so it can be shared."""
    path = os.path.join(data_dir, f"{name}.txt")
    if not os.path.exists(path):
        raise FileNotFoundError(f"vocabulary file not found: {path}")
    tokens = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            token = line.strip()
            if token:
                tokens.append(token)
    logger.debug(f"Loaded {len(tokens)} tokens from {path}")
    return tuple(tokens)
