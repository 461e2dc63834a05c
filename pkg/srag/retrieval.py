import logging
from dataclasses import dataclass, field

import numpy as np

from graph.scenario import render_item_text

logger = logging.getLogger(__name__)


class VectorIndex:
    """Exact cosine index over unit vectors; rows stay aligned with `ordinals`."""

    def __init__(self, dim):
        self.dim = dim
        self.ordinals = np.zeros(0, dtype=np.int64)
        self.rounds = np.zeros(0, dtype=np.int64)
        self.matrix = np.zeros((0, dim), dtype=np.float64)
        self.texts = []

    def __len__(self):
        return len(self.ordinals)

    def add(self, ordinals, rounds, vectors, texts):
        if len(ordinals) == 0:
            return
        vectors = np.asarray(vectors, dtype=np.float64).reshape(len(ordinals), -1)
        if self.matrix.shape[0] == 0:
            self.dim = vectors.shape[1]
            self.matrix = vectors
        else:
            self.matrix = np.vstack([self.matrix, vectors])
        self.ordinals = np.concatenate([self.ordinals, np.asarray(ordinals, dtype=np.int64)])
        self.rounds = np.concatenate([self.rounds, np.asarray(rounds, dtype=np.int64)])
        self.texts.extend(texts)

    def scores(self, vector):
        if len(self) == 0:
            return np.zeros(0)
        # rounding keeps float noise from reordering items with equal text
        return np.round(self.matrix @ np.asarray(vector, dtype=np.float64), 12)


def index_items(snapshot, encoder, spec, previous=None):
    """Index every snapshot item by its rendered text.

    With `previous` (the last round's index) only the items it lacks are encoded. Scenarios that render
    edge features are always rebuilt since an item's text changes as it gains edges."""
    texts = [render_item_text(item, spec, snapshot.edges_of(item.id.ordinal)) for item in snapshot]
    ordinals = [item.id.ordinal for item in snapshot]
    rounds = [item.created_round for item in snapshot]
    index = VectorIndex(encoder.dim)
    if previous is not None and len(previous) and not spec.edge_features:
        known = len(previous)
        if list(previous.ordinals) == ordinals[:known]:
            index.add(previous.ordinals, previous.rounds, previous.matrix, previous.texts)
            texts, ordinals, rounds = texts[known:], ordinals[known:], rounds[known:]
    index.add(ordinals, rounds, encoder.encode_many(texts), texts)
    logger.debug(f"Indexed {len(index)} items for round {snapshot.round}")
    return index


def recall(index, query, n_r, encoder):
    """Top n_r ordinals by cosine similarity, ties to the lower ordinal."""
    if n_r < 1:
        raise ValueError(f"n_r must be >= 1, got {n_r}")
    if len(index) == 0:
        return []
    scores = index.scores(encoder.encode(query))
    order = np.lexsort((index.ordinals, -scores))[:n_r]
    return [int(index.ordinals[i]) for i in order]


@dataclass
class Observation:
    per_query: list = field(default_factory=list)     # [(query, [ordinal, ...])]
    items: list = field(default_factory=list)         # first-seen union
    texts: list = field(default_factory=list)
    attrs: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.items)


def assemble_observation(per_query, index, snapshot):
    text_of = dict(zip(index.ordinals.tolist(), index.texts))
    observation = Observation(per_query=list(per_query))
    for ordinal in dict.fromkeys(o for _, ranked in per_query for o in ranked):
        observation.items.append(ordinal)
        observation.texts.append(text_of[ordinal])
        observation.attrs[ordinal] = snapshot.get(ordinal).attrs
    return observation
