import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

from agents.activation import ceil_fraction
from agents.memory import DEFAULT_KEYWORDS, DEFAULT_WINDOW, reflect
from agents.parsing import ActionSet
from errors import ConfigError
from graph.bipartite import REGULAR
from graph.scenario import synthesize_item_attrs
from vocabulary import load_vocabulary

logger = logging.getLogger(__name__)

HEURISTIC = "heuristic"
LLM = "llm"
DEFAULT_MAX_QUERIES = 3


@dataclass(frozen=True)
class DecisionContext:
    """What a policy may know about the turn besides profile, memory and observation."""
    actor: int
    round: int
    rng: Any
    label: str = REGULAR


class AgentPolicy(ABC):
    """Decision layer of one scenario. Implementations are called from several workers at once,
    each time for a different actor, and must not keep per-call state."""

    def __init__(self, spec, max_queries=DEFAULT_MAX_QUERIES, memory_window=DEFAULT_WINDOW,
                 keywords=DEFAULT_KEYWORDS):
        if max_queries < 1:
            raise ConfigError(f"max_queries must be >= 1, got {max_queries}")
        self.spec = spec
        self.max_queries = max_queries
        self.memory_window = memory_window
        self.keywords = keywords

    def reflect(self, profile, memory, context):
        return reflect(memory, None, self.memory_window, profile, self.keywords, self.spec.name)

    @abstractmethod
    def make_queries(self, profile, memory, context, reflection):
        ...

    @abstractmethod
    def decide_actions(self, profile, memory, observation, context):
        ...

    def _fallback_topic(self, profile, rng):
        pool = profile.interests() or list(load_vocabulary(self.spec.topic_vocab))
        return pool[int(rng.integers(len(pool)))]


class HeuristicPolicy(AgentPolicy):
    def __init__(self, spec, cite_fraction=0.3, create_probability=0.5, **kwargs):
        super().__init__(spec, **kwargs)
        if not 0.0 < cite_fraction <= 1.0:
            raise ConfigError(f"cite_fraction must lie in (0, 1], got {cite_fraction}")
        if not 0.0 <= create_probability <= 1.0:
            raise ConfigError(f"create_probability must lie in [0, 1], got {create_probability}")
        self.cite_fraction = cite_fraction
        self.create_probability = create_probability

    def make_queries(self, profile, memory, context, reflection):
        queries = list(reflection.keywords[:self.max_queries])
        return queries or [self._fallback_topic(profile, context.rng)]

    def decide_actions(self, profile, memory, observation, context):
        rng = context.rng
        actions = ActionSet()
        if self.spec.creation_kind and rng.random() < self.create_probability:
            topic = self._fallback_topic(profile, rng)
            serial = int(rng.integers(1_000_000))
            actions.new_item = synthesize_item_attrs(self.spec, rng, topic, profile.name, context.round, serial)

        kinds = self.spec.interaction_kinds
        n_targets = ceil_fraction(self.cite_fraction, len(observation.items))
        for ordinal in observation.items[:n_targets]:
            kind = kinds[0] if len(kinds) == 1 else kinds[int(rng.integers(len(kinds)))]
            actions.targets.append((ordinal, kind))
        return actions


def heuristic_policy(config, spec):
    """HeuristicPolicy from the `policy` config section, scenario values filling the gaps."""
    config = config or {}

    def value(key, default):
        found = config.get(key)
        return default if found is None else found

    return HeuristicPolicy(
        spec,
        cite_fraction=float(value("cite_fraction", spec.cite_fraction)),
        create_probability=float(value("create_probability", spec.create_probability)),
        max_queries=int(value("max_queries", DEFAULT_MAX_QUERIES)),
        memory_window=int(value("memory_window", DEFAULT_WINDOW)),
        keywords=int(value("keywords", DEFAULT_KEYWORDS)),
    )
