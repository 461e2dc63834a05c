import logging
import math
from dataclasses import dataclass
from typing import Optional

from errors import ConfigError
from graph.bipartite import CORE, REGULAR

logger = logging.getLogger(__name__)

RANDOM = "random"
CORE_REGULAR = "core_regular"
ALL = "all"


@dataclass(frozen=True)
class ActivationPolicy:
    mode: str
    count: Optional[int] = None
    hub_rate: float = 0.2
    p_core: float = 0.8
    p_regular: float = 0.2
    use_llm: bool = False

    def __post_init__(self):
        if self.mode not in (RANDOM, CORE_REGULAR, ALL):
            raise ConfigError(f"unknown activation mode '{self.mode}'")
        if not 0.0 <= self.hub_rate <= 1.0:
            raise ConfigError(f"hub_rate must lie in [0, 1], got {self.hub_rate}")
        if self.mode == RANDOM and (self.count is None or self.count < 0):
            raise ConfigError("random activation needs a non-negative count")


def ceil_fraction(fraction, n):
    # round first so 0.1 * 30 does not become 4
    return math.ceil(round(fraction * n, 9))


def label_core(actors, histories, hub_rate):
    """Labels aligned with `actors` (ordinals): the ceil(hub_rate*n) longest histories are Core,
    ties going to the lower ordinal."""
    if not 0.0 <= hub_rate <= 1.0:
        raise ConfigError(f"hub_rate must lie in [0, 1], got {hub_rate}")
    n_core = ceil_fraction(hub_rate, len(actors))
    ranked = sorted(range(len(actors)), key=lambda i: (-histories[i], actors[i]))
    core = set(ranked[:n_core])
    return [CORE if i in core else REGULAR for i in range(len(actors))]


def activate(actors, policy, rng, round, labels=None, decide=None):
    """Sorted ordinals of the actors taking part in `round`.

    `decide(ordinal, label)` is consulted per actor when the policy asks for LLM activation."""
    actors = list(actors)
    if policy.mode == ALL:
        return sorted(actors)

    if policy.mode == RANDOM:
        count = policy.count
        if count > len(actors):
            logger.warning(f"Round {round}: {count} active actors requested but only {len(actors)} exist")
            count = len(actors)
        picks = rng.choice(len(actors), size=count, replace=False)
        return sorted(actors[int(i)] for i in picks)

    labels = labels or [REGULAR] * len(actors)
    if policy.use_llm:
        if decide is None:
            raise ConfigError("LLM activation needs a decision callback")
        return sorted(a for a, label in zip(actors, labels) if decide(a, label))
    draws = rng.random(len(actors))
    return sorted(a for a, label, u in zip(actors, labels, draws)
                  if u < (policy.p_core if label == CORE else policy.p_regular))
