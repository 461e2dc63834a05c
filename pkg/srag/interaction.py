import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from agents.policy import DecisionContext
from errors import ConfigError
from graph.bipartite import CORE, REGULAR
from graph.folding import CREATION_KINDS
from graph.scenario import item_topics
from rng_streams import ACTOR, derive_rng
from srag.encoder import DEFAULT_DIM, HASHING
from srag.rerank import PreferenceContext, rerank_coarse, rerank_fine
from srag.retrieval import assemble_observation, index_items, recall

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SragConfig:
    n_r: int = 10
    n_f: int = 1
    rerank_enabled: bool = True
    max_queries: int = 3
    embed_dim: int = DEFAULT_DIM
    encoder: str = HASHING
    filter_items: Optional[tuple] = None      # None means the scenario's own list

    def filters(self, spec):
        return tuple(self.filter_items) if self.filter_items is not None else spec.filter_items

    def validate(self, spec):
        if self.n_r < 1:
            raise ConfigError(f"n_r must be >= 1, got {self.n_r}")
        filters = self.filters(spec)
        if not 0 <= self.n_f <= len(filters):
            raise ConfigError(f"n_f must lie in [0, {len(filters)}] for {spec.name}, got {self.n_f}")
        return self


@dataclass(frozen=True)
class ActorTurn:
    actor: int
    profile: Any
    memory: Any
    label: str = REGULAR


@dataclass
class ActorDelta:
    actor: int
    new_item: Optional[dict] = None
    edges: list = field(default_factory=list)      # [(item ordinal or None for the new item, kind)]
    observed: int = 0
    parse_warnings: int = 0
    failed: bool = False
    summary: Optional[str] = None                  # the turn's reflection, stored by the coordinator


@dataclass
class RoundDeltas:
    round: int
    deltas: list = field(default_factory=list)

    @property
    def new_items(self):
        return [d.new_item for d in self.deltas if d.new_item is not None]

    @property
    def edge_count(self):
        return sum(len(d.edges) for d in self.deltas)

    @property
    def failed(self):
        return [d.actor for d in self.deltas if d.failed]


@dataclass
class RoundContext:
    round: int
    spec: Any
    config: SragConfig
    snapshot: Any
    index: Any
    encoder: Any
    core_flags: dict
    item_topics: dict
    item_creators: dict
    followees: dict
    friends: dict

    def preferences(self, actor, profile):
        return PreferenceContext(
            topics=frozenset(t.casefold() for t in profile.interests()),
            followees=self.followees.get(actor, frozenset()),
            friends=self.friends.get(actor, frozenset()),
            item_topics=self.item_topics,
            item_creators=self.item_creators,
        )


def _snapshot_authors(snapshot, item):
    authors = [item.creator.ordinal] if item.creator is not None else []
    authors += [e.actor.ordinal for e in snapshot.edges_of(item.id.ordinal) if e.kind in CREATION_KINDS]
    return list(dict.fromkeys(authors))


def build_round_context(graph, k, snapshot, index, encoder, spec, config):
    """Everything reranking needs, read from the round's snapshot and the current core labels."""
    core = {a.id.ordinal for a in graph.actors if a.core_label == CORE}
    creators = {}
    follows = {}
    for item in snapshot:
        authors = _snapshot_authors(snapshot, item)
        creators[item.id.ordinal] = authors[0] if authors else None
        for edge in snapshot.edges_of(item.id.ordinal):
            if edge.kind == "Follow":
                follows.setdefault(edge.actor.ordinal, set()).update(a for a in authors if a != edge.actor.ordinal)
    friends = {a: frozenset(b for b in targets if a in follows.get(b, ())) for a, targets in follows.items()}
    return RoundContext(
        round=k, spec=spec, config=config, snapshot=snapshot, index=index, encoder=encoder,
        core_flags={o: c is not None and c in core for o, c in creators.items()},
        item_topics={item.id.ordinal: item_topics(item.attrs, spec) for item in snapshot},
        item_creators=creators,
        followees={a: frozenset(t) for a, t in follows.items()},
        friends=friends,
    )


def retrieve(ctx, actor, profile, queries):
    config = ctx.config
    prefs = ctx.preferences(actor, profile)
    per_query = []
    for query in queries:
        ranked = recall(ctx.index, query, config.n_r, ctx.encoder)
        if config.rerank_enabled:
            ranked = rerank_coarse(ranked, ctx.core_flags)
            ranked = rerank_fine(ranked, prefs, config.filters(ctx.spec), config.n_f, ctx.core_flags)
        per_query.append((query, ranked))
    return assemble_observation(per_query, ctx.index, ctx.snapshot)


def interact(turn, policy, ctx, rng):
    """One actor's pass: queries, recall and rerank, decision. Returns the actor's delta."""
    spec = ctx.spec
    decision = DecisionContext(turn.actor, ctx.round, rng, turn.label)
    reflection = policy.reflect(turn.profile, turn.memory, decision)
    memory = dataclasses.replace(turn.memory, summary=reflection.summary)
    queries = policy.make_queries(turn.profile, memory, decision, reflection)
    observation = retrieve(ctx, turn.actor, turn.profile, queries)
    actions = policy.decide_actions(turn.profile, memory, observation, decision)

    delta = ActorDelta(turn.actor, observed=len(observation), parse_warnings=actions.warnings,
                       summary=reflection.summary)
    if actions.new_item is not None and spec.creation_kind:
        missing = [name for name in spec.required_attrs if not str(actions.new_item.get(name, "")).strip()]
        if missing:
            logger.warning(f"Actor {turn.actor}: new {spec.item_type} lacks {missing}, dropped")
            delta.parse_warnings += 1
        else:
            delta.new_item = dict(actions.new_item)
            delta.edges.append((None, spec.creation_kind))

    observed = set(observation.items)
    for ordinal, kind in actions.targets:
        if ordinal not in observed or kind not in spec.interaction_kinds:
            delta.parse_warnings += 1
            continue
        delta.edges.append((ordinal, kind))
    return delta


def run_round(graph, k, turns, policy, encoder, config, spec, seed, snapshot=None, index=None,
              map_fn=map, injected_latency_ms=0):
    """All active actors of round k against the round-(k-1) snapshot. Nothing in `graph` is modified;
    deltas come back ordered by actor ordinal whatever order `map_fn` ran them in."""
    if k < 1:
        raise ValueError(f"round must be >= 1, got {k}")
    snapshot = snapshot if snapshot is not None else graph.snapshot_items(k)
    index = index if index is not None else index_items(snapshot, encoder, spec)
    ctx = build_round_context(graph, k, snapshot, index, encoder, spec, config)

    def task(turn):
        rng = derive_rng(seed, ACTOR, k, turn.actor)
        try:
            if injected_latency_ms:
                time.sleep(injected_latency_ms / 1000.0)
            return interact(turn, policy, ctx, rng)
        except Exception:
            logger.exception(f"Round {k}: actor {turn.actor} failed and is skipped")
            return ActorDelta(turn.actor, failed=True)

    deltas = sorted(map_fn(task, list(turns)), key=lambda d: d.actor)
    return RoundDeltas(k, deltas)
