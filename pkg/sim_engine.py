import dataclasses
import hashlib
import json
import logging
import os
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

from actor_worker import ActorWorkerPool
from agents.activation import activate, label_core
from agents.backend import build_backend
from agents.llm_policy import LlmPolicy, decide_activation
from agents.memory import AgentMemory, MemoryRecord
from agents.policy import LLM, heuristic_policy
from agents.profiles import AgentProfile, generate_profiles
from errors import DanglingEndpoint
from graph.bipartite import actor_id, item_id, save_graph
from graph.folding import fold, get_fold_spec, save_folded
from graph.scenario import LLM_GENERATED, check_termination, item_topics, load_seed
from rng_streams import ACTIVATION, PROFILES, derive_rng
from srag.encoder import BACKEND, build_encoder
from srag.interaction import ActorTurn, run_round
from srag.retrieval import index_items

logger = logging.getLogger(__name__)

VERSION = "0.1.0"
MANIFEST_FILE = "manifest.json"
PROFILES_FILE = "profiles.jsonl"
FOLDS_DIR = "folds"


@dataclass
class RoundReport:
    round: int
    active: int = 0
    new_actors: int = 0
    new_items: int = 0
    new_edges: dict = field(default_factory=dict)
    failed_actors: int = 0
    parse_warnings: int = 0
    dropped_creations: int = 0
    wall_time: float = 0.0
    phases: dict = field(default_factory=dict)
    llm_calls: int = 0
    llm_latency_ms: float = 0.0

    @property
    def edge_total(self):
        return sum(self.new_edges.values())


@dataclass
class RunManifest:
    config: dict
    version: str
    rng_seed: int
    rounds: list = field(default_factory=list)
    termination_cause: str = "rounds_cap"
    initial_counts: dict = field(default_factory=dict)
    final_counts: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class MergeResult:
    new_items: list = field(default_factory=list)
    applied: list = field(default_factory=list)       # [(actor, item ordinal, kind)] in merge order
    dropped_creations: int = 0

    @property
    def edges_by_kind(self):
        return dict(Counter(kind for _, _, kind in self.applied))


def _counts(graph):
    actors, items, edges = graph.counts()
    return {"actors": actors, "items": items, "edges": edges}


def merge_deltas(graph, round_deltas, k, creation_cap=None):
    """Apply per-actor deltas in actor-ordinal order: items first, then edges.

    Targets must already be visible in round k's snapshot; `None` stands for the actor's own new item.
    With `creation_cap`, creations beyond the cap are dropped together with their creation edges."""
    deltas = sorted((d for d in round_deltas.deltas if not d.failed), key=lambda d: d.actor)
    for delta in deltas:
        if not graph.has_actor(actor_id(delta.actor)):
            raise DanglingEndpoint(f"actor {delta.actor} does not exist")
        for target, kind in delta.edges:
            if target is None:
                if delta.new_item is None:
                    raise DanglingEndpoint(f"actor {delta.actor} refers to a new item it did not create")
            elif not graph.has_item(item_id(target)) or graph.items[target].created_round > k - 1:
                raise DanglingEndpoint(f"actor {delta.actor} targets item {target}, not visible in round {k}")

    result = MergeResult()
    own_items = {}
    for delta in deltas:
        if delta.new_item is None:
            continue
        if creation_cap is not None and len(result.new_items) >= creation_cap:
            result.dropped_creations += 1
            continue
        new_id = graph.add_item(delta.new_item, actor_id(delta.actor), k)
        own_items[delta.actor] = new_id.ordinal
        result.new_items.append(new_id.ordinal)

    for delta in deltas:
        for target, kind in delta.edges:
            if target is None:
                if delta.actor not in own_items:
                    continue
                target = own_items[delta.actor]
            graph.add_edge(actor_id(delta.actor), item_id(target), kind, k)
            result.applied.append((delta.actor, target, kind))
    graph.current_round = max(graph.current_round, k)
    return result


class SimulationEngine:
    def __init__(self, config, record_dir=None, backend=None):
        self.config = config
        self.spec = config.scenario
        if backend is None and self._needs_backend():
            backend = build_backend(config.backend, record_dir, embed_dim=config.srag.embed_dim)
        self.backend = backend
        self.encoder = build_encoder(config.srag.encoder, config.srag.embed_dim, backend)
        self.policy = self._build_policy()

        size = config.seed_size
        self.graph = load_seed(config.seed_source, self.spec, backend, size.get("actors", 10),
                               size.get("items", 50), size.get("edges", 80), config.rng_seed)
        self.profiles = {a.id.ordinal: AgentProfile.from_attrs(a.attrs, f"actor {a.id.ordinal}")
                         for a in self.graph.actors}
        self.memories = {a: AgentMemory() for a in self.profiles}
        self.profile_log = [(a, 0, p) for a, p in self.profiles.items()]
        self.manifest = RunManifest(config.raw, VERSION, config.rng_seed, initial_counts=_counts(self.graph))
        self._index = None

    def _needs_backend(self):
        c = self.config
        return (c.policy_kind == LLM or c.srag.encoder == BACKEND or c.seed_source == LLM_GENERATED
                or c.activation.use_llm)

    def _build_policy(self):
        c = self.config
        options = dict(c.policy)
        options["max_queries"] = c.srag.max_queries
        if c.policy_kind == LLM:
            return LlmPolicy(self.spec, self.backend, max_retries=int(options.get("max_retries", 2)),
                             max_queries=c.srag.max_queries, memory_window=int(options.get("memory_window", 20)),
                             keywords=int(options.get("keywords", 3)))
        return heuristic_policy(options, self.spec)

    def _formulate(self, k):
        c = self.config
        rng = derive_rng(c.rng_seed, PROFILES, k)
        backend = self.backend if c.policy_kind == LLM else None
        new = generate_profiles(backend, self.spec, c.profiles_per_round, rng)
        for profile in new:
            node = self.graph.add_actor(profile.to_text(), k, attrs=profile.as_attrs())
            self.profiles[node.ordinal] = profile
            self.memories[node.ordinal] = AgentMemory()
            self.profile_log.append((node.ordinal, k, profile))

        actors = [a.id.ordinal for a in self.graph.actors]
        labels = label_core(actors, [len(self.memories[a].action_log) for a in actors], c.activation.hub_rate)
        for actor, label in zip(actors, labels):
            self.graph.actors[actor].core_label = label

        decide = None
        if c.activation.use_llm:
            def decide(actor, label):
                return decide_activation(self.backend, self.spec, self.profiles[actor], label,
                                         len(self.memories[actor].action_log))
        active = activate(actors, c.activation, derive_rng(c.rng_seed, ACTIVATION, k), k, labels, decide)
        return len(new), active, dict(zip(actors, labels))

    def _remember(self, deltas, merged, k):
        for delta in deltas.deltas:
            if delta.failed or delta.summary is None:
                continue
            memory = self.memories[delta.actor]
            memory.summary = delta.summary
            memory.last_reflection_round = k
        headline = self.spec.headline_attr
        for actor, ordinal, kind in merged.applied:
            item = self.graph.items[ordinal]
            topics = item_topics(item.attrs, self.spec)
            text = str(item.attrs.get(headline, "")) if headline else ""
            self.memories[actor].record(MemoryRecord(k, kind, ordinal, topics[0] if topics else "", text))

    def step(self, k, pool):
        c = self.config
        report = RoundReport(k)
        started = time.perf_counter()

        t = time.perf_counter()
        report.new_actors, active, labels = self._formulate(k)
        report.active = len(active)
        report.phases["formulate"] = time.perf_counter() - t

        t = time.perf_counter()
        snapshot = self.graph.snapshot_items(k)
        self._index = index_items(snapshot, self.encoder, self.spec, previous=self._index)
        report.phases["index"] = time.perf_counter() - t

        t = time.perf_counter()
        turns = [ActorTurn(a, self.profiles[a], self.memories[a].snapshot(), labels[a]) for a in active]
        deltas = run_round(self.graph, k, turns, self.policy, self.encoder, c.srag, self.spec, c.rng_seed,
                           snapshot=snapshot, index=self._index, map_fn=pool.map,
                           injected_latency_ms=c.injected_latency_ms)
        report.phases["interact"] = time.perf_counter() - t

        t = time.perf_counter()
        merged = merge_deltas(self.graph, deltas, k, c.papers_target)
        self._remember(deltas, merged, k)
        report.phases["merge"] = time.perf_counter() - t

        report.new_items = len(merged.new_items)
        report.new_edges = merged.edges_by_kind
        report.failed_actors = len(deltas.failed)
        report.parse_warnings = sum(d.parse_warnings for d in deltas.deltas)
        report.dropped_creations = merged.dropped_creations
        if self.backend is not None:
            report.llm_calls, report.llm_latency_ms = self.backend.stats.take()
        report.wall_time = time.perf_counter() - started
        logger.info(f"Round {k}: {report.active} active, +{report.new_actors} actors, +{report.new_items} items, "
                    f"+{report.edge_total} edges, {report.failed_actors} failed ({report.wall_time:.2f}s)")
        return report

    def run(self):
        c = self.config
        if self.backend is not None:
            self.backend.stats.take()
        cause = "rounds_cap"
        with ActorWorkerPool(c.ports) as pool:
            for k in range(1, c.rounds + 1):
                report = self.step(k, pool)
                self.manifest.rounds.append(asdict(report))
                if check_termination(self.graph, self.spec, c.termination):
                    cause = "termination"
                    logger.info(f"Termination rule met after round {k}")
                    break
            self.peak_in_flight = pool.peak_in_flight
        self.manifest.termination_cause = cause
        self.manifest.final_counts = _counts(self.graph)
        return self.graph, self.manifest

    def close(self):
        if self.backend is not None:
            self.backend.close()


def save_run(engine, out_dir, folds=None):
    save_graph(engine.graph, out_dir)
    with open(os.path.join(out_dir, MANIFEST_FILE), "w", encoding="utf-8") as f:
        json.dump(engine.manifest.to_dict(), f, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, PROFILES_FILE), "w", encoding="utf-8") as f:
        for actor, k, profile in engine.profile_log:
            record = {"actor": actor, "round": k, "name": profile.name, "attributes": profile.attributes}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    for name in folds or ():
        folded = fold(engine.graph, get_fold_spec(name))
        save_folded(folded, os.path.join(out_dir, FOLDS_DIR, f"{name}.edges.tsv"))
    logger.info(f"Run written to {out_dir}")


def run_simulation(config, out_dir=None, backend=None):
    """Run to termination; with `out_dir` the graph, manifest, profiles and folds are persisted."""
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    engine = SimulationEngine(config, record_dir=out_dir, backend=backend)
    try:
        graph, manifest = engine.run()
        if out_dir:
            folds = config.folds if config.folds is not None else config.scenario.fold_specs
            save_run(engine, out_dir, folds)
    finally:
        engine.close()
    return graph, manifest


def graph_digest(graph):
    digest = hashlib.sha256()
    for item in graph.items:
        creator = item.creator.ordinal if item.creator is not None else -1
        digest.update(json.dumps([item.id.ordinal, creator, item.created_round, item.attrs],
                                 sort_keys=True).encode("utf-8"))
    for edge in graph.edges:
        digest.update(f"{edge.actor.ordinal}\t{edge.item.ordinal}\t{edge.kind}\t{edge.round}\n".encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class SpeedupRow:
    ports: int
    active: int
    interact_seconds: float
    seconds_per_interaction: float
    reduction_pct: float
    peak_in_flight: int
    digest: str


def measure_speedup(config, port_values):
    """Same workload at every P; time per actor interaction and its reduction against the first P."""
    rows = []
    baseline = None
    for ports in port_values:
        engine = SimulationEngine(dataclasses.replace(config, ports=int(ports)))
        try:
            graph, manifest = engine.run()
        finally:
            engine.close()
        active = sum(r["active"] for r in manifest.rounds)
        seconds = sum(r["phases"]["interact"] for r in manifest.rounds)
        per_interaction = seconds / active if active else 0.0
        if baseline is None:
            baseline = per_interaction
        reduction = 100.0 * (1.0 - per_interaction / baseline) if baseline else 0.0
        rows.append(SpeedupRow(int(ports), active, seconds, per_interaction, reduction,
                               engine.peak_in_flight, graph_digest(graph)))
        logger.info(f"P={ports}: {per_interaction * 1000:.1f} ms per interaction ({reduction:.1f}% reduction)")
    return rows
