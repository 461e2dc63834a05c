import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from agents.memory import AgentMemory, MemoryRecord
from agents.policy import DecisionContext, HeuristicPolicy
from agents.profiles import AgentProfile
from errors import ConfigError
from graph.bipartite import CORE, BipartiteGraph, actor_id, item_id
from graph.scenario import SYNTHETIC, load_seed, synthesize_item_attrs
from sim_engine import merge_deltas
from srag.encoder import Encoder, HashingEncoder, hash_embed, tokenize
from srag.interaction import ActorTurn, SragConfig, build_round_context, retrieve, run_round
from srag.rerank import PreferenceContext, rerank_coarse, rerank_fine
from srag.retrieval import Observation, VectorIndex, assemble_observation, index_items, recall


class TableEncoder(Encoder):
    """Looks query vectors up by name."""

    def __init__(self, table):
        self.table = table
        self.dim = len(next(iter(table.values())))

    def encode(self, text):
        return self.table[text]


def _unit_rows(rng, n, d):
    rows = rng.normal(size=(n, d))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def test_recall_equals_exhaustive_cosine_ranking():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        n = int(rng.integers(1, 501))
        vectors = _unit_rows(rng, n, 64)
        # duplicated rows force ties that only the ordinal can break
        duplicates = rng.integers(n, size=n // 10)
        vectors[rng.integers(n, size=len(duplicates))] = vectors[duplicates]
        index = VectorIndex(64)
        index.add(list(range(n)), [0] * n, vectors, [""] * n)

        query = _unit_rows(rng, 1, 64)[0]
        n_r = int(rng.integers(1, 40))
        got = recall(index, "q", n_r, TableEncoder({"q": query}))

        cosines = np.round(vectors @ query, 12)
        scored = [(-float(cosines[o]), o) for o in range(n)]
        expected = [o for _, o in sorted(scored)[:n_r]]
        assert got == expected, f"trial {trial}"


def test_recall_edge_cases():
    encoder = HashingEncoder(16)
    index = VectorIndex(16)
    assert recall(index, "anything", 3, encoder) == []
    index.add([0, 1], [0, 0], encoder.encode_many(["graph mining", "graph mining"]), ["a", "b"])
    assert recall(index, "graph mining", 5, encoder) == [0, 1]
    with pytest.raises(ValueError):
        recall(index, "x", 0, encoder)


def test_hash_embeddings_are_unit_vectors():
    assert tokenize("Graph-Mining, 2024!") == ["graph", "mining", "2024"]
    for text in ("", "a b c", "same same"):
        assert np.isclose(np.linalg.norm(hash_embed(text, 32)), 1.0)
    assert np.array_equal(hash_embed("deep nets", 64), hash_embed("Deep NETS", 64))


def test_coarse_rerank_is_a_stable_partition():
    assert rerank_coarse([5, 1, 4, 2, 3], {1: True, 3: True, 5: False}) == [1, 3, 5, 4, 2]


def test_fine_rerank_counts_satisfied_filters():
    prefs = PreferenceContext(topics=frozenset({"ai"}), followees=frozenset({7}), friends=frozenset(),
                              item_topics={0: ["AI"], 1: ["security"], 2: ["AI"], 3: []},
                              item_creators={0: 9, 1: 7, 2: 7, 3: None})
    results = [3, 1, 0, 2]
    assert rerank_fine(results, prefs, ("topic", "follow"), 0) == results
    assert rerank_fine(results, prefs, ("topic", "follow"), 1) == [0, 2, 3, 1]
    assert rerank_fine(results, prefs, ("topic", "follow"), 2) == [2, 1, 0, 3]
    # the coarse partition wins over preference scores
    core = {3: True, 1: True}
    assert rerank_fine(results, prefs, ("topic", "follow"), 2, core) == [1, 3, 2, 0]
    with pytest.raises(ConfigError):
        rerank_fine(results, prefs, ("topic",), 2)
    with pytest.raises(ConfigError):
        rerank_fine(results, prefs, ("colour",), 1)


def test_index_reuses_rows_without_edge_features(soc_spec, sc_spec):
    encoder = HashingEncoder(32)
    graph = load_seed(SYNTHETIC, soc_spec, actors=3, items=6, edges=0, seed=0)
    first = index_items(graph.snapshot_items(1), encoder, soc_spec)
    graph.add_item({"user": "x", "tweet": "new words", "topic": "music"}, None, 1)
    second = index_items(graph.snapshot_items(2), encoder, soc_spec, previous=first)
    fresh = index_items(graph.snapshot_items(2), encoder, soc_spec)
    assert np.array_equal(second.matrix, fresh.matrix)
    assert second.ordinals.tolist() == list(range(7))
    assert second.texts[:6] == first.texts


def test_observation_deduplicates_in_first_seen_order(soc_spec):
    graph = load_seed(SYNTHETIC, soc_spec, actors=2, items=5, edges=0, seed=0)
    snapshot = graph.snapshot_items(1)
    index = index_items(snapshot, HashingEncoder(16), soc_spec)
    observation = assemble_observation([("a", [3, 1]), ("b", [1, 4, 3])], index, snapshot)
    assert observation.items == [3, 1, 4]
    assert observation.attrs[4] == graph.items[4].attrs
    assert observation.texts[0] == index.texts[3]


def test_round_context_reads_follows_and_core_creators():
    graph = BipartiteGraph(("Tweet", "Retweet", "Reply", "Follow"))
    for a in range(3):
        graph.add_actor(f"user {a}", 0)
    for a in range(3):
        graph.add_item({"user": f"user {a}", "tweet": f"t{a}", "topic": "music"}, actor_id(a), 0)
    graph.add_edge(actor_id(0), item_id(1), "Follow", 0)
    graph.add_edge(actor_id(1), item_id(0), "Follow", 0)
    graph.add_edge(actor_id(2), item_id(0), "Follow", 0)
    graph.actors[1].core_label = CORE
    from graph.scenario import get_scenario
    spec = get_scenario("SoC")
    snapshot = graph.snapshot_items(1)
    ctx = build_round_context(graph, 1, snapshot, None, None, spec, SragConfig())
    assert ctx.followees == {0: frozenset({1}), 1: frozenset({0}), 2: frozenset({0})}
    assert ctx.friends == {0: frozenset({1}), 1: frozenset({0}), 2: frozenset()}
    assert ctx.core_flags == {0: False, 1: True, 2: False}


def _turns(graph):
    turns = []
    for actor in graph.actors:
        profile = AgentProfile.from_attrs(actor.attrs)
        turns.append(ActorTurn(actor.id.ordinal, profile, AgentMemory()))
    return turns


@pytest.mark.parametrize("name", ["SC", "TC", "SoC"])
def test_round_is_independent_of_worker_scheduling(name):
    from graph.scenario import get_scenario

    spec = get_scenario(name)
    graph = load_seed(SYNTHETIC, spec, actors=12, items=40, edges=30, seed=5)
    policy = HeuristicPolicy(spec, cite_fraction=0.3, create_probability=spec.create_probability)
    encoder = HashingEncoder(64)
    config = SragConfig(n_r=5, n_f=len(spec.filter_items))
    before = graph.counts()

    serial = run_round(graph, 1, _turns(graph), policy, encoder, config, spec, seed=9)
    with ThreadPoolExecutor(max_workers=4) as pool:
        turns = list(reversed(_turns(graph)))
        parallel = run_round(graph, 1, turns, policy, encoder, config, spec, seed=9, map_fn=pool.map)

    assert graph.counts() == before
    assert [d.actor for d in parallel.deltas] == list(range(12))
    assert [(d.new_item, d.edges) for d in serial.deltas] == [(d.new_item, d.edges) for d in parallel.deltas]
    assert serial.edge_count > 0
    for delta in serial.deltas:
        assert all(o is None or o < 40 for o, _ in delta.edges)


def test_failing_actor_is_skipped(sc_spec):
    class Broken(HeuristicPolicy):
        def decide_actions(self, profile, memory, observation, context):
            if context.actor == 1:
                raise RuntimeError("boom")
            return super().decide_actions(profile, memory, observation, context)

    graph = load_seed(SYNTHETIC, sc_spec, actors=3, items=10, edges=0, seed=1)
    deltas = run_round(graph, 1, _turns(graph), Broken(sc_spec), HashingEncoder(16), SragConfig(n_r=3), sc_spec, 0)
    assert deltas.failed == [1]
    assert deltas.deltas[1].edges == []
    with pytest.raises(ValueError):
        run_round(graph, 0, [], Broken(sc_spec), HashingEncoder(16), SragConfig(), sc_spec, 0)


def _observation(n):
    return Observation(items=list(range(n)), texts=[f"item {o}" for o in range(n)])


def test_heuristic_cites_the_ceiling_of_its_fraction(sc_spec):
    policy = HeuristicPolicy(sc_spec, cite_fraction=0.3, create_probability=1.0)
    profile = AgentProfile("Ann", {"topics": ["AI"]})
    context = DecisionContext(0, 1, np.random.default_rng(3))
    actions = policy.decide_actions(profile, AgentMemory(), _observation(10), context)
    assert actions.targets == [(0, "Citation"), (1, "Citation"), (2, "Citation")]
    assert set(actions.new_item) == set(sc_spec.required_attrs)
    for n in range(0, 26):
        context = DecisionContext(0, 1, np.random.default_rng(n))
        actions = policy.decide_actions(profile, AgentMemory(), _observation(n), context)
        assert len(actions.targets) == math.ceil(round(0.3 * n, 9))


def test_rating_scenario_never_creates(tc_spec):
    policy = HeuristicPolicy(tc_spec, cite_fraction=0.3, create_probability=1.0)
    profile = AgentProfile("Bo", {"genres": ["Drama"]})
    for seed in range(20):
        context = DecisionContext(0, 1, np.random.default_rng(seed))
        actions = policy.decide_actions(profile, AgentMemory(), _observation(10), context)
        assert actions.new_item is None
        assert [kind for _, kind in actions.targets] == ["Rating"] * 3


def test_same_seed_same_actions(soc_spec):
    policy = HeuristicPolicy(soc_spec, cite_fraction=0.5, create_probability=0.5)
    profile = AgentProfile("Kim", {"topics": ["music"]})

    def decide(seed):
        return policy.decide_actions(profile, AgentMemory(), _observation(9),
                                     DecisionContext(4, 2, np.random.default_rng(seed)))

    assert decide(8) == decide(8)
    assert all(kind in soc_spec.interaction_kinds for _, kind in decide(8).targets)


@pytest.mark.parametrize("name", ["SC", "TC", "SoC"])
def test_round_edges_recount_from_observations(name):
    from graph.scenario import get_scenario

    spec = get_scenario(name)
    graph = load_seed(SYNTHETIC, spec, actors=10, items=40, edges=20, seed=2)
    policy = HeuristicPolicy(spec, cite_fraction=0.3, create_probability=spec.create_probability)
    deltas = run_round(graph, 1, _turns(graph), policy, HashingEncoder(64), SragConfig(n_r=6), spec, seed=4)
    expected = sum(math.ceil(round(0.3 * d.observed, 9)) + (d.new_item is not None) for d in deltas.deltas)
    assert deltas.edge_count == expected
    assert all(d.parse_warnings == 0 for d in deltas.deltas)


def test_one_author_writes_and_cites_three(sc_spec):
    graph = sc_spec.new_graph()
    graph.add_actor("name: Ann", 0)
    rng = np.random.default_rng(0)
    for serial in range(10):
        graph.add_item(synthesize_item_attrs(sc_spec, rng, "AI", None, 0, serial), None, 0)
    turn = ActorTurn(0, AgentProfile("Ann", {"topics": ["AI"]}), AgentMemory())
    policy = HeuristicPolicy(sc_spec, cite_fraction=0.3, create_probability=1.0)
    deltas = run_round(graph, 1, [turn], policy, HashingEncoder(32), SragConfig(n_r=10), sc_spec, seed=1)
    assert deltas.deltas[0].observed == 10
    assert len(deltas.new_items) == 1
    assert deltas.edge_count == 4

    merge_deltas(graph, deltas, 1)
    assert graph.counts() == (1, 11, 4)


def test_turn_summary_reaches_the_decision(sc_spec):
    seen = []

    class Recording(HeuristicPolicy):
        def decide_actions(self, profile, memory, observation, context):
            seen.append(memory.summary)
            return super().decide_actions(profile, memory, observation, context)

    graph = load_seed(SYNTHETIC, sc_spec, actors=2, items=8, edges=0, seed=1)
    memory = AgentMemory()
    memory.record(MemoryRecord(0, "Citation", 3, "AI"))
    turns = [ActorTurn(0, AgentProfile("Ann", {"topics": ["AI"]}), memory)]
    deltas = run_round(graph, 1, turns, Recording(sc_spec), HashingEncoder(16), SragConfig(n_r=3), sc_spec, 0)
    assert deltas.deltas[0].summary == "AI x1"
    assert seen == ["AI x1"]
    assert memory.summary == ""


def test_rerank_reorders_but_keeps_the_recall_set(soc_spec):
    graph = load_seed(SYNTHETIC, soc_spec, actors=8, items=60, edges=40, seed=3)
    graph.actors[0].core_label = CORE
    graph.actors[3].core_label = CORE
    encoder = HashingEncoder(32)
    snapshot = graph.snapshot_items(1)
    index = index_items(snapshot, encoder, soc_spec)
    on = build_round_context(graph, 1, snapshot, index, encoder, soc_spec, SragConfig(n_r=8, n_f=3))
    off = build_round_context(graph, 1, snapshot, index, encoder, soc_spec,
                              SragConfig(n_r=8, n_f=3, rerank_enabled=False))
    for turn in _turns(graph):
        queries = ["music", "sports", "travel"]
        ranked = retrieve(on, turn.actor, turn.profile, queries)
        plain = retrieve(off, turn.actor, turn.profile, queries)
        assert set(ranked.items) == set(plain.items)
        for (q1, a), (q2, b) in zip(ranked.per_query, plain.per_query):
            assert q1 == q2 and sorted(a) == sorted(b)
