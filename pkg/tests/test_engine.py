import json

import pytest

from actor_worker import ActorWorkerPool
from errors import ConfigError, DanglingEndpoint
from graph.bipartite import EDGES_FILE, NODES_FILE, BipartiteGraph, actor_id
from run_config import apply_override, resolve_config
from sim_engine import (FOLDS_DIR, MANIFEST_FILE, PROFILES_FILE, SimulationEngine, graph_digest, merge_deltas,
                        run_simulation)
from srag.interaction import ActorDelta, RoundDeltas


def small_graph():
    graph = BipartiteGraph(("Creation", "Citation"))
    for a in range(3):
        graph.add_actor(f"a{a}", 0)
    graph.add_item({"title": "old"}, None, 0)
    return graph


def test_merge_applies_items_before_edges_in_actor_order():
    graph = small_graph()
    deltas = RoundDeltas(1, [
        ActorDelta(2, new_item={"title": "from 2"}, edges=[(None, "Creation"), (0, "Citation")]),
        ActorDelta(0, new_item={"title": "from 0"}, edges=[(None, "Creation")]),
        ActorDelta(1, failed=True),
    ])
    result = merge_deltas(graph, deltas, 1)
    assert result.new_items == [1, 2]
    assert graph.items[1].creator == actor_id(0)
    assert graph.items[2].attrs == {"title": "from 2"}
    assert result.applied == [(0, 1, "Creation"), (2, 2, "Creation"), (2, 0, "Citation")]
    assert result.edges_by_kind == {"Creation": 2, "Citation": 1}
    assert {e.round for e in graph.edges} == {1}
    assert graph.current_round == 1


def test_merge_rejects_targets_outside_the_snapshot():
    graph = small_graph()
    graph.add_item({"title": "this round"}, None, 1)
    with pytest.raises(DanglingEndpoint):
        merge_deltas(graph, RoundDeltas(1, [ActorDelta(0, edges=[(1, "Citation")])]), 1)
    with pytest.raises(DanglingEndpoint):
        merge_deltas(graph, RoundDeltas(1, [ActorDelta(0, edges=[(None, "Creation")])]), 1)
    with pytest.raises(DanglingEndpoint):
        merge_deltas(graph, RoundDeltas(1, [ActorDelta(7)]), 1)
    assert graph.counts() == (3, 2, 0)


def test_creation_cap_drops_late_items_with_their_edges():
    graph = small_graph()
    deltas = RoundDeltas(1, [ActorDelta(a, new_item={"title": f"p{a}"}, edges=[(None, "Creation"), (0, "Citation")])
                             for a in range(3)])
    result = merge_deltas(graph, deltas, 1, creation_cap=2)
    assert result.new_items == [1, 2]
    assert result.dropped_creations == 1
    assert (2, 0, "Citation") in result.applied
    assert all(kind != "Creation" or actor != 2 for actor, _, kind in result.applied)


def test_worker_pool_keeps_order_and_bounds_concurrency():
    with ActorWorkerPool(3) as pool:
        assert pool.map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    assert 1 <= pool.peak_in_flight <= 3
    with pytest.raises(RuntimeError):
        pool.map(abs, [1])
    with pytest.raises(ValueError):
        ActorWorkerPool(0)


def soc_config(tmp_path, ports=1, **extra):
    raw = {"scenario": "SoC", "rounds": 3, "ports": ports, "rng_seed": 11,
           "seed_size": {"actors": 12, "items": 30, "edges": 20}, "profiles_per_round": 6,
           "out_dir": str(tmp_path)}
    raw.update(extra)
    return resolve_config(raw)


def test_run_is_identical_across_worker_counts(tmp_path):
    one, eight = tmp_path / "p1", tmp_path / "p8"
    run_simulation(soc_config(one, ports=1), str(one))
    run_simulation(soc_config(eight, ports=8), str(eight))
    for name in (NODES_FILE, EDGES_FILE):
        assert (one / name).read_bytes() == (eight / name).read_bytes()
    manifest = json.loads((eight / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["config"]["ports"] == 8
    assert (one / PROFILES_FILE).exists()
    assert sorted(p.name for p in (one / FOLDS_DIR).iterdir()) == ["Action.edges.tsv", "Follow.edges.tsv",
                                                                   "Friend.edges.tsv"]


def test_round_reports_add_up_to_growth(tmp_path):
    graph, manifest = run_simulation(soc_config(tmp_path, termination={"kind": "rounds", "count": 3}))
    start, end = manifest.initial_counts, manifest.final_counts
    rounds = manifest.rounds
    assert len(rounds) == 3
    assert sum(r["new_actors"] for r in rounds) == end["actors"] - start["actors"]
    assert sum(r["new_items"] for r in rounds) == end["items"] - start["items"]
    assert sum(sum(r["new_edges"].values()) for r in rounds) == end["edges"] - start["edges"]
    sizes = [graph.until_round(r).counts() for r in range(4)]
    assert all(a <= b for earlier, later in zip(sizes, sizes[1:]) for a, b in zip(earlier, later))
    assert all(r["active"] >= 0 and r["failed_actors"] == 0 for r in rounds)
    assert manifest.termination_cause == "termination"


def test_rounds_cap_without_termination(tmp_path):
    config = soc_config(tmp_path, rounds=2, termination={"kind": "rounds", "count": 10})
    _, manifest = run_simulation(config)
    assert manifest.termination_cause == "rounds_cap"
    assert len(manifest.rounds) == 2


def sc_llm_config(tmp_path, **backend):
    raw = {"scenario": "SC", "rounds": 2, "ports": 4, "rng_seed": 5,
           "seed_size": {"actors": 5, "items": 12, "edges": 10}, "profiles_per_round": 1,
           "sc": {"active_agents": 5}, "policy": {"kind": "llm"}, "backend": {"kind": "mock", **backend},
           "out_dir": str(tmp_path)}
    return resolve_config(raw)


def test_llm_session_replays_to_the_same_graph(tmp_path):
    recorded, replayed = tmp_path / "recorded", tmp_path / "replayed"
    _, manifest = run_simulation(sc_llm_config(recorded), str(recorded))
    assert sum(r["llm_calls"] for r in manifest.rounds) > 0

    log = recorded / "exchanges.jsonl"
    config = sc_llm_config(replayed, kind="replay", replay_path=str(log))
    run_simulation(config, str(replayed))
    for name in (NODES_FILE, EDGES_FILE):
        assert (recorded / name).read_bytes() == (replayed / name).read_bytes()


def test_reflections_are_stored_on_the_coordinator_memory(tmp_path):
    engine = SimulationEngine(sc_llm_config(tmp_path))
    try:
        engine.run()
    finally:
        engine.close()
    reflected = {a: m for a, m in engine.memories.items() if m.last_reflection_round > 0}
    assert reflected
    assert all(m.summary for m in reflected.values())
    assert all(m.digest().startswith(m.summary) for m in reflected.values())
    assert max(m.last_reflection_round for m in reflected.values()) == 2
    assert all(m.summary == "" for a, m in engine.memories.items() if a not in reflected)


def test_social_memories_record_the_tweet(tmp_path):
    engine = SimulationEngine(soc_config(tmp_path))
    try:
        graph, _ = engine.run()
    finally:
        engine.close()
    records = [r for m in engine.memories.values() for r in m.action_log]
    assert records
    assert all(r.text == graph.items[r.item].attrs["tweet"] for r in records)


def test_engine_builds_no_backend_for_heuristic_runs(tmp_path):
    engine = SimulationEngine(soc_config(tmp_path))
    try:
        assert engine.backend is None
        graph, _ = engine.run()
    finally:
        engine.close()
    assert graph_digest(graph) == graph_digest(run_simulation(soc_config(tmp_path))[0])


def test_config_layers_and_validation():
    raw = {}
    apply_override(raw, "srag.n_r=4")
    apply_override(raw, "activation.hub_rate=0.1")
    apply_override(raw, "scenario=TC")
    config = resolve_config(raw)
    assert config.srag.n_r == 4
    assert config.activation.hub_rate == 0.1
    assert config.activation.mode == "all"
    assert resolve_config({"srag": {"hub_rate": 0.05}}).activation.hub_rate == 0.05
    assert resolve_config({"srag": {"hub_rate": 0.05}, "activation": {"hub_rate": 0.3}}).activation.hub_rate == 0.3
    assert config.profiles_per_round == 25
    for bad in ({"ports": 0}, {"srag": {"n_f": 3}}, {"termination": {"kind": "edges"}},
                {"policy": {"kind": "oracle"}}, {"scenario": "XX"}):
        with pytest.raises(ConfigError):
            resolve_config(bad)
    with pytest.raises(ConfigError):
        apply_override({}, "no-equals-sign")
