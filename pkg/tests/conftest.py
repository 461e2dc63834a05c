import numpy as np
import pytest

from graph.bipartite import BipartiteGraph, actor_id, item_id
from graph.scenario import get_scenario

SC_KINDS = ("Creation", "Citation")
TC_KINDS = ("Rating",)
SOC_KINDS = ("Tweet", "Retweet", "Reply", "Follow")


def random_bipartite(kinds, seed, max_actors=6, max_items=10, max_edges=30, creators=True):
    """Small random graph over `kinds`; item creators drawn at random when `creators`."""
    rng = np.random.default_rng(seed)
    graph = BipartiteGraph(kinds)
    n_actors = int(rng.integers(1, max_actors + 1))
    n_items = int(rng.integers(1, max_items + 1))
    for a in range(n_actors):
        graph.add_actor(f"actor {a}", 0)
    for _ in range(n_items):
        creator = actor_id(rng.integers(n_actors)) if creators and rng.random() < 0.5 else None
        graph.add_item({}, creator, 0)
    for _ in range(int(rng.integers(0, max_edges + 1))):
        graph.add_edge(actor_id(rng.integers(n_actors)), item_id(rng.integers(n_items)),
                       kinds[int(rng.integers(len(kinds)))], int(rng.integers(0, 3)))
    return graph


@pytest.fixture
def sc_spec():
    return get_scenario("SC")


@pytest.fixture
def soc_spec():
    return get_scenario("SoC")


@pytest.fixture
def tc_spec():
    return get_scenario("TC")


@pytest.fixture
def citation_graph():
    """a0 writes i0 (round 0); a1 writes i1 citing i0 (round 1); a2 writes i2 citing i0 and i1 (round 2)."""
    graph = BipartiteGraph(SC_KINDS)
    for a in range(3):
        graph.add_actor(f"author {a}", 0)
    for ordinal, round in enumerate((0, 1, 2)):
        graph.add_item({"title": f"paper {ordinal}"}, actor_id(ordinal), round)
        graph.add_edge(actor_id(ordinal), item_id(ordinal), "Creation", round)
    graph.add_edge(actor_id(1), item_id(0), "Citation", 1)
    graph.add_edge(actor_id(2), item_id(0), "Citation", 2)
    graph.add_edge(actor_id(2), item_id(1), "Citation", 2)
    graph.current_round = 2
    return graph
