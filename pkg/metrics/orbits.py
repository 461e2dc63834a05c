"""Per-node counts of the 15 orbits of connected graphlets with 2 to 4 nodes.

Orbit numbering: 0 degree; 1-2 path on 3 nodes (end, middle); 3 triangle; 4-5 path on 4 nodes
(end, middle); 6-7 star (leaf, centre); 8 4-cycle; 9-11 paw (pendant, degree-2, degree-3);
12-13 diamond (degree-2, degree-3); 14 4-clique."""

import networkx as nx
import numpy as np

N_ORBITS = 15

_FOUR_NODE = {
    (1, 1, 2, 2): {1: 4, 2: 5},
    (1, 1, 1, 3): {1: 6, 3: 7},
    (2, 2, 2, 2): {2: 8},
    (1, 2, 2, 3): {1: 9, 2: 10, 3: 11},
    (2, 2, 3, 3): {2: 12, 3: 13},
    (3, 3, 3, 3): {3: 14},
}


def connected_subsets(G, size, order):
    """Every connected induced node set of `size` exactly once (ESU enumeration)."""

    def extend(subset, frontier, neighbourhood, root):
        if len(subset) == size:
            yield subset
            return
        frontier = sorted(frontier, key=order.__getitem__)
        while frontier:
            w = frontier.pop(0)
            exclusive = [u for u in G[w] if order[u] > order[root] and u not in neighbourhood]
            yield from extend(subset + [w], frontier + exclusive,
                              neighbourhood | set(G[w]) | {w}, root)

    for v in G:
        start = [u for u in G[v] if order[u] > order[v]]
        yield from extend([v], start, set(G[v]) | {v}, v)


def _induced_degrees(G, nodes):
    members = set(nodes)
    return {v: sum(1 for u in G[v] if u in members) for v in nodes}


def count_orbits(G):
    """(n, 15) array of orbit counts, rows in `G.nodes()` order."""
    G = nx.Graph(G)
    G.remove_edges_from(nx.selfloop_edges(G))
    nodes = list(G.nodes())
    order = {v: i for i, v in enumerate(nodes)}
    counts = np.zeros((len(nodes), N_ORBITS), dtype=np.int64)
    for v in nodes:
        counts[order[v], 0] = G.degree(v)

    for subset in connected_subsets(G, 3, order):
        degrees = _induced_degrees(G, subset)
        triangle = sum(degrees.values()) == 6
        for v, d in degrees.items():
            counts[order[v], 3 if triangle else (2 if d == 2 else 1)] += 1

    for subset in connected_subsets(G, 4, order):
        degrees = _induced_degrees(G, subset)
        orbit_of = _FOUR_NODE[tuple(sorted(degrees.values()))]
        for v, d in degrees.items():
            counts[order[v], orbit_of[d]] += 1
    return counts
