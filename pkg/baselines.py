import logging
from dataclasses import dataclass

import networkx as nx

from errors import InvalidParams
from graph.folding import FoldedGraph, save_folded

logger = logging.getLogger(__name__)

ER = "ER"
BA = "BA"
WS = "WS"
KINDS = (ER, BA, WS)


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    n: int
    kbar: float
    p_rewire: float = 0.1
    seed: int = 0

    @property
    def p(self):
        return self.kbar / (self.n - 1)

    @property
    def m(self):
        return max(1, int(round(self.kbar / 2)))

    @property
    def ring_degree(self):
        # linking nodes are taken as kbar x 2, which doubles the average degree
        return int(round(self.kbar * 2))


def _to_folded(G, kind, seed):
    nodes = sorted(G.nodes())
    edges = sorted((min(u, v), max(u, v)) for u, v in G.edges() if u != v)
    return FoldedGraph(f"{kind}-{seed}", False, nodes, edges)


def generate(spec):
    """Seeded ER / BA / WS graph matched to `spec.n` nodes and average degree `spec.kbar`."""
    if spec.kind not in KINDS:
        raise InvalidParams(f"unknown baseline kind '{spec.kind}', expected one of {KINDS}")
    if spec.n < 2 or spec.kbar < 0:
        raise InvalidParams(f"baseline needs n >= 2 and kbar >= 0, got n={spec.n}, kbar={spec.kbar}")

    if spec.kind == ER:
        if spec.p > 1:
            raise InvalidParams(f"kbar={spec.kbar} is too large for n={spec.n}")
        G = nx.fast_gnp_random_graph(spec.n, spec.p, seed=spec.seed)
    elif spec.kind == BA:
        core = max(spec.m, 2)
        if spec.n <= core:
            raise InvalidParams(f"BA with m={spec.m} needs n > {core}, got {spec.n}")
        G = nx.barabasi_albert_graph(spec.n, spec.m, seed=spec.seed, initial_graph=nx.complete_graph(core))
    else:
        if not 0.0 <= spec.p_rewire <= 1.0:
            raise InvalidParams(f"p_rewire must lie in [0, 1], got {spec.p_rewire}")
        if spec.ring_degree >= spec.n:
            raise InvalidParams(f"ring degree {spec.ring_degree} must be below n={spec.n}")
        G = nx.watts_strogatz_graph(spec.n, spec.ring_degree, spec.p_rewire, seed=spec.seed)
    return _to_folded(G, spec.kind, spec.seed)


def save_baseline(folded, spec, path):
    save_folded(folded, path, header=f"# baseline={spec.kind} directed=false n={spec.n} kbar={spec.kbar}")
