import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np

from errors import ParseError, SpecScenarioMismatch
from graph.bipartite import ACTOR, ITEM, NodeId

logger = logging.getLogger(__name__)

CREATION_KINDS = ("Creation", "Tweet")
SOCIAL_KINDS = ("Retweet", "Reply", "Follow")


@dataclass(frozen=True)
class FoldSpec:
    name: str
    node_kind: str          # "actor" | "item" | "both"
    directed: bool
    edge_kinds: tuple       # bipartite edge kinds the rule reads
    rule: str


FOLD_SPECS = {
    spec.name: spec for spec in (
        FoldSpec("PaperCitation", ITEM, True, ("Creation", "Citation"),
                 "p -> q when the actor creating p cites q in the same interaction"),
        FoldSpec("BibCoupling", ITEM, False, ("Creation", "Citation"),
                 "p - q when p and q cite a common reference"),
        FoldSpec("CoCitation", ITEM, False, ("Creation", "Citation"),
                 "q1 - q2 when one paper cites both"),
        FoldSpec("AuthorCitation", ACTOR, True, ("Creation", "Citation"),
                 "a -> b when a paper of a cites a paper of b"),
        FoldSpec("CoAuthorship", ACTOR, False, ("Creation",),
                 "a - b when both created the same item"),
        FoldSpec("MovieRating", "both", False, ("Rating",),
                 "rating edges kept as they are"),
        FoldSpec("UserProjection", ACTOR, False, ("Rating",),
                 "a - b when both rated a common movie"),
        FoldSpec("Action", ACTOR, True, ("Tweet",) + SOCIAL_KINDS,
                 "a -> b when a retweets, replies to or follows on a tweet of b"),
        FoldSpec("Follow", ACTOR, True, ("Tweet", "Follow"),
                 "a -> b when a follows on a tweet of b"),
        FoldSpec("Friend", ACTOR, False, ("Tweet", "Follow"),
                 "a - b when a and b follow each other"),
    )
}


@dataclass
class FoldedGraph:
    name: str
    directed: bool
    node_ids: list
    edges: list
    attrs: dict = field(default_factory=dict)

    def number_of_nodes(self):
        return len(self.node_ids)

    def number_of_edges(self):
        return len(self.edges)

    def to_networkx(self):
        G = nx.DiGraph() if self.directed else nx.Graph()
        G.add_nodes_from(self.node_ids)
        G.add_edges_from(self.edges)
        return G

    def to_undirected(self):
        G = nx.Graph()
        G.add_nodes_from(self.node_ids)
        G.add_edges_from(self.edges)
        return G


def item_authors(graph):
    """Actors credited with each item: creation-kind edges plus the recorded creator."""
    authors = defaultdict(set)
    for item in graph.items:
        if item.creator is not None:
            authors[item.id].add(item.creator)
    for kind in CREATION_KINDS:
        for edge in graph.edges_of_kind(kind):
            authors[edge.item].add(edge.actor)
    return {item: sorted(actors) for item, actors in authors.items()}


def _node_attrs(graph, node_id):
    if node_id.kind == ACTOR:
        actor = graph.actors[node_id.ordinal]
        return {"profile": actor.profile_text, **actor.attrs}
    return dict(graph.items[node_id.ordinal].attrs)


def _paper_citation_pairs(graph):
    created = defaultdict(list)
    cited = defaultdict(list)
    for edge in graph.edges_of_kind("Creation"):
        created[(edge.actor, edge.round)].append(edge.item)
    for edge in graph.edges_of_kind("Citation"):
        cited[(edge.actor, edge.round)].append(edge.item)
    return [(p, q) for key, papers in created.items() for p in papers for q in cited.get(key, ()) if p != q]


def _pairs_within(groups):
    for members in groups:
        for u, v in combinations(sorted(set(members)), 2):
            yield u, v


def _fold_paper_citation(graph):
    return _paper_citation_pairs(graph)


def _fold_bib_coupling(graph):
    citers = defaultdict(list)
    for p, q in _paper_citation_pairs(graph):
        citers[q].append(p)
    return list(_pairs_within(citers.values()))


def _fold_co_citation(graph):
    references = defaultdict(list)
    for p, q in _paper_citation_pairs(graph):
        references[p].append(q)
    return list(_pairs_within(references.values()))


def _fold_author_citation(graph):
    authors = item_authors(graph)
    return [(a, b) for p, q in _paper_citation_pairs(graph)
            for a in authors.get(p, ()) for b in authors.get(q, ())]


def _fold_co_authorship(graph):
    return list(_pairs_within(item_authors(graph).values()))


def _fold_movie_rating(graph):
    return [(edge.actor, edge.item) for edge in graph.edges_of_kind("Rating")]


def _fold_user_projection(graph):
    raters = defaultdict(list)
    for edge in graph.edges_of_kind("Rating"):
        raters[edge.item].append(edge.actor)
    return list(_pairs_within(raters.values()))


def _social_pairs(graph, kinds):
    authors = item_authors(graph)
    pairs = []
    for kind in kinds:
        for edge in graph.edges_of_kind(kind):
            pairs.extend((edge.actor, b) for b in authors.get(edge.item, ()))
    return pairs


def _fold_action(graph):
    return _social_pairs(graph, SOCIAL_KINDS)


def _fold_follow(graph):
    return _social_pairs(graph, ("Follow",))


def _fold_friend(graph):
    follows = {(a, b) for a, b in _social_pairs(graph, ("Follow",)) if a != b}
    return [(a, b) for a, b in follows if (b, a) in follows and a < b]


_FOLDERS = {
    "PaperCitation": _fold_paper_citation,
    "BibCoupling": _fold_bib_coupling,
    "CoCitation": _fold_co_citation,
    "AuthorCitation": _fold_author_citation,
    "CoAuthorship": _fold_co_authorship,
    "MovieRating": _fold_movie_rating,
    "UserProjection": _fold_user_projection,
    "Action": _fold_action,
    "Follow": _fold_follow,
    "Friend": _fold_friend,
}


def get_fold_spec(spec):
    if isinstance(spec, FoldSpec):
        return spec
    try:
        return FOLD_SPECS[spec]
    except KeyError:
        raise SpecScenarioMismatch(f"unknown fold '{spec}', expected one of {list(FOLD_SPECS)}")


def fold(graph, spec):
    spec = get_fold_spec(spec)
    # authorship may also come from item.creator, so creation kinds only count when alone
    required = [k for k in spec.edge_kinds if k not in CREATION_KINDS] or list(spec.edge_kinds)
    missing = [kind for kind in required if kind not in graph.action_kinds]
    if missing:
        raise SpecScenarioMismatch(f"fold {spec.name} needs edge kinds {missing} "
                                   f"absent from {list(graph.action_kinds)}")

    actor_ids = [actor.id for actor in graph.actors]
    item_ids = [item.id for item in graph.items]
    if spec.node_kind == ACTOR:
        node_ids = actor_ids
    elif spec.node_kind == ITEM:
        node_ids = item_ids
    else:
        node_ids = actor_ids + item_ids
    index = {node: i for i, node in enumerate(node_ids)}

    unique = set()
    for u, v in _FOLDERS[spec.name](graph):
        if u == v:
            continue
        if not spec.directed and index[u] > index[v]:
            u, v = v, u
        unique.add((u, v))
    edges = sorted(unique, key=lambda e: (index[e[0]], index[e[1]]))
    attrs = {node: _node_attrs(graph, node) for node in node_ids}
    return FoldedGraph(spec.name, spec.directed, node_ids, edges, attrs)


def degrees(folded, mode="total"):
    index = {node: i for i, node in enumerate(folded.node_ids)}
    out_deg = np.zeros(len(index), dtype=np.int64)
    in_deg = np.zeros(len(index), dtype=np.int64)
    for u, v in folded.edges:
        out_deg[index[u]] += 1
        in_deg[index[v]] += 1
    if not folded.directed or mode == "total":
        return out_deg + in_deg
    if mode == "in":
        return in_deg
    if mode == "out":
        return out_deg
    raise ValueError(f"unknown degree mode '{mode}'")


def _label(node):
    return str(node)


def _parse_label(token):
    if token[:1] == "a" and token[1:].isdigit():
        return NodeId(ACTOR, int(token[1:]))
    if token[:1] == "i" and token[1:].isdigit():
        return NodeId(ITEM, int(token[1:]))
    return int(token) if token.lstrip("-").isdigit() else token


def save_folded(folded, path, header=None):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    header = header or f"# fold={folded.name} directed={str(folded.directed).lower()}"
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for u, v in folded.edges:
            f.write(f"{_label(u)}\t{_label(v)}\n")
    logger.info(f"Folded graph {folded.name} written to {path} ({len(folded.edges)} edges)")


def load_folded(path, name=None, directed=None):
    """Read a folded or baseline edge file; nodes are the edge endpoints in first-seen order."""
    header = {}
    nodes = {}
    edges = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line.lstrip("#").split():
                    key, _, value = token.partition("=")
                    header[key] = value
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(f"{path}: expected two columns", line=line_no)
            u, v = _parse_label(parts[0]), _parse_label(parts[1])
            nodes.setdefault(u, None)
            nodes.setdefault(v, None)
            edges.append((u, v))
    if directed is None:
        directed = header.get("directed", "false") == "true"
    name = name or header.get("fold") or header.get("baseline") or os.path.basename(path)
    unique = list(dict.fromkeys(edges))
    return FoldedGraph(name, directed, list(nodes), unique)
