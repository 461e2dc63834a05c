import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Optional

from errors import DanglingEndpoint, MissingRequiredAttr, ParseError, UnknownActionKind

logger = logging.getLogger(__name__)

ACTOR = "actor"
ITEM = "item"

CORE = "Core"
REGULAR = "Regular"

ALL_ACTION_KINDS = ("Creation", "Citation", "Rating", "Tweet", "Retweet", "Reply", "Follow")

NODES_FILE = "nodes.jsonl"
EDGES_FILE = "edges.tsv"


@dataclass(frozen=True, order=True)
class NodeId:
    kind: str
    ordinal: int

    def __str__(self):
        return f"{self.kind[0]}{self.ordinal}"


def actor_id(ordinal):
    return NodeId(ACTOR, int(ordinal))


def item_id(ordinal):
    return NodeId(ITEM, int(ordinal))


@dataclass
class ActorNode:
    id: NodeId
    profile_text: str
    core_label: str = REGULAR
    created_round: int = 0
    attrs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ItemNode:
    id: NodeId
    attrs: dict
    creator: Optional[NodeId] = None
    created_round: int = 0


@dataclass(frozen=True)
class TypedEdge:
    actor: NodeId
    item: NodeId
    kind: str
    round: int


class ItemSnapshot:
    """Read-only view of the items visible to round k (created in rounds <= k-1),
    together with the edges those items had by the end of round k-1."""

    def __init__(self, round_k, items, item_edges):
        self.round = round_k
        self.items = tuple(items)
        self._by_ordinal = MappingProxyType({item.id.ordinal: item for item in self.items})
        self._edges = MappingProxyType({o: tuple(e) for o, e in item_edges.items()})

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, ordinal):
        return ordinal in self._by_ordinal

    def get(self, ordinal):
        return self._by_ordinal[ordinal]

    def edges_of(self, ordinal):
        return self._edges.get(ordinal, ())


class BipartiteGraph:
    def __init__(self, action_kinds=ALL_ACTION_KINDS, required_attrs=()):
        self.action_kinds = tuple(action_kinds)
        self.required_attrs = tuple(required_attrs)
        self.actors = []
        self.items = []
        self.edges = []
        self.by_actor = defaultdict(list)
        self.by_item = defaultdict(list)
        self.by_kind = defaultdict(list)
        self.current_round = 0

    def add_actor(self, profile_text, round, core_label=REGULAR, attrs=None):
        if round < 0:
            raise ValueError(f"round must be >= 0, got {round}")
        node_id = actor_id(len(self.actors))
        self.actors.append(ActorNode(node_id, profile_text, core_label, round, dict(attrs or {})))
        return node_id

    def add_item(self, attrs, creator, round):
        if round < 0:
            raise ValueError(f"round must be >= 0, got {round}")
        for name in self.required_attrs:
            value = attrs.get(name)
            if value is None or not str(value).strip():
                raise MissingRequiredAttr(f"item attribute '{name}' is required")
        if creator is not None and not self.has_actor(creator):
            raise DanglingEndpoint(f"creator {creator} does not exist")
        node_id = item_id(len(self.items))
        self.items.append(ItemNode(node_id, dict(attrs), creator, round))
        return node_id

    def add_edge(self, actor, item, kind, round):
        if kind not in self.action_kinds:
            raise UnknownActionKind(f"'{kind}' is not one of {list(self.action_kinds)}")
        if not self.has_actor(actor):
            raise DanglingEndpoint(f"actor {actor} does not exist")
        if not self.has_item(item):
            raise DanglingEndpoint(f"item {item} does not exist")
        index = len(self.edges)
        self.edges.append(TypedEdge(actor, item, kind, round))
        self.by_actor[actor.ordinal].append(index)
        self.by_item[item.ordinal].append(index)
        self.by_kind[kind].append(index)

    def has_actor(self, node_id):
        return node_id.kind == ACTOR and 0 <= node_id.ordinal < len(self.actors)

    def has_item(self, node_id):
        return node_id.kind == ITEM and 0 <= node_id.ordinal < len(self.items)

    def edges_of_actor(self, ordinal):
        return [self.edges[i] for i in self.by_actor.get(ordinal, ())]

    def edges_of_item(self, ordinal):
        return [self.edges[i] for i in self.by_item.get(ordinal, ())]

    def edges_of_kind(self, kind):
        return [self.edges[i] for i in self.by_kind.get(kind, ())]

    def counts(self):
        return len(self.actors), len(self.items), len(self.edges)

    def snapshot_items(self, k):
        if k < 1:
            raise ValueError(f"snapshot round must be >= 1, got {k}")
        visible = [item for item in self.items if item.created_round <= k - 1]
        item_edges = {}
        for item in visible:
            item_edges[item.id.ordinal] = [
                edge for edge in self.edges_of_item(item.id.ordinal) if edge.round <= k - 1
            ]
        return ItemSnapshot(k, visible, item_edges)

    def until_round(self, r):
        """Copy of the graph as it stood at the end of round r."""
        past = BipartiteGraph(self.action_kinds, self.required_attrs)
        past.actors = [a for a in self.actors if a.created_round <= r]
        past.items = [i for i in self.items if i.created_round <= r]
        for edge in self.edges:
            if edge.round <= r:
                past.add_edge(edge.actor, edge.item, edge.kind, edge.round)
        past.current_round = min(r, self.current_round)
        return past


def save_graph(graph, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    nodes_path = os.path.join(out_dir, NODES_FILE)
    with open(nodes_path, "w", encoding="utf-8") as f:
        for actor in graph.actors:
            attrs = {"profile": actor.profile_text, **actor.attrs}
            record = {"id": actor.id.ordinal, "kind": ACTOR, "attrs": attrs, "creator": None,
                      "round": actor.created_round, "core": actor.core_label}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
        for item in graph.items:
            creator = item.creator.ordinal if item.creator is not None else None
            record = {"id": item.id.ordinal, "kind": ITEM, "attrs": item.attrs, "creator": creator,
                      "round": item.created_round, "core": None}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    edges_path = os.path.join(out_dir, EDGES_FILE)
    with open(edges_path, "w", encoding="utf-8") as f:
        for edge in graph.edges:
            f.write(f"{edge.actor.ordinal}\t{edge.item.ordinal}\t{edge.kind}\t{edge.round}\n")
    logger.info(f"Graph written to {out_dir} ({len(graph.actors)} actors, "
                f"{len(graph.items)} items, {len(graph.edges)} edges)")


def _read_nodes(path):
    actors, items = [], []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                kind = record["kind"]
                entry = (int(record["id"]), record.get("attrs") or {}, record.get("creator"),
                         int(record.get("round", 0)), record.get("core"))
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"{path}: {e}", line=line_no)
            if kind == ACTOR:
                actors.append((line_no, entry))
            elif kind == ITEM:
                items.append((line_no, entry))
            else:
                raise ParseError(f"{path}: unknown node kind '{kind}'", line=line_no)
    return actors, items


def load_graph(path, action_kinds=None, required_attrs=()):
    """Read a nodes.jsonl + edges.tsv pair from a directory."""
    actors, items = _read_nodes(os.path.join(path, NODES_FILE))
    edge_rows = []
    edges_path = os.path.join(path, EDGES_FILE)
    if os.path.exists(edges_path):
        with open(edges_path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 4:
                    raise ParseError(f"{edges_path}: expected 4 columns, got {len(parts)}", line=line_no)
                try:
                    edge_rows.append((line_no, int(parts[0]), int(parts[1]), parts[2], int(parts[3])))
                except ValueError as e:
                    raise ParseError(f"{edges_path}: {e}", line=line_no)

    if action_kinds is None:
        seen = {row[3] for row in edge_rows}
        action_kinds = [k for k in ALL_ACTION_KINDS if k in seen] + sorted(seen - set(ALL_ACTION_KINDS))
    graph = BipartiteGraph(action_kinds, required_attrs)

    for expected, (line_no, (ordinal, attrs, _, round, core)) in enumerate(sorted(actors, key=lambda a: a[1][0])):
        if ordinal != expected:
            raise ParseError(f"actor ordinals are not dense (expected {expected}, found {ordinal})", line=line_no)
        attrs = dict(attrs)
        profile = str(attrs.pop("profile", "")) or f"actor {ordinal}"
        graph.add_actor(profile, round, core or REGULAR, attrs)
    for expected, (line_no, (ordinal, attrs, creator, round, _)) in enumerate(sorted(items, key=lambda i: i[1][0])):
        if ordinal != expected:
            raise ParseError(f"item ordinals are not dense (expected {expected}, found {ordinal})", line=line_no)
        graph.add_item(attrs, actor_id(creator) if creator is not None else None, round)
    for line_no, a, i, kind, round in edge_rows:
        try:
            graph.add_edge(actor_id(a), item_id(i), kind, round)
        except DanglingEndpoint as e:
            raise DanglingEndpoint(f"{edges_path} line {line_no}: {e}")

    rounds = [a.created_round for a in graph.actors] + [i.created_round for i in graph.items]
    rounds += [e.round for e in graph.edges]
    graph.current_round = max(rounds, default=0)
    logger.info(f"Loaded graph from {path}: {len(graph.actors)} actors, {len(graph.items)} items, "
                f"{len(graph.edges)} edges")
    return graph
