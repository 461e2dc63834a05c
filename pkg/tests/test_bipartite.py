import pytest

from errors import DanglingEndpoint, MissingRequiredAttr, ParseError, UnknownActionKind
from graph.bipartite import (EDGES_FILE, NODES_FILE, BipartiteGraph, NodeId, actor_id, item_id, load_graph,
                             save_graph)


def test_ordinals_are_dense_per_kind():
    graph = BipartiteGraph(("Rating",))
    assert graph.add_actor("a", 0) == actor_id(0)
    assert graph.add_actor("b", 0) == actor_id(1)
    assert graph.add_item({}, None, 0) == item_id(0)
    assert graph.counts() == (2, 1, 0)
    assert str(actor_id(3)) == "a3"
    assert str(item_id(12)) == "i12"


def test_item_requires_template_attrs():
    graph = BipartiteGraph(("Citation",), required_attrs=("title",))
    with pytest.raises(MissingRequiredAttr):
        graph.add_item({"title": "  "}, None, 0)
    graph.add_item({"title": "ok"}, None, 0)


def test_edges_validate_endpoints_and_kind():
    graph = BipartiteGraph(("Rating",))
    graph.add_actor("a", 0)
    graph.add_item({}, None, 0)
    with pytest.raises(UnknownActionKind):
        graph.add_edge(actor_id(0), item_id(0), "Citation", 1)
    with pytest.raises(DanglingEndpoint):
        graph.add_edge(actor_id(1), item_id(0), "Rating", 1)
    with pytest.raises(DanglingEndpoint):
        graph.add_edge(actor_id(0), item_id(5), "Rating", 1)
    with pytest.raises(DanglingEndpoint):
        graph.add_item({}, actor_id(9), 0)
    graph.add_edge(actor_id(0), item_id(0), "Rating", 1)
    graph.add_edge(actor_id(0), item_id(0), "Rating", 2)
    assert len(graph.edges_of_item(0)) == 2


def test_snapshot_hides_current_round(citation_graph):
    snapshot = citation_graph.snapshot_items(2)
    assert [item.id.ordinal for item in snapshot] == [0, 1]
    assert 2 not in snapshot
    # edges of round 2 are not visible yet
    assert {e.round for e in snapshot.edges_of(0)} == {0, 1}
    with pytest.raises(ValueError):
        citation_graph.snapshot_items(0)


def test_until_round_replays_growth(citation_graph):
    past = citation_graph.until_round(1)
    assert past.counts() == (3, 2, 3)
    assert past.current_round == 1
    assert citation_graph.until_round(2).counts() == citation_graph.counts()


def test_save_and_load_keep_the_graph(citation_graph, tmp_path):
    save_graph(citation_graph, tmp_path)
    loaded = load_graph(tmp_path)
    assert loaded.counts() == citation_graph.counts()
    assert loaded.edges == citation_graph.edges
    assert [i.creator for i in loaded.items] == [i.creator for i in citation_graph.items]
    assert loaded.actors[1].profile_text == "author 1"


def test_load_rejects_gaps_and_bad_rows(citation_graph, tmp_path):
    save_graph(citation_graph, tmp_path)
    with open(tmp_path / EDGES_FILE, "a", encoding="utf-8") as f:
        f.write("0\t1\tCitation\n")
    with pytest.raises(ParseError) as excinfo:
        load_graph(tmp_path)
    assert excinfo.value.line == 7

    (tmp_path / EDGES_FILE).write_text("0\t9\tCitation\t1\n", encoding="utf-8")
    with pytest.raises(DanglingEndpoint):
        load_graph(tmp_path)

    lines = (tmp_path / NODES_FILE).read_text(encoding="utf-8").splitlines()
    (tmp_path / NODES_FILE).write_text("\n".join(lines[1:]) + "\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_graph(tmp_path)


def test_node_ids_order_actors_first():
    assert sorted([item_id(0), actor_id(5)]) == [actor_id(5), item_id(0)]
    assert NodeId("actor", 1) == actor_id(1)
