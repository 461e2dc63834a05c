import csv
import json
import os

import pytest

from errors import SpecScenarioMismatch
from graph.folding import fold
from metrics.report import METRICS_FILE, MISSING, degree_pdf, evaluate_graph, rounds_series

CSV_FILES = ("degree_pdf_loglog.csv", "diameter_over_rounds.csv", "lcc_over_rounds.csv",
             "neighbor_degree_scatter.csv", "degree_clustering_scatter.csv", "dense_core.csv")


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_report_files_and_entries(citation_graph, tmp_path):
    folds = ["PaperCitation", "AuthorCitation", "CoAuthorship"]
    report = evaluate_graph(citation_graph, folds, str(tmp_path), plots=True)
    assert set(report) == set(folds)

    paper = report["PaperCitation"]
    assert paper["directed"] is True
    assert (paper["node_count"], paper["edge_count"]) == (3, 3)
    assert paper["valid"] is False
    assert paper["snr_db"] is None
    assert report["CoAuthorship"]["edge_count"] == 0
    assert report["CoAuthorship"]["cc_ratio_er"] == MISSING

    for name in folds:
        for filename in CSV_FILES:
            assert os.path.exists(tmp_path / name / filename)
    assert os.path.exists(tmp_path / "PaperCitation" / "degree_pdf_loglog.png")
    lcc_rows = read_csv(tmp_path / "PaperCitation" / "lcc_over_rounds.csv")
    assert lcc_rows[0] == ["round", "node_count", "edge_count", "lcc_fraction"]
    assert [row[:3] for row in lcc_rows[1:]] == [["0", "1", "0"], ["1", "2", "1"], ["2", "3", "3"]]

    with open(tmp_path / METRICS_FILE, encoding="utf-8") as f:
        assert json.load(f)["AuthorCitation"]["edge_count"] == 3


def test_report_is_deterministic(citation_graph, tmp_path):
    evaluate_graph(citation_graph, ["PaperCitation"], str(tmp_path / "a"), seed=4, plots=False)
    evaluate_graph(citation_graph, ["PaperCitation"], str(tmp_path / "b"), seed=4, plots=False)
    assert (tmp_path / "a" / METRICS_FILE).read_bytes() == (tmp_path / "b" / METRICS_FILE).read_bytes()
    assert not os.path.exists(tmp_path / "a" / "PaperCitation" / "degree_pdf_loglog.png")


def test_folds_outside_the_scenario_are_rejected(citation_graph, tmp_path):
    with pytest.raises(SpecScenarioMismatch):
        evaluate_graph(citation_graph, ["Friend"], str(tmp_path))
    with pytest.raises(SpecScenarioMismatch):
        evaluate_graph(citation_graph, ["Nope"], str(tmp_path))


def test_degree_pdf(citation_graph):
    assert degree_pdf(fold(citation_graph, "AuthorCitation")) == [(2, 1.0)]
    citation_graph.add_actor("reader", 2)
    pdf = degree_pdf(fold(citation_graph, "AuthorCitation"))
    assert pdf == [(2, 0.75)]


def test_rounds_series_grows(citation_graph):
    series = rounds_series(citation_graph, "AuthorCitation")
    assert [row[0] for row in series] == [0, 1, 2]
    assert [row[2] for row in series] == [0, 1, 3]
