import numpy as np
import pytest

from conflictnet import graphio
from conflictnet.graphio import FORMATS
from conflictnet.projection import WeightedGraph

from oracles import random_symmetric_graph


def sample_graph():
    w = np.zeros((4, 4), dtype=np.int64)
    w[0, 1] = w[1, 0] = 3
    w[1, 2] = w[2, 1] = 1
    # node "d" stays isolated on purpose
    return WeightedGraph(("a", "b", "c", "d"), w)


@pytest.mark.parametrize("format", FORMATS)
def test_round_trip_preserves_graph(format):
    g = sample_graph()
    data = graphio.export_graph(g, format)
    assert isinstance(data, bytes)
    back = graphio.import_graph(data, format)
    assert back == g
    assert back.nodes == g.nodes  # order and isolated nodes survive


@pytest.mark.parametrize("format", FORMATS)
def test_round_trip_random_graphs(format):
    rng = np.random.default_rng(808)
    for _ in range(15):
        n = int(rng.integers(1, 20))
        w = random_symmetric_graph(rng, n, 0.3, max_weight=9)
        g = WeightedGraph(tuple(f"v{i}" for i in range(n)), w)
        assert graphio.import_graph(graphio.export_graph(g, format), format) == g


@pytest.mark.parametrize("format", FORMATS)
def test_export_is_byte_deterministic(format):
    g = sample_graph()
    assert graphio.export_graph(g, format) == graphio.export_graph(g, format)


def test_unknown_format_rejected():
    g = sample_graph()
    with pytest.raises(ValueError, match="unknown format"):
        graphio.export_graph(g, "gexf")
    with pytest.raises(ValueError, match="unknown format"):
        graphio.import_graph(b"", "gexf")


def test_graphml_carries_node_attributes():
    g = sample_graph()
    attrs = {"a": {"faction": "farc", "mode": "municipality"}, "c": {"faction": "eln"}}
    data = graphio.export_graph(g, "graphml", node_attrs=attrs).decode("utf-8")
    assert 'attr.name="faction"' in data
    assert 'attr.name="mode"' in data
    assert ">farc<" in data and ">eln<" in data
    assert 'attr.name="weight"' in data
    # attributes do not disturb the structural round trip
    assert graphio.import_graph(data, "graphml") == g


def test_graphml_weight_round_trip_values():
    g = sample_graph()
    back = graphio.import_graph(graphio.export_graph(g, "graphml"), "graphml")
    assert back.weights[0, 1] == 3
    assert back.weights[1, 2] == 1


def test_graphml_rejects_bad_documents():
    with pytest.raises(ValueError, match="graph"):
        graphio.import_graph('<?xml version="1.0"?><graphml xmlns="http://graphml.graphdrawing.org/xmlns"/>', "graphml")
    bad_edge = (
        '<?xml version="1.0"?><graphml xmlns="http://graphml.graphdrawing.org/xmlns">'
        '<graph id="G" edgedefault="undirected"><node id="a"/>'
        '<edge source="a" target="zz"/></graph></graphml>'
    )
    with pytest.raises(ValueError, match="unknown node"):
        graphio.import_graph(bad_edge, "graphml")


def test_edgelist_layout():
    text = graphio.export_graph(sample_graph(), "edgelist_csv").decode("utf-8")
    lines = text.splitlines()
    assert lines[0] == "source,target,weight"
    # one declaration row per node, in order, before any edge
    assert lines[1:5] == ["a,a,0", "b,b,0", "c,c,0", "d,d,0"]
    assert lines[5:] == ["a,b,3", "b,c,1"]


def test_edgelist_rejects_garbage():
    with pytest.raises(ValueError, match="header"):
        graphio.import_graph("a,b\n", "edgelist_csv")
    with pytest.raises(ValueError, match="malformed"):
        graphio.import_graph("source,target,weight\na,b\n", "edgelist_csv")
    with pytest.raises(ValueError, match="self-loops"):
        graphio.import_graph("source,target,weight\na,a,2\n", "edgelist_csv")


def test_json_layout_is_sorted_and_indented():
    text = graphio.export_graph(sample_graph(), "json").decode("utf-8")
    assert text.startswith("{\n")
    assert text.index('"edges"') < text.index('"nodes"')  # sorted keys
    payload_edges = '[\n      "a",\n      "b",\n      3\n    ]'
    assert payload_edges in text


def test_empty_graph_round_trips():
    g = WeightedGraph((), np.zeros((0, 0), dtype=int))
    for format in FORMATS:
        assert graphio.import_graph(graphio.export_graph(g, format), format) == g
