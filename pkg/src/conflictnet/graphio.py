"""Graph serialization: GraphML, edge-list CSV, and JSON.

Every format round-trips a WeightedGraph losslessly, including isolated
nodes and node order. The edge list declares each node with a zero-weight
self-row before listing edges, since self-loops cannot otherwise occur.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Mapping
from xml.etree import ElementTree

import numpy as np

from .projection import WeightedGraph

FORMATS = ("graphml", "edgelist_csv", "json")

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def export_graph(
    graph: WeightedGraph,
    format: str,
    node_attrs: Mapping[str, Mapping[str, str]] | None = None,
) -> bytes:
    """Serialize a graph to bytes in the chosen format.

    ``node_attrs`` maps node id to a flat str->str attribute dict; only
    GraphML carries the attributes, the other formats ignore them.
    """
    if format == "graphml":
        return _to_graphml(graph, node_attrs or {})
    if format == "edgelist_csv":
        return _to_edgelist(graph)
    if format == "json":
        return _to_json(graph)
    raise ValueError(f"unknown format {format!r}")


def import_graph(data: bytes | str, format: str) -> WeightedGraph:
    """Parse bytes produced by :func:`export_graph` back into a graph."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    if format == "graphml":
        return _from_graphml(text)
    if format == "edgelist_csv":
        return _from_edgelist(text)
    if format == "json":
        return _from_json(text)
    raise ValueError(f"unknown format {format!r}")


def _edge_iter(graph: WeightedGraph):
    w = graph.weights
    rows, cols = np.nonzero(np.triu(w, 1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        yield graph.nodes[i], graph.nodes[j], int(w[i, j])


def _to_graphml(graph: WeightedGraph, node_attrs: Mapping[str, Mapping[str, str]]) -> bytes:
    attr_names = sorted({k for attrs in node_attrs.values() for k in attrs})
    root = ElementTree.Element("graphml", xmlns=_GRAPHML_NS)
    ElementTree.SubElement(
        root,
        "key",
        {"id": "weight", "for": "edge", "attr.name": "weight", "attr.type": "long"},
    )
    for pos, name in enumerate(attr_names):
        ElementTree.SubElement(
            root,
            "key",
            {"id": f"a{pos}", "for": "node", "attr.name": name, "attr.type": "string"},
        )
    key_of = {name: f"a{pos}" for pos, name in enumerate(attr_names)}
    elem = ElementTree.SubElement(root, "graph", {"id": "G", "edgedefault": "undirected"})
    for node in graph.nodes:
        node_elem = ElementTree.SubElement(elem, "node", {"id": node})
        for name, value in sorted((node_attrs.get(node) or {}).items()):
            data = ElementTree.SubElement(node_elem, "data", {"key": key_of[name]})
            data.text = str(value)
    for source, target, weight in _edge_iter(graph):
        edge = ElementTree.SubElement(elem, "edge", {"source": source, "target": target})
        data = ElementTree.SubElement(edge, "data", {"key": "weight"})
        data.text = str(weight)
    ElementTree.indent(root)
    return ElementTree.tostring(root, encoding="utf-8", xml_declaration=True)


def _from_graphml(text: str) -> WeightedGraph:
    root = ElementTree.fromstring(text)
    ns = {"g": _GRAPHML_NS}
    graph_elem = root.find("g:graph", ns)
    if graph_elem is None:
        raise ValueError("no <graph> element found")
    weight_key = None
    for key in root.findall("g:key", ns):
        if key.get("for") == "edge" and key.get("attr.name") == "weight":
            weight_key = key.get("id")
    nodes = [n.get("id") for n in graph_elem.findall("g:node", ns)]
    if any(v is None for v in nodes):
        raise ValueError("node without id")
    index = {v: i for i, v in enumerate(nodes)}
    w = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for edge in graph_elem.findall("g:edge", ns):
        source, target = edge.get("source"), edge.get("target")
        if source not in index or target not in index:
            raise ValueError(f"edge references unknown node {source!r} or {target!r}")
        weight = 1
        for data in edge.findall("g:data", ns):
            if data.get("key") == weight_key:
                weight = int(data.text or 0)
        i, j = index[source], index[target]
        w[i, j] = weight
        w[j, i] = weight
    return WeightedGraph(tuple(nodes), w)


def _to_edgelist(graph: WeightedGraph) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["source", "target", "weight"])
    for node in graph.nodes:
        writer.writerow([node, node, 0])
    for source, target, weight in _edge_iter(graph):
        writer.writerow([source, target, weight])
    return buffer.getvalue().encode("utf-8")


def _from_edgelist(text: str) -> WeightedGraph:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["source", "target", "weight"]:
        raise ValueError("edge list must start with header source,target,weight")
    nodes: list[str] = []
    index: dict[str, int] = {}
    edges: list[tuple[str, str, int]] = []
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"malformed edge row {row!r}")
        source, target, weight = row[0], row[1], int(row[2])
        if source == target:
            if weight != 0:
                raise ValueError("self-loops are not allowed")
            if source not in index:
                index[source] = len(nodes)
                nodes.append(source)
            continue
        for v in (source, target):
            if v not in index:
                index[v] = len(nodes)
                nodes.append(v)
        edges.append((source, target, weight))
    w = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for source, target, weight in edges:
        i, j = index[source], index[target]
        w[i, j] = weight
        w[j, i] = weight
    return WeightedGraph(tuple(nodes), w)


def _to_json(graph: WeightedGraph) -> bytes:
    payload = {
        "nodes": list(graph.nodes),
        "edges": [[s, t, w] for s, t, w in _edge_iter(graph)],
    }
    return json.dumps(payload, indent=2, sort_keys=True).encode("utf-8")


def _from_json(text: str) -> WeightedGraph:
    payload = json.loads(text)
    nodes = tuple(payload["nodes"])
    index = {v: i for i, v in enumerate(nodes)}
    w = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for source, target, weight in payload["edges"]:
        i, j = index[source], index[target]
        w[i, j] = int(weight)
        w[j, i] = int(weight)
    return WeightedGraph(nodes, w)
