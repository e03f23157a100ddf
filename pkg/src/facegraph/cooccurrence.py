"""Co-occurrence counting and relation-graph export.

Two persons co-occur when they are recognized in the same image. Counts
are raw: a node's weight is the number of images a person appears in, an
edge's weight the number of images both endpoints share. Normalization
and layout are left to downstream tools; this module only counts and
exports files (GraphML, DOT, JSON).
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .errors import ConfigError, ParseError
from .identification import IdentificationResult

__all__ = [
    "OccurrenceCounts",
    "GraphNode",
    "GraphEdge",
    "RelationGraph",
    "count_occurrences",
    "merge_counts",
    "build_graph",
    "export_graph",
    "parse_graph_json",
    "GRAPH_FORMATS",
]

GRAPH_FORMATS = ("json", "graphml", "dot")


@dataclass(frozen=True)
class OccurrenceCounts:
    """Image-level appearance counts.

    ``singles`` maps entity id to the number of images it appears in;
    ``joints`` maps an unordered pair, stored as the sorted tuple
    ``(min_id, max_id)``, to the number of images both share. For every
    pair, the joint count can never exceed either single count.
    """

    singles: dict[str, int]
    joints: dict[tuple[str, str], int]

    def __post_init__(self) -> None:
        for (a, b), joint in self.joints.items():
            if a >= b:
                raise ValueError(f"joint key {(a, b)} is not in sorted order")
            low = min(self.singles.get(a, 0), self.singles.get(b, 0))
            if joint > low:
                raise ValueError(
                    f"joint count {joint} for {(a, b)} exceeds a single count {low}"
                )


def count_occurrences(results: Iterable[IdentificationResult]) -> OccurrenceCounts:
    """Count single and joint appearances across identification results.

    Each image contributes once per recognized entity and once per
    unordered pair of recognized entities.
    """
    singles: dict[str, int] = {}
    joints: dict[tuple[str, str], int] = {}
    for result in results:
        ids = sorted({eid for eid, _ in result.recognized})
        for eid in ids:
            singles[eid] = singles.get(eid, 0) + 1
        for a, b in combinations(ids, 2):
            joints[(a, b)] = joints.get((a, b), 0) + 1
    return OccurrenceCounts(singles=singles, joints=joints)


def merge_counts(a: OccurrenceCounts, b: OccurrenceCounts) -> OccurrenceCounts:
    """Combine partial counts from disjoint image sets (commutative)."""
    singles = dict(a.singles)
    for eid, n in b.singles.items():
        singles[eid] = singles.get(eid, 0) + n
    joints = dict(a.joints)
    for pair, n in b.joints.items():
        joints[pair] = joints.get(pair, 0) + n
    return OccurrenceCounts(singles=singles, joints=joints)


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str
    weight: int


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    weight: int


@dataclass(frozen=True)
class RelationGraph:
    """Undirected person-relation graph with raw counts as weights."""

    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    def __post_init__(self) -> None:
        known = {n.id for n in self.nodes}
        for edge in self.edges:
            if edge.source not in known or edge.target not in known:
                raise ValueError(
                    f"edge {edge.source}--{edge.target} references an unknown node"
                )


def build_graph(
    counts: OccurrenceCounts,
    names: Mapping[str, str] | None = None,
    min_edge_weight: int = 1,
) -> RelationGraph:
    """Build the relation graph from occurrence counts.

    Nodes are entities with at least one appearance, labelled from
    ``names`` (falling back to the id); edges are pairs whose joint count
    reaches ``min_edge_weight``. Everything is ordered by id so exports
    are deterministic.
    """
    if min_edge_weight < 1:
        raise ConfigError(f"min_edge_weight must be at least 1, got {min_edge_weight}")
    names = dict(names or {})
    nodes = tuple(
        GraphNode(id=eid, label=names.get(eid, eid), weight=count)
        for eid, count in sorted(counts.singles.items())
    )
    edges = tuple(
        GraphEdge(source=a, target=b, weight=weight)
        for (a, b), weight in sorted(counts.joints.items())
        if weight >= min_edge_weight
    )
    return RelationGraph(nodes=nodes, edges=edges)


def _graph_to_json(graph: RelationGraph) -> bytes:
    payload = {
        "nodes": [
            {"id": n.id, "label": n.label, "weight": n.weight} for n in graph.nodes
        ],
        "edges": [
            {"source": e.source, "target": e.target, "weight": e.weight}
            for e in graph.edges
        ],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _graph_to_graphml(graph: RelationGraph) -> bytes:
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    for key_id, target, name, kind in (
        ("d_label", "node", "label", "string"),
        ("d_weight", "node", "weight", "long"),
        ("d_edge_weight", "edge", "weight", "long"),
    ):
        ET.SubElement(
            root,
            "key",
            attrib={"id": key_id, "for": target, "attr.name": name, "attr.type": kind},
        )
    g = ET.SubElement(root, "graph", attrib={"id": "relations", "edgedefault": "undirected"})
    for node in graph.nodes:
        n = ET.SubElement(g, "node", attrib={"id": node.id})
        ET.SubElement(n, "data", attrib={"key": "d_label"}).text = node.label
        ET.SubElement(n, "data", attrib={"key": "d_weight"}).text = str(node.weight)
    for edge in graph.edges:
        e = ET.SubElement(g, "edge", attrib={"source": edge.source, "target": edge.target})
        ET.SubElement(e, "data", attrib={"key": "d_edge_weight"}).text = str(edge.weight)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def _dot_quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _graph_to_dot(graph: RelationGraph) -> bytes:
    lines = ["graph relations {"]
    for node in graph.nodes:
        lines.append(
            f"  {_dot_quote(node.id)} "
            f"[label={_dot_quote(node.label)}, weight={node.weight}];"
        )
    for edge in graph.edges:
        lines.append(
            f"  {_dot_quote(edge.source)} -- {_dot_quote(edge.target)} "
            f"[weight={edge.weight}];"
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_graph(graph: RelationGraph, fmt: str) -> bytes:
    """Serialize the graph to one of ``GRAPH_FORMATS``.

    Output is byte-stable: the same graph always serializes to the same
    bytes. The JSON flavor round-trips losslessly through
    :func:`parse_graph_json`.

    Raises:
        ConfigError: unsupported format name.
    """
    if fmt == "json":
        return _graph_to_json(graph)
    if fmt == "graphml":
        return _graph_to_graphml(graph)
    if fmt == "dot":
        return _graph_to_dot(graph)
    raise ConfigError(f"unsupported graph format {fmt!r}; expected one of {GRAPH_FORMATS}")


def parse_graph_json(data: bytes | str) -> RelationGraph:
    """Parse the JSON export back into a graph.

    Raises:
        ParseError: not valid JSON, or not the exported shape.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
        nodes = tuple(
            GraphNode(id=n["id"], label=n["label"], weight=int(n["weight"]))
            for n in payload["nodes"]
        )
        edges = tuple(
            GraphEdge(source=e["source"], target=e["target"], weight=int(e["weight"]))
            for e in payload["edges"]
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"not a serialized relation graph: {exc!r}") from exc
    return RelationGraph(nodes=nodes, edges=edges)
