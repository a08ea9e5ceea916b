"""Minimum spanning trees over distance matrices (Kruskal with
union-find), topology metrics, cross-tree comparison, and graph
serialization (DOT, GraphML, JSON)."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

import numpy as np

from .correlation import DistanceMatrix, RhoMatrix


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    distance: float
    rho: float
    significant: bool = True

    @property
    def pair(self):
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class Tree:
    """Spanning tree (or, after significance filtering, a forest)."""

    labels: list[str]
    edges: list[Edge]
    s: int | None = None
    q: float | None = None
    filtered: bool = False

    @property
    def total_distance(self):
        return sum(e.distance for e in self.edges)

    def edge_pairs(self):
        return {e.pair for e in self.edges}


@dataclass(frozen=True)
class TreeMetrics:
    degrees: dict[str, int]
    component_sizes: list[int]  # descending
    avg_path_length: float  # unweighted hops, largest component
    total_distance: float
    max_degree: int
    max_degree_node: str | None


@dataclass(frozen=True)
class TreeComparison:
    common_edges: int
    jaccard: float


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def kruskal(d: DistanceMatrix, rho: RhoMatrix | None = None) -> Tree:
    """MST of a distance matrix; ties broken by lexicographic label pair."""
    v = d.values
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite distance entries")
    labels = d.labels
    index = {lab: i for i, lab in enumerate(labels)}
    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = sorted((labels[i], labels[j]))
            candidates.append((v[i, j], a, b))
    candidates.sort()
    uf = UnionFind(n)
    edges = []
    for dist, a, b in candidates:
        if uf.union(index[a], index[b]):
            r = rho.values[index[a], index[b]] if rho is not None else 1.0 - dist * dist / 2.0
            edges.append(Edge(a, b, float(dist), float(r)))
            if len(edges) == n - 1:
                break
    return Tree(list(labels), edges, s=d.s, q=d.q)


def _adjacency(tree: Tree):
    adj = {lab: [] for lab in tree.labels}
    for e in tree.edges:
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    return adj


def _components(adj):
    seen = set()
    comps = []
    for start in adj:
        if start in seen:
            continue
        comp = []
        dq = deque([start])
        seen.add(start)
        while dq:
            u = dq.popleft()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    dq.append(w)
        comps.append(comp)
    return comps


def metrics(tree: Tree) -> TreeMetrics:
    """Degrees, component sizes, and hop-based average path length.

    L averages BFS hop counts over all unordered node pairs of the
    largest connected component.
    """
    adj = _adjacency(tree)
    degrees = {lab: len(adj[lab]) for lab in tree.labels}
    comps = sorted(_components(adj), key=lambda c: (-len(c), c[0] if c else ""))
    sizes = [len(c) for c in comps]
    L = 0.0
    if comps and len(comps[0]) >= 2:
        comp = comps[0]
        total = 0
        npairs = 0
        comp_set = set(comp)
        for src in comp:
            dist = {src: 0}
            dq = deque([src])
            while dq:
                u = dq.popleft()
                for w in adj[u]:
                    if w in comp_set and w not in dist:
                        dist[w] = dist[u] + 1
                        dq.append(w)
            total += sum(dist.values())
            npairs += len(dist) - 1
        L = total / npairs  # each unordered pair counted twice, in both sums
    if degrees:
        max_node = max(sorted(degrees), key=lambda k: degrees[k])
        max_deg = degrees[max_node]
    else:
        max_node, max_deg = None, 0
    return TreeMetrics(
        degrees=degrees,
        component_sizes=sizes,
        avg_path_length=float(L),
        total_distance=float(tree.total_distance),
        max_degree=max_deg,
        max_degree_node=max_node,
    )


def compare(a: Tree, b: Tree) -> TreeComparison:
    """Count unordered label pairs connected in both trees."""
    ea, eb = a.edge_pairs(), b.edge_pairs()
    common = len(ea & eb)
    union = len(ea | eb)
    return TreeComparison(common, common / union if union else 0.0)


# ---------------------------------------------------------------------------
# serialization

@dataclass(frozen=True)
class NodeAttributes:
    """Optional rendering metadata per node."""

    sector: dict[str, str] = field(default_factory=dict)
    capitalization: dict[str, float] = field(default_factory=dict)

_SECTOR_COLORS = [
    "red", "blue", "magenta", "green", "cyan", "yellow", "orange",
    "violet", "seagreen", "violetred", "white", "brown", "olive",
]


def to_dot(tree: Tree, attrs: NodeAttributes | None = None) -> str:
    """Graphviz DOT: node color by sector, size by capitalization,
    edge penwidth proportional to rho."""
    attrs = attrs or NodeAttributes()
    sectors = sorted(set(attrs.sector.values()))
    color_of = {sec: _SECTOR_COLORS[i % len(_SECTOR_COLORS)] for i, sec in enumerate(sectors)}
    caps = attrs.capitalization
    cap_max = max(caps.values()) if caps else 0.0
    lines = ["graph qmst {", "  node [shape=circle, style=filled];"]
    for lab in tree.labels:
        sec = attrs.sector.get(lab)
        color = color_of.get(sec, "lightgray")
        width = 0.5
        if cap_max > 0 and lab in caps:
            width = 0.3 + 0.7 * (caps[lab] / cap_max)
        lines.append(
            f"  {quoteattr(lab)} [fillcolor={quoteattr(color)}, width={width:.3f}];"
        )
    for e in tree.edges:
        pen = max(0.1, 5.0 * abs(e.rho))
        lines.append(
            f"  {quoteattr(e.a)} -- {quoteattr(e.b)} [penwidth={pen:.3f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_graphml(tree: Tree) -> str:
    """GraphML with typed rho/distance/significant edge attributes."""
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="rho" for="edge" attr.name="rho" attr.type="double"/>',
        '  <key id="distance" for="edge" attr.name="distance" attr.type="double"/>',
        '  <key id="significant" for="edge" attr.name="significant" attr.type="boolean"/>',
        '  <key id="scale" for="graph" attr.name="scale" attr.type="int"/>',
        '  <key id="q" for="graph" attr.name="q" attr.type="double"/>',
        '  <graph id="qmst" edgedefault="undirected">',
    ]
    if tree.s is not None:
        head.append(f'    <data key="scale">{tree.s}</data>')
    if tree.q is not None:
        head.append(f'    <data key="q">{tree.q!r}</data>')
    body = [f'    <node id={quoteattr(lab)}/>' for lab in tree.labels]
    for e in tree.edges:
        body.append(
            f'    <edge source={quoteattr(e.a)} target={quoteattr(e.b)}>'
            f'<data key="rho">{e.rho!r}</data>'
            f'<data key="distance">{e.distance!r}</data>'
            f'<data key="significant">{"true" if e.significant else "false"}</data>'
            "</edge>"
        )
    return "\n".join(head + body + ["  </graph>", "</graphml>"]) + "\n"


def to_json_report(tree: Tree, provenance: dict | None = None) -> str:
    """Edge list + metrics + provenance, stable key order."""
    m = metrics(tree)
    doc = {
        "scale": tree.s,
        "q": tree.q,
        "filtered": tree.filtered,
        "nodes": list(tree.labels),
        "edges": [
            {
                "a": e.a, "b": e.b,
                "distance": e.distance, "rho": e.rho,
                "significant": e.significant,
            }
            for e in tree.edges
        ],
        "metrics": {
            "degrees": m.degrees,
            "component_sizes": m.component_sizes,
            "avg_path_length": m.avg_path_length,
            "avg_path_length_convention": "unweighted hops, largest component",
            "total_distance": m.total_distance,
            "max_degree": m.max_degree,
            "max_degree_node": m.max_degree_node,
        },
        "provenance": provenance or {},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_node_attributes(path) -> NodeAttributes:
    """CSV: label,sector,capitalization (header required)."""
    sector = {}
    cap = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) < 3:
            raise ValueError(f"bad attributes row: {ln!r}")
        sector[cells[0]] = cells[1]
        cap[cells[0]] = float(cells[2])
    return NodeAttributes(sector, cap)
