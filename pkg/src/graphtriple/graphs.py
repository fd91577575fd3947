"""Finitely presented directed graphs with infinite tails.

A presentation is a finite core (vertices, edges) plus two kinds of marks:

* ``tails``: the marked vertex emits an infinite no-exit path (one fresh edge
  per step, single entry, single exit).  These are the ends of the graph.
* ``source_tails``: the marked vertex receives an infinite single-entry,
  single-exit chain.  These remove sources without adding ends, keeping
  no-source trees finitely presentable.

All operations are pure; presentations are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx


class GraphFormatError(ValueError):
    """Raised for malformed presentation documents (syntax or schema)."""


class GraphValidationError(ValueError):
    """Raised when a presentation violates a structural invariant."""


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    range: str
    color: int = 1


@dataclass(frozen=True)
class End:
    """A sink, a loop without exit, or an infinite no-exit path."""

    kind: str  # "sink" | "loop" | "tail"
    id: str
    vertices: Tuple[str, ...]
    cycle_edges: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Classification:
    kind: str  # "SingleLoop" | "DirectedTree" | "Other"
    n: Optional[int] = None


_GRAPH_KEYS = {"k", "vertices", "edges", "tails", "source_tails"}
_EDGE_KEYS = {"id", "source", "range"}


class GraphPresentation:
    """Validated finite presentation of a (possibly infinite) directed graph."""

    def __init__(
        self,
        vertices: Sequence[str],
        edges: Sequence[Edge],
        tails: Sequence[str] = (),
        source_tails: Sequence[str] = (),
    ):
        self.vertices: Tuple[str, ...] = tuple(sorted(vertices))
        self.edges: Dict[str, Edge] = {e.id: e for e in edges}
        self.edge_order: Tuple[str, ...] = tuple(sorted(self.edges))
        self.tails: Tuple[str, ...] = tuple(sorted(tails))
        self.source_tails: Tuple[str, ...] = tuple(sorted(source_tails))
        self._validate(edges)
        self._out: Dict[str, Tuple[str, ...]] = {v: () for v in self.vertices}
        self._in: Dict[str, Tuple[str, ...]] = {v: () for v in self.vertices}
        for eid in self.edge_order:
            e = self.edges[eid]
            self._out[e.source] += (eid,)
            self._in[e.range] += (eid,)

    # -- validation ---------------------------------------------------------

    def _validate(self, edges: Sequence[Edge]) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphValidationError("duplicate vertex identifier")
        seen: Set[str] = set()
        vset = set(self.vertices)
        for ident in list(self.vertices) + [e.id for e in edges]:
            if not isinstance(ident, str) or not ident or "~" in ident:
                raise GraphValidationError(
                    f"identifier {ident!r} must be a nonempty string without '~'"
                )
        for e in edges:
            if e.id in seen:
                raise GraphValidationError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.source not in vset:
                raise GraphValidationError(
                    f"edge {e.id!r} references undeclared vertex {e.source!r}"
                )
            if e.range not in vset:
                raise GraphValidationError(
                    f"edge {e.id!r} references undeclared vertex {e.range!r}"
                )
        for v in self.tails:
            if v not in vset:
                raise GraphValidationError(f"tail mark on undeclared vertex {v!r}")
        if len(set(self.tails)) != len(self.tails):
            raise GraphValidationError("duplicate tail mark")
        for v in self.source_tails:
            if v not in vset:
                raise GraphValidationError(
                    f"source tail mark on undeclared vertex {v!r}"
                )
        if len(set(self.source_tails)) != len(self.source_tails):
            raise GraphValidationError("duplicate source tail mark")
        # a tail mark makes its vertex emit, so marked vertices are never
        # sinks; the smallest tail graph is a single marked vertex

    # -- basic structure ----------------------------------------------------

    def out_edges(self, v: str) -> Tuple[str, ...]:
        return self._out[v]

    def in_edges(self, v: str) -> Tuple[str, ...]:
        return self._in[v]

    def is_sink(self, v: str) -> bool:
        return not self._out[v] and v not in self.tails

    def is_source(self, v: str) -> bool:
        return not self._in[v] and v not in self.source_tails

    def conceptual_out_degree(self, v: str) -> int:
        return len(self._out[v]) + (1 if v in self.tails else 0)

    def conceptual_in_degree(self, v: str) -> int:
        return len(self._in[v]) + (1 if v in self.source_tails else 0)

    def _digraph(self) -> "nx.MultiDiGraph":
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.vertices)
        for eid in self.edge_order:
            e = self.edges[eid]
            g.add_edge(e.source, e.range, key=eid)
        return g

    def simple_cycles(self) -> List[Tuple[str, ...]]:
        """Simple cycles of the core, as canonically rotated vertex tuples."""
        cycles = []
        for cyc in nx.simple_cycles(self._digraph()):
            cyc = tuple(cyc)
            k = cyc.index(min(cyc))
            cycles.append(cyc[k:] + cyc[:k])
        return sorted(set(cycles))

    def cycle_edge_ids(self, cycle: Tuple[str, ...]) -> Tuple[str, ...]:
        ids = []
        n = len(cycle)
        for i, v in enumerate(cycle):
            w = cycle[(i + 1) % n]
            cand = sorted(e for e in self._out[v] if self.edges[e].range == w)
            ids.append(cand[0])
        return tuple(ids)

    def loop_has_exit(self, cycle: Tuple[str, ...]) -> bool:
        cset = set(cycle)
        for v in cycle:
            if v in self.tails:
                return True
            for eid in self._out[v]:
                if self.edges[eid].range not in cset:
                    return True
            # two parallel edges staying inside the cycle still mean an exit
            inside = [e for e in self._out[v] if self.edges[e].range in cset]
            if len(inside) > 1:
                return True
        return False

    def connected(self) -> bool:
        if not self.vertices:
            return True
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for e in self.edges.values():
            g.add_edge(e.source, e.range)
        return nx.is_connected(g)

    def reaches_sink(self, v: str) -> bool:
        """Whether some finite forward path from v dies at a sink."""
        seen = set()
        stack = [v]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if self.is_sink(u):
                return True
            stack.extend(self.edges[e].range for e in self._out[u])
        return False

    def backward_infinite(self, v: str) -> bool:
        """Whether v admits entering paths of every length."""
        seen = set()
        stack = [v]
        while stack:
            u = stack.pop()
            if u in seen:
                # revisiting means a backward cycle feeds v
                return True
            seen.add(u)
            if u in self.source_tails:
                return True
            for eid in self._in[u]:
                stack.append(self.edges[eid].source)
        return False

    def backward_depth(self, v: str) -> Optional[int]:
        """Length of the longest entering path, or None when unbounded."""
        if self.backward_infinite(v):
            return None
        memo: Dict[str, int] = {}

        def depth(u: str) -> int:
            if u not in memo:
                memo[u] = 0
                preds = [self.edges[e].source for e in self._in[u]]
                if preds:
                    memo[u] = 1 + max(depth(p) for p in preds)
            return memo[u]

        return depth(v)

    # -- reports ------------------------------------------------------------

    def structural_report(self) -> dict:
        cycles = self.simple_cycles()
        sinks = sorted(v for v in self.vertices if self.is_sink(v))
        sources = sorted(v for v in self.vertices if self.is_source(v))
        return {
            "row_finite": True,
            "locally_finite": True,
            "sinks": sinks,
            "sources": sources,
            "loops": len(cycles),
            "loops_with_exit": sum(1 for c in cycles if self.loop_has_exit(c)),
            "connected": self.connected(),
        }

    def find_ends(self) -> List[End]:
        ends: List[End] = []
        for v in self.vertices:
            if self.is_sink(v):
                ends.append(End("sink", f"sink:{v}", (v,)))
        for cyc in self.simple_cycles():
            if not self.loop_has_exit(cyc):
                ends.append(
                    End(
                        "loop",
                        "loop:" + "-".join(cyc),
                        cyc,
                        self.cycle_edge_ids(cyc),
                    )
                )
        for v in self.tails:
            ends.append(End("tail", f"tail:{v}", (v,)))
        return sorted(ends, key=lambda e: e.id)

    def single_entry_check(self) -> dict:
        violations = {
            v: self.conceptual_in_degree(v)
            for v in self.vertices
            if self.conceptual_in_degree(v) != 1
        }
        return {"holds": not violations, "violations": violations}

    def classify(self) -> Classification:
        if (
            not self.connected()
            or not self.single_entry_check()["holds"]
            or any(self.is_sink(v) for v in self.vertices)
        ):
            return Classification("Other")
        cycles = self.simple_cycles()
        if cycles:
            cyc = cycles[0]
            if (
                len(cycles) == 1
                and not self.loop_has_exit(cyc)
                and len(cyc) == len(self.vertices)
                and not self.tails
                and not self.source_tails
            ):
                return Classification("SingleLoop", len(cyc))
            return Classification("Other")
        return Classification("DirectedTree")

    # -- transforms -----------------------------------------------------------

    def relabel(self, vmap: Dict[str, str], emap: Dict[str, str]) -> "GraphPresentation":
        return GraphPresentation(
            [vmap[v] for v in self.vertices],
            [
                Edge(emap[e.id], vmap[e.source], vmap[e.range], e.color)
                for e in self.edges.values()
            ],
            [vmap[v] for v in self.tails],
            [vmap[v] for v in self.source_tails],
        )

    def expand(self, depth: int) -> "ExpandedGraph":
        """Materialize tails and source tails to the given depth."""
        return ExpandedGraph(self, depth)

    def fingerprint(self) -> tuple:
        return (
            1,
            self.vertices,
            tuple(sorted((e.id, e.source, e.range) for e in self.edges.values())),
            self.tails,
            self.source_tails,
        )


class ExpandedGraph:
    """Finite window of the conceptual graph: core plus depth-d tail segments.

    Serves as the ambient for exact path algebra.  Vertices added for a tail
    rooted at v are named ``v~t1..v~td`` (and ``v~s1..`` for source tails);
    the outermost added vertices form the truncation boundary.
    """

    def __init__(self, presentation: GraphPresentation, depth: int):
        if depth < 0:
            raise ValueError("expansion depth must be >= 0")
        self.presentation = presentation
        self.depth = depth
        self.k = 1
        verts = list(presentation.vertices)
        edges = [
            Edge(e.id, e.source, e.range, 1) for e in presentation.edges.values()
        ]
        self.end_of_vertex: Dict[str, str] = {}
        self.boundary_out: Set[str] = set()
        self.boundary_in: Set[str] = set()
        for end in presentation.find_ends():
            for v in end.vertices:
                self.end_of_vertex[v] = end.id
        for root in presentation.tails:
            prev = root
            for j in range(1, depth + 1):
                v = f"{root}~t{j}"
                verts.append(v)
                edges.append(Edge(f"{root}~te{j}", prev, v, 1))
                self.end_of_vertex[v] = f"tail:{root}"
                prev = v
            self.boundary_out.add(prev)
        for root in presentation.source_tails:
            prev = root
            for j in range(1, depth + 1):
                v = f"{root}~s{j}"
                verts.append(v)
                edges.append(Edge(f"{root}~se{j}", v, prev, 1))
                prev = v
            self.boundary_in.add(prev)
        self.vertices: Tuple[str, ...] = tuple(sorted(verts))
        self.edges: Dict[str, Edge] = {e.id: e for e in edges}
        self.edge_order: Tuple[str, ...] = tuple(sorted(self.edges))
        self._out: Dict[str, Tuple[str, ...]] = {v: () for v in self.vertices}
        self._in: Dict[str, Tuple[str, ...]] = {v: () for v in self.vertices}
        for eid in self.edge_order:
            e = self.edges[eid]
            self._out[e.source] += (eid,)
            self._in[e.range] += (eid,)

    # -- ambient interface used by the path algebra -------------------------

    def fingerprint(self) -> tuple:
        return self.presentation.fingerprint() + (self.depth,)

    def out_edges(self, v: str) -> Tuple[str, ...]:
        return self._out[v]

    def in_edges(self, v: str) -> Tuple[str, ...]:
        return self._in[v]

    def edge_source(self, eid: str) -> str:
        return self.edges[eid].source

    def edge_range(self, eid: str) -> str:
        return self.edges[eid].range

    def path_source(self, path: Tuple[str, ...]) -> str:
        return self.edges[path[0]].source

    def path_range(self, path: Tuple[str, ...]) -> str:
        return self.edges[path[-1]].range

    def is_path(self, path: Tuple[str, ...]) -> bool:
        for a, b in zip(path, path[1:]):
            if self.edges[a].range != self.edges[b].source:
                return False
        return True

    def degree(self, path: Tuple[str, ...]) -> int:
        return len(path)

    def normal(self, path: Tuple[str, ...]) -> Tuple[str, ...]:
        return path

    def compose(
        self, p: Tuple[str, ...], q: Tuple[str, ...]
    ) -> Optional[Tuple[str, ...]]:
        if p and q and self.path_range(p) != self.path_source(q):
            return None
        return p + q

    def divide_prefix(
        self, nu: Tuple[str, ...], alpha: Tuple[str, ...]
    ) -> Optional[Tuple[str, ...]]:
        """Return nu' with nu = alpha . nu', or None."""
        if len(alpha) > len(nu) or nu[: len(alpha)] != alpha:
            return None
        return nu[len(alpha):]

    def paths_from(self, v: str, length: int) -> List[Tuple[str, ...]]:
        """All paths of the given length with source v, in lexicographic order."""
        if length == 0:
            return [()]
        out = []
        for eid in self._out[v]:
            for rest in self.paths_from(self.edges[eid].range, length - 1):
                out.append((eid,) + rest)
        return out

    def paths_into(self, v: str, length: int) -> List[Tuple[str, ...]]:
        if length == 0:
            return [()]
        out = []
        for eid in self._in[v]:
            for rest in self.paths_into(self.edges[eid].source, length - 1):
                out.append(rest + (eid,))
        return out

    def interior_vertices(self) -> List[str]:
        """Vertices with unbounded entering paths and no reachable sink, where
        the semifinite trace identity holds at every degree."""
        p = self.presentation
        return [
            v
            for v in p.vertices
            if not p.reaches_sink(v) and p.backward_infinite(v)
        ] + [
            v
            for v in self.vertices
            if "~t" in v and p.backward_infinite(v.split("~", 1)[0])
        ]


def parse_graph(text: str) -> GraphPresentation:
    """Parse and validate a 1-graph presentation document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return graph_from_document(doc)


def graph_from_document(doc: object) -> GraphPresentation:
    if not isinstance(doc, dict):
        raise GraphFormatError("presentation document must be a JSON object")
    unknown = set(doc) - _GRAPH_KEYS
    if unknown:
        raise GraphFormatError(f"unknown fields: {sorted(unknown)}")
    for key in ("k", "vertices", "edges", "tails"):
        if key not in doc:
            raise GraphFormatError(f"missing required field {key!r}")
    if doc["k"] != 1:
        raise GraphFormatError("graph documents must have k = 1 (use parse_kgraph)")
    edges = []
    for rec in doc["edges"]:
        if not isinstance(rec, dict):
            raise GraphFormatError("edge records must be objects")
        extra = set(rec) - _EDGE_KEYS
        if extra:
            raise GraphFormatError(f"unknown edge fields: {sorted(extra)}")
        if set(rec) != _EDGE_KEYS:
            raise GraphFormatError(f"edge record missing fields: {rec}")
        edges.append(Edge(rec["id"], rec["source"], rec["range"]))
    try:
        return GraphPresentation(
            doc["vertices"], edges, doc["tails"], doc.get("source_tails", ())
        )
    except GraphValidationError:
        raise


def graph_to_document(g: GraphPresentation) -> dict:
    doc = {
        "k": 1,
        "vertices": list(g.vertices),
        "edges": [
            {"id": e, "source": g.edges[e].source, "range": g.edges[e].range}
            for e in g.edge_order
        ],
        "tails": list(g.tails),
    }
    if g.source_tails:
        doc["source_tails"] = list(g.source_tails)
    return doc
