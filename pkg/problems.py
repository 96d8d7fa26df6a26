"""
Problem Instances Module
Graphs and the cost functions (MaxCut, ring of disagrees, one-hot graph coloring) used across the toolkit.

All optimization inside the toolkit is minimization: cost_table negates maximization instances.
Graph JSON: {"n": int, "edges": [[u, v, w], ...]} with 0-indexed vertices; a missing weight means 1.0.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from statevector import MAX_QUBITS, DiagonalCost

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]
Bits = Union[str, Sequence[int], np.ndarray]

KINDS = ("maxcut", "ring_of_disagrees", "one_hot_demo")


class GraphError(ValueError):
    """Invalid graph, instance size, or bitstring"""


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices 0..n_vertices-1"""

    n_vertices: int
    edges: Tuple[Edge, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_vertices < 1:
            raise GraphError(f"Graph needs at least one vertex, got {self.n_vertices}")
        cleaned = []
        seen = set()
        for edge in self.edges:
            u, v = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if u == v:
                raise GraphError(f"Self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise GraphError(f"Edge ({u}, {v}) references a vertex outside 0..{self.n_vertices - 1}")
            if not math.isfinite(w):
                raise GraphError(f"Edge ({u}, {v}) has non-finite weight {w}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"Duplicate edge ({u}, {v})")
            seen.add(key)
            cleaned.append((u, v, w))
        object.__setattr__(self, "edges", tuple(cleaned))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def weight(self, u: int, v: int) -> float:
        for a, b, w in self.edges:
            if (a, b) == (u, v) or (a, b) == (v, u):
                return w
        raise GraphError(f"No edge between {u} and {v}")

    def neighbors(self, v: int) -> List[int]:
        out = []
        for a, b, _ in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_weighted_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def to_dict(self) -> Dict:
        return {"n": self.n_vertices, "edges": [[u, v, w] for u, v, w in self.edges]}

    @classmethod
    def from_dict(cls, data: Dict) -> "Graph":
        if "n" not in data or "edges" not in data:
            raise GraphError("Graph JSON needs 'n' and 'edges'")
        edges = []
        for item in data["edges"]:
            if len(item) == 2:
                edges.append((item[0], item[1], 1.0))
            elif len(item) == 3:
                edges.append((item[0], item[1], item[2]))
            else:
                raise GraphError(f"Edge entry {item} must be [u, v] or [u, v, w]")
        return cls(int(data["n"]), tuple(edges))


@dataclass(frozen=True)
class ProblemInstance:
    """An optimization instance over a graph; colors is set only for one_hot_demo"""

    kind: str
    graph: Graph
    sense: str = "maximize"
    colors: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GraphError(f"Unknown problem kind '{self.kind}', expected one of {KINDS}")
        if self.sense not in ("maximize", "minimize"):
            raise GraphError(f"Sense must be 'maximize' or 'minimize', got '{self.sense}'")
        if self.kind == "one_hot_demo" and (self.colors is None or self.colors < 1):
            raise GraphError("one_hot_demo instances need a positive color count")

    @property
    def n_qubits(self) -> int:
        if self.kind == "one_hot_demo":
            return self.graph.n_vertices * self.colors
        return self.graph.n_vertices


# ---------------------------------------------------------------------------
# Graph constructors and I/O
# ---------------------------------------------------------------------------

def ring_graph(n: int) -> Graph:
    """Cycle 0-1-...-(n-1)-0 with unit weights; the ring of disagrees needs even n >= 4"""
    if n < 4 or n % 2:
        raise GraphError(f"Ring of disagrees needs an even vertex count >= 4, got {n}")
    return cycle_graph(n)


def cycle_graph(n: int, weight: float = 1.0) -> Graph:
    if n < 3:
        raise GraphError(f"Cycle needs at least 3 vertices, got {n}")
    return Graph(n, tuple((i, (i + 1) % n, weight) for i in range(n)))


def path_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, tuple((i, i + 1, weight) for i in range(n - 1)))


def complete_graph(n: int, weights: Optional[Iterable[float]] = None) -> Graph:
    """K_n; weights (if given) are consumed in (0,1), (0,2), ..., (n-2,n-1) order"""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    ws = [1.0] * len(pairs) if weights is None else [float(w) for w in weights]
    if len(ws) != len(pairs):
        raise GraphError(f"K{n} has {len(pairs)} edges but {len(ws)} weights were given")
    return Graph(n, tuple((u, v, w) for (u, v), w in zip(pairs, ws)))


def random_weighted_graph(n: int, edge_prob: float, rng: np.random.Generator,
                          low: float = -1.0, high: float = 1.0) -> Graph:
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                edges.append((u, v, float(rng.uniform(low, high))))
    return Graph(n, tuple(edges))


def disruption_network(n_vehicles: int, inside: Iterable[int],
                       weights: Optional[Dict[Tuple[int, int], float]] = None) -> Graph:
    """
    Communication network with a ground station (vertex 0) and vehicles 1..n_vehicles.
    Vehicles listed in `inside` sit in the disruption area and cannot reach the ground station directly,
    so the graph is complete except for those station links.

    Args:
        n_vehicles: Number of vehicles
        inside: Vehicle ids inside the disruption area
        weights: Optional {(u, v): distance}; missing pairs get weight 1.0

    Returns:
        Graph on n_vehicles + 1 vertices
    """
    inside = set(inside)
    for v in inside:
        if not 1 <= v <= n_vehicles:
            raise GraphError(f"Vehicle id {v} outside 1..{n_vehicles}")
    weights = weights or {}
    edges = []
    for u in range(n_vehicles + 1):
        for v in range(u + 1, n_vehicles + 1):
            if u == 0 and v in inside:
                continue
            w = weights.get((u, v), weights.get((v, u), 1.0))
            edges.append((u, v, w))
    return Graph(n_vehicles + 1, tuple(edges))


def load_graph(path: Union[str, Path]) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    graph = Graph.from_dict(data)
    logger.info(f"Loaded graph with {graph.n_vertices} vertices and {graph.n_edges} edges from {path}")
    return graph


def save_graph(graph: Graph, path: Union[str, Path]):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(graph.to_dict(), f, indent=2)


# ---------------------------------------------------------------------------
# Instances and costs
# ---------------------------------------------------------------------------

def maxcut_instance(graph: Graph) -> ProblemInstance:
    return ProblemInstance("maxcut", graph, "maximize")


def ring_of_disagrees(n: int) -> ProblemInstance:
    return ProblemInstance("ring_of_disagrees", ring_graph(n), "maximize")


def graph_coloring_instance(graph: Graph, colors: int) -> ProblemInstance:
    """Qubit v*colors + c set means vertex v has color c; cost is the weight of monochromatic edges"""
    instance = ProblemInstance("one_hot_demo", graph, "minimize", colors)
    if instance.n_qubits > MAX_QUBITS:
        raise GraphError(f"{graph.n_vertices} vertices x {colors} colors exceeds {MAX_QUBITS} qubits")
    return instance


def onehot_groups(instance: ProblemInstance) -> List[List[int]]:
    if instance.kind != "one_hot_demo":
        raise GraphError(f"Instance kind '{instance.kind}' has no one-hot groups")
    k = instance.colors
    return [[v * k + c for c in range(k)] for v in range(instance.graph.n_vertices)]


def _as_bits(x: Bits, length: int) -> np.ndarray:
    if isinstance(x, str):
        bits = np.array([int(ch) for ch in x], dtype=np.int64)
    else:
        bits = np.asarray(x, dtype=np.int64)
    if bits.shape != (length,):
        raise GraphError(f"Bitstring has length {bits.size}, expected {length}")
    if np.any((bits != 0) & (bits != 1)):
        raise GraphError("Bitstring entries must be 0 or 1")
    return bits


def maxcut_value(graph: Graph, x: Bits) -> float:
    """Weight of edges whose endpoints disagree; character/entry k of x is vertex k"""
    bits = _as_bits(x, graph.n_vertices)
    return float(sum(w for u, v, w in graph.edges if bits[u] != bits[v]))


def coloring_conflicts(instance: ProblemInstance, x: Bits) -> float:
    bits = _as_bits(x, instance.n_qubits)
    k = instance.colors
    total = 0.0
    for u, v, w in instance.graph.edges:
        total += w * sum(bits[u * k + c] * bits[v * k + c] for c in range(k))
    return float(total)


def problem_cost(problem: ProblemInstance, x: Bits) -> float:
    """Native (un-negated) objective of one bitstring"""
    if problem.kind == "one_hot_demo":
        return coloring_conflicts(problem, x)
    return maxcut_value(problem.graph, x)


def cost_table(problem: ProblemInstance) -> DiagonalCost:
    """
    Materialize f(x) for every bitstring index x (bit j of x is qubit j).
    Maximization instances are stored negated so the QAOA engine always minimizes.
    """
    n = problem.n_qubits
    if n > MAX_QUBITS:
        raise GraphError(f"Instance needs {n} qubits, above the {MAX_QUBITS}-qubit limit")
    idx = np.arange(1 << n, dtype=np.int64)
    values = np.zeros(1 << n, dtype=np.float64)

    if problem.kind == "one_hot_demo":
        k = problem.colors
        for u, v, w in problem.graph.edges:
            for c in range(k):
                values += w * (((idx >> (u * k + c)) & (idx >> (v * k + c))) & 1)
    else:
        for u, v, w in problem.graph.edges:
            values += w * (((idx >> u) ^ (idx >> v)) & 1)

    if problem.sense == "maximize":
        values = -values
    logger.debug(f"Built {problem.kind} cost table over {n} qubits")
    return DiagonalCost(n, values)
