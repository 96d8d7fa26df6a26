"""
QUBO Module
Level-based spanning-tree penalty encoding, cubic-to-quadratic ancilla reduction and classical solvers.

Variables of the spanning-tree encoding (root fixed at vertex 0, level 1, no variables):
- x:u-v   vertex u is the parent of v (one per edge direction with v != root)
- y:v@l   vertex v sits at level l, l in 2..n
- z:u-v@l ancilla standing for x:u-v * y:u@l
- d:v#k   degree slack, unit k of the spare degree at v, k in 1..delta-1 (only with a degree bound,
          and only on vertices whose child capacity is not one)

Bitstrings of a Qubo are written variable 0 first: character k is variable k.
"""

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numba import njit

from problems import Bits, Graph, GraphError, _as_bits
from statevector import MAX_QUBITS

logger = logging.getLogger(__name__)

ROOT = 0
BRUTE_FORCE_CHUNK_BITS = 16
# annealing window for spanning-tree encodings, in units of penalty_A
TREE_T_START = 0.5
TREE_T_END = 0.05

Monomial = Tuple[int, ...]
PairRule = Callable[[Monomial], Tuple[int, int]]


class DisconnectedGraphError(GraphError):
    """Spanning trees requested for a graph with more than one component"""


class OversizeError(ValueError):
    """Instance too large for exhaustive enumeration"""


class DegreeError(ValueError):
    """Polynomial degree above what the reduction supports"""


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

@dataclass
class Pubo:
    """Pseudo-Boolean polynomial; the empty tuple holds the constant"""

    n_vars: int
    terms: Dict[Monomial, float] = field(default_factory=dict)

    def add_term(self, variables: Sequence[int], coef: float):
        # x * x = x for binary variables
        key = tuple(sorted(set(int(v) for v in variables)))
        for v in key:
            if v < 0 or v >= self.n_vars:
                raise ValueError(f"Variable {v} out of range for {self.n_vars} variables")
        total = self.terms.get(key, 0.0) + float(coef)
        if total == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = total

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def energy(self, bits: Bits) -> float:
        x = _as_bits(bits, self.n_vars)
        return float(sum(c * np.prod(x[list(k)]) for k, c in self.terms.items()))

    def energies(self, matrix: np.ndarray) -> np.ndarray:
        """Energy of every row of a (m, n_vars) 0/1 matrix"""
        matrix = np.asarray(matrix)
        out = np.zeros(matrix.shape[0])
        for k, c in self.terms.items():
            if k:
                out += c * np.all(matrix[:, list(k)] == 1, axis=1)
            else:
                out += c
        return out

    def to_qubo(self) -> "Qubo":
        if self.degree() > 2:
            raise DegreeError(f"Polynomial of degree {self.degree()} is not quadratic")
        linear = np.zeros(self.n_vars)
        quadratic = {}
        offset = 0.0
        for k, c in self.terms.items():
            if len(k) == 0:
                offset += c
            elif len(k) == 1:
                linear[k[0]] += c
            else:
                quadratic[k] = c
        return Qubo(self.n_vars, linear, quadratic, offset)


@dataclass
class Qubo:
    """E(x) = offset + sum_i linear[i] x_i + sum_{i<j} quadratic[(i, j)] x_i x_j"""

    n_vars: int
    linear: np.ndarray
    quadratic: Dict[Tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=np.float64)
        if self.linear.shape != (self.n_vars,):
            raise ValueError(f"Expected {self.n_vars} linear coefficients, got shape {self.linear.shape}")
        cleaned = {}
        for (i, j), c in self.quadratic.items():
            i, j = int(i), int(j)
            if not 0 <= i < j < self.n_vars:
                raise ValueError(f"Quadratic key ({i}, {j}) must satisfy 0 <= i < j < {self.n_vars}")
            cleaned[(i, j)] = float(c)
        self.quadratic = cleaned
        coefs = list(self.linear) + list(cleaned.values()) + [self.offset]
        if not np.all(np.isfinite(coefs)):
            raise ValueError("Qubo coefficients must be finite")
        self.offset = float(self.offset)

    def energy(self, bits: Bits) -> float:
        x = _as_bits(bits, self.n_vars)
        total = self.offset + float(np.dot(self.linear, x))
        for (i, j), c in self.quadratic.items():
            if x[i] and x[j]:
                total += c
        return total

    def energies(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix)
        out = matrix.astype(np.float64) @ self.linear + self.offset
        for (i, j), c in self.quadratic.items():
            out += c * (matrix[:, i] & matrix[:, j])
        return out

    def max_abs_coefficient(self) -> float:
        values = [abs(c) for c in self.linear] + [abs(c) for c in self.quadratic.values()]
        return max(values, default=0.0)

    def to_dict(self) -> Dict:
        return {
            "n": self.n_vars,
            "offset": self.offset,
            "linear": [float(c) for c in self.linear],
            "quadratic": [[i, j, c] for (i, j), c in sorted(self.quadratic.items())],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Qubo":
        for key in ("n", "linear"):
            if key not in data:
                raise ValueError(f"Qubo JSON is missing '{key}'")
        quadratic = {(int(i), int(j)): float(c) for i, j, c in data.get("quadratic", [])}
        return cls(int(data["n"]), data["linear"], quadratic, float(data.get("offset", 0.0)))


def bits_to_string(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


# ---------------------------------------------------------------------------
# Spanning-tree encoding
# ---------------------------------------------------------------------------

_LABEL_PATTERNS = {
    "x": re.compile(r"^x:(\d+)-(\d+)$"),
    "y": re.compile(r"^y:(\d+)@(\d+)$"),
    "z": re.compile(r"^z:(\d+)-(\d+)@(\d+)$"),
    "d": re.compile(r"^d:(\d+)#(\d+)$"),
}


@dataclass
class SpanningTreeOptions:
    """
    objective_B scales the tree weight. penalty_A defaults to B * (sum |w| + 1).
    rosenberg_penalty defaults to A + B. Any ancilla that disagrees with its pair then costs more than
    the objective range, and the min over ancillas equals the cubic energy whenever no vertex holds more
    than one level. Pass A * (n - 1) for that identity on every assignment.
    """

    objective_B: float = 1.0
    penalty_A: Optional[float] = None
    delta: Optional[int] = None
    rosenberg_penalty: Optional[float] = None


@dataclass
class SpanningTreeEncoding:
    graph: Graph
    penalty_A: float
    objective_B: float
    delta: Optional[int] = None
    rosenberg_penalty: Optional[float] = None
    root: int = ROOT
    labels: List[str] = field(default_factory=list)
    parents: Dict[Tuple[int, int], int] = field(default_factory=dict)
    levels: Dict[Tuple[int, int], int] = field(default_factory=dict)
    slacks: Dict[Tuple[int, int], int] = field(default_factory=dict)
    ancillas: Dict[int, Tuple[int, int]] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.labels)

    @property
    def n_base_vars(self) -> int:
        """Variables before quadratization"""
        return len(self.labels) - len(self.ancillas)

    @property
    def var_index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def child_capacity(self, v: int) -> int:
        """Children v may take under the degree bound; the parent edge uses one unit off the root"""
        return self.delta - (0 if v == self.root else 1)

    def anneal_schedule(self, sweeps: int = 1000) -> "AnnealSchedule":
        """Geometric cooling from A/2 down to A/20, the range where trees still trade edges"""
        return AnnealSchedule(TREE_T_START * self.penalty_A, TREE_T_END * self.penalty_A, sweeps)

    def register(self, label: str) -> int:
        idx = len(self.labels)
        for kind, pattern in _LABEL_PATTERNS.items():
            match = pattern.match(label)
            if match:
                break
        else:
            raise ValueError(f"Unrecognized variable label '{label}'")
        nums = tuple(int(g) for g in match.groups())
        if kind == "x":
            self.parents[nums] = idx
        elif kind == "y":
            self.levels[nums] = idx
        elif kind == "d":
            self.slacks[nums] = idx
        else:
            u, v, lp = nums
            pair = (self.parents[(u, v)], self.levels[(u, lp)])
            self.ancillas[idx] = (min(pair), max(pair))
        self.labels.append(label)
        return idx

    def to_dict(self) -> Dict:
        return {
            "root": self.root,
            "objective_B": self.objective_B,
            "penalty_A": self.penalty_A,
            "rosenberg_penalty": self.rosenberg_penalty,
            "delta": self.delta,
            "graph": self.graph.to_dict(),
            "variables": {str(i): label for i, label in enumerate(self.labels)},
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "SpanningTreeEncoding":
        enc = cls(Graph.from_dict(data["graph"]), float(data["penalty_A"]), float(data["objective_B"]),
                  data.get("delta"), data.get("rosenberg_penalty"), int(data.get("root", ROOT)))
        variables = data["variables"]
        for i in range(len(variables)):
            enc.register(variables[str(i)])
        return enc


@dataclass
class TreeDecoding:
    edges: List[Tuple[int, int]]
    feasible: bool
    violations: List[str]


def _add_square(pubo: Pubo, linear_terms: Sequence[Tuple[int, float]], const: float, weight: float):
    """pubo += weight * (sum_i c_i x_i + const)^2 for binary x"""
    terms = [(i, c) for i, c in linear_terms if c != 0.0]
    pubo.add_term((), weight * const * const)
    for i, c in terms:
        pubo.add_term((i,), weight * (c * c + 2 * const * c))
    for a in range(len(terms)):
        for b in range(a + 1, len(terms)):
            pubo.add_term((terms[a][0], terms[b][0]), 2 * weight * terms[a][1] * terms[b][1])


def default_penalty(graph: Graph, objective_B: float = 1.0) -> float:
    return objective_B * (sum(abs(w) for _, _, w in graph.edges) + 1.0)


def spanning_tree_pubo(graph: Graph, options: Optional[SpanningTreeOptions] = None
                       ) -> Tuple[Pubo, SpanningTreeEncoding]:
    """
    Build the penalty polynomial whose zero-penalty assignments are spanning trees rooted at vertex 0.

    Args:
        graph: Connected graph with at least 2 vertices
        options: Objective weight, penalty weight and optional degree bound

    Returns:
        (Pubo of degree 3, encoding without ancillas)
    """
    options = options or SpanningTreeOptions()
    n = graph.n_vertices
    if n < 2:
        raise GraphError(f"Spanning-tree encoding needs at least 2 vertices, got {n}")
    if not graph.is_connected():
        raise DisconnectedGraphError(f"Graph on {n} vertices is not connected")
    if options.delta is not None and options.delta < 1:
        raise ValueError(f"Degree bound must be >= 1, got {options.delta}")

    B = float(options.objective_B)
    A = float(options.penalty_A) if options.penalty_A is not None else default_penalty(graph, B)
    dominance = B * (sum(max(w, 0.0) for _, _, w in graph.edges) + 1.0)
    if A < dominance:
        logger.warning(f"Penalty A={A} is below B*(positive weight + 1)={dominance}; "
                       f"infeasible assignments may undercut valid trees")

    enc = SpanningTreeEncoding(graph, A, B, options.delta)
    for u, v, _ in graph.edges:
        for parent, child in ((u, v), (v, u)):
            if child != ROOT:
                enc.register(f"x:{parent}-{child}")
    non_root = [v for v in range(n) if v != ROOT]
    levels = range(2, n + 1)
    for v in non_root:
        for lvl in levels:
            enc.register(f"y:{v}@{lvl}")
    if options.delta is not None:
        for v in range(n):
            if enc.child_capacity(v) != 1:
                for k in range(1, options.delta):
                    enc.register(f"d:{v}#{k}")

    pubo = Pubo(enc.n_vars)
    for v in non_root:
        # exactly one parent, exactly one level
        _add_square(pubo, [(enc.parents[(u, v)], 1.0) for u in graph.neighbors(v)], -1.0, A)
        _add_square(pubo, [(enc.levels[(v, lvl)], 1.0) for lvl in levels], -1.0, A)
        # a non-root parent must sit strictly below its child
        for u in graph.neighbors(v):
            if u == ROOT:
                continue
            for lvl in levels:
                for lp in range(lvl, n + 1):
                    pubo.add_term((enc.levels[(v, lvl)], enc.levels[(u, lp)], enc.parents[(u, v)]), A)

    for (u, v), idx in enc.parents.items():
        pubo.add_term((idx,), B * graph.weight(u, v))

    if options.delta is not None:
        for v in range(n):
            children = [enc.parents[(v, c)] for c in graph.neighbors(v) if c != ROOT]
            if enc.child_capacity(v) == 1:
                # at most one child
                for a in range(len(children)):
                    for b in range(a + 1, len(children)):
                        pubo.add_term((children[a], children[b]), A)
                continue
            # deg(v) + spare units = delta; a tree gives every vertex degree >= 1
            spare = [enc.slacks[(v, k)] for k in range(1, options.delta)]
            own = 0.0 if v == ROOT else 1.0
            _add_square(pubo, [(i, 1.0) for i in children + spare], own - options.delta, A)

    logger.info(f"Spanning-tree PUBO: {n} vertices, {enc.n_vars} variables, {len(pubo.terms)} terms, "
                f"A={A}, B={B}, delta={options.delta}")
    return pubo, enc


def _first_pair(monomial: Monomial) -> Tuple[int, int]:
    return monomial[0], monomial[1]


def quadratize(p: Pubo, penalty: float, pair_rule: Optional[PairRule] = None
               ) -> Tuple[Qubo, Dict[Tuple[int, int], int]]:
    """
    Replace one pair of every cubic monomial with an ancilla w = a*b.

    Each new ancilla adds the Rosenberg penalty P*(ab - 2aw - 2bw + 3w), which is 0 when w = ab and
    at least P otherwise. Ancillas are shared between monomials that substitute the same pair.

    Returns:
        (Qubo over the original plus ancilla variables, {(a, b): ancilla index})
    """
    if p.degree() > 3:
        raise DegreeError(f"Quadratization supports degree <= 3, got {p.degree()}")
    if penalty <= 0:
        raise ValueError(f"Rosenberg penalty must be positive, got {penalty}")
    pair_rule = pair_rule or _first_pair

    ancillas: Dict[Tuple[int, int], int] = {}
    reduced: List[Tuple[Monomial, float]] = []
    next_idx = p.n_vars
    for mono, coef in sorted(p.terms.items()):
        if len(mono) <= 2:
            reduced.append((mono, coef))
            continue
        a, b = sorted(pair_rule(mono))
        if a == b or a not in mono or b not in mono:
            raise ValueError(f"Pair rule returned ({a}, {b}) for monomial {mono}")
        (e,) = [v for v in mono if v not in (a, b)]
        if (a, b) not in ancillas:
            w = next_idx
            next_idx += 1
            ancillas[(a, b)] = w
            reduced.extend([((a, b), penalty), ((a, w), -2 * penalty), ((b, w), -2 * penalty), ((w,), 3 * penalty)])
        reduced.append(((ancillas[(a, b)], e), coef))

    out = Pubo(next_idx)
    for mono, coef in reduced:
        out.add_term(mono, coef)
    if ancillas:
        logger.debug(f"Quadratized {p.n_vars} variables with {len(ancillas)} ancillas (P={penalty})")
    return out.to_qubo(), ancillas


def spanning_tree_qubo(graph: Graph, options: Optional[SpanningTreeOptions] = None
                       ) -> Tuple[Qubo, SpanningTreeEncoding]:
    """spanning_tree_pubo followed by quadratize with z(u,v,l') = x(u,v) * y(u,l')"""
    options = options or SpanningTreeOptions()
    pubo, enc = spanning_tree_pubo(graph, options)
    P = options.rosenberg_penalty
    if P is None:
        P = enc.penalty_A + enc.objective_B
    enc.rosenberg_penalty = float(P)

    parent_of = {idx: key for key, idx in enc.parents.items()}
    level_of = {idx: key for key, idx in enc.levels.items()}

    def parent_level_pair(mono: Monomial) -> Tuple[int, int]:
        x = next(i for i in mono if i in parent_of)
        u = parent_of[x][0]
        y = next(i for i in mono if i in level_of and level_of[i][0] == u)
        return x, y

    qubo, ancilla_map = quadratize(pubo, enc.rosenberg_penalty, parent_level_pair)
    for (a, b), w in sorted(ancilla_map.items(), key=lambda item: item[1]):
        x, y = (a, b) if a in parent_of else (b, a)
        u, v = parent_of[x]
        enc.register(f"z:{u}-{v}@{level_of[y][1]}")

    logger.info(f"Spanning-tree QUBO: {qubo.n_vars} variables ({len(ancilla_map)} ancillas), "
                f"{len(qubo.quadratic)} couplings, offset {qubo.offset}")
    return qubo, enc


def complete_ancillas(bits: np.ndarray, enc: SpanningTreeEncoding) -> np.ndarray:
    """Extend assignments of the base variables with the consistent ancilla values"""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] != enc.n_base_vars:
        raise ValueError(f"Expected {enc.n_base_vars} base variables, got {bits.shape[-1]}")
    out = np.zeros(bits.shape[:-1] + (enc.n_vars,), dtype=np.int64)
    out[..., :enc.n_base_vars] = bits
    for w, (a, b) in enc.ancillas.items():
        out[..., w] = out[..., a] & out[..., b]
    return out


def decode_tree(x: Bits, enc: SpanningTreeEncoding) -> TreeDecoding:
    """Read the parent edges and list every violated constraint"""
    bits = _as_bits(x, enc.n_vars)
    graph = enc.graph
    n = graph.n_vertices
    edges = sorted(key for key, idx in enc.parents.items() if bits[idx])
    violations = []

    level = {}
    for v in range(n):
        if v == enc.root:
            continue
        n_parents = sum(1 for u in graph.neighbors(v) if bits[enc.parents[(u, v)]])
        if n_parents != 1:
            violations.append(f"parent_count: vertex {v} has {n_parents} parents")
        chosen = [lvl for lvl in range(2, n + 1) if bits[enc.levels[(v, lvl)]]]
        if len(chosen) != 1:
            violations.append(f"level_count: vertex {v} has {len(chosen)} levels")
        else:
            level[v] = chosen[0]

    for u, v in edges:
        if u == enc.root:
            continue
        if any(bits[enc.levels[(v, lvl)]] and bits[enc.levels[(u, lp)]]
               for lvl in range(2, n + 1) for lp in range(lvl, n + 1)):
            violations.append(f"level_order: parent {u} (level {level.get(u)}) is not below "
                              f"child {v} (level {level.get(v)})")

    if enc.delta is not None:
        for v in range(n):
            deg = sum(1 for c in graph.neighbors(v) if c != enc.root and bits[enc.parents[(v, c)]])
            deg += 0 if v == enc.root else 1
            spare = [k for k in range(1, enc.delta) if (v, k) in enc.slacks and bits[enc.slacks[(v, k)]]]
            if deg > enc.delta or (enc.child_capacity(v) != 1 and deg + len(spare) != enc.delta):
                violations.append(f"degree: vertex {v} has degree {deg}, spare units {spare}")

    for w, (a, b) in sorted(enc.ancillas.items()):
        if bits[w] != (bits[a] & bits[b]):
            violations.append(f"ancilla: {enc.labels[w]} is {bits[w]} but its pair product is {bits[a] & bits[b]}")

    return TreeDecoding([(int(u), int(v)) for u, v in edges], not violations, violations)


def tree_weight(graph: Graph, edges: Sequence[Tuple[int, int]]) -> float:
    return float(sum(graph.weight(u, v) for u, v in edges))


def save_encoding(enc: SpanningTreeEncoding, path: Union[str, Path]):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(enc.to_dict(), f, indent=2)


def load_encoding(path: Union[str, Path]) -> SpanningTreeEncoding:
    with open(path, "r", encoding="utf-8") as f:
        return SpanningTreeEncoding.from_dict(json.load(f))


def load_qubo(path: Union[str, Path]) -> Qubo:
    with open(path, "r", encoding="utf-8") as f:
        q = Qubo.from_dict(json.load(f))
    logger.info(f"Loaded QUBO with {q.n_vars} variables from {path}")
    return q


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def brute_force_minimize(q: Qubo) -> Tuple[float, List[str]]:
    """
    Exact minimum by enumerating all 2^n assignments in chunks.

    Returns:
        (minimum energy, every argmin bitstring sorted lexicographically)
    """
    n = q.n_vars
    if n > MAX_QUBITS:
        raise OversizeError(f"Brute force supports at most {MAX_QUBITS} variables, got {n}")
    if n == 0:
        return q.offset, [""]

    shifts = np.arange(n, dtype=np.int64)
    chunk = 1 << min(n, BRUTE_FORCE_CHUNK_BITS)
    best = np.inf
    argmins: List[int] = []
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, start + chunk, dtype=np.int64)
        energies = q.energies((idx[:, None] >> shifts[None, :]) & 1)
        low = float(energies.min())
        if low < best:
            best = low
            argmins = []
        if low == best:
            argmins.extend(int(i) for i in idx[energies == best])

    strings = sorted(bits_to_string((i >> shifts) & 1) for i in argmins)
    logger.debug(f"Brute force over {n} variables: minimum {best} with {len(strings)} argmins")
    return best, strings


@dataclass
class AnnealSchedule:
    """Geometric cooling; t_start=None means 10 * max |coefficient|. One sweep is n_vars moves."""

    t_start: Optional[float] = None
    t_end: float = 0.01
    sweeps: int = 1000

    def temperatures(self, q: Qubo) -> np.ndarray:
        t_start = self.t_start if self.t_start is not None else max(10.0 * q.max_abs_coefficient(), self.t_end)
        if self.sweeps < 1:
            raise ValueError(f"Annealing needs at least one sweep, got {self.sweeps}")
        if not t_start >= self.t_end > 0:
            raise ValueError(f"Need t_start >= t_end > 0, got t_start={t_start}, t_end={self.t_end}")
        k = np.arange(self.sweeps, dtype=np.float64)
        return t_start * (self.t_end / t_start) ** (k / self.sweeps)


def _adjacency(q: Qubo) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR neighbour lists of the coupling graph: (indptr, neighbour, coupling)"""
    rows, cols, coefs = [], [], []
    for (i, j), c in q.quadratic.items():
        rows += [i, j]
        cols += [j, i]
        coefs += [c, c]
    rows = np.asarray(rows, dtype=np.int64)
    order = np.argsort(rows, kind="stable")
    indptr = np.zeros(q.n_vars + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), np.asarray(cols, dtype=np.int64)[order], np.asarray(coefs, dtype=np.float64)[order]


@njit(nogil=True)
def _metropolis(state, local, indptr, nbr, coupling, temps, picks, draws, energy):
    per_sweep = state.size
    best_energy = energy
    best_state = state.copy()
    for m in range(picks.size):
        t = temps[m // per_sweep]
        i = picks[m]
        delta = local[i] if state[i] == 0 else -local[i]
        if delta <= 0.0 or draws[m] < np.exp(-delta / t):
            sign = 1.0 if state[i] == 0 else -1.0
            state[i] = 1 - state[i]
            energy += delta
            for k in range(indptr[i], indptr[i + 1]):
                local[nbr[k]] += sign * coupling[k]
            if energy < best_energy:
                best_energy = energy
                best_state[:] = state
    return best_energy, best_state


def simulated_annealing(q: Qubo, schedule: Optional[AnnealSchedule] = None, seed: int = 0) -> Tuple[float, str]:
    """
    Single-flip Metropolis annealing returning the best assignment seen.

    Randomness comes from numpy's PCG64 seeded with `seed`, drawn in this order: the initial
    assignment (n integers), then all proposal indices, then all acceptance uniforms.
    """
    schedule = schedule or AnnealSchedule()
    temps = schedule.temperatures(q)
    n = q.n_vars
    if n == 0:
        return q.offset, ""

    rng = np.random.Generator(np.random.PCG64(seed))
    state = rng.integers(0, 2, size=n).astype(np.int64)
    picks = rng.integers(0, n, size=schedule.sweeps * n).astype(np.int64)
    draws = rng.random(size=schedule.sweeps * n)

    indptr, nbr, coupling = _adjacency(q)
    local = q.linear.copy()
    for (i, j), c in q.quadratic.items():
        local[i] += c * state[j]
        local[j] += c * state[i]

    _, best_state = _metropolis(state, local, indptr, nbr, coupling, temps, picks, draws, q.energy(state))
    # recompute to drop accumulated rounding
    return q.energy(best_state), bits_to_string(best_state)


def anneal_restarts(q: Qubo, schedule: Optional[AnnealSchedule] = None, seeds: Sequence[int] = (0,),
                    threads: int = 1) -> Tuple[float, str, int]:
    """Best (energy, bitstring, seed) over independent runs; ties keep the earliest seed"""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("anneal_restarts needs at least one seed")

    def one(seed):
        return simulated_annealing(q, schedule, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, seeds))
    else:
        runs = [one(s) for s in seeds]

    best = 0
    for k, (energy, _) in enumerate(runs):
        if energy < runs[best][0]:
            best = k
    logger.info(f"Annealing: best energy {runs[best][0]} from seed {seeds[best]} over {len(seeds)} restarts")
    return runs[best][0], runs[best][1], seeds[best]
