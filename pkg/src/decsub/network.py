"""Network topologies and the consensus weight matrix.

A run happens over an undirected connected graph of N nodes.  Nodes average
their neighbors' vectors through a symmetric doubly stochastic weight matrix
whose mixing speed is governed by beta, the second-largest eigenvalue
magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolatedError,
    InvalidParameterError,
    TopologyGenerationError,
)

_SYM_TOL = 1e-12
_STOCH_TOL = 1e-12
_BETA_CEILING = 1.0 - 1e-10
_ER_MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph on nodes 0..N-1 without self-loops."""

    node_count: int
    edges: frozenset  # frozenset of (i, j) tuples with i < j

    def __post_init__(self):
        if self.node_count < 2:
            raise InvalidParameterError("graph needs at least 2 nodes")
        for i, j in self.edges:
            if not (0 <= i < j < self.node_count):
                raise InvalidParameterError(f"bad edge ({i}, {j})")
        if not _is_connected(self.node_count, self.edges):
            raise InvalidParameterError("graph must be connected")

    @property
    def degrees(self):
        deg = np.zeros(self.node_count, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self, i):
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def to_edge_list(self) -> str:
        """Serialize as text: first line N, then one '(i) (j)' pair per line."""
        lines = [str(self.node_count)]
        lines += [f"{i} {j}" for i, j in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "Graph":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        n = int(lines[0])
        edges = set()
        for ln in lines[1:]:
            i, j = map(int, ln.split())
            edges.add((min(i, j), max(i, j)))
        return cls(n, frozenset(edges))


def _is_connected(n, edges):
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def build_topology(kind: str, n_nodes: int, edge_prob: float = None,
                   seed: int = 0) -> Graph:
    """Build a complete, cycle, or Erdos-Renyi graph on n_nodes nodes.

    ER graphs sample each edge independently with probability edge_prob and
    resample (with a derived seed) until connected, up to 1000 attempts.
    """
    if n_nodes < 2:
        raise InvalidParameterError("n_nodes must be >= 2")
    if kind == "complete":
        edges = frozenset((i, j) for i in range(n_nodes)
                          for j in range(i + 1, n_nodes))
        return Graph(n_nodes, edges)
    if kind == "cycle":
        edges = {(i, i + 1) for i in range(n_nodes - 1)}
        edges.add((0, n_nodes - 1))
        return Graph(n_nodes, frozenset(edges))
    if kind == "erdos_renyi":
        if edge_prob is None or not (0.0 < edge_prob <= 1.0):
            raise InvalidParameterError("edge_prob must be in (0, 1]")
        ss = np.random.SeedSequence(seed)
        for attempt_seed in ss.spawn(_ER_MAX_ATTEMPTS):
            rng = np.random.default_rng(attempt_seed)
            mask = rng.random((n_nodes, n_nodes)) < edge_prob
            edges = frozenset((i, j) for i in range(n_nodes)
                              for j in range(i + 1, n_nodes) if mask[i, j])
            if _is_connected(n_nodes, edges):
                return Graph(n_nodes, edges)
        raise TopologyGenerationError(
            f"no connected ER graph after {_ER_MAX_ATTEMPTS} attempts "
            f"(N={n_nodes}, p={edge_prob})")
    raise InvalidParameterError(f"unknown topology kind {kind!r}")


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric doubly stochastic consensus matrix with cached beta."""

    entries: np.ndarray
    beta: float = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", a)
        validate_weight_matrix(a)
        if self.beta is None:
            object.__setattr__(self, "beta", spectral_beta(a))

    @property
    def node_count(self):
        return self.entries.shape[0]


def validate_weight_matrix(a: np.ndarray, graph: Graph = None):
    """Check symmetry, double stochasticity, nonnegativity, and sparsity."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameterError("weight matrix must be square")
    if np.max(np.abs(a - a.T)) > _SYM_TOL:
        raise AssumptionViolatedError("weight matrix is not symmetric")
    if np.min(a) < -_STOCH_TOL:
        raise AssumptionViolatedError("weight matrix has negative entries")
    if np.max(np.abs(a.sum(axis=1) - 1.0)) > _STOCH_TOL:
        raise AssumptionViolatedError("row sums differ from 1")
    if np.max(np.abs(a.sum(axis=0) - 1.0)) > _STOCH_TOL:
        raise AssumptionViolatedError("column sums differ from 1")
    if graph is not None:
        n = graph.node_count
        allowed = np.eye(n, dtype=bool)
        for i, j in graph.edges:
            allowed[i, j] = allowed[j, i] = True
        if np.any(np.abs(a[~allowed]) > 0):
            raise AssumptionViolatedError("nonzero weight on a non-edge")


def spectral_beta(entries: np.ndarray) -> float:
    """Second-largest eigenvalue magnitude of a symmetric stochastic matrix.

    Raises AssumptionViolatedError when beta reaches 1 (disconnected or
    periodic structure).
    """
    vals = np.linalg.eigvalsh(np.asarray(entries, dtype=float))
    mags = np.sort(np.abs(vals))[::-1]
    beta = float(mags[1])
    if beta >= _BETA_CEILING:
        raise AssumptionViolatedError(
            f"beta = {beta:.12f} >= 1: consensus would not mix")
    return beta


def metropolis_weights(g: Graph) -> WeightMatrix:
    """Metropolis rule: a_ij = 1/(1+max(d_i, d_j)) on edges, diagonal fills."""
    n = g.node_count
    deg = g.degrees
    a = np.zeros((n, n))
    for i, j in g.edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        a[i, j] = a[j, i] = w
    np.fill_diagonal(a, 1.0 - a.sum(axis=1))
    return WeightMatrix(a)


def consensus_mix(w: WeightMatrix, x: np.ndarray) -> np.ndarray:
    """One synchronous mixing step: output row i = sum_j a_ij * row j.

    Reads a snapshot of x; never reuses freshly mixed rows.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != w.node_count:
        raise InvalidParameterError(
            f"expected {w.node_count} rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("non-finite rows in consensus input")
    return w.entries @ x
