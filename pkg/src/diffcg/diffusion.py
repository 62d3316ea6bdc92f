"""Network topology, Metropolis combiners, and per-instant orchestration.

A network time instant has two phases: a combination phase that reads the
previous-instant estimates of the neighborhood (a convex average under a
column-stochastic weight matrix) and an adaptation phase that runs the
per-node engine on the new sample. Combine-then-adapt (CTA) starts the
adaptation from the combined estimate; adapt-then-combine (ATC) combines
the freshly adapted estimates. The optional zero-attracting correction is
applied to the final estimate of the instant in both protocols.

All nodes advance as one stacked NodeState, which is numerically
identical to updating them one at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .engines import Engine, EngineParams, NodeState, engine_step
from .numerics import DimensionMismatchError
from .penalties import shrink

__all__ = [
    "Protocol",
    "Topology",
    "build_topology",
    "metropolis_weights",
    "identity_weights",
    "combine",
    "cta_step",
    "atc_step",
    "noncooperative_step",
    "network_step",
    "to_edge_list",
    "from_edge_list",
]


class Protocol(str, Enum):
    CTA = "cta"
    ATC = "atc"
    NONCOOPERATIVE = "noncooperative"


@dataclass(frozen=True, eq=False)
class Topology:
    """Undirected connected graph with self-inclusive neighborhoods.

    adjacency is a symmetric boolean matrix whose diagonal is all true;
    node k's neighborhood is the set of true entries in column k.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if not np.all(np.diag(adj)):
            raise ValueError("adjacency diagonal must be all true (self-inclusive)")
        if not self._connected(adj):
            raise ValueError("topology must be connected")
        object.__setattr__(self, "adjacency", adj)

    @staticmethod
    def _connected(adj: np.ndarray) -> bool:
        n = adj.shape[0]
        seen = np.zeros(n, dtype=bool)
        frontier = [0]
        seen[0] = True
        while frontier:
            k = frontier.pop()
            for l in np.flatnonzero(adj[k]):
                if not seen[l]:
                    seen[l] = True
                    frontier.append(l)
        return bool(seen.all())

    @property
    def nodes(self) -> int:
        return self.adjacency.shape[0]

    def neighbor_counts(self) -> np.ndarray:
        """Self-inclusive neighborhood sizes |N_k|."""
        return self.adjacency.sum(axis=1)


def build_topology(nodes: int, extra_edges: int = 0, seed=0) -> Topology:
    """Ring backbone plus seeded random chords; connected by construction."""
    nodes = int(nodes)
    extra_edges = int(extra_edges)
    if nodes < 1:
        raise ValueError(f"nodes must be >= 1, got {nodes}")
    if extra_edges < 0:
        raise ValueError(f"extra_edges must be >= 0, got {extra_edges}")
    adj = np.eye(nodes, dtype=bool)
    for k in range(nodes if nodes > 2 else nodes - 1):
        adj[k, (k + 1) % nodes] = True
        adj[(k + 1) % nodes, k] = True
    candidates = [
        (u, v) for u in range(nodes) for v in range(u + 1, nodes) if not adj[u, v]
    ]
    if extra_edges > len(candidates):
        raise ValueError(
            f"extra_edges={extra_edges} exceeds the {len(candidates)} available non-ring pairs"
        )
    if extra_edges:
        rng = np.random.default_rng(seed)
        for idx in rng.choice(len(candidates), size=extra_edges, replace=False):
            u, v = candidates[idx]
            adj[u, v] = True
            adj[v, u] = True
    return Topology(adj)


def metropolis_weights(topology: Topology) -> np.ndarray:
    """Symmetric doubly stochastic combiner: 1/max(|N_k|,|N_l|) off-diagonal.

    Neighborhood sizes include the node itself; the diagonal absorbs the
    remainder so every column sums to one.
    """
    adj = topology.adjacency
    n = topology.nodes
    counts = topology.neighbor_counts()
    pair_max = np.maximum(counts[:, None], counts[None, :]).astype(np.float64)
    off = adj & ~np.eye(n, dtype=bool)
    weights = np.zeros((n, n))
    weights[off] = 1.0 / pair_max[off]
    weights[np.arange(n), np.arange(n)] = 1.0 - weights.sum(axis=1)
    return weights


def identity_weights(nodes: int) -> np.ndarray:
    """Combiner that keeps every node's own estimate (no cooperation)."""
    return np.eye(int(nodes))


def combine(weights, estimates, node: int | None = None) -> np.ndarray:
    """Convex combination phi_k = sum_l a_lk w_l of neighbor estimates.

    With node=None all combined estimates are returned as rows; with a
    node index only that node's combination is computed.
    """
    weights = np.asarray(weights, dtype=np.float64)
    estimates = np.asarray(estimates, dtype=np.complex128)
    n = estimates.shape[0]
    if weights.shape != (n, n):
        raise DimensionMismatchError(
            f"weights must be ({n}, {n}) for {n} stacked estimates, got {weights.shape}"
        )
    if node is None:
        return weights.T @ estimates
    return weights[:, node] @ estimates


def cta_step(state: NodeState, weights, x, d, params: EngineParams,
             engine: Engine) -> NodeState:
    """Combine-then-adapt instant: every node adapts from its combination."""
    phi = combine(weights, state.weights)
    out = engine_step(engine, state, x, d, params, start=phi)
    return replace(out, weights=shrink(out.weights, params.penalty), combined=phi)


def atc_step(state: NodeState, weights, x, d, params: EngineParams,
             engine: Engine) -> NodeState:
    """Adapt-then-combine instant: freshly adapted estimates are averaged."""
    out = engine_step(engine, state, x, d, params)
    adapted = out.weights
    mixed = combine(weights, adapted)
    return replace(out, weights=shrink(mixed, params.penalty), combined=adapted)


def noncooperative_step(state: NodeState, x, d, params: EngineParams,
                        engine: Engine) -> NodeState:
    """Isolated adaptation; no estimate exchange."""
    out = engine_step(engine, state, x, d, params)
    return replace(out, weights=shrink(out.weights, params.penalty))


def network_step(protocol: Protocol, state: NodeState, weights, x, d,
                 params: EngineParams, engine: Engine) -> NodeState:
    """Advance the whole network by one time instant."""
    protocol = Protocol(protocol)
    if protocol is Protocol.CTA:
        return cta_step(state, weights, x, d, params, engine)
    if protocol is Protocol.ATC:
        return atc_step(state, weights, x, d, params, engine)
    return noncooperative_step(state, x, d, params, engine)


def to_edge_list(topology: Topology) -> str:
    """Serialize as one "u v" pair per line (0-indexed, u <= v).

    Self-loops are written too, so the node count round-trips even for
    degenerate graphs.
    """
    lines = []
    adj = topology.adjacency
    for u in range(topology.nodes):
        for v in range(u, topology.nodes):
            if adj[u, v]:
                lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def from_edge_list(text: str) -> Topology:
    """Parse the edge-list format written by to_edge_list."""
    pairs = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"edge list line {ln}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"edge list line {ln}: non-integer node id in {raw!r}") from exc
        if u < 0 or v < 0:
            raise ValueError(f"edge list line {ln}: negative node id in {raw!r}")
        pairs.append((u, v))
    if not pairs:
        raise ValueError("edge list is empty")
    n = max(max(u, v) for u, v in pairs) + 1
    adj = np.eye(n, dtype=bool)
    for u, v in pairs:
        adj[u, v] = True
        adj[v, u] = True
    return Topology(adj)
