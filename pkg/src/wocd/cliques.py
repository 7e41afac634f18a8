"""Weak-clique extraction: node priority, Salton similarity, greedy selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class CliqueRecord:
    """A weak clique seeded at edge (seed_u, seed_v).

    members is always {seed_u, seed_v} plus every common neighbor, sorted.
    """

    seed_u: int
    seed_v: int
    members: np.ndarray


@dataclass
class CliqueSet:
    cliques: list = field(default_factory=list)
    member_index: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cliques)

    def append(self, record: CliqueRecord) -> None:
        idx = len(self.cliques)
        self.cliques.append(record)
        for v in record.members:
            self.member_index.setdefault(int(v), []).append(idx)


def _check_node(graph: Graph, u: int) -> None:
    if not (0 <= u < graph.n_nodes):
        raise IndexError(f"node id {u} out of range [0, {graph.n_nodes})")


def _common_neighbors(graph: Graph, u: int, v: int) -> np.ndarray:
    return np.intersect1d(graph.neighbors(u), graph.neighbors(v), assume_unique=True)


def node_priority(graph: Graph, u: int) -> float:
    """(m_u + d_u) / (d_u + 1), with m_u the edge count among u's neighbors."""
    _check_node(graph, u)
    d = graph.degree(u)
    if d == 0:
        return 0.0
    # each neighbor-neighbor edge is seen from both endpoints
    m = sum(_common_neighbors(graph, u, int(v)).size for v in graph.neighbors(u)) / 2
    return (m + d) / (d + 1)


def salton_index(graph: Graph, u: int, v: int) -> float:
    """|n_u ∩ n_v| / sqrt(d_u * d_v); zero when either endpoint is isolated."""
    _check_node(graph, u)
    _check_node(graph, v)
    if u == v:
        raise ValueError("salton_index requires u != v")
    du, dv = graph.degree(u), graph.degree(v)
    if du == 0 or dv == 0:
        return 0.0
    return _common_neighbors(graph, u, v).size / np.sqrt(du * dv)


def weak_clique(graph: Graph, u: int, v: int) -> CliqueRecord:
    """{u, v} plus all common neighbors of the edge (u, v)."""
    _check_node(graph, u)
    _check_node(graph, v)
    if not graph.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    members = np.union1d(np.array([u, v], dtype=np.int64), _common_neighbors(graph, u, v))
    return CliqueRecord(seed_u=u, seed_v=v, members=members)


def identify_weak_cliques(graph: Graph) -> CliqueSet:
    """Greedy weak-clique extraction.

    Repeatedly starts from the remaining node with the highest priority,
    pairs it with its most Salton-similar neighbor (already-consumed
    neighbors stay eligible), records the weak clique, and retires both
    endpoints as future starting points. Ties break toward the smaller id.
    Isolated nodes are retired without emitting anything.
    """
    n = graph.n_nodes
    indptr, indices = graph.indptr, graph.indices

    # per-directed-slot common-neighbor counts, reused for priorities and SI
    slot_common = np.zeros(indices.size, dtype=np.int64)
    neigh = [indices[indptr[u]:indptr[u + 1]] for u in range(n)]
    for u in range(n):
        nu = neigh[u]
        for s in range(indptr[u], indptr[u + 1]):
            v = indices[s]
            if u < v:
                c = np.intersect1d(nu, neigh[v], assume_unique=True).size
                slot_common[s] = c
            else:
                # mirror slot (v -> u) was filled when v was processed
                vs = indptr[v] + np.searchsorted(neigh[v], u)
                slot_common[s] = slot_common[vs]

    degrees = np.diff(indptr).astype(np.float64)
    m = np.zeros(n, dtype=np.float64)
    np.add.at(m, np.repeat(np.arange(n), np.diff(indptr)), slot_common)
    m /= 2.0
    priority = np.where(degrees > 0, (m + degrees) / (degrees + 1.0), 0.0)

    # priorities are fixed, so a single descending sort (smallest id first
    # among ties) enumerates argmax picks
    order = np.lexsort((np.arange(n), -priority))
    remaining = np.ones(n, dtype=bool)
    out = CliqueSet()
    inv_sqrt_d = np.where(degrees > 0, 1.0 / np.sqrt(np.maximum(degrees, 1.0)), 0.0)
    for u in order:
        u = int(u)
        if not remaining[u]:
            continue
        nu = neigh[u]
        if nu.size == 0:
            remaining[u] = False
            continue
        si = slot_common[indptr[u]:indptr[u + 1]] * inv_sqrt_d[u] * inv_sqrt_d[nu]
        v = int(nu[int(np.argmax(si))])  # argmax returns first max: smallest id
        members = np.union1d(
            np.array([u, v], dtype=np.int64),
            np.intersect1d(nu, neigh[v], assume_unique=True),
        )
        out.append(CliqueRecord(seed_u=u, seed_v=v, members=members))
        remaining[u] = False
        remaining[v] = False
    return out
