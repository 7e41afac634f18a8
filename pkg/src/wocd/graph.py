"""Graph, feature, and cover I/O plus deterministic synthetic benchmarks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FormatError(ValueError):
    """An input file violates the expected text format."""


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted graph in compressed sparse row form.

    Each undirected edge is stored in both directions; neighbor lists are
    strictly ascending with no self-loops or duplicates.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return self.indices.size // 2

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nu = self.neighbors(u)
        i = np.searchsorted(nu, v)
        return i < nu.size and nu[i] == v

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_pairs(self) -> np.ndarray:
        """(M, 2) array of undirected edges with u < v, lexicographic order."""
        src = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    @classmethod
    def from_edges(cls, pairs, n_nodes: int) -> "Graph":
        """Build from an iterable of (u, v) pairs.

        Self-loops are dropped, duplicates collapsed, and the adjacency
        symmetrized.
        """
        e = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n_nodes):
            raise FormatError("node id out of range")
        e = e[e[:, 0] != e[:, 1]]
        if e.size:
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            und = np.unique(np.stack([lo, hi], axis=1), axis=0)
            both = np.concatenate([und, und[:, ::-1]])
        else:
            both = np.empty((0, 2), dtype=np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n_nodes)
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return cls(indptr=indptr, indices=both[:, 1].copy())


@dataclass(frozen=True)
class Cover:
    """Binary node-community affiliation matrix (N x K, overlap allowed)."""

    memberships: np.ndarray  # (N, K) uint8

    @property
    def n_nodes(self) -> int:
        return self.memberships.shape[0]

    @property
    def n_communities(self) -> int:
        return self.memberships.shape[1]

    def communities_of(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.memberships[v])

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.memberships[:, k])

    @classmethod
    def from_lists(cls, lists, n_communities: int) -> "Cover":
        m = np.zeros((len(lists), n_communities), dtype=np.uint8)
        for v, cs in enumerate(lists):
            for c in cs:
                m[v, c] = 1
        return cls(memberships=m)


@dataclass(frozen=True)
class SampledLabels:
    """Nodes whose full ground-truth affiliation rows are revealed."""

    node_ids: np.ndarray  # sorted, unique
    rows: np.ndarray  # (len(node_ids), K) uint8

    @property
    def n_sampled(self) -> int:
        return self.node_ids.size


@dataclass(frozen=True)
class SynthConfig:
    """Planted overlapping partition with block-structured binary features."""

    n_nodes: int
    n_communities: int
    overlap_fraction: float = 0.15
    p_in: float = 0.08
    p_out: float = 0.002
    dims_per_community: int = 16
    feature_signal: float = 0.6
    feature_noise: float = 0.05
    # when False, edge probabilities depend on the primary community only and
    # secondary memberships of overlap nodes are visible in features alone
    overlap_edges: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1 or self.n_communities < 1 or self.dims_per_community < 1:
            raise ValueError("counts must be >= 1")
        if not (0.0 <= self.p_out < self.p_in <= 1.0):
            raise ValueError("require 0 <= p_out < p_in <= 1")
        if not (0.0 <= self.overlap_fraction <= 1.0):
            raise ValueError("overlap_fraction must be in [0, 1]")


def _parse_header(line: str, key: str):
    prefix = f"#{key}="
    if line.startswith(prefix):
        try:
            return int(line[len(prefix):])
        except ValueError as exc:
            raise FormatError(f"bad header line: {line!r}") from exc
    return None


def load_edge_list(path) -> Graph:
    """Read a TSV edge list; '#' lines are comments, '#nodes=N' declares N."""
    declared_n = None
    pairs = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                n = _parse_header(line, "nodes")
                if n is not None:
                    declared_n = n
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'u\\tv', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer node id") from exc
            if u < 0 or v < 0:
                raise FormatError(f"{path}:{lineno}: negative node id")
            pairs.append((u, v))
            max_id = max(max_id, u, v)
    n_nodes = max_id + 1 if declared_n is None else declared_n
    if max_id >= n_nodes:
        raise FormatError(f"node id {max_id} >= declared #nodes={n_nodes}")
    return Graph.from_edges(pairs, n_nodes)


def write_edge_list(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes={graph.n_nodes}\n")
        for u, v in graph.edge_pairs():
            fh.write(f"{u}\t{v}\n")


def load_cover(path) -> Cover:
    """Read 'node_id: c1 c2 ...' lines; headers may declare nodes/communities."""
    declared_n = None
    declared_k = None
    rows = {}
    max_node = -1
    max_comm = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                n = _parse_header(line, "nodes")
                if n is not None:
                    declared_n = n
                k = _parse_header(line, "communities")
                if k is not None:
                    declared_k = k
                continue
            if ":" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'node: c1 c2 ...'")
            head, _, tail = line.partition(":")
            try:
                node = int(head)
                comms = [int(tok) for tok in tail.split()]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer id") from exc
            if node < 0 or any(c < 0 for c in comms):
                raise FormatError(f"{path}:{lineno}: negative id")
            if node in rows:
                raise FormatError(f"{path}:{lineno}: duplicate node line for {node}")
            rows[node] = comms
            max_node = max(max_node, node)
            if comms:
                max_comm = max(max_comm, max(comms))
    n_nodes = max_node + 1 if declared_n is None else declared_n
    n_comm = max_comm + 1 if declared_k is None else declared_k
    if max_node >= n_nodes:
        raise FormatError(f"node id {max_node} >= declared #nodes={n_nodes}")
    if max_comm >= n_comm:
        raise FormatError(f"community id {max_comm} >= declared #communities={n_comm}")
    m = np.zeros((n_nodes, max(n_comm, 0)), dtype=np.uint8)
    for node, comms in rows.items():
        m[node, comms] = 1
    return Cover(memberships=m)


def write_cover(cover: Cover, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes={cover.n_nodes}\n")
        fh.write(f"#communities={cover.n_communities}\n")
        for v in range(cover.n_nodes):
            cs = " ".join(str(c) for c in cover.communities_of(v))
            fh.write(f"{v}: {cs}".rstrip() + "\n")


def load_features(path, header: bool = False) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    if not np.all(np.isfinite(X)):
        raise FormatError(f"{path}: non-finite feature value")
    return X.astype(np.float64)


def write_features(X: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.10g")


def synth_graph(config: SynthConfig):
    """Generate a (Graph, features, Cover) triple, fully determined by seed.

    Nodes are split into K equal-size primary communities; a fraction gets a
    second community; edges are Bernoulli(p_in) inside a shared community and
    Bernoulli(p_out) otherwise. Features are block-indicator Bernoulli noise.
    """
    rng = np.random.default_rng(config.seed)
    n, k = config.n_nodes, config.n_communities
    bounds = [(i * n) // k for i in range(k + 1)]
    memb = np.zeros((n, k), dtype=np.uint8)
    primary = np.zeros(n, dtype=np.int64)
    for c in range(k):
        memb[bounds[c]:bounds[c + 1], c] = 1
        primary[bounds[c]:bounds[c + 1]] = c

    n_overlap = int(round(config.overlap_fraction * n))
    if n_overlap > 0 and k > 1:
        chosen = rng.choice(n, size=n_overlap, replace=False)
        offsets = rng.integers(1, k, size=n_overlap)
        second = (primary[chosen] + offsets) % k
        memb[chosen, second] = 1
    cover = Cover(memberships=memb)

    if config.overlap_edges:
        share = (memb.astype(np.int64) @ memb.T.astype(np.int64)) > 0
    else:
        share = primary[:, None] == primary[None, :]
    prob = np.where(share, config.p_in, config.p_out)
    draw = rng.random((n, n))
    iu, ju = np.triu_indices(n, k=1)
    keep = draw[iu, ju] < prob[iu, ju]
    graph = Graph.from_edges(np.stack([iu[keep], ju[keep]], axis=1), n)

    d = k * config.dims_per_community
    prob_x = np.full((n, d), config.feature_noise)
    for c in range(k):
        cols = slice(c * config.dims_per_community, (c + 1) * config.dims_per_community)
        prob_x[memb[:, c] == 1, cols] = config.feature_signal
    X = (rng.random((n, d)) < prob_x).astype(np.float64)
    return graph, X, cover


def sample_labels(cover: Cover, rho: float, seed: int) -> SampledLabels:
    """Draw an equal per-community quota q = ceil(rho*N/K) of labeled nodes.

    A node picked through several communities is reported once, with its full
    ground-truth row. Quotas are clamped to community size.
    """
    if not (0.0 <= rho <= 1.0):
        raise ValueError("rho must be in [0, 1]")
    n, k = cover.n_nodes, cover.n_communities
    if rho == 0.0 or k == 0:
        return SampledLabels(
            node_ids=np.empty(0, dtype=np.int64),
            rows=np.empty((0, k), dtype=np.uint8),
        )
    rng = np.random.default_rng(seed)
    quota = math.ceil(rho * n / k)
    picked = set()
    for c in range(k):
        members = cover.members(c)
        take = min(quota, members.size)
        if take > 0:
            picked.update(rng.choice(members, size=take, replace=False).tolist())
    node_ids = np.array(sorted(picked), dtype=np.int64)
    return SampledLabels(node_ids=node_ids, rows=cover.memberships[node_ids].copy())
