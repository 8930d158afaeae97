"""Undirected simple graphs, Stochastic Blockmodel generation and structural statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import (
    ConfigError,
    EdgeListParseError,
    NodeRangeError,
    SelfLoopError,
    SizeGuardError,
    UndefinedStatisticError,
)

MAX_DENSE_NODES = 4096


class Graph:
    """Immutable undirected simple graph on internal nodes ``0..n-1``.

    ``node_ids[u]`` is the external id of internal node ``u``. Adjacency is kept
    as a CSR matrix with sorted column indices so neighbor slices are cheap.
    """

    __slots__ = ("n", "adjacency", "node_ids", "_degrees")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = (), node_ids=None):
        if n < 0:
            raise ConfigError("node count must be non-negative")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise NodeRangeError(f"edge endpoint outside 0..{n - 1}")
            loops = e[:, 0] == e[:, 1]
            if loops.any():
                raise SelfLoopError(int(e[loops][0, 0]))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(n, n))
        adj.sum_duplicates()
        adj.data[:] = 1
        adj.sort_indices()
        self.n = n
        self.adjacency = adj
        self.node_ids = np.arange(n, dtype=np.int64) if node_ids is None else np.asarray(node_ids, dtype=np.int64)
        if self.node_ids.shape != (n,):
            raise ConfigError("node_ids must have one entry per node")
        self._degrees = np.diff(adj.indptr).astype(np.int64)

    @classmethod
    def from_dense(cls, a, node_ids=None) -> "Graph":
        a = np.asarray(a)
        if a.shape[0] != a.shape[1]:
            raise ConfigError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ConfigError("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise SelfLoopError(int(np.flatnonzero(np.diag(a))[0]))
        u, v = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], np.column_stack([u, v]), node_ids)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.nnz // 2)

    def _check(self, u: int) -> int:
        if not 0 <= u < self.n:
            raise NodeRangeError(f"node {u} outside 0..{self.n - 1}")
        return int(u)

    def neighbors(self, u: int) -> np.ndarray:
        u = self._check(u)
        a = self.adjacency
        return a.indices[a.indptr[u]:a.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array with ``u < v``, lexicographically sorted."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        e = np.column_stack([coo.row, coo.col]).astype(np.int64)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def to_dense(self) -> np.ndarray:
        if self.n > MAX_DENSE_NODES:
            raise SizeGuardError(f"{self.n} nodes exceeds dense limit {MAX_DENSE_NODES}")
        return self.adjacency.toarray()

    def to_edge_list(self) -> str:
        ids = self.node_ids
        return "".join(f"{ids[u]} {ids[v]}\n" for u, v in self.edges())


def degree(g: Graph, u: int) -> int:
    return int(g._degrees[g._check(u)])


def degrees(g: Graph) -> np.ndarray:
    return g._degrees.copy()


def codegree(g: Graph, u: int, v: int) -> int:
    """Number of common neighbors of two distinct nodes."""
    if u == v:
        raise ConfigError("codegree requires two distinct nodes")
    return int(np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True).size)


def edge_codegrees(g: Graph) -> sp.csr_matrix:
    """Sparse matrix holding ``codegree(u, v)`` on every edge (zero-weight edges dropped)."""
    a = g.adjacency
    return (a @ a).multiply(a).tocsr()


def from_edge_list(text: str) -> Graph:
    """Parse whitespace-separated integer pairs, one edge per line.

    Lines starting with ``#`` and blank lines are skipped. External ids need not be
    contiguous; internal ids follow the sorted external ids.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, raw)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, raw) from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, raw)
        if u == v:
            raise SelfLoopError(u, lineno)
        pairs.append((u, v))
    if not pairs:
        return Graph(0)
    ext = np.asarray(pairs, dtype=np.int64)
    ids, inverse = np.unique(ext, return_inverse=True)
    return Graph(ids.size, inverse.reshape(-1, 2), node_ids=ids)


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return from_edge_list(fh.read())


@dataclass(frozen=True)
class SbmSpec:
    """Stochastic Blockmodel with fixed block sizes and symmetric connectivity ``b``."""

    block_sizes: tuple[int, ...]
    b: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        b = np.array(self.b, dtype=float)
        if b.ndim != 2 or b.shape != (len(sizes), len(sizes)):
            raise ConfigError(f"b must be {len(sizes)}x{len(sizes)}, got {b.shape}")
        if any(s <= 0 for s in sizes):
            raise ConfigError("block sizes must be positive")
        if not np.all(np.isfinite(b)) or b.min() < 0 or b.max() > 1:
            raise ConfigError("edge probabilities must lie in [0, 1]")
        if not np.allclose(b, b.T, rtol=0, atol=1e-15):
            raise ConfigError("b must be symmetric")
        b.setflags(write=False)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "b", b)

    @classmethod
    def planted(cls, k: int, p: float, r: float, block_size: int) -> "SbmSpec":
        """Equal blocks with ``B = p I + r J`` (in-block ``p + r``, out-block ``r``)."""
        if not 0 < r < p + r < 1:
            raise ConfigError(f"need 0 < r < p + r < 1, got p={p}, r={r}")
        return cls((block_size,) * k, p * np.eye(k) + r * np.ones((k, k)))

    @classmethod
    def two_level(cls, block_sizes: Sequence[int], p_in: float, p_out: float) -> "SbmSpec":
        k = len(block_sizes)
        b = np.full((k, k), float(p_out))
        np.fill_diagonal(b, p_in)
        return cls(tuple(block_sizes), b)

    @property
    def k(self) -> int:
        return len(self.block_sizes)

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    def assignment(self) -> np.ndarray:
        """Block id of every node; nodes are laid out block by block."""
        return np.repeat(np.arange(self.k), self.block_sizes)

    def membership_matrix(self) -> np.ndarray:
        z = self.assignment()
        out = np.zeros((self.n, self.k))
        out[np.arange(self.n), z] = 1.0
        return out


def out_block_probability(k: int, block_size: int, p_in: float, edge_ratio: float) -> float:
    """Out-block probability giving ``edge_ratio`` = expected in-block / out-block edges.

    Equal blocks: in-block edges ``k C(s,2) p_in``, out-block ``C(k,2) s^2 q``.
    """
    if k < 2 or edge_ratio <= 0:
        raise ConfigError("need k >= 2 and a positive edge ratio")
    q = (block_size - 1) * p_in / ((k - 1) * block_size * edge_ratio)
    if not 0 <= q <= 1:
        raise ConfigError(f"solved out-block probability {q} outside [0, 1]")
    return q


def sample_sbm(spec: SbmSpec, seed=None) -> tuple[Graph, np.ndarray]:
    """Draw one graph from ``spec``; every pair ``u < v`` is an independent Bernoulli."""
    rng = np.random.default_rng(seed)
    z = spec.assignment()
    n = spec.n
    if n > MAX_DENSE_NODES:
        raise SizeGuardError(f"{n} nodes exceeds dense limit {MAX_DENSE_NODES}")
    iu, ju = np.triu_indices(n, k=1)
    probs = spec.b[z[iu], z[ju]]
    keep = rng.random(iu.size) < probs
    return Graph(n, np.column_stack([iu[keep], ju[keep]])), z


def expected_adjacency(spec: SbmSpec) -> np.ndarray:
    """Population matrix ``Z B Z^T``, diagonal included."""
    if spec.n > MAX_DENSE_NODES:
        raise SizeGuardError(f"{spec.n} nodes exceeds dense limit {MAX_DENSE_NODES}")
    z = spec.assignment()
    return spec.b[np.ix_(z, z)].copy()


def connected_components(g: Graph) -> np.ndarray:
    return csgraph.connected_components(g.adjacency, directed=False)[1]


def is_connected(g: Graph) -> bool:
    return g.n > 0 and csgraph.connected_components(g.adjacency, directed=False)[0] == 1


def induced_subgraph(g: Graph, nodes) -> Graph:
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    sub = g.adjacency[nodes][:, nodes]
    coo = sp.triu(sub, k=1).tocoo()
    return Graph(nodes.size, np.column_stack([coo.row, coo.col]), node_ids=g.node_ids[nodes])


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the largest component and the internal ids it keeps.

    Ties go to the component containing the smallest external id.
    """
    if g.n == 0:
        raise ConfigError("empty graph has no components")
    labels = connected_components(g)
    sizes = np.bincount(labels)
    best = max(
        np.flatnonzero(sizes == sizes.max()),
        key=lambda c: -g.node_ids[labels == c].min(),
    )
    keep = np.flatnonzero(labels == best)
    return induced_subgraph(g, keep), keep


def triangle_count(g: Graph) -> int:
    return int(edge_codegrees(g).sum() // 6)


def global_clustering_coefficient(g: Graph) -> float:
    """Transitivity: ``3 * triangles / connected triplets``."""
    d = g._degrees
    triplets = int(np.sum(d * (d - 1) // 2))
    if triplets == 0:
        raise UndefinedStatisticError("graph has no connected triplet")
    return 3 * triangle_count(g) / triplets
