"""Referral weight schemes, transition rows and stationary laws.

Anti-cluster weights rest on the identity (valid when the diagonal of ``A`` is zero)::

    [A Abar]_{uv} = deg(u) - codeg(u, v)
    [Abar A]_{uv} = deg(v) - codeg(u, v)

so on an edge the combined weight is ``deg(u) + deg(v) - 2 codeg(u, v)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import (
    AntiClusterDeadNodeError,
    DisconnectedGraphError,
    IsolatedNodeError,
    NonReversibleSchemeError,
    SizeGuardError,
)
from .graph import MAX_DENSE_NODES, Graph, SbmSpec, edge_codegrees, is_connected


class WeightScheme(str, enum.Enum):
    UNIFORM = "uniform"
    ANTI_CLUSTER_A = "ac-a"
    ANTI_CLUSTER_B = "ac-b"
    ANTI_CLUSTER = "ac"
    COIN_FLIP = "coin-flip"

    @property
    def symmetric(self) -> bool:
        return self in (WeightScheme.UNIFORM, WeightScheme.ANTI_CLUSTER)

    @classmethod
    def parse(cls, value: "str | WeightScheme") -> "WeightScheme":
        if isinstance(value, cls):
            return value
        aliases = {"rds": "uniform", "acrds": "ac", "ac-rds": "ac", "combined": "ac", "a": "ac-a", "b": "ac-b"}
        v = str(value).strip().lower()
        return cls(aliases.get(v, v))


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """A weight scheme materialized on a graph.

    ``w`` holds integer edge weights and ``t`` their row sums. For
    ``COIN_FLIP``, ``w`` is the sum of the type-A and type-B weights, and the
    two kernels are kept in ``parts``; the walk picks one by a fair coin per
    referral, so its transitions are *not* ``w / t``.
    """

    graph: Graph
    scheme: WeightScheme
    w: sp.csr_matrix
    t: np.ndarray
    parts: tuple = ()

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def symmetric(self) -> bool:
        return self.scheme.symmetric

    @cached_property
    def transition_matrix(self) -> sp.csr_matrix:
        if self.parts:
            mats = [sp.diags(1.0 / t) @ w for w, t in self.parts]
            return (0.5 * (mats[0] + mats[1])).tocsr()
        return (sp.diags(1.0 / self.t) @ self.w).tocsr()

    @cached_property
    def pi(self) -> np.ndarray:
        return stationary_distribution(self)


def _anticluster_parts(g: Graph) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = g.adjacency.tocoo()
    cod = edge_codegrees(g)
    # codegree on every edge, aligned with a's coordinates (zeros were dropped)
    cod_vals = np.asarray(cod[a.row, a.col]).ravel()
    d = np.diff(g.adjacency.indptr)
    wa = d[a.row] - cod_vals
    wb = d[a.col] - cod_vals
    shape = (g.n, g.n)
    return (
        sp.csr_matrix((wa.astype(np.int64), (a.row, a.col)), shape=shape),
        sp.csr_matrix((wb.astype(np.int64), (a.row, a.col)), shape=shape),
    )


def _row_sums(w: sp.csr_matrix) -> np.ndarray:
    return np.asarray(w.sum(axis=1)).ravel()


def _check_rows(t: np.ndarray, scheme: WeightScheme) -> None:
    dead = np.flatnonzero(t <= 0)
    if dead.size:
        u = int(dead[0])
        if scheme is WeightScheme.UNIFORM:
            raise IsolatedNodeError(u, f"node {u} is isolated")
        raise AntiClusterDeadNodeError(u, f"node {u} has no positive {scheme.value} referral weight")


def build_weights(g: Graph, scheme: WeightScheme | str) -> WeightedGraph:
    scheme = WeightScheme.parse(scheme)
    if scheme is WeightScheme.UNIFORM:
        w = g.adjacency.copy()
        t = _row_sums(w)
        _check_rows(t, scheme)
        return WeightedGraph(g, scheme, w, t)
    wa, wb = _anticluster_parts(g)
    if scheme is WeightScheme.ANTI_CLUSTER_A:
        w = wa
    elif scheme is WeightScheme.ANTI_CLUSTER_B:
        w = wb
    else:
        w = (wa + wb).tocsr()
    w.sort_indices()
    t = _row_sums(w)
    _check_rows(t, scheme)
    parts = ()
    if scheme is WeightScheme.COIN_FLIP:
        ta, tb = _row_sums(wa), _row_sums(wb)
        _check_rows(ta, scheme)
        _check_rows(tb, scheme)
        parts = ((wa, ta), (wb, tb))
    return WeightedGraph(g, scheme, w, t, parts)


def anticluster_row_sums(g: Graph) -> np.ndarray:
    """Row sums of the combined anti-cluster weights, without building a WeightedGraph."""
    wa, wb = _anticluster_parts(g)
    return _row_sums(wa) + _row_sums(wb)


def transition_row(wg: WeightedGraph, u: int) -> np.ndarray:
    """Dense probability vector of the next referral from ``u``."""
    wg.graph._check(u)
    return wg.transition_matrix[[u]].toarray().ravel()


def stationary_distribution(wg: WeightedGraph) -> np.ndarray:
    """``pi(u) = t(u) / sum(t)`` for reversible schemes on connected graphs."""
    if not wg.symmetric:
        raise NonReversibleSchemeError(f"{wg.scheme.value} weights are not symmetric; no closed-form stationary law")
    if not is_connected(wg.graph):
        raise DisconnectedGraphError("stationary distribution requires a connected graph")
    t = wg.t.astype(float)
    return t / t.sum()


def numeric_stationary_distribution(wg: WeightedGraph) -> np.ndarray:
    """Stationary law of any irreducible kernel by a dense linear solve."""
    if wg.n > MAX_DENSE_NODES:
        raise SizeGuardError(f"{wg.n} nodes exceeds dense limit {MAX_DENSE_NODES}")
    if not is_connected(wg.graph):
        raise DisconnectedGraphError("stationary distribution requires a connected graph")
    p = wg.transition_matrix.toarray()
    n = p.shape[0]
    # pi (P - I) = 0 with sum(pi) = 1
    m = np.vstack([(p - np.eye(n)).T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def population_block_weights(spec: SbmSpec) -> np.ndarray:
    """K x K matrix ``(B Theta Bbar + Bbar Theta B) . B``."""
    b = spec.b
    bbar = 1.0 - b
    theta = np.diag(np.asarray(spec.block_sizes, dtype=float))
    return (b @ theta @ bbar + bbar @ theta @ b) * b


def population_weights(spec: SbmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Expanded population anti-cluster weights and their row sums."""
    if spec.n > MAX_DENSE_NODES:
        raise SizeGuardError(f"{spec.n} nodes exceeds dense limit {MAX_DENSE_NODES}")
    z = spec.assignment()
    w = population_block_weights(spec)[np.ix_(z, z)]
    return w, w.sum(axis=1)
