"""Tree-indexed referral simulation (RDS and its anti-cluster variants)."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptySeedClassError, TreeDied
from .graph import Graph
from .weights import WeightedGraph, WeightScheme, anticluster_row_sums, numeric_stationary_distribution


class Replacement(str, enum.Enum):
    WITH = "with"
    WITHOUT = "without"


class DeadBranchPolicy(str, enum.Enum):
    PRUNE = "prune"
    FALLBACK_UNIFORM_NEIGHBOR = "fallback"


@dataclass(frozen=True)
class SeedStrategy:
    """``uniform``, ``stationary``, or ``feature`` (uniform over nodes with ``y == value``)."""

    kind: str = "uniform"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "stationary", "feature"):
            raise ConfigError(f"unknown seed strategy {self.kind!r}")
        if self.kind == "feature" and self.value is None:
            raise ConfigError("feature-biased seeding needs a value")


@dataclass(frozen=True)
class SamplingConfig:
    scheme: WeightScheme = WeightScheme.UNIFORM
    coupons: int = 3
    replacement: Replacement = Replacement.WITH
    target: int = 1
    seed_strategy: SeedStrategy = field(default_factory=SeedStrategy)
    dead_branch_policy: DeadBranchPolicy = DeadBranchPolicy.PRUNE

    def __post_init__(self):
        if self.target < 1:
            raise ConfigError("target must be at least 1")
        if self.coupons < 0:
            raise ConfigError("coupons must be non-negative")
        object.__setattr__(self, "scheme", WeightScheme.parse(self.scheme))
        object.__setattr__(self, "replacement", Replacement(self.replacement))
        object.__setattr__(self, "dead_branch_policy", DeadBranchPolicy(self.dead_branch_policy))


@dataclass(frozen=True)
class ReferralTree:
    """Breadth-first referral tree; tree id ``i`` is position ``i`` in the arrays.

    ``parent[0] == -1`` marks the root. ``died`` is set when the tree stopped
    short of its target.
    """

    node: np.ndarray
    parent: np.ndarray
    wave: np.ndarray
    died: bool = False

    def __len__(self) -> int:
        return int(self.node.size)


@dataclass(frozen=True)
class SampleRecord:
    node: int
    y: float
    degree: int
    row_sum: float
    wave: int


class _Kernel:
    """Per-node neighbor lists and referral weights for fast draws."""

    def __init__(self, wg: WeightedGraph):
        self.wg = wg
        parts = wg.parts or ((wg.w, wg.t),)
        self.parts = [(w.indptr, w.indices, w.data.astype(float)) for w, _ in parts]
        a = wg.graph.adjacency
        self.adj = (a.indptr, a.indices)

    def row(self, part: int, u: int) -> tuple[np.ndarray, np.ndarray]:
        indptr, indices, data = self.parts[part]
        lo, hi = indptr[u], indptr[u + 1]
        return indices[lo:hi], data[lo:hi]

    def pick_part(self, rng: np.random.Generator) -> int:
        return int(rng.random() < 0.5) if len(self.parts) == 2 else 0

    def draw(self, u, rng, eligible=None, fallback=False) -> int | None:
        part = self.pick_part(rng)
        nodes, wts = self.row(part, u)
        if eligible is not None:
            if len(self.parts) == 2:
                # without replacement the coin-flip kernel is restricted as a mixture
                na, wa = self.row(0, u)
                nb, wb = self.row(1, u)
                nodes = na
                wts = 0.5 * wa / wa.sum() + 0.5 * wb / wb.sum()
            mask = eligible[nodes]
            nodes, wts = nodes[mask], wts[mask]
        total = wts.sum()
        if nodes.size == 0:
            return None
        if total <= 0:
            if not fallback:
                return None
            return int(nodes[rng.integers(nodes.size)])
        return int(nodes[np.searchsorted(np.cumsum(wts), rng.random() * total, side="right")])


def choose_seed(g: Graph, wg: WeightedGraph | None, strategy: SeedStrategy, y, rng) -> int:
    rng = np.random.default_rng(rng)
    if strategy.kind == "uniform":
        return int(rng.integers(g.n))
    if strategy.kind == "stationary":
        if wg is None:
            raise ConfigError("stationary seeding needs weights")
        pi = wg.pi if wg.symmetric else numeric_stationary_distribution(wg)
        return int(rng.choice(g.n, p=pi))
    pool = np.flatnonzero(np.asarray(y, dtype=float) == strategy.value)
    if pool.size == 0:
        raise EmptySeedClassError(f"no node has feature value {strategy.value}")
    return int(pool[rng.integers(pool.size)])


def run_referral(
    g: Graph,
    wg: WeightedGraph,
    cfg: SamplingConfig,
    y,
    seed=None,
    *,
    root: int | None = None,
) -> tuple[ReferralTree, list[SampleRecord]]:
    """Grow a referral tree breadth-first until ``cfg.target`` samples or no frontier.

    Each participant hands out ``cfg.coupons`` referrals drawn independently
    from its transition row (with replacement) or from the row restricted to
    nodes not yet sampled and renormalized (without replacement). Raises
    ``TreeDied`` when a without-replacement tree under the prune policy stops
    short of the target.
    """
    if wg.graph is not g:
        raise ConfigError("weights were built on a different graph")
    if wg.scheme is not cfg.scheme:
        raise ConfigError(f"weights use {wg.scheme.value}, config asks for {cfg.scheme.value}")
    y = np.asarray(y, dtype=float)
    if y.shape != (g.n,):
        raise ConfigError("feature length must match node count")
    rng = np.random.default_rng(seed)
    if root is None:
        root = choose_seed(g, wg, cfg.seed_strategy, y, rng)
    g._check(root)

    kernel = _Kernel(wg)
    without = cfg.replacement is Replacement.WITHOUT
    fallback = cfg.dead_branch_policy is DeadBranchPolicy.FALLBACK_UNIFORM_NEIGHBOR
    eligible = None
    if without:
        eligible = np.ones(g.n, dtype=bool)
        eligible[root] = False

    nodes, parents, waves = [root], [-1], [0]
    queue = deque([0])
    while queue and len(nodes) < cfg.target:
        tid = queue.popleft()
        u = nodes[tid]
        for _ in range(cfg.coupons):
            if len(nodes) >= cfg.target:
                break
            v = kernel.draw(u, rng, eligible, fallback)
            if v is None:
                continue
            if without:
                eligible[v] = False
            nodes.append(v)
            parents.append(tid)
            waves.append(waves[tid] + 1)
            queue.append(len(nodes) - 1)

    died = len(nodes) < cfg.target
    tree = ReferralTree(np.array(nodes), np.array(parents), np.array(waves), died)
    records = make_records(g, wg, tree, y)
    if died and without and not fallback:
        raise TreeDied(tree, records, cfg.target)
    return tree, records


def make_records(g: Graph, wg: WeightedGraph, tree: ReferralTree, y) -> list[SampleRecord]:
    deg = np.diff(g.adjacency.indptr)
    t_ac = wg.t if wg.scheme in (WeightScheme.ANTI_CLUSTER, WeightScheme.COIN_FLIP) else anticluster_row_sums(g)
    return [
        SampleRecord(int(u), float(y[u]), int(deg[u]), float(t_ac[u]), int(w))
        for u, w in zip(tree.node, tree.wave)
    ]


def empirical_transition_check(g: Graph, wg: WeightedGraph, u: int, draws: int, seed=None) -> np.ndarray:
    """Referral frequencies from ``u`` over independent single draws."""
    rng = np.random.default_rng(seed)
    g._check(u)
    kernel = _Kernel(wg)
    counts = np.zeros(g.n)
    if len(kernel.parts) == 2:
        heads = int(rng.binomial(draws, 0.5))
        splits = ((0, draws - heads), (1, heads))
    else:
        splits = ((0, draws),)
    for part, k in splits:
        nodes, wts = kernel.row(part, u)
        picks = rng.choice(nodes, size=k, p=wts / wts.sum())
        np.add.at(counts, picks, 1)
    return counts / draws
