"""Replication engine and table builders behind the command line."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np

from . import estimators as est
from .errors import AcrdsError, ConfigError, PeriodicChainError, TreeDied
from .graph import (
    Graph,
    SbmSpec,
    global_clustering_coefficient,
    largest_connected_component,
    read_edge_list,
    sample_sbm,
)
from .sampler import SamplingConfig, run_referral
from .spectral import concentration_report, covariance_profile, population_lambda2
from .weights import WeightScheme, build_weights, numeric_stationary_distribution


@dataclass(frozen=True)
class SbmSource:
    spec: SbmSpec


@dataclass(frozen=True)
class EdgeListSource:
    path: str
    largest_component: bool = True


@dataclass(frozen=True)
class BlockIndicator:
    """``y(u) = 1`` when the block id of ``u`` is below ``threshold``."""

    threshold: int


@dataclass(frozen=True)
class FeatureColumn:
    """One value per line, aligned to the sorted external node ids of the edge list."""

    path: str


@dataclass(frozen=True)
class ScenarioConfig:
    network: SbmSource | EdgeListSource
    feature: BlockIndicator | FeatureColumn
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    replications: int = 1
    base_seed: int = 0
    fractions: tuple[float, ...] = (0.01, 0.05, 0.10)
    schemes: tuple[WeightScheme, ...] = (WeightScheme.UNIFORM, WeightScheme.ANTI_CLUSTER)
    estimators: tuple[est.EstimatorWeights, ...] = (est.EstimatorWeights.DEGREE_RDS2,)

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
            raise ConfigError("sample fractions must lie in (0, 1]")
        if isinstance(self.network, EdgeListSource) and isinstance(self.feature, BlockIndicator):
            raise ConfigError("block-indicator features need an SBM network")
        object.__setattr__(self, "schemes", tuple(WeightScheme.parse(s) for s in self.schemes))
        object.__setattr__(self, "estimators", tuple(est.EstimatorWeights(e) for e in self.estimators))


@dataclass(frozen=True)
class ReplicationRow:
    replicate: int
    scheme: str
    fraction: float
    estimator: str
    estimate: float
    n_collected: int
    target: int
    died: bool
    population_mean: float


REPLICATION_FIELDS = [f.name for f in fields(ReplicationRow)]


def read_feature_column(path) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a number: {line!r}") from None
    y = np.asarray(values)
    if not np.all(np.isfinite(y)):
        raise ConfigError(f"{path}: feature values must be finite")
    return y


def load_edge_list_network(source: EdgeListSource, feature: FeatureColumn) -> tuple[Graph, np.ndarray]:
    g = read_edge_list(source.path)
    y = read_feature_column(feature.path)
    if y.size != g.n:
        raise ConfigError(f"feature file has {y.size} values for {g.n} nodes")
    if source.largest_component:
        g, keep = largest_connected_component(g)
        y = y[keep]
    return g, y


class ReplicateError(AcrdsError):
    def __init__(self, replicate: int, cause: Exception):
        self.replicate = replicate
        self.cause = cause
        super().__init__(f"replicate {replicate}: {type(cause).__name__}: {cause}")

    def __reduce__(self):
        return (type(self), (self.replicate, self.cause))


def _replicate_seed(base_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=key)


def _run_one(cfg: ScenarioConfig, replicate: int, fixed: tuple[Graph, np.ndarray] | None) -> list[ReplicationRow]:
    if fixed is None:
        g, z = sample_sbm(cfg.network.spec, _replicate_seed(cfg.base_seed, replicate, 0))
        y = (z < cfg.feature.threshold).astype(float)
    else:
        g, y = fixed
    mu = float(y.mean())
    rows = []
    for si, scheme in enumerate(cfg.schemes):
        wg = build_weights(g, scheme)
        pi = None
        if est.EstimatorWeights.TRUE_STATIONARY in cfg.estimators:
            pi = wg.pi if wg.symmetric else numeric_stationary_distribution(wg)
        for fi, frac in enumerate(cfg.fractions):
            target = max(1, int(round(frac * g.n)))
            scfg = replace(cfg.sampling, scheme=scheme, target=target)
            seed = _replicate_seed(cfg.base_seed, replicate, 1, si, fi)
            try:
                tree, records = run_referral(g, wg, scfg, y, seed)
                died = tree.died
            except TreeDied as exc:
                records, died = exc.records, True
            for weights in cfg.estimators:
                value = est.estimate(records, weights, pi).value
                rows.append(
                    ReplicationRow(replicate, scheme.value, frac, weights.value, value, len(records), target, died, mu)
                )
    return rows


def _run_chunk(args) -> list[ReplicationRow]:
    cfg, reps, fixed = args
    out = []
    for r in reps:
        try:
            out.extend(_run_one(cfg, r, fixed))
        except AcrdsError as exc:
            raise ReplicateError(r, exc) from exc
    return out


def _sort_key(cfg: ScenarioConfig):
    scheme_order = {s.value: i for i, s in enumerate(cfg.schemes)}
    est_order = {e.value: i for i, e in enumerate(cfg.estimators)}
    return lambda row: (row.replicate, scheme_order[row.scheme], row.fraction, est_order[row.estimator])


def run_replications(cfg: ScenarioConfig, workers: int = 1) -> list[ReplicationRow]:
    """Run every replicate; output is independent of ``workers``.

    SBM scenarios draw a fresh graph per replicate; edge-list scenarios reuse
    one graph. Each replicate's streams derive from ``(base_seed, replicate)``.
    """
    fixed = None
    if isinstance(cfg.network, EdgeListSource):
        fixed = load_edge_list_network(cfg.network, cfg.feature)
    reps = list(range(cfg.replications))
    if workers <= 1:
        rows = _run_chunk((cfg, reps, fixed))
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, [(cfg, c, fixed) for c in chunks if c]) for row in part]
    return sorted(rows, key=_sort_key(cfg))


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    fraction: float
    estimator: str
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    iqr: float
    bias: float


def summarize(rows: Sequence[ReplicationRow], complete_only: bool = False) -> list[SummaryRow]:
    """Per scheme, fraction and estimator: location, quartiles and bias.

    Quartiles interpolate linearly between order statistics (numpy's ``linear``
    percentile method). Bias is the mean of ``estimate - population_mean``.
    """
    groups: dict[tuple, list[ReplicationRow]] = {}
    for row in rows:
        if complete_only and row.died:
            continue
        groups.setdefault((row.scheme, row.fraction, row.estimator), []).append(row)
    out = []
    for (scheme, frac, name), grp in groups.items():
        x = np.array([r.estimate for r in grp])
        q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
        bias = float(np.mean(x - np.array([r.population_mean for r in grp])))
        out.append(SummaryRow(scheme, frac, name, x.size, float(x.mean()), float(med), float(q1), float(q3), float(q3 - q1), bias))
    return out


# --- spectral tables ------------------------------------------------------------------

GRID_MODES = ("prop3_eps", "fixed_diag")


def two_block_spec(ratio: float, eps: float, mode: str, base_size: int = 100) -> SbmSpec:
    """Two blocks of sizes ``base_size`` and ``ratio * base_size``.

    ``prop3_eps``: in-block ``1 - eps``, out-block ``eps``.
    ``fixed_diag``: in-block 0.8, out-block ``eps``.
    """
    if mode not in GRID_MODES:
        raise ConfigError(f"unknown grid mode {mode!r}")
    if ratio < 1:
        raise ConfigError("unbalance ratio must be at least 1")
    diag = 1.0 - eps if mode == "prop3_eps" else 0.8
    return SbmSpec.two_level((base_size, int(round(ratio * base_size))), diag, eps)


@dataclass(frozen=True)
class GridRow:
    mode: str
    ratio: float
    eps: float
    lambda2_rds: float
    lambda2_acrds: float
    gap_ratio: float


def unbalance_grid(ratios: Iterable[float], eps_values: Iterable[float], mode: str, base_size: int = 100) -> list[GridRow]:
    rows = []
    for ratio in ratios:
        for eps in eps_values:
            spec = two_block_spec(ratio, eps, mode, base_size)
            lam_rds, lam_ac = population_lambda2(spec)
            if lam_rds >= 1.0 - 1e-12:
                raise ConfigError(f"disconnected population at ratio={ratio}, eps={eps}")
            rows.append(GridRow(mode, float(ratio), float(eps), lam_rds, lam_ac, (1 - lam_ac) / (1 - lam_rds)))
    return rows


@dataclass(frozen=True)
class NetworkReportRow:
    nodes: int
    edges: int
    clustering: float
    cov_rds_lag1: float
    cov_ac_lag1: float
    flags: str = ""


def network_report(g: Graph, y) -> NetworkReportRow:
    """Size, clustering coefficient and lag-1 stationary covariances under both designs."""
    flags = []
    try:
        cc = global_clustering_coefficient(g)
    except AcrdsError:
        cc = math.nan
        flags.append("clustering:undefined")
    covs = []
    for label, scheme in (("rds", WeightScheme.UNIFORM), ("ac", WeightScheme.ANTI_CLUSTER)):
        try:
            covs.append(float(covariance_profile(build_weights(g, scheme), y, 1).values[0]))
        except PeriodicChainError:
            covs.append(math.nan)
            flags.append(f"{label}:periodic")
        except AcrdsError as exc:
            covs.append(math.nan)
            flags.append(f"{label}:{type(exc).__name__}")
    return NetworkReportRow(g.n, g.num_edges, cc, covs[0], covs[1], ";".join(flags))


@dataclass(frozen=True)
class ConcentrationRow:
    n: int
    seed: int
    f_min: float
    g_min: float
    d_min: float
    op_distance: float
    eig_deviation: float


def concentration_sweep(sizes: Iterable[int], seeds: int, p_in: float, p_out: float, k: int = 2, base_seed: int = 0) -> list[ConcentrationRow]:
    rows = []
    for n in sizes:
        if n % k:
            raise ConfigError(f"N={n} is not divisible into {k} equal blocks")
        spec = SbmSpec.two_level((n // k,) * k, p_in, p_out)
        for s in range(seeds):
            g, _ = sample_sbm(spec, _replicate_seed(base_seed, n, s))
            rep = concentration_report(spec, g)
            rows.append(ConcentrationRow(n, s, rep.f_min, rep.g_min, rep.d_min, rep.op_distance, rep.eig_deviation))
    return rows


# --- CSV ------------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(rows: Sequence, columns: Sequence[str] | None = None) -> str:
    """Header plus one comma-separated line per dataclass row; floats use ``repr``."""
    if columns is None:
        if not rows:
            raise ValueError("cannot infer columns from an empty table")
        columns = [f.name for f in fields(rows[0])]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[c]) for c in columns])
    return buf.getvalue()


def _parse(value: str, typ):
    if typ in (bool, "bool"):
        return value == "true"
    if typ in (int, "int"):
        return int(value)
    if typ in (float, "float"):
        return float(value)
    return value


def from_csv(text: str, row_type) -> list:
    reader = csv.DictReader(io.StringIO(text))
    types = {f.name: f.type for f in fields(row_type)}
    return [row_type(**{k: _parse(v, types[k]) for k, v in rec.items()}) for rec in reader]
