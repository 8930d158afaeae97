"""Population-mean estimators for referral samples."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AcrdsError, ConfigError
from .sampler import SampleRecord


class EstimatorWeights(str, enum.Enum):
    DEGREE_RDS2 = "rds2"
    STATIONARY_AC = "ac_stationary"
    TRUE_STATIONARY = "true_stationary"


@dataclass(frozen=True)
class EstimateResult:
    value: float
    weights_used: EstimatorWeights
    n_samples: int


class ZeroInclusionError(AcrdsError):
    pass


def _values(records: Sequence[SampleRecord]) -> np.ndarray:
    return np.array([r.y for r in records], dtype=float)


def ipw_estimate(records: Sequence[SampleRecord], pi, n_population: int) -> float:
    """Inverse-probability-weighted mean, ``(1/n) sum y / (N pi)``; ``pi`` is indexed by node."""
    if not records:
        raise ConfigError("no records")
    pi = np.asarray(pi, dtype=float)
    p = pi[[r.node for r in records]]
    if np.any(p <= 0):
        raise ZeroInclusionError("sampled node has zero inclusion probability")
    return float(np.mean(_values(records) / (n_population * p)))


def hajek_estimate(records: Sequence[SampleRecord], pi_values) -> float:
    """Self-normalized IPW: ``sum(y / pi) / sum(1 / pi)`` with one ``pi`` per record."""
    if len(records) == 0:
        raise ConfigError("no records")
    p = np.asarray(pi_values, dtype=float)
    if p.shape != (len(records),):
        raise ConfigError("need one inclusion probability per record")
    if np.any(p <= 0):
        raise ZeroInclusionError("non-positive inclusion probability")
    inv = 1.0 / p
    y = _values(records)
    # centring on the first value keeps a constant feature exact
    return float(y[0] + np.dot(y - y[0], inv) / inv.sum())


def rds2_estimate(records: Sequence[SampleRecord]) -> float:
    """RDS-II: Hajek weighting by reported degree."""
    d = np.array([r.degree for r in records], dtype=float)
    if np.any(d <= 0):
        raise ZeroInclusionError("record with zero degree")
    return hajek_estimate(records, d)


def ac_stationary_estimate(records: Sequence[SampleRecord]) -> float:
    """Hajek weighting by the anti-cluster row sum (stationary law of the combined scheme)."""
    return hajek_estimate(records, [r.row_sum for r in records])


def estimate(records: Sequence[SampleRecord], weights: EstimatorWeights | str, pi=None) -> EstimateResult:
    weights = EstimatorWeights(weights)
    if weights is EstimatorWeights.DEGREE_RDS2:
        value = rds2_estimate(records)
    elif weights is EstimatorWeights.STATIONARY_AC:
        value = ac_stationary_estimate(records)
    else:
        if pi is None:
            raise ConfigError("true-stationary weighting needs pi")
        value = hajek_estimate(records, np.asarray(pi)[[r.node for r in records]])
    return EstimateResult(value, weights, len(records))
