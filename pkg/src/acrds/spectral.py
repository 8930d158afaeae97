"""Spectra of referral kernels, population closed forms and concentration diagnostics.

All eigensolves are dense. A kernel ``P = T^{-1} W`` with symmetric ``W`` shares
its eigenvalues with ``T^{-1/2} W T^{-1/2}``, which is what gets decomposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatchError,
    DisconnectedGraphError,
    IsolatedNodeError,
    NonReversibleSchemeError,
    PeriodicChainError,
    SizeGuardError,
)
from .graph import MAX_DENSE_NODES, Graph, SbmSpec, expected_adjacency
from .weights import WeightedGraph, WeightScheme, build_weights, population_block_weights, population_weights

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # descending by signed value
    lambda2_signed: float
    lambda2_abs: float

    @property
    def gap(self) -> float:
        return 1.0 - self.lambda2_signed


@dataclass(frozen=True)
class CovarianceProfile:
    """Lag covariances of ``y`` along a stationary chain and their spectral parts.

    ``eigenvalues`` and ``projections`` exclude the leading (unit) eigenpair;
    ``projections[j]`` is the squared pi-inner product of ``y`` with the j-th
    pi-orthonormal eigenvector.
    """

    lags: np.ndarray
    values: np.ndarray
    eigenvalues: np.ndarray
    projections: np.ndarray

    def reconstruct(self, t: int) -> float:
        return float(np.sum(self.projections * self.eigenvalues ** t))

    def eigenspace_weights(self, decimals: int = 9) -> dict[float, float]:
        """Projection mass summed over each eigenvalue's eigenspace (basis invariant)."""
        out: dict[float, float] = {}
        for lam, proj in zip(np.round(self.eigenvalues, decimals), self.projections):
            out[float(lam)] = out.get(float(lam), 0.0) + float(proj)
        return out


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    f_min: float
    g_min: float
    d_min: float
    op_distance: float
    eig_deviation: float


def _dense(m) -> np.ndarray:
    if sp.issparse(m):
        if m.shape[0] > MAX_DENSE_NODES:
            raise SizeGuardError(f"{m.shape[0]} nodes exceeds dense limit {MAX_DENSE_NODES}")
        return m.toarray().astype(float)
    return np.asarray(m, dtype=float)


def symmetric_normalized(w, t) -> np.ndarray:
    """``L(u, v) = w(u, v) / sqrt(t(u) t(v))`` as a dense matrix."""
    t = np.asarray(t, dtype=float)
    bad = np.flatnonzero(t <= 0)
    if bad.size:
        raise IsolatedNodeError(int(bad[0]))
    s = 1.0 / np.sqrt(t)
    m = _dense(w)
    return m * s[:, None] * s[None, :]


def spectrum(m) -> SpectralSummary:
    m = np.asarray(m, dtype=float)
    vals = np.linalg.eigvalsh(0.5 * (m + m.T))[::-1].copy()
    if vals.size < 2:
        lam2 = float("nan")
        return SpectralSummary(vals, lam2, lam2)
    by_abs = np.sort(np.abs(vals))[::-1]
    return SpectralSummary(vals, float(vals[1]), float(by_abs[1]))


def kernel_spectrum(wg: WeightedGraph) -> SpectralSummary:
    if not wg.symmetric:
        raise NonReversibleSchemeError(f"{wg.scheme.value} kernel is not reversible")
    return spectrum(symmetric_normalized(wg.w, wg.t))


def lambda2(wg: WeightedGraph) -> tuple[float, float]:
    """Second-largest eigenvalue of the kernel: (signed, by absolute value)."""
    s = kernel_spectrum(wg)
    return s.lambda2_signed, s.lambda2_abs


# --- population (block-level) spectra -------------------------------------------------


def population_transition_spectrum(m, theta) -> np.ndarray:
    """Nonzero spectrum of ``T^{-1} Z M Z^T`` from a K x K reduction, descending.

    The reduction is ``M diag(theta_k / (M theta)_k)``; it is symmetrized by a
    diagonal similarity before solving.
    """
    m = np.asarray(m, dtype=float)
    theta = np.asarray(theta, dtype=float).ravel()
    rows = m @ theta
    if np.any(rows <= 0):
        raise IsolatedNodeError(int(np.flatnonzero(rows <= 0)[0]), "block with zero weighted row sum")
    s = np.sqrt(theta / rows)
    sym = s[:, None] * m * s[None, :]
    return np.linalg.eigvalsh(0.5 * (sym + sym.T))[::-1]


def _population_lambda2(m, theta) -> float:
    vals = population_transition_spectrum(m, theta)
    if np.sum(theta) > len(theta):
        # the expanded N x N kernel also carries N - K zero eigenvalues
        vals = np.sort(np.append(vals, 0.0))[::-1]
    return float(vals[1])


def population_lambda2(spec: SbmSpec) -> tuple[float, float]:
    """Signed second eigenvalues of the population walks: (simple, anti-cluster)."""
    theta = np.asarray(spec.block_sizes, dtype=float)
    return _population_lambda2(spec.b, theta), _population_lambda2(population_block_weights(spec), theta)


def lambda2_rds_closed_form(k: int, p: float, r: float) -> float:
    return 1.0 / (k * r / p + 1.0)


def lambda2_acrds_limit(big_r: float, p: float) -> float:
    """Large-K limit of the anti-cluster second eigenvalue with ``R = K r / p`` held fixed."""
    c = (big_r + 1.0) / (big_r + 1.0 - p)
    return 1.0 / (c * big_r + 1.0)


def lambda2_prop3_pair(eps: float) -> tuple[float, float]:
    """Two equal blocks, in-block ``1 - eps``, out-block ``eps``.

    Returns the simple-walk and anti-cluster second eigenvalues. The block
    weights are ``4 eps (1-eps)^2`` in-block and ``2 eps ((1-eps)^2 + eps^2)``
    across, so the anti-cluster value is ``((1-eps)^2 - eps^2) / (3 (1-eps)^2 + eps^2)``.
    """
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    a, b = (1 - eps) ** 2, eps ** 2
    return 1.0 - 2.0 * eps, (a - b) / (3.0 * a + b)


def spectral_gap_ratio(spec: SbmSpec) -> float:
    lam_rds, lam_ac = population_lambda2(spec)
    if lam_rds >= 1.0 - UNIT_TOL:
        raise DisconnectedGraphError("population simple walk is disconnected (lambda2 = 1)")
    return (1.0 - lam_ac) / (1.0 - lam_rds)


# --- lag covariances ------------------------------------------------------------------


def covariance_from_weights(w, t, y, max_lag: int) -> CovarianceProfile:
    """Lag-1..max_lag covariances of a stationary reversible walk with weights ``w``."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if y.shape != t.shape:
        raise DimensionMismatchError("feature length must match node count")
    lap = symmetric_normalized(w, t)
    vals, vecs = np.linalg.eigh(0.5 * (lap + lap.T))
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if vals.size > 1 and vals[1] >= 1.0 - UNIT_TOL:
        raise DisconnectedGraphError("kernel is reducible (lambda2 = 1)")
    if vals.size > 1 and vals[-1] <= -1.0 + UNIT_TOL:
        raise PeriodicChainError("kernel is periodic (eigenvalue -1)")
    pi = t / t.sum()
    f = vecs / np.sqrt(pi)[:, None]
    f /= np.sqrt(np.sum(f * f * pi[:, None], axis=0))[None, :]
    proj = (f.T @ (y * pi)) ** 2
    lags = np.arange(1, max_lag + 1)
    lam, proj = vals[1:], proj[1:]
    values = np.array([np.sum(proj * lam ** lag) for lag in lags])
    return CovarianceProfile(lags, values, lam, proj)


def covariance_profile(wg: WeightedGraph, y, max_lag: int) -> CovarianceProfile:
    if not wg.symmetric:
        raise NonReversibleSchemeError(f"{wg.scheme.value} kernel is not reversible")
    if len(y) != wg.n:
        raise DimensionMismatchError("feature length must match node count")
    return covariance_from_weights(wg.w, wg.t, y, max_lag)


def population_covariances(spec: SbmSpec, y, max_lag: int) -> tuple[CovarianceProfile, CovarianceProfile]:
    """Covariance profiles of the population simple and anti-cluster walks."""
    a = expected_adjacency(spec)
    w, t = population_weights(spec)
    return covariance_from_weights(a, a.sum(axis=1), y, max_lag), covariance_from_weights(w, t, y, max_lag)


# --- concentration --------------------------------------------------------------------


def concentration_report(spec: SbmSpec, g: Graph) -> ConcentrationReport:
    if g.n != spec.n:
        raise DimensionMismatchError(f"graph has {g.n} nodes, spec has {spec.n}")
    a_pop = expected_adjacency(spec)
    a_bar = 1.0 - a_pop
    f = a_pop @ a_bar
    gm = a_bar @ a_pop
    w_pop, t_pop = population_weights(spec)
    wg = build_weights(g, WeightScheme.ANTI_CLUSTER)
    l_sample = symmetric_normalized(wg.w, wg.t)
    l_pop = symmetric_normalized(w_pop, t_pop)
    op = float(np.linalg.norm(l_sample - l_pop, ord=2))
    ev_s = spectrum(l_sample).eigenvalues
    ev_p = spectrum(l_pop).eigenvalues
    return ConcentrationReport(
        n=g.n,
        f_min=float(f.min()),
        g_min=float(gm.min()),
        d_min=float(a_pop.sum(axis=1).min()),
        op_distance=op,
        eig_deviation=float(np.max(np.abs(ev_s - ev_p))),
    )


def concentration_scale(report: ConcentrationReport, failure_prob: float = 0.05) -> float:
    """``ln(10 N / eps) / F_min``: the squared-distance rate, up to a constant."""
    return math.log(10 * report.n / failure_prob) / report.f_min
