import math

import numpy as np
import pytest

from acrds.errors import ConfigError
from acrds.experiments import (
    REPLICATION_FIELDS,
    BlockIndicator,
    EdgeListSource,
    FeatureColumn,
    GridRow,
    ReplicationRow,
    SbmSource,
    ScenarioConfig,
    concentration_sweep,
    from_csv,
    network_report,
    run_replications,
    summarize,
    to_csv,
    two_block_spec,
    unbalance_grid,
)
from acrds.graph import Graph, SbmSpec
from acrds.sampler import SamplingConfig


@pytest.fixture
def paw_files(tmp_path):
    edges = tmp_path / "paw.txt"
    edges.write_text("1 2\n2 3\n1 3\n3 4\n")
    feat = tmp_path / "y.txt"
    feat.write_text("0\n1\n2\n3\n")
    return str(edges), str(feat)


def test_zero_coupons_estimate_equals_seed_value(paw_files):
    edges, feat = paw_files
    cfg = ScenarioConfig(
        network=EdgeListSource(edges),
        feature=FeatureColumn(feat),
        sampling=SamplingConfig(coupons=0),
        replications=2,
        fractions=(0.5,),
    )
    rows = run_replications(cfg)
    assert len(rows) == 4
    for scheme in ("uniform", "ac"):
        assert sum(r.scheme == scheme for r in rows) == 2
    for r in rows:
        assert r.n_collected == 1 and r.died and r.target == 2
        assert r.estimate in (0.0, 1.0, 2.0, 3.0)
        assert r.population_mean == 1.5


def test_rerun_is_byte_identical(paw_files):
    edges, feat = paw_files
    cfg = ScenarioConfig(EdgeListSource(edges), FeatureColumn(feat), replications=5, base_seed=3, fractions=(0.75,))
    assert to_csv(run_replications(cfg), REPLICATION_FIELDS) == to_csv(run_replications(cfg), REPLICATION_FIELDS)


def sbm_cfg(**kw):
    spec = SbmSpec.two_level((30, 30, 30), 0.3, 0.02)
    base = dict(network=SbmSource(spec), feature=BlockIndicator(1), replications=6, fractions=(0.1, 0.2))
    base.update(kw)
    return ScenarioConfig(**base)


def test_parallel_matches_serial():
    cfg = sbm_cfg(estimators=("rds2", "ac_stationary", "true_stationary"), schemes=("uniform", "ac", "coin-flip"))
    serial = to_csv(run_replications(cfg, workers=1))
    assert serial == to_csv(run_replications(cfg, workers=3))


def test_sbm_rows_are_ordered_and_sized():
    rows = run_replications(sbm_cfg())
    assert len(rows) == 6 * 2 * 2
    keys = [(r.replicate, r.scheme, r.fraction) for r in rows]
    assert keys[:4] == [(0, "uniform", 0.1), (0, "uniform", 0.2), (0, "ac", 0.1), (0, "ac", 0.2)]
    assert all(r.target == round(r.fraction * 90) for r in rows)
    assert all(abs(r.population_mean - 1 / 3) < 1e-12 for r in rows)


def test_scenario_validation(paw_files):
    with pytest.raises(ConfigError):
        sbm_cfg(replications=0)
    with pytest.raises(ConfigError):
        sbm_cfg(fractions=(0.0,))
    with pytest.raises(ConfigError):
        ScenarioConfig(EdgeListSource(paw_files[0]), BlockIndicator(1))


def test_feature_length_mismatch(tmp_path, paw_files):
    bad = tmp_path / "short.txt"
    bad.write_text("1\n2\n")
    cfg = ScenarioConfig(EdgeListSource(paw_files[0]), FeatureColumn(str(bad)))
    with pytest.raises(ConfigError):
        run_replications(cfg)


def row(est, scheme="uniform", mu=0.5, died=False):
    return ReplicationRow(0, scheme, 0.1, "rds2", est, 3, 3, died, mu)


def test_summarize_iqr_rule():
    (s,) = summarize([row(0.0), row(1.0)])
    assert s.iqr == 0.5 and s.q1 == 0.25 and s.q3 == 0.75
    assert s.bias == 0.0 and s.count == 2
    (s,) = summarize([row(0.3)] * 5)
    assert s.iqr == 0.0
    (s,) = summarize([row(0.4), row(0.6), row(0.5)])
    assert s.bias == pytest.approx(0.0, abs=1e-15)


def test_summarize_complete_only():
    rows = [row(0.0), row(1.0, died=True), row(0.5, scheme="ac")]
    full = {s.scheme: s for s in summarize(rows)}
    assert full["uniform"].count == 2
    part = {s.scheme: s for s in summarize(rows, complete_only=True)}
    assert part["uniform"].count == 1


def test_grid_balanced_cell():
    (r,) = unbalance_grid([1], [0.25], "prop3_eps")
    assert r.lambda2_rds == pytest.approx(0.5)
    assert r.gap_ratio == pytest.approx((1 - 0.5 / 1.75) / 0.5)


def test_grid_no_structure_cell():
    (r,) = unbalance_grid([1], [0.5], "prop3_eps")
    assert r.lambda2_rds == pytest.approx(0.0, abs=1e-12)
    assert r.gap_ratio == pytest.approx(1 - r.lambda2_acrds)


def test_grid_all_cells_exceed_one():
    for mode in ("prop3_eps", "fixed_diag"):
        rows = unbalance_grid([1, 2, 5, 10, 20], [0.01, 0.05, 0.1, 0.25, 0.4], mode)
        assert len(rows) == 25
        assert all(r.gap_ratio > 1 for r in rows)


def test_grid_guards():
    with pytest.raises(ConfigError):
        two_block_spec(1, 0.1, "nope")
    with pytest.raises(ConfigError):
        two_block_spec(0.5, 0.1, "prop3_eps")
    assert two_block_spec(2.5, 0.1, "fixed_diag", 10).block_sizes == (10, 25)


def test_network_report_triangle_and_paw(paw):
    tri = Graph(3, [(0, 1), (1, 2), (0, 2)])
    rep = network_report(tri, [1, 0, 0])
    assert rep.clustering == 1.0
    assert rep.cov_rds_lag1 == pytest.approx(-1 / 9)
    assert (rep.nodes, rep.edges, rep.flags) == (3, 3, "")
    rep = network_report(paw, [1, 1, 1, 1])
    assert rep.clustering == pytest.approx(0.6)
    assert rep.cov_rds_lag1 == pytest.approx(0, abs=1e-14)
    assert rep.cov_ac_lag1 == pytest.approx(0, abs=1e-14)


def test_network_report_periodic_flag(cycle4):
    rep = network_report(cycle4, [1, 0, 0, 0])
    assert math.isnan(rep.cov_rds_lag1) and "rds:periodic" in rep.flags


def test_concentration_sweep_shape():
    rows = concentration_sweep([40, 60], 2, 0.5, 0.1)
    assert [(r.n, r.seed) for r in rows] == [(40, 0), (40, 1), (60, 0), (60, 1)]
    assert all(r.f_min == r.g_min for r in rows)
    with pytest.raises(ConfigError):
        concentration_sweep([41], 1, 0.5, 0.1)


def test_csv_round_trip():
    rows = [row(0.1 + 0.2), row(1 / 3, died=True)]
    text = to_csv(rows)
    assert text.splitlines()[0] == ",".join(REPLICATION_FIELDS)
    assert "true" in text and "false" in text
    assert from_csv(text, ReplicationRow) == rows
    grid = unbalance_grid([1, 3], [0.1], "fixed_diag")
    assert from_csv(to_csv(grid), GridRow) == grid
    with pytest.raises(ValueError):
        to_csv([])


def test_fresh_graph_per_replicate():
    rows = run_replications(sbm_cfg(replications=8, fractions=(0.2,), schemes=("uniform",)))
    assert len({r.estimate for r in rows}) > 1
    assert np.all([r.n_collected == r.target for r in rows])
