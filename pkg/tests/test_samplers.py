import math

import numpy as np
import pytest
from scipy import stats

from pathineq import hyperbolic as hyp
from pathineq.samplers import (
    PathEnsemble,
    SamplerConfig,
    SamplerError,
    TimeGrid,
    continuity_diagnostic,
    ensemble_to_csv,
    load_ensemble,
    sample_flat_bridge,
    sample_hyperbolic_bridge,
    sample_ou,
    sample_wiener,
    save_ensemble,
    step_normals,
)


def test_time_grid_validation():
    with pytest.raises(SamplerError):
        TimeGrid((0.0, 0.5, 0.5, 1.0))
    with pytest.raises(SamplerError):
        TimeGrid((0.1, 0.5))
    g = TimeGrid.uniform(2.0, 4)
    assert g.T == 2.0 and g.n_nodes == 5 and g.nodes[-1] == 2.0


def test_geometric_tail_grid():
    g = TimeGrid.with_geometric_tail(1.0, 16, lam=0.5, floor=1e-6)
    nodes = g.array()
    assert nodes[-1] == 1.0
    diffs = np.diff(nodes)
    assert diffs.min() >= 0.5e-6  # respects the step floor
    assert diffs[-1] <= 2e-6 * 1.0 / 0.5 * 2  # fine near T
    assert g.max_step == pytest.approx(1.0 / 16)
    g2 = g.refined()
    assert g2.max_step == pytest.approx(g.max_step / 2)


def test_step_normals_deterministic_and_disjoint():
    a = step_normals(123, 0, (100,))
    b = step_normals(123, 0, (100,))
    assert np.array_equal(a, b)
    c = step_normals(123, 1, (100,))
    d = step_normals(124, 0, (100,))
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_sampler_determinism_bit_identical():
    cfg = SamplerConfig(seed=7, n_paths=50, grid=TimeGrid.uniform(1.0, 8), dim=2)
    for sampler in (sample_wiener, sample_flat_bridge, sample_ou):
        e1, e2 = sampler(cfg), sampler(cfg)
        assert np.array_equal(e1.points, e2.points)
    cfg3 = SamplerConfig(seed=7, n_paths=20, grid=TimeGrid.with_geometric_tail(1.0, 8), dim=3)
    h1, h2 = sample_hyperbolic_bridge(cfg3), sample_hyperbolic_bridge(cfg3)
    assert np.array_equal(h1.points, h2.points)


def test_wiener_scaling():
    cfg = SamplerConfig(seed=11, n_paths=100_000, grid=TimeGrid.uniform(2.0, 4), dim=3)
    ens = sample_wiener(cfg)
    sq = np.sum(ens.points[:, -1, :] ** 2, axis=1)
    # E|B_T|^2 = d T, SE = std/sqrt(N)
    se = sq.std(ddof=1) / math.sqrt(cfg.n_paths)
    assert abs(sq.mean() - 3 * 2.0) < 3 * se


def test_flat_bridge_endpoint_exact_and_midpoint_variance():
    cfg = SamplerConfig(seed=13, n_paths=100_000, grid=TimeGrid.uniform(1.0, 16), dim=1)
    ens = sample_flat_bridge(cfg)
    assert np.all(ens.points[:, -1, :] == 0.0)
    mid = ens.grid.index_of(0.5)
    x = ens.points[:, mid, 0]
    var = x.var(ddof=1)
    se = math.sqrt(2.0 / (cfg.n_paths - 1)) * var  # SE of a Gaussian variance
    assert abs(var - 0.25) < 3 * se


def test_flat_bridge_covariance_kernel():
    cfg = SamplerConfig(seed=17, n_paths=50_000, grid=TimeGrid.uniform(1.0, 8), dim=1)
    ens = sample_flat_bridge(cfg)
    nodes = ens.grid.array()
    X = ens.points[:, :, 0]
    C = (X.T @ X) / cfg.n_paths
    S, Tm = np.meshgrid(nodes, nodes, indexing="ij")
    theory = np.minimum(S, Tm) - S * Tm / 1.0
    se = np.sqrt((np.outer(np.diag(theory), np.diag(theory)) + theory**2) / cfg.n_paths)
    inner = slice(1, -1)
    z = np.abs(C - theory)[inner, inner] / np.maximum(se[inner, inner], 1e-12)
    assert z.max() < 4.0


def test_ou_stationary_and_covariance_decay():
    grid = TimeGrid.uniform(3.0, 12)
    cfg = SamplerConfig(seed=19, n_paths=100_000, grid=grid, dim=1)
    ens = sample_ou(cfg)
    for k in (0, 4, 12):
        ks = stats.kstest(ens.points[:, k, 0], "norm").statistic
        assert ks < 0.01
    u0 = ens.points[:, 0, 0]
    for t in (0.5, 1.5, 3.0):
        k = grid.index_of(t)
        cov = np.mean(u0 * ens.points[:, k, 0]) - u0.mean() * ens.points[:, k, 0].mean()
        se = math.sqrt((1 + math.exp(-t)) / cfg.n_paths)
        assert abs(cov - math.exp(-t / 2)) < 3 * se


def test_ou_euler_consistency():
    # fine-step Euler and the exact transition agree in distribution
    grid = TimeGrid.uniform(1.0, 256)
    cfg = SamplerConfig(seed=23, n_paths=50_000, grid=grid, dim=1)
    exact = sample_ou(cfg, scheme="exact")
    euler = sample_ou(cfg, scheme="euler")
    ks = stats.ks_2samp(exact.points[:, -1, 0], euler.points[:, -1, 0]).statistic
    assert ks < 0.02


def test_hyperbolic_bridge_points_on_sheet_and_snap():
    grid = TimeGrid.with_geometric_tail(1.0, 16)
    cfg = SamplerConfig(seed=29, n_paths=200, grid=grid, dim=3)
    ens = sample_hyperbolic_bridge(cfg)
    q = hyp.minkowski_dot(ens.points, ens.points)
    assert np.max(np.abs(q + 1.0)) < 1e-10
    o = hyp.origin(3)
    assert np.all(ens.points[:, -1, :] == o)
    assert ens.diagnostics["presnap_gap_median"] < 0.2
    assert 0.0 <= ens.diagnostics["cap_event_fraction"] <= 1.0


def test_hyperbolic_bridge_frames_orthonormal():
    grid = TimeGrid.with_geometric_tail(0.5, 8)
    cfg = SamplerConfig(seed=31, n_paths=16, grid=grid, dim=2)
    ens = sample_hyperbolic_bridge(cfg, store_frames=True)
    F = ens.frames
    for i in (0, 7, 15):
        for k in (0, 4, F.shape[1] - 1):
            G = np.array(
                [
                    [hyp.minkowski_dot(F[i, k, a], F[i, k, b]) for b in range(2)]
                    for a in range(2)
                ]
            )
            assert np.allclose(G, np.eye(2), atol=1e-8)


def test_hyperbolic_bridge_refinement_shrinks_endpoint_gap():
    gaps = []
    caps = []
    grid = TimeGrid.with_geometric_tail(1.0, 8)
    for _ in range(3):
        cfg = SamplerConfig(seed=37, n_paths=1500, grid=grid, dim=3)
        ens = sample_hyperbolic_bridge(cfg)
        gaps.append(ens.diagnostics["presnap_gap_median"])
        caps.append(ens.diagnostics["cap_event_fraction"])
        grid = grid.refined()
    assert gaps[0] > gaps[1] > gaps[2]
    assert caps[0] >= caps[1] >= caps[2]


def test_hyperbolic_bridge_n2_smoke():
    grid = TimeGrid.with_geometric_tail(0.5, 8)
    cfg = SamplerConfig(seed=41, n_paths=64, grid=grid, dim=2)
    ens = sample_hyperbolic_bridge(cfg)
    assert np.max(np.abs(hyp.minkowski_dot(ens.points, ens.points) + 1.0)) < 1e-10
    assert ens.diagnostics["presnap_gap_median"] < 0.5


def test_drift_cap_policy_counts_events():
    grid = TimeGrid.with_geometric_tail(1.0, 8)
    cfg = SamplerConfig(seed=43, n_paths=64, grid=grid, dim=3, drift_cap=1e-4)
    ens = sample_hyperbolic_bridge(cfg)
    assert ens.diagnostics["cap_event_fraction"] > 0.5  # tiny cap clips nearly always


def test_continuity_diagnostic_is_moderate():
    cfg = SamplerConfig(seed=47, n_paths=2000, grid=TimeGrid.uniform(1.0, 64), dim=1)
    ens = sample_wiener(cfg)
    assert continuity_diagnostic(ens) < 8.0


def test_binary_roundtrip_and_byte_identity(tmp_path):
    grid = TimeGrid.with_geometric_tail(1.0, 8)
    cfg = SamplerConfig(seed=53, n_paths=32, grid=grid, dim=3)
    ens = sample_hyperbolic_bridge(cfg)
    p1, p2 = tmp_path / "a.pens", tmp_path / "b.pens"
    save_ensemble(p1, ens)
    save_ensemble(p2, sample_hyperbolic_bridge(cfg))
    assert p1.read_bytes() == p2.read_bytes()  # same config => byte-identical file
    back = load_ensemble(p1)
    assert np.array_equal(back.points, ens.points)
    assert back.measure_tag == ens.measure_tag
    assert back.config == ens.config
    assert np.array_equal(back.diagnostics["presnap_gap"], ens.diagnostics["presnap_gap"])


def test_csv_export(tmp_path):
    cfg = SamplerConfig(seed=59, n_paths=3, grid=TimeGrid.uniform(1.0, 2), dim=2)
    ens = sample_wiener(cfg)
    out = tmp_path / "w.csv"
    ensemble_to_csv(out, ens)
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "path,node,t,x0,x1"
    assert len(lines) == 1 + 3 * 3
    row = lines[1].split(",")
    assert float(row[3]) == ens.points[0, 0, 0]


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.pens"
    p.write_bytes(b"not an ensemble")
    with pytest.raises(SamplerError, match="not a pathineq ensemble"):
        load_ensemble(p)
