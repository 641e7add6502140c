import math

import numpy as np
import pytest

from pathineq import hyperbolic as hyp
from pathineq.estimators import (
    CylindricalFunction,
    EstimatorError,
    GreenKernel,
    coordinate_function,
    entropy,
    exp_half_function,
    exp_square_moment,
    h_gradient_energy,
    hermite_function,
    lsi_ratio,
    rayleigh_scan,
    sup_distance,
    tail_slope_vs_square,
    variance,
    weight_tail,
)
from pathineq.samplers import (
    SamplerConfig,
    TimeGrid,
    sample_flat_bridge,
    sample_hyperbolic_bridge,
    sample_ou,
    sample_wiener,
)


def gaussian_ensemble(n_paths, seed=1):
    # standard Gaussian as a Wiener path evaluated at T = 1
    cfg = SamplerConfig(seed=seed, n_paths=n_paths, grid=TimeGrid.uniform(1.0, 1), dim=1)
    return sample_wiener(cfg)


BASED = GreenKernel(variant="based_path", T=1.0)
BRIDGE = GreenKernel(variant="bridge", T=1.0)


# ---------------------------------------------------------------------------
# Green kernels


def test_green_kernel_values():
    assert BASED(0.3, 0.7) == 0.3
    assert BRIDGE(0.5, 0.5) == 0.25
    assert BRIDGE(1.0, 0.5) == 0.0


def test_green_gram_psd_on_random_subsets():
    rng = np.random.default_rng(0)
    for variant in ("based_path", "bridge"):
        K = GreenKernel(variant=variant, T=2.0)
        for _ in range(25):
            times = np.sort(rng.uniform(0.01, 2.0, size=rng.integers(2, 9)))
            w = np.linalg.eigvalsh(K.gram(times))
            assert w.min() >= -1e-10


# ---------------------------------------------------------------------------
# gradient energies


def test_energy_bridge_midpoint_exact():
    cfg = SamplerConfig(seed=3, n_paths=10, grid=TimeGrid.uniform(1.0, 4), dim=1)
    ens = sample_flat_bridge(cfg)
    F = coordinate_function(0.5)
    e = h_gradient_energy(F, ens, BRIDGE)
    assert np.all(e == 0.25)  # G(T/2, T/2) = T/4 exactly


def test_energy_based_endpoint_exact():
    ens = gaussian_ensemble(10, seed=4)
    F = coordinate_function(1.0)
    e = h_gradient_energy(F, ens, BASED)
    assert np.all(e == 1.0)  # G(T, T) = T


def test_energy_constant_function_zero():
    ens = gaussian_ensemble(10, seed=5)
    F = CylindricalFunction(
        times=(1.0,),
        fn=lambda X: np.full(X.shape[0], 3.5),
        partials=lambda X: np.zeros_like(X),
    )
    assert np.all(h_gradient_energy(F, ens, BASED) == 0.0)


def test_energy_kernel_measure_mismatch():
    cfg = SamplerConfig(seed=6, n_paths=5, grid=TimeGrid.uniform(1.0, 4), dim=1)
    ens = sample_flat_bridge(cfg)
    with pytest.raises(EstimatorError, match="bridge"):
        h_gradient_energy(coordinate_function(0.5), ens, BASED)


def test_fd_partials_match_analytic():
    rng = np.random.default_rng(7)
    times = (0.25, 0.5, 1.0)

    def fn(X):
        return np.sin(X[:, 0, 0]) * X[:, 1, 0] + X[:, 2, 0] ** 2

    def partials(X):
        out = np.zeros_like(X)
        out[:, 0, 0] = np.cos(X[:, 0, 0]) * X[:, 1, 0]
        out[:, 1, 0] = np.sin(X[:, 0, 0])
        out[:, 2, 0] = 2 * X[:, 2, 0]
        return out

    F_an = CylindricalFunction(times=times, fn=fn, partials=partials)
    F_fd = CylindricalFunction(times=times, fn=fn)
    cfg = SamplerConfig(seed=8, n_paths=200, grid=TimeGrid.uniform(1.0, 4), dim=1)
    ens = sample_wiener(cfg)
    e_an = h_gradient_energy(F_an, ens, BASED)
    e_fd = h_gradient_energy(F_fd, ens, BASED)
    rel = np.abs(e_an - e_fd) / np.maximum(np.abs(e_an), 1e-10)
    assert rel.max() < 1e-4


def test_flat_through_transport_code_path_agrees():
    cfg = SamplerConfig(seed=9, n_paths=100, grid=TimeGrid.uniform(1.0, 8), dim=2)
    ens = sample_wiener(cfg)

    def fn(X):
        return X[:, 0, 0] * X[:, 1, 1] + np.cos(X[:, 0, 1])

    F = CylindricalFunction(times=(0.5, 1.0), fn=fn)
    direct = h_gradient_energy(F, ens, BASED)
    transported = h_gradient_energy(F, ens, BASED, force_transport=True)
    assert np.max(np.abs(direct - transported)) < 1e-10


def test_hyperbolic_energy_single_time_norm():
    # one evaluation time: energy = G(t,t) |v|^2 with v the tangent gradient;
    # transport back to base preserves the Minkowski norm, so the pairing
    # must reproduce it exactly
    grid = TimeGrid.with_geometric_tail(1.0, 8)
    cfg = SamplerConfig(seed=10, n_paths=50, grid=grid, dim=3)
    ens = sample_hyperbolic_bridge(cfg)
    t = grid.nodes[4]
    c = np.array([0.3, -0.2, 0.5, 0.1])

    def fn(X):
        return X[:, 0, :] @ c

    def partials(X):
        out = np.zeros_like(X)
        out[:, 0, :] = c
        return out

    F = CylindricalFunction(times=(t,), fn=fn, partials=partials)
    kern = GreenKernel(variant="bridge", T=1.0)
    e = h_gradient_energy(F, ens, kern)
    x = ens.points[:, 4, :]
    eta_c = c.copy()
    eta_c[-1] *= -1
    v = hyp.tangent_project(x, np.broadcast_to(eta_c, x.shape))
    expect = kern(t, t) * hyp.minkowski_dot(v, v)
    assert np.max(np.abs(e - expect)) < 1e-10
    assert np.all(e >= 0)


# ---------------------------------------------------------------------------
# variance / entropy estimators


def test_constant_function_variance_entropy_exact_zero():
    ens = gaussian_ensemble(1000, seed=11)
    F = CylindricalFunction(
        times=(1.0,), fn=lambda X: np.full(X.shape[0], 2.0), partials=lambda X: np.zeros_like(X)
    )
    assert variance(F, ens).value == 0.0
    assert entropy(F, ens).value == 0.0


def test_gaussian_coordinate_variance():
    ens = gaussian_ensemble(100_000, seed=12)
    est = variance(coordinate_function(1.0), ens)
    assert abs(est.value - 1.0) < 3 * est.std_error
    assert est.std_error < 0.02


def test_entropy_scaling_identity():
    ens = gaussian_ensemble(5000, seed=13)
    lam = 1.7
    F = coordinate_function(1.0)
    Fs = CylindricalFunction(
        times=(1.0,), fn=lambda X: lam * X[:, 0, 0], partials=None
    )
    e1 = entropy(F, ens).value
    e2 = entropy(Fs, ens).value
    assert e2 == pytest.approx(lam * lam * e1, rel=1e-12)


def test_entropy_sign_invariance():
    ens = gaussian_ensemble(5000, seed=14)
    F = exp_half_function(0.5, 1.0)
    Fneg = CylindricalFunction(times=(1.0,), fn=lambda X: -F.fn(X))
    assert entropy(F, ens).value == pytest.approx(entropy(Fneg, ens).value, rel=1e-14)


def test_degenerate_ensemble_rejected():
    ens = gaussian_ensemble(1, seed=15)
    with pytest.raises(EstimatorError, match="degenerate|at least two"):
        variance(coordinate_function(1.0), ens)


def test_gaussian_lsi_ratio_is_two():
    ens = gaussian_ensemble(200_000, seed=16)
    for lam in (0.25, 0.5, 1.0):
        est = lsi_ratio(exp_half_function(lam, 1.0), ens, BASED)
        assert abs(est.value - 2.0) < 3 * est.std_error
        assert est.std_error < 0.05


def test_jackknife_matches_closed_form_for_mean():
    # jackknife of the identity functional reduces to the classical SE
    rng = np.random.default_rng(17)
    x = rng.normal(size=4000)
    from pathineq.estimators import _jackknife

    est = _jackknife([x], lambda m: m)
    assert est.value == pytest.approx(x.mean(), rel=1e-12)
    assert est.std_error == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-10)


# ---------------------------------------------------------------------------
# Rayleigh scans


def test_rayleigh_hermite_eigenstructure():
    ens = gaussian_ensemble(200_000, seed=18)
    family = [hermite_function(k, 1.0) for k in (1, 2, 3)]
    scan = rayleigh_scan(family, ens, BASED)
    targets = [1.0, 0.5, 1.0 / 3.0]
    for row, target in zip(scan.rows, targets):
        assert abs(row.ratio.value - target) < 3 * row.ratio.std_error
    assert scan.best_index == 0
    assert abs(scan.best_ratio.value - 1.0) < 3 * scan.best_ratio.std_error


def test_rayleigh_bridge_midpoint_ratio_one():
    cfg = SamplerConfig(seed=19, n_paths=100_000, grid=TimeGrid.uniform(1.0, 8), dim=1)
    ens = sample_flat_bridge(cfg)
    scan = rayleigh_scan([coordinate_function(0.5)], ens, BRIDGE)
    r = scan.best_ratio
    assert abs(r.value - 1.0) < 3 * r.std_error


def test_rayleigh_random_polynomials_bounded_by_poincare():
    # 20 random polynomials of a standard Gaussian: every Rayleigh quotient
    # sits below the Poincare constant 1, so best <= 1 + 4 SE
    ens = gaussian_ensemble(150_000, seed=99)
    rng = np.random.default_rng(2718)
    family = []
    for i in range(20):
        deg = int(rng.integers(1, 6))
        coeffs = rng.normal(size=deg + 1)
        poly = np.polynomial.Polynomial(coeffs)
        dpoly = poly.deriv()

        def fn(X, p=poly):
            return p(X[:, 0, 0])

        def partials(X, dp=dpoly):
            out = np.zeros_like(X)
            out[:, 0, 0] = dp(X[:, 0, 0])
            return out

        family.append(
            CylindricalFunction(times=(1.0,), fn=fn, partials=partials, label=f"p{i}")
        )
    scan = rayleigh_scan(family, ens, BASED)
    best = scan.best_ratio
    assert best.value <= 1.0 + 4.0 * best.std_error


def test_rayleigh_ratios_nonnegative_and_errors():
    ens = gaussian_ensemble(1000, seed=20)
    fam = [hermite_function(1, 1.0), hermite_function(2, 1.0)]
    scan = rayleigh_scan(fam, ens, BASED)
    assert all(r.ratio.value >= 0 for r in scan.rows)
    with pytest.raises(EstimatorError, match="empty"):
        rayleigh_scan([], ens, BASED)
    const = CylindricalFunction(
        times=(1.0,), fn=lambda X: np.ones(X.shape[0]), partials=lambda X: np.zeros_like(X)
    )
    with pytest.raises(EstimatorError, match="zero estimated energy"):
        rayleigh_scan([const], ens, BASED)


# ---------------------------------------------------------------------------
# weight tails


@pytest.fixture(scope="module")
def small_bridge():
    grid = TimeGrid.with_geometric_tail(1.0, 16)
    cfg = SamplerConfig(seed=21, n_paths=4000, grid=grid, dim=3)
    return sample_hyperbolic_bridge(cfg)


def test_weight_tail_basics(small_bridge):
    tb = weight_tail(small_bridge)
    assert tb(0.0) == 1.0  # u >= 0 always
    vals = np.array(tb.values)
    assert np.all(np.diff(vals) <= 1e-15)
    assert tb.source == "empirical"
    assert tb.confidence == 0.99


def test_sup_distance_positive(small_bridge):
    u = sup_distance(small_bridge)
    assert np.all(u > 0)
    assert u.shape == (4000,)


def test_tail_slope_negative_for_gaussian_type(small_bridge):
    u = sup_distance(small_bridge)
    slope, se = tail_slope_vs_square(u)
    assert slope < 0
    assert slope + 2.326 * se < 0  # negative at 99% one-sided confidence


def test_exp_square_moment_flags():
    rng = np.random.default_rng(22)
    u = np.abs(rng.normal(size=5000))
    est = exp_square_moment(u, 0.25)
    assert est.value > 1.0
    assert "max_dominated" not in est.flags
    est_hot = exp_square_moment(u, 20.0)
    assert "max_dominated" in est_hot.flags


def test_estimator_reduction_order_insensitive():
    # fsum-based totals: shuffling the paths leaves the value bit-identical
    ens = gaussian_ensemble(10_000, seed=23)
    F = exp_half_function(0.5, 1.0)
    v1 = entropy(F, ens).value
    perm = np.random.default_rng(0).permutation(ens.n_paths)
    ens.points = ens.points[perm]
    v2 = entropy(F, ens).value
    assert v1 == v2
