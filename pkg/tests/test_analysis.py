"""Long-orbit machinery: drivers vs single-step ops, densities, scans, clouds."""

import math

import numpy as np
import pytest

from grazesim import (
    DegenerateClusteringError,
    DensityGrid,
    InvalidNoiseDrawError,
    MapOrbit,
    MapState,
    NordmarkParams,
    OUParams,
    StarvationError,
    bifurcation_scan,
    compare_clouds,
    concentration_fraction,
    det_step,
    detect_cycle,
    epsilon_for_alpha,
    invariant_density,
    largest_lyapunov,
    n1_step,
    n2_step,
    n3_step,
    orbit_points,
    ou_sequence,
    return_fractions,
    sample_first_return,
)
from conftest import REF_ETA_003  # noqa: F401  (kept: same conftest as flow tests)


def _params(ref_params, mu=None):
    if mu is None:
        return ref_params
    return NordmarkParams(tau=ref_params.tau, delta=ref_params.delta, chi=ref_params.chi, mu=mu)


# ---------------------------------------------------------------------------
# orbit drivers against the single-step operations


def test_det_driver_matches_repeated_steps(ref_params):
    orbit = MapOrbit("det", ref_params, x0=0.01, y0=0.0)
    xs, ys = orbit.take(300)
    s = MapState(0.01, 0.0)
    for i in range(300):
        s = det_step(s, ref_params)
        assert xs[i] == s.x and ys[i] == s.y


def test_n1_driver_matches_composition(ref_params, ref_coeffs):
    eps, nu = 5e-4, 0.5
    orbit = MapOrbit(
        "n1", ref_params, ref_coeffs, eps=eps, nu=nu, x0=0.01, y0=0.0,
        rng=np.random.default_rng(5),
    )
    xs1, _ = orbit.take(400)
    xs2, _ = orbit.take(100)

    # mirror the generator usage: stationary start, then one sequence per take
    rng = np.random.default_rng(5)
    ou = OUParams(eps=eps, nu=nu)
    xi = ou.stationary_std * rng.standard_normal()
    s = MapState(0.01, 0.0)
    out = []
    for m in (400, 100):
        seq = ou_sequence(m, ou, rng, xi0=xi)
        xi = float(seq[-1])
        for z in seq:
            s = n1_step(s, z, ref_params, ref_coeffs)
            out.append(s.x)
    assert np.array_equal(np.concatenate([xs1, xs2]), np.array(out))


def test_n2_driver_matches_composition(ref_params, ref_coeffs):
    eps, nu = 0.1, 0.5
    orbit = MapOrbit(
        "n2", ref_params, ref_coeffs, eps=eps, nu=nu, x0=0.01, y0=0.0,
        rng=np.random.default_rng(11),
    )
    xs1, _ = orbit.take(500)

    rng = np.random.default_rng(11)
    ou = OUParams(eps=eps, nu=nu)
    xi = ou.stationary_std * rng.standard_normal()
    seq = ou_sequence(500, ou, rng, xi0=xi)
    s = MapState(0.01, 0.0)
    exp = []
    for z in seq:
        s = n2_step(s, z, ref_params, ref_coeffs)
        exp.append(s.x)
    assert np.array_equal(xs1, np.array(exp))


def test_n2_driver_checks_every_draw(ref_params, ref_coeffs):
    # enormous amplitude guarantees a draw at or past betaR within a few steps
    orbit = MapOrbit(
        "n2", ref_params, ref_coeffs, eps=50.0, x0=-1.0, y0=0.0,
        rng=np.random.default_rng(0),
    )
    with pytest.raises(InvalidNoiseDrawError):
        orbit.take(1000)


def test_n3_driver_matches_composition(ref_params, ref_coeffs):
    eps = 0.022
    orbit = MapOrbit(
        "n3", ref_params, ref_coeffs, eps=eps, x0=0.01, y0=0.0,
        rng=np.random.default_rng(7),
    )
    xs1, _ = orbit.take(1000)

    q = ref_coeffs
    rho_const = eps * eps * math.sqrt(q.alphaL) / (q.betaR * math.sqrt(2.0 * q.betaL) * abs(q.a12 * q.c))
    rng = np.random.default_rng(7)
    s = MapState(0.01, 0.0)
    exp = []
    for _ in range(1000):
        if s.x > 0.0:
            r, h = sample_first_return(rho_const / math.sqrt(s.x), rng)
            s = n3_step(s, r, h, ref_params, ref_coeffs)
        else:
            s = det_step(s, ref_params)
        exp.append(s.x)
    assert np.array_equal(xs1, np.array(exp))


def test_n3_zero_amplitude_is_deterministic(ref_params, ref_coeffs):
    a = orbit_points("n3", ref_params, ref_coeffs, n=200, eps=0.0, x0=0.01, y0=0.0, seed=3)
    b = orbit_points("det", ref_params, n=200, x0=0.01, y0=0.0, seed=9)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_driver_validation(ref_params, ref_coeffs):
    with pytest.raises(ValueError):
        MapOrbit("n1", ref_params)  # stochastic variant without coefficients
    with pytest.raises(ValueError):
        MapOrbit("n2", ref_params, ref_coeffs, eps=-0.1)
    with pytest.raises(ValueError):
        MapOrbit("foo", ref_params)
    assert MapOrbit("det", ref_params).take(0)[0].shape == (0,)


# ---------------------------------------------------------------------------
# density grids


def test_density_grid_bookkeeping(rng):
    grid = DensityGrid(0.0, 1.0, 0.0, 1.0, nx=16, ny=16)
    xs = rng.uniform(-0.2, 1.2, size=5000)
    ys = rng.uniform(-0.2, 1.2, size=5000)
    grid.add(xs, ys)
    assert grid.total == 5000
    assert int(grid.counts.sum()) + grid.out_of_range == grid.total
    inside = np.sum((xs >= 0) & (xs <= 1) & (ys >= 0) & (ys <= 1))
    assert abs(int(grid.counts.sum()) - inside) <= 2  # edge-cell convention slack
    # density integrates to the in-range fraction
    cell = (1.0 / 16) ** 2
    assert grid.density().sum() * cell == pytest.approx(grid.counts.sum() / grid.total)


def test_density_grid_validation():
    with pytest.raises(ValueError):
        DensityGrid(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        DensityGrid(0.0, 1.0, 0.0, 1.0, nx=0)
    a = DensityGrid(0.0, 1.0, 0.0, 1.0, nx=8, ny=8)
    b = DensityGrid(0.0, 2.0, 0.0, 1.0, nx=8, ny=8)
    with pytest.raises(ValueError):
        a.merge(b)


def test_merged_halves_equal_full_run(ref_params, ref_coeffs):
    bounds = (-0.2, 0.1, -0.05, 0.1)
    k = 20_000

    full = DensityGrid(*bounds, nx=64, ny=64)
    orbit = MapOrbit("n1", ref_params, ref_coeffs, eps=5e-4, rng=np.random.default_rng(21))
    full.add(*orbit.take(2 * k))

    half = DensityGrid(*bounds, nx=64, ny=64)
    other = DensityGrid(*bounds, nx=64, ny=64)
    orbit2 = MapOrbit("n1", ref_params, ref_coeffs, eps=5e-4, rng=np.random.default_rng(21))
    half.add(*orbit2.take(k))
    other.add(*orbit2.take(k))
    half.merge(other)

    assert np.array_equal(full.counts, half.counts)
    assert full.total == half.total and full.out_of_range == half.out_of_range


def test_invariant_density_reproducible(ref_params, ref_coeffs):
    kw = dict(n=30_000, eps=5e-4, transient=500, seed=42)
    g1 = invariant_density("n1", ref_params, ref_coeffs, **kw)
    g2 = invariant_density("n1", ref_params, ref_coeffs, **kw)
    assert (g1.x_min, g1.x_max, g1.y_min, g1.y_max) == (g2.x_min, g2.x_max, g2.y_min, g2.y_max)
    assert np.array_equal(g1.counts, g2.counts)
    assert g1.total == 30_000
    # auto bounds from the pilot keep nearly everything on the grid
    assert g1.out_of_range < 0.001 * g1.total


# ---------------------------------------------------------------------------
# return fractions


def test_return_fractions_deterministic_three_cycle(ref_params):
    rs = return_fractions("det", ref_params, returns=500)
    assert rs.sigma == {3: 1.0}
    assert rs.returns == 500


def test_return_fraction_sums_to_one(ref_params, ref_coeffs):
    rs = return_fractions("n1", ref_params, ref_coeffs, returns=2000, eps=3e-4, seed=1)
    assert sum(rs.sigma.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(j >= 1 for j in rs.sigma)
    assert rs.sigma[3] > 0.5  # noise perturbs but does not destroy the cycle


def test_return_fractions_need_positive_mu(ref_params):
    p = _params(ref_params, -0.01)
    with pytest.raises(ValueError):
        return_fractions("det", p, returns=10)


def test_return_fractions_starvation(ref_params):
    # the gap at tiny mu is 5 iterations; a cap below that must trip the guard
    p = _params(ref_params, 1e-7)
    with pytest.raises(StarvationError):
        return_fractions("det", p, returns=10, cap=4)
    rs = return_fractions("det", p, returns=10, cap=5)
    assert rs.sigma == {5: 1.0}


# ---------------------------------------------------------------------------
# bifurcation scans


def test_scan_zero_noise_matches_deterministic(ref_params, ref_coeffs):
    mus = np.linspace(-0.01, 0.03, 41)
    kw = dict(n_transient=200, n_keep=50, n_chunks=4)
    det = bifurcation_scan("det", ref_params.tau, ref_params.delta, ref_params.chi, mus, **kw)
    n2 = bifurcation_scan(
        "n2", ref_params.tau, ref_params.delta, ref_params.chi, mus,
        coeffs=ref_coeffs, eps=0.0, **kw,
    )
    assert np.array_equal(det.mu_values, n2.mu_values)
    for a, b in zip(det.points, n2.points):
        assert np.array_equal(a, b)
    assert det.flagged == [] and n2.flagged == []


def test_scan_thread_count_does_not_change_results(ref_params, ref_coeffs):
    mus = np.linspace(0.0, 0.03, 24)
    kw = dict(coeffs=ref_coeffs, eps=3e-4, n_transient=100, n_keep=40, seed=8, n_chunks=6)
    one = bifurcation_scan("n1", ref_params.tau, ref_params.delta, ref_params.chi, mus, threads=1, **kw)
    two = bifurcation_scan("n1", ref_params.tau, ref_params.delta, ref_params.chi, mus, threads=2, **kw)
    for a, b in zip(one.points, two.points):
        assert np.array_equal(a, b)
    assert one.flagged == two.flagged


def test_scan_flags_divergent_parameters():
    # tau far outside the contracting regime blows up from this start
    res = bifurcation_scan(
        "det", 10.0, 0.2, 1, [0.01, 0.02, 0.03],
        n_transient=500, n_keep=20, n_chunks=3, x0=1.0, y0=0.0,
    )
    assert len(res.flagged) == 3
    assert [m for m, _ in res.flagged] == [0.01, 0.02, 0.03]
    for pts in res.points:
        assert np.all(np.isnan(pts)) and len(pts) == 20


def test_scan_warm_start_differs_from_cold(ref_params):
    # one chunk continues states along mu; many chunks restart at the fixed
    # point, so a bistable window can resolve differently
    mus = np.linspace(0.0, 0.03, 16)
    warm = bifurcation_scan(
        "det", ref_params.tau, ref_params.delta, ref_params.chi, mus,
        n_transient=400, n_keep=30, n_chunks=1,
    )
    assert len(warm.points) == 16
    assert warm.flagged == []
    # every kept orbit is finite and the last mu shows the three-cycle
    assert all(np.all(np.isfinite(p)) for p in warm.points)
    assert len(np.unique(np.round(warm.points[-1], 7))) == 3


# ---------------------------------------------------------------------------
# attractor classification


def test_detect_three_cycle(ref_params):
    hit = detect_cycle(ref_params)
    assert hit is not None
    period, pts = hit
    assert period == 3
    assert np.sort(pts[:, 0]) == pytest.approx([-0.108229, -0.036722, 0.025087], abs=1e-5)


def test_detect_cycle_none_on_chaos(ref_params):
    p = _params(ref_params, 0.0145)
    assert detect_cycle(p, x0=-0.046454, y0=0.092570, transient=10_000) is None
    lam = largest_lyapunov(p, x0=-0.046454, y0=0.092570)
    assert lam == pytest.approx(0.0642, abs=5e-3)
    assert lam > 0.0


def test_lyapunov_negative_on_stable_cycle(ref_params):
    assert largest_lyapunov(ref_params) < -0.05


# ---------------------------------------------------------------------------
# cloud comparison


def test_compare_identical_clouds(rng):
    seeds = np.array([[0.0, 0.0], [1.0, 1.0], [-1.0, 0.5]])
    pts = np.concatenate([s + 0.05 * rng.standard_normal((40, 2)) for s in seeds])
    cmp = compare_clouds(pts, pts, 3, seeds)
    assert len(cmp.clusters) == 3
    for cl in cmp.clusters:
        assert cl.offset_norm == 0.0
        assert cl.std_ratio == 1.0
        assert cl.n_a == cl.n_b


def test_compare_gaussian_clouds(rng):
    seeds = np.array([[0.0, 0.0], [3.0, 3.0]])
    n = 4000
    s = 0.2
    a = np.concatenate([c + s * rng.standard_normal((n, 2)) for c in seeds])
    b = np.concatenate([c + s * rng.standard_normal((n, 2)) for c in seeds])
    cmp = compare_clouds(a, b, 2, seeds)
    for cl in cmp.clusters:
        assert cl.offset_norm < 5.0 * s / math.sqrt(n)
        assert cl.std_a == pytest.approx(s * math.sqrt(2.0), rel=0.05)
        assert cl.std_ratio == pytest.approx(1.0, abs=0.05)


def test_compare_clouds_empty_cluster(rng):
    pts = 0.1 * rng.standard_normal((50, 2))
    seeds = np.array([[0.0, 0.0], [100.0, 100.0]])
    with pytest.raises(DegenerateClusteringError):
        compare_clouds(pts, pts, 2, seeds)


def test_compare_clouds_validation(rng):
    pts = rng.standard_normal((10, 2))
    with pytest.raises(ValueError):
        compare_clouds(pts, np.empty((0, 2)), 1, np.array([[0.0, 0.0]]))
    with pytest.raises(ValueError):
        compare_clouds(pts, pts, 2, np.array([[0.0, 0.0]]))


def test_concentration_fraction_synthetic():
    grid = DensityGrid(0.0, 1.0, 0.0, 1.0, nx=10, ny=10)
    cx, cy = grid.cell_centers()
    tight = np.full(500, cx[3]), np.full(500, cy[7])
    grid.add(*tight)
    centers = np.array([[cx[3], cy[7]]])
    assert concentration_fraction(grid, centers) == 1.0
    # out-of-range mass counts against the concentrated fraction
    grid.add(np.full(500, 5.0), np.full(500, 5.0))
    assert concentration_fraction(grid, centers) == 0.5


def test_concentration_fraction_empty_grid():
    grid = DensityGrid(0.0, 1.0, 0.0, 1.0, nx=4, ny=4)
    with pytest.raises(ValueError):
        concentration_fraction(grid, np.array([[0.5, 0.5]]))


def test_epsilon_for_alpha_table():
    assert epsilon_for_alpha(1, 1.0) == 0.0001
    assert epsilon_for_alpha(2, 3.0) == 0.375
    assert epsilon_for_alpha(3, 0.0) == 0.0
    with pytest.raises(ValueError):
        epsilon_for_alpha(0, 1.0)
    with pytest.raises(ValueError):
        epsilon_for_alpha(1, -1.0)
