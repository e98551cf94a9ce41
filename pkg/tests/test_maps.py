"""Map-family unit tests: branches, fixed points, noise hooks, guards."""

import math

import numpy as np
import pytest

from grazesim import (
    DegenerateParametersError,
    InvalidNoiseDrawError,
    InvalidSampleError,
    MapState,
    NordmarkParams,
    NumericOverflowError,
    StochasticMapCoeffs,
    det_step,
    fixed_point,
    n1_step,
    n2_step,
    n3_step,
    rho_for_state,
)


def random_params(rng, mu=None):
    tau = rng.uniform(-1.5, 1.5)
    delta = rng.uniform(0.02, 0.9)
    if abs(delta - tau + 1.0) < 1e-3:
        tau += 0.01
    return NordmarkParams(
        tau=tau,
        delta=delta,
        chi=1 if rng.random() < 0.5 else -1,
        mu=float(rng.uniform(-0.05, 0.05)) if mu is None else mu,
    )


def test_param_validation():
    with pytest.raises(ValueError):
        NordmarkParams(tau=0.5, delta=0.1, chi=2, mu=0.0)
    with pytest.raises(ValueError):
        NordmarkParams(tau=0.5, delta=-0.1, chi=1, mu=0.0)
    with pytest.raises(ValueError):
        NordmarkParams(tau=math.nan, delta=0.1, chi=1, mu=0.0)


def test_left_branch_is_linear(rng):
    for _ in range(50):
        p = random_params(rng)
        x = -rng.uniform(0.0, 2.0)
        y = rng.uniform(-2.0, 2.0)
        s2 = det_step(MapState(x, y), p)
        assert s2.x == p.tau * x + y
        assert s2.y == -p.delta * x + p.mu


def test_right_branch_subtracts_root(rng):
    for _ in range(50):
        p = random_params(rng)
        x = rng.uniform(1e-12, 2.0)
        y = rng.uniform(-2.0, 2.0)
        s2 = det_step(MapState(x, y), p)
        assert s2.x == p.tau * x + (y - p.chi * math.sqrt(x))
        assert s2.y == -p.delta * x + p.mu


def test_branches_agree_at_zero(rng):
    # the square-root term vanishes at x = 0, so the two formulas coincide
    for _ in range(20):
        p = random_params(rng)
        y = rng.uniform(-2.0, 2.0)
        s2 = det_step(MapState(0.0, y), p)
        assert s2 == MapState(y, p.mu)


def test_fixed_point_formula(rng):
    for _ in range(100):
        p = random_params(rng)
        fp = fixed_point(p)
        den = p.delta - p.tau + 1.0
        assert fp.x == pytest.approx(p.mu / den, rel=1e-13, abs=1e-300)
        assert fp.y == pytest.approx((1.0 - p.tau) * p.mu / den, rel=1e-13, abs=1e-300)
        assert fp.admissible == (fp.x < 0.0)
        if fp.admissible:
            nxt = det_step(MapState(fp.x, fp.y), p)
            assert nxt.x == pytest.approx(fp.x, abs=1e-14)
            assert nxt.y == pytest.approx(fp.y, abs=1e-14)


def test_fixed_point_known_value():
    p = NordmarkParams(tau=0.5813, delta=0.1518, chi=1, mu=-0.01)
    fp = fixed_point(p)
    assert fp.x == pytest.approx(-0.017528, abs=5e-7)
    assert fp.admissible


def test_fixed_point_at_zero_offset():
    p = NordmarkParams(tau=0.5813, delta=0.1518, chi=1, mu=0.0)
    fp = fixed_point(p)
    assert (fp.x, fp.y, fp.admissible) == (0.0, 0.0, False)


def test_fixed_point_degenerate():
    p = NordmarkParams(tau=1.5, delta=0.5, chi=1, mu=0.01)
    with pytest.raises(DegenerateParametersError):
        fixed_point(p)


def test_overflow_guard():
    p = NordmarkParams(tau=2.0, delta=0.5, chi=1, mu=0.0)
    with pytest.raises(NumericOverflowError):
        det_step(MapState(-1e308, -1e308), p)


# ---------------------------------------------------------------------------
# noisy-switching variant


def coeffs_like(rng):
    return StochasticMapCoeffs(
        a11=rng.uniform(-1.0, 1.0),
        a12=rng.uniform(0.05, 0.5),
        c=rng.uniform(0.5, 2.0),
        alphaL=1.0,
        betaL=1.0,
        gammaL=1.0,
        betaR=rng.uniform(1.2, 3.0),
        gammaR=1.0,
    )


def test_n1_zero_noise_matches_det(rng, ref_params, ref_coeffs):
    for _ in range(60):
        s = MapState(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        assert n1_step(s, 0.0, ref_params, ref_coeffs) == det_step(s, ref_params)


def test_n1_branches_on_shifted_x(ref_params, ref_coeffs):
    k1 = ref_coeffs.kappa1
    p, q = ref_params, ref_coeffs
    # x < 0 but x + kappa1*xi > 0: noise flips the orbit onto the root branch
    x, y, xi = -0.001, 0.2, 0.5
    shifted = x + k1 * xi
    assert shifted > 0.0
    s2 = n1_step(MapState(x, y), xi, p, q)
    assert s2.x == p.tau * x + (y - p.chi * math.sqrt(shifted))
    assert s2.y == -p.delta * x + p.mu
    # x > 0 but shifted below zero: linear step despite positive x
    x, xi = 0.001, -0.5
    assert x + k1 * xi <= 0.0
    s3 = n1_step(MapState(x, y), xi, p, q)
    assert s3 == MapState(p.tau * x + y, -p.delta * x + p.mu)


def test_kappa1_formula(rng):
    for _ in range(20):
        q = coeffs_like(rng)
        assert q.kappa1 == 1.0 / (q.a12 * q.a12 * q.c * q.c)


def test_n1_first_order_effect(ref_params, ref_coeffs):
    # for small xi the output shifts by about kappa1*xi/(2 sqrt(x)) in the
    # root term; verify the leading order against a tiny finite difference
    p, q = ref_params, ref_coeffs
    x, y = 0.025, 0.01
    xi = 1e-7
    base = det_step(MapState(x, y), p)
    pert = n1_step(MapState(x, y), xi, p, q)
    predicted = -p.chi * q.kappa1 * xi / (2.0 * math.sqrt(x))
    assert (pert.x - base.x) == pytest.approx(predicted, rel=1e-4)
    assert pert.y == base.y


# ---------------------------------------------------------------------------
# noisy root-coefficient variant


def test_n2_zero_noise_matches_det_bitwise(rng, ref_params, ref_coeffs):
    for _ in range(60):
        s = MapState(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        assert n2_step(s, 0.0, ref_params, ref_coeffs) == det_step(s, ref_params)


def test_n2_coefficient_interpolation(ref_params, ref_coeffs):
    # betaR = 2 for the reference oscillator; xi = 1 kills the root term
    assert ref_coeffs.betaR == 2.0
    s = MapState(0.04, -0.02)
    p = ref_params
    s2 = n2_step(s, 1.0, p, ref_coeffs)
    assert s2.x == p.tau * s.x + (s.y - p.chi * (0.0 * math.sqrt(s.x)))
    assert s2.y == -p.delta * s.x + p.mu


def test_n2_left_branch_ignores_noise(rng, ref_params, ref_coeffs):
    for _ in range(30):
        s = MapState(-rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0))
        xi = rng.uniform(-1.0, 1.0)
        assert n2_step(s, xi, ref_params, ref_coeffs) == det_step(s, ref_params)


def test_n2_rejects_draws_at_or_beyond_betar(ref_params, ref_coeffs):
    # precondition on the draw itself, enforced on either branch
    for x in (0.01, -0.01):
        for xi in (ref_coeffs.betaR, ref_coeffs.betaR + 0.5):
            with pytest.raises(InvalidNoiseDrawError):
                n2_step(MapState(x, 0.0), xi, ref_params, ref_coeffs)


# ---------------------------------------------------------------------------
# first-return-driven variant


def test_n3_reference_sample_matches_det_bitwise(rng, ref_params, ref_coeffs):
    # (r, h) = (2, 1) is the noiseless first-return geometry
    for _ in range(60):
        s = MapState(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        assert n3_step(s, 2.0, 1.0, ref_params, ref_coeffs) == det_step(s, ref_params)


def test_n3_modified_linear_part(ref_params, ref_coeffs):
    p, q = ref_params, ref_coeffs
    r, h = 2.2, 0.9
    s = MapState(0.03, -0.01)
    gap = q.gammaL / q.betaL - q.gammaR / q.betaR
    kappa3 = (q.gammaL * (h + 1.0) / (2.0 * q.betaL) - q.gammaR * r / (2.0 * q.betaR)) / gap
    h2 = h * h
    expect_x = (p.tau + q.a11 * (h2 - 1.0)) * s.x + (s.y - p.chi * (kappa3 * math.sqrt(s.x)))
    expect_y = -(p.delta * h2) * s.x + p.mu
    s2 = n3_step(s, r, h, p, q)
    assert s2.x == expect_x
    assert s2.y == expect_y


def test_n3_coefficient_reference_form(ref_coeffs):
    # with the reference coefficients the root factor reduces to
    # 1 + (h - 1) - (r - 2)/2
    q = ref_coeffs
    rng = np.random.default_rng(8)
    for _ in range(40):
        r = rng.uniform(0.5, 4.0)
        h = rng.uniform(0.2, 2.5)
        kappa3 = (q.gammaL * (h + 1.0) / (2.0 * q.betaL) - q.gammaR * r / (2.0 * q.betaR)) / q.slope_gap
        assert kappa3 == pytest.approx(1.0 + (h - 1.0) - (r - 2.0) / 2.0, rel=1e-12)


def test_n3_rejects_bad_samples(ref_params, ref_coeffs):
    s = MapState(0.01, 0.0)
    for r, h in ((0.0, 1.0), (-1.0, 1.0), (2.0, 0.0), (2.0, -0.2)):
        with pytest.raises(InvalidSampleError):
            n3_step(s, r, h, ref_params, ref_coeffs)


def test_n3_left_branch_is_plain(rng, ref_params, ref_coeffs):
    for _ in range(30):
        s = MapState(-rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0))
        assert n3_step(s, 3.0, 0.5, ref_params, ref_coeffs) == det_step(s, ref_params)


# ---------------------------------------------------------------------------
# per-state noise strength


def test_rho_reference_value(ref_coeffs):
    assert rho_for_state(0.025, 0.022, ref_coeffs) == pytest.approx(
        0.0062392491450141965, rel=1e-12
    )


def test_rho_scaling(rng, ref_coeffs):
    # quadratic in eps, inverse square root in x
    for _ in range(20):
        x = rng.uniform(1e-4, 1.0)
        eps = rng.uniform(1e-4, 0.5)
        base = rho_for_state(x, eps, ref_coeffs)
        assert rho_for_state(x, 2.0 * eps, ref_coeffs) == pytest.approx(4.0 * base, rel=1e-12)
        assert rho_for_state(4.0 * x, eps, ref_coeffs) == pytest.approx(0.5 * base, rel=1e-12)


def test_rho_needs_positive_x(ref_coeffs):
    with pytest.raises(ValueError):
        rho_for_state(0.0, 0.01, ref_coeffs)
    with pytest.raises(ValueError):
        rho_for_state(-0.1, 0.01, ref_coeffs)


def test_coeff_validation():
    with pytest.raises(DegenerateParametersError):
        StochasticMapCoeffs(
            a11=0.1, a12=0.0, c=1.0, alphaL=1.0, betaL=1.0, gammaL=1.0, betaR=2.0, gammaR=1.0
        )
    with pytest.raises(DegenerateParametersError):
        # equal slopes: the root coefficient denominator vanishes
        StochasticMapCoeffs(
            a11=0.1, a12=0.1, c=1.0, alphaL=1.0, betaL=1.0, gammaL=1.0, betaR=1.0, gammaR=1.0
        )
