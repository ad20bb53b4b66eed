import math

import numpy as np
import pytest

import benfold as bf
from benfold.oracle import (
    QuadratureConfig,
    adaptive_simpson,
    averaging_residual,
    bisect_root,
    inverse_cdf_sampler,
)

LN10 = math.log(10.0)


# ---------------------------------------------------------------------------
# quadrature machinery
# ---------------------------------------------------------------------------


def test_simpson_exact_on_cubics():
    # Simpson with Richardson is exact on cubics up to the endpoint-inset
    # bias (~1e-12 * width**2 * slope mismatch), which the jump-tolerant
    # endpoint sampling deliberately accepts
    val, err = adaptive_simpson(lambda x: x**3 - 2 * x**2 + x - 4, 0.0, 2.0)
    want = 4.0 - 16.0 / 3.0 + 2.0 - 8.0
    assert val == pytest.approx(want, abs=1e-11)


def test_simpson_exact_on_lines_despite_inset():
    # symmetric endpoint insets cancel exactly for affine integrands
    for slope, a, b in ((0.375, -1.0, 3.0), (100.0, 0.0, 1.0)):
        val, _ = adaptive_simpson(lambda x: slope * np.asarray(x, dtype=float), a, b)
        assert val == slope * (b * b - a * a) / 2.0


def test_simpson_exponential_accuracy():
    val, err = adaptive_simpson(np.exp, 0.0, 1.0, abs_tol=1e-12)
    assert val == pytest.approx(math.e - 1.0, abs=1e-12)
    assert err < 1e-10


def test_simpson_scalar_only_integrand():
    # non-vectorized callables are detected and evaluated pointwise
    val, _ = adaptive_simpson(lambda x: math.sin(float(x)), 0.0, math.pi)
    assert val == pytest.approx(2.0, abs=1e-10)


def test_integrate_with_breakpoint_on_kink():
    cfg = QuadratureConfig(breakpoints=(0.3,))
    val, err = bf.integrate(lambda x: np.abs(np.asarray(x) - 0.3), 0.0, 1.0, cfg)
    want = 0.5 * (0.3**2 + 0.7**2)
    assert val == pytest.approx(want, abs=1e-13)


def test_integrate_jump_at_breakpoint():
    def step(x):
        return np.where(np.asarray(x, dtype=float) < 0.5, 1.0, 3.0)

    cfg = QuadratureConfig(breakpoints=(0.5,))
    val, err = bf.integrate(step, 0.0, 1.0, cfg)
    assert val == pytest.approx(2.0, abs=1e-13)


def test_quadrature_error_carries_partial_value():
    with pytest.raises(bf.QuadratureError) as exc_info:
        adaptive_simpson(np.exp, 0.0, 1.0, abs_tol=1e-280, max_depth=200)
    err = exc_info.value
    assert err.partial_value == pytest.approx(math.e - 1.0, abs=1e-6)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_depth=0)


def test_bisect_root_simple():
    r = bisect_root(lambda x: float(x) ** 2 - 2.0, 0.0, 2.0)
    assert r == pytest.approx(math.sqrt(2.0), abs=1e-13)
    with pytest.raises(ValueError):
        bisect_root(lambda x: 1.0, 0.0, 1.0)


# ---------------------------------------------------------------------------
# quadrature oracle for the fold distance
# ---------------------------------------------------------------------------


def test_delta_numeric_uniform_is_zero():
    r = bf.delta_numeric(bf.uniform_density(0, 1), 1)
    assert r.method == "quadrature_L1"
    assert r.value == pytest.approx(0.0, abs=1e-12)


def test_delta_numeric_reference_values():
    f = bf.uniform_log_density(10)
    r1 = bf.delta_numeric(f, 1)
    assert r1.value == pytest.approx(0.2688434, abs=1e-7)
    assert r1.error_estimate < 1e-9
    r8 = bf.delta_numeric(f, 8)
    assert r8.value == pytest.approx(0.0359366, abs=1e-7)


def test_delta_numeric_rejects_bad_n():
    f = bf.uniform_density(0, 1)
    with pytest.raises(ValueError):
        bf.delta_numeric(f, 0)
    with pytest.raises(ValueError):
        bf.delta_numeric(f, 2.5)


def test_delta_numeric_triangular_fold_is_uniform():
    # the symmetric unit triangle on [0, 2] folds to exactly flat
    r = bf.delta_numeric(bf.triangular_density(0, 1, 2), 1)
    assert r.value == pytest.approx(0.0, abs=1e-10)


def test_delta_numeric_piecewise_with_kinks():
    f = bf.PiecewiseDensity(
        (bf.const_segment(0.0, 0.5, 0.4), bf.const_segment(0.5, 1.0, 1.6))
    )
    # fold is f itself: delta = 0.5*(0.6*0.5 + 0.6*0.5)
    r = bf.delta_numeric(f, 1)
    assert r.value == pytest.approx(0.3, abs=1e-12)


# ---------------------------------------------------------------------------
# crossing-point oracle
# ---------------------------------------------------------------------------


def test_crossing_uniform_reports_zero():
    r = bf.delta_crossing_unimodal(bf.fold_mod1(bf.uniform_density(0, 1)))
    assert r.value == 0.0
    assert "uniform" in r.detail


def test_crossing_uniform_log_reference():
    folded = bf.fold_mod1(bf.uniform_log_density(10))
    r = bf.delta_crossing_unimodal(folded)
    assert r.value == pytest.approx(0.2688434, abs=1e-7)
    # the crossing sits at log10(9/ln 10)
    t0 = float(r.detail.split(",")[0].removeprefix("t0="))
    assert t0 == pytest.approx(math.log10(9.0 / LN10), abs=1e-12)


def test_crossing_scaled_by_two_reference():
    folded = bf.fold_mod1(bf.scale_density(bf.uniform_log_density(10), 2))
    r = bf.delta_crossing_unimodal(folded)
    assert r.value == pytest.approx(0.1413379, abs=1e-7)


def test_crossing_rejects_nonuniform_without_crossing():
    hump = bf.FoldedDensity(
        fn=lambda t: 1.0 + 0.3 * np.sin(math.pi * np.asarray(t, dtype=float))
    )
    with pytest.raises(ValueError):
        bf.delta_crossing_unimodal(hump)


def test_crossing_agrees_with_l1_oracle():
    for n in (1, 3, 5):
        f = bf.uniform_log_density(10)
        via_l1 = bf.delta_numeric(f, n).value
        via_crossing = bf.delta_crossing_unimodal(
            bf.fold_mod1(bf.scale_density(f, n))
        ).value
        assert via_l1 == pytest.approx(via_crossing, abs=1e-9)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def test_mc_uniform_near_zero():
    r = bf.delta_monte_carlo(bf.uniform_sampler(0, 1), 3, 200_000, 100, seed=11)
    assert r.method == "monte_carlo"
    assert r.value <= 3.0 * r.error_estimate


def test_mc_uniform_log_near_reference():
    r = bf.delta_monte_carlo(bf.uniform_log_sampler(10), 1, 1_000_000, 200, seed=3)
    assert abs(r.value - 0.2688434) <= 3.0 * r.error_estimate
    assert "seed=3" in r.detail


def test_mc_high_power_near_reference():
    # n = 100 drives the fold almost flat; the histogram estimate is mostly
    # noise at this sample size but must sit inside its own 3 sigma window
    r = bf.delta_monte_carlo(bf.uniform_log_sampler(10), 100, 1_000_000, 100, seed=17)
    assert abs(r.value - 0.0028782) <= 3.0 * r.error_estimate


def test_mc_precondition_and_errors():
    with pytest.raises(ValueError):
        bf.delta_monte_carlo(bf.uniform_sampler(0, 1), 1, 100, 100, seed=0)
    with pytest.raises(ValueError):
        bf.delta_monte_carlo(lambda rng, size: np.full(size, math.nan), 1, 10_000, 10, seed=0)


def test_mc_is_reproducible():
    a = bf.delta_monte_carlo(bf.uniform_log_sampler(10), 1, 100_000, 50, seed=42)
    b = bf.delta_monte_carlo(bf.uniform_log_sampler(10), 1, 100_000, 50, seed=42)
    assert a.value == b.value


def test_mc_error_shrinks_like_root_samples():
    # fixed seeds; mean absolute error across seeds should roughly halve
    # per quadrupling of the sample count
    f = bf.uniform_log_density(10)
    truth = bf.delta_numeric(f, 1).value
    sampler = bf.uniform_log_sampler(10)

    def mean_err(samples):
        errs = [
            abs(bf.delta_monte_carlo(sampler, 1, samples, 50, seed=s).value - truth)
            for s in range(8)
        ]
        return sum(errs) / len(errs)

    e1 = mean_err(10_000)
    e4 = mean_err(40_000)
    e16 = mean_err(160_000)
    assert e4 < 0.85 * e1
    assert e16 < 0.6 * e1


def test_inverse_cdf_sampler_matches_masses():
    rng = np.random.default_rng(123)
    f = bf.normalized(
        (
            bf.const_segment(0.0, 1.0, 0.25),
            bf.linear_segment(1.0, 2.0, 0.5, -0.25),  # 0.25 -> 0.75 over [1, 2]
            bf.exp_segment(2.0, 3.0, 0.25 / math.exp(2.0), 1.0),
        )
    )
    sampler = inverse_cdf_sampler(f)
    draws = sampler(rng, 200_000)
    edges = np.linspace(0.0, 3.0, 13)
    hist, _ = np.histogram(draws, bins=edges)
    for lo, hi, count in zip(edges[:-1], edges[1:], hist):
        want = sum(seg.mass(lo, hi) for seg in f.segments)
        got = count / len(draws)
        assert got == pytest.approx(want, abs=4e-3)


# ---------------------------------------------------------------------------
# averaging inequality harness
# ---------------------------------------------------------------------------


def test_averaging_two_valued_equality_witness():
    a, b, c, d = 0.0, 1.0, 0.5, 2.5
    mid = 0.5

    def two_valued(x):
        return np.where(np.asarray(x, dtype=float) < mid, c, d)

    cfg = QuadratureConfig(breakpoints=(mid,))
    residual, y, err = averaging_residual(two_valued, a, b, cfg)
    assert y == pytest.approx(0.5 * (c + d), abs=1e-13)
    assert residual == pytest.approx((b - a) * (d - c) / 2.0, abs=1e-12)
    assert bf.check_averaging_inequality(two_valued, a, b, c, d, False, cfg)


def test_averaging_straight_line_equality_witness():
    a, b, c, d = -1.0, 3.0, 0.25, 1.75

    def line(x):
        return c + (d - c) * (np.asarray(x, dtype=float) - a) / (b - a)

    residual, y, err = averaging_residual(line, a, b)
    assert residual == pytest.approx((b - a) * (d - c) / 4.0, abs=1e-12)
    assert bf.check_averaging_inequality(line, a, b, c, d, True)


def test_averaging_constant_is_zero():
    residual, y, _ = averaging_residual(lambda x: np.full(np.shape(x), 1.3), 0.0, 2.0)
    assert residual == pytest.approx(0.0, abs=1e-13)


def test_averaging_quarter_constant_fails_for_power_law():
    # the quarter constant is not universal over monotone convex functions:
    # x**2 on [0, 1] has mean absolute deviation 4/(9*sqrt(3)) > 1/4, and the
    # checker reports that honestly
    def square(x):
        return np.asarray(x, dtype=float) ** 2

    residual, y, _ = averaging_residual(square, 0.0, 1.0)
    assert y == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert residual == pytest.approx(4.0 / (9.0 * math.sqrt(3.0)), abs=1e-12)
    assert not bf.check_averaging_inequality(square, 0.0, 1.0, 0.0, 1.0, True)
    # the general half constant still covers it
    assert bf.check_averaging_inequality(square, 0.0, 1.0, 0.0, 1.0, False)


def test_averaging_unequal_measures_stay_below_half():
    # two values on unequal shares never reach the general constant
    def lopsided(x):
        return np.where(np.asarray(x, dtype=float) < 0.25, 0.0, 1.0)

    cfg = QuadratureConfig(breakpoints=(0.25,))
    residual, _, _ = averaging_residual(lopsided, 0.0, 1.0, cfg)
    assert residual == pytest.approx(2.0 * 0.25 * 0.75, abs=1e-12)
    assert residual < 0.5
