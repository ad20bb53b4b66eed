"""Piecewise-smooth probability densities, folding modulo 1, and variation.

A density is a list of smooth segments with analyst-supplied shape flags
(monotonicity, convexity).  The flags are what let the variation and the
convexity-boosted bounds run on certified closed forms; "unknown" flags
degrade to grid estimation, which is reported as a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

MONOTONICITIES = ("increasing", "decreasing", "constant", "unknown")
CONVEXITIES = ("convex", "concave", "neither", "unknown")

# relative slack when deciding whether an endpoint sits exactly on an integer
_INT_SNAP_TOL = 1e-12
# a segment whose mass falls below this is identically zero for our purposes
_ZERO_MASS = 1e-15


class DensityError(ValueError):
    """Invalid density construction or a domain violation."""


def _eval_vec(fn, xs: np.ndarray) -> np.ndarray:
    """Evaluate fn on an array, tolerating scalar-only callables."""
    try:
        out = np.asarray(fn(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(x)) for x in xs], dtype=float)


def _quad(fn, a: float, b: float) -> float:
    # plumbing fallback for segments without a closed-form antiderivative
    from scipy.integrate import quad

    val, _ = quad(fn, a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def _snap_int(x: float) -> int | None:
    r = round(x)
    if abs(x - r) <= _INT_SNAP_TOL * max(1.0, abs(x)):
        return int(r)
    return None


def _floor_snapped(x: float) -> int:
    r = _snap_int(x)
    return r if r is not None else math.floor(x)


def _ceil_snapped(x: float) -> int:
    r = _snap_int(x)
    return r if r is not None else math.ceil(x)


def significand(x: float, b: float = 10.0) -> float:
    """Significand of x in base b: the r in [1, b) with x = r * b**k, k integer.

    Computed as x * b**(-floor(log_b x)) with an explicit correction step,
    since the log can land within an ulp of an integer and push r outside
    [1, b).
    """
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x > 0):
        raise DensityError(f"significand requires x > 0, got {x!r}")
    if not (isinstance(b, (int, float)) and math.isfinite(b) and b > 1):
        raise DensityError(f"significand requires base b > 1, got {b!r}")
    x = float(x)
    b = float(b)
    k = math.floor(math.log(x) / math.log(b))
    r = _pow_scale(x, b, -k)
    # correct ulp-level misses of the floor
    while r >= b:
        r /= b
    while r < 1.0:
        r *= b
    return r


def _pow_scale(x: float, b: float, k: int) -> float:
    # x * b**k in two steps so b**k alone cannot overflow or go subnormal
    if k == 0:
        return x
    h = k // 2
    return (x * b**h) * b ** (k - h)


@dataclass(frozen=True)
class Segment:
    """One smooth piece of a density on [lo, hi].

    fn evaluates the density (vectorized over numpy arrays).  integral, when
    present, is the exact antiderivative as a (a, b) -> value callable and
    must agree with quadrature of fn.  The shape flags certify behaviour the
    variation and bound code is allowed to rely on.
    """

    lo: float
    hi: float
    fn: Callable
    monotonicity: str = "unknown"
    convexity: str = "unknown"
    integral: Callable[[float, float], float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DensityError("segment endpoints must be finite")
        if not self.lo < self.hi:
            raise DensityError(f"segment needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.monotonicity not in MONOTONICITIES:
            raise DensityError(f"unknown monotonicity flag {self.monotonicity!r}")
        if self.convexity not in CONVEXITIES:
            raise DensityError(f"unknown convexity flag {self.convexity!r}")
        xs = np.linspace(self.lo, self.hi, 17)
        ys = _eval_vec(self.fn, xs)
        if not np.all(np.isfinite(ys)):
            raise DensityError("segment evaluates to a non-finite value")
        if np.any(ys < -1e-12):
            raise DensityError("segment evaluates negative; densities are nonnegative")

    def __call__(self, x):
        return self.fn(x)

    def mass(self, a: float | None = None, b: float | None = None) -> float:
        """Integral of the segment over [a, b] (defaults to the whole piece)."""
        a = self.lo if a is None else max(a, self.lo)
        b = self.hi if b is None else min(b, self.hi)
        if b <= a:
            return 0.0
        if self.integral is not None:
            return float(self.integral(a, b))
        return _quad(self.fn, a, b)


@dataclass(frozen=True)
class PiecewiseDensity:
    """A probability density given as ordered, non-overlapping segments.

    Total mass must be 1 within total_mass_tolerance.  Segments that carry
    no mass are dropped at construction; an identically-zero input is
    rejected.  Instances are immutable and safe to share across threads.
    """

    segments: tuple[Segment, ...]
    total_mass_tolerance: float = 1e-10

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise DensityError("density needs at least one segment")
        for left, right in zip(segs, segs[1:]):
            if right.lo < left.hi - 1e-12:
                raise DensityError(
                    f"segments overlap: [{left.lo}, {left.hi}] and [{right.lo}, {right.hi}]"
                )
        masses = tuple(seg.mass() for seg in segs)
        keep = tuple(s for s, m in zip(segs, masses) if m > _ZERO_MASS)
        if not keep:
            raise DensityError("density is identically zero")
        kept_masses = tuple(m for m in masses if m > _ZERO_MASS)
        total = math.fsum(kept_masses)
        if abs(total - 1.0) > self.total_mass_tolerance:
            raise DensityError(
                f"density mass is {total!r}, not 1 within {self.total_mass_tolerance}"
            )
        object.__setattr__(self, "segments", keep)
        object.__setattr__(self, "_masses", kept_masses)

    @property
    def segment_masses(self) -> tuple[float, ...]:
        return self._masses

    def support(self) -> tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    def delineated_interval(self) -> tuple[int, int]:
        """Smallest integer-endpoint interval (n, m) containing the support."""
        s_lo, s_hi = self.support()
        return _floor_snapped(s_lo), _ceil_snapped(s_hi)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        pts = np.atleast_1d(xs)
        out = np.zeros(pts.shape, dtype=float)
        last = len(self.segments) - 1
        for i, seg in enumerate(self.segments):
            # half-open ownership; the global supremum belongs to its segment
            if i == last:
                m = (pts >= seg.lo) & (pts <= seg.hi)
            else:
                m = (pts >= seg.lo) & (pts < seg.hi)
            if m.any():
                out[m] = _eval_vec(seg.fn, pts[m])
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class FoldedDensity:
    """Density of X mod 1 on [0, 1), as a sum of integer translates.

    truncation_mass is the mass of translates that were dropped; it is 0 for
    the compact supports this representation can express.
    """

    fn: Callable
    truncation_mass: float = 0.0

    def __call__(self, t):
        return self.fn(t)


def fold_mod1(f: PiecewiseDensity, tail_epsilon: float = 1e-12) -> FoldedDensity:
    """Fold f modulo 1: eval(t) = sum over integers k of f(t + k).

    Every segment has finite endpoints, so the translate set is enumerated
    exactly and nothing is truncated.  tail_epsilon is validated for
    interface stability but never exercised here.
    """
    if not tail_epsilon > 0:
        raise DensityError("tail_epsilon must be positive")
    pieces = []
    last = len(f.segments) - 1
    for i, seg in enumerate(f.segments):
        k_lo = _floor_snapped(seg.lo)
        k_hi = _ceil_snapped(seg.hi)
        ks = np.arange(k_lo, max(k_hi, k_lo + 1), dtype=float)
        pieces.append((seg, ks, i == last))

    def fn(t):
        ts = np.asarray(t, dtype=float)
        scalar = ts.ndim == 0
        tt = np.atleast_1d(ts)
        out = np.zeros(tt.shape, dtype=float)
        for seg, ks, is_last in pieces:
            pts = tt[None, :] + ks[:, None]
            if is_last:
                m = (pts >= seg.lo) & (pts <= seg.hi)
            else:
                m = (pts >= seg.lo) & (pts < seg.hi)
            if m.any():
                vals = np.zeros(pts.shape, dtype=float)
                vals[m] = _eval_vec(seg.fn, pts[m])
                out += vals.sum(axis=0)
        return float(out[0]) if scalar else out

    return FoldedDensity(fn=fn, truncation_mass=0.0)


def scale_density(f: PiecewiseDensity, n: float) -> PiecewiseDensity:
    """Density of n*X: x -> f(x/n)/n, support stretched by n, flags preserved."""
    if not (isinstance(n, (int, float)) and math.isfinite(n) and n > 0):
        raise DensityError(f"scale factor must be positive, got {n!r}")
    n = float(n)
    segs = tuple(
        Segment(
            lo=seg.lo * n,
            hi=seg.hi * n,
            fn=_scaled_fn(seg.fn, n),
            monotonicity=seg.monotonicity,
            convexity=seg.convexity,
            integral=_scaled_integral(seg.integral, n),
        )
        for seg in f.segments
    )
    return PiecewiseDensity(segs, f.total_mass_tolerance)


def _scaled_fn(fn, n):
    def g(x):
        return np.asarray(fn(np.asarray(x, dtype=float) / n), dtype=float) / n

    return g


def _scaled_integral(integral, n):
    if integral is None:
        return None

    def g(a, b):
        return integral(a / n, b / n)

    return g


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------


def grid_variation(fn, lo: float, hi: float, points: int = 1025) -> float:
    """Sum of |f(x_{i+1}) - f(x_i)| on a uniform grid.

    A lower bound on the variation over [lo, hi]; refining the grid (nested
    dyadic point counts) makes it nondecreasing and convergent from below.
    """
    xs = np.linspace(lo, hi, points)
    ys = _eval_vec(fn, xs)
    return float(np.abs(np.diff(ys)).sum())


def _grid_variation_refined(fn, lo, hi, tol=1e-10, start=129, cap=32769):
    est = grid_variation(fn, lo, hi, start)
    pts = start
    while pts < cap:
        pts = 2 * pts - 1
        nxt = grid_variation(fn, lo, hi, pts)
        if abs(nxt - est) < max(tol, 1e-12 * abs(nxt)):
            return nxt
        est = nxt
    return est


def _piece_list(f: PiecewiseDensity):
    """Segments plus the zero gaps between them, in order."""
    pieces = []
    prev_hi = None
    for seg in f.segments:
        if prev_hi is not None and seg.lo > prev_hi + 1e-12:
            pieces.append((None, prev_hi, seg.lo))
        pieces.append((seg, seg.lo, seg.hi))
        prev_hi = seg.hi
    return pieces


def _variation_core(f: PiecewiseDensity):
    """Variation over the support span, plus the one-sided boundary values.

    Returns (interior_total, certified, v_left, v_right).  interior_total
    counts monotone-piece rises and interior jumps, including jumps onto and
    off zero gaps; it excludes the jumps at the two support endpoints, which
    the callers add or not depending on the variation notion.
    """
    pieces = _piece_list(f)
    endpoint_vals = []
    total = 0.0
    certified = True
    for seg, lo, hi in pieces:
        if seg is None:
            endpoint_vals.append((0.0, 0.0))
            continue
        v_lo = float(np.asarray(seg.fn(lo), dtype=float))
        v_hi = float(np.asarray(seg.fn(hi), dtype=float))
        if not (math.isfinite(v_lo) and math.isfinite(v_hi)):
            return math.inf, False, math.inf, math.inf
        endpoint_vals.append((v_lo, v_hi))
        if seg.monotonicity in ("increasing", "decreasing", "constant"):
            total += abs(v_hi - v_lo)
        else:
            total += _grid_variation_refined(seg.fn, lo, hi)
            certified = False
    for i in range(len(pieces) - 1):
        total += abs(endpoint_vals[i + 1][0] - endpoint_vals[i][1])
    return total, certified, endpoint_vals[0][0], endpoint_vals[-1][1]


def variation_is_certified(f: PiecewiseDensity) -> bool:
    """True when every segment's monotonicity flag lets variation be exact."""
    return all(seg.monotonicity != "unknown" for seg in f.segments)


def tv_integer_delineated(f: PiecewiseDensity) -> float:
    """Variation of f over the open minimal integer-delineated interval.

    Jumps strictly inside the interval count; jumps to zero exactly at the
    integer endpoints do not (so the uniform density on [0, 1) has value 0).
    """
    core, _, v_left, v_right = _variation_core(f)
    if not math.isfinite(core):
        return math.inf
    s_lo, s_hi = f.support()
    total = core
    if _snap_int(s_lo) is None:  # support starts strictly inside (n, n+1)
        total += v_left
    if _snap_int(s_hi) is None:
        total += v_right
    return total


def tv_full_line(f: PiecewiseDensity) -> float:
    """Variation of f over the whole line, counting both support-edge jumps."""
    core, _, v_left, v_right = _variation_core(f)
    if not math.isfinite(core):
        return math.inf
    return core + v_left + v_right


# ---------------------------------------------------------------------------
# segment builders and stock densities
# ---------------------------------------------------------------------------


def const_segment(lo: float, hi: float, value: float) -> Segment:
    if value < 0:
        raise DensityError("constant segment needs a nonnegative value")
    v = float(value)

    def fn(x):
        return np.full(np.shape(np.asarray(x, dtype=float)), v)

    def integral(a, b):
        return v * (b - a)

    return Segment(lo, hi, fn, "constant", "convex", integral)


def linear_segment(lo: float, hi: float, slope: float, intercept: float) -> Segment:
    """Affine piece slope*x + intercept; affine counts as convex."""
    s, c = float(slope), float(intercept)
    mono = "increasing" if s > 0 else ("decreasing" if s < 0 else "constant")

    def fn(x):
        return s * np.asarray(x, dtype=float) + c

    def integral(a, b):
        return 0.5 * s * (b * b - a * a) + c * (b - a)

    return Segment(lo, hi, fn, mono, "convex", integral)


def exp_segment(lo: float, hi: float, amp: float, rate: float) -> Segment:
    """Exponential piece amp * e**(rate*x); convex for amp > 0."""
    a_, r = float(amp), float(rate)
    if a_ <= 0:
        raise DensityError("exponential segment needs amp > 0")
    if r == 0.0:
        return const_segment(lo, hi, a_)
    mono = "increasing" if r > 0 else "decreasing"

    def fn(x):
        return a_ * np.exp(r * np.asarray(x, dtype=float))

    def integral(p, q):
        return (a_ / r) * (math.exp(r * q) - math.exp(r * p))

    return Segment(lo, hi, fn, mono, "convex", integral)


def uniform_density(lo: float, hi: float) -> PiecewiseDensity:
    if not hi > lo:
        raise DensityError("uniform density needs hi > lo")
    return PiecewiseDensity((const_segment(lo, hi, 1.0 / (hi - lo)),))


def uniform_log_density(b: float) -> PiecewiseDensity:
    """Density of log_b(U[1, b]): (ln b / (b - 1)) * b**x on [0, 1].

    Increasing and convex; this is the stock input for the closed-form
    distance and both closed-form bounds.
    """
    if not (math.isfinite(b) and b > 1):
        raise DensityError(f"base must satisfy b > 1, got {b!r}")
    lnb = math.log(b)
    return PiecewiseDensity((exp_segment(0.0, 1.0, lnb / (b - 1.0), lnb),))


def triangular_density(lo: float, peak: float, hi: float) -> PiecewiseDensity:
    if not lo < peak < hi:
        raise DensityError("triangular density needs lo < peak < hi")
    h = 2.0 / (hi - lo)
    up = h / (peak - lo)
    down = -h / (hi - peak)
    return PiecewiseDensity(
        (
            linear_segment(lo, peak, up, -up * lo),
            linear_segment(peak, hi, down, -down * hi),
        )
    )


def normalized(segments, total_mass_tolerance: float = 1e-10) -> PiecewiseDensity:
    """Scale segment amplitudes by a common factor so the total mass is 1."""
    segs = tuple(segments)
    if not segs:
        raise DensityError("density needs at least one segment")
    total = math.fsum(seg.mass() for seg in segs)
    if not (math.isfinite(total) and total > 0):
        raise DensityError(f"cannot normalize segments with total mass {total!r}")
    scaled = tuple(_scaled_amplitude(seg, 1.0 / total) for seg in segs)
    return PiecewiseDensity(scaled, total_mass_tolerance)


def _scaled_amplitude(seg: Segment, c: float) -> Segment:
    fn = seg.fn

    def scaled_fn(x):
        return c * np.asarray(fn(x), dtype=float)

    integral = seg.integral
    scaled_integral = None
    if integral is not None:

        def scaled_integral(a, b):
            return c * integral(a, b)

    return Segment(seg.lo, seg.hi, scaled_fn, seg.monotonicity, seg.convexity, scaled_integral)
