"""Independent numerical ground truth for the distance to uniform.

Everything here is self-contained on purpose: the quadrature is a
hand-rolled adaptive Simpson scheme and roots come from plain bisection, so
the oracle shares no code path with the closed forms and library-backed
integrals it is used to check.

The L1 integrand |f_n - 1| is non-smooth exactly at the fold images of
segment endpoints and at crossings of 1, so both are located first and
forced as breakpoints; integrating an absolute value adaptively across a
kink or a crossing wastes depth and ruins the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    FoldedDensity,
    PiecewiseDensity,
    _eval_vec,
    _floor_snapped,
    _snap_int,
    fold_mod1,
    scale_density,
)

# relative inset used for endpoint evaluations, so one-sided limits are
# sampled instead of the other piece's value at a shared breakpoint
_EDGE_INSET = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to meet its tolerance.

    Carries the partial value and the accumulated error estimate.
    """

    def __init__(self, message, partial_value=float("nan"), error_estimate=float("inf")):
        super().__init__(message)
        self.partial_value = partial_value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_depth: int = 60
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))


@dataclass(frozen=True)
class OracleResult:
    value: float
    error_estimate: float
    method: str  # quadrature_L1 | crossing_point | monte_carlo
    detail: str = ""


def _make_batch_eval(fn):
    """Evaluate fn over arrays, probing once whether it vectorizes."""
    state = {"vec": None}

    def evalf(xs):
        if state["vec"] is None:
            try:
                out = np.asarray(fn(xs), dtype=float)
                if out.shape == xs.shape:
                    state["vec"] = True
                    return out
            except (TypeError, ValueError):
                pass
            state["vec"] = False
        if state["vec"]:
            return np.asarray(fn(xs), dtype=float)
        return np.array([float(fn(x)) for x in xs], dtype=float)

    return evalf


def adaptive_simpson(
    fn,
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    max_depth: int = 60,
    max_intervals: int = 1 << 20,
):
    """Integrate fn over [a, b] with a level-synchronous adaptive Simpson rule.

    All intervals pending at a given depth are refined with a single batched
    evaluation, so vectorized integrands run at numpy speed.  Accepted
    intervals use Richardson extrapolation of the two Simpson estimates.
    Endpoint samples are taken a hair inside the interval so breakpoints can
    sit exactly on jump discontinuities.

    Returns (value, error_estimate).  Raises QuadratureError if intervals hit
    max_depth with more unresolved error than abs_tol, or if an unattainable
    tolerance makes the active set outgrow max_intervals.
    """
    if b <= a:
        return 0.0, 0.0
    evalf = _make_batch_eval(fn)
    eta = _EDGE_INSET * (b - a)
    mid = 0.5 * (a + b)
    f3 = evalf(np.array([a + eta, mid, b - eta]))
    lo = np.array([a])
    hi = np.array([b])
    flo = f3[:1]
    fmid = f3[1:2]
    fhi = f3[2:]
    s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    tol = np.array([abs_tol])
    total = 0.0
    err_total = 0.0
    unresolved = 0.0
    for depth in range(max_depth + 1):
        mids = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mids)
        rmid = 0.5 * (mids + hi)
        fnew = evalf(np.concatenate([lmid, rmid]))
        flm = fnew[: len(lo)]
        frm = fnew[len(lo):]
        s_left = (mids - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        s_right = (hi - mids) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = (s_left + s_right - s) / 15.0
        done = np.abs(err) <= tol
        if depth == max_depth:
            done = np.ones_like(done)
            unresolved += float(np.abs(err[np.abs(err) > tol]).sum())
        if done.any():
            total += float((s_left[done] + s_right[done] + err[done]).sum())
            err_total += float(np.abs(err[done]).sum())
        keep = ~done
        if not keep.any():
            break
        if 2 * int(keep.sum()) > max_intervals:
            partial = total + float(s[keep].sum())
            raise QuadratureError(
                f"tolerance {abs_tol:g} unattainable: active subdivision count "
                f"exceeded {max_intervals}",
                partial_value=partial,
                error_estimate=err_total + float(np.abs(err[keep]).sum()),
            )
        lo = np.concatenate([lo[keep], mids[keep]])
        hi = np.concatenate([mids[keep], hi[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        fmid = np.concatenate([flm[keep], frm[keep]])
        s = np.concatenate([s_left[keep], s_right[keep]])
        tol = np.concatenate([tol[keep] / 2.0, tol[keep] / 2.0])
    if unresolved > abs_tol:
        raise QuadratureError(
            f"quadrature did not converge within depth {max_depth}",
            partial_value=total,
            error_estimate=err_total + unresolved,
        )
    return total, err_total + unresolved


def integrate(fn, a: float, b: float, cfg: QuadratureConfig | None = None):
    """Adaptive Simpson over [a, b] split at the config's forced breakpoints."""
    cfg = cfg or QuadratureConfig()
    if b <= a:
        return 0.0, 0.0
    pts = sorted({a, b, *(p for p in cfg.breakpoints if a < p < b)})
    total = 0.0
    err = 0.0
    share = cfg.abs_tol / (len(pts) - 1)
    for p, q in zip(pts, pts[1:]):
        v, e = adaptive_simpson(fn, p, q, share, cfg.max_depth)
        total += v
        err += e
    return total, err


def bisect_root(fn, a: float, b: float, iterations: int = 80) -> float:
    """Plain bisection for a sign change of fn on [a, b]."""
    fa = float(fn(a))
    fb = float(fn(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("bisection needs a sign change")
    for _ in range(iterations):
        m = 0.5 * (a + b)
        fm = float(fn(m))
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _find_crossings(fn, a: float, b: float, scan_points: int = 65):
    """Roots of fn between a and b, located by grid scan plus bisection."""
    span = b - a
    if span <= 0:
        return []
    xs = np.linspace(a + _EDGE_INSET * span, b - _EDGE_INSET * span, scan_points)
    ys = _eval_vec(fn, xs)
    roots = []
    for i in range(len(xs) - 1):
        y0, y1 = ys[i], ys[i + 1]
        if y0 == 0.0:
            roots.append(float(xs[i]))
        elif y0 * y1 < 0:
            roots.append(bisect_root(fn, float(xs[i]), float(xs[i + 1])))
    if ys[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def _fold_kinks(f: PiecewiseDensity):
    """Images in (0, 1) of segment endpoints under folding; fn is non-smooth there."""
    kinks = set()
    for seg in f.segments:
        for e in (seg.lo, seg.hi):
            t = e - _floor_snapped(e)
            if _snap_int(t) is None and 0.0 < t < 1.0:
                kinks.add(t)
    return sorted(kinks)


def _abs_deviation_from_one(folded, pieces, abs_tol, max_depth):
    """Integral of |fn - 1| over [0, 1] split at pieces, signs resolved per piece."""

    def g(t):
        return np.asarray(folded(t), dtype=float) - 1.0

    bounds = [0.0]
    for p, q in zip(pieces, pieces[1:]):
        bounds.extend(_find_crossings(g, p, q))
        bounds.append(q)
    bounds = sorted(set(bounds))
    value = 0.0
    err = 0.0
    share = abs_tol / max(1, len(bounds) - 1)
    for p, q in zip(bounds, bounds[1:]):
        v, e = adaptive_simpson(g, p, q, share, max_depth)
        value += abs(v)
        err += e
    return value, err, len(bounds) - 1


def delta_numeric(
    f: PiecewiseDensity, n: int, cfg: QuadratureConfig | None = None
) -> OracleResult:
    """Distance of n*X mod 1 from uniform, by direct L1 quadrature.

    Folds the scaled density, forces breakpoints at the fold images of
    segment endpoints, splits again at crossings of 1 found by bisection,
    and integrates |f_n - 1| piece by piece with signs resolved.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    cfg = cfg or QuadratureConfig()
    scaled = scale_density(f, float(n))
    folded = fold_mod1(scaled)
    kinks = _fold_kinks(scaled)
    pieces = sorted({0.0, 1.0, *kinks, *(p for p in cfg.breakpoints if 0.0 < p < 1.0)})
    value, err, n_pieces = _abs_deviation_from_one(
        folded, pieces, cfg.abs_tol, cfg.max_depth
    )
    return OracleResult(
        value=0.5 * value,
        error_estimate=0.5 * err + folded.truncation_mass,
        method="quadrature_L1",
        detail=(
            f"adaptive Simpson, n={n}, {n_pieces} sign-resolved pieces, "
            f"{len(kinks)} fold kinks, abs_tol={cfg.abs_tol:g}"
        ),
    )


def delta_crossing_unimodal(
    folded: FoldedDensity, cfg: QuadratureConfig | None = None
) -> OracleResult:
    """Distance to uniform for a strictly monotone folded density.

    Locates the crossing point t0 where the density equals 1 by bisection,
    then returns |t0 - F(t0)| with F obtained by quadrature.  The caller
    certifies monotonicity; a density that never crosses 1 is accepted only
    if it is flat at 1 everywhere.
    """
    cfg = cfg or QuadratureConfig()

    def g(t):
        return np.asarray(folded(t), dtype=float) - 1.0

    a = _EDGE_INSET
    b = 1.0 - _EDGE_INSET
    ga = float(g(a))
    gb = float(g(b))
    if ga * gb >= 0:
        # no strict sign change: a monotone density with unit mass must then
        # be flat at 1, otherwise the monotonicity certificate is wrong
        dev = float(np.max(np.abs(_eval_vec(g, np.linspace(a, b, 257)))))
        if dev < 1e-6:
            return OracleResult(
                value=0.0,
                error_estimate=dev + folded.truncation_mass,
                method="crossing_point",
                detail="no crossing of 1; density is uniform within grid tolerance",
            )
        raise ValueError(
            "folded density never crosses 1 but is not uniform; "
            "strict monotonicity hypothesis looks violated"
        )
    t0 = bisect_root(g, a, b)
    cdf_t0, err = integrate(folded, 0.0, t0, cfg)
    return OracleResult(
        value=abs(t0 - cdf_t0),
        error_estimate=err + folded.truncation_mass,
        method="crossing_point",
        detail=f"t0={t0:.15f}, cdf(t0)={cdf_t0:.15f}",
    )


def delta_monte_carlo(
    sampler, n: int, samples: int, bins: int, seed: int
) -> OracleResult:
    """Histogram estimate of the distance of n*X mod 1 from uniform.

    sampler(rng, size) must return `size` i.i.d. draws of X.  The value is
    half the L1 distance between the empirical histogram and the flat one;
    it is biased low (a histogram cannot see within-bin deviation), so it is
    a statistical sanity check, never an acceptance arbiter.
    """
    if not (samples >= 1 and bins >= 1):
        raise ValueError("samples and bins must be positive")
    if samples < bins * bins:
        raise ValueError(
            f"need samples >= bins**2 for a stable histogram ({samples} < {bins**2})"
        )
    rng = np.random.default_rng(seed)
    draws = np.asarray(sampler(rng, samples), dtype=float)
    if draws.shape != (samples,):
        raise ValueError("sampler must return a 1-d array of the requested size")
    if not np.all(np.isfinite(draws)):
        raise ValueError("sampler produced non-finite values")
    t = (n * draws) % 1.0
    counts, _ = np.histogram(t, bins=bins, range=(0.0, 1.0))
    value = 0.5 * float(np.abs(counts / samples - 1.0 / bins).sum())
    sigma = 0.5 * math.sqrt(bins / samples)
    return OracleResult(
        value=value,
        error_estimate=sigma,
        method="monte_carlo",
        detail=(
            f"seed={seed}, samples={samples}, bins={bins}; histogram distance "
            "estimates a lower bound of the true distance"
        ),
    )


def inverse_cdf_sampler(f: PiecewiseDensity):
    """Exact sampler for a piecewise density via per-segment inverse CDFs.

    Segments are chosen by mass, then inverted in closed form: constants
    uniformly, affine pieces by solving the quadratic CDF, exponentials by
    the log formula.  Anything else falls back to a fine numerical inverse.
    """
    masses = np.array(f.segment_masses)
    weights = masses / masses.sum()

    def sample(rng, size):
        out = np.empty(size, dtype=float)
        which = rng.choice(len(f.segments), size=size, p=weights)
        u = rng.random(size)
        for i, seg in enumerate(f.segments):
            m = which == i
            if not m.any():
                continue
            out[m] = _invert_segment(seg, masses[i], u[m])
        return out

    return sample


def _invert_segment(seg, mass, u):
    lo, hi = seg.lo, seg.hi
    v_lo = float(np.asarray(seg.fn(lo), dtype=float))
    v_hi = float(np.asarray(seg.fn(hi), dtype=float))
    width = hi - lo
    if abs(v_hi - v_lo) <= 1e-14 * max(1.0, abs(v_lo)):
        return lo + u * width
    mid = seg.mass(lo, lo + 0.5 * width)
    linear_mid = 0.5 * width * (v_lo + 0.5 * (v_hi - v_lo))
    if abs(mid - linear_mid) <= 1e-9 * max(mass, 1e-30):
        # affine: solve (v_lo + s*(x-lo)/2)*(x-lo) = u*mass for x-lo
        s = (v_hi - v_lo) / width
        disc = np.sqrt(v_lo * v_lo + 2.0 * s * u * mass)
        return lo + (disc - v_lo) / s
    if v_lo > 0 and v_hi > 0:
        r = math.log(v_hi / v_lo) / width
        amp = v_lo * math.exp(-r * lo)
        expected = (amp / r) * (math.exp(r * hi) - math.exp(r * lo))
        if abs(expected - mass) <= 1e-9 * max(mass, 1e-30):
            return np.log(np.exp(r * lo) + u * r * mass / amp) / r
    return _numeric_inverse(seg, mass, u)


def _numeric_inverse(seg, mass, u):
    xs = np.linspace(seg.lo, seg.hi, 4097)
    ys = _eval_vec(seg.fn, xs)
    cdf = np.concatenate([[0.0], np.cumsum((ys[1:] + ys[:-1]) * 0.5 * np.diff(xs))])
    cdf /= cdf[-1]
    return np.interp(u, cdf, xs)


def uniform_sampler(lo: float, hi: float):
    def sample(rng, size):
        return rng.uniform(lo, hi, size)

    return sample


def uniform_log_sampler(b: float):
    """Draws of log_b(U[1, b])."""
    lnb = math.log(b)

    def sample(rng, size):
        return np.log(rng.uniform(1.0, b, size)) / lnb

    return sample


def averaging_residual(fn, a: float, b: float, cfg: QuadratureConfig | None = None):
    """Mean value y of fn on [a, b] and the integral of |fn - y|.

    Returns (residual, y, error_estimate).  Crossings of the mean are
    located by bisection and the residual is assembled from sign-resolved
    pieces, so piecewise-constant and affine inputs come out exact.
    """
    cfg = cfg or QuadratureConfig()
    total, err_mean = integrate(fn, a, b, cfg)
    y = total / (b - a)

    def g(x):
        return np.asarray(fn(x), dtype=float) - y

    pts = sorted({a, b, *(p for p in cfg.breakpoints if a < p < b)})
    bounds = [a]
    for p, q in zip(pts, pts[1:]):
        bounds.extend(_find_crossings(g, p, q, scan_points=129))
        bounds.append(q)
    bounds = sorted(set(bounds))
    residual = 0.0
    err = err_mean
    share = cfg.abs_tol / max(1, len(bounds) - 1)
    for p, q in zip(bounds, bounds[1:]):
        v, e = adaptive_simpson(g, p, q, share, cfg.max_depth)
        residual += abs(v)
        err += e
    return residual, y, err


def check_averaging_inequality(
    fn,
    a: float,
    b: float,
    c: float,
    d: float,
    convex_monotone: bool,
    cfg: QuadratureConfig | None = None,
) -> bool:
    """Check the mean-deviation inequality for fn: [a, b] -> [c, d].

    The deviation integral of any such fn is at most (b-a)(d-c)/2, and at
    most (b-a)(d-c)/4 when fn is monotone and convex.  Used as a randomized
    property harness; equality holds for two-valued half-half functions and
    for straight lines respectively.
    """
    if not (b > a and d >= c):
        raise ValueError("need b > a and d >= c")
    cfg = cfg or QuadratureConfig()
    residual, _, err = averaging_residual(fn, a, b, cfg)
    limit = (b - a) * (d - c) / (4.0 if convex_monotone else 2.0)
    slack = max(1e-10, 10.0 * err)
    return residual <= limit + slack
