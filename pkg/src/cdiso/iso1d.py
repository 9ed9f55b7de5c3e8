"""The 1-D isoperimetric problem for a fixed density.

``profile_structured`` minimizes boundary content over the four candidate
families that contain the minimizer for concave-type densities (half-lines,
interior intervals, complements of interior intervals), with the volume
constraint resolved by CDF inversion and the free endpoint optimized by
golden-section search.  ``profile_bruteforce`` is the independent oracle:
exhaustive enumeration of grid-aligned unions of at most two intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .density1d import Density1D, IntervalSet, minkowski_content, measure
from .errors import DomainError, ResourceBudgetError

__all__ = ["IsoResult", "profile_structured", "profile_bruteforce"]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

GOLDEN_ITERS = 60
CDF_XTOL = 1e-10


@dataclass(frozen=True)
class IsoResult:
    v: float
    value: float
    minimizer: IntervalSet
    method: str


def _golden(f: Callable[[float], float], lo: float, hi: float,
            iters: int = GOLDEN_ITERS, n_coarse: int = 33) -> tuple[float, float]:
    """Coarse scan followed by golden-section refinement; returns (x, f(x))."""
    if hi <= lo:
        return lo, f(lo)
    xs = np.linspace(lo, hi, n_coarse)
    ys = [f(x) for x in xs]
    k = int(np.argmin(ys))
    best_x, best_y = float(xs[k]), float(ys[k])
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, n_coarse - 1)]
    h = b - a
    if h <= 0:
        return best_x, best_y
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(iters):
        if yc < yd:
            b, d, yd = d, c, yc
            h = _INV_PHI * h
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = _INV_PHI * h
            d = a + _INV_PHI * h
            yd = f(d)
    for x, y in ((c, yc), (d, yd)):
        if y < best_y:
            best_x, best_y = float(x), float(y)
    return best_x, best_y


def _content_interval(d: Density1D, l: float, r: float) -> float:
    """h(l) + h(r), skipping boundary points at the domain endpoints."""
    slack = 1e-12 * max(1.0, d.b - d.a)
    total = 0.0
    if l > d.a + slack:
        total += float(d.eval(l))
    if r < d.b - slack:
        total += float(d.eval(r))
    return total


def profile_structured(d: Density1D, v: float) -> IsoResult:
    """Minimal Minkowski content among half-lines, interior intervals and
    their complements at volume v."""
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if v <= 0.0:
        return IsoResult(v, 0.0, IntervalSet.empty(), "halfline_left")
    if v >= 1.0:
        return IsoResult(v, 0.0, IntervalSet.of((d.a, d.b)), "halfline_left")

    candidates: list[IsoResult] = []

    # half-line families: endpoint determined by the volume constraint
    r = d.invert_cdf(v, CDF_XTOL)
    candidates.append(IsoResult(v, _content_interval(d, d.a, r),
                                IntervalSet.of((d.a, r)), "halfline_left"))
    l = d.invert_cdf(1.0 - v, CDF_XTOL)
    candidates.append(IsoResult(v, _content_interval(d, l, d.b),
                                IntervalSet.of((l, d.b)), "halfline_right"))

    # interior interval [l, r(l)] with measure v, free endpoint l
    l_max = d.invert_cdf(1.0 - v, CDF_XTOL)
    if l_max > d.a:
        def interior(lv: float) -> float:
            rv = d.invert_cdf(float(d.cdf(lv)) + v, CDF_XTOL)
            return _content_interval(d, lv, rv)

        lb, _ = _golden(interior, d.a, l_max, n_coarse=17)
        rb = d.invert_cdf(float(d.cdf(lb)) + v, CDF_XTOL)
        candidates.append(IsoResult(v, _content_interval(d, lb, rb),
                                    IntervalSet.of((lb, rb)), "interior_interval"))

    # complement of an interior interval: [a, l] u [r, b], gap measure 1 - v
    l_max_c = d.invert_cdf(v, CDF_XTOL)
    if l_max_c > d.a:
        def complement(lv: float) -> float:
            rv = d.invert_cdf(float(d.cdf(lv)) + (1.0 - v), CDF_XTOL)
            return _content_interval(d, lv, rv)

        lb, _ = _golden(complement, d.a, l_max_c, n_coarse=17)
        rb = d.invert_cdf(float(d.cdf(lb)) + (1.0 - v), CDF_XTOL)
        comps = []
        span = d.b - d.a
        if lb - d.a > 1e-12 * span:
            comps.append((d.a, lb))
        if d.b - rb > 1e-12 * span:
            comps.append((rb, d.b))
        if comps:
            candidates.append(IsoResult(v, _content_interval(d, lb, rb),
                                        IntervalSet.of(*comps), "complement"))

    return min(candidates, key=lambda res: res.value)


def profile_bruteforce(
    d: Density1D,
    v: float,
    k_max: int = 2,
    grid_stride: int = 20,
    vol_tol: float = 1e-3,
    budget: int = 50_000_000,
) -> IsoResult:
    """Exhaustive oracle over unions of <= k_max grid-aligned intervals whose
    measure is within vol_tol of v.  Independent of the structured search."""
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if k_max > 2:
        raise DomainError("brute force supports k_max <= 2")
    if v <= 0.0:
        return IsoResult(v, 0.0, IntervalSet.empty(), "bruteforce")
    if v >= 1.0:
        return IsoResult(v, 0.0, IntervalSet.of((d.a, d.b)), "bruteforce")

    nodes = np.unique(np.r_[d.grid[::grid_stride], d.grid[-1]])
    g = nodes.size
    F = np.array([float(d.cdf(t)) for t in nodes])
    h = d.eval(nodes)
    last = g - 1

    ii, jj = np.triu_indices(g, k=1)
    if ii.size * ii.size > budget:
        raise ResourceBudgetError(
            f"{ii.size} intervals -> {ii.size**2} pairs exceeds budget {budget}"
        )
    mu = F[jj] - F[ii]
    content = np.where(ii > 0, h[ii], 0.0) + np.where(jj < last, h[jj], 0.0)

    best_val = math.inf
    best_set: Optional[IntervalSet] = None

    # single intervals
    ok = np.abs(mu - v) <= vol_tol
    if ok.any():
        k = int(np.flatnonzero(ok)[np.argmin(content[ok])])
        best_val = float(content[k])
        best_set = IntervalSet.of((float(nodes[ii[k]]), float(nodes[jj[k]])))

    if k_max >= 2:
        order = np.argsort(mu)
        mu_s, c_s, i_s, j_s = mu[order], content[order], ii[order], jj[order]
        for a in range(ii.size):
            want = v - mu[a]
            if want < -vol_tol:
                continue
            lo = np.searchsorted(mu_s, want - vol_tol, side="left")
            hi = np.searchsorted(mu_s, want + vol_tol, side="right")
            if lo >= hi:
                continue
            sel = slice(lo, hi)
            disjoint = i_s[sel] > jj[a]  # second component strictly to the right
            if not disjoint.any():
                continue
            cand = c_s[sel][disjoint] + content[a]
            k = int(np.argmin(cand))
            if cand[k] < best_val:
                idx = np.flatnonzero(disjoint)[k]
                best_val = float(cand[k])
                best_set = IntervalSet.of(
                    (float(nodes[ii[a]]), float(nodes[jj[a]])),
                    (float(nodes[i_s[sel][disjoint][k]]), float(nodes[j_s[sel][disjoint][k]])),
                )

    if best_set is None:
        raise DomainError(f"no grid-aligned candidate within {vol_tol} of v={v}")
    return IsoResult(v, best_val, best_set, "bruteforce")
