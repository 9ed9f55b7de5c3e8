"""Sharp comparison profiles built from 1-D Jacobian model densities.

``model_profile`` evaluates the comparison profile for curvature bound K,
dimension bound N and diameter bound D, either by the explicit four-case
dispatch (positive curvature windows of sin^(N-1), flat-space windows of
t^(N-1), negative-curvature sinh/exp/cosh families) or by the general
double infimum over the Jacobian family J(H, K, N) shifted by a window
offset.  Inner 1-D profiles are computed by :mod:`cdiso.iso1d` on
normalized window densities; outer infima use a coarse scan plus
golden-section refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .density1d import Density1D
from .errors import DomainError
from .iso1d import _golden, profile_structured

__all__ = [
    "ModelDensitySpec",
    "jacobian_density",
    "positive_part_window",
    "model_profile",
    "model_profile_detail",
    "profile_curve",
    "profile_curve_detailed",
    "case3_closed_form",
]

XI_CAP_SCALE = 50.0  # outer-shift truncation: Xi = 50 / sqrt(|K| + 1)
TAIL_FLAT_TOL = 1e-8
GRID_M = 2001


@dataclass(frozen=True)
class ModelDensitySpec:
    """One member of the Jacobian family restricted to a window."""

    H: float
    K: float
    N: float
    window: tuple[float, float]

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.window[1] <= self.window[0]:
            raise DomainError(f"empty window {self.window}")


def positive_part_window(H: float, K: float, N: float) -> tuple[float, float]:
    """Interval between the first nonpositive and first positive roots of
    g(t) = c_delta(t) + H/(N-1) s_delta(t); infinities when no root exists."""
    if N <= 1:
        raise DomainError("positive-part window needs N > 1")
    delta = K / (N - 1.0)
    if delta > 0.0:
        r = math.sqrt(delta)
        b = H / ((N - 1.0) * r)
        phi = math.atan2(b, 1.0)
        return ((phi - math.pi / 2.0) / r, (phi + math.pi / 2.0) / r)
    if delta == 0.0:
        if H > 0:
            return (-(N - 1.0) / H, math.inf)
        if H < 0:
            return (-math.inf, -(N - 1.0) / H)
        return (-math.inf, math.inf)
    r = math.sqrt(-delta)
    b = H / ((N - 1.0) * r)
    if abs(b) <= 1.0:
        return (-math.inf, math.inf)
    # (b-1)/(b+1) is positive for |b| > 1 regardless of sign
    x = 0.5 * math.log((b - 1.0) / (b + 1.0))
    if b > 1.0:
        return (x / r, math.inf)
    return (-math.inf, x / r)


def jacobian_density(spec: ModelDensitySpec, t) -> np.ndarray:
    """Pointwise value of the model Jacobian J(H, K, N) at t (vectorized)."""
    t = np.asarray(t, dtype=float)
    H, K, N = spec.H, spec.K, spec.N
    if N == 1:
        if K > 0:
            return (np.abs(t) < 1e-12).astype(float)
        return (H * t >= 0.0).astype(float)
    delta = K / (N - 1.0)
    lo, hi = positive_part_window(H, K, N)
    if delta > 0.0:
        r = math.sqrt(delta)
        sd, cd = np.sin(r * t) / r, np.cos(r * t)
    elif delta < 0.0:
        r = math.sqrt(-delta)
        sd, cd = np.sinh(r * t) / r, np.cosh(r * t)
    else:
        sd, cd = t, np.ones_like(t)
    g = cd + (H / (N - 1.0)) * sd
    return np.where((t >= lo) & (t <= hi), np.maximum(g, 0.0) ** (N - 1.0), 0.0)


# ----------------------------------------------------------------------
# window densities (cached across repeated profile evaluations)
# ----------------------------------------------------------------------


def _key(x: float) -> float:
    return round(float(x), 12)


@lru_cache(maxsize=512)
def _window_density(kind: str, K: float, N: float, lo: float, hi: float, m: int) -> Density1D:
    if kind == "sin":
        kap = math.sqrt(K / (N - 1.0))

        def fn(t):
            t = np.asarray(t, float)
            return np.maximum(np.sin(np.clip(kap * t, 0.0, math.pi)), 0.0) ** (N - 1.0)

    elif kind == "power":

        def fn(t):
            return np.maximum(np.asarray(t, float), 0.0) ** (N - 1.0)

    elif kind == "sinh":
        kap = math.sqrt(-K / (N - 1.0))

        def fn(t):
            return np.sinh(kap * np.maximum(np.asarray(t, float), 0.0)) ** (N - 1.0)

    elif kind == "cosh":
        kap = math.sqrt(-K / (N - 1.0))

        def fn(t):
            return np.cosh(kap * np.asarray(t, float)) ** (N - 1.0)

    elif kind == "exp":
        lam = math.sqrt(-K * (N - 1.0))

        def fn(t):
            return np.exp(lam * np.asarray(t, float))

    elif kind == "uniform":

        def fn(t):
            return np.ones_like(np.asarray(t, float))

    else:
        raise DomainError(f"unknown window kind {kind!r}")
    return Density1D.from_callable(fn, lo, hi, m, kind, (K, N))


@lru_cache(maxsize=512)
def _jacobian_window_density(H: float, K: float, N: float, lo: float, hi: float, m: int):
    """J(H, K, N) on [lo, hi] intersected with its positive-part window;
    returns None when the intersection carries no mass."""
    spec = ModelDensitySpec(H, K, N, (lo, hi))
    wlo, whi = positive_part_window(H, K, N)
    lo2, hi2 = max(lo, wlo), min(hi, whi)
    if hi2 - lo2 <= 1e-12:
        return None
    try:
        return Density1D.from_callable(
            lambda t: jacobian_density(spec, t), lo2, hi2, m, "jacobian", (H, K, N)
        )
    except DomainError:
        return None


def _window_profile(kind: str, K: float, N: float, lo: float, hi: float, v: float) -> float:
    d = _window_density(kind, _key(K), _key(N), _key(lo), _key(hi), GRID_M)
    return profile_structured(d, v).value


# ----------------------------------------------------------------------
# the model profile
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ModelProfileResult:
    value: float
    case: str
    argmin: dict


def _case_positive(K: float, N: float, D: float, v: float) -> ModelProfileResult:
    pi_delta = math.pi * math.sqrt((N - 1.0) / K)
    if D >= pi_delta:
        val = _window_profile("sin", K, N, 0.0, pi_delta, v)
        return ModelProfileResult(val, "case2", {"window": (0.0, pi_delta)})
    xi_max = pi_delta - D

    def f(xi: float) -> float:
        return _window_profile("sin", K, N, xi, xi + D, v)

    # reflection symmetry: xi and xi_max - xi give mirror densities
    xi_best, val = _golden(f, 0.0, 0.5 * xi_max + 1e-12, n_coarse=17, iters=40)
    return ModelProfileResult(val, "case1", {"xi": xi_best})


def _scan_then_golden(f, xi_values) -> tuple[float, float]:
    ys = [f(x) for x in xi_values]
    k = int(np.argmin(ys))
    lo = xi_values[max(k - 1, 0)]
    hi = xi_values[min(k + 1, len(xi_values) - 1)]
    x, y = _golden(f, lo, hi, n_coarse=9, iters=40)
    if ys[k] < y:
        return float(xi_values[k]), float(ys[k])
    return float(x), float(y)


def _xi_grid(xi_cap: float, n: int = 18) -> np.ndarray:
    pos = np.geomspace(1e-3, xi_cap, n - 1)
    return np.r_[0.0, pos]


def _case_zero(N: float, D: float, v: float) -> ModelProfileResult:
    xi_cap = XI_CAP_SCALE  # K = 0: Xi = 50 / sqrt(0 + 1)

    def f(xi: float) -> float:
        return _window_profile("power", 0.0, N, xi, xi + D, v)

    xi_best, val_win = _scan_then_golden(f, _xi_grid(xi_cap))
    tail_flat = abs(f(xi_cap) - f(xi_cap / 10.0)) < TAIL_FLAT_TOL
    val_flat = _window_profile("uniform", 0.0, N, 0.0, D, v)
    if val_flat <= val_win:
        return ModelProfileResult(val_flat, "case3", {"family": "flat", "tail_flat": tail_flat})
    return ModelProfileResult(
        val_win, "case3", {"family": "power_window", "xi": xi_best, "tail_flat": tail_flat}
    )


def _case_negative(K: float, N: float, D: float, v: float) -> ModelProfileResult:
    xi_cap = XI_CAP_SCALE / math.sqrt(abs(K) + 1.0)

    def f_sinh(xi: float) -> float:
        return _window_profile("sinh", K, N, xi, xi + D, v)

    def f_cosh(xi: float) -> float:
        return _window_profile("cosh", K, N, xi, xi + D, v)

    xi_s, val_s = _scan_then_golden(f_sinh, _xi_grid(xi_cap))
    val_e = _window_profile("exp", K, N, 0.0, D, v)
    # cosh is even: shifting below -D/2 mirrors a window already scanned
    cosh_grid = np.r_[np.linspace(-D / 2.0, 0.0, 7)[:-1], _xi_grid(xi_cap)]
    xi_c, val_c = _scan_then_golden(f_cosh, cosh_grid)

    best = min((val_s, "sinh_window", {"xi": xi_s}),
               (val_e, "exponential", {}),
               (val_c, "cosh_window", {"xi": xi_c}), key=lambda t: t[0])
    return ModelProfileResult(best[0], "case4", {"family": best[1], **best[2]})


def _dispatch(K: float, N: float, D: float, v: float) -> ModelProfileResult:
    if N == 1:
        if K > 0:
            return ModelProfileResult(math.inf, "n1_positive", {})
        if math.isinf(D):
            return ModelProfileResult(0.0, "trivial", {})
        return ModelProfileResult(1.0 / D, "n1_uniform", {})
    if K > 0:
        return _case_positive(K, N, D, v)
    if math.isinf(D):
        return ModelProfileResult(0.0, "trivial", {})
    if K == 0:
        return _case_zero(N, D, v)
    return _case_negative(K, N, D, v)


def _h_grid(n_per_side: int = 13) -> np.ndarray:
    pos = np.geomspace(1e-3, 1e3, n_per_side)
    return np.r_[-pos[::-1], 0.0, pos]


def _infimum_mode(K: float, N: float, D: float, v: float) -> ModelProfileResult:
    """Direct double infimum over (H, a): profile of J(H, K, N) on [-a, D-a]."""
    if N == 1:
        return _dispatch(K, N, D, v)

    def prof(H: float, a: float) -> float:
        d = _jacobian_window_density(_key(H), _key(K), _key(N), _key(-a), _key(D - a), GRID_M)
        if d is None:
            return math.inf
        return profile_structured(d, v).value

    a_grid = np.linspace(0.0, D, 11)
    best = (math.inf, 0.0, 0.0)
    for H in _h_grid():
        for a in a_grid:
            val = prof(H, a)
            if val < best[0]:
                best = (val, float(H), float(a))
    val, H0, a0 = best
    hs = _h_grid()
    for _ in range(3):  # coordinate refinement: a then H
        a_new, val_a = _golden(lambda a: prof(H0, a), max(a0 - D / 10, 0.0),
                               min(a0 + D / 10, D), n_coarse=9, iters=40)
        if val_a < val:
            val, a0 = val_a, a_new
        k = int(np.searchsorted(hs, H0))
        h_lo = hs[max(k - 2, 0)]
        h_hi = hs[min(k + 2, hs.size - 1)]
        H_new, val_h = _golden(lambda H: prof(H, a0), h_lo, h_hi, n_coarse=9, iters=40)
        if val_h < val:
            val, H0 = val_h, H_new
    return ModelProfileResult(val, "infimum", {"H": H0, "a": a0})


def model_profile_detail(K: float, N: float, D: float, v: float,
                         mode: str = "dispatch") -> ModelProfileResult:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if v in (0.0, 1.0):
        return ModelProfileResult(0.0, "endpoint", {})
    if mode == "dispatch":
        return _dispatch(K, N, D, v)
    if mode == "infimum":
        return _infimum_mode(K, N, D, v)
    raise DomainError(f"unknown mode {mode!r}")


def model_profile(K: float, N: float, D: float, v: float, mode: str = "dispatch") -> float:
    """The comparison profile value I(K, N, D)(v)."""
    return model_profile_detail(K, N, D, v, mode).value


def profile_curve(K: float, N: float, D: float, v_grid) -> list[tuple[float, float]]:
    return [(float(v), model_profile(K, N, D, float(v))) for v in v_grid]


def profile_curve_detailed(K: float, N: float, D: float, v_grid, mode: str = "dispatch",
                           threads: int = 1) -> list[tuple[float, ModelProfileResult]]:
    from .parallel import parallel_map

    vs = [float(v) for v in v_grid]
    recs = parallel_map(lambda v: model_profile_detail(K, N, D, v, mode), vs, threads)
    return list(zip(vs, recs))


def case3_closed_form(N: float, D: float, v: float, xi_cap: float = 1e5) -> float:
    """The printed flat-curvature formula:
    N/D * inf_{xi >= 0} (min(v,1-v)(xi+1)^N + max(v,1-v) xi^N)^((N-1)/N)
                        / ((xi+1)^N - xi^N)."""
    if v in (0.0, 1.0):
        return 0.0
    lo_v, hi_v = min(v, 1.0 - v), max(v, 1.0 - v)

    def g(xi: float) -> float:
        p = (xi + 1.0) ** N
        q = xi**N
        return (lo_v * p + hi_v * q) ** ((N - 1.0) / N) / (p - q)

    grid = np.r_[0.0, np.geomspace(1e-6, xi_cap, 400)]
    xi, val = _scan_then_golden(g, grid)
    # the xi -> inf limit equals 1/N (flat density); keep whichever is lower
    val = min(val, 1.0 / N)
    return N / D * val
