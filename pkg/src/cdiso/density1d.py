"""Probability densities on a closed interval.

A :class:`Density1D` is a nonnegative density sampled on a uniform grid,
optionally backed by a closed-form evaluator for exact off-grid values.
The module provides the measure/boundary-measure calculus (interval-union
measure, Minkowski content), the synthetic curvature-dimension concavity
test ``check_cd``, the positive-curvature ratio bounds ``mcp_ratio_check``,
and the concavity-preserving mollification ``mollify``.

Quadrature conventions
----------------------
Sampled densities integrate by composite Simpson: node-to-node cumulative
sums use the quadratic through consecutive node triples (pairs of cells),
and partial-cell integrals use the same quadratic, so measures are additive
and consistent with the node CDF.  Closed-form densities integrate each
cell with 5-point Gauss-Legendre on the exact evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .coeffs import sigma
from .errors import DomainError

__all__ = [
    "Density1D",
    "IntervalSet",
    "CDCheckResult",
    "measure",
    "minkowski_content",
    "check_cd",
    "mollify",
    "mcp_ratio_check",
    "named_density",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
_GL_NODES = (_GL_NODES + 1.0) / 2.0  # map to [0, 1]
_GL_WEIGHTS = _GL_WEIGHTS / 2.0

_REL_TOL = 1e-12


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint closed intervals, sorted left to right."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev_r = -math.inf
        for (l, r) in self.components:
            if r < l:
                raise DomainError(f"interval [{l}, {r}] has r < l")
            if l < prev_r:
                raise DomainError("interval components overlap or are unsorted")
            prev_r = r

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def of(cls, *intervals: tuple[float, float]) -> "IntervalSet":
        return cls(tuple(sorted((float(l), float(r)) for l, r in intervals)))

    @property
    def is_empty(self) -> bool:
        return len(self.components) == 0

    def merged(self, tol: float = 0.0) -> "IntervalSet":
        """Coalesce components whose gap is <= tol."""
        if not self.components:
            return self
        out = [list(self.components[0])]
        for (l, r) in self.components[1:]:
            if l - out[-1][1] <= tol:
                out[-1][1] = max(out[-1][1], r)
            else:
                out.append([l, r])
        return IntervalSet(tuple((l, r) for l, r in out))


@dataclass(frozen=True)
class ClosedForm:
    """Analytic evaluator backing a density: h(t) = scale * fn(t) on [a, b]."""

    fn: Callable[[np.ndarray], np.ndarray]
    name: str
    params: tuple = ()


@dataclass(frozen=True)
class Density1D:
    """Probability density on [grid[0], grid[-1]] with uniform grid spacing.

    ``values`` hold the normalized samples; when ``closed_form`` is present,
    off-grid evaluation and quadrature use the analytic evaluator scaled by
    ``scale`` instead of interpolation.
    """

    grid: np.ndarray
    values: np.ndarray
    closed_form: Optional[ClosedForm] = None
    scale: float = 1.0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.size < 3:
            raise DomainError("grid must be 1-D with at least 3 nodes")
        if v.shape != g.shape:
            raise DomainError("grid and values must have matching shapes")
        steps = np.diff(g)
        if steps.min() <= 0:
            raise DomainError("grid must be strictly increasing")
        if steps.max() - steps.min() > 1e-9 * steps.mean():
            raise DomainError("grid spacing must be uniform")
        if v.min() < -1e-12 * max(1.0, float(v.max(initial=0.0))):
            raise DomainError("density values must be nonnegative")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", np.maximum(v, 0.0))

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_samples(cls, grid: Sequence[float], values: Sequence[float]) -> "Density1D":
        """Normalize raw samples to unit mass."""
        d = cls(np.asarray(grid, float), np.asarray(values, float))
        mass = d._raw_mass()
        if mass <= 0:
            raise DomainError("density has zero mass")
        return cls(d.grid, d.values / mass)

    @classmethod
    def from_callable(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        a: float,
        b: float,
        m: int = 2001,
        name: str = "custom",
        params: tuple = (),
    ) -> "Density1D":
        """Sample a closed-form density on m nodes and normalize exactly
        (mass computed by per-cell Gauss-Legendre on the evaluator)."""
        if not b > a:
            raise DomainError("need b > a")
        grid = np.linspace(a, b, m)
        raw = np.asarray(fn(grid), dtype=float)
        if raw.min() < -1e-12:
            raise DomainError("closed-form density is negative on the grid")
        raw = np.maximum(raw, 0.0)
        dt = grid[1] - grid[0]
        nodes = grid[:-1, None] + dt * _GL_NODES[None, :]
        cells = dt * (np.maximum(np.asarray(fn(nodes), float), 0.0) @ _GL_WEIGHTS)
        mass = float(cells.sum())
        if mass <= 0:
            raise DomainError("density has zero mass")
        scale = 1.0 / mass
        return cls(grid, raw * scale, ClosedForm(fn, name, params), scale)

    @classmethod
    def from_file(cls, path) -> "Density1D":
        """Load a two-column CSV ``t,h`` with a header row."""
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.dtype.names is None or len(data.dtype.names) < 2:
            raise DomainError(f"{path}: expected a two-column CSV with header")
        t = np.asarray(data[data.dtype.names[0]], float)
        h = np.asarray(data[data.dtype.names[1]], float)
        return cls.from_samples(t, h)

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,h\n")
            for t, h in zip(self.grid, self.values):
                fh.write(f"{t:.12g},{h:.12g}\n")

    # ------------------------------------------------------------------
    # basic geometry
    # ------------------------------------------------------------------

    @property
    def a(self) -> float:
        return float(self.grid[0])

    @property
    def b(self) -> float:
        return float(self.grid[-1])

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def support(self) -> tuple[float, float]:
        """Closed hull of {h > 0} on the grid."""
        idx = np.flatnonzero(self.values > 0)
        if idx.size == 0:
            return (self.a, self.a)
        return (float(self.grid[idx[0]]), float(self.grid[idx[-1]]))

    def support_indices(self) -> tuple[int, int]:
        idx = np.flatnonzero(self.values > 0)
        if idx.size == 0:
            raise DomainError("density vanishes identically")
        return int(idx[0]), int(idx[-1])

    def has_gap_free_support(self, rel_tol: float = 0.0) -> bool:
        i0, i1 = self.support_indices()
        return bool(np.all(self.values[i0 : i1 + 1] > rel_tol * self.values.max()))

    # ------------------------------------------------------------------
    # evaluation and quadrature
    # ------------------------------------------------------------------

    def eval(self, t) -> np.ndarray:
        """Density value at t (0 outside [a, b])."""
        t = np.asarray(t, dtype=float)
        if self.closed_form is not None:
            out = self.scale * np.asarray(self.closed_form.fn(t), dtype=float)
            out = np.maximum(out, 0.0)
        else:
            out = np.interp(t, self.grid, self.values)
        inside = (t >= self.a - _REL_TOL * self._span) & (t <= self.b + _REL_TOL * self._span)
        return np.where(inside, out, 0.0)

    @property
    def _span(self) -> float:
        return self.b - self.a

    @cached_property
    def _node_cdf(self) -> np.ndarray:
        if self.closed_form is not None:
            dt = self.dt
            nodes = self.grid[:-1, None] + dt * _GL_NODES[None, :]
            vals = self.scale * np.maximum(np.asarray(self.closed_form.fn(nodes), float), 0.0)
            cells = dt * (vals @ _GL_WEIGHTS)
        else:
            cells = self._simpson_cells(self.values, self.dt)
        return np.concatenate([[0.0], np.cumsum(cells)])

    @staticmethod
    def _simpson_cells(v: np.ndarray, dt: float) -> np.ndarray:
        """Per-cell integrals from the quadratic through consecutive node
        triples; summing a pair of cells reproduces composite Simpson."""
        m = v.size - 1  # number of cells
        cells = np.empty(m)
        # left half of each Simpson pair: dt/12 * (5 h0 + 8 h1 - h2)
        # right half:                     dt/12 * (-h0 + 8 h1 + 5 h2)
        e = np.arange(0, m - 1, 2)
        cells[e] = dt / 12.0 * (5.0 * v[e] + 8.0 * v[e + 1] - v[e + 2])
        cells[e + 1] = dt / 12.0 * (-v[e] + 8.0 * v[e + 1] + 5.0 * v[e + 2])
        if m % 2 == 1:  # odd cell count: last cell from the final triple
            cells[m - 1] = dt / 12.0 * (-v[m - 2] + 8.0 * v[m - 1] + 5.0 * v[m])
        return cells

    def _partial_cells(self, i: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Integral of h over [grid[i], x] for x inside cell i (vectorized)."""
        dt = self.dt
        if self.closed_form is not None:
            w = np.maximum(x - self.grid[i], 0.0)
            nodes = self.grid[i][..., None] + w[..., None] * _GL_NODES
            vals = self.scale * np.maximum(np.asarray(self.closed_form.fn(nodes), float), 0.0)
            return w * (vals @ _GL_WEIGHTS)
        v = self.values
        m = v.size - 1
        # each cell integrates the quadratic through its Simpson triple
        use_left = (i % 2 == 0) & (i + 2 <= m)
        base = np.where(use_left, i, i - 1)
        off = np.where(use_left, 0.0, 1.0)
        h0, h1, h2 = v[base], v[base + 1], v[base + 2]

        def antider(xi):
            return dt * (
                h0 * (xi**3 / 6.0 - 0.75 * xi**2 + xi)
                + h1 * (xi**2 - xi**3 / 3.0)
                + h2 * (xi**3 / 6.0 - 0.25 * xi**2)
            )

        xi = off + (x - self.grid[i]) / dt
        return antider(xi) - antider(off)

    def _partial_cell(self, i: int, x: float) -> float:
        return float(self._partial_cells(np.asarray([i]), np.asarray([x]))[0])

    @property
    def mass(self) -> float:
        return float(self._node_cdf[-1])

    def cdf(self, t) -> np.ndarray:
        """Cumulative measure of [a, t]."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        nc = self._node_cdf
        for k, x in enumerate(t):
            if x <= self.a:
                out[k] = 0.0
            elif x >= self.b:
                out[k] = nc[-1]
            else:
                i = min(int((x - self.a) / self.dt), self.grid.size - 2)
                if self.grid[i + 1] <= x:
                    i += 1
                out[k] = nc[i] + self._partial_cell(i, x)
        return out if out.size > 1 else out.reshape(())

    def invert_cdf(self, p: float, xtol: float = 1e-10) -> float:
        """Smallest t with cdf(t) >= p, resolved inside the bracketing cell
        by Newton steps safeguarded by bisection."""
        nc = self._node_cdf
        p = min(max(p, 0.0), float(nc[-1]))
        i = int(np.searchsorted(nc, p, side="left"))
        if i == 0:
            return self.a
        i -= 1  # nc[i] < p <= nc[i+1]
        lo, hi = float(self.grid[i]), float(self.grid[i + 1])
        base = float(nc[i])
        gap = float(nc[i + 1]) - base
        x = lo + (hi - lo) * ((p - base) / gap if gap > 0 else 0.5)
        for _ in range(80):
            err = base + self._partial_cell(i, x) - p
            if err <= 0:
                lo = x
            else:
                hi = x
            if hi - lo <= xtol:
                break
            slope = float(self.eval(x))
            if slope > 0:
                x_new = x - err / slope
                x = x_new if lo < x_new < hi else 0.5 * (lo + hi)
            else:
                x = 0.5 * (lo + hi)
        return 0.5 * (lo + hi)

    def _raw_mass(self) -> float:
        return float(self._simpson_cells(self.values, self.dt).sum())


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------


def measure(d: Density1D, A: IntervalSet) -> float:
    """Measure of a finite interval union, additive over components."""
    if A.is_empty:
        return 0.0
    slack = 1e-9 * max(1.0, d._span)
    total = 0.0
    for (l, r) in A.components:
        if l < d.a - slack or r > d.b + slack:
            raise DomainError(f"interval [{l}, {r}] exceeds the domain [{d.a}, {d.b}]")
        total += float(d.cdf(min(r, d.b)) - d.cdf(max(l, d.a)))
    return total


def minkowski_content(d: Density1D, A: IntervalSet) -> float:
    """Boundary measure of an interval union: the sum of density values at
    boundary points where the epsilon-enlargement (within [a, b]) can grow.
    Boundary points sitting at the domain endpoints contribute nothing."""
    if A.is_empty:
        return 0.0
    slack = 1e-9 * max(1.0, d._span)
    for (l, r) in A.components:
        if l < d.a - slack or r > d.b + slack:
            raise DomainError(f"interval [{l}, {r}] exceeds the domain [{d.a}, {d.b}]")
    merged = A.merged(tol=slack)
    total = 0.0
    for (l, r) in merged.components:
        if l > d.a + slack:
            total += float(d.eval(l))
        if r < d.b - slack:
            total += float(d.eval(r))
    return total


@dataclass(frozen=True)
class CDCheckResult:
    """Outcome of the midpoint concavity test."""

    passed: bool
    worst_deficit: float
    witness: Optional[tuple[float, float]]  # (t0, t1) of the worst pair
    tol: float
    n_pairs: int = 0

    def __bool__(self) -> bool:
        return self.passed


def default_cd_tol(d: Density1D) -> float:
    return 1e-6 * (1.0 + float(d.values.max()))


def check_cd(d: Density1D, K: float, N: float, tol: Optional[float] = None) -> CDCheckResult:
    """Midpoint form of the 1-D curvature-dimension inequality.

    For N > 1 and u = h**(1/(N-1)), every even-gap grid pair (t0, t1) inside
    the support hull must satisfy

        u((t0+t1)/2) >= sigma_{K,N-1}^{(1/2)}(t1-t0) * (u(t0) + u(t1)) - tol.

    On the infinite sigma branch (K (t1-t0)^2 >= (N-1) pi^2) the inequality
    can only hold in the limiting sense, so the deficit is u(t0) + u(t1):
    the mass that would have to vanish.  For N == 1 the density must be
    constant on its support within tol.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if tol is None:
        tol = default_cd_tol(d)
    i0, i1 = d.support_indices()
    h = d.values[i0 : i1 + 1]
    if N == 1:
        dev = float(np.max(np.abs(h - h.mean()))) if h.size else 0.0
        return CDCheckResult(dev <= tol, dev, None, tol, h.size)

    u = h ** (1.0 / (N - 1.0))
    n = u.size
    dt = d.dt
    worst = -math.inf
    witness = None
    n_pairs = 0
    for g in range(2, n, 2):
        theta = g * dt
        sig = sigma(0.5, theta, K, N - 1.0)
        left = u[: n - g]
        right = u[g:]
        mid = u[g // 2 : n - g // 2]
        if math.isinf(sig):
            deficit = left + right
        else:
            deficit = sig * (left + right) - mid
        n_pairs += deficit.size
        k = int(np.argmax(deficit))
        if deficit[k] > worst:
            worst = float(deficit[k])
            witness = (float(d.grid[i0 + k]), float(d.grid[i0 + k + g]))
    if worst == -math.inf:
        worst = 0.0
    return CDCheckResult(worst <= tol, worst, witness, tol, n_pairs)


def mollify(
    d: Density1D,
    eps: float,
    N: float,
    return_scale: bool = False,
):
    """Concavity-preserving regularization.

    Convolves h**(1/(N-1)) with the bump psi(x) = C exp(-1/(1-(2x-1)^2))
    scaled to [0, eps], raises the result back to the (N-1) power, samples it
    on the enlarged grid [a-eps, b+eps], and renormalizes to unit mass.  With
    ``return_scale`` the renormalization factor is returned alongside.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if N <= 1:
        raise DomainError("mollify requires N > 1")
    p = 1.0 / (N - 1.0)
    u = d.values**p

    dt_target = min(d.dt, eps / 8.0)
    a_new, b_new = d.a - eps, d.b + eps
    m_new = int(math.ceil((b_new - a_new) / dt_target)) + 1
    grid_new = np.linspace(a_new, b_new, m_new)
    dt_new = grid_new[1] - grid_new[0]

    u_in = np.interp(grid_new, d.grid, u, left=0.0, right=0.0)
    u_in[(grid_new < d.a) | (grid_new > d.b)] = 0.0

    k = int(math.floor(eps / dt_new))
    x = np.arange(k + 1) * dt_new / eps
    with np.errstate(divide="ignore", over="ignore"):
        arg = 1.0 - (2.0 * x - 1.0) ** 2
        w = np.where(arg > 0, np.exp(-1.0 / np.where(arg > 0, arg, 1.0)), 0.0)
    if w.sum() <= 0:
        raise DomainError("eps too small relative to the grid for the mollifier")
    w /= w.sum()

    u_out = np.convolve(u_in, w)[:m_new]
    h_out = u_out ** (N - 1.0)
    raw = Density1D(grid_new, h_out)
    mass = raw._raw_mass()
    if mass <= 0:
        raise DomainError("mollified density has zero mass")
    out = Density1D(grid_new, h_out / mass)
    if return_scale:
        return out, 1.0 / mass
    return out


@dataclass(frozen=True)
class MCPReport:
    n_pairs: int
    n_violations: int
    worst_violation: float
    applicable: bool


def mcp_ratio_check(
    d: Density1D,
    K: float,
    N: float,
    n_sample: int = 2000,
    tol: float = 1e-6,
    seed: int = 0,
) -> MCPReport:
    """Two-sided sine-ratio bounds for densities with K > 0.

    For support [a, b] and a < t0 < t1 < b the ratio h(t1)/h(t0) must lie
    between (sin((b-t1)k)/sin((b-t0)k))^(N-1) and
    (sin((t1-a)k)/sin((t0-a)k))^(N-1) with k = sqrt(K/(N-1)).  Pairs whose
    sine arguments leave (0, pi) are skipped (support longer than the
    comparison sphere), and the check is reported as not applicable for
    K <= 0 or N <= 1.
    """
    if K <= 0 or N <= 1:
        return MCPReport(0, 0, 0.0, applicable=False)
    i0, i1 = d.support_indices()
    if i1 - i0 < 3:
        return MCPReport(0, 0, 0.0, applicable=True)
    a, b = float(d.grid[i0]), float(d.grid[i1])
    kap = math.sqrt(K / (N - 1.0))
    rng = np.random.default_rng(seed)
    ii = rng.integers(i0 + 1, i1, size=n_sample)
    jj = rng.integers(i0 + 1, i1, size=n_sample)
    lo_idx = np.minimum(ii, jj)
    hi_idx = np.maximum(ii, jj)
    keep = lo_idx < hi_idx
    lo_idx, hi_idx = lo_idx[keep], hi_idx[keep]
    t0 = d.grid[lo_idx]
    t1 = d.grid[hi_idx]
    h0 = d.values[lo_idx]
    h1 = d.values[hi_idx]
    keep = (h0 > 0) & (h1 > 0)
    t0, t1, h0, h1 = t0[keep], t1[keep], h0[keep], h1[keep]
    args = np.stack([(b - t1) * kap, (b - t0) * kap, (t1 - a) * kap, (t0 - a) * kap])
    ok = np.all((args > 0) & (args < math.pi), axis=0)
    t0, t1, h0, h1 = t0[ok], t1[ok], h0[ok], h1[ok]
    if t0.size == 0:
        return MCPReport(0, 0, 0.0, applicable=True)
    ratio = h1 / h0
    lower = (np.sin((b - t1) * kap) / np.sin((b - t0) * kap)) ** (N - 1.0)
    upper = (np.sin((t1 - a) * kap) / np.sin((t0 - a) * kap)) ** (N - 1.0)
    viol = np.maximum(lower - ratio, ratio - upper)
    nv = int(np.sum(viol > tol))
    return MCPReport(int(t0.size), nv, float(viol.max(initial=0.0)), applicable=True)


# ----------------------------------------------------------------------
# named closed-form densities
# ----------------------------------------------------------------------


def _uniform(a: float, b: float, m: int) -> Density1D:
    return Density1D.from_callable(lambda t: np.ones_like(np.asarray(t, float)), a, b, m, "uniform", (a, b))


def sin_pow_density(K: float, N: float, lo: float, hi: float, m: int = 2001) -> Density1D:
    """sin(sqrt(K/(N-1)) t)**(N-1) restricted to [lo, hi], normalized."""
    kap = math.sqrt(K / (N - 1.0))

    def fn(t):
        t = np.asarray(t, float)
        s = np.sin(np.clip(kap * t, 0.0, math.pi))
        return np.maximum(s, 0.0) ** (N - 1.0)

    return Density1D.from_callable(fn, lo, hi, m, "sin_pow", (K, N, lo, hi))


def named_density(name: str, m: int = 2001, **params) -> Density1D:
    """Closed-form densities selectable by name (CLI / config entry point)."""
    if name == "uniform":
        return _uniform(params.get("a", 0.0), params.get("b", 1.0), m)
    if name == "sin":
        # c sin(t) on [0, pi]; the N = 2, K = 1 model density
        return sin_pow_density(1.0, 2.0, 0.0, math.pi, m)
    if name == "sin_pow":
        return sin_pow_density(params["K"], params["N"], params["lo"], params["hi"], m)
    if name == "sin2":
        return Density1D.from_callable(
            lambda t: np.sin(np.asarray(t, float)) ** 2, 0.0, math.pi, m, "sin2"
        )
    if name == "power":
        # t**(N-1) on [lo, hi] (the K = 0 model window)
        N = params["N"]
        lo, hi = params.get("lo", 0.0), params.get("hi", 1.0)
        return Density1D.from_callable(
            lambda t: np.maximum(np.asarray(t, float), 0.0) ** (N - 1.0),
            lo, hi, m, "power", (N, lo, hi),
        )
    if name == "sinh_pow":
        K, N = params["K"], params["N"]
        lo, hi = params["lo"], params["hi"]
        kap = math.sqrt(-K / (N - 1.0))
        return Density1D.from_callable(
            lambda t: np.sinh(kap * np.maximum(np.asarray(t, float), 0.0)) ** (N - 1.0),
            lo, hi, m, "sinh_pow", (K, N, lo, hi),
        )
    if name == "cosh_pow":
        K, N = params["K"], params["N"]
        lo, hi = params["lo"], params["hi"]
        kap = math.sqrt(-K / (N - 1.0))
        return Density1D.from_callable(
            lambda t: np.cosh(kap * np.asarray(t, float)) ** (N - 1.0),
            lo, hi, m, "cosh_pow", (K, N, lo, hi),
        )
    if name == "exp":
        lam = params["rate"]
        lo, hi = params.get("lo", 0.0), params["hi"]
        return Density1D.from_callable(
            lambda t: np.exp(lam * np.asarray(t, float)), lo, hi, m, "exp", (lam, lo, hi)
        )
    raise DomainError(f"unknown density name: {name!r}")
