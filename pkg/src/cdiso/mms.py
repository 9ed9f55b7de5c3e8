"""Finite metric measure spaces and their generators.

A :class:`FiniteMMS` is a point cloud with a symmetric distance matrix and
a probability weight vector.  Generators produce interval samples (weights
from density quadrature cells), unit spheres (equispaced circle, Fibonacci
lattice on S^2, rejection sampling on S^3), and spherical suspensions over
a base space via the spherical law of cosines.  The module also provides
the epsilon-enlargement and the discrete Minkowski-content surrogate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .density1d import Density1D
from .errors import DomainError

__all__ = [
    "FiniteMMS",
    "gen_interval",
    "gen_sphere",
    "gen_suspension",
    "enlarge",
    "minkowski_discrete",
    "minkowski_ladder",
    "covering_radius",
    "save_space",
    "load_space",
]

_TRIANGLE_TOL = 1e-9
_EXHAUSTIVE_LIMIT = 300


@dataclass(frozen=True)
class FiniteMMS:
    """Finite metric measure space: labels are generator-specific coordinates
    (may be None); info carries generator metadata such as claimed (K, N)."""

    dist: np.ndarray
    weights: np.ndarray
    labels: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DomainError("dist must be a square matrix")
        n = d.shape[0]
        if w.shape != (n,):
            raise DomainError("weights must match the point count")
        if np.abs(np.diag(d)).max(initial=0.0) > 1e-12:
            raise DomainError("dist must have zero diagonal")
        if d.min() < -1e-12:
            raise DomainError("dist must be nonnegative")
        if np.abs(d - d.T).max() > 1e-9:
            raise DomainError("dist must be symmetric")
        if w.min() < -1e-12:
            raise DomainError("weights must be nonnegative")
        s = w.sum()
        if abs(s - 1.0) > 1e-8:
            raise DomainError(f"weights must sum to 1, got {s}")
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", np.maximum(w, 0.0))
        self._check_triangle()

    def _check_triangle(self):
        n = self.n
        d = self.dist
        if n <= _EXHAUSTIVE_LIMIT:
            for k in range(n):
                if np.any(d > d[:, k, None] + d[None, k, :] + _TRIANGLE_TOL):
                    raise DomainError(f"triangle inequality fails through point {k}")
        else:
            rng = np.random.default_rng(0)
            i, j, k = rng.integers(0, n, size=(3, 100_000))
            if np.any(d[i, j] > d[i, k] + d[k, j] + _TRIANGLE_TOL):
                raise DomainError("triangle inequality fails on sampled triples")

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def measure(self, subset) -> float:
        return float(self.weights[_as_mask(self, subset)].sum())


def _as_mask(X: FiniteMMS, A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == bool:
        if A.shape != (X.n,):
            raise DomainError("boolean subset mask has wrong length")
        return A
    mask = np.zeros(X.n, dtype=bool)
    mask[A.astype(int)] = True
    return mask


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------


def gen_interval(density: Density1D, n: int, K: Optional[float] = None,
                 N: Optional[float] = None) -> FiniteMMS:
    """n equispaced points on the density's domain; each point weighted by
    the measure of its midpoint quadrature cell (half-cells at the ends)."""
    if n < 2:
        raise DomainError("need at least 2 points")
    t = np.linspace(density.a, density.b, n)
    bounds = np.r_[density.a, 0.5 * (t[:-1] + t[1:]), density.b]
    cdf_vals = np.array([float(density.cdf(x)) for x in bounds])
    w = np.diff(cdf_vals)
    w = np.maximum(w, 0.0)
    w /= w.sum()
    dist = np.abs(t[:, None] - t[None, :])
    info = {"kind": "interval", "n": n}
    if K is not None:
        info["K"] = K
    if N is not None:
        info["N"] = N
    return FiniteMMS(dist, w, labels=t[:, None], info=info)


def _geodesic_from_coords(coords: np.ndarray) -> np.ndarray:
    gram = np.clip(coords @ coords.T, -1.0, 1.0)
    d = np.arccos(gram)
    np.fill_diagonal(d, 0.0)
    return 0.5 * (d + d.T)


def gen_sphere(N_dim: int, n: int, seed: int = 0) -> FiniteMMS:
    """Unit-sphere sample with geodesic distances and uniform weights.

    S^1 is equispaced, S^2 uses the offset Fibonacci lattice, S^3 uses
    rejection sampling from the enclosing cube (deterministic given seed).
    Metadata claims the synthetic bounds K = N_dim - 1, N = N_dim.
    """
    if N_dim not in (1, 2, 3):
        raise DomainError("supported sphere dimensions: 1, 2, 3")
    if N_dim == 1:
        theta = 2.0 * math.pi * np.arange(n) / n
        coords = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elif N_dim == 2:
        i = np.arange(n)
        z = 1.0 - (2.0 * i + 1.0) / n
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        phi = 2.0 * math.pi * i / golden
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        coords = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    else:
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < n:
            cand = rng.uniform(-1.0, 1.0, size=(4 * (n - len(pts)) + 16, 4))
            norm2 = (cand**2).sum(axis=1)
            keep = (norm2 <= 1.0) & (norm2 > 1e-12)
            pts.extend(cand[keep])
        coords = np.asarray(pts[:n])
        coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    dist = _geodesic_from_coords(coords)
    w = np.full(n, 1.0 / n)
    return FiniteMMS(dist, w, labels=coords,
                     info={"kind": "sphere", "dim": N_dim, "K": N_dim - 1, "N": N_dim,
                           "seed": seed})


def gen_suspension(base: FiniteMMS, N: float, n_t: int) -> FiniteMMS:
    """Spherical suspension over a base of diameter <= pi.

    Points are (t_i, y_j) for interior t plus the two poles; the distance is
    cos d = cos t cos s + sin t sin s cos(d_Y), and weights are proportional
    to sin(t)^(N-1) * w_Y (poles carry zero weight but realize diameter pi).
    """
    if N < 2:
        raise DomainError("suspension exponent N must be >= 2")
    if n_t < 3:
        raise DomainError("need n_t >= 3 grid points on [0, pi]")
    if base.diameter > math.pi + 1e-9:
        raise DomainError(f"base diameter {base.diameter} exceeds pi")
    t_grid = np.linspace(0.0, math.pi, n_t)
    t_int = t_grid[1:-1]
    nb = base.n
    # point layout: [south pole (t=0), interior t x base, north pole (t=pi)]
    t_all = np.r_[0.0, np.repeat(t_int, nb), math.pi]
    base_idx = np.r_[-1, np.tile(np.arange(nb), t_int.size), -1].astype(int)

    cos_t = np.cos(t_all)
    sin_t = np.sin(t_all)
    d_y = np.zeros((t_all.size, t_all.size))
    inner = base_idx >= 0
    iy = base_idx[inner]
    d_y[np.ix_(inner, inner)] = base.dist[np.ix_(iy, iy)]
    cos_d = cos_t[:, None] * cos_t[None, :] + sin_t[:, None] * sin_t[None, :] * np.cos(d_y)
    dist = np.arccos(np.clip(cos_d, -1.0, 1.0))
    np.fill_diagonal(dist, 0.0)

    w = np.zeros(t_all.size)
    w[inner] = sin_t[inner] ** (N - 1.0) * base.weights[iy]
    w /= w.sum()
    labels = np.stack([t_all, base_idx.astype(float)], axis=1)
    return FiniteMMS(dist, w, labels=labels,
                     info={"kind": "suspension", "N": N, "K": N - 1.0, "n_t": n_t,
                           "base_kind": base.info.get("kind")})


# ----------------------------------------------------------------------
# enlargement and discrete Minkowski content
# ----------------------------------------------------------------------


def enlarge(X: FiniteMMS, A, eps: float) -> np.ndarray:
    """Open eps-neighborhood {x : exists y in A with d(x, y) < eps}."""
    mask = _as_mask(X, A)
    if not mask.any():
        return mask.copy()
    return (X.dist[:, mask] < eps).any(axis=1)


def minkowski_discrete(X: FiniteMMS, A, eps: float) -> float:
    """One-scale finite difference (m(A^eps) - m(A)) / eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    mask = _as_mask(X, A)
    grown = enlarge(X, mask, eps)
    return float((X.weights[grown].sum() - X.weights[mask].sum()) / eps)


def minkowski_ladder(X: FiniteMMS, A, eps_list) -> dict:
    """Evaluate the surrogate on an epsilon ladder; the reported value is the
    minimum rung (a stand-in for the liminf)."""
    rungs = {float(e): minkowski_discrete(X, A, float(e)) for e in eps_list}
    return {"rungs": rungs, "value": min(rungs.values())}


def covering_radius(X: FiniteMMS) -> float:
    """Max over points of the nearest-neighbor distance (sampling resolution)."""
    d = X.dist + np.diag(np.full(X.n, np.inf))
    return float(d.min(axis=1).max())


# ----------------------------------------------------------------------
# file formats
# ----------------------------------------------------------------------


def save_space(X: FiniteMMS, path) -> None:
    """Write a space to ``.npz`` (binary) or CSV (n, then the row-major lower
    triangle); CSV weights go to ``<path>.weights.csv``."""
    path = Path(path)
    if path.suffix == ".npz":
        np.savez_compressed(
            path, dist=X.dist, weights=X.weights,
            labels=X.labels if X.labels is not None else np.empty(0),
            info=json.dumps(X.info),
        )
        return
    with open(path, "w") as fh:
        fh.write(f"{X.n}\n")
        for i in range(1, X.n):
            fh.write(",".join(f"{x:.12g}" for x in X.dist[i, :i]) + "\n")
    with open(path.with_suffix(path.suffix + ".weights.csv"), "w") as fh:
        fh.write("w\n")
        for w in X.weights:
            fh.write(f"{w:.12g}\n")


def load_space(path) -> FiniteMMS:
    path = Path(path)
    if path.suffix == ".npz":
        data = np.load(path, allow_pickle=False)
        labels = data["labels"]
        return FiniteMMS(
            data["dist"], data["weights"],
            labels=labels if labels.size else None,
            info=json.loads(str(data["info"])),
        )
    with open(path) as fh:
        n = int(fh.readline().strip())
        dist = np.zeros((n, n))
        for i in range(1, n):
            row = [float(x) for x in fh.readline().split(",") if x.strip()]
            dist[i, : i] = row
    dist = dist + dist.T
    wpath = path.with_suffix(path.suffix + ".weights.csv")
    if wpath.exists():
        w = np.atleast_1d(np.asarray(np.genfromtxt(wpath, skip_header=1), float))
    else:
        w = np.full(n, 1.0 / n)
    return FiniteMMS(dist, w, info={"kind": "file", "path": str(path)})
