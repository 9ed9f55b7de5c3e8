"""Exact L1 optimal transport on a finite metric measure space.

``solve_plan`` solves the transshipment LP between two marginals on the
complete bipartite graph of their supports (HiGHS, exact vertex solution)
and certifies optimality by complementary slackness against the LP duals.
``solve_potential`` converts the duals of the transport problem induced by
a zero-mean function f into a globally 1-Lipschitz potential maximizing
the integral of f against it, pinned at a root point for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import DomainError, SolverError
from .mms import FiniteMMS

__all__ = ["SignedFunction", "Potential", "PlanResult", "solve_plan", "solve_potential"]

MARGINAL_TOL = 1e-10
SLACK_TOL = 1e-8


@dataclass(frozen=True)
class SignedFunction:
    """A function on the points of a space together with its weighted mean."""

    values: np.ndarray
    mean: float

    @classmethod
    def from_values(cls, values, X: FiniteMMS) -> "SignedFunction":
        v = np.asarray(values, dtype=float)
        if v.shape != (X.n,):
            raise DomainError("function values must match the point count")
        return cls(v, float(v @ X.weights))

    @classmethod
    def indicator_centered(cls, X: FiniteMMS, subset) -> "SignedFunction":
        """chi_A - m(A): zero mean by construction."""
        from .mms import _as_mask

        mask = _as_mask(X, subset)
        vol = float(X.weights[mask].sum())
        return cls.from_values(mask.astype(float) - vol, X)

    @property
    def plus(self) -> np.ndarray:
        return np.maximum(self.values, 0.0)

    @property
    def minus(self) -> np.ndarray:
        return np.maximum(-self.values, 0.0)


@dataclass(frozen=True)
class Potential:
    """1-Lipschitz Kantorovich potential with solver diagnostics."""

    phi: np.ndarray
    lipschitz_defect: float
    objective: float = 0.0       # integral of f * phi dm
    cost: float = 0.0            # transport cost between the induced marginals
    duality_gap: float = 0.0     # |objective - (integral of f_plus dm) * cost|


@dataclass(frozen=True)
class PlanResult:
    """Optimal plan as index/mass triplets over the original point set."""

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    cost: float
    row_dual: np.ndarray         # dual values on the support of mu0
    col_dual: np.ndarray         # dual values on the support of mu1
    support_rows: np.ndarray     # point indices carrying mu0
    support_cols: np.ndarray     # point indices carrying mu1

    @property
    def plan(self) -> sparse.coo_matrix:
        n = int(max(self.rows.max(initial=-1), self.cols.max(initial=-1))) + 1
        return sparse.coo_matrix((self.mass, (self.rows, self.cols)), shape=(n, n))


def solve_plan(X: FiniteMMS, mu0, mu1) -> PlanResult:
    """Exact L1 transport plan between two probability vectors on X."""
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    if mu0.shape != (X.n,) or mu1.shape != (X.n,):
        raise DomainError("marginals must be defined on all points")
    if abs(mu0.sum() - 1.0) > MARGINAL_TOL or abs(mu1.sum() - 1.0) > MARGINAL_TOL:
        raise DomainError("marginals must sum to 1")

    rows = np.flatnonzero(mu0 > 0)
    cols = np.flatnonzero(mu1 > 0)
    n0, n1 = rows.size, cols.size
    if n0 == 0 or n1 == 0:
        raise DomainError("marginals must carry mass")
    D = X.dist[np.ix_(rows, cols)]

    A_eq = sparse.vstack([
        sparse.kron(sparse.eye(n0, format="csr"), np.ones((1, n1))),
        sparse.kron(np.ones((1, n0)), sparse.eye(n1, format="csr")),
    ]).tocsc()
    b_eq = np.concatenate([mu0[rows], mu1[cols]])
    res = linprog(D.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"transport LP failed: {res.message}")

    plan = res.x.reshape(n0, n1)
    err0 = np.abs(plan.sum(axis=1) - mu0[rows]).max()
    err1 = np.abs(plan.sum(axis=0) - mu1[cols]).max()
    if max(err0, err1) > 1e-9:
        raise SolverError(f"plan marginals off by {max(err0, err1):.2e}")

    y = res.eqlin.marginals
    u, v = y[:n0], y[n0:]
    nz = plan > 1e-14
    if nz.any():
        slack = np.abs(D[nz] - (u[:, None] + v[None, :])[nz]).max()
        if slack > SLACK_TOL:
            raise SolverError(f"complementary slackness violated by {slack:.2e}")

    r_idx, c_idx = np.nonzero(plan > 1e-14)
    return PlanResult(
        rows=rows[r_idx], cols=cols[c_idx], mass=plan[r_idx, c_idx],
        cost=float(res.fun), row_dual=u, col_dual=v,
        support_rows=rows, support_cols=cols,
    )


def solve_potential(X: FiniteMMS, f: SignedFunction, mean_tol: float = 1e-9,
                    root: Optional[int] = None) -> Potential:
    """1-Lipschitz maximizer of the integral of f * phi dm.

    The potential is recovered from the column duals of the plan between the
    normalized positive and negative parts of f, extended to every point by
    the min-convolution phi(x) = min_y (d(x, y) + phi(y)) (which enforces
    exact feasibility), and pinned to zero at the lowest-index point of the
    support of f.
    """
    if abs(f.mean) > mean_tol:
        raise DomainError(f"f must have zero mean, got {f.mean:.2e}")
    w = X.weights
    s = float(f.plus @ w)
    support = np.flatnonzero(np.abs(f.values) > 0)
    if s <= 0 or support.size == 0:
        phi = np.zeros(X.n)
        return Potential(phi, 0.0)

    mu0 = f.plus * w / s
    mu1 = f.minus * w / s
    plan = solve_plan(X, mu0, mu1)

    # phi from the column duals: phi(x) = min over sinks (d(x, y) - v(y))
    phi = (X.dist[:, plan.support_cols] - plan.col_dual[None, :]).min(axis=1)
    # exact-feasibility pass: idempotent for a 1-Lipschitz function
    phi = (X.dist + phi[None, :]).min(axis=1)

    if root is None:
        root = int(support[0])
    phi = phi - phi[root]

    defect = float((np.abs(phi[:, None] - phi[None, :]) - X.dist).max())
    objective = float(f.values @ (phi * w))
    gap = abs(objective - s * plan.cost)
    return Potential(phi, defect, objective=objective, cost=plan.cost, duality_gap=gap)
