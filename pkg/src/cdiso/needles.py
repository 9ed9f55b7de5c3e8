"""Discrete needle decomposition induced by a 1-Lipschitz potential.

Saturated pairs (phi(x) - phi(y) = d(x, y) up to tol_sat, at positive
distance) define the directed transport relation.  ``build_structure``
computes initial/final points, the transport set with endpoints, and the
forward/backward branching sets; ``extract_needles`` partitions the
branch-free transport set into maximal chains, each carrying an arc-length
parametrization and a 1-D conditional density obtained by spreading point
weights over midpoint cells.  ``check_needles`` and ``check_d2_monotone``
run the structural validations (zero mean along needles, 1-D curvature
check, ratio bounds, d^2-cyclic monotonicity of ordered subfamilies).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density1d import Density1D, check_cd, mcp_ratio_check, CDCheckResult, MCPReport
from .errors import ChainIsometryError, DomainError
from .l1ot import Potential, SignedFunction
from .mms import FiniteMMS

__all__ = [
    "TransportStructure",
    "Needle",
    "build_structure",
    "extract_needles",
    "check_needles",
    "check_d2_monotone",
    "default_tol_sat",
]


def default_tol_sat(X: FiniteMMS, duality_tol: float = 1e-8) -> float:
    """Saturation tolerance: 10 x duality tolerance x diameter."""
    return 10.0 * duality_tol * max(X.diameter, 1.0)


@dataclass(frozen=True)
class TransportStructure:
    """Saturation relation of a potential and the derived point classes."""

    phi: np.ndarray
    sat: np.ndarray              # sat[i, j]: phi_i - phi_j = d_ij (dir., d > tol_dist)
    initial: np.ndarray          # bool: no incoming saturated pair
    final: np.ndarray            # bool: no outgoing saturated pair
    transport_e: np.ndarray      # bool: endpoint-inclusive transport set
    branch_fwd: np.ndarray       # bool: forward branching A+
    branch_bwd: np.ndarray       # bool: backward branching A-
    transport: np.ndarray        # bool: transport_e minus branching
    tol_sat: float
    tol_dist: float

    @property
    def gamma_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return np.nonzero(self.sat)


def build_structure(X: FiniteMMS, phi: Potential | np.ndarray,
                    tol_sat: Optional[float] = None,
                    tol_dist: Optional[float] = None) -> TransportStructure:
    """Definitional scans for the saturation graph of a potential."""
    p = phi.phi if isinstance(phi, Potential) else np.asarray(phi, dtype=float)
    if p.shape != (X.n,):
        raise DomainError("potential must be defined on all points")
    if tol_sat is None:
        tol_sat = default_tol_sat(X)
    if tol_dist is None:
        tol_dist = 1e-9 * max(X.diameter, 1.0)

    d = X.dist
    drop = p[:, None] - p[None, :]
    sat = (drop >= d - tol_sat) & (d > tol_dist)

    has_out = sat.any(axis=1)
    has_in = sat.any(axis=0)
    initial = ~has_in
    final = ~has_out
    transport_e = has_out | has_in

    # pairs unrelated in R = Gamma u Gamma^{-1}, with the wider branch margin
    unrelated = (np.abs(drop) < d - 3.0 * tol_sat).astype(np.float32)
    sat_f = sat.astype(np.float32)
    # fwd_counts[x, w] = #{z in succ(x) : (z, w) not in R}; x branches forward
    # when some w in succ(x) has such a z
    fwd_counts = (sat_f @ unrelated) * sat_f
    branch_fwd = transport_e & (fwd_counts > 0.5).any(axis=1)
    bwd_counts = (sat_f.T @ unrelated) * sat_f.T
    branch_bwd = transport_e & (bwd_counts > 0.5).any(axis=1)

    transport = transport_e & ~(branch_fwd | branch_bwd)
    return TransportStructure(p, sat, initial, final, transport_e, branch_fwd,
                              branch_bwd, transport, tol_sat, tol_dist)


@dataclass(frozen=True)
class Needle:
    """One maximal chain: point indices ordered by decreasing potential,
    arc-length parameters, the cell-spread conditional density, and the
    quotient weight (the chain's share of the ambient measure)."""

    chain: np.ndarray
    params: np.ndarray
    density: Density1D
    quotient_weight: float
    point_weights: np.ndarray
    iso_defect: float = 0.0

    @property
    def length(self) -> float:
        return float(self.params[-1] - self.params[0])


def _needle_density(params: np.ndarray, w: np.ndarray, m: int) -> Density1D:
    """Spread point weights over midpoint cells and resample on a uniform grid."""
    t = params
    bounds = np.r_[t[0], 0.5 * (t[:-1] + t[1:]), t[-1]]
    cell_len = np.maximum(np.diff(bounds), 1e-15)
    pc_vals = (w / w.sum()) / cell_len
    grid = np.linspace(t[0], t[-1], m)
    idx = np.clip(np.searchsorted(bounds, grid, side="right") - 1, 0, pc_vals.size - 1)
    return Density1D.from_samples(grid, pc_vals[idx])


def extract_needles(S: TransportStructure, X: FiniteMMS,
                    tol_iso: Optional[float] = None,
                    resample_m: int = 129,
                    strict_iso: bool = False) -> tuple[list[Needle], np.ndarray]:
    """Partition the transport set into maximal chains.

    Seeds at the unprocessed point of maximal potential among endpoints of
    unprocessed saturated pairs, then repeatedly walks to the farthest
    saturated successor, sweeping in every unprocessed point saturated with
    both the current anchor and the target (the discrete segment between
    them).  Returns the needles and a leftover mask: transport points that
    ended up isolated plus everything off the transport set.

    With ``strict_iso`` a chain whose arc-length parametrization deviates
    from the metric by more than tol_iso raises ChainIsometryError;
    otherwise the defect is recorded on the needle.
    """
    p = S.phi
    if tol_iso is None:
        tol_iso = 20.0 * S.tol_sat
    in_T = S.transport
    unproc = in_T.copy()
    needles: list[Needle] = []

    satT = S.sat & in_T[:, None] & in_T[None, :]
    d = X.dist
    drop = p[:, None] - p[None, :]
    related = (np.abs(drop) >= d - S.tol_sat) & (d > S.tol_dist)
    all_idx = np.arange(X.n)

    while True:
        active_pair = satT & unproc[:, None] & unproc[None, :]
        endpoints = active_pair.any(axis=1) | active_pair.any(axis=0)
        if not endpoints.any():
            break
        cand = np.flatnonzero(endpoints)
        seed = int(cand[np.argmax(p[cand])])

        members = [seed]
        member_mask = np.zeros(X.n, dtype=bool)
        member_mask[seed] = True
        cur = seed
        while True:
            succ = satT[cur] & unproc & ~member_mask
            if not succ.any():
                break
            succ_idx = np.flatnonzero(succ)
            far = int(succ_idx[np.argmax(d[cur, succ_idx])])
            between = succ & (related[:, far] | (all_idx == far))
            new_idx = np.flatnonzero(between)
            members.extend(int(i) for i in new_idx)
            member_mask[new_idx] = True
            cur = far

        members = np.asarray(members, dtype=int)
        order = np.lexsort((members, -p[members]))
        chain = members[order]
        unproc[chain] = False
        if chain.size < 2:
            continue

        t = np.r_[0.0, np.cumsum(d[chain[:-1], chain[1:]])]
        sub = d[np.ix_(chain, chain)]
        defect = float(np.abs(sub - np.abs(t[:, None] - t[None, :])).max())
        if strict_iso and defect > tol_iso:
            raise ChainIsometryError(
                f"chain of {chain.size} points violates isometry by {defect:.3e}",
                defect, tol_iso,
            )
        w = X.weights[chain]
        mass = float(w.sum())
        if mass <= 0 or t[-1] <= 0:
            continue
        density = _needle_density(t, w, resample_m)
        needles.append(Needle(chain, t, density, mass, w, defect))

    leftover = unproc | ~in_T
    return needles, leftover


@dataclass(frozen=True)
class NeedleRecord:
    index: int
    n_points: int
    length: float
    quotient_weight: float
    zero_mean_defect: float
    cd: CDCheckResult
    mcp: MCPReport
    iso_defect: float


@dataclass(frozen=True)
class NeedleReport:
    records: list[NeedleRecord]
    total_quotient: float
    z_mass_f: float              # sum of |f| w over points outside all needles
    z_mass: float                # measure of the off-needle set

    def mass_fraction(self, mean_tol: float, require_cd: bool = True) -> float:
        """Quotient-mass fraction of needles meeting the thresholds."""
        if self.total_quotient <= 0:
            return 0.0
        good = sum(
            r.quotient_weight
            for r in self.records
            if r.zero_mean_defect <= mean_tol and (not require_cd or r.cd.passed)
        )
        return good / self.total_quotient

    @property
    def worst_zero_mean(self) -> float:
        return max((r.zero_mean_defect for r in self.records), default=0.0)


def check_needles(needles: list[Needle], X: FiniteMMS, f: SignedFunction,
                  K: float, N: float, tol: float) -> NeedleReport:
    """Per-needle structural checks: conditional zero mean of f, the 1-D
    curvature inequality on the conditional density, and (for K > 0) the
    sine-ratio bounds."""
    records = []
    covered = np.zeros(X.n, dtype=bool)
    for i, nd in enumerate(needles):
        covered[nd.chain] = True
        mean = float(f.values[nd.chain] @ nd.point_weights) / nd.quotient_weight
        cd = check_cd(nd.density, K, N, tol)
        mcp = mcp_ratio_check(nd.density, K, N)
        records.append(NeedleRecord(
            index=i, n_points=int(nd.chain.size), length=nd.length,
            quotient_weight=nd.quotient_weight, zero_mean_defect=abs(mean),
            cd=cd, mcp=mcp, iso_defect=nd.iso_defect,
        ))
    off = ~covered
    z_mass_f = float(np.abs(f.values[off]) @ X.weights[off])
    z_mass = float(X.weights[off].sum())
    total_q = float(sum(r.quotient_weight for r in records))
    return NeedleReport(records, total_q, z_mass_f, z_mass)


@dataclass(frozen=True)
class D2Report:
    n_tuples: int
    n_violations: int
    worst_violation: float


def check_d2_monotone(S: TransportStructure, X: FiniteMMS,
                      sample: int = 10_000, max_size: int = 4, seed: int = 0,
                      tol: float = 1e-9) -> D2Report:
    """Sample ordered subfamilies of the saturation relation and verify
    d^2-cyclic monotonicity.

    A tuple of saturated pairs qualifies when, pairwise, the potential drops
    of sources and targets are co-monotone; for qualifying tuples no cyclic
    shift of the targets may decrease the sum of squared distances
    (violations beyond tol are counted)."""
    p = S.phi
    gi, gj = np.nonzero(S.sat)
    if gi.size == 0:
        return D2Report(0, 0, 0.0)
    rng = np.random.default_rng(seed)
    n_checked = 0
    n_viol = 0
    worst = 0.0
    d = X.dist
    batch = max(6 * sample, 1024)
    sizes = rng.integers(2, max_size + 1, size=batch)
    draws = rng.integers(0, gi.size, size=(batch, max_size))
    for s_k, row in zip(sizes, draws):
        if n_checked >= sample:
            break
        idx = row[:s_k]
        xs, ys = gi[idx], gj[idx]
        px, py = p[xs], p[ys]
        dxx = px[:, None] - px[None, :]
        dyy = py[:, None] - py[None, :]
        if np.any(dxx * dyy < 0):
            continue
        n_checked += 1
        base = float((d[xs, ys] ** 2).sum())
        for r in range(1, s_k):
            shifted = float((d[xs, np.roll(ys, r)] ** 2).sum())
            excess = base - shifted
            if excess > tol:
                n_viol += 1
                worst = max(worst, excess)
    return D2Report(n_checked, n_viol, worst)
