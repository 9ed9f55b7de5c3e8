"""Distortion coefficients and trigonometric model functions.

Everything downstream (1-D curvature checks, model Jacobian densities,
profile comparisons) reduces to the four-branch coefficient ``sigma``,
its dimension-weighted companion ``tau``, and the generalized sine /
cosine pair ``s_delta`` / ``c_delta``.  All functions are pure scalar
maps; the infinite branch is represented by ``math.inf`` so that it is
absorbing under min/comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "ProfileParams",
    "sigma",
    "tau",
    "s_delta",
    "c_delta",
]

# Below this magnitude of theta*sqrt(|K|/N) the sine/sinh ratios are
# evaluated by a 3-term Taylor expansion to avoid cancellation.
_TAYLOR_ARG = 1e-6


@dataclass(frozen=True)
class ProfileParams:
    """Comparison triple: curvature lower bound K, dimension upper bound N,
    diameter bound D (may be ``math.inf``)."""

    K: float
    N: float
    D: float

    def __post_init__(self):
        if not self.N >= 1.0:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if not self.D > 0.0:
            raise DomainError(f"D must be positive, got {self.D}")

    @property
    def effective_diameter(self) -> float:
        """Diameter after the Bonnet-Myers cap for K > 0, N > 1."""
        if self.K > 0.0 and self.N > 1.0:
            return min(self.D, math.pi * math.sqrt((self.N - 1.0) / self.K))
        return self.D


def _ratio_taylor(t: float, s: float) -> float:
    # sin(t x)/sin(x) with s = x^2 (s < 0 encodes the sinh branch); both
    # branches share one expansion in the signed squared argument.
    one_mt2 = 1.0 - t * t
    return t * (1.0 + one_mt2 * s / 6.0 + one_mt2 * (7.0 - 3.0 * t * t) * s * s / 360.0)


def sigma(t: float, theta: float, K: float, N: float) -> float:
    """Distortion coefficient of the reduced curvature-dimension condition.

    Branches, resolved top to bottom:

    * ``K*theta**2 >= N*pi**2``      -> ``inf``
    * ``0 < K*theta**2 < N*pi**2``   -> ``sin(t*theta*sqrt(K/N)) / sin(theta*sqrt(K/N))``
    * ``K*theta**2 < 0 and N == 0``, or ``K*theta**2 == 0`` -> ``t``
    * ``K*theta**2 <= 0 and N > 0``  -> sinh ratio

    Raises :class:`DomainError` for t outside [0, 1], negative theta or
    negative N.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if theta < 0.0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    if N < 0.0:
        raise DomainError(f"N must be nonnegative, got {N}")

    ktheta2 = K * theta * theta
    if ktheta2 >= N * math.pi * math.pi:
        return math.inf
    if ktheta2 == 0.0 or (ktheta2 < 0.0 and N == 0.0):
        return t
    # remaining: either 0 < K theta^2 < N pi^2 (sine) or K theta^2 < 0, N > 0 (sinh)
    s = ktheta2 / N
    if abs(s) < _TAYLOR_ARG * _TAYLOR_ARG:
        return _ratio_taylor(t, s)
    if s > 0.0:
        x = theta * math.sqrt(K / N)
        return math.sin(t * x) / math.sin(x)
    x = theta * math.sqrt(-K / N)
    return math.sinh(t * x) / math.sinh(x)


def tau(t: float, theta: float, K: float, N: float) -> float:
    """Full distortion coefficient: ``t**(1/N) * sigma(t, theta, K, N-1)**((N-1)/N)``.

    ``inf`` from the sigma branch propagates whenever the outer exponent is
    positive (N > 1); for N == 1 the exponent is zero and tau reduces to t.
    """
    if N < 1.0:
        raise DomainError(f"N must be >= 1 for tau, got {N}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if theta < 0.0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    if K * theta * theta == 0.0:
        # sigma is exactly t here; return t rather than t**(1/N) * t**((N-1)/N)
        # so the K = 0 identity holds without rounding.
        return t
    s = sigma(t, theta, K, N - 1.0)
    if N == 1.0:
        return t
    if math.isinf(s):
        return math.inf
    return t ** (1.0 / N) * s ** ((N - 1.0) / N)


def s_delta(t: float, delta: float) -> float:
    """Generalized sine: sin/linear/sinh depending on the sign of delta."""
    if delta > 0.0:
        r = math.sqrt(delta)
        return math.sin(r * t) / r
    if delta < 0.0:
        r = math.sqrt(-delta)
        return math.sinh(r * t) / r
    return t


def c_delta(t: float, delta: float) -> float:
    """Generalized cosine: cos/1/cosh depending on the sign of delta."""
    if delta > 0.0:
        return math.cos(math.sqrt(delta) * t)
    if delta < 0.0:
        return math.cosh(math.sqrt(-delta) * t)
    return 1.0
