"""Isoperimetric comparison toolkit for curvature-dimension spaces.

Computes sharp 1-D model profiles, checks synthetic curvature conditions for
densities on an interval, performs exact L1 optimal transport and discrete
needle decomposition on finite metric measure spaces, and runs the
comparison / rigidity verification harnesses.
"""

from .coeffs import ProfileParams, c_delta, s_delta, sigma, tau
from .density1d import (
    Density1D,
    IntervalSet,
    check_cd,
    measure,
    minkowski_content,
    mollify,
    named_density,
)
from .errors import ChainIsometryError, DomainError, ResourceBudgetError, SolverError
from .iso1d import IsoResult, profile_bruteforce, profile_structured
from .l1ot import Potential, SignedFunction, solve_plan, solve_potential
from .mms import (
    FiniteMMS,
    covering_radius,
    enlarge,
    gen_interval,
    gen_sphere,
    gen_suspension,
    minkowski_discrete,
    minkowski_ladder,
)
from .model_profiles import (
    ModelDensitySpec,
    case3_closed_form,
    jacobian_density,
    model_profile,
    profile_curve,
)
from .needles import (
    Needle,
    TransportStructure,
    build_structure,
    check_d2_monotone,
    check_needles,
    extract_needles,
)
from .verify import (
    compare_profile,
    diameter_gap,
    needle_lower_bound,
    profile_continuity_in_delta,
    rigidity_cap_check,
)

__version__ = "0.1.0"
