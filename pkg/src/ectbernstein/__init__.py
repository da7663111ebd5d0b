"""Generalized Bernstein operators on exponential-polynomial Chebyshev spaces."""

from .basis import (BernsteinBasis, build_bernstein_basis, collocation_matrix,
                    verify_nonneg, verify_zero_orders)
from .chain import (ChainData, DerivedSpace, Sufficiency, beta_via_recursion,
                    chain_data, compute_ck_dk, compute_w, derived_space,
                    proof_deltas, shift_spectrum, sufficiency_check)
from .errors import *  # noqa: F401,F403
from .expspace import (ExpSpace, Interval, RealBasisFunction, SpaceElement,
                       Spectrum, build_space, deriv_eval, mn_bound,
                       quotient_deriv, verify_ect_heuristic)
from .operator import (BernsteinOperator, ExpansionCoeffs, FeasibilityReport,
                       apply, build_operator, expand_in_basis, ratio_check,
                       residual_report, solve_nodes)

__version__ = "0.1.0"
