"""Picard-Fuchs systems ``(t - A) dI/dt = B I`` for polynomial Hamiltonians,
with explicit l1 bounds on ``A`` and ``B`` and independent checks."""

__version__ = "0.1.0"

from .errors import (CertificationError, DegreeError, IllConditionedError, NoOvalError,
                     NonIsolatedError, NotBalancedError, NotQuasimonicError, NotRegularError,
                     ParseError, PFError)
from .forms import (DX, DY, RHO, BiPoly, Form1, Form2, exterior_d, format_poly, l1_norm,
                    parse_poly, principal_part, to_backend, wedge)
from .normalization import (SylvesterMap, gradient_floor, is_balanced, is_quasimonic,
                            is_regular_at_infinity, make_balanced, make_quasimonic,
                            normalization_constant, normalization_report, sylvester_map)
from .division import (Certificate, FormDivision, UniDivision, divide_2form, divide_by_dH,
                       divide_homogeneous, divide_top_homogeneous, divide_univariate)
from .pfsystem import (BlockSystem, FormBasis, PFSystem, basis_forms, closedness_defect,
                       derive_doubly_hyperelliptic, derive_hyperelliptic, derive_redundant,
                       derive_redundant_unbalanced, eigen_residuals, extend_block, fuchsianize,
                       witness_defect)
from .validate import (CriticalLocus, PeriodSample, critical_points, gelfand_leray_derivative,
                       hyperelliptic_periods, inverse_sense_check, normalize_sigma, ode_residual,
                       single_value_check)
from .critgeom import (KappaEstimate, UniCritReport, bounded_interval, kappa_estimate,
                       recenter_min_norm, uni_crit)
