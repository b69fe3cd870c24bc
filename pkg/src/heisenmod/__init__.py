"""Numerics for quantum 2-torus algebras, Heisenberg modules, D-norms and
modular bridge length estimates."""

from .qtorus import (NormInterval, TorusElement, RNorm, EUCLIDEAN, cocycle,
                     twisted_product, involution, beta_act, fejer_truncate,
                     gns_matrix, torus_norm, l_seminorm, monomial, unit,
                     serialize, deserialize)
from .schwartz import SchwartzVector, QuadratureSpec, gaussian, l2_inner, l2_norm
from .heisenberg import (ModuleParams, clock_shift, alpha_act, weyl_act,
                         varpi_act, module_left_act, smeared_weyl, Grid2D)
from .hmodule import (InnerProductResult, DNormEstimate, GridSpec,
                      module_inner, module_norm, omega_quotient, dnorm,
                      mk_modular_metric_lower, imprint_estimate)
from .specfun import (RadialProfile, AnchorFamily, laguerre, psi, hermite_fn,
                      hermite_vector, bump_profile, cesaro_sum, l1_rdr_error,
                      anchor_family)
from .bridge import (PivotSpec, ModularBridge, BridgeLengthReport, bridge_norm,
                     modular_reach, basic_length_estimate, bridge_length,
                     rescaled_co_anchors)

__version__ = "0.1.0"
