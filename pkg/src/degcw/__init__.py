"""Degenerate Chern-Weil theory: Weil/Cartan models, degenerate curvature,
the chain map r_f, transgressions and fixed-point localization checks."""

from .cartan import EqForm, cartan_D, check_invariance, project_to_torus
from .dcw import (apply_cw_f, apply_r_f, degenerate_curvature, metric_connection,
                  transgress_form, transgress_invariant_poly)
from .liealg import LieAlgebraSpec, bracket, build_lie_algebra
from .localize import LaurentU, jk_residue_check, kalkman_sides, su2_boundary_sides, fixed_point_sum
from .pipoly import PiPoly
from .suites import Settings, run_suite
from .weil import (WeilElement, basic_basis, casimir, invariant_polynomials, weil_contract,
                   weil_d, weil_lie)

__all__ = [
    "EqForm", "LaurentU", "LieAlgebraSpec", "PiPoly", "Settings", "WeilElement", "apply_cw_f",
    "apply_r_f", "basic_basis", "bracket", "build_lie_algebra", "cartan_D", "casimir",
    "check_invariance", "degenerate_curvature", "invariant_polynomials", "jk_residue_check",
    "kalkman_sides", "metric_connection", "project_to_torus", "run_suite", "su2_boundary_sides",
    "fixed_point_sum", "transgress_form", "transgress_invariant_poly", "weil_contract", "weil_d",
    "weil_lie",
]
