"""Charts, symbolic differential forms, quadrature and scenarios."""
from .dsl import DSLError, DSLSyntaxError, UnknownSymbolError, parse_scalar_expr
from .forms import (Chart, DForm, VectorField, contract_vf, exterior_d, lie_vf, vf_bracket,
                    wedge)
from .scenario import (CATALOG, FixedComponent, Region, Scenario, ScenarioError, load_scenario,
                       parse_scenario, validate_scenario)

__all__ = [
    "CATALOG", "Chart", "DForm", "DSLError", "DSLSyntaxError", "FixedComponent", "Region",
    "Scenario", "ScenarioError", "UnknownSymbolError", "VectorField", "contract_vf",
    "exterior_d", "lie_vf", "load_scenario", "parse_scalar_expr", "parse_scenario",
    "validate_scenario", "vf_bracket", "wedge",
]
