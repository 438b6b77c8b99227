"""Contour-integral solver for half-line Sobolev-type evolution equations.

Nine operator families with time-dependent coefficients are solved on x > 0
from explicit contour-integral representations (rational dispersion, symmetry
-map elimination of unknown boundary transforms), cross-checked against an
independent finite-difference reference.
"""

from .assembly import (NumericsOptions, ProblemSpec, SolutionEvaluator,
                       assemble, elimination_report, evaluate, evaluate_grid)
from .dispersion import (AssumptionError, DispersionModel, build_model,
                         validate_resultant)
from .families import FAMILIES, OperatorFamily, resolve_family
from .grids import SolutionGrid
from .oracle import (Grid, compare, fd_solve, manufacture_forcing,
                     manufactured_spec)
from .transforms import HalfLineProfile, half_line_ft

__version__ = "0.1.0"

__all__ = [
    "NumericsOptions", "ProblemSpec", "SolutionEvaluator", "assemble",
    "elimination_report", "evaluate", "evaluate_grid", "AssumptionError",
    "DispersionModel", "build_model", "validate_resultant", "FAMILIES",
    "OperatorFamily", "resolve_family", "SolutionGrid", "Grid", "compare",
    "fd_solve", "manufacture_forcing", "manufactured_spec", "HalfLineProfile",
    "half_line_ft", "__version__",
]
