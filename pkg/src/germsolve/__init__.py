"""Order-by-order solving of F(x, y) = 0 over truncated power-series rings."""

from .series import Q, TOP, DomainError, Ring, SeriesVec, StructuralError, TruncSeries, format_series, format_vec
from .modfilt import FiltrationSpec, IdealT, PolyMatrix, SubmoduleT, ann_coker, maximal_minors
from .solver import (EquationSystem, Obstruction, SolutionTrace, check_uniqueness, decompose_equation,
                     solve_order_by_order, verify_higher_order)
from .certify import check_certificate, search_maximal_J
from .deform import MatrixFamily, PolyFamily, eigenvalue_deformation, root_deformation
from .jetgroup import JetAutomorphism, TangentVector, determinacy_bound, jet_exp, jet_ln, orbit_lift, tangent_space
from .parser import ParseError, parse_problem, parse_series

__version__ = "0.1.0"
