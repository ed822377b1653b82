"""Lie point and Noether symmetry analysis of y^(2n) + f(y) = 0."""

from .calculus import OrderBound, higher_euler, is_total_derivative, total_derivative
from .determining import classify, classify_power, determining_system, determining_system_n1
from .equation import Constant, EquationSpec, Exponential, Linear, Power, Symbolic, critical_power, substitute_on_solutions
from .grammar import ParseError, parse
from .jet import JetExpr, jet, param
from .noether import first_integral_catalog, make_lagrangian, noether_check, noether_operator_integral
from .numerics import SolutionFamily, drift, eval_family, integrate
from .symmetry import PointTransformation, VectorField, apply_transformation, catalog, invariance_check, prolong

__version__ = "0.1.0"
