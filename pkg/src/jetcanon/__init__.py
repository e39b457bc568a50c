"""Canonical transformations of Hamiltonian evolution equations on jet bundles."""

from .canon import (CanonReport, CompCoeffTable, Condition, CrossValidation, check_canonical,
                    check_case1, check_case2, check_case3, comp_coeff, cross_validate,
                    detect_case, reduced_case3_residuals)
from .errors import (JetError, NonCanonicalError, OrderLimitError, ParseError, ShapeError,
                     SingularError, UnknownIdentifier)
from .evosys import (EvoSystem, rhs, transform_claw, transform_system,
                     verify_conservation_law)
from .jetspace import Bundle, euler_lagrange, is_total_divergence, total_derivative
from .manifest import Manifest, ManifestError, load_manifest, parse_manifest
from .poisson import DiffOperator, apply_operator, bracket_density, equal_mod_divergence
from .pullback import (Automorphism, Prolongation, chain_rule_residuals, prolong,
                       pullback_expr, transform_functional, verify_lemma1)
from .symexpr import ONE, ZERO, Expr, Symbol, render

__all__ = [
    "Automorphism", "Bundle", "CanonReport", "CompCoeffTable", "Condition", "CrossValidation",
    "DiffOperator", "EvoSystem", "Expr", "JetError", "Manifest", "ManifestError",
    "NonCanonicalError", "ONE", "OrderLimitError", "ParseError", "Prolongation", "ShapeError",
    "SingularError", "Symbol", "UnknownIdentifier", "ZERO", "apply_operator", "bracket_density",
    "chain_rule_residuals", "check_canonical", "check_case1", "check_case2", "check_case3",
    "comp_coeff", "cross_validate", "detect_case", "equal_mod_divergence", "euler_lagrange",
    "is_total_divergence", "load_manifest", "parse_manifest", "prolong", "pullback_expr",
    "reduced_case3_residuals", "render", "rhs", "total_derivative", "transform_claw",
    "transform_functional", "transform_system", "verify_conservation_law", "verify_lemma1",
]
