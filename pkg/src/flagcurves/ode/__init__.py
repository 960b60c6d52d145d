"""Front end for scalar ODEs of order >= 3."""
from .expr import (Binary, Const, DomainError, Expr, ExprSyntaxError, Unary, Var, compile_expr,
                   differentiate, evaluate, parse_expr, simplify, to_string)
from .solve import (CONFORMAL, G2, NONE, SYMPLECTIC, LinearizationPath, OdeProblem, SolutionGrid,
                    StructureVerdict, default_initial_conditions, fundamental_frame,
                    generalized_wilczynski, integrate_ode, linearize, structure_verdict)

__all__ = [
    "Binary", "Const", "DomainError", "Expr", "ExprSyntaxError", "Unary", "Var", "compile_expr",
    "differentiate", "evaluate", "parse_expr", "simplify", "to_string",
    "CONFORMAL", "G2", "NONE", "SYMPLECTIC", "LinearizationPath", "OdeProblem", "SolutionGrid",
    "StructureVerdict", "default_initial_conditions", "fundamental_frame", "generalized_wilczynski",
    "integrate_ode", "linearize", "structure_verdict",
]
