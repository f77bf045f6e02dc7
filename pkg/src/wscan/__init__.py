"""wscan: second-order quantifier elimination on clause sets, with witnesses.

Given a clause set N over predicate variables X1..Xn, the solver searches for
a derivation that eliminates every predicate variable and extracts a predicate
substitution sigma such that  exists X1..Xn. N  is equivalent to  N*sigma.
"""

from .logic import (
    App,
    Clause,
    Formula,
    Lit,
    PointedClause,
    PredExpr,
    Term,
    Var,
    const,
)
from .problems import Problem, parse_problem
from .saturation import Derivation, search, replay
from .witness import Witness, extract_witness

__all__ = [
    "App",
    "Clause",
    "Derivation",
    "Formula",
    "Lit",
    "PointedClause",
    "PredExpr",
    "Problem",
    "Term",
    "Var",
    "Witness",
    "const",
    "extract_witness",
    "parse_problem",
    "replay",
    "search",
]
