"""Spacelike and timelike minimal surfaces in Lorentz-Minkowski 3-space from Enneper data."""

from .enneper import (
    SPACELIKE,
    TIMELIKE,
    CausalCharacter,
    DomainSpec,
    EnneperData,
    Exclusion,
    Immersion,
    PolarChart,
    WeierstrassData,
    epicycloid_family,
    from_weierstrass,
    immerse_closed,
    immerse_integral,
    immerse_path,
    recover,
    scale_transform,
    to_weierstrass,
    validate,
)
from .expr import deriv, eval_with_deriv, evaluate, parse
from .kalgebra import COMPLEX, LORENTZ, AlgebraTag, KScalar
from .verify import ImplicitEquation, verify_immersion

__version__ = "0.1.0"

__all__ = [
    "COMPLEX", "LORENTZ", "SPACELIKE", "TIMELIKE", "AlgebraTag", "CausalCharacter",
    "DomainSpec", "EnneperData", "Exclusion", "ImplicitEquation", "Immersion", "KScalar",
    "PolarChart", "WeierstrassData", "deriv", "epicycloid_family", "eval_with_deriv",
    "evaluate", "from_weierstrass", "immerse_closed", "immerse_integral", "immerse_path",
    "parse", "recover", "scale_transform", "to_weierstrass", "validate", "verify_immersion",
]
