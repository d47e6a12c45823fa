"""Groups generated by invertible Mealy automata acting on rooted trees."""

from .automaton import (MealyAutomaton, ParseError, canonical_form, dual_automaton,
                        enumerate_all, inverse_automaton, minimize, moore_dot,
                        parse_recursion, symmetry_reduce, validate_invertible)
from .element import (AffineUnipotent, Element, Finite, Infinite,
                      PowerSelfSection, Ray, RayOrbit, SectionOf, SphericallyTransitive,
                      Unknown, act_ray, finitary_depth, is_spherically_transitive, order,
                      transitive_by_squaring, verify_certificate)
from .group import (GroupHandle, find_relators, finiteness, growth_series, is_abelian,
                    level_quotient_order, nucleus, self_replicating, sf_exponents)
from .presets import preset, preset_indices
from .words import GroupWord

__version__ = "0.1.0"

__all__ = [
    "act_ray",
    "AffineUnipotent",
    "canonical_form",
    "dual_automaton",
    "Element",
    "enumerate_all",
    "find_relators",
    "finitary_depth",
    "Finite",
    "finiteness",
    "GroupHandle",
    "GroupWord",
    "growth_series",
    "Infinite",
    "inverse_automaton",
    "is_abelian",
    "is_spherically_transitive",
    "level_quotient_order",
    "MealyAutomaton",
    "minimize",
    "moore_dot",
    "nucleus",
    "order",
    "parse_recursion",
    "ParseError",
    "PowerSelfSection",
    "preset",
    "preset_indices",
    "Ray",
    "RayOrbit",
    "SectionOf",
    "self_replicating",
    "sf_exponents",
    "SphericallyTransitive",
    "symmetry_reduce",
    "transitive_by_squaring",
    "Unknown",
    "validate_invertible",
    "verify_certificate",
]
