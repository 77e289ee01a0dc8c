"""Finite doctrines, comonads on indexed posets, and the Kleisli construction that
adds a constant and an axiom to a doctrine."""

from .errors import DoctrineError
from .order import FinitePoset, MonotoneMap, PowersetPoset, adjoints, lattice_ops, validate_poset
from .category import FiniteCategory, Functor, semilattice_to_category, terminal_category
from .finset import FinSet
from .doctrine import Doctrine, DoctrineMorphism, detect_structure, validate_doctrine, validate_morphism
from .comonad import IndexedPosetComonad, build_kleisli_doctrine, factorize_oplax, validate_comonad
from .reader import (add_axiom, add_constant, build_reader_comonad, compose_constructions_check,
                     conservativity_check, distributive_law_check, extend, factorize_model,
                     interpret_new_constant, transport_report, uniqueness_and_fullness_check)
from .models import lt_add_axiom_iso, powerset_doctrine, powerset_examples, propositional_lt

__version__ = "0.1.0"
