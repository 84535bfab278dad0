"""Satisfiability of quantifier-free Boolean set theory with a constructor-based operator."""
from .formula import (And, Atom, Diff, Iff, Implies, Neq, Not, NormalizedConjunction, Op, Or,
                      ParseError, Union, conjunction, free_vars, normalize, parse, to_text)
from .fulfillment import (Certificate, MalformedCertificate, StepCounter, check_fulfillment,
                          decide, decide_formula, verify_certificate)
from .operators import OTIMES, POW, TIMES, OperatorSpec, default_registry, register
from .verdict import FiniteModel, GraphWitness, Verdict

__version__ = "0.1.0"
