"""Numerical verification of Simons-type identities and gap theorems for pmc
surfaces in M^n(c) x R, using truncated Taylor jets for exact derivatives."""

from .ambient import ProductSpace, SpaceForm, ambient_curvature, ambient_inner, tangential_project
from .catalog import CatalogSpec, ExpectedValues, list_catalog, make_surface
from .errors import NotApplicable, PmcVerifyError
from .identities import IdentityKind, IdentityReport, evaluate_identity, run_suite
from .jets import Jet
from .surface import GeometricState, Immersion, evaluate_state
from .theorem_gates import GateReport, Theorem, check_gate

__version__ = "0.1.0"

__all__ = [
    "CatalogSpec",
    "ExpectedValues",
    "GateReport",
    "GeometricState",
    "IdentityKind",
    "IdentityReport",
    "Immersion",
    "Jet",
    "NotApplicable",
    "PmcVerifyError",
    "ProductSpace",
    "SpaceForm",
    "Theorem",
    "ambient_curvature",
    "ambient_inner",
    "check_gate",
    "evaluate_identity",
    "evaluate_state",
    "list_catalog",
    "make_surface",
    "run_suite",
    "tangential_project",
]
