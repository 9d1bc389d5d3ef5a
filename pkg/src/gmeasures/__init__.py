"""g-measures and variable-length memory chains: models, exact and Monte Carlo
measures, executable existence criteria and explicit context-tree constructions."""

from __future__ import annotations

__version__ = "0.1.0"

from .core import BINARY, SPINS, Alphabet, AnchoredPast, LogWeight, PastBuffer, coerce_past
from .errors import (
    CapabilityError, ConstructionMismatch, GMeasureError, NotApplicable, OrderingViolation,
    ResourceCapError, UndefinedResidual, ValidationError,
)
from .models import (
    BergerModel, GeneralizedRenewalModel, GModel, RenewalModel, SpinFlipFactor, TabulatedTree,
    TrunkTreeModel, model_from_descriptor,
)
from .qrules import Alternating, Constant, Harmonic, Power, Table, survival_sum

__all__ = [
    "Alphabet", "Alternating", "AnchoredPast", "BINARY", "BergerModel", "CapabilityError", "Constant",
    "ConstructionMismatch", "GMeasureError", "GModel", "GeneralizedRenewalModel", "Harmonic", "LogWeight",
    "NotApplicable", "OrderingViolation", "PastBuffer", "Power", "RenewalModel", "ResourceCapError", "SPINS",
    "SpinFlipFactor", "Table", "TabulatedTree", "TrunkTreeModel", "UndefinedResidual", "ValidationError",
    "coerce_past", "model_from_descriptor", "survival_sum",
]
