"""Model families and the JSON descriptor registry."""

from __future__ import annotations

from ..errors import ValidationError
from .base import Certificate, GModel, inverse_cdf
from .berger import BergerModel
from .generalized import GeneralizedRenewalModel
from .renewal import RenewalModel
from .spinflip import SpinFlipFactor
from .tabulated import TabulatedTree
from .trunk import TrunkTreeModel

FAMILIES = {
    "renewal": RenewalModel,
    "tabulated": TabulatedTree,
    "generalized_renewal": GeneralizedRenewalModel,
    "berger": BergerModel,
    "trunk": TrunkTreeModel,
    "spinflip": SpinFlipFactor,
}


def model_from_descriptor(d) -> GModel:
    """Build a model from ``{"family": ..., <parameters>}``."""
    if isinstance(d, GModel):
        return d
    if not isinstance(d, dict) or "family" not in d:
        raise ValidationError(f"model descriptor needs a 'family' field: {d!r}")
    cls = FAMILIES.get(d["family"])
    if cls is None:
        raise ValidationError(f"unknown model family {d['family']!r}; known: {sorted(FAMILIES)}")
    try:
        return cls.from_descriptor(d)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad {d['family']} descriptor: {exc}") from None


__all__ = [
    "BergerModel", "Certificate", "FAMILIES", "GModel", "GeneralizedRenewalModel", "RenewalModel",
    "SpinFlipFactor", "TabulatedTree", "TrunkTreeModel", "inverse_cdf", "model_from_descriptor",
]
