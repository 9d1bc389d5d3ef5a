"""Exception taxonomy with machine-readable codes and CLI exit statuses."""

from __future__ import annotations


class GMeasureError(Exception):
    """Base class for all library errors."""

    code = "error"
    exit_status = 1

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ValidationError(GMeasureError, ValueError):
    """Bad input: malformed configuration, symbol outside the alphabet, etc."""

    code = "validation"
    exit_status = 2


class ResourceCapError(GMeasureError):
    """An exact computation or enumeration would exceed its configured cap."""

    code = "resource_cap"
    exit_status = 3


class OrderingViolation(GMeasureError):
    """Coupled kernels were observed out of order on a visited state pair."""

    code = "ordering_violated"
    exit_status = 4

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["witness"] = self.witness
        return out


class ConstructionMismatch(GMeasureError):
    """A tree construction disagrees with its closed form (a bug, never data)."""

    code = "construction_mismatch"
    exit_status = 5


class CapabilityError(GMeasureError):
    """The model family does not provide the requested capability."""

    code = "capability"
    exit_status = 6


class NotApplicable(CapabilityError):
    """The operation's preconditions do not hold for this input."""

    code = "not_applicable"


class UndefinedResidual(NotApplicable):
    """Compatibility residual requested on a zero-probability conditioning word."""

    code = "undefined_residual"
