"""The g-function capability interface shared by every model family."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import BINARY, LOG_ZERO, Alphabet, AnchoredPast, LogWeight, PastBuffer, PastLike
from ..errors import CapabilityError, ResourceCapError, ValidationError

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class Certificate:
    """An analytic statement backing a limsup/limit value.

    ``kind`` is ``"exact"`` when ``value`` is the limit itself and
    ``"upper"`` when it is only an upper bound.
    """

    value: float
    kind: str
    reason: str

    def to_dict(self) -> dict:
        v = self.value
        return {"value": v if math.isfinite(v) else str(v), "kind": self.kind, "reason": self.reason}


def inverse_cdf(dist, u: float) -> int:
    """Smallest symbol ``a`` with ``u < dist[0] + ... + dist[a]``."""
    acc = 0.0
    last = len(dist) - 1
    for a in range(last):
        acc += dist[a]
        if u < acc:
            return a
    return last


class Stepper:
    """Incremental evaluator: ``dist()`` for the current past, ``push`` a symbol."""

    def __init__(self, model: "GModel", past: PastLike):
        self.model = model
        base, tail = past.split()
        self.buf = PastBuffer(base, tail)

    def dist(self):
        return self.model.dist(self.buf)

    def push(self, a: int) -> None:
        self.buf.push(a)


class GModel:
    """Base class; families override what they can compute.

    Attributes
    ----------
    alphabet : Alphabet
    enumeration_cap : int
        Largest ``n`` accepted by the context / discontinuity enumerations.
    """

    family = "abstract"
    alphabet: Alphabet = BINARY
    enumeration_cap = 24
    is_context_tree = True

    # -- evaluation ---------------------------------------------------------
    def dist(self, past: PastLike) -> tuple:
        raise NotImplementedError

    def eval(self, past: PastLike, a: int) -> float:
        a = self.alphabet.check_symbol(a)
        return self.dist(past)[a]

    def stepper(self, past: PastLike) -> Stepper:
        return Stepper(self, past)

    def g_n_log(self, past: PastLike, w) -> float:
        w = self.alphabet.check_word(w)
        st = self.stepper(past)
        total = 0.0
        for a in w:
            p = st.dist()[a]
            if p <= 0.0:
                return LOG_ZERO
            total += math.log(p)
            st.push(a)
        return total

    def context_length(self, past: PastLike) -> float:
        raise CapabilityError(f"{self.family} does not expose context_length")

    def variation(self, past: PastLike, l: int) -> float:
        raise CapabilityError(f"{self.family} does not expose variation")

    def sup_gn(self, w) -> LogWeight:
        raise CapabilityError(f"{self.family} does not expose sup_gn")

    def inf_g(self) -> float:
        raise CapabilityError(f"{self.family} does not expose inf_g")

    # -- enumeration --------------------------------------------------------
    def check_enumeration(self, n: int) -> None:
        if n < 1:
            raise ValidationError("enumeration depth must be >= 1")
        if n > self.enumeration_cap:
            raise ResourceCapError(
                f"enumeration depth {n} exceeds cap {self.enumeration_cap}; raise enumeration_cap explicitly"
            )

    def enumerate_contexts(self, n: int) -> set:
        raise CapabilityError(f"{self.family} does not enumerate contexts")

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        raise CapabilityError(f"{self.family} does not enumerate discontinuities")

    def count_contexts(self, n: int) -> int:
        return len(self.enumerate_contexts(n))

    def count_discontinuity_prefixes(self, n: int) -> int:
        return len(self.enumerate_discontinuity_prefixes(n))

    def in_tau(self, word) -> bool:
        """True when ``word`` (read as x_{-n}^{-1}) lies in tau^n."""
        return tuple(word) in self.enumerate_contexts(len(word))

    def overflow_indicators(self, symbols) -> np.ndarray:
        """``out[n-1] = [y_0^{n-1} in tau^n]`` for ``n = 1..len(symbols)``."""
        y = tuple(int(a) for a in symbols)
        return np.array([self.in_tau(y[:n]) for n in range(1, len(y) + 1)], dtype=bool)

    # -- certificates -------------------------------------------------------
    def growth_certificate(self):
        """Certificate for ``limsup |tau^n|^{1/n}`` or None."""
        return None

    def pressure_certificate(self):
        """Certificate for the pressure of the discontinuity set or None."""
        return None

    def v_free_certificate(self, v):
        """``(holds, reason)`` for v-freeness of D_g, or None."""
        return None

    def discontinuity_is_empty(self) -> bool | None:
        return None

    # -- exact engine / simulation support ----------------------------------
    def reduce(self, past: PastLike, horizon: int):
        """Key such that pasts with equal keys have identical futures for
        ``horizon`` more steps.  The default keeps the full canonical past."""
        return past.materialize()

    def simulate(self, past: PastLike, uniforms: np.ndarray) -> np.ndarray:
        """Inverse-CDF simulation, one row of ``uniforms`` per replica."""
        uniforms = np.atleast_2d(uniforms)
        R, T = uniforms.shape
        out = np.empty((R, T), dtype=np.int8)
        for r in range(R):
            st = self.stepper(past)
            row = uniforms[r]
            for t in range(T):
                a = inverse_cdf(st.dist(), row[t])
                out[r, t] = a
                st.push(a)
        return out

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.descriptor()})"


def check_distribution(dist, alphabet: Alphabet, what: str = "distribution") -> tuple:
    dist = tuple(float(x) for x in dist)
    if len(dist) != alphabet.size:
        raise ValidationError(f"{what} has {len(dist)} entries for alphabet of size {alphabet.size}")
    if any(not (0.0 <= x <= 1.0) for x in dist):
        raise ValidationError(f"{what} has entries outside [0, 1]: {dist}")
    if abs(math.fsum(dist) - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(f"{what} sums to {math.fsum(dist)!r}, not 1")
    return dist


def binary_dist(p1: float) -> tuple:
    return (1.0 - p1, p1)


def anchored(past: PastLike) -> AnchoredPast:
    return past.materialize()
