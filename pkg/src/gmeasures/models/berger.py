"""The everywhere-discontinuous density-class g-function.

The probability of a 1 is ``p_low`` when the upper density of ones in the
past exceeds ``threshold`` and ``p_high`` otherwise, so each class pushes
the chain towards the other one.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from ..core import LogWeight, PastLike
from ..errors import ValidationError
from .base import Certificate, GModel, Stepper, binary_dist


class _ClassStepper(Stepper):
    def __init__(self, model, dense: bool):
        self.model = model
        self.dense = dense

    def dist(self):
        return binary_dist(self.model.p_low if self.dense else self.model.p_high)

    def push(self, a: int) -> None:
        pass  # finite additions never change the tail density


class BergerModel(GModel):
    family = "berger"

    def __init__(self, p_high: float = 0.7, p_low: float = 0.3, threshold: float = 0.5):
        for v in (p_high, p_low):
            if not 0.0 < v < 1.0:
                raise ValidationError("Berger probabilities must lie in (0, 1)")
        self.p_high = float(p_high)
        self.p_low = float(p_low)
        self.threshold = float(threshold)

    def dense(self, past: PastLike) -> bool:
        return past.upper_density(1) > self.threshold

    def dist(self, past: PastLike):
        return binary_dist(self.p_low if self.dense(past) else self.p_high)

    def stepper(self, past: PastLike):
        return _ClassStepper(self, self.dense(past))

    def context_length(self, past: PastLike):
        return math.inf

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        # a past in the other class agrees with any prescribed finite suffix
        return abs(self.p_high - self.p_low)

    def sup_gn(self, w) -> LogWeight:
        w = self.alphabet.check_word(w)
        ones = sum(w)
        zeros = len(w) - ones
        best = max(
            ones * math.log(p) + zeros * math.log1p(-p) for p in (self.p_high, self.p_low)
        )
        return LogWeight(best, exact=True, note="maximum over the two density classes")

    def log_sup_sum(self, n: int):
        """``log sum_{w in A^n} sup g_n`` grouped by the number of ones."""
        terms = [
            math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
            + max(k * math.log(p) + (n - k) * math.log1p(-p) for p in (self.p_high, self.p_low))
            for k in range(n + 1)
        ]
        return float(logsumexp(terms)), True

    def inf_g(self) -> float:
        return min(self.p_high, self.p_low, 1 - self.p_high, 1 - self.p_low)

    def enumerate_contexts(self, n: int) -> set:
        self.check_enumeration(n)
        return set(self.alphabet.words(n))

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        return self.enumerate_contexts(n)

    def count_contexts(self, n: int) -> int:
        self.check_enumeration(n)
        return 2 ** n

    def count_discontinuity_prefixes(self, n: int) -> int:
        return self.count_contexts(n)

    def in_tau(self, word) -> bool:
        return True

    def overflow_indicators(self, symbols) -> np.ndarray:
        return np.ones(len(symbols), dtype=bool)

    def discontinuity_is_empty(self) -> bool:
        return False

    def growth_certificate(self):
        return Certificate(2.0, "exact", "every past is an infinite context: tau^n = A^n")

    def pressure_certificate(self):
        return Certificate(
            0.0, "exact",
            "D_g^n = A^n; the sum of sup-products lies in [1, 2] (one class gives a probability "
            "distribution, two classes at most double it), so (1/n) log of it tends to 0",
        )

    def v_free_certificate(self, v):
        return False, "D_g is all of X^-: every word occurs"

    def reduce(self, past: PastLike, horizon: int):
        return self.dense(past)

    def simulate(self, past: PastLike, uniforms: np.ndarray) -> np.ndarray:
        uniforms = np.atleast_2d(uniforms)
        p1 = self.p_low if self.dense(past) else self.p_high
        return (uniforms >= 1.0 - p1).astype(np.int8)

    def descriptor(self) -> dict:
        return {"family": "berger", "p_high": self.p_high, "p_low": self.p_low,
                "threshold": self.threshold}

    @classmethod
    def from_descriptor(cls, d: dict) -> "BergerModel":
        return cls(float(d.get("p_high", 0.7)), float(d.get("p_low", 0.3)),
                   float(d.get("threshold", 0.5)))
