"""Generalized renewal chains with a look-back window behind the last 1.

With ``j = l1(x)`` and ``v`` the ``h(j)`` symbols preceding the last 1,
``g(x1) = s_j + kappa (1 - s_j) * (fraction of ones in v)``.  So
``s_j <= g <= r_j = s_j + kappa (1 - s_j)`` and the context has length
``H(j) = j + h(j)``.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import LogWeight, PastLike
from ..errors import ValidationError
from ..qrules import Affine, QRule, qrule_from_descriptor
from .base import Certificate, GModel, binary_dist


class GeneralizedRenewalModel(GModel):
    """Parameters
    ----------
    s : QRule
        Lower envelope ``s_j``.
    delta, c1 : float, int
        Window size ``h(j) = floor(c1 * j**delta)``.
    kappa : float
        Spread between ``s_j`` and ``r_j``.
    s_inf : float
        Value at the all-zero past.
    """

    family = "generalized_renewal"

    def __init__(self, s: QRule, delta: float = 1.0, c1: int = 1, kappa: float = 0.5, s_inf: float = 0.5):
        if delta <= 0:
            raise ValidationError("delta must be positive")
        if int(c1) != c1 or c1 < 1:
            raise ValidationError("c1 must be a positive integer")
        if not 0.0 <= kappa <= 1.0:
            raise ValidationError("kappa must lie in [0, 1]")
        if not 0.0 < s_inf < 1.0:
            raise ValidationError("s_inf must lie in (0, 1)")
        self.s = s
        self.r = Affine(s, kappa)
        self.delta = float(delta)
        self.c1 = int(c1)
        self.kappa = float(kappa)
        self.s_inf = float(s_inf)

    # -- window arithmetic ----------------------------------------------------
    def h(self, j: int) -> int:
        if j <= 0:
            return 0
        return int(math.floor(self.c1 * j ** self.delta + 1e-9))

    def H(self, j: int) -> int:
        return j + self.h(j)

    def H_inverse(self, i: int) -> int:
        """``max{j >= 0 : H(j) <= i}`` by bisection on the increasing H."""
        lo, hi = 0, max(i, 0) + 1  # H(j) >= j, so j <= i
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.H(mid) <= i:
                lo = mid
            else:
                hi = mid
        return lo

    def H_inverse_array(self, i_max: int) -> np.ndarray:
        """``H_inverse(i)`` for ``i = 0..i_max`` via one sorted table of H."""
        j = np.arange(0, i_max + 2, dtype=np.float64)
        Hj = j + np.floor(self.c1 * j ** self.delta + 1e-9)
        Hj[0] = 0
        return np.searchsorted(Hj, np.arange(i_max + 1), side="right") - 1

    # -- evaluation ------------------------------------------------------------
    def _p1(self, past: PastLike, j) -> float:
        if j == math.inf:
            return self.s_inf
        hj = self.h(j)
        sj = self.s.value(j)
        if hj == 0 or self.kappa == 0:
            return sj
        ones = sum(past.at(-(j + m)) for m in range(1, hj + 1))
        return sj + self.kappa * (1.0 - sj) * ones / hj

    def dist(self, past: PastLike):
        return binary_dist(self._p1(past, past.distance_to_last(1)))

    def context_length(self, past: PastLike):
        j = past.distance_to_last(1)
        return math.inf if j == math.inf else self.H(j)

    def _value_at(self, j, frac):
        sj = self.s.value(j)
        return sj + self.kappa * (1.0 - sj) * frac

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        j = past.distance_to_last(1)
        g = self._p1(past, j)
        if j != math.inf and l >= self.H(j):
            return 0.0
        if j != math.inf and l >= j:
            hj = self.h(j)
            known = l - j
            ones = sum(past.at(-(j + m)) for m in range(1, known + 1))
            lo = self._value_at(j, ones / hj)
            hi = self._value_at(j, (ones + hj - known) / hj)
            return max(abs(hi - g), abs(g - lo))
        hi = max(self.r.tail_sup(l + 1), self.s_inf)
        lo = min(self.s.tail_inf(l + 1), self.s_inf)
        return max(abs(hi - g), abs(g - lo))

    def inf_g(self) -> float:
        lo = min(self.s.tail_inf(1), self.s_inf)
        hi = max(self.r.tail_sup(1), self.s_inf)
        return min(lo, 1.0 - hi)

    def sup_gn(self, w) -> LogWeight:
        """Product of per-factor suprema: a certified upper bound."""
        w = self.alphabet.check_word(w)
        total = 0.0
        exact = True
        for t, a in enumerate(w):
            last = max((i for i in range(t) if w[i] == 1), default=None)
            if last is not None:
                j = t - last
                hj = self.h(j)
                inside = [w[last - m] for m in range(1, hj + 1) if last - m >= 0]
                free = hj - len(inside)
                if free == 0 or self.kappa == 0:
                    p = self._value_at(j, sum(inside) / hj if hj else 0.0)
                    total += math.log(p if a == 1 else 1.0 - p)
                    continue
                exact = False
                lo = self._value_at(j, sum(inside) / hj)
                hi = self._value_at(j, (sum(inside) + free) / hj)
            else:
                exact = False
                lo = min(self.s.tail_inf(t + 1), self.s_inf)
                hi = max(self.r.tail_sup(t + 1), self.s_inf)
            best = hi if a == 1 else 1.0 - lo
            if best <= 0:
                return LogWeight(-math.inf, exact=True)
            total += math.log(best)
        note = "exact: every factor is determined by w" if exact else "product of per-factor suprema"
        return LogWeight(total, exact=exact, note=note)

    # -- enumeration ------------------------------------------------------------
    def _tau_gaps(self, n: int):
        return [j for j in range(1, n + 1) if self.H(j) > n]

    def enumerate_contexts(self, n: int) -> set:
        self.check_enumeration(n)
        out = {(0,) * n}
        for j in self._tau_gaps(n):
            tail = (1,) + (0,) * (j - 1)
            for head in self.alphabet.words(n - j):
                out.add(tuple(head) + tail)
        return out

    def count_contexts(self, n: int) -> int:
        return 1 + sum(2 ** (n - j) for j in self._tau_gaps(n))

    def in_tau(self, word) -> bool:
        word = tuple(word)
        n = len(word)
        for j in range(1, n + 1):
            if word[n - j] == 1:
                return self.H(j) > n
        return True

    def overflow_indicators(self, symbols) -> np.ndarray:
        y = [int(a) for a in symbols]
        out = np.zeros(len(y), dtype=bool)
        last = None
        for n in range(1, len(y) + 1):
            if y[n - 1] == 1:
                last = n - 1
            out[n - 1] = True if last is None else self.H(n - last) > n
        return out

    def _zero_discontinuous(self) -> bool:
        lim = self.s.limit
        return self.kappa > 0 or lim is None or lim != self.s_inf

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        self.check_enumeration(n)
        return {(0,) * n} if self._zero_discontinuous() else set()

    def discontinuity_is_empty(self) -> bool:
        return not self._zero_discontinuous()

    def growth_certificate(self):
        # |tau^n| = 1 + sum_{j <= n, H(j) > n} 2^{n-j} ~ 2^{n - H_inverse(n)}
        if self.delta > 1:
            return Certificate(2.0, "exact", "h(j)/j -> infinity: H_inverse(n)/n -> 0")
        if self.delta == 1:
            return Certificate(2.0 ** (self.c1 / (1.0 + self.c1)), "exact",
                               "H(j) = (1 + c1) j: H_inverse(n)/n -> 1/(1 + c1)")
        return Certificate(1.0, "exact", "h(j) = o(j): H_inverse(n)/n -> 1")

    def pressure_certificate(self):
        if not self._zero_discontinuous():
            return Certificate(-math.inf, "exact", "continuous at the all-zero past: D_g is empty")
        lim = self.s.limit
        if lim is None:
            return None
        rate = max(math.log1p(-self.s_inf), math.log1p(-lim) if lim < 1 else -math.inf)
        return Certificate(rate, "exact",
                           "D_g = {0-bar}; along long zero runs the factors approach 1 - lim s")

    def v_free_certificate(self, v):
        if not self._zero_discontinuous():
            return True, "D_g is empty"
        if any(a != 0 for a in v):
            return True, "D_g = {0-bar} contains only zeros"
        return False, "D_g = {0-bar} contains every all-zero word"

    def reduce(self, past: PastLike, horizon: int):
        j = past.distance_to_last(1)
        if j == math.inf:
            return ("zero",)
        keep = max(self.H(horizon + 1), j + self.h(j + horizon + 1))
        return past.last(keep)

    def sr_rules(self):
        return self.s, self.r

    def descriptor(self) -> dict:
        return {"family": "generalized_renewal", "s": self.s.descriptor(), "delta": self.delta,
                "c1": self.c1, "kappa": self.kappa, "s_inf": self.s_inf}

    @classmethod
    def from_descriptor(cls, d: dict) -> "GeneralizedRenewalModel":
        return cls(qrule_from_descriptor(d.get("s", {"kind": "power", "alpha": 3.0})),
                   float(d.get("delta", 1.0)), int(d.get("c1", 1)), float(d.get("kappa", 0.5)),
                   float(d.get("s_inf", 0.5)))
