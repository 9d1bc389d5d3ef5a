"""Binary renewal chains: g(x1) = q_{l1(x)}, l1 = distance to the last 1."""

from __future__ import annotations

import math

import numpy as np

from ..core import LOG_ZERO, LogWeight, PastLike
from ..errors import ValidationError
from ..qrules import QRule, qrule_from_descriptor
from .base import Certificate, GModel, Stepper, binary_dist

INF_STATE = -1  # integer code for l1 = infinity in vectorized state arrays
SUP_TOL = 1e-12


def _log(x: float) -> float:
    return math.log(x) if x > 0 else LOG_ZERO


class RenewalStepper(Stepper):
    def __init__(self, model: "RenewalModel", past: PastLike):
        self.model = model
        self.l1 = past.distance_to_last(1)

    def dist(self):
        return binary_dist(self.model.p1(self.l1))

    def push(self, a: int) -> None:
        if a == 1:
            self.l1 = 1
        else:
            self.l1 = self.l1 + 1


class RenewalModel(GModel):
    """Renewal g-function.

    Parameters
    ----------
    q : QRule
        ``q_i`` for finite ``l1 = i``.
    q_inf : float
        Probability of a 1 after the all-zero past.
    """

    family = "renewal"

    def __init__(self, q: QRule, q_inf: float = 0.5):
        if not 0.0 <= q_inf <= 1.0:
            raise ValidationError("q_inf must lie in [0, 1]")
        self.q = q
        self.q_inf = float(q_inf)
        self.strictly_interior = (
            0.0 < q.tail_inf(1) and q.tail_sup(1) < 1.0 and 0.0 < self.q_inf < 1.0
        )

    # -- evaluation ---------------------------------------------------------
    def p1(self, l1) -> float:
        return self.q_inf if l1 == math.inf else self.q.value(l1)

    def dist(self, past: PastLike):
        return binary_dist(self.p1(past.distance_to_last(1)))

    def stepper(self, past: PastLike):
        return RenewalStepper(self, past)

    def context_length(self, past: PastLike):
        return past.distance_to_last(1)

    def _tail_range(self, k: int):
        """Range of g(.1) over pasts with l1 >= k (infinity included)."""
        hi = max(self.q.tail_sup(k), self.q_inf)
        lo = min(self.q.tail_inf(k), self.q_inf)
        return lo, hi

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        l1 = past.distance_to_last(1)
        if l >= l1:
            return 0.0
        # pasts agreeing on l trailing zeros have any l1 in {l+1, ..., inf}
        g = self.p1(l1)
        lo, hi = self._tail_range(l + 1)
        return max(abs(hi - g), abs(g - lo))

    def inf_g(self) -> float:
        lo, hi = self._tail_range(1)
        return min(lo, 1.0 - hi)

    def _zero_discontinuous(self) -> bool:
        lim = self.q.limit
        return not (lim is not None and lim == self.q_inf)

    def discontinuity_is_empty(self) -> bool:
        return not self._zero_discontinuous()

    # -- sup-products ---------------------------------------------------------
    def _start_logs(self, k_lo: int, k_hi: int, r: int, closes: bool) -> np.ndarray:
        """log f(k) for k in [k_lo, k_hi]: r zero-factors then maybe a 1."""
        idx = np.arange(k_lo, k_hi + r + 1, dtype=np.int64)
        q = np.asarray(self.q.values(idx), dtype=np.float64)
        with np.errstate(divide="ignore"):
            lz = np.log1p(-q)
            l1 = np.log(q)
        c = np.concatenate(([0.0], np.cumsum(lz)))
        n = k_hi - k_lo + 1
        out = c[r:r + n] - c[:n]
        if closes:
            out = out + l1[r:r + n]
        return out

    def sup_gn(self, w) -> LogWeight:
        w = self.alphabet.check_word(w)
        n = len(w)
        if n == 0:
            return LogWeight(0.0)
        r = 0
        while r < n and w[r] == 0:
            r += 1
        closes = r < n
        det = 0.0
        if closes:
            last = r
            for t in range(r + 1, n):
                p = self.q.value(t - last)
                det += _log(p if w[t] == 1 else 1.0 - p)
                if w[t] == 1:
                    last = t
        f_inf = r * _log(1.0 - self.q_inf) + (_log(self.q_inf) if closes else 0.0)
        best = f_inf
        ep = self.q.eventual_period()
        if ep is not None:
            K = ep[0] + ep[1]
            best = max(best, float(np.max(self._start_logs(1, K, r, closes))))
            return LogWeight(best + det, exact=True, note="periodic q: finite scan is exhaustive")
        lim = self.q.limit
        K = 1024
        while True:
            best = max(best, float(np.max(self._start_logs(1, K, r, closes))))
            upper = r * _log(1.0 - self.q.tail_inf(K + 1))
            if closes:
                upper += _log(self.q.tail_sup(K + 1))
            if upper <= best:
                return LogWeight(best + det, exact=True, note=f"tail bound below maximum after {K}")
            if lim is not None:
                lim_val = r * _log(1.0 - lim) + (_log(lim) if closes else 0.0)
                if upper - max(best, lim_val) <= SUP_TOL:
                    return LogWeight(upper + det, exact=True, note="supremum approached as l1 -> infinity")
            if K >= 1 << 22:
                return LogWeight(upper + det, exact=False, note="certified upper bound at scan cap")
            K *= 4

    # -- enumeration ----------------------------------------------------------
    def enumerate_contexts(self, n: int) -> set:
        self.check_enumeration(n)
        return {(0,) * n}

    def count_contexts(self, n: int) -> int:
        return 1

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        self.check_enumeration(n)
        return {(0,) * n} if self._zero_discontinuous() else set()

    def count_discontinuity_prefixes(self, n: int) -> int:
        return 1 if self._zero_discontinuous() else 0

    def in_tau(self, word) -> bool:
        return all(a == 0 for a in word)

    def overflow_indicators(self, symbols) -> np.ndarray:
        y = np.asarray(symbols)
        return np.cumsum(y != 0) == 0

    def growth_certificate(self):
        return Certificate(1.0, "exact", "tau^n = {0^n} for every n: a single infinite context")

    def pressure_certificate(self):
        if not self._zero_discontinuous():
            return Certificate(-math.inf, "exact", "g is continuous at the all-zero past: D_g is empty")
        zero_rate = _log(1.0 - self.q_inf)
        ep = self.q.eventual_period()
        if ep is not None:
            start, per = ep
            idx = np.arange(start, start + per)
            with np.errstate(divide="ignore"):
                avg = float(np.mean(np.log1p(-np.asarray(self.q.values(idx)))))
            return Certificate(max(zero_rate, avg), "exact",
                               "D_g = {0-bar}; sup over l1 of n consecutive factors 1-q has the periodic mean rate")
        lim = self.q.limit
        if lim is not None:
            return Certificate(max(zero_rate, _log(1.0 - lim)), "exact",
                               "D_g = {0-bar}; the factors 1-q_{l1+j} tend to 1-lim q along long zero runs")
        return None

    def v_free_certificate(self, v):
        if not self._zero_discontinuous():
            return True, "D_g is empty"
        if any(a != 0 for a in v):
            return True, "D_g = {0-bar} contains only zeros, hence no word with a 1"
        return False, "D_g = {0-bar} contains every all-zero word"

    # -- exact engine and simulation ------------------------------------------
    def reduce(self, past: PastLike, horizon: int):
        return past.distance_to_last(1)

    def simulate(self, past: PastLike, uniforms: np.ndarray) -> np.ndarray:
        uniforms = np.atleast_2d(uniforms)
        R, T = uniforms.shape
        l0 = past.distance_to_last(1)
        L = np.full(R, INF_STATE if l0 == math.inf else int(l0), dtype=np.int64)
        out = np.empty((R, T), dtype=np.int8)
        for t in range(T):
            finite = L != INF_STATE
            p1 = np.full(R, self.q_inf)
            if finite.any():
                p1[finite] = self.q.values(L[finite])
            a = uniforms[:, t] >= 1.0 - p1
            out[:, t] = a
            L = np.where(a, 1, np.where(finite, L + 1, INF_STATE))
        return out

    def sr_rules(self):
        """Lower and upper envelopes (s, r); both equal q here."""
        return self.q, self.q

    def descriptor(self) -> dict:
        return {"family": "renewal", "q": self.q.descriptor(), "q_inf": self.q_inf}

    @classmethod
    def from_descriptor(cls, d: dict) -> "RenewalModel":
        return cls(qrule_from_descriptor(d["q"]), float(d.get("q_inf", 0.5)))
