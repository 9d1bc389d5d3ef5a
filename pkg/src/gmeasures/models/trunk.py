"""Context tree with one aperiodic trunk and countably many periodic branches.

Reading a past from x_{-1} backwards, the trunk is the concatenation
``bin(0) bin(1) bin(2) ...`` of reversed binary codings, so that
``w(k) = bin(k-1) ... bin(1) bin(0)`` (position -1 reads ``bin(0)``) is a
suffix of every long trunk prefix.  Branch ``k`` leaves the trunk after
``w(k)`` and continues with the constant symbol ``alpha_k`` (the leftmost
symbol of ``w(k)``).  The infinite contexts are the trunk and the pasts
``alpha_k^infinity w(k)``.  Leaves carry ``eps`` or ``1 - eps`` by the parity
of their length, and infinite contexts carry ``p_inf``.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right

from ..core import AnchoredPast, LogWeight, PastLike
from ..errors import ValidationError
from .base import Certificate, GModel, binary_dist

REDUCE_MAX_WORD = 48


class TrunkTreeModel(GModel):
    family = "trunk"
    enumeration_cap = 4096

    def __init__(self, eps: float = 0.2, p_inf: float = 0.5):
        if not 0.0 < eps < 0.5:
            raise ValidationError("trunk-tree eps must lie in (0, 1/2)")
        if not eps <= p_inf <= 1 - eps:
            raise ValidationError("p_inf must lie in [eps, 1 - eps]")
        self.eps = float(eps)
        self.p_inf = float(p_inf)
        self._trunk = ""
        self._L = []  # _L[k-1] = |w(k)|
        self._next = 0
        self._occ = None
        self._occ_R = -1

    # -- trunk bookkeeping ------------------------------------------------------
    def _grow(self, length: int) -> None:
        parts = [self._trunk]
        total = len(self._trunk)
        while total < length or not self._L or self._L[-1] < length:
            code = format(self._next, "b")[::-1]
            parts.append(code)
            total += len(code)
            self._next += 1
            self._L.append(total)
        self._trunk = "".join(parts)

    def trunk_rev(self, length: int) -> str:
        """First ``length`` trunk symbols read from x_{-1} backwards."""
        if len(self._trunk) < length:
            self._grow(length)
        return self._trunk[:length]

    def branch_lengths(self, upto: int) -> list:
        """``|w(k)|`` for all branches with ``|w(k)| <= upto``."""
        self._grow(upto + 1)
        return self._L[:bisect_right(self._L, upto)]

    def alpha(self, k: int) -> int:
        return 0 if k == 1 else 1

    def w(self, k: int) -> tuple:
        self._grow(1)
        while len(self._L) < k:
            self._grow(self._L[-1] + 1)
        return tuple(int(c) for c in reversed(self._trunk[:self._L[k - 1]]))

    def branch(self, k: int) -> AnchoredPast:
        return AnchoredPast((self.alpha(k),), self.w(k))

    # -- the suffix walk ---------------------------------------------------------
    def _branch_hit(self, m: int, c: int, run1: int) -> bool:
        """Is some branch k >= 2 with m - run1 <= L_k <= min(c, m - 1) present?"""
        if run1 == 0:
            return False
        lo, hi = m - run1, min(c, m - 1)
        if lo > hi:
            return False
        L = self.branch_lengths(hi)
        i = bisect_left(L, max(lo, 2), 1)
        return i < len(L) and L[i] <= hi

    def _walk(self, symbol_at, limit=None, past=None):
        """Context length, ``inf`` for infinite contexts, or None when the
        walk exceeds ``limit`` symbols without leaving the tree."""
        m = c = run1 = 0
        matching = allzero = True
        while True:
            m += 1
            if limit is not None and m > limit:
                return None
            a = symbol_at(m)
            if matching and a == int(self.trunk_rev(m)[m - 1]):
                c = m
            else:
                matching = False
            run1 = run1 + 1 if a == 1 else 0
            allzero = allzero and a == 0
            if c == m:
                continue
            if allzero:
                if past is not None and past.constant_beyond(1, 0):
                    return math.inf
                continue
            if self._branch_hit(m, c, run1):
                if past is not None and past.constant_beyond(m, 1):
                    return math.inf
                continue
            return m

    def context_length(self, past: PastLike):
        return self._walk(lambda j: past.at(-j), past=past)

    def leaf_value(self, ell) -> float:
        if ell == math.inf:
            return self.p_inf
        return self.eps if (ell - 1) % 2 == 0 else 1.0 - self.eps

    def dist(self, past: PastLike):
        return binary_dist(self.leaf_value(self.context_length(past)))

    def _internal_rev(self, u_rev: str) -> bool:
        m = len(u_rev)
        t = self.trunk_rev(m)
        if u_rev == t:
            return True
        if all(ch == "0" for ch in u_rev):
            return True
        c = 0
        while c < m and u_rev[c] == t[c]:
            c += 1
        run1 = len(u_rev) - len(u_rev.rstrip("1"))
        return self._branch_hit(m, c, run1)

    def in_tau(self, word) -> bool:
        return self._internal_rev("".join(str(a) for a in reversed(tuple(word))))

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        ell = self.context_length(past)
        if l >= ell:
            return 0.0
        g = self.leaf_value(ell)
        values = {self.p_inf}
        frontier = ["".join(str(past.at(-j)) for j in range(1, l + 1))]
        depth = l
        while frontier and len(values) < 3 and depth < l + 256:
            nxt = []
            for u in frontier:
                for ch in "01":
                    child = u + ch
                    if self._internal_rev(child):
                        nxt.append(child)
                    else:
                        values.add(self.leaf_value(depth + 1))
            frontier = nxt
            depth += 1
        return max(abs(v - g) for v in values)

    def inf_g(self) -> float:
        return min(self.eps, self.p_inf, 1.0 - self.p_inf)

    def sup_gn(self, w) -> LogWeight:
        """Exact factors where w fixes the context, else the largest leaf value."""
        w = self.alphabet.check_word(w)
        top = max(1.0 - self.eps, self.p_inf, 1.0 - self.p_inf)
        total = 0.0
        exact = True
        for t, a in enumerate(w):
            ell = self._walk(lambda j: w[t - j], limit=t)
            if ell is None:
                exact = False
                total += math.log(top)
            else:
                total += math.log(binary_dist(self.leaf_value(ell))[a])
        note = "exact" if exact else "certified upper bound: undetermined factors replaced by max leaf value"
        return LogWeight(total, exact=exact, note=note)

    # -- enumeration ---------------------------------------------------------------
    def _tau_rev(self, n: int) -> set:
        out = {self.trunk_rev(n)}
        for k, Lk in enumerate(self.branch_lengths(n - 1), start=1):
            out.add(self.trunk_rev(Lk) + str(self.alpha(k)) * (n - Lk))
        return out

    def enumerate_contexts(self, n: int) -> set:
        self.check_enumeration(n)
        return {tuple(int(ch) for ch in reversed(s)) for s in self._tau_rev(n)}

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        return self.enumerate_contexts(n)

    def discontinuity_is_empty(self) -> bool:
        return False

    def growth_certificate(self):
        return Certificate(1.0, "exact",
                           "|tau^n| <= 1 + #{k : |w(k)| < n} <= n because |w(k)| >= k")

    def pressure_certificate(self):
        top = max(1.0 - self.eps, self.p_inf, 1.0 - self.p_inf)
        return Certificate(math.log(top), "upper",
                           "every sup-product factor is at most the largest leaf value and |D^n| <= n")

    def v_free_certificate(self, v):
        return False, "the trunk concatenates the binary codings of all integers, so it contains every word"

    # -- exact engine ---------------------------------------------------------------
    def _occurrences(self, R: int) -> dict:
        if self._occ is None or R > self._occ_R:
            R = max(R, 32)
            M = REDUCE_MAX_WORD
            span = R + M
            sources = [self.trunk_rev(span)]
            for k, Lk in enumerate(self.branch_lengths(span), start=1):
                sources.append(self.trunk_rev(Lk) + str(self.alpha(k)) * (span - Lk))
            occ = {}
            for src in sources:
                for s in range(R + 1):
                    for m in range(1, M + 1):
                        key = src[s:s + m]
                        if occ.get(key, R + 1) > s:
                            occ[key] = s
            self._occ, self._occ_R = occ, R
        return self._occ

    def reduce(self, past: PastLike, horizon: int):
        """Longest suffix that can still grow into an internal node within
        ``horizon`` steps; the leaf values depend on nothing else."""
        occ = self._occurrences(horizon)
        rev = []
        for m in range(1, REDUCE_MAX_WORD + 1):
            rev.append(str(past.at(-m)))
            if occ.get("".join(rev), horizon + 1) > horizon:
                return "".join(rev[:-1])
        return past.materialize()

    def descriptor(self) -> dict:
        return {"family": "trunk", "eps": self.eps, "p_inf": self.p_inf}

    @classmethod
    def from_descriptor(cls, d: dict) -> "TrunkTreeModel":
        return cls(float(d.get("eps", 0.2)), float(d.get("p_inf", 0.5)))
