"""Finite probabilistic context trees given as explicit tables."""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from ..core import BINARY, Alphabet, AnchoredPast, LogWeight, PastLike
from ..errors import CapabilityError, ValidationError
from .base import Certificate, GModel, Stepper, check_distribution

SUP_ENUM_CAP = 1 << 20


class _Node:
    __slots__ = ("children", "dist")

    def __init__(self):
        self.children = {}
        self.dist = None


class _TableStepper(Stepper):
    def __init__(self, model: "TabulatedTree", past: PastLike):
        self.model = model
        self.recent = list(past.last(model.depth))

    def dist(self):
        return self.model.dist_of_suffix(self.recent)

    def push(self, a: int) -> None:
        if self.model.depth:
            self.recent.append(a)
            del self.recent[0]


class TabulatedTree(GModel):
    """Context tree with an explicit distribution per context.

    Parameters
    ----------
    contexts : dict
        Maps context words (tuples, last entry most recent) to distributions.
    alphabet : Alphabet
    default : sequence of float, optional
        Used for pasts whose suffix walk leaves the tree before reaching a
        context.  Without it such pasts are rejected.
    """

    family = "tabulated"

    def __init__(self, contexts: dict, alphabet: Alphabet = BINARY, default=None):
        self.alphabet = alphabet
        if not contexts and default is None:
            raise ValidationError("a tabulated tree needs contexts or a default distribution")
        ctx = {}
        for c, d in contexts.items():
            c = alphabet.check_word(c)
            ctx[c] = check_distribution(d, alphabet, f"context {alphabet.format_word(c)!r}")
        for c in ctx:
            for j in range(1, len(c)):
                if c[j:] in ctx:
                    raise ValidationError(
                        f"contexts are not an antichain: {alphabet.format_word(c[j:])!r} is a suffix of "
                        f"{alphabet.format_word(c)!r}"
                    )
        self.contexts = ctx
        self.default = None if default is None else check_distribution(default, alphabet, "default")
        self.depth = max((len(c) for c in ctx), default=0)
        self.internal = {c[j:] for c in ctx for j in range(1, len(c) + 1)}
        self.root = _Node()
        for c, d in ctx.items():
            node = self.root
            for a in reversed(c):
                node = node.children.setdefault(a, _Node())
            node.dist = d
        self._table = None

    # -- matching -------------------------------------------------------------
    def _walk(self, symbol_at):
        """Return (distribution, context length) following x_{-1}, x_{-2}, ..."""
        node = self.root
        if node.dist is not None:
            return node.dist, 1
        j = 0
        while True:
            j += 1
            node = node.children.get(symbol_at(j))
            if node is None:
                if self.default is None:
                    raise ValidationError("past matches no context and the tree has no default")
                return self.default, j
            if node.dist is not None:
                return node.dist, j

    def dist(self, past: PastLike):
        return self._walk(lambda j: past.at(-j))[0]

    def dist_of_suffix(self, recent) -> tuple:
        n = len(recent)
        return self._walk(lambda j: recent[n - j])[0]

    def stepper(self, past: PastLike):
        return _TableStepper(self, past)

    def context_length(self, past: PastLike):
        return self._walk(lambda j: past.at(-j))[1]

    def _reachable(self, node) -> list:
        out = []
        stack = [node]
        while stack:
            nd = stack.pop()
            if nd.dist is not None:
                out.append(nd.dist)
                continue
            if len(nd.children) < self.alphabet.size and self.default is not None:
                out.append(self.default)
            stack.extend(nd.children.values())
        return out

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        g, ell = self._walk(lambda j: past.at(-j))
        if l >= ell:
            return 0.0
        node = self.root
        for j in range(1, l + 1):
            node = node.children[past.at(-j)]
        return max(max(abs(x - y) for x, y in zip(d, g)) for d in self._reachable(node))

    def inf_g(self) -> float:
        dists = list(self.contexts.values()) + ([self.default] if self.default else [])
        return min(min(d) for d in dists)

    def sup_gn(self, w) -> LogWeight:
        w = self.alphabet.check_word(w)
        if self.alphabet.size ** self.depth > SUP_ENUM_CAP:
            raise CapabilityError("tree too deep for exhaustive sup over pasts")
        best = -math.inf
        for s in product(range(self.alphabet.size), repeat=self.depth):
            best = max(best, self.g_n_log(AnchoredPast((0,), s), w))
        return LogWeight(best, exact=True, note="exhaustive over all depth-D suffixes")

    # -- enumeration ----------------------------------------------------------
    def enumerate_contexts(self, n: int) -> set:
        self.check_enumeration(n)
        return {c for c in self.internal if len(c) == n}

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        self.check_enumeration(n)
        return set()

    def in_tau(self, word) -> bool:
        return tuple(word) in self.internal

    def overflow_indicators(self, symbols) -> np.ndarray:
        y = tuple(int(a) for a in symbols)
        out = np.zeros(len(y), dtype=bool)
        for n in range(1, min(len(y), self.depth) + 1):
            out[n - 1] = y[:n] in self.internal
        return out

    def discontinuity_is_empty(self) -> bool:
        return True

    def growth_certificate(self):
        return Certificate(0.0, "exact", f"finite tree of depth {self.depth}: tau^n is empty for n >= depth")

    def pressure_certificate(self):
        return Certificate(-math.inf, "exact", "finite context tree: g is continuous, D_g is empty")

    def v_free_certificate(self, v):
        return True, "D_g is empty"

    def reduce(self, past: PastLike, horizon: int):
        return past.last(self.depth)

    def _code_table(self) -> np.ndarray:
        if self._table is None:
            A, D = self.alphabet.size, self.depth
            rows = []
            for code in range(A ** D):
                digits = []
                c = code
                for _ in range(D):
                    digits.append(c % A)
                    c //= A
                # least significant digit is the most recent symbol
                rows.append(self.dist_of_suffix(list(reversed(digits))))
            self._table = np.cumsum(np.array(rows, dtype=np.float64), axis=1)
        return self._table

    def simulate(self, past: PastLike, uniforms: np.ndarray) -> np.ndarray:
        uniforms = np.atleast_2d(uniforms)
        A, D = self.alphabet.size, self.depth
        if A ** D > SUP_ENUM_CAP:
            return super().simulate(past, uniforms)
        cdf = self._code_table()
        code0 = 0
        for a in past.last(D):
            code0 = code0 * A + a
        R, T = uniforms.shape
        code = np.full(R, code0, dtype=np.int64)
        mod = A ** D
        out = np.empty((R, T), dtype=np.int8)
        for t in range(T):
            c = cdf[code]
            a = (uniforms[:, t][:, None] >= c[:, :-1]).sum(axis=1)
            out[:, t] = a
            code = (code * A + a) % mod if D else code
        return out

    def descriptor(self) -> dict:
        fmt = self.alphabet.format_word
        d = {
            "family": "tabulated",
            "alphabet": self.alphabet.to_list(),
            "contexts": {fmt(c): list(p) for c, p in sorted(self.contexts.items())},
        }
        if self.default is not None:
            d["default"] = list(self.default)
        return d

    @classmethod
    def from_descriptor(cls, d: dict) -> "TabulatedTree":
        alphabet = Alphabet(tuple(d.get("alphabet", ["0", "1"])))
        ctx = {alphabet.parse_word(k): v for k, v in d.get("contexts", {}).items()}
        return cls(ctx, alphabet, d.get("default"))
