"""Factor of a Bernoulli product measure under the spin-flip map F(x)_i = x_{i-1} x_i.

Symbols are ordinals over ``SPINS``: 0 is the spin -1 and 1 is the spin +1.
Under the Bernoulli measure, each site is +1 with probability ``eps``.
:meth:`SpinFlipFactor.factor_cylinder` gives the exact image measure of a
cylinder.  The g-function is the limit of the factor's conditional
probabilities.  That limit is governed by the density of +1 among the
partial products ``y_{-1}, y_{-1} y_{-2}, ...`` of the past.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import SPINS, LogWeight, PastLike
from ..errors import ValidationError
from .base import Certificate, GModel, Stepper

PLUS, MINUS = 1, 0


def spin(a: int) -> int:
    return 1 if a == PLUS else -1


def _partial_products(word_latest_first):
    prod = 1
    for a in word_latest_first:
        prod *= spin(a)
        yield prod


class _ClassStepper(Stepper):
    def __init__(self, model, cls: int):
        self.model = model
        self.cls = cls

    def dist(self):
        return self.model.class_dist(self.cls)

    def push(self, a: int) -> None:
        if a == MINUS:
            self.cls = -self.cls


class SpinFlipFactor(GModel):
    family = "spinflip"
    alphabet = SPINS

    def __init__(self, eps: float = 0.3):
        if not 0.0 < eps < 1.0 or eps == 0.5:
            raise ValidationError("spin-flip eps must lie in (0, 1) and differ from 1/2")
        self.eps = float(eps)
        self.rho = self.eps / (1.0 - self.eps)

    # -- the factor measure ---------------------------------------------------
    def _check_spins(self, y):
        y = self.alphabet.check_word(y)
        if not y:
            raise ValidationError("factor_cylinder needs a nonempty word")
        return y

    def plus_count(self, y) -> int:
        """S: number of +1 among the partial products y_0, y_0 y_{-1}, ..."""
        return sum(1 for p in _partial_products(reversed(y)) if p == 1)

    def factor_cylinder(self, y, eps: float | None = None) -> float:
        """nu(y) for a word y = y_{-n} ... y_0 (y_0 last)."""
        y = self._check_spins(y)
        e = self.eps if eps is None else float(eps)
        N = len(y)
        S = self.plus_count(y)
        return e ** (1 + S) * (1 - e) ** (N - S) + e ** (N - S) * (1 - e) ** (1 + S)

    def log_factor_cylinder(self, y) -> float:
        y = self._check_spins(y)
        N = len(y)
        S = self.plus_count(y)
        le, l1e = math.log(self.eps), math.log1p(-self.eps)
        a = (1 + S) * le + (N - S) * l1e
        b = (N - S) * le + (1 + S) * l1e
        return max(a, b) + math.log1p(math.exp(-abs(a - b)))

    def factor_conditional(self, past_word, a: int) -> float:
        """nu(y_0 = a | y_{-n}^{-1}) as a ratio of two cylinders."""
        past_word = tuple(past_word)
        if not past_word:
            return self.factor_cylinder((a,))
        return math.exp(self.log_factor_cylinder(past_word + (a,)) - self.log_factor_cylinder(past_word))

    def conditional_closed_form(self, past_word) -> float:
        """nu(y_0 = +1 | y_{-n}^{-1}) = (1-eps)(rho + rho^E)/(1 + rho^E),
        E = 2(n+1)(1/2 - S_n/(n+1)) with S_n counted on the word ending in +1."""
        past_word = tuple(past_word)
        full = past_word + (PLUS,)
        n1 = len(full)
        S = self.plus_count(full)
        E = n1 - 2 * S
        lr = math.log(self.rho)
        # (rho + rho^E)/(1 + rho^E) evaluated stably in log space
        num = np.logaddexp(lr, E * lr)
        den = np.logaddexp(0.0, E * lr)
        return (1.0 - self.eps) * math.exp(num - den)

    # -- g-function (limit kernel) --------------------------------------------
    def sigma(self, past: PastLike) -> float:
        """Density of +1 among partial products of the past."""
        base, tail = past.split()
        c = 1
        for a in base.suffix:
            c *= spin(a)
        prods = list(_partial_products(reversed(base.period)))
        if prods[-1] == -1:
            sig = 0.5
        else:
            sig = sum(1 for p in prods if c * p == 1) / len(prods)
        flips = sum(1 for a in tail if a == MINUS)
        return 1.0 - sig if flips % 2 else sig

    def density_class(self, past: PastLike) -> int:
        s = self.sigma(past)
        return 0 if s == 0.5 else (1 if s > 0.5 else -1)

    def class_dist(self, cls: int):
        lo, hi = min(self.eps, 1 - self.eps), max(self.eps, 1 - self.eps)
        v = lo if cls < 0 else (hi if cls > 0 else 0.5)
        return (1.0 - v, v)

    def dist(self, past: PastLike):
        return self.class_dist(self.density_class(past))

    def stepper(self, past: PastLike):
        return _ClassStepper(self, self.density_class(past))

    def context_length(self, past: PastLike):
        return math.inf

    def variation(self, past: PastLike, l: int) -> float:
        if l < 1:
            raise ValidationError("variation order must be >= 1")
        v = self.dist(past)[PLUS]
        return max(abs(v - self.class_dist(c)[PLUS]) for c in (-1, 0, 1))

    def sup_gn(self, w) -> LogWeight:
        w = self.alphabet.check_word(w)
        best = -math.inf
        for c0 in (-1, 0, 1):
            c = c0
            tot = 0.0
            for a in w:
                tot += math.log(self.class_dist(c)[a])
                if a == MINUS:
                    c = -c
            best = max(best, tot)
        return LogWeight(best, exact=True, note="maximum over the three density classes")

    def inf_g(self) -> float:
        return min(self.eps, 1 - self.eps)

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
        return Certificate(0.0, "exact",
                           "D_g^n = A^n; the sum of sup-products lies in [1, 3], so the rate is 0")

    def v_free_certificate(self, v):
        return False, "D_g is all of X^-: every word occurs"

    def reduce(self, past: PastLike, horizon: int):
        return self.density_class(past)

    def simulate(self, past: PastLike, uniforms: np.ndarray) -> np.ndarray:
        uniforms = np.atleast_2d(uniforms)
        R, T = uniforms.shape
        cls = np.full(R, self.density_class(past), dtype=np.int64)
        lo, hi = min(self.eps, 1 - self.eps), max(self.eps, 1 - self.eps)
        out = np.empty((R, T), dtype=np.int8)
        for t in range(T):
            p1 = np.where(cls < 0, lo, np.where(cls > 0, hi, 0.5))
            a = uniforms[:, t] >= 1.0 - p1
            out[:, t] = a
            cls = np.where(a, cls, -cls)
        return out

    def descriptor(self) -> dict:
        return {"family": "spinflip", "eps": self.eps}

    @classmethod
    def from_descriptor(cls, d: dict) -> "SpinFlipFactor":
        return cls(float(d.get("eps", 0.3)))


def spin_flip_image(x) -> tuple:
    """``y_i = x_{i-1} x_i`` for a finite word ``x``; the result is one symbol shorter."""
    x = SPINS.check_word(x)
    return tuple(PLUS if spin(a) * spin(b) == 1 else MINUS for a, b in zip(x, x[1:]))


def sturmian_spins(density: float, n: int, last: int = MINUS) -> tuple:
    """Length-``n`` mechanical word with +1 frequency ``density`` ending in ``last``.

    Uses ``x_j = +1`` iff ``floor((j + 1) d) - floor(j d) = 1`` and drops
    trailing symbols until the word ends in ``last``.
    """
    if not 0.0 < density < 1.0:
        raise ValidationError("density must lie in (0, 1)")
    word = []
    j = 0
    while len(word) < n or word[-1] != last:
        word.append(PLUS if math.floor((j + 1) * density) - math.floor(j * density) == 1 else MINUS)
        j += 1
    while word[-1] != last:
        word.pop()
    return tuple(word[-n:])
