"""Index rules i -> q_i in [0, 1] with exact tail information.

Every rule knows ``sup``/``inf`` over index tails and, where a closed form
exists, a bound on the remaining mass of the survival series
``sum_{j > k} prod_{i <= j} (1 - q_i)`` given the product up to ``k``.  That
is what lets variation, sup-products and V(q) be certified rather than
sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


class QRule:
    """Base class.  Subclasses implement ``values`` on integer arrays."""

    kind = "abstract"

    def values(self, idx) -> np.ndarray:
        raise NotImplementedError

    def value(self, i: int) -> float:
        """Scalar evaluation without range checks (hot path)."""
        return float(self.values(np.array([i], dtype=np.int64))[0])

    def __call__(self, i: int) -> float:
        if i < 1:
            raise ValidationError(f"q-rule indices start at 1, got {i}")
        return self.value(i)

    def tail_sup(self, k: int) -> float:
        """``sup_{i >= k} q_i``."""
        raise NotImplementedError

    def tail_inf(self, k: int) -> float:
        """``inf_{i >= k} q_i``."""
        raise NotImplementedError

    @property
    def limit(self):
        """``lim q_i`` or None when the sequence does not converge."""
        return None

    def eventual_period(self):
        """``(start, period)`` if ``q`` is periodic from ``start`` on, else None."""
        return None

    def survival_tail_interval(self, k: int, prod_k: float):
        """``(lo, hi)`` enclosing ``sum_{j>k} prod_{i<=j}(1-q_i)`` given ``prod_k``."""
        return None

    def divergence_certificate(self):
        """Reason why ``sum_k prod_{i<=k}(1-q_i)`` diverges, or None."""
        return None

    def descriptor(self) -> dict:
        raise NotImplementedError


def _geometric_tail(prod_k: float, q_min: float):
    if q_min <= 0:
        return None
    return (0.0, prod_k * (1.0 - q_min) / q_min)


@dataclass(frozen=True)
class Constant(QRule):
    c: float
    kind = "constant"

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValidationError(f"q value {self.c} outside [0, 1]")

    def values(self, idx):
        return np.full(np.shape(idx), float(self.c))

    def value(self, i):
        return float(self.c)

    def tail_sup(self, k):
        return float(self.c)

    def tail_inf(self, k):
        return float(self.c)

    @property
    def limit(self):
        return float(self.c)

    def eventual_period(self):
        return (1, 1)

    def survival_tail_interval(self, k, prod_k):
        if self.c <= 0:
            return None
        exact = prod_k * (1.0 - self.c) / self.c
        return (exact, exact)

    def divergence_certificate(self):
        if self.c == 0:
            return "q = 0 identically: every product equals 1"
        return None

    def descriptor(self):
        return {"kind": "constant", "value": self.c}


@dataclass(frozen=True)
class Harmonic(QRule):
    """``q_i = scale / (i + 1)``."""

    scale: float = 1.0
    kind = "harmonic"

    def __post_init__(self):
        if not 0.0 < self.scale <= 2.0:
            raise ValidationError("harmonic scale must lie in (0, 2] so that q_1 <= 1")

    def values(self, idx):
        idx = np.asarray(idx, dtype=np.float64)
        return self.scale / (idx + 1.0)

    def value(self, i):
        return self.scale / (i + 1.0)

    def tail_sup(self, k):
        return self.scale / (max(k, 1) + 1.0)

    def tail_inf(self, k):
        return 0.0

    @property
    def limit(self):
        return 0.0

    def survival_tail_interval(self, k, prod_k):
        # prod_{i=k+1}^{j}(1 - s/(i+1)) <= ((k+2)/(j+2))^s, then integrate
        if self.scale <= 1.0:
            return None
        return (0.0, prod_k * (k + 2.0) / (self.scale - 1.0))

    def divergence_certificate(self):
        if self.scale <= 1.0:
            return "prod_{i<=k}(1-q_i) >= prod i/(i+1) = 1/(k+1); harmonic series diverges"
        return None

    def descriptor(self):
        return {"kind": "harmonic", "scale": self.scale}


@dataclass(frozen=True)
class Power(QRule):
    """``q_i = 1 - (i/(i+1))^alpha``, so ``prod_{i<=k}(1-q_i) = (k+1)^{-alpha}``."""

    alpha: float
    kind = "power"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValidationError("power rule needs alpha > 0")

    def values(self, idx):
        idx = np.asarray(idx, dtype=np.float64)
        return -np.expm1(self.alpha * np.log1p(-1.0 / (idx + 1.0)))

    def value(self, i):
        return -math.expm1(self.alpha * math.log1p(-1.0 / (i + 1.0)))

    def tail_sup(self, k):
        return float(self.values(np.array([max(k, 1)]))[0])

    def tail_inf(self, k):
        return 0.0

    @property
    def limit(self):
        return 0.0

    def survival_tail_interval(self, k, prod_k):
        # tail = prod_k (k+1)^a sum_{m>=k+2} m^-a, bracketed by integrals
        if self.alpha <= 1.0:
            return None
        a = self.alpha
        lo = prod_k * (k + 1.0) ** a * (k + 2.0) ** (1.0 - a) / (a - 1.0)
        hi = prod_k * (k + 1.0) / (a - 1.0)
        return (lo, hi)

    def divergence_certificate(self):
        if self.alpha <= 1.0:
            return f"prod_{{i<=k}}(1-q_i) = (k+1)^-{self.alpha} >= 1/(k+1); series diverges"
        return None

    def descriptor(self):
        return {"kind": "power", "alpha": self.alpha}


@dataclass(frozen=True)
class Alternating(QRule):
    """``q_i = odd`` for odd ``i`` and ``even`` for even ``i``."""

    odd: float
    even: float
    kind = "alternating"

    def __post_init__(self):
        for v in (self.odd, self.even):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"q value {v} outside [0, 1]")

    def values(self, idx):
        idx = np.asarray(idx)
        return np.where(idx % 2 == 1, float(self.odd), float(self.even))

    def value(self, i):
        return float(self.odd) if i % 2 == 1 else float(self.even)

    def tail_sup(self, k):
        return float(max(self.odd, self.even))

    def tail_inf(self, k):
        return float(min(self.odd, self.even))

    @property
    def limit(self):
        return float(self.odd) if self.odd == self.even else None

    def eventual_period(self):
        return (1, 2)

    def survival_tail_interval(self, k, prod_k):
        a = self(k + 1)
        b = self(k + 2)
        c = (1 - a) * (1 - b)
        if c >= 1:
            return None
        exact = prod_k * (1 - a) * (2 - b) / (1 - c)
        return (exact, exact)

    def divergence_certificate(self):
        if self.odd == 0 and self.even == 0:
            return "q = 0 identically: every product equals 1"
        return None

    def descriptor(self):
        return {"kind": "alternating", "odd": self.odd, "even": self.even}


@dataclass(frozen=True)
class Table(QRule):
    """Explicit ``q_1..q_L`` followed by a tail rule evaluated at the same index."""

    table: tuple
    tail: QRule
    kind = "table"

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        for v in self.table:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"q value {v} outside [0, 1]")

    def values(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        out = np.asarray(self.tail.values(idx), dtype=np.float64).copy()
        L = len(self.table)
        if L:
            mask = idx <= L
            if mask.any():
                arr = np.asarray(self.table)
                out[mask] = arr[idx[mask] - 1]
        return out

    def value(self, i):
        if i <= len(self.table):
            return self.table[i - 1]
        return self.tail.value(i)

    def tail_sup(self, k):
        L = len(self.table)
        head = self.table[k - 1:] if k <= L else ()
        return max(max(head, default=0.0), self.tail.tail_sup(max(k, L + 1)))

    def tail_inf(self, k):
        L = len(self.table)
        head = self.table[k - 1:] if k <= L else ()
        return min(min(head, default=1.0), self.tail.tail_inf(max(k, L + 1)))

    @property
    def limit(self):
        return self.tail.limit

    def eventual_period(self):
        ep = self.tail.eventual_period()
        if ep is None:
            return None
        start, per = ep
        return (max(start, len(self.table) + 1), per)

    def survival_tail_interval(self, k, prod_k):
        if k < len(self.table):
            return None
        return self.tail.survival_tail_interval(k, prod_k)

    def divergence_certificate(self):
        if any(v == 1.0 for v in self.table):
            return None
        cert = self.tail.divergence_certificate()
        if cert is None:
            return None
        return "finite modification of a divergent rule: " + cert

    def descriptor(self):
        return {"kind": "table", "values": list(self.table), "tail": self.tail.descriptor()}


@dataclass(frozen=True)
class Affine(QRule):
    """``r_i = base_i + kappa (1 - base_i)``; used for the upper envelope r."""

    base: QRule
    kappa: float
    kind = "affine"

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValidationError("kappa must lie in [0, 1]")

    def _map(self, v):
        return v + self.kappa * (1.0 - v)

    def values(self, idx):
        return self._map(np.asarray(self.base.values(idx), dtype=np.float64))

    def value(self, i):
        return self._map(self.base.value(i))

    def tail_sup(self, k):
        return self._map(self.base.tail_sup(k))

    def tail_inf(self, k):
        return self._map(self.base.tail_inf(k))

    @property
    def limit(self):
        lim = self.base.limit
        return None if lim is None else self._map(lim)

    def eventual_period(self):
        return self.base.eventual_period()

    def survival_tail_interval(self, k, prod_k):
        if self.kappa > 0:
            return _geometric_tail(prod_k, self.kappa)
        return self.base.survival_tail_interval(k, prod_k)

    def divergence_certificate(self):
        return self.base.divergence_certificate() if self.kappa == 0 else None

    def descriptor(self):
        return {"kind": "affine", "base": self.base.descriptor(), "kappa": self.kappa}


def qrule_from_descriptor(d) -> QRule:
    """Build a rule from its JSON form (numbers are read as constants)."""
    if isinstance(d, QRule):
        return d
    if isinstance(d, (int, float)):
        return Constant(float(d))
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError(f"q-rule descriptor needs a 'kind': {d!r}")
    kind = d["kind"]
    extra = set(d) - {"kind"}
    try:
        if kind == "constant":
            _only(extra, {"value"})
            return Constant(float(d["value"]))
        if kind == "harmonic":
            _only(extra, {"scale"})
            return Harmonic(float(d.get("scale", 1.0)))
        if kind == "power":
            _only(extra, {"alpha"})
            return Power(float(d["alpha"]))
        if kind == "alternating":
            _only(extra, {"odd", "even"})
            return Alternating(float(d["odd"]), float(d["even"]))
        if kind == "table":
            _only(extra, {"values", "tail"})
            return Table(tuple(d["values"]), qrule_from_descriptor(d.get("tail", {"kind": "constant", "value": 0.5})))
        if kind == "affine":
            _only(extra, {"base", "kappa"})
            return Affine(qrule_from_descriptor(d["base"]), float(d["kappa"]))
    except KeyError as exc:
        raise ValidationError(f"q-rule {kind!r} missing field {exc.args[0]!r}") from None
    raise ValidationError(f"unknown q-rule kind {kind!r}")


def _only(got, allowed):
    bad = got - allowed
    if bad:
        raise ValidationError(f"unexpected q-rule fields {sorted(bad)}")


def log_survival(rule: QRule, K: int) -> np.ndarray:
    """``out[k] = log prod_{i<=k}(1 - q_i)`` for ``k = 0..K``."""
    q = rule.values(np.arange(1, K + 1, dtype=np.int64))
    with np.errstate(divide="ignore"):
        terms = np.log1p(-np.asarray(q, dtype=np.float64))
    out = np.empty(K + 1)
    out[0] = 0.0
    np.cumsum(terms, out=out[1:])
    return out


@dataclass
class SeriesResult:
    """Outcome of summing ``V(q) = sum_{k>=1} prod_{i<=k}(1-q_i)``."""

    status: str  # "finite" | "diverges" | "inconclusive"
    value: float
    lower: float
    upper: float
    terms_used: int
    partial_sums: list
    certificate: str

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "value": self.value if self.status == "finite" else None,
            "lower": self.lower,
            "upper": self.upper if math.isfinite(self.upper) else None,
            "terms_used": self.terms_used,
            "certificate": self.certificate,
        }


def survival_sum(rule: QRule, tol: float = 1e-9, K_max: int = 1 << 22) -> SeriesResult:
    """Sum the survival series with a certified truncation bound.

    The sum is extended by doubling until either the rule's analytic tail
    bound drops below ``tol`` or ``K_max`` terms are exhausted.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    cert = rule.divergence_certificate()
    K = 64
    while True:
        K = min(K, K_max)
        logs = log_survival(rule, K)
        terms = np.exp(logs[1:])
        csum = np.cumsum(terms)
        partial = float(math.fsum(terms))
        marks = [int(m) for m in np.unique(np.geomspace(1, K, num=min(K, 40)).astype(int))]
        partials = [(m, float(csum[m - 1])) for m in marks]
        prod_k = float(terms[-1])
        if prod_k == 0.0:
            return SeriesResult("finite", partial, partial, partial, K, partials,
                                "a factor 1 - q_i vanishes: the series terminates")
        if cert is not None:
            return SeriesResult("diverges", math.inf, partial, math.inf, K, partials, cert)
        tail = rule.survival_tail_interval(K, prod_k)
        if tail is not None and tail[1] - tail[0] <= tol:
            lo, hi = tail
            return SeriesResult("finite", partial + (lo + hi) / 2, partial + lo, partial + hi, K, partials,
                                f"analytic tail enclosure [{lo:.3e}, {hi:.3e}] after {K} terms")
        if K >= K_max:
            lower = partial + (tail[0] if tail else 0.0)
            upper = partial + tail[1] if tail is not None else math.inf
            return SeriesResult("inconclusive", partial, lower, upper, K, partials,
                                f"no certificate within K_max={K_max}")
        K *= 2
