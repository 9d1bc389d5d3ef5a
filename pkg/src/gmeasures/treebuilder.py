"""Discontinuity-set skeletons with prescribed prefix growth.

Two block constructions are provided.  ``tree1`` builds an uncountable set
whose prefix count ``d(n)`` is ``2^k`` on ``[n_k, n_{k+1})``, optionally
padded up to a target ``f(n)``.  ``tree2`` builds a countable set with
``d(n) = 2^{n-k} + sum_{i<=k} 2^{n_i - i}``, optionally trimmed down to
``f(n)``.

Words are returned in natural order ``x_{-n} .. x_{-1}``.  Internally they are
built from ``x_{-1}`` backwards as strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

from .errors import ConstructionMismatch, ResourceCapError, ValidationError

DEFAULT_HORIZON = 1 << 20
TREE2_HORIZON = 1 << 12
PREFIX_CAP = 1 << 20
TRIM_LOOKAHEAD = 6
TRIM_LOOKAHEAD_CAP = 1 << 18
FIGURE2_BREAKPOINTS = (0, 2, 4, 7)


@dataclass(frozen=True)
class GrowthRule:
    """Integer growth function ``f : N -> N*``.

    kinds: ``power2`` (2^n), ``identity`` (n), ``linear`` (a n + b),
    ``constant`` (c), ``pow2_over_log`` (ceil(2^n / floor(log2(n + 2)))),
    ``table`` (explicit values for n = 0..len-1).
    """

    kind: str
    a: int = 1
    b: int = 0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power2", "identity", "linear", "constant", "pow2_over_log", "table"):
            raise ValidationError(f"unknown growth rule {self.kind!r}")
        if self.kind == "table" and (not self.table or min(self.table) < 1):
            raise ValidationError("table growth rule needs positive values")

    def value(self, n: int) -> int:
        if n < 0:
            raise ValidationError("growth rules are defined for n >= 0")
        k = self.kind
        if k == "power2":
            return 1 << n
        if k == "identity":
            return max(n, 1)
        if k == "linear":
            return max(self.a * n + self.b, 1)
        if k == "constant":
            return max(self.a, 1)
        if k == "pow2_over_log":
            den = (n + 2).bit_length() - 1
            return -(-(1 << n) // den)
        if n >= len(self.table):
            raise ResourceCapError(f"table growth rule has no value at n={n}")
        return int(self.table[n])

    def log2(self, n: int) -> float:
        if self.kind == "power2":
            return float(n)
        if self.kind == "pow2_over_log":
            return n - math.log2((n + 2).bit_length() - 1)
        return math.log2(self.value(n))

    @property
    def monotone(self) -> bool:
        return self.kind != "table"

    @property
    def horizon(self) -> int:
        return len(self.table) - 1 if self.kind == "table" else DEFAULT_HORIZON

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("linear", "constant"):
            d["a"] = self.a
        if self.kind == "linear":
            d["b"] = self.b
        if self.kind == "table":
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_descriptor(cls, d: dict) -> "GrowthRule":
        extra = set(d) - {"kind", "a", "b", "table"}
        if extra:
            raise ValidationError(f"unknown growth-rule fields {sorted(extra)}")
        return cls(d["kind"], int(d.get("a", 1)), int(d.get("b", 0)), tuple(int(v) for v in d.get("table", ())))


# -- breakpoints ----------------------------------------------------------------

def breakpoints_tree1(f: GrowthRule, K: int, horizon: int | None = None) -> list:
    """``n_k`` = least n with ``f(m) >= 2^k`` for every m in ``[n, horizon]``."""
    horizon = f.horizon if horizon is None else horizon
    if f.value(horizon) <= f.value(1):
        raise ValidationError("growth rule is not diverging on the scanned range")
    out = []
    for k in range(1, K + 1):
        target = 1 << k
        if f.value(horizon) < target:
            raise ResourceCapError(
                f"inconclusive-at-cap: only {len(out)} breakpoints below horizon {horizon}")
        if f.monotone:
            lo, hi = 0, horizon  # f(hi) >= target
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if f.value(mid) >= target:
                    hi = mid
                else:
                    lo = mid
            n = hi if f.value(lo) < target else lo
        else:
            n = horizon
            while n > 0 and f.value(n - 1) >= target:
                n -= 1
        n = max(n, 1, out[-1] + 1 if out else 1)
        out.append(n)
    return out


def breakpoints_tree2(f: GrowthRule, K: int, horizon: int = TREE2_HORIZON) -> list:
    """``n_0 = 0`` and ``n_k`` = least threshold with ``f(m) <= 2^{m-k}`` on
    ``[n_k, horizon]``, forced strictly increasing."""
    horizon = min(horizon, f.horizon)
    out = [0]
    for k in range(1, K + 1):
        if f.value(horizon) << k > 1 << horizon:
            raise ResourceCapError(
                f"inconclusive-at-cap: f(m) <= 2^(m-{k}) not reached by horizon {horizon}")
        n = horizon
        while n > 0 and f.value(n - 1) << k <= 1 << (n - 1):
            n -= 1
        out.append(max(n, out[-1] + 1))
    return out


# -- built trees -------------------------------------------------------------------

@dataclass
class BuiltTree:
    """Prefix-set oracle for one construction.

    ``breakpoints`` holds ``n_1..n_K`` for tree1 and ``n_0..n_K`` for tree2.
    The last block (tree1) or family (tree2) is left free, so the closed
    form also holds past ``n_K``.
    """

    kind: str
    breakpoints: tuple
    f: GrowthRule | None = None
    adjust: bool = False
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        bp = tuple(int(v) for v in self.breakpoints)
        if any(b >= c for b, c in zip(bp, bp[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        if self.kind == "tree1":
            if not bp or bp[0] < 1:
                raise ValidationError("tree1 breakpoints start at n_1 >= 1")
        elif self.kind == "tree2":
            if not bp or bp[0] != 0:
                raise ValidationError("tree2 breakpoints start at n_0 = 0")
        else:
            raise ValidationError(f"unknown construction {self.kind!r}")
        if self.adjust and self.f is None:
            raise ValidationError("padding or trimming needs a growth rule")
        self.breakpoints = bp

    def _k(self, n: int) -> int:
        bp = self.breakpoints
        if self.kind == "tree1":
            return sum(1 for b in bp if b <= n)
        return sum(1 for b in bp[1:] if b <= n)

    def base_count(self, n: int) -> int:
        k = self._k(n)
        if self.kind == "tree1":
            return 1 << k
        return (1 << (n - k)) + sum(1 << (self.breakpoints[i] - i) for i in range(1, k + 1))

    def count(self, n: int) -> int:
        """Closed-form ``d(n)``."""
        if n < 0:
            raise ValidationError("n must be >= 0")
        if self.adjust:
            return 1 if n == 0 else self.f.value(n)
        return self.base_count(n)

    # -- enumeration, built from x_{-1} backwards ---------------------------
    def _base_rev(self, n: int) -> set:
        if self.base_count(n) > PREFIX_CAP:
            raise ResourceCapError(f"d({n}) exceeds the enumeration cap {PREFIX_CAP}")
        return self._tree1_rev(n) if self.kind == "tree1" else self._tree2_rev(n)

    def _tree1_rev(self, n: int) -> set:
        bp = self.breakpoints
        blocks = [(b, bp[i + 1] if i + 1 < len(bp) else math.inf) for i, b in enumerate(bp) if b <= n]
        lead = "0" * (min(n, bp[0] - 1))
        out = set()
        for bits in product("01", repeat=len(blocks)):
            s = lead + "".join(ch * (min(end, n + 1) - start) for ch, (start, end) in zip(bits, blocks))
            out.add(s)
        return out

    def _tree2_rev(self, n: int) -> set:
        bp = self.breakpoints
        K = len(bp) - 1
        out = set()
        for k in range(K + 1):
            free = bp[k + 1] - k if k < K else math.inf
            ones = min(n, k)
            nfree = int(min(n - ones, free))
            zeros = n - ones - nfree
            for w in product("01", repeat=nfree):
                out.add("1" * ones + "".join(w) + "0" * zeros)
        return out

    def _adjusted_rev(self, n: int) -> set:
        if n in self._memo:
            return self._memo[n]
        if n == 0:
            self._memo[0] = {""}
            return self._memo[0]
        prev = self._adjusted_rev(n - 1)
        base = self._base_rev(n)
        target = self.f.value(n)
        if self.kind == "tree1":
            pool = {p + ch for p in prev for ch in "01"}
            keep = set(base)
        else:
            pool = {s for s in base if s[:-1] in prev}
            keep = set()
        if self.kind == "tree1":
            order = sorted(pool, key=lambda s: s[::-1])
        else:
            room = self._room(n)
            order = sorted(pool, key=lambda s: (-room.get(s, 0), s[::-1]))
        covered = {s[:-1] for s in keep}
        for s in order:
            if s[:-1] not in covered:
                keep.add(s)
                covered.add(s[:-1])
        if len(keep) > target:
            raise ValidationError(f"cannot adjust to f({n}) = {target}: at least {len(keep)} prefixes are forced")
        for s in order:
            if len(keep) == target:
                break
            keep.add(s)
        if len(keep) < target:
            raise ValidationError(f"cannot adjust to f({n}) = {target}: only {len(keep)} prefixes are available")
        self._memo[n] = keep
        return keep

    def _room(self, n: int) -> dict:
        """Descendant counts a few levels ahead, so trimming keeps the
        prefixes that can still branch."""
        ahead = n
        while ahead < n + TRIM_LOOKAHEAD and self.base_count(ahead + 1) <= TRIM_LOOKAHEAD_CAP:
            ahead += 1
        room = {}
        for w in self._base_rev(ahead):
            room[w[:n]] = room.get(w[:n], 0) + 1
        return room

    def prefixes(self, n: int) -> list:
        """Sorted length-``n`` prefixes, each as a tuple in natural order."""
        if n < 0:
            raise ValidationError("n must be >= 0")
        rev = self._adjusted_rev(n) if self.adjust else self._base_rev(n)
        return sorted(tuple(int(ch) for ch in reversed(s)) for s in rev)

    def table(self, N: int) -> list:
        return [(n, self.count(n)) for n in range(N + 1)]

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "breakpoints": list(self.breakpoints), "adjust": self.adjust}
        if self.f is not None:
            d["f"] = self.f.descriptor()
        return d


def build_tree1(f: GrowthRule, N: int, pad: bool = False, horizon: int | None = None) -> BuiltTree:
    """Tree1 with every breakpoint up to depth ``N``."""
    horizon = f.horizon if horizon is None else horizon
    if N > horizon:
        raise ResourceCapError(f"depth {N} exceeds the breakpoint horizon {horizon}")
    bps = breakpoints_tree1(f, 1, horizon)
    while bps[-1] <= N:
        try:
            nxt = breakpoints_tree1(f, len(bps) + 1, horizon)
        except ResourceCapError:
            break  # f stays below 2^(k+1) up to the horizon, so n_{k+1} > N
        if nxt[-1] > N:
            break
        bps = nxt
    return BuiltTree("tree1", tuple(bps), f, pad)


def build_tree2(N: int, f: GrowthRule | None = None, breakpoints=None, trim: bool = False,
                horizon: int = TREE2_HORIZON) -> BuiltTree:
    """Tree2 from explicit breakpoints or from a growth rule."""
    if breakpoints is None:
        if f is None:
            raise ValidationError("tree2 needs breakpoints or a growth rule")
        bps = [0]
        k = 1
        while True:
            nk = breakpoints_tree2(f, k, horizon)
            if nk[-1] > N:
                break
            bps = nk
            k += 1
        breakpoints = bps
    return BuiltTree("tree2", tuple(breakpoints), f, trim)


def figure2_tree() -> BuiltTree:
    return BuiltTree("tree2", FIGURE2_BREAKPOINTS)


@dataclass
class CrosscheckReport:
    verdict: str
    n: list
    closed_form: list
    enumerated: list
    tree: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def growth_crosscheck(bt: BuiltTree, N: int) -> CrosscheckReport:
    """Brute-force ``d(n)`` against the closed form and check that each level
    is the prefix projection of the next, for ``n <= N``."""
    ns, closed, brute = [], [], []
    prev = None
    for n in range(N + 1):
        words = bt.prefixes(n)
        c = bt.count(n)
        if len(words) != c:
            raise ConstructionMismatch(
                f"{bt.kind}: enumerated d({n}) = {len(words)} but the closed form gives {c}")
        if prev is not None and {w[1:] for w in words} != prev:
            raise ConstructionMismatch(f"{bt.kind}: level {n} does not project onto level {n - 1}")
        prev = set(words)
        ns.append(n)
        closed.append(c)
        brute.append(len(words))
    return CrosscheckReport("holds", ns, closed, brute, bt.descriptor())
