"""Alphabets, finite words and finitely representable left-infinite pasts.

Symbols are small ordinals indexing into an :class:`Alphabet`; a word is a
tuple of ordinals written left to right, so its last entry is the most
recent symbol.  An :class:`AnchoredPast` stands for the eventually periodic
sequence ``...period period suffix`` with ``suffix[-1]`` at position -1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import ValidationError

Word = tuple  # tuple[int, ...]

LOG_ZERO = -math.inf


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet.

    Parameters
    ----------
    glyphs : tuple of str
        One printable character per symbol.  Symbol ``i`` is ``glyphs[i]``
        and the enumeration order is the order of this tuple.
    """

    glyphs: tuple

    def __post_init__(self):
        glyphs = tuple(str(g) for g in self.glyphs)
        object.__setattr__(self, "glyphs", glyphs)
        if len(glyphs) < 2:
            raise ValidationError("an alphabet needs at least two symbols")
        if len(set(glyphs)) != len(glyphs):
            raise ValidationError(f"alphabet symbols must be distinct: {glyphs}")
        for g in glyphs:
            if len(g) != 1 or g in "()":
                raise ValidationError(f"glyph {g!r} must be one character other than '(' or ')'")

    @property
    def size(self) -> int:
        return len(self.glyphs)

    def __len__(self) -> int:
        return len(self.glyphs)

    def check_symbol(self, a) -> int:
        if isinstance(a, bool) or not isinstance(a, (int,)) and not hasattr(a, "__index__"):
            raise ValidationError(f"symbol {a!r} is not an ordinal")
        a = int(a)
        if not 0 <= a < self.size:
            raise ValidationError(f"symbol {a} outside alphabet of size {self.size}")
        return a

    def check_word(self, w: Iterable) -> Word:
        return tuple(self.check_symbol(a) for a in w)

    def parse_word(self, text: str) -> Word:
        index = {g: i for i, g in enumerate(self.glyphs)}
        try:
            return tuple(index[c] for c in text)
        except KeyError as exc:
            raise ValidationError(f"glyph {exc.args[0]!r} not in alphabet {self.glyphs}") from None

    def format_word(self, w: Sequence[int]) -> str:
        return "".join(self.glyphs[a] for a in w)

    def words(self, n: int):
        """All words of length ``n`` in lexicographic order."""
        from itertools import product

        return product(range(self.size), repeat=n)

    def to_list(self) -> list:
        return list(self.glyphs)


BINARY = Alphabet(("0", "1"))
SPINS = Alphabet(("-", "+"))


def _primitive_root(w: Word) -> Word:
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p]
    return w


@dataclass(frozen=True)
class AnchoredPast:
    """Eventually periodic past ``...period period suffix``.

    The stored form is canonical: ``period`` is primitive and ``suffix`` is
    as short as possible, so equal sequences compare equal.
    """

    period: Word
    suffix: Word = ()

    def __post_init__(self):
        period = tuple(int(a) for a in self.period)
        suffix = tuple(int(a) for a in self.suffix)
        if not period:
            raise ValidationError("period must be nonempty")
        period = _primitive_root(period)
        # absorb leading suffix symbols that continue the periodic part
        k = 0
        p = len(period)
        while k < len(suffix) and suffix[k] == period[k % p]:
            k += 1
        if k:
            r = k % p
            period = period[r:] + period[:r]
            suffix = suffix[k:]
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "suffix", suffix)

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet = BINARY) -> "AnchoredPast":
        """Parse the ``(<period>)<suffix>`` text encoding."""
        m = re.fullmatch(r"\((.+)\)(.*)", text.strip())
        if m is None:
            raise ValidationError(f"past {text!r} is not of the form '(<period>)<suffix>'")
        return cls(alphabet.parse_word(m.group(1)), alphabet.parse_word(m.group(2)))

    def format(self, alphabet: Alphabet = BINARY) -> str:
        return f"({alphabet.format_word(self.period)}){alphabet.format_word(self.suffix)}"

    def at(self, i: int) -> int:
        """Symbol at position ``i`` (``i <= -1``)."""
        if i >= 0:
            raise ValidationError(f"past positions are negative, got {i}")
        j = -i
        ns = len(self.suffix)
        if j <= ns:
            return self.suffix[ns - j]
        p = len(self.period)
        return self.period[(p - (j - ns) % p) % p]

    def last(self, n: int) -> Word:
        """The word ``x_{-n}^{-1}``."""
        ns = len(self.suffix)
        if n <= ns:
            return self.suffix[ns - n:]
        need = n - ns
        p = len(self.period)
        reps = -(-need // p)
        return (self.period * reps)[reps * p - need:] + self.suffix

    def append(self, w: Iterable[int]) -> "AnchoredPast":
        w = tuple(w)
        if not w:
            return self
        return AnchoredPast(self.period, self.suffix + w)

    def upper_density(self, one: int) -> float:
        return self.period.count(one) / len(self.period)

    def distance_to_last(self, a: int) -> float:
        """Smallest ``j >= 1`` with ``x_{-j} = a``; ``inf`` if ``a`` never occurs."""
        ns = len(self.suffix)
        for j in range(1, ns + 1):
            if self.suffix[ns - j] == a:
                return j
        p = len(self.period)
        for j in range(1, p + 1):
            if self.period[p - j] == a:
                return ns + j
        return math.inf

    def constant_beyond(self, depth: int, a: int) -> bool:
        """True when every position ``i <= -depth`` carries ``a``."""
        if any(s != a for s in self.period):
            return False
        ns = len(self.suffix)
        return all(self.suffix[ns - j] == a for j in range(max(depth, 1), ns + 1))

    def materialize(self) -> "AnchoredPast":
        return self

    def split(self):
        """Return ``(anchored_base, appended_symbols)``."""
        return self, ()

    @property
    def horizon(self) -> int:
        """Number of positions after which the sequence is purely periodic."""
        return len(self.suffix) + len(self.period)


class PastBuffer:
    """An anchored past followed by a growable list of appended symbols.

    Used by simulation so that each step costs O(1) rather than rebuilding
    the canonical form.
    """

    __slots__ = ("base", "tail")

    def __init__(self, base: AnchoredPast, tail: Iterable[int] = ()):
        self.base = base
        self.tail = list(tail)

    def push(self, a: int) -> None:
        self.tail.append(a)

    def at(self, i: int) -> int:
        if i >= 0:
            raise ValidationError(f"past positions are negative, got {i}")
        n = len(self.tail)
        if -i <= n:
            return self.tail[n + i]
        return self.base.at(i + n)

    def last(self, n: int) -> Word:
        t = len(self.tail)
        if n <= t:
            return tuple(self.tail[t - n:])
        return self.base.last(n - t) + tuple(self.tail)

    def upper_density(self, one: int) -> float:
        return self.base.upper_density(one)

    def distance_to_last(self, a: int) -> float:
        tail = self.tail
        n = len(tail)
        for j in range(1, n + 1):
            if tail[n - j] == a:
                return j
        return n + self.base.distance_to_last(a)

    def constant_beyond(self, depth: int, a: int) -> bool:
        n = len(self.tail)
        if any(self.tail[n - j] != a for j in range(max(depth, 1), n + 1)):
            return False
        return self.base.constant_beyond(max(depth - n, 1), a)

    def materialize(self) -> AnchoredPast:
        return self.base.append(self.tail)

    def split(self):
        return self.base, self.tail

    def append(self, w: Iterable[int]) -> AnchoredPast:
        return self.materialize().append(w)

    @property
    def horizon(self) -> int:
        return len(self.tail) + self.base.horizon


PastLike = Union[AnchoredPast, PastBuffer]


def past_at(p: PastLike, i: int) -> int:
    return p.at(i)


def append(p: PastLike, w: Iterable[int]) -> AnchoredPast:
    return p.append(w)


def upper_density(p: PastLike, one: int) -> float:
    return p.upper_density(one)


def same_sequence_horizon(p: AnchoredPast, q: AnchoredPast) -> int:
    """Number of positions that decide equality of two anchored pasts."""
    return len(p.period) * len(q.period) + len(p.suffix) + len(q.suffix)


def coerce_past(p, alphabet: Alphabet = BINARY) -> PastLike:
    if isinstance(p, (AnchoredPast, PastBuffer)):
        return p
    if isinstance(p, str):
        return AnchoredPast.parse(p, alphabet)
    raise ValidationError(f"cannot interpret {p!r} as a past")


@dataclass(frozen=True)
class LogWeight:
    """Log of a probability, kept separate so products never underflow."""

    value: float = 0.0
    exact: bool = True
    note: str = field(default="", compare=False)

    @property
    def prob(self) -> float:
        return math.exp(self.value)
