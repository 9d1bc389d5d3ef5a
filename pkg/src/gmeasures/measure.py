"""Exact cylinder probabilities of the forward measures mu^x, their shifts and
Cesaro averages.

The exact engine is a forward pass over a dictionary of live states.  Each
state is keyed by ``model.reduce(past, horizon)``, which is a summary that
fixes the model's future conditional laws for ``horizon`` more steps.  The
state also keeps one representative past.  Families with bounded or
renewal-type memory collapse the ``|A|^i`` paths to a handful of states.
Families without a reduction fall back to one state per path, up to
``max_states``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .core import AnchoredPast, Alphabet, PastLike
from .errors import NotApplicable, ResourceCapError, UndefinedResidual, ValidationError
from .models.base import GModel
from .models.renewal import RenewalModel

DEFAULT_MAX_STATES = 1 << 20
EXACT_TOL = 1e-12
TABLE_TOL = 1e-9


@dataclass
class CylinderTable:
    """Probabilities of all length-``n`` words, in lexicographic order."""

    n: int
    alphabet: Alphabet
    probs: dict
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, w) -> float:
        return self.probs[tuple(w)]

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def words(self):
        return list(self.probs)

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        meta = dict(self.provenance)
        if header:
            meta.update(header)
        meta["n"] = self.n
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["word", "probability"])
        for w, p in self.probs.items():
            wr.writerow([self.alphabet.format_word(w), repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, alphabet: Alphabet) -> "CylinderTable":
        lines = text.splitlines()
        meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
        body = [ln for ln in lines if not ln.startswith("#")]
        rows = list(csv.reader(body))[1:]
        probs = {alphabet.parse_word(w): float(p) for w, p in rows}
        n = meta.pop("n", len(rows[0][0]) if rows else 0)
        return cls(n, alphabet, probs, meta)


def _full_table(alphabet: Alphabet, n: int, acc: dict) -> dict:
    return {tuple(w): math.fsum(acc.get(tuple(w), ())) for w in alphabet.words(n)}


class ExactEngine:
    """Forward pass over reduced states.

    Parameters
    ----------
    model : GModel
    past : PastLike
    max_states : int
        Hard cap on the number of live states per step.
    """

    def __init__(self, model: GModel, past: PastLike, max_states: int = DEFAULT_MAX_STATES):
        self.model = model
        self.past = past.materialize()
        self.max_states = int(max_states)

    def _step(self, states: dict, horizon: int, tag) -> dict:
        """Advance every state by one symbol.

        ``states`` maps key -> (representative, [probability terms], label);
        ``tag(label, a)`` returns the label carried to the child.
        """
        model = self.model
        acc = {}
        for rep, terms, label in states.values():
            p = math.fsum(terms)
            if p == 0.0:
                continue
            d = model.dist(rep)
            for a, pa in enumerate(d):
                if pa <= 0.0:
                    continue
                child = rep.append((a,))
                lab = tag(label, a)
                key = (model.reduce(child, horizon), lab)
                slot = acc.get(key)
                if slot is None:
                    acc[key] = (child, [p * pa], lab)
                    if len(acc) > self.max_states:
                        raise ResourceCapError(
                            f"exact forward pass exceeded {self.max_states} live states; "
                            "use Monte Carlo mode or raise --max-exact-states"
                        )
                else:
                    slot[1].append(p * pa)
        return acc

    def initial(self, horizon: int, label=()):
        key = (self.model.reduce(self.past, horizon), label)
        return {key: (self.past, [1.0], label)}

    def run(self, steps: int, lookahead: int, window: int = 0, on_step=None) -> dict:
        """Advance ``steps`` symbols, labelling states with the last ``window``
        emitted symbols.  ``on_step(t, states)`` is called after each step."""
        states = self.initial(steps + lookahead)

        def tag(label, a):
            return (label + (a,))[-window:] if window else ()

        for t in range(1, steps + 1):
            states = self._step(states, steps - t + lookahead, tag)
            if on_step is not None:
                on_step(t, states)
        return states


def mu_x_cylinder(model: GModel, past: PastLike, w) -> float:
    """Forward probability of ``w`` at positions ``0..|w|-1`` given ``past``."""
    return math.exp(model.g_n_log(past, w))


def shifted_marginal(model: GModel, past: PastLike, i: int, w, max_states: int = DEFAULT_MAX_STATES) -> float:
    """``mu^{x,-i}`` of the cylinder ``w`` at window ``[0, |w|-1]``."""
    if i < 0:
        raise ValidationError("shift index must be >= 0")
    w = model.alphabet.check_word(w)
    states = ExactEngine(model, past, max_states).run(i, len(w))
    terms = []
    for rep, t, _ in states.values():
        p = math.fsum(t)
        if p > 0:
            lg = model.g_n_log(rep, w)
            if lg > -math.inf:
                terms.append(p * math.exp(lg))
    return math.fsum(terms)


def marginal_series(model: GModel, past: PastLike, I: int, w=(1,), max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """``mu^{x,-i}([w])`` for ``i = 0..I`` in one forward pass."""
    w = model.alphabet.check_word(w)
    if isinstance(model, RenewalModel) and w == (1,):
        return renewal_marginal_series(model, past, I)
    out = np.empty(I + 1)
    engine = ExactEngine(model, past, max_states)

    def value(states):
        terms = []
        for rep, t, _ in states.values():
            lg = model.g_n_log(rep, w)
            if lg > -math.inf:
                terms.append(math.fsum(t) * math.exp(lg))
        return math.fsum(terms)

    states = engine.initial(I + len(w))
    out[0] = value(states)

    def record(t, st):
        out[t] = value(st)

    engine.run(I, len(w), on_step=record)
    return out


def renewal_marginal_series(model: RenewalModel, past: PastLike, I: int) -> np.ndarray:
    """Exact ``mu^{x,-i}([1]_0)``, ``i = 0..I``, by the renewal recursion.

    The state distribution over ``l1`` is propagated as a vector.  The
    all-zero state (``l1 = inf``) is kept separately.
    """
    l0 = past.distance_to_last(1)
    size = I + 2 + (0 if l0 == math.inf else int(l0))
    mass = np.zeros(size + 1)
    inf_mass = 0.0
    if l0 == math.inf:
        inf_mass = 1.0
    else:
        mass[int(l0)] = 1.0
    q = np.zeros(size + 1)
    q[1:] = model.q.values(np.arange(1, size + 1))
    out = np.empty(I + 1)
    for i in range(I + 1):
        ones = mass * q
        p1 = math.fsum(ones) + inf_mass * model.q_inf
        out[i] = p1
        new = np.zeros_like(mass)
        new[2:] = (mass - ones)[1:-1]
        new[1] = p1
        mass = new
        inf_mass *= 1.0 - model.q_inf
    return out


def cesaro_table(model: GModel, past: PastLike, k: int, n: int,
                 max_states: int = DEFAULT_MAX_STATES) -> CylinderTable:
    """``(1/k) sum_{i<k} mu^{x,-i}`` on all length-``n`` cylinders."""
    if k < 1 or n < 1:
        raise ValidationError("k and n must be >= 1")
    acc = defaultdict(list)

    def record(t, states):
        if t >= n:
            for _, terms, label in states.values():
                acc[label].append(math.fsum(terms) / k)

    ExactEngine(model, past, max_states).run(k - 1 + n, 0, window=n, on_step=record)
    probs = _full_table(model.alphabet, n, acc)
    return CylinderTable(n, model.alphabet, probs,
                         {"mode": "exact", "k": k, "model": model.descriptor(),
                          "past": past.materialize().format(model.alphabet)})


def shifted_table(model: GModel, past: PastLike, i: int, n: int,
                  max_states: int = DEFAULT_MAX_STATES) -> CylinderTable:
    """``mu^{x,-i}`` on all length-``n`` cylinders."""
    acc = defaultdict(list)

    def record(t, states):
        if t == i + n:
            for _, terms, label in states.values():
                acc[label].append(math.fsum(terms))

    ExactEngine(model, past, max_states).run(i + n, 0, window=n, on_step=record)
    return CylinderTable(n, model.alphabet, _full_table(model.alphabet, n, acc),
                         {"mode": "exact", "i": i, "model": model.descriptor()})


def cesaro_table_mc(model: GModel, past: PastLike, k: int, n: int, reps: int, seed: int) -> CylinderTable:
    """Monte Carlo estimate of :func:`cesaro_table`."""
    from .montecarlo import simulate_batch

    A = model.alphabet.size
    counts = np.zeros(A ** n, dtype=np.int64)
    weights = A ** np.arange(n - 1, -1, -1)
    for chunk in simulate_batch(model, past, k - 1 + n, reps, seed):
        codes = np.zeros((chunk.shape[0], k), dtype=np.int64)
        for j in range(n):
            codes += chunk[:, j:j + k].astype(np.int64) * weights[j]
        counts += np.bincount(codes.ravel(), minlength=A ** n)
    total = counts.sum()
    probs = {tuple(w): counts[c] / total for c, w in enumerate(model.alphabet.words(n))}
    return CylinderTable(n, model.alphabet, probs,
                         {"mode": "monte-carlo", "k": k, "samples": int(reps), "seed": int(seed),
                          "model": model.descriptor()})


def compatibility_residual(model: GModel, table: CylinderTable, w, a: int) -> float:
    """``t(w a) / sum_b t(w b) - g(. w a)``, defined when ``w`` fixes the context."""
    w = model.alphabet.check_word(w)
    a = model.alphabet.check_symbol(a)
    if len(w) + 1 != table.n:
        raise ValidationError(f"table length {table.n} needs a conditioning word of length {table.n - 1}")
    if not w:
        raise NotApplicable("the empty word never fixes a context")
    if model.in_tau(w):
        raise NotApplicable(f"{model.alphabet.format_word(w)!r} lies in tau^{len(w)}: context not fixed")
    marg = math.fsum(table[w + (b,)] for b in range(model.alphabet.size))
    if marg <= 0.0:
        raise UndefinedResidual(f"zero marginal on {model.alphabet.format_word(w)!r}")
    return table[w + (a,)] / marg - model.eval(AnchoredPast((0,), w), a)


@dataclass
class SandwichVerdict:
    holds: bool
    eps: float
    n: int
    lower: float
    upper: float
    min_entry: float
    max_entry: float
    violations: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sandwich_check(model: GModel, table: CylinderTable, rel_tol: float = EXACT_TOL) -> SandwichVerdict:
    """Check ``eps^n <= t(w) <= (1 - eps)^n`` for every entry."""
    eps = model.inf_g()
    if eps <= 0:
        raise NotApplicable("sandwich bound needs inf g > 0")
    n = table.n
    lo, hi = eps ** n, (1.0 - eps) ** n
    bad = [model.alphabet.format_word(w) for w, p in table.probs.items()
           if p < lo * (1 - rel_tol) or p > hi * (1 + rel_tol)]
    vals = list(table.probs.values())
    return SandwichVerdict(not bad, eps, n, lo, hi, min(vals), max(vals), bad)


def window_joint(model: GModel, past: PastLike, burn: int, w: int, gap: int,
                 max_states: int = DEFAULT_MAX_STATES) -> dict:
    """Exact law of ``(u, v)``.

    ``u = x_{burn-w} .. x_{burn-1}`` and ``v`` is the length-``w`` window
    starting at ``x_{burn-1+gap}``, so the last symbol of ``u`` and the first
    of ``v`` are ``gap`` steps apart, as in the definition of beta(gap).
    """
    if gap < 1:
        raise ValidationError("gap must be >= 1")
    engine = ExactEngine(model, past, max_states)
    total = burn + gap - 1 + w
    states = engine.run(burn, gap - 1 + w)
    # relabel by u, then carry (u, v-so-far) through the gap and the v window
    relabeled = {}
    for key, (rep, terms, _) in states.items():
        u = rep.last(w)
        lab = (u, ())
        k2 = (key[0], lab)
        if k2 in relabeled:
            relabeled[k2][1].extend(terms)
        else:
            relabeled[k2] = (rep, list(terms), lab)
    states = relabeled
    for t in range(1, gap + w):
        collect = t >= gap

        def tag(label, a, collect=collect):
            return (label[0], label[1] + (a,)) if collect else label

        states = engine._step(states, total - burn - t, tag)
    acc = defaultdict(list)
    for _, terms, (u, v) in states.values():
        acc[(u, v)].append(math.fsum(terms))
    return {k: math.fsum(v) for k, v in acc.items()}


def beta_from_joint(joint: dict) -> float:
    """``(1/2) sum |P(u,v) - P(u)P(v)|`` over all window pairs."""
    pu = defaultdict(float)
    pv = defaultdict(float)
    for (u, v), p in joint.items():
        pu[u] += p
        pv[v] += p
    terms = []
    for u in pu:
        for v in pv:
            terms.append(abs(joint.get((u, v), 0.0) - pu[u] * pv[v]))
    return 0.5 * math.fsum(terms)
