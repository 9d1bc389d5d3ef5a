"""Executable forms of the existence and uniqueness criteria.

The criteria are asymptotic, so every report pairs a finite-``N`` series
with an analytic certificate.  A report says "holds" or "fails" only when a
certificate or an exact finite witness backs it.  Otherwise it says
"inconclusive-at-cap".
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.special import logsumexp

from .core import Alphabet
from .errors import NotApplicable, ResourceCapError, ValidationError
from .models.base import GModel
from .models.generalized import GeneralizedRenewalModel
from .qrules import Power, QRule, SeriesResult, log_survival, survival_sum

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive-at-cap"
PRESSURE_WORD_CAP = 1 << 16


@dataclass
class CriterionReport:
    model: dict
    criterion: str
    verdict: str
    series: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    certificate: dict | None = None
    notes: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "criterion": self.criterion,
            "verdict": self.verdict,
            "values": _jsonable(self.values),
            "certificate": self.certificate,
            "caps": self.caps,
            "notes": list(self.notes),
            "series": _jsonable(self.series),
        }

    def series_csv(self) -> str:
        if not self.series:
            return ""
        cols = list(self.series)
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for row in zip(*(self.series[c] for c in cols)):
            wr.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# -- renewal series ---------------------------------------------------------------

def v_of_q(q: QRule, tol: float = 1e-9, K_max: int = 1 << 22) -> SeriesResult:
    """``V(q) = sum_{k>=1} prod_{i<=k}(1 - q_i)`` with certificate."""
    return survival_sum(q, tol, K_max)


def m_of_q(q: QRule, tol: float = 1e-9, K_max: int = 1 << 22) -> float:
    """Mean renewal time ``1 + V(q)``; ``inf`` when V diverges."""
    res = v_of_q(q, tol, K_max)
    if res.status == "diverges":
        return math.inf
    if res.status == "inconclusive":
        raise NotApplicable(f"V(q) undecided within K_max={K_max}: {res.certificate}")
    return 1.0 + res.value


# -- growth -------------------------------------------------------------------------

@dataclass
class GrowthSeries:
    n: list
    tau: list
    disc: list

    @property
    def tau_roots(self) -> list:
        return [c ** (1.0 / n) for n, c in zip(self.n, self.tau)]

    @property
    def disc_roots(self) -> list:
        return [c ** (1.0 / n) for n, c in zip(self.n, self.disc)]

    def as_series(self) -> dict:
        return {"n": self.n, "tau_count": self.tau, "disc_count": self.disc,
                "tau_root": self.tau_roots, "disc_root": self.disc_roots}


def growth_series(model: GModel, N: int) -> GrowthSeries:
    """Exact ``|tau^n|`` and ``|D_g^n|`` for ``n = 1..N``."""
    model.check_enumeration(N)
    ns, tau, disc = [], [], []
    A = model.alphabet.size
    for n in range(1, N + 1):
        t = model.count_contexts(n)
        d = model.count_discontinuity_prefixes(n)
        if not (d <= t <= A ** n) and model.is_context_tree:
            raise ValidationError(f"enumeration invariant broken at n={n}: |D|={d}, |tau|={t}")
        ns.append(n)
        tau.append(t)
        disc.append(d)
    return GrowthSeries(ns, tau, disc)


def growth_report(model: GModel, N: int) -> CriterionReport:
    gs = growth_series(model, N)
    cert = model.growth_certificate()
    rep = CriterionReport(model.descriptor(), "upper-exponential-growth", INCONCLUSIVE,
                          gs.as_series(), {"N": N})
    if cert is not None:
        rep.certificate = cert.to_dict()
        rep.verdict = HOLDS
        rep.values["growth_rate"] = cert.value
        rep.notes.append("verdict: the growth rate is certified analytically")
    return rep


# -- pressure --------------------------------------------------------------------------

@dataclass
class PressureSeries:
    n: list
    p: list
    exact: list
    bound: list  # (1/n) log |D^n|

    def as_series(self) -> dict:
        return {"n": self.n, "p_n": self.p, "exact": self.exact, "log_count_over_n": self.bound}


def _log_sup_sum(model: GModel, n: int):
    fast = getattr(model, "log_sup_sum", None)
    if fast is not None:
        res = fast(n)
        if res is not None:
            return res
    count = model.count_discontinuity_prefixes(n)
    if count == 0:
        return -math.inf, True
    if count > PRESSURE_WORD_CAP:
        raise ResourceCapError(f"|D^{n}| = {count} exceeds the pressure enumeration cap {PRESSURE_WORD_CAP}")
    logs, exact = [], True
    for w in sorted(model.enumerate_discontinuity_prefixes(n)):
        s = model.sup_gn(w)
        logs.append(s.value)
        exact = exact and s.exact
    return float(logsumexp(logs)), exact


def pressure_series(model: GModel, N: int) -> PressureSeries:
    """``p_n = (1/n) log sum_{w in D^n} sup_x g_n(x w)`` for ``n = 1..N``."""
    model.check_enumeration(N)
    ns, ps, ex, bd = [], [], [], []
    for n in range(1, N + 1):
        val, exact = _log_sup_sum(model, n)
        count = model.count_discontinuity_prefixes(n)
        ns.append(n)
        ps.append(val / n)
        ex.append(exact)
        bd.append(math.log(count) / n if count else -math.inf)
    return PressureSeries(ns, ps, ex, bd)


def pressure_report(model: GModel, N: int, delta: float = 1e-3) -> CriterionReport:
    ps = pressure_series(model, N)
    cert = model.pressure_certificate()
    rep = CriterionReport(model.descriptor(), "negative-pressure", INCONCLUSIVE, ps.as_series(), {"N": N})
    if cert is not None:
        rep.certificate = cert.to_dict()
        rep.values["pressure"] = cert.value
        if cert.value < 0:
            rep.verdict = HOLDS
        elif cert.kind == "exact":
            rep.verdict = FAILS
            rep.notes.append("pressure is not negative: the criterion does not apply")
    elif ps.p and ps.p[-1] <= -delta:
        rep.notes.append(f"P < 0 plausible: p_N = {ps.p[-1]:.6g}, no analytic certificate")
    if not all(ps.exact):
        rep.notes.append("some sup-products are certified upper bounds, so p_n are upper bounds")
    return rep


# -- v-freeness ----------------------------------------------------------------------

class ShiftDiscontinuities:
    """Discontinuity set equal to the full shift over a sub-alphabet.

    Stands in for a g-model in :func:`v_free_check` when only ``D_g`` is
    known, as with a set of the form ``B^{-N}``.
    """

    def __init__(self, alphabet: Alphabet, allowed):
        self.alphabet = alphabet
        self.allowed = tuple(sorted(alphabet.check_word(allowed)))

    def enumerate_discontinuity_prefixes(self, n: int) -> set:
        return set(product(self.allowed, repeat=n))

    def count_discontinuity_prefixes(self, n: int) -> int:
        return len(self.allowed) ** n

    def v_free_certificate(self, v):
        if any(a not in self.allowed for a in v):
            return True, "every element of D_g uses only the allowed symbols"
        return False, "D_g is a full shift containing every word over the allowed symbols"

    def descriptor(self) -> dict:
        return {"family": "shift-discontinuities", "alphabet": self.alphabet.to_list(),
                "allowed": self.alphabet.format_word(self.allowed)}


def _contains(word, v) -> bool:
    m = len(v)
    return any(tuple(word[i:i + m]) == v for i in range(len(word) - m + 1))


def v_free_check(model, v, N: int | None = None) -> CriterionReport:
    """Does some element of ``D_g`` contain ``v`` as a factor?"""
    v = model.alphabet.check_word(v)
    if not v:
        raise ValidationError("v must be nonempty")
    N = len(v) + 1 if N is None else N
    fmt = model.alphabet.format_word
    rep = CriterionReport(model.descriptor(), "v-free", INCONCLUSIVE, {"n": [], "witnesses": []},
                          {"N": N}, values={"v": fmt(v)})
    witness = None
    for n in range(len(v), N + 1):
        if model.count_discontinuity_prefixes(n) > PRESSURE_WORD_CAP:
            rep.notes.append(f"enumeration stopped at n={n - 1} (cap {PRESSURE_WORD_CAP})")
            break
        hits = sorted(w for w in model.enumerate_discontinuity_prefixes(n) if _contains(w, v))
        rep.series["n"].append(n)
        rep.series["witnesses"].append(len(hits))
        if hits and witness is None:
            witness = hits[0]
    cert = model.v_free_certificate(v)
    if cert is not None:
        rep.certificate = {"holds": cert[0], "reason": cert[1]}
    if witness is not None:
        rep.verdict = FAILS
        rep.values["witness"] = fmt(witness)
    elif cert is not None:
        rep.verdict = HOLDS if cert[0] else FAILS
    return rep


# -- growth threshold for strongly positive kernels ------------------------------------

def corollary5_threshold(alphabet_size: int, eps: float) -> float:
    gap = 1.0 - (alphabet_size - 1) * eps
    return math.inf if gap <= 0 else 1.0 / gap


def corollary5_check(model: GModel, N: int = 24) -> CriterionReport:
    """Compare the growth of ``tau^n`` with ``[1 - (|A|-1) eps]^{-1}``."""
    eps = model.inf_g()
    if eps <= 0:
        raise NotApplicable("inf g = 0: the growth criterion needs a strongly positive g")
    thr = corollary5_threshold(model.alphabet.size, eps)
    N = min(N, model.enumeration_cap)
    gs = growth_series(model, N)
    cert = model.growth_certificate()
    rep = CriterionReport(model.descriptor(), "corollary5-growth", INCONCLUSIVE,
                          {"n": gs.n, "tau_count": gs.tau, "tau_root": gs.tau_roots}, {"N": N},
                          values={"eps": eps, "threshold": thr,
                                  "max_observed_root": max(gs.tau_roots) if gs.tau_roots else 0.0})
    if cert is not None:
        rep.certificate = cert.to_dict()
        rep.values["growth_rate"] = cert.value
        if cert.value < thr:
            rep.verdict = HOLDS
        elif cert.kind == "exact":
            rep.verdict = FAILS
    else:
        rep.notes.append("no analytic growth certificate; finite-N roots alone cannot decide a limsup")
    return rep


# -- generalized renewal summability ----------------------------------------------------

@dataclass
class SummabilityResult:
    alpha: float
    delta: float
    c1: int
    summable: bool
    truncations: list
    partial_sums: list
    decay_exponent: float
    trend_agrees: bool

    def to_dict(self) -> dict:
        return _jsonable(dict(self.__dict__))


def summability_classifier(alpha: float, delta: float, c1: int = 1, I: int = 1 << 16) -> SummabilityResult:
    """Verdict ``delta + 1 < alpha`` plus the truncated double sum as corroboration."""
    if alpha <= 1 or delta <= 0:
        raise ValidationError("need alpha > 1 and delta > 0")
    model = GeneralizedRenewalModel(Power(alpha), delta=delta, c1=c1)
    P = np.exp(log_survival(model.s, I))  # P[m] = prod_{j<=m}(1 - s_j)
    R = np.concatenate((np.cumsum(P[::-1])[::-1], [0.0]))  # R[m] = sum_{t>=m} P[t]
    hinv = model.H_inverse_array(I)
    i = np.arange(1, I + 1)
    lo = hinv[1:]
    terms = np.where(lo <= i - 1, R[lo] - R[i], 0.0)
    csum = np.cumsum(terms)
    marks = [I // 16, I // 4, I]
    sel = (i >= I // 16) & (terms > 0)
    slope = float(np.polyfit(np.log(i[sel]), np.log(terms[sel]), 1)[0]) if sel.sum() > 2 else math.nan
    summable = delta + 1 < alpha
    gamma = -slope
    agrees = (gamma > 1 + 0.02) == summable if abs(gamma - 1) > 0.02 else not summable
    return SummabilityResult(alpha, delta, c1, summable, marks, [float(csum[m - 1]) for m in marks],
                             gamma, bool(agrees))


# -- s / r sandwich -------------------------------------------------------------------

def sr_sandwich(model: GModel, K: int = 32, tol: float = 1e-9) -> CriterionReport:
    """Envelopes ``s_i <= g <= r_i`` indexed by the distance to the last 1 and
    the existence / non-existence verdicts they imply."""
    rules = getattr(model, "sr_rules", None)
    if rules is None:
        raise NotApplicable(f"{model.family} has no renewal envelopes")
    s, r = rules()
    vs, vr = survival_sum(s, tol), survival_sum(r, tol)
    zero_rate = getattr(model, "q_inf", getattr(model, "s_inf", None))
    idx = list(range(1, K + 1))
    rep = CriterionReport(model.descriptor(), "sr-sandwich", INCONCLUSIVE,
                          {"i": idx, "s": [s.value(i) for i in idx], "r": [r.value(i) for i in idx]},
                          {"K": K, "tol": tol},
                          values={"V_s": vs.to_dict(), "V_r": vr.to_dict()})
    if vs.status == "finite":
        rep.verdict = HOLDS
        rep.values["conclusion"] = "V(s) finite: a stationary compatible measure exists"
    elif vr.status == "diverges":
        if zero_rate is not None and zero_rate > 0:
            rep.verdict = FAILS
            rep.values["conclusion"] = "V(r) diverges and g(0-bar 1) > 0: no stationary compatible measure"
        else:
            rep.verdict = HOLDS
            rep.values["conclusion"] = "V(r) diverges but g(0-bar 1) = 0: the Dirac mass at 0-bar is stationary"
    else:
        rep.values["conclusion"] = "envelopes do not decide existence"
    return rep


def v_of_q_report(model: GModel, tol: float = 1e-9) -> CriterionReport:
    rules = getattr(model, "sr_rules", None)
    if rules is None:
        raise NotApplicable(f"{model.family} is not a renewal-type model")
    q = rules()[0]
    res = v_of_q(q, tol)
    rep = CriterionReport(model.descriptor(), "renewal-V", INCONCLUSIVE,
                          {"k": [k for k, _ in res.partial_sums], "partial_sum": [v for _, v in res.partial_sums]},
                          {"tol": tol}, values=res.to_dict())
    if res.status == "finite":
        rep.verdict = HOLDS
        rep.values["m"] = 1.0 + res.value
        rep.values["limit_frequency"] = 1.0 / (1.0 + res.value)
    elif res.status == "diverges":
        rep.verdict = FAILS
        rep.values["m"] = math.inf
    return rep
