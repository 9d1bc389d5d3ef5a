"""Invariants checked on randomly drawn models, pasts and words."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from gmeasures import measure as M
from gmeasures import montecarlo as MC
from gmeasures import treebuilder as TB
from gmeasures.core import BINARY, AnchoredPast
from gmeasures.models import (
    BergerModel, GeneralizedRenewalModel, RenewalModel, SpinFlipFactor, TabulatedTree, TrunkTreeModel,
)
from gmeasures.qrules import Constant, Harmonic, Power

probs = st.floats(0.05, 0.95)


@st.composite
def models(draw):
    kind = draw(st.sampled_from(["renewal", "harmonic", "trunk", "berger", "spinflip", "markov", "generalized"]))
    if kind == "renewal":
        return RenewalModel(Constant(draw(probs)), draw(probs))
    if kind == "harmonic":
        return RenewalModel(Harmonic(), draw(st.floats(0.0, 0.9)))
    if kind == "trunk":
        return TrunkTreeModel(draw(st.floats(0.01, 0.45)))
    if kind == "berger":
        return BergerModel(draw(st.floats(0.55, 0.95)), draw(st.floats(0.05, 0.45)), 0.5)
    if kind == "spinflip":
        return SpinFlipFactor(draw(st.floats(0.05, 0.45)))
    if kind == "markov":
        return TabulatedTree({(0,): _pair(draw(probs)), (1,): _pair(draw(probs))})
    return GeneralizedRenewalModel(Power(draw(st.floats(1.5, 4.0))), draw(st.floats(0.25, 2.0)), 1)


def _pair(p):
    return (p, 1.0 - p)


@st.composite
def pasts(draw):
    period = draw(st.lists(st.integers(0, 1), min_size=1, max_size=3))
    suffix = draw(st.lists(st.integers(0, 1), max_size=6))
    return AnchoredPast(tuple(period), tuple(suffix))


@st.composite
def model_and_past(draw):
    m = draw(models())
    p = draw(pasts())
    if isinstance(m, TrunkTreeModel):
        # keep to pasts with a finite context in the trunk tree
        p = AnchoredPast((0,), (1,) + p.suffix)
    return m, p


words = st.lists(st.integers(0, 1), min_size=0, max_size=6).map(tuple)


@settings(max_examples=40)
@given(model_and_past())
def test_kernel_normalized(mp):
    m, p = mp
    d = m.dist(p)
    assert abs(math.fsum(d) - 1.0) <= 1e-12
    assert all(0.0 <= x <= 1.0 for x in d)


@settings(max_examples=40)
@given(model_and_past(), words, st.integers(0, 1))
def test_telescoping(mp, w, a):
    m, p = mp
    lhs = m.g_n_log(p, w + (a,))
    rest = m.g_n_log(p, w)
    step = m.dist(p.append(w))[a]
    if rest == -math.inf or step == 0.0:
        assert lhs == -math.inf
    else:
        assert math.isclose(lhs, rest + math.log(step), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=25)
@given(model_and_past(), st.integers(1, 3), st.integers(0, 4))
def test_cylinders_sum_to_one(mp, n, i):
    m, p = mp
    assert abs(M.shifted_table(m, p, i, n).total() - 1.0) <= 1e-12


@settings(max_examples=25)
@given(model_and_past(), st.integers(0, 4), st.integers(1, 3))
def test_shift_marginalizes(mp, i, n):
    # mu^{x,-(i+1)} of length n equals mu^{x,-i} of length n+1 summed over the first symbol
    m, p = mp
    big = M.shifted_table(m, p, i, n + 1)
    small = M.shifted_table(m, p, i + 1, n)
    for w in small.words():
        assert abs(small[w] - math.fsum(big[(a,) + w] for a in (0, 1))) <= 1e-12
    # and summing over the last symbol gives mu^{x,-i} of length n
    prev = M.shifted_table(m, p, i, n)
    for w in prev.words():
        assert abs(prev[w] - math.fsum(big[w + (a,)] for a in (0, 1))) <= 1e-12


@settings(max_examples=15)
@given(model_and_past(), st.integers(5, 20))
def test_cesaro_near_stationary(mp, k):
    # the Cesaro average is within 2/k of its own shift, cylinder by cylinder
    m, p = mp
    n = 2
    big = M.cesaro_table(m, p, k, n + 1)
    tab = M.cesaro_table(m, p, k, n)
    for w in tab.words():
        shifted = math.fsum(big[(a,) + w] for a in (0, 1))
        assert abs(shifted - tab[w]) <= 2.0 / k + 1e-12


@settings(max_examples=60)
@given(pasts(), words)
def test_canonical_past(p, w):
    again = AnchoredPast.parse(p.format(BINARY), BINARY)
    assert again == p
    q = p.append(w)
    assert q.last(len(w)) == w
    for i in range(1, 10):
        assert q.at(-i - len(w)) == p.at(-i)


@settings(max_examples=20)
@given(models(), st.integers(0, 2 ** 64 - 1), st.integers(0, 3))
def test_replay_determinism(m, seed, stream):
    p = AnchoredPast((0,), (1,))
    a = MC.sample(m, p, 200, seed, stream).symbols
    b = MC.sample(m, p, 200, seed, stream).symbols
    assert np.array_equal(a, b)


@settings(max_examples=15)
@given(probs, probs, st.integers(1, 4), st.integers(1, 2))
def test_beta_in_unit_interval(a, b, gap, w):
    m = TabulatedTree({(0,): _pair(a), (1,): _pair(b)})
    beta = M.beta_from_joint(M.window_joint(m, AnchoredPast((0,), ()), 5, w, gap))
    assert -1e-15 <= beta <= 1.0 + 1e-15
    # two-state chain: second eigenvalue a - b bounds beta(gap) for window 1
    if w == 1:
        assert beta <= abs(a - b) ** gap + 1e-12


@settings(max_examples=20)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(1, 12))
def test_tree2_prefix_consistency(gaps, n):
    bps = tuple(np.cumsum([0] + gaps).tolist())
    bt = TB.BuiltTree("tree2", bps)
    cur, prev = bt.prefixes(n), bt.prefixes(n - 1)
    assert len(cur) == bt.count(n) <= 2 ** n
    assert {w[1:] for w in cur} == set(prev)
    assert bt.count(n) >= bt.count(n - 1)
