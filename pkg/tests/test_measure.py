from __future__ import annotations

import math

import numpy as np
import pytest

from gmeasures import measure as M
from gmeasures.core import BINARY, AnchoredPast
from gmeasures.errors import NotApplicable, ResourceCapError
from gmeasures.models import BergerModel, GeneralizedRenewalModel, RenewalModel, TabulatedTree, TrunkTreeModel
from gmeasures.qrules import Constant, Harmonic, Power, Table


def P(text):
    return AnchoredPast.parse(text, BINARY)


def brute_shifted(model, past, i, w):
    """Oracle: sum of mu^x(z w) over every z in A^i."""
    return math.fsum(math.exp(model.g_n_log(past, tuple(z) + tuple(w))) for z in BINARY.words(i))


IID = RenewalModel(Constant(0.4), 0.4)
MARKOV = TabulatedTree({(0,): (0.7, 0.3), (1,): (0.4, 0.6)})


def test_mu_x_cylinder_examples():
    assert M.mu_x_cylinder(IID, P("(0)1"), (1,)) == pytest.approx(0.4)
    assert M.mu_x_cylinder(IID, P("(0)1"), (0, 1)) == pytest.approx(0.24)
    assert M.mu_x_cylinder(IID, P("(0)1"), ()) == 1.0


def test_shifted_marginal_examples():
    for i in range(6):
        assert M.shifted_marginal(IID, P("(0)1"), i, (1,)) == pytest.approx(0.4, abs=1e-12)
    det = RenewalModel(Table((1.0,), Constant(0.5)), 0.5)
    assert M.shifted_marginal(det, P("(0)1"), 1, (1,)) == pytest.approx(1.0)
    assert M.shifted_marginal(MARKOV, P("(0)"), 0, (1, 0)) == M.mu_x_cylinder(MARKOV, P("(0)"), (1, 0))


@pytest.mark.parametrize("model,past", [
    (RenewalModel(Harmonic(), 0.5), "(0)1"),
    (RenewalModel(Harmonic(), 0.5), "(0)"),
    (BergerModel(), "(1)0"),
    (TrunkTreeModel(0.2), "(0)1"),
    (GeneralizedRenewalModel(Power(2.0), 1.0, 1), "(0)1"),
    (MARKOV, "(1)"),
])
def test_shifted_marginal_matches_brute_force(model, past):
    for i in range(0, 7):
        for w in ((1,), (0, 1)):
            exact = M.shifted_marginal(model, P(past), i, w)
            assert exact == pytest.approx(brute_shifted(model, P(past), i, w), abs=1e-12)


def test_marginal_series_matches_shifted_marginal():
    for model in (RenewalModel(Harmonic(), 0.5), TrunkTreeModel(0.3)):
        series = M.marginal_series(model, P("(0)1"), 12)
        for i in (0, 5, 12):
            assert series[i] == pytest.approx(M.shifted_marginal(model, P("(0)1"), i, (1,)), abs=1e-12)


def test_renewal_recursion_matches_engine():
    model = RenewalModel(Power(2.0), 0.3)
    fast = M.renewal_marginal_series(model, P("(0)100"), 30)
    engine = M.ExactEngine(model, P("(0)100"))
    vals = []
    engine.run(30, 1, on_step=lambda t, st: vals.append(
        math.fsum(math.fsum(x) * model.eval(rep, 1) for rep, x, _ in st.values())))
    assert np.allclose(fast[1:], vals, atol=1e-12)


def test_cesaro_k1_is_forward_table():
    tab = M.cesaro_table(MARKOV, P("(0)"), 1, 3)
    for w in BINARY.words(3):
        assert tab[w] == pytest.approx(M.mu_x_cylinder(MARKOV, P("(0)"), w), abs=1e-15)


def test_cesaro_iid():
    tab = M.cesaro_table(IID, P("(0)1"), 17, 1)
    assert tab[(1,)] == pytest.approx(0.4) and tab[(0,)] == pytest.approx(0.6)


def test_cesaro_sums_to_one_and_nonnegative():
    for model in (BergerModel(), RenewalModel(Harmonic(), 0.5), TrunkTreeModel(0.2)):
        tab = M.cesaro_table(model, P("(0)1"), 20, 3)
        assert tab.total() == pytest.approx(1.0, abs=1e-12)
        assert min(tab.probs.values()) >= 0.0


def test_cesaro_mc_close_to_exact():
    exact = M.cesaro_table(MARKOV, P("(0)"), 20, 2)
    mc = M.cesaro_table_mc(MARKOV, P("(0)"), 20, 2, 20000, seed=3)
    for w in BINARY.words(2):
        sigma = math.sqrt(exact[w] * (1 - exact[w]) / 20000)
        assert abs(mc[w] - exact[w]) <= 4 * sigma


def test_state_cap_is_enforced():
    with pytest.raises(ResourceCapError):
        M.cesaro_table(TrunkTreeModel(0.2), P("(0)"), 30, 4, max_states=8)


def test_csv_roundtrip():
    tab = M.cesaro_table(MARKOV, P("(0)"), 5, 2)
    again = M.CylinderTable.from_csv(tab.to_csv(), BINARY)
    assert again.n == 2 and again.probs == pytest.approx(tab.probs)


def test_compatibility_residual_examples():
    tab = M.cesaro_table(IID, P("(0)1"), 10, 2)
    assert M.compatibility_residual(IID, tab, (1,), 1) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(NotApplicable):
        M.compatibility_residual(IID, tab, (0,), 1)


def test_residual_for_markov_chain_is_small():
    k = 200
    tab = M.cesaro_table(MARKOV, P("(0)"), k, 2)
    for w in ((0,), (1,)):
        for a in (0, 1):
            assert abs(M.compatibility_residual(MARKOV, tab, w, a)) <= 1.0 / k


def test_sandwich_examples():
    half = RenewalModel(Constant(0.5), 0.5)
    tab = M.cesaro_table(half, P("(0)1"), 4, 3)
    assert all(v == pytest.approx(0.125) for v in tab.probs.values())
    assert M.sandwich_check(half, tab).holds
    tab = M.cesaro_table(IID, P("(0)1"), 4, 2)
    assert sorted(round(v, 12) for v in tab.probs.values()) == [0.16, 0.24, 0.24, 0.36]
    assert M.sandwich_check(IID, tab).holds
    m = TabulatedTree({(0,): (0.9, 0.1), (1,): (0.2, 0.8)})
    assert M.sandwich_check(m, M.cesaro_table(m, P("(1)"), 30, 4)).holds


def test_sandwich_needs_positive_g():
    m = RenewalModel(Harmonic(), 0.5)
    with pytest.raises(NotApplicable):
        M.sandwich_check(m, M.cesaro_table(m, P("(0)1"), 3, 2))


def test_window_joint_is_a_distribution():
    joint = M.window_joint(MARKOV, P("(0)"), 5, 2, 3)
    assert math.fsum(joint.values()) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= M.beta_from_joint(joint) <= 1.0


def test_beta_of_iid_is_zero():
    joint = M.window_joint(IID, P("(0)1"), 4, 2, 1)
    assert M.beta_from_joint(joint) == pytest.approx(0.0, abs=1e-12)


def test_beta_of_markov_matches_matrix_oracle():
    # window 1: u = x_{burn-1}, v = x_{burn-1+gap}
    Pm = np.array([[0.7, 0.3], [0.4, 0.6]])
    burn, gap = 6, 2
    dist0 = np.array([1.0, 0.0]) @ np.linalg.matrix_power(Pm, burn)  # law of x_{burn-1}
    joint = dist0[:, None] * np.linalg.matrix_power(Pm, gap)
    expected = 0.5 * np.abs(joint - np.outer(joint.sum(1), joint.sum(0))).sum()
    got = M.beta_from_joint(M.window_joint(MARKOV, P("(0)"), burn, 1, gap))
    assert got == pytest.approx(expected, abs=1e-12)
