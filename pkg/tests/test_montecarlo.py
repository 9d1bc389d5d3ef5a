from __future__ import annotations

import math

import numpy as np
import pytest

from gmeasures import measure as M
from gmeasures import montecarlo as MC
from gmeasures.core import BINARY, AnchoredPast
from gmeasures.errors import OrderingViolation, ValidationError
from gmeasures.models import BergerModel, GeneralizedRenewalModel, RenewalModel, TabulatedTree
from gmeasures.qrules import Constant, Harmonic, Power


def P(text):
    return AnchoredPast.parse(text, BINARY)


IID = RenewalModel(Constant(0.4), 0.4)
MARKOV = TabulatedTree({(0,): (0.7, 0.3), (1,): (0.4, 0.6)})


def test_sample_deterministic_chain():
    ones = RenewalModel(Constant(1.0), 1.0 - 1e-9)
    assert MC.sample(ones, P("(0)1"), 50, seed=1).symbols.tolist() == [1] * 50


def test_sample_replay_and_streams():
    a = MC.sample(IID, P("(0)1"), 200, seed=9, stream=4)
    b = MC.sample(IID, P("(0)1"), 200, seed=9, stream=4)
    c = MC.sample(IID, P("(0)1"), 200, seed=9, stream=5)
    assert np.array_equal(a.symbols, b.symbols)
    assert not np.array_equal(a.symbols, c.symbols)


def test_batch_rows_equal_single_streams(monkeypatch):
    monkeypatch.setattr(MC, "CHUNK_CELLS", 64)  # force several chunks
    rows = np.vstack(list(MC.simulate_batch(MARKOV, P("(0)"), 20, 7, seed=2)))
    for r in range(7):
        assert np.array_equal(rows[r], MC.sample(MARKOV, P("(0)"), 20, seed=2, stream=r).symbols)


def test_seed_range_checked():
    with pytest.raises(ValidationError):
        MC.rng(-1)


def test_iid_frequency():
    hits = sum(abs(MC.symbol_frequency(MC.sample(IID, P("(0)1"), 100000, seed=s)) - 0.4) < 0.01 for s in range(10))
    assert hits == 10


def test_berger_from_dense_past():
    freq = MC.symbol_frequency(MC.sample(BergerModel(), P("(1)"), 100000, seed=0))
    assert abs(freq - 0.3) < 0.01


def test_empirical_marginals_iid():
    est = MC.empirical_marginal_series(IID, P("(0)1"), 30, 20000, seed=1)
    assert np.all(np.abs(est.values - 0.4) <= 4 * np.sqrt(0.24 / 20000))


def test_empirical_agrees_with_exact_within_4_se():
    model = RenewalModel(Harmonic(), 0.5)
    est = MC.empirical_marginal_series(model, P("(0)1"), 60, 20000, seed=11)
    exact = M.marginal_series(model, P("(0)1"), 60)
    se = np.sqrt(exact * (1 - exact) / 20000)
    assert np.all(np.abs(est.values - exact) <= 4 * se + 1e-12)


def test_power_two_marginals_approach_inverse_mean():
    model = RenewalModel(Power(2.0), 0.5)
    exact = M.marginal_series(model, P("(0)1"), 3000)
    limit = 1.0 / (1.0 + math.pi ** 2 / 6 - 1.0)
    assert limit == pytest.approx(0.6079, abs=1e-4)
    assert abs(exact[-1] - limit) < 2e-3


def test_coupling_identical_models():
    c = MC.ordered_coupling(MARKOV, MARKOV, P("(0)"), P("(0)"), 500, seed=3)
    assert np.array_equal(c.upper, c.lower)


def test_coupling_renewal_pair():
    upper, lower = RenewalModel(Power(3.0), 0.5), RenewalModel(Power(2.0), 0.5)
    for seed in range(3):
        c = MC.ordered_coupling(upper, lower, P("(0)1"), P("(0)1"), 3000, seed)
        assert np.all(c.upper >= c.lower)


def test_coupling_generalized_vs_lower_renewal():
    g = GeneralizedRenewalModel(Power(2.5), delta=0.5, c1=1, kappa=0.5)
    lower = RenewalModel(Power(2.5), 0.5)
    c = MC.ordered_coupling(g, lower, P("(0)1"), P("(0)1"), 3000, seed=1)
    assert np.all(c.upper >= c.lower)


def test_coupling_detects_misordered_kernels():
    with pytest.raises(OrderingViolation) as info:
        MC.ordered_coupling(RenewalModel(Constant(0.2), 0.2), RenewalModel(Constant(0.6), 0.6),
                            P("(0)1"), P("(0)1"), 10, seed=0)
    assert info.value.witness["step"] == 0


def test_coupling_needs_ordered_pasts():
    with pytest.raises(ValidationError):
        MC.ordered_coupling(IID, IID, P("(0)"), P("(1)"), 10, seed=0)


def test_beta_iid_near_zero():
    est = MC.beta_window_estimate(IID, P("(0)1"), 3, 2, burn=20, reps=20000, seed=4)
    assert 0.0 <= est.estimate <= 1.0
    assert est.estimate <= 3 * est.stderr + est.half_width


def test_beta_markov_decays_and_matches_exact():
    vals = [MC.beta_window_estimate(MARKOV, P("(0)"), n, 1, burn=30, exact=True).estimate for n in (1, 2, 4, 8)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # geometric decay at the second eigenvalue 0.3
    assert vals[1] / vals[0] == pytest.approx(0.3, rel=1e-6)
    mc = MC.beta_window_estimate(MARKOV, P("(0)"), 1, 1, burn=30, reps=40000, seed=1)
    assert abs(mc.estimate - vals[0]) <= 4 * mc.stderr


def test_beta_burn_must_cover_window():
    with pytest.raises(ValidationError):
        MC.beta_window_estimate(IID, P("(0)1"), 1, 5, burn=3)


def test_overflow_renewal_counts_leading_zeros():
    model = RenewalModel(Harmonic(), 0.5)
    res = MC.overflow_count(model, P("(0)"), 200, seed=5)
    y = res.trajectory.symbols
    first_one = int(np.argmax(y == 1)) if (y == 1).any() else len(y)
    assert res.count == first_one
    assert res.indicators[:first_one].all()


def test_overflow_markov_is_bounded_by_order():
    for seed in range(5):
        assert MC.overflow_count(MARKOV, P("(0)"), 300, seed).count <= 1


def test_chi_square_same_law_accepts_identical_laws():
    a = MC.sample(MARKOV, P("(0)"), 30000, seed=1).symbols
    b = MC.sample(MARKOV, P("(0)"), 30000, seed=2).symbols
    assert MC.chi_square_same_law(a, b) > 0.01
