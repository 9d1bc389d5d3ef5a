"""Seeded simulation, empirical marginals, monotone coupling, windowed beta
mixing and the context-overflow statistic.

Randomness comes from numpy's counter-based Philox generator keyed by
``(seed, stream)``.  Replica ``r`` of a batch always uses stream ``r``, so a
batch row is bit-identical to ``sample(..., stream=r)`` and the results do
not depend on chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.stats import chi2_contingency

from .core import AnchoredPast, PastLike, same_sequence_horizon
from .errors import OrderingViolation, ValidationError
from .measure import beta_from_joint, window_joint
from .models.base import GModel, inverse_cdf

CHUNK_CELLS = 1 << 22
DEFAULT_BURN = 1000
ORDER_TOL = 1e-12


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``."""
    if not (0 <= seed < 1 << 64) or not (0 <= stream < 1 << 64):
        raise ValidationError("seed and stream must be unsigned 64-bit integers")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(stream)))


def uniforms(seed: int, stream: int, T: int) -> np.ndarray:
    return rng(seed, stream).random(T)


@dataclass
class Trajectory:
    past: str
    model: dict
    seed: int
    stream: int
    symbols: np.ndarray

    @property
    def T(self) -> int:
        return len(self.symbols)


def sample(model: GModel, past: PastLike, T: int, seed: int, stream: int = 0) -> Trajectory:
    """One trajectory ``x_0 .. x_{T-1}`` drawn forward from ``past``."""
    if T < 0:
        raise ValidationError("T must be >= 0")
    u = uniforms(seed, stream, T)
    sym = model.simulate(past, u[None, :])[0] if T else np.empty(0, dtype=np.int8)
    return Trajectory(past.materialize().format(model.alphabet), model.descriptor(), seed, stream, sym)


def simulate_batch(model: GModel, past: PastLike, T: int, reps: int, seed: int, first_stream: int = 0):
    """Yield ``(chunk, T)`` symbol arrays covering replicas ``0..reps-1`` in order."""
    chunk = max(1, min(reps, CHUNK_CELLS // max(T, 1)))
    for start in range(0, reps, chunk):
        stop = min(reps, start + chunk)
        U = np.empty((stop - start, T))
        for r in range(start, stop):
            U[r - start] = uniforms(seed, first_stream + r, T)
        yield model.simulate(past, U)


@dataclass
class MarginalEstimate:
    word: tuple
    values: np.ndarray
    half_width: np.ndarray
    reps: int
    seed: int

    @property
    def stderr(self) -> np.ndarray:
        return self.half_width / 1.96


def empirical_marginal_series(model: GModel, past: PastLike, I: int, reps: int, seed: int,
                              symbol: int = 1) -> MarginalEstimate:
    """Fraction of replicas with ``x_i = symbol`` for ``i = 0..I``."""
    counts = np.zeros(I + 1, dtype=np.int64)
    for chunk in simulate_batch(model, past, I + 1, reps, seed):
        counts += (chunk == symbol).sum(axis=0)
    p = counts / reps
    hw = 1.96 * np.sqrt(p * (1 - p) / reps)
    return MarginalEstimate((symbol,), p, hw, reps, seed)


@dataclass
class CoupledTrajectory:
    upper: np.ndarray
    lower: np.ndarray
    seed: int
    dominated: bool
    checked_steps: int
    meta: dict = field(default_factory=dict)


def _dominates(p: AnchoredPast, q: AnchoredPast) -> bool:
    lcm = len(p.period) * len(q.period) // gcd(len(p.period), len(q.period))
    depth = same_sequence_horizon(p, q) + lcm
    return all(p.at(-j) >= q.at(-j) for j in range(1, depth + 1))


def ordered_coupling(m_upper: GModel, m_lower: GModel, p: PastLike, p_lower: PastLike, T: int,
                     seed: int) -> CoupledTrajectory:
    """Drive both chains with one shared uniform per step (inverse CDF in
    symbol order), checking the kernel order on every visited pair."""
    if not _dominates(p.materialize(), p_lower.materialize()):
        raise ValidationError("coupling needs the upper past to dominate the lower one coordinatewise")
    u = uniforms(seed, 0, T)
    su, sl = m_upper.stepper(p), m_lower.stepper(p_lower)
    xs = np.empty(T, dtype=np.int8)
    ys = np.empty(T, dtype=np.int8)
    A = m_upper.alphabet.size
    for t in range(T):
        du, dl = su.dist(), sl.dist()
        cu = cl = 0.0
        for a in range(A - 1):
            cu += du[a]
            cl += dl[a]
            if cu > cl + ORDER_TOL:
                raise OrderingViolation(
                    f"kernels out of order at step {t}",
                    {"step": t, "upper_dist": list(du), "lower_dist": list(dl),
                     "upper_recent": [int(v) for v in xs[max(0, t - 20):t]],
                     "lower_recent": [int(v) for v in ys[max(0, t - 20):t]]},
                )
        x = inverse_cdf(du, u[t])
        y = inverse_cdf(dl, u[t])
        if x < y:
            raise OrderingViolation(f"pathwise dominance broke at step {t}", {"step": t})
        xs[t], ys[t] = x, y
        su.push(x)
        sl.push(y)
    return CoupledTrajectory(xs, ys, seed, True, T)


def word_counts(symbols: np.ndarray, L: int, A: int = 2) -> np.ndarray:
    """Counts of non-overlapping length-``L`` words."""
    m = len(symbols) // L
    blocks = np.asarray(symbols[: m * L], dtype=np.int64).reshape(m, L)
    codes = blocks @ (A ** np.arange(L - 1, -1, -1))
    return np.bincount(codes, minlength=A ** L)


def chi_square_same_law(a: np.ndarray, b: np.ndarray, L: int = 3, A: int = 2) -> float:
    """p-value of a two-sample chi-square test on length-``L`` word counts."""
    table = np.vstack([word_counts(a, L, A), word_counts(b, L, A)])
    table = table[:, table.sum(axis=0) > 0]
    return float(chi2_contingency(table)[1])


@dataclass
class MixingEstimate:
    w: int
    n: int
    estimate: float
    samples: int
    half_width: float
    stderr: float
    mode: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def beta_window_estimate(model: GModel, past: PastLike, n: int, w: int, burn: int = DEFAULT_BURN,
                         reps: int = 10000, seed: int = 0, exact: bool = False,
                         max_states: int | None = None) -> MixingEstimate:
    """Windowed lower bound on beta(n).

    ``u = x_{burn-w} .. x_{burn-1}`` and ``v`` is the length-``w`` window
    starting at ``x_{burn-1+n}``, so the two are ``n`` steps apart.
    """
    if n < 1 or w < 1:
        raise ValidationError("gap n and window w must be >= 1")
    if burn < w:
        raise ValidationError("burn-in must be at least the window width")
    if exact:
        kw = {} if max_states is None else {"max_states": max_states}
        joint = window_joint(model, past, burn, w, n, **kw)
        return MixingEstimate(w, n, min(1.0, beta_from_joint(joint)), 0, 0.0, 0.0, "exact")
    A = model.alphabet.size
    weights = A ** np.arange(w - 1, -1, -1)
    K = A ** w
    counts = np.zeros((K, K), dtype=np.int64)
    start = burn - 1 + n
    T = start + w
    for chunk in simulate_batch(model, past, T, reps, seed):
        cu = chunk[:, burn - w:burn].astype(np.int64) @ weights
        cv = chunk[:, start:T].astype(np.int64) @ weights
        np.add.at(counts, (cu, cv), 1)
    P = counts / reps
    pu = P.sum(axis=1)
    pv = P.sum(axis=0)
    est = 0.5 * float(np.abs(P - np.outer(pu, pv)).sum())
    se = 0.5 * float(np.sqrt(np.outer(pu, pv) / reps).sum())
    return MixingEstimate(w, n, min(1.0, est), reps, 2.0 * se, se, "monte-carlo")


@dataclass
class OverflowResult:
    count: int
    indicators: np.ndarray
    trajectory: Trajectory


def overflow_count(model: GModel, past: PastLike, T: int, seed: int) -> OverflowResult:
    """``#{n <= T : l(y_0^{n-1}) > n}`` along one sampled path."""
    traj = sample(model, past, T, seed)
    ind = model.overflow_indicators(traj.symbols)
    return OverflowResult(int(ind.sum()), ind, traj)


def symbol_frequency(traj: Trajectory, symbol: int = 1) -> float:
    return float(np.mean(traj.symbols == symbol)) if traj.T else math.nan
