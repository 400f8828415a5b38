"""Welfare calculus and schedule optimization for myopic agents.

Myopic agents explore a fresh option whenever their best-known reward sits
below the prior mean, and pool observations truthfully at the end of every
open slot.  Closing communication windows trades an immediate exploitation
loss (the ``x`` terms) against a boosted chance of discovering a better
option for the remaining horizon (the ``y`` terms).  Everything here is a
deterministic function of the reward prior, the number of agents, and the
schedule; the Monte-Carlo simulator cross-checks these formulas in the test
suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .distributions import QuadratureSpec, RewardDistribution, integrate
from .errors import DistributionError, HorizonTooLargeError
from .schedules import CommSchedule

__all__ = [
    "MyopicWelfareReport",
    "xy_terms",
    "welfare_centralized",
    "welfare_schedule",
    "deviation_condition",
    "optimize_single_window",
    "scan_single_window",
    "optimize_exact",
    "approximation_ratio",
]

_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class MyopicWelfareReport:
    """Total expected reward over slots {0..T} for all agents, plus the
    per-agent expected number of exploration slots and the per-window
    welfare deltas relative to the always-open policy."""

    total_welfare: float
    expected_exploration_slots: float
    per_window_terms: tuple[float, ...] = ()

    def per_agent(self, n_agents: int) -> float:
        return self.total_welfare / n_agents

    def csv_row(self, label: str, n_agents: int) -> str:
        return (
            f"{label},{self.total_welfare:.12g},"
            f"{self.per_agent(n_agents):.12g},{self.expected_exploration_slots:.12g}"
        )


def _check_prior(d: RewardDistribution, N: int) -> float:
    if N < 1:
        raise DistributionError(f"agent count must be >= 1, got {N}")
    fmu = d.cdf(d.mean())
    if fmu >= 1.0 - 1e-15:
        raise DistributionError("prior is degenerate at its mean (F(mu) = 1)")
    return fmu


@lru_cache(maxsize=None)
def _xy_pair(d: RewardDistribution, N: int, i: int, spec: QuadratureSpec):
    if N == 1:
        return 0.0, 0.0
    mu = d.mean()
    fmu = d.cdf(mu)
    ci = fmu**i
    ci_n = fmu ** (i * N)
    fmu_n = fmu**N
    denom1 = 1.0 - fmu
    denom_n = 1.0 - fmu_n

    def single(r):
        f = d.cdf(r)
        return (f - fmu) / denom1 + ci * (1.0 - f) / denom1

    def pooled(r):
        f = d.cdf(r)
        return (f**N - fmu_n) / denom_n + ci_n * (1.0 - f**N) / denom_n

    x = integrate(d, lambda r: single(r) - pooled(r), mu, 1.0, spec)
    y = integrate(d, lambda r: pooled(r) - single(r) ** N, mu, 1.0, spec)
    return x, y


def xy_terms(
    d: RewardDistribution, N: int, i: int, spec: QuadratureSpec = _SPEC
) -> tuple[float, float]:
    """Per-slot exploitation loss ``x_i`` and post-window exploration benefit
    ``y_i`` of running a closed window whose ``i``-th blocked slot this is.

    Both are tail integrals over [mu, 1] of differences between the pooled-
    information CDF mixture and the self-only mixture; they vanish
    identically for a single agent.
    """
    if i < 1:
        raise DistributionError(f"index i must be >= 1, got {i}")
    _check_prior(d, N)
    return _xy_pair(d, N, i, spec)


def _xy_arrays(d, N, upto, spec):
    xs = np.zeros(upto + 1)
    ys = np.zeros(upto + 1)
    for i in range(1, upto + 1):
        xs[i], ys[i] = _xy_pair(d, N, i, spec)
    return xs, ys


def _exploit_mean(d, N, spec) -> float:
    """Expected pooled best reward conditioned on clearing mu in one open slot."""
    mu = d.mean()
    fmu_n = d.cdf(mu) ** N
    tail = integrate(d, lambda r: d.cdf(r) ** N, mu, 1.0, spec)
    return (1.0 - mu * fmu_n - tail) / (1.0 - fmu_n)


def _residual_loss(d, N, spec) -> float:
    mu = d.mean()
    fmu_n = d.cdf(mu) ** N
    return integrate(d, lambda r: 1.0 - d.cdf(r) ** N, mu, 1.0, spec) / (1.0 - fmu_n)


def _geom(q: float, t0: int, t1: int) -> float:
    """sum of q**t for t in [t0, t1]; empty range gives 0."""
    if t1 < t0:
        return 0.0
    return float(np.sum(q ** np.arange(t0, t1 + 1, dtype=float)))


def welfare_centralized(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> MyopicWelfareReport:
    """Welfare and per-agent exploration count under the always-open policy.

    All agents explore in lockstep until the pooled best reward clears mu,
    then exploit it for the rest of the horizon.
    """
    fmu = _check_prior(d, N)
    if T < 1:
        raise DistributionError(f"horizon must be >= 1, got {T}")
    q = fmu**N
    count = (1.0 - q ** (T + 1)) / (1.0 - q)
    total = N * (T + 1) * _exploit_mean(d, N, spec) - N * count * _residual_loss(d, N, spec)
    return MyopicWelfareReport(total, count)


def welfare_schedule(
    d: RewardDistribution, N: int, schedule: CommSchedule, spec: QuadratureSpec = _SPEC
) -> MyopicWelfareReport:
    """Welfare under an arbitrary window schedule.

    Each window starting at ``s`` with length ``L`` shifts welfare by
    ``N F(mu)^(N s) ((T - s - L) y_(L+1) - sum_(i<=L) x_i)`` relative to the
    always-open baseline; the per-agent exploration count replaces the pooled
    geometric decay with self-only decay inside each window.  Windows that
    run to the end of the horizon are truncated to existing slots.
    """
    T = schedule.horizon_T
    fmu = _check_prior(d, N)
    base = welfare_centralized(d, N, T, spec)
    if schedule.is_centralized:
        return base
    max_len = max(length for _, length in schedule.windows)
    xs, ys = _xy_arrays(d, N, max_len + 1, spec)
    sx = np.cumsum(xs)

    terms = []
    q = fmu**N
    count = _geom(q, 0, schedule.windows[0][0])
    for m, (s, length) in enumerate(schedule.windows):
        eff_len = min(length, T - s)  # blocked slots past T never happen
        gain = N * fmu ** (N * s) * (
            max(T - s - length, 0) * ys[length + 1] - sx[eff_len]
        )
        terms.append(gain)
        count += fmu ** (N * s) * _geom(fmu, 1, eff_len)
        next_start = schedule.windows[m + 1][0] if m + 1 < len(schedule.windows) else T
        count += _geom(q, s + length + 1, next_start)
    return MyopicWelfareReport(base.total_welfare + sum(terms), count, tuple(terms))


def deviation_condition(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> tuple[bool, int, float]:
    """Whether any window schedule beats the always-open policy.

    Returns ``(holds, minimizing_length, threshold_T)`` where the condition is
    ``T > threshold_T`` with ``threshold_T`` the minimum over window lengths L
    of ``sum_(i<=L) x_i / y_(L+1) + L``.  Lengths whose ``y_(L+1) <= 0`` are
    treated as infinitely expensive (this covers the 0/0 single-agent case,
    where no sharing benefit exists and the condition is declared false).
    """
    _check_prior(d, N)
    if T < 2:
        raise DistributionError(f"horizon must be >= 2, got {T}")
    xs, ys = _xy_arrays(d, N, T, spec)
    sx = np.cumsum(xs)
    best_len = 0
    best_rhs = np.inf
    for length in range(1, T):
        y_next = ys[length + 1]
        if y_next <= 0.0:
            continue
        rhs = sx[length] / y_next + length
        if rhs < best_rhs:
            best_rhs = rhs
            best_len = length
    return (T > best_rhs, best_len, float(best_rhs))


def scan_single_window(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> list[tuple[int, float]]:
    """Welfare of the single leading window {0..L-1} for every L in 1..T-1."""
    base = welfare_centralized(d, N, T, spec).total_welfare
    xs, ys = _xy_arrays(d, N, T, spec)
    sx = np.cumsum(xs)
    return [
        (length, base + N * ((T - length) * ys[length + 1] - sx[length]))
        for length in range(1, T)
    ]


def optimize_single_window(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> tuple[CommSchedule, float]:
    """Linear-time scan for the best single leading no-communication window.

    If the deviation condition fails, the always-open schedule is returned
    unchanged.  Otherwise the scan keeps the first strict improvement, so the
    smallest maximizing window length wins ties.  The x/y terms are computed
    once and reused through prefix sums, so the scan costs O(T) objective
    evaluations.
    """
    holds, _, _ = deviation_condition(d, N, T, spec)
    base = welfare_centralized(d, N, T, spec).total_welfare
    if not holds:
        return CommSchedule.centralized(T), base
    xs, ys = _xy_arrays(d, N, T, spec)
    sx = np.cumsum(xs)
    best_len = 0
    best_gain = -np.inf
    for length in range(1, T):
        gain = N * ((T - length) * ys[length + 1] - sx[length])
        if gain > best_gain:
            best_gain = gain
            best_len = length
    return CommSchedule(T, ((0, best_len),)), base + best_gain


def optimize_exact(
    d: RewardDistribution,
    N: int,
    T: int,
    max_T_for_exact: int = 14,
    spec: QuadratureSpec = _SPEC,
) -> tuple[CommSchedule, float]:
    """Exhaustive search over all optimal-form window layouts.

    Only layouts with the first window at slot 0 and exactly one open slot
    between consecutive windows can be optimal, so the search enumerates
    window-length compositions with ``sum (len_i + 1) <= T``.  Branches whose
    optimistic bound (remaining horizon times the best positive y, discounted
    by the decay already accumulated) cannot beat the incumbent are pruned.
    The search is exponential in T and refuses horizons beyond
    ``max_T_for_exact``.
    """
    if T > max_T_for_exact:
        raise HorizonTooLargeError(
            f"exact search is exponential; T={T} exceeds cap {max_T_for_exact}. "
            "Use optimize_single_window for large horizons."
        )
    fmu = _check_prior(d, N)
    base = welfare_centralized(d, N, T, spec).total_welfare
    xs, ys = _xy_arrays(d, N, T, spec)
    sx = np.cumsum(xs)
    max_y = max(0.0, float(ys[2:].max())) if T >= 2 else 0.0
    decay2 = fmu ** (2 * N)
    geom_cap = 1.0 / (1.0 - decay2) if decay2 < 1.0 else np.inf

    best_gain = 0.0
    best_windows: tuple[tuple[int, int], ...] = ()

    def search(start: int, gain: float, windows: tuple[tuple[int, int], ...]):
        nonlocal best_gain, best_windows
        if start >= T:
            return
        bound = max_y * (T - start) * fmu ** (N * start) * geom_cap + 1e-9
        if gain + bound <= best_gain:
            return
        decay = fmu ** (N * start)
        for length in range(1, T - start):
            g = gain + decay * ((T - start - length) * ys[length + 1] - sx[length])
            wins = windows + ((start, length),)
            if g > best_gain:
                best_gain = g
                best_windows = wins
            search(start + length + 1, g, wins)

    search(0, 0.0, ())
    return CommSchedule(T, best_windows), base + N * best_gain


def approximation_ratio(d: RewardDistribution, N: int, T: int) -> float:
    """Guaranteed fraction of the exact-search welfare achieved by the
    single-window scan: ``1 - (F(mu)^(2N) - F(mu)^(TN)) / (1 - F(mu)^(TN))``.
    Tends to 1 as the number of agents grows."""
    if T < 2 or N < 1:
        raise DistributionError("need T >= 2 and N >= 1")
    fmu = d.cdf(d.mean())
    q_t = fmu ** (T * N)
    if q_t >= 1.0:
        return 1.0
    return 1.0 - (fmu ** (2 * N) - q_t) / (1.0 - q_t)
