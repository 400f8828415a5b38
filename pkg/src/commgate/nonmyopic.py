"""Exploration-threshold solvers for forward-looking agents.

Forward-looking agents withhold what they know until the last slot at which
sharing is still possible, so any schedule collapses to a single effective
sharing slot ``T1``.  Before ``T1`` each agent follows a time-varying
exploration threshold that anticipates the pooled reveal; afterwards she is
on her own and follows the solo optimal-stopping thresholds.  The pre-sharing
thresholds solve a coupled nonlinear system (the belief over other agents'
progress depends on the thresholds themselves); we solve it with a damped
diagonal-Jacobian Newton iteration warm-started from the solo sequence, with
per-coordinate bracketed bisection as a fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import QuadratureSpec, RewardDistribution, integrate
from .errors import DistributionError, SolverError

__all__ = [
    "ThresholdSequence",
    "BeliefCdf",
    "belief_cdf",
    "solve_single_agent",
    "solve_centralized_nonmyopic",
    "solve_one_time",
    "welfare_one_time",
    "optimize_comm_time",
    "scan_comm_times",
]

_SPEC = QuadratureSpec()
_RESID_TOL = 1e-8
_SOLO_TOL = 1e-10
_MAX_ITER = 200
_FLIP_CAP = 50


@dataclass(frozen=True, eq=False)
class ThresholdSequence:
    """Solved exploration thresholds ``u_1 .. u_T`` with their residuals.

    ``comm_slot_T1`` is the single effective sharing slot: ``T-1`` for the
    always-open (centralized) policy, ``T`` for the solo benchmark where
    sharing never matters.  Values decrease strictly before the sharing slot
    and after it; no ordering across the two segments is implied.
    """

    horizon_T: int
    comm_slot_T1: int
    values: np.ndarray
    residuals: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.comm_slot_T1 <= self.horizon_T:
            raise SolverError(
                f"comm slot {self.comm_slot_T1} outside [1, {self.horizon_T}]"
            )
        if self.values.shape != (self.horizon_T,):
            raise SolverError("values must hold u_1..u_T")

    def threshold_at(self, t: int) -> float:
        """Threshold applied at slot ``t``; slot 0 always explores (u_0 = 1)."""
        if t == 0:
            return 1.0
        return float(self.values[t - 1])

    @property
    def prefix(self) -> np.ndarray:
        """Pre-sharing thresholds u_1..u_T1."""
        return self.values[: self.comm_slot_T1]

    @property
    def is_centralized(self) -> bool:
        return self.comm_slot_T1 == self.horizon_T - 1

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,u_t,residual\n")
            for t, (u, r) in enumerate(zip(self.values, self.residuals), start=1):
                fh.write(f"{t},{u:.17g},{r:.17g}\n")


class BeliefCdf:
    """Law of one agent's best-known reward after the sharing slot's draws.

    For a threshold prefix ``u_1 > ... > u_L`` over a base prior ``F``, the
    CDF is ``F(r)^t - (1-F(r)) * sum_(i=t..L) F(u_i)^i`` on the band
    ``u_t < r <= u_(t-1)`` (with ``u_0 = 1``) and ``F(r)^(L+1)`` at or below
    the last threshold.  Evaluation is vectorized; the thresholds are the
    kink locations to hand to quadrature.
    """

    def __init__(self, base: RewardDistribution, prefix_thresholds):
        u = np.asarray(prefix_thresholds, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise DistributionError("prefix must be a non-empty 1-d sequence")
        if np.any(np.diff(u) >= 0):
            raise DistributionError("prefix thresholds must be strictly decreasing")
        if u[0] > 1.0 or u[-1] < 0.0:
            raise DistributionError("prefix thresholds must lie in [0, 1]")
        self.base = base
        self.thresholds = u
        self._asc = u[::-1].copy()
        powers = base.cdf(u) ** np.arange(1, u.size + 1)
        # suffix[t-1] = sum_(i=t..L) F(u_i)^i
        self._suffix = np.concatenate([np.cumsum(powers[::-1])[::-1], [0.0]])

    def __call__(self, r):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        f = self.base.cdf(arr)
        L = self.thresholds.size
        below = np.searchsorted(self._asc, arr, side="left")  # thresholds < r
        t_seg = L - below + 1  # band index in 1..L+1
        out = np.where(
            t_seg > L,
            f ** (L + 1),
            f**t_seg - (1.0 - f) * self._suffix[np.minimum(t_seg, L) - 1],
        )
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.isscalar(r) else out.reshape(np.shape(r))


def belief_cdf(d: RewardDistribution, prefix_thresholds) -> BeliefCdf:
    """Build the best-known-reward law induced by a solved threshold prefix."""
    return BeliefCdf(d, prefix_thresholds)


def _newton_bracket(fun, dfun, lo, hi, x0, tol, max_iter=100, what=""):
    """Root of an increasing function on [lo, hi] by Newton with bisection safeguard."""
    x = min(max(x0, lo), hi)
    f = fun(x)
    a, b = lo, hi
    for _ in range(max_iter):
        if abs(f) < tol:
            return x, f
        if f < 0.0:
            a = x
        else:
            b = x
        df = dfun(x)
        xn = x - f / df if df > 0 else 0.5 * (a + b)
        if not a < xn < b:
            xn = 0.5 * (a + b)
        x = xn
        f = fun(x)
    raise SolverError(
        f"scalar solve did not converge ({what}): residual {f:.3e} after {max_iter} iterations",
        diagnostics={"residual": f, "x": x},
    )


def solve_single_agent(
    d: RewardDistribution, T: int, spec: QuadratureSpec = _SPEC
) -> ThresholdSequence:
    """Solo optimal-stopping thresholds: ``u_t - mu = (T-t) * tail(u_t)``.

    Each slot's equation is scalar and independent; ``tail(u)`` is the mean
    excess ``integral_u^1 (1-F)``.  The sequence strictly decreases to
    ``u_T = mu``.
    """
    if T < 1:
        raise DistributionError(f"horizon must be >= 1, got {T}")
    mu = d.mean()
    values = np.empty(T)
    residuals = np.zeros(T)
    values[T - 1] = mu
    guess = mu
    for t in range(T - 1, 0, -1):
        w = T - t

        def fun(u, w=w):
            return u - mu - w * d.tail_mean_excess(u)

        def dfun(u, w=w):
            return 1.0 + w * (1.0 - d.cdf(u))

        root, res = _newton_bracket(fun, dfun, mu, 1.0, guess, _SOLO_TOL, what=f"solo t={t}")
        values[t - 1] = root
        residuals[t - 1] = res
        guess = root
    return ThresholdSequence(T, T, values, residuals, {"solver": "newton"})


class _OneTimeSystem:
    """Residuals and diagonal Jacobian of the pre-sharing threshold system."""

    def __init__(self, d, N, T, T1, post, spec):
        self.d = d
        self.N = N
        self.T = T
        self.T1 = T1
        self.post = np.asarray(post, dtype=float)  # ubar_(T1+1) .. ubar_T, descending
        self.post_asc = self.post[::-1].copy()
        self.mu = d.mean()
        self.spec = spec
        self.K = T - T1 - 1

    def _segment_weights(self, G):
        """(T-T1) Q0 + partial sums of (T-T1-j) Qj, indexed by case k."""
        if self.K == 0:
            return np.zeros(1)
        d, N, T, T1 = self.d, self.N, self.T, self.T1
        bk = tuple(G.thresholds)

        def gpow_tail(r):
            return G(r) ** (N - 1) * (1.0 - d.cdf(r))

        q0 = integrate(d, gpow_tail, self.post[0], 1.0, QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk))
        w = np.empty(self.K + 1)
        w[0] = 0.0  # case 0 never uses the table
        acc = (T - T1) * q0
        for k in range(1, self.K + 1):
            w[k] = acc
            if k < self.K:
                j = k
                lo_b, hi_b = self.post[j], self.post[j - 1]

                def seg(r, j=j):
                    f = d.cdf(r)
                    return G(r) ** (N - 1) * f**j * (1.0 - f)

                acc += (T - T1 - j) * integrate(
                    d, seg, lo_b, hi_b, QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk)
                )
        return w

    def cases(self, u):
        """Half-open band index per coordinate: 0 above the first post threshold,
        else k with post_(k) > u >= post_(k+1)."""
        leq = np.searchsorted(self.post_asc, u, side="right")
        return (self.post.size - leq).astype(int)

    def residuals(self, u):
        d, N, T, T1 = self.d, self.N, self.T, self.T1
        G = BeliefCdf(d, u)
        w = self._segment_weights(G)
        ks = self.cases(u)
        e1 = d.tail_mean_excess(u)
        fu = d.cdf(u)
        gu = G(u)
        bk = tuple(G.thresholds)
        g = np.empty(T1)
        jac = np.empty(T1)
        for i in range(T1):
            t = i + 1
            k = int(ks[i])
            if k == 0:

                def tail(r):
                    return G(r) ** (N - 1) * (1.0 - d.cdf(r))

                coupling = (T - T1) * integrate(
                    d, tail, u[i], 1.0, QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk)
                )
                slope = (T - T1) * gu[i] ** (N - 1)
            else:
                upper = self.post[k - 1]

                def tail(r, k=k):
                    f = d.cdf(r)
                    return G(r) ** (N - 1) * f**k * (1.0 - f)

                coupling = w[k] + (T - T1 - k) * integrate(
                    d, tail, u[i], upper, QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk)
                )
                slope = (T - T1 - k) * gu[i] ** (N - 1) * fu[i] ** k
            g[i] = u[i] - self.mu - (T1 - t) * e1[i] - coupling
            jac[i] = 1.0 + (1.0 - fu[i]) * ((T1 - t) + slope)
        return g, jac, ks

    def scalar_equation(self, u_vec, i, G, w):
        """g_i as a function of its own coordinate with G and the table frozen."""
        d, N, T, T1 = self.d, self.N, self.T, self.T1
        t = i + 1
        bk = tuple(G.thresholds)

        def g_of(v):
            k = int(self.cases(np.array([v]))[0])
            if k == 0:

                def tail(r):
                    return G(r) ** (N - 1) * (1.0 - d.cdf(r))

                coupling = (T - T1) * integrate(
                    d, tail, v, 1.0, QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk)
                )
            else:

                def tail(r, k=k):
                    f = d.cdf(r)
                    return G(r) ** (N - 1) * f**k * (1.0 - f)

                coupling = w[k] + (T - T1 - k) * integrate(
                    d, tail, v, self.post[k - 1], QuadratureSpec(self.spec.abs_tol, self.spec.max_depth, bk)
                )
            return v - self.mu - (T1 - t) * d.tail_mean_excess(v) - coupling

        return g_of


def _enforce_decreasing(u, mu):
    """Clamp into (mu, 1) and repair any non-strict ordering from a raw step."""
    out = np.clip(u, mu, 1.0 - 1e-12)
    repairs = 0
    for i in range(1, out.size):
        cap = out[i - 1] - 1e-12
        if out[i] > cap:
            out[i] = max(cap, mu)
            repairs += 1
    return out, repairs


def solve_one_time(
    d: RewardDistribution,
    N: int,
    T: int,
    T1: int,
    spec: QuadratureSpec = _SPEC,
    benchmark: ThresholdSequence | None = None,
    method: str = "newton",
) -> ThresholdSequence:
    """Thresholds under one-time sharing at slot ``T1``.

    Post-sharing slots reuse the solo benchmark; the ``T1`` pre-sharing
    thresholds are solved as a coupled system whose active branch per
    coordinate depends on where the value falls among the post-sharing
    thresholds (half-open bands, lower edge included).  ``method="newton"``
    runs the damped diagonal-Jacobian iteration warm-started from the
    benchmark; ``method="bisection"`` runs cold-started fixed-point sweeps
    with exact per-coordinate bisection, used as a solver-independence check.
    """
    if not 1 <= T1 <= T - 1:
        raise DistributionError(f"T1 must lie in [1, {T - 1}], got {T1}")
    if N < 1:
        raise DistributionError(f"agent count must be >= 1, got {N}")
    bench = benchmark if benchmark is not None else solve_single_agent(d, T, spec)
    if bench.horizon_T != T:
        raise SolverError("benchmark horizon does not match T")
    mu = d.mean()
    post = bench.values[T1:]
    system = _OneTimeSystem(d, N, T, T1, post, spec)

    diag = {"repairs": 0, "damped": 0, "bisection_rescues": 0, "iterations": 0}
    if method == "bisection":
        u = np.full(T1, 0.5 * (mu + 1.0))
        u, _ = _enforce_decreasing(u, mu)
    elif method == "newton":
        u = bench.values[:T1].copy()
    else:
        raise DistributionError(f"unknown method {method!r}")

    flips = np.zeros(T1, dtype=int)
    prev_cases = None
    g, jac, ks = system.residuals(u)
    for it in range(_MAX_ITER):
        diag["iterations"] = it + 1
        norm = float(np.max(np.abs(g)))
        if norm < _RESID_TOL:
            break
        if prev_cases is not None:
            flips += (ks != prev_cases).astype(int)
        prev_cases = ks

        if method == "bisection":
            u = _bisection_sweep(system, u, np.ones(T1, dtype=bool), mu)
            g, jac, ks = system.residuals(u)
            continue

        force = flips > _FLIP_CAP  # chattering coordinates leave Newton for good
        step = -g / jac
        accepted = False
        scale = 1.0
        for _ in range(25):
            cand = u + scale * step
            if force.any():
                swept = _bisection_sweep(system, u, force, mu)
                cand[force] = swept[force]
            cand, rep = _enforce_decreasing(cand, mu)
            g_c, jac_c, ks_c = system.residuals(cand)
            if float(np.max(np.abs(g_c))) < norm:
                u, g, jac, ks = cand, g_c, jac_c, ks_c
                diag["repairs"] += rep
                accepted = True
                break
            scale *= 0.5
            diag["damped"] += 1
        if not accepted:
            # quasi-Newton stalled: one exact sweep against the current belief
            diag["bisection_rescues"] += 1
            if diag["bisection_rescues"] > 20:
                raise SolverError(
                    f"one-time solver stalled at T1={T1}",
                    diagnostics={**diag, "residual": norm},
                )
            u = _bisection_sweep(system, u, np.ones(T1, dtype=bool), mu)
            g, jac, ks = system.residuals(u)
    else:
        osc = np.nonzero(flips > _FLIP_CAP)[0] + 1
        raise SolverError(
            f"one-time solver did not converge at T1={T1} after {_MAX_ITER} iterations",
            diagnostics={**diag, "residual": float(np.max(np.abs(g))), "oscillating": osc.tolist()},
        )

    values = np.concatenate([u, post])
    residuals = np.concatenate([g, bench.residuals[T1:]])
    return ThresholdSequence(T, T1, values, residuals, diag)


def _bisection_sweep(system, u, mask, mu):
    """Solve each masked coordinate exactly by bisection with G frozen."""
    G = BeliefCdf(system.d, u)
    w = system._segment_weights(G)
    out = u.copy()
    for i in range(u.size):
        if not mask[i]:
            continue
        g_of = system.scalar_equation(u, i, G, w)
        lo, hi = mu, 1.0
        flo = g_of(lo)
        if flo >= 0.0:
            out[i] = lo
            continue
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g_of(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    out, _ = _enforce_decreasing(out, mu)
    return out


def solve_centralized_nonmyopic(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> ThresholdSequence:
    """Thresholds under the always-open policy.

    Forward-looking agents still withhold until slot ``T-1``, so this is the
    one-time system specialized to ``T1 = T-1``: only the top branch is
    active and the single post-sharing threshold is ``u_T = mu``.
    """
    if T < 2:
        raise DistributionError(f"horizon must be >= 2, got {T}")
    return solve_one_time(d, N, T, T - 1, spec)


def welfare_one_time(
    d: RewardDistribution,
    N: int,
    T: int,
    seq: ThresholdSequence,
    spec: QuadratureSpec = _SPEC,
) -> tuple[float, float]:
    """Total welfare over slots {0..T} and the per-agent exploration count
    under one-time sharing with the solved thresholds ``seq``.

    Welfare splits into the pre-sharing solo phase (explore until the own
    threshold is cleared, then exploit), the pooled reveal at the sharing
    slot, and the post-sharing solo continuation weighted by the belief law
    of the pooled best reward.
    """
    T1 = seq.comm_slot_T1
    if seq.horizon_T != T or not 1 <= T1 <= T - 1:
        raise DistributionError("sequence does not match (T, T1)")
    mu = d.mean()
    u = np.concatenate([[1.0], seq.values])  # u[t] = u_t with u[0] = 1
    G = BeliefCdf(d, seq.prefix)
    bkp = tuple(seq.prefix)
    fu = d.cdf(u)

    explore_gain = mu * (1.0 + float(np.sum(fu[1 : T1 + 1] ** np.arange(1, T1 + 1))))

    pre = 0.0
    for t in range(0, T1):
        hi_u, lo_u = u[t], u[t + 1]
        p = t + 1
        stieltjes = (
            hi_u * fu[t] ** p
            - lo_u * fu[t + 1] ** p
            - integrate(d, lambda r, p=p: d.cdf(r) ** p, lo_u, hi_u, spec)
        )
        tail_mean = 1.0 - hi_u * fu[t] - ((1.0 - hi_u) - d.tail_mean_excess(hi_u))
        pre += (T1 - t) * (stieltjes + fu[t] ** t * tail_mean)

    first_post = seq.values[T1]  # ubar_(T1+1)
    spec_b = QuadratureSpec(spec.abs_tol, spec.max_depth, bkp)
    pooled = (T - T1) * (
        1.0 - integrate(d, lambda r: G(r) ** N, first_post, 1.0, spec_b)
    )

    resume = 0.0
    for tau in range(1, T - T1):
        hi_b = seq.values[T1 + tau - 1]
        lo_b = seq.values[T1 + tau]

        def band(r, tau=tau):
            return G(r) ** N * d.cdf(r) ** tau

        resume += (T - T1 - tau) * integrate(d, band, lo_b, hi_b, spec_b)

    welfare = N * (explore_gain + pre + pooled - resume)

    post_vals = seq.values[T1:]
    g_post = np.atleast_1d(G(post_vals))
    f_post = d.cdf(post_vals)
    taus = np.arange(1, T - T1 + 1)
    count = (
        1.0
        + float(np.sum(fu[1 : T1 + 1] ** np.arange(1, T1 + 1)))
        + float(np.sum(g_post**N * f_post**taus))
    )
    return welfare, count


def scan_comm_times(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> list[tuple[int, float, ThresholdSequence | None]]:
    """Solve every candidate sharing slot and report its welfare.

    Candidates whose solver fails are reported with ``None`` and skipped by
    the optimizer.  The solo benchmark is solved once and shared.
    """
    bench = solve_single_agent(d, T, spec)
    out = []
    for T1 in range(1, T):
        try:
            seq = solve_one_time(d, N, T, T1, spec, benchmark=bench)
            welfare, _ = welfare_one_time(d, N, T, seq, spec)
            out.append((T1, welfare, seq))
        except SolverError:
            out.append((T1, math.nan, None))
    return out


def optimize_comm_time(
    d: RewardDistribution, N: int, T: int, spec: QuadratureSpec = _SPEC
) -> tuple[int, ThresholdSequence, float]:
    """Pick the sharing slot maximizing welfare (first slot wins ties).

    Scans ``T1 = 1 .. T-1``, each warm-started from the shared solo
    benchmark; failed candidates are skipped, and it is an error if every
    candidate fails.
    """
    if T < 2 or N < 1:
        raise DistributionError("need T >= 2 and N >= 1")
    best = None
    failures = {}
    for T1, welfare, seq in scan_comm_times(d, N, T, spec):
        if seq is None:
            failures[T1] = "solver failure"
            continue
        if best is None or welfare > best[2]:
            best = (T1, seq, welfare)
    if best is None:
        raise SolverError("every sharing-slot candidate failed", diagnostics=failures)
    return best
