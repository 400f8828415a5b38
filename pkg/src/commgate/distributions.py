"""Reward priors on [0, 1] and the quadrature primitives built on them.

Every mechanism calculation in this package reduces to tail integrals of
functions of a single CDF ``F`` with support exactly [0, 1].  This module
provides the three supported prior families (uniform, Beta, and empirical
piecewise-linear CDFs), inverse-CDF sampling, and an adaptive Simpson
integrator that splits at known kink locations so that piecewise-smooth
integrands converge quickly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import DistributionError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "RewardDistribution",
    "integrate",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance, depth cap, and known kink locations for `integrate`.

    ``breakpoints`` are abscissae in [0, 1] where the integrand may have a
    kink (or be undefined); integration is split there before any adaptive
    refinement.  Duplicates are removed on construction.
    """

    abs_tol: float = 1e-9
    max_depth: int = 40
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DistributionError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 1:
            raise DistributionError(f"max_depth must be >= 1, got {self.max_depth}")
        pts = tuple(sorted(set(float(b) for b in self.breakpoints)))
        object.__setattr__(self, "breakpoints", pts)

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Same spec with ``abs_tol`` divided by ``factor`` (for re-verification)."""
        return QuadratureSpec(self.abs_tol / factor, self.max_depth, self.breakpoints)


_DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True, eq=False)
class RewardDistribution:
    """Prior law of a fresh option's reward, supported exactly on [0, 1].

    Instances are immutable; construct through :meth:`uniform`,
    :meth:`beta`, :meth:`empirical`, or :meth:`from_csv`.  The empirical
    kind stores a piecewise-linear CDF (linear in CDF space, so the CDF is
    monotone by construction and inverse sampling is exact).  ``mean_cache``
    always equals the tail integral of ``1 - F``.
    """

    kind: str
    alpha: float | None = None
    beta_param: float | None = None
    grid: np.ndarray | None = None
    cdf_values: np.ndarray | None = None
    mean_cache: float = field(default=0.0)

    # -- constructors ---------------------------------------------------

    @classmethod
    def uniform(cls) -> "RewardDistribution":
        return cls(kind="uniform", mean_cache=0.5)

    @classmethod
    def beta(cls, alpha: float, beta: float) -> "RewardDistribution":
        if not (alpha > 0 and beta > 0):
            raise DistributionError(
                f"Beta parameters must be positive, got alpha={alpha}, beta={beta}"
            )
        return cls(
            kind="beta",
            alpha=float(alpha),
            beta_param=float(beta),
            mean_cache=alpha / (alpha + beta),
        )

    @classmethod
    def beta_with_mean(cls, mean: float, concentration: float = 5.0) -> "RewardDistribution":
        """Beta prior with the given mean and ``alpha + beta = concentration``."""
        if not 0 < mean < 1:
            raise DistributionError(f"mean must lie in (0, 1), got {mean}")
        return cls.beta(mean * concentration, (1.0 - mean) * concentration)

    @classmethod
    def empirical(
        cls, grid: Sequence[float], cdf_values: Sequence[float]
    ) -> "RewardDistribution":
        g = np.asarray(grid, dtype=float)
        c = np.asarray(cdf_values, dtype=float)
        if g.ndim != 1 or g.shape != c.shape or g.size < 2:
            raise DistributionError("grid and cdf_values must be 1-d, equal length >= 2")
        if g[0] != 0.0 or g[-1] != 1.0:
            raise DistributionError("empirical grid must start at 0 and end at 1")
        if np.any(np.diff(g) <= 0):
            raise DistributionError("empirical grid must be strictly increasing")
        if np.any(c < -1e-12) or np.any(c > 1 + 1e-12) or np.any(np.diff(c) < -1e-12):
            raise DistributionError("cdf_values must be nondecreasing within [0, 1]")
        if abs(c[-1] - 1.0) > 1e-9:
            raise DistributionError(f"cdf must reach 1 at r=1, got {c[-1]}")
        c = np.clip(np.maximum.accumulate(c), 0.0, 1.0)
        c[-1] = 1.0
        # trapezoid of 1 - C is exact for a piecewise-linear CDF
        mean = 1.0 - float(np.trapezoid(c, g))
        return cls(kind="empirical", grid=g, cdf_values=c, mean_cache=mean)

    # -- evaluation -----------------------------------------------------

    def cdf(self, r):
        """CDF ``F(r)``; ``r`` may be a scalar or an array with values in [0, 1]."""
        arr = np.asarray(r, dtype=float)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise DistributionError(f"cdf argument outside [0, 1]: {arr.min()}..{arr.max()}")
        if self.kind == "uniform":
            out = arr.copy()
        elif self.kind == "beta":
            out = special.betainc(self.alpha, self.beta_param, arr)
        else:
            out = np.interp(arr, self.grid, self.cdf_values)
        return float(out) if np.isscalar(r) else out

    def ppf(self, q):
        """Generalized inverse CDF; exact for the piecewise-linear empirical kind."""
        arr = np.atleast_1d(np.asarray(q, dtype=float))
        if self.kind == "uniform":
            out = arr.copy()
        elif self.kind == "beta":
            out = special.betaincinv(self.alpha, self.beta_param, arr)
        else:
            c, g = self.cdf_values, self.grid
            j = np.searchsorted(c, arr, side="left")
            j = np.clip(j, 0, c.size - 1)
            out = g[j].copy()
            interior = (j > 0) & (arr > c[np.maximum(j - 1, 0)])
            ji = j[interior]
            c0, c1 = c[ji - 1], c[ji]
            g0, g1 = g[ji - 1], g[ji]
            out[interior] = g0 + (arr[interior] - c0) / (c1 - c0) * (g1 - g0)
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.isscalar(q) else out.reshape(np.shape(q))

    def mean(self) -> float:
        """Mean reward, i.e. the integral of ``1 - F`` over [0, 1]."""
        return self.mean_cache

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draw(s) using the caller-owned generator ``rng``."""
        return self.ppf(rng.random(size))

    def tail_mean_excess(self, u) -> float:
        """Closed-form ``integral_u^1 (1 - F(r)) dr`` for each supported kind."""
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise DistributionError("tail_mean_excess argument outside [0, 1]")
        if self.kind == "uniform":
            out = 0.5 * (1.0 - arr) ** 2
        elif self.kind == "beta":
            a, b = self.alpha, self.beta_param
            out = self.mean_cache * (1.0 - special.betainc(a + 1.0, b, arr)) - arr * (
                1.0 - special.betainc(a, b, arr)
            )
        else:
            out = self._empirical_tail(arr)
        out = np.maximum(out, 0.0)
        return float(out[0]) if np.isscalar(u) else out.reshape(np.shape(u))

    def _empirical_tail(self, u: np.ndarray) -> np.ndarray:
        g, c = self.grid, self.cdf_values
        one_minus = 1.0 - c
        seg = 0.5 * (one_minus[:-1] + one_minus[1:]) * np.diff(g)
        suffix = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        j = np.clip(np.searchsorted(g, u, side="right") - 1, 0, g.size - 2)
        cu = np.interp(u, g, c)
        partial = 0.5 * ((1.0 - cu) + one_minus[j + 1]) * (g[j + 1] - u)
        return suffix[j + 1] + partial

    def interior_breakpoints(self) -> tuple[float, ...]:
        """Kink locations of F inside (0, 1); empty for smooth kinds."""
        if self.kind == "empirical":
            return tuple(self.grid[1:-1])
        return ()

    # -- serialization ----------------------------------------------------

    def to_csv(self, path) -> None:
        """Write the empirical CDF as two columns ``r,cdf`` (17 significant digits)."""
        if self.kind != "empirical":
            raise DistributionError(f"only empirical distributions serialize to CSV, not {self.kind}")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "cdf"])
            for r, c in zip(self.grid, self.cdf_values):
                writer.writerow([f"{r:.17g}", f"{c:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "RewardDistribution":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DistributionError(f"{path}: {exc}") from exc
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["r", "cdf"]:
            raise DistributionError(f"{path}: expected header 'r,cdf'")
        rs, cs = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rs.append(float(row[0]))
                cs.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise DistributionError(f"{path}:{lineno}: bad row {row!r}") from exc
        return cls.empirical(rs, cs)

    def __repr__(self):
        if self.kind == "beta":
            return f"RewardDistribution.beta({self.alpha:g}, {self.beta_param:g})"
        if self.kind == "empirical":
            return f"RewardDistribution.empirical(<{self.grid.size} pts>, mean={self.mean_cache:.4g})"
        return "RewardDistribution.uniform()"


def _vectorized(f: Callable, lo: float, hi: float) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap an integrand so it accepts an ndarray even if written for scalars.

    Probed once with a two-point array inside (lo, hi); integrands must be
    pure, so the probe is side-effect free.
    """
    probe = np.array([lo + 0.3 * (hi - lo), lo + 0.7 * (hi - lo)])
    try:
        y = np.asarray(f(probe), dtype=float)
        if y.shape == probe.shape:
            return lambda x: np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        pass

    def elementwise(x: np.ndarray) -> np.ndarray:
        return np.fromiter((float(f(v)) for v in x), dtype=float, count=x.size)

    return elementwise


def integrate(
    dist: RewardDistribution,
    integrand: Callable,
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Adaptive-Simpson estimate of ``integral_lo^hi integrand(r) dr``.

    The interval is cut at every breakpoint of ``spec`` and at every interior
    kink of ``dist`` (the empirical grid) that falls inside (lo, hi), then each
    piece is refined until its Richardson error estimate fits its share of
    ``spec.abs_tol``.  All pieces at the same refinement depth are evaluated in
    one vectorized call.

    Raises
    ------
    QuadratureError
        If some piece still exceeds its tolerance at ``max_depth``; the error
        carries the best available estimate.
    """
    spec = spec or _DEFAULT_SPEC
    if not (0.0 <= lo <= hi <= 1.0):
        raise DistributionError(f"integration bounds must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]")
    if hi - lo == 0.0:
        return 0.0
    f = _vectorized(integrand, lo, hi)

    cuts = [b for b in spec.breakpoints if lo < b < hi]
    cuts.extend(b for b in dist.interior_breakpoints() if lo < b < hi)
    edges = np.array(sorted({lo, hi, *cuts}), dtype=float)

    a = edges[:-1].copy()
    b = edges[1:].copy()
    m = 0.5 * (a + b)
    # breakpoints may be jumps or poles of the integrand: take one-sided
    # values by nudging the initial edge evaluations inward
    eps = 1e-12 * (hi - lo)
    fa = f(a + eps)
    fb = f(b - eps)
    fm = f(m)
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = spec.abs_tol * (b - a) / (hi - lo)

    total = 0.0
    failed_bound = 0.0
    failed = False
    depth = 0
    while a.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        sr = (b - m) / 6.0 * (fb + 4.0 * frm + fm)
        s2 = sl + sr
        corr = (s2 - s) / 15.0
        done = np.abs(corr) <= tol
        if depth >= spec.max_depth:
            bad = ~done
            failed = failed or bool(bad.any())
            failed_bound += float(np.sum(np.abs(corr[bad])))
            done = np.ones_like(done)
        total += float(np.sum((s2 + corr)[done]))
        keep = ~done
        if not keep.any():
            break
        # split every unconverged interval into its two halves
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        fa = np.concatenate([fa[keep], fm[keep]])
        fb = np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        m = 0.5 * (a + b)
        s = np.concatenate([sl[keep], sr[keep]])
        tol = np.concatenate([0.5 * tol[keep], 0.5 * tol[keep]])
        depth += 1

    if failed:
        raise QuadratureError(
            f"quadrature did not converge to abs_tol={spec.abs_tol} within depth {spec.max_depth}",
            estimate=total,
            error_bound=failed_bound,
        )
    return total

