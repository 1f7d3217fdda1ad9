"""Hypothesis tests and association measures for pooled loss data.

Two questions precede any pooled estimation: do the per-company loss
samples share a common variance, and is there dependence between series?
The first is answered by Levene's test in its median-centered
(Brown-Forsythe) form, the second by Spearman rank correlations together
with a permutation-based critical value.  The distribution functions used
throughout the package live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _sps

from .errors import DomainError
from .rngs import substream

DEFAULT_PERMUTATIONS = 200_000
DEFAULT_PERMUTATION_SEED = 1729
_PERMUTATION_BLOCK = 50_000


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------

def normal_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return float(_sps.norm.cdf(x))


def normal_quantile(p: float) -> float:
    """Standard normal quantile; ``p`` must lie strictly inside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p}")
    return float(_sps.norm.ppf(p))


def f_cdf(x: float, df1: float, df2: float) -> float:
    """Distribution function of the F distribution with (df1, df2) degrees of freedom."""
    if df1 <= 0 or df2 <= 0:
        raise DomainError(f"F degrees of freedom must be positive, got ({df1}, {df2})")
    return float(_sps.f.cdf(x, df1, df2))


def f_quantile(p: float, df1: float, df2: float) -> float:
    """Quantile of the F distribution with (df1, df2) degrees of freedom."""
    if df1 <= 0 or df2 <= 0:
        raise DomainError(f"F degrees of freedom must be positive, got ({df1}, {df2})")
    if not 0.0 < p < 1.0:
        raise DomainError(f"f_quantile requires 0 < p < 1, got {p}")
    return float(_sps.f.ppf(p, df1, df2))


def chi2_sf(x: float, df: float = 1.0) -> float:
    """Survival function P(X > x) of the chi-square distribution."""
    if df <= 0:
        raise DomainError(f"chi-square degrees of freedom must be positive, got {df}")
    return float(_sps.chi2.sf(x, df))


# ---------------------------------------------------------------------------
# Levene / Brown-Forsythe test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeveneResult:
    """Outcome of the equality-of-variances test.

    ``w`` is F-distributed with (df1, df2) degrees of freedom when all
    groups share a common variance.
    """

    w: float
    df1: int
    df2: int
    p_value: float


def levene_test(groups: Sequence[Sequence[float]], center: str = "median") -> LeveneResult:
    """Test equality of variances across equally sized groups.

    Each observation is replaced by its absolute deviation from the group
    center (the median by default, which makes the test robust against
    non-normality; ``center="mean"`` gives the classical variant).  With g
    groups of n observations each, the statistic is

        W = [g (n-1) / (g-1)] * n * sum_i (zbar_i - zbar)^2
                              / sum_ij (z_ij - zbar_i)^2,

    compared against the F distribution with g-1 and g(n-1) degrees of
    freedom.

    Args:
        groups: at least two numeric samples, all of the same length n >= 2.
        center: "median" or "mean".

    Returns:
        LeveneResult with the statistic, degrees of freedom and p-value.

    Raises:
        DomainError: fewer than two groups, unequal or too-short groups, or
            a degenerate statistic (all deviations identical per group).
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    g = len(arrays)
    if g < 2:
        raise DomainError(f"levene_test needs at least two groups, got {g}")
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        sizes = [a.size for a in arrays]
        raise DomainError(f"levene_test requires equally sized groups, got sizes {sizes}")
    if n < 2:
        raise DomainError(f"levene_test needs at least two observations per group, got {n}")
    if center == "median":
        centers = np.array([np.median(a) for a in arrays])
    elif center == "mean":
        centers = np.array([np.mean(a) for a in arrays])
    else:
        raise DomainError(f"unknown centering {center!r}; expected 'median' or 'mean'")

    z = np.abs(np.vstack(arrays) - centers[:, None])
    zbar_groups = z.mean(axis=1)
    zbar = zbar_groups.mean()
    between = n * float(((zbar_groups - zbar) ** 2).sum())
    within = float(((z - zbar_groups[:, None]) ** 2).sum())
    if within == 0.0:
        raise DomainError(
            "degenerate test statistic: no variation of the absolute deviations within groups"
        )
    df1 = g - 1
    df2 = g * (n - 1)
    w = (df2 / df1) * between / within
    return LeveneResult(w=w, df1=df1, df2=df2, p_value=float(_sps.f.sf(w, df1, df2)))


# ---------------------------------------------------------------------------
# Spearman rank correlation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationResult:
    """Spearman's rho together with the sample size it was computed from."""

    rho: float
    n_obs: int


def _average_ranks(a: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the average of their rank positions."""
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    ranks = np.empty(a.size, dtype=float)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Spearman rank correlation: Pearson correlation of average ranks.

    Raises:
        DomainError: unequal lengths, fewer than two observations, or a
            constant input (the correlation is undefined).
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.size != ya.size:
        raise DomainError(f"samples must have equal length, got {xa.size} and {ya.size}")
    if xa.size < 2:
        raise DomainError(f"spearman_rho needs at least two observations, got {xa.size}")
    rx = _average_ranks(xa)
    ry = _average_ranks(ya)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float((dx * dx).sum())
    sy = float((dy * dy).sum())
    if sx == 0.0 or sy == 0.0:
        raise DomainError("constant input: rank correlation is undefined")
    rho = float((dx * dy).sum() / np.sqrt(sx * sy))
    return CorrelationResult(rho=max(-1.0, min(1.0, rho)), n_obs=int(xa.size))


def _abs_rho_null_samples(n: int, n_permutations: int, seed: int) -> np.ndarray:
    """|rho| under independence, from random permutations against a fixed ranking.

    Permutations are generated in fixed-size blocks on counter-based
    substreams, so the sample depends only on (seed, n_permutations).
    The permuted side is tie-free, which allows the exact rank-difference
    formula; equal rank profiles map to bit-identical |rho| values.
    """
    base = np.arange(1, n + 1, dtype=float)
    denom = float(n * (n * n - 1))
    out = np.empty(n_permutations)
    done = 0
    block = 0
    while done < n_permutations:
        m = min(_PERMUTATION_BLOCK, n_permutations - done)
        rng = substream(seed, block)
        u = rng.random((m, n))
        perm_ranks = np.argsort(np.argsort(u, axis=1), axis=1).astype(float) + 1.0
        d2 = ((perm_ranks - base) ** 2).sum(axis=1)
        # |1 - 6 d2 / denom| with an exact integer-valued numerator, so that
        # mirror-image permutations produce bit-identical values.
        out[done : done + m] = np.abs(denom - 6.0 * d2) / denom
        done += m
        block += 1
    return out


def spearman_critical_value(
    n: int,
    level: float,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_PERMUTATION_SEED,
) -> float:
    """Two-sided critical value of Spearman's rho under independence.

    Returns the smallest threshold c such that the Monte Carlo probability
    of |rho| >= c is at most ``level``; rejecting when |rho| >= c then has
    size <= level.  This is the convention of published critical-value
    tables.  At ``level`` = 1 the threshold collapses to 0.

    Args:
        n: common sample size of the two series (>= 3).
        level: two-sided size of the rejection region, in (0, 1].
        n_permutations: Monte Carlo sample size.
        seed: stream key; identical (seed, n_permutations) give identical output.
    """
    if n < 3:
        raise DomainError(f"spearman_critical_value needs n >= 3, got {n}")
    if not 0.0 < level <= 1.0:
        raise DomainError(f"level must lie in (0, 1], got {level}")
    if n_permutations < 1:
        raise DomainError("n_permutations must be positive")
    max_tail = int(np.floor(level * n_permutations))
    if max_tail >= n_permutations:
        return 0.0
    draws = np.sort(_abs_rho_null_samples(n, n_permutations, seed))
    # Largest value that must stay outside the rejection tail; the threshold
    # is the smallest observed value strictly above it.
    cut = draws[n_permutations - max_tail - 1]
    idx = int(np.searchsorted(draws, cut, side="right"))
    if idx >= n_permutations:
        return float(cut)
    return float(draws[idx])


def spearman_from_linear(rho_linear: float) -> float:
    """Spearman's rho implied by a bivariate normal linear correlation.

    Computes (6 / pi) * arcsin(rho / 2): an odd, strictly increasing map of
    [-1, 1] onto itself that fixes -1, 0 and 1.
    """
    if not -1.0 <= rho_linear <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho_linear}")
    return float(6.0 / np.pi * np.arcsin(rho_linear / 2.0))
