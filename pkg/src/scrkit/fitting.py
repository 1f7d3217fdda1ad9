"""Maximum-likelihood estimation of marginal and joint loss distributions.

Three families are fitted here:

* zero-mean normals, for single series and for pooled samples;
* generalized Pareto tails for the heavy-tailed lines, via a profile
  likelihood with an analytic inner step;
* a structured zero-mean 8-dimensional multivariate normal for the joint
  losses of two lines across four companies, whose covariance is built
  from two equicorrelated 4x4 blocks and a cross block with a common
  within-company and a common cross-company correlation.

A likelihood-ratio test compares nested fits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import DataQualityWarning, DomainError, EstimationError, UsageError
from .stats import LeveneResult, chi2_sf

_I4 = np.eye(4)
_J4 = np.ones((4, 4))
_DIM = 8
_LOG_2PI = float(np.log(2.0 * np.pi))


# ---------------------------------------------------------------------------
# Zero-mean normal fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFit:
    """Zero-mean normal fit: the standard deviation and what it was fitted on."""

    sigma: float
    n_obs: int
    loglik: float
    n_params: int = 1


def fit_zero_mean_normal(sample: Sequence[float], ddof: int = 0) -> NormalFit:
    """Fit sigma of a zero-mean normal.

    The default divisor is n (the maximum-likelihood estimate); ``ddof=1``
    gives the n-1 variant.

    Raises:
        DomainError: fewer than two observations or an all-zero sample.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise DomainError(f"need at least two observations, got {x.size}")
    sum_sq = float((x * x).sum())
    if sum_sq == 0.0:
        raise DomainError("all observations are zero: sigma is degenerate")
    if not 0 <= ddof < x.size:
        raise DomainError(f"ddof must lie in [0, n), got {ddof}")
    sigma = float(np.sqrt(sum_sq / (x.size - ddof)))
    loglik = -0.5 * (x.size * (_LOG_2PI + 2.0 * np.log(sigma)) + sum_sq / sigma**2)
    return NormalFit(sigma=sigma, n_obs=int(x.size), loglik=loglik)


def fit_pooled_normal(
    samples: Sequence[Sequence[float]],
    levene: LeveneResult | None = None,
    ddof: int = 0,
) -> NormalFit:
    """Zero-mean normal fit on the concatenation of several samples.

    Pooling presumes the samples share a variance; that is not enforced,
    but a warning is emitted when a supplied Levene result rejects
    equality at the 5% level.
    """
    if not samples:
        raise DomainError("fit_pooled_normal needs at least one sample")
    arrays = [np.asarray(s, dtype=float) for s in samples]
    for i, a in enumerate(arrays):
        if a.size == 0:
            raise DomainError(f"sample {i} is empty")
    if levene is not None and levene.p_value < 0.05:
        warnings.warn(
            f"pooling samples whose variance-equality test rejects at 5% "
            f"(p = {levene.p_value:.4g})",
            DataQualityWarning,
            stacklevel=2,
        )
    return fit_zero_mean_normal(np.concatenate(arrays), ddof=ddof)


# ---------------------------------------------------------------------------
# Generalized Pareto fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GpParams:
    """Shape and scale of a generalized Pareto distribution on [0, inf).

    For negative shapes the support is bounded; the constructor only
    checks the parameter-level invariants, the fit checks the data lies
    inside the support.
    """

    xi: float
    beta: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.xi):
            raise DomainError(f"shape must be finite, got {self.xi}")
        if not self.beta > 0:
            raise DomainError(f"scale must be positive, got {self.beta}")


@dataclass(frozen=True)
class GpFit:
    """Fitted generalized Pareto tail, with likelihood bookkeeping for tests."""

    xi: float
    beta: float
    n_obs: int
    loglik: float
    n_params: int
    shape_fixed: bool

    @property
    def params(self) -> GpParams:
        return GpParams(xi=self.xi, beta=self.beta)


def gp_loglik(x: np.ndarray, xi: float, beta: float) -> float:
    """Exact generalized Pareto log-likelihood of a positive sample."""
    n = x.size
    if xi == 0.0:
        return -n * np.log(beta) - float(x.sum()) / beta
    t = 1.0 + xi * x / beta
    if np.any(t <= 0):
        return -np.inf
    return -n * np.log(beta) - (1.0 + 1.0 / xi) * float(np.log(t).sum())


def fit_gp(sample: Sequence[float], fix_xi_zero: bool = False) -> GpFit:
    """Maximum-likelihood generalized Pareto fit to a positive sample.

    With ``fix_xi_zero`` the family degenerates to the exponential, whose
    scale estimate is the sample mean.  Otherwise the joint optimum is
    found by a one-dimensional profile likelihood in tau = xi / beta: for
    each tau candidate the inner maximizer is analytic,
    xi(tau) = mean(log(1 + tau x)), which also keeps the support
    constraint satisfied by construction (tau > -1/max(x)).  The free fit
    is restricted to shapes above -1; below that the likelihood is
    unbounded at the sample maximum and no maximum-likelihood estimate
    exists.

    Raises:
        DomainError: nonpositive values or fewer than two observations.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise DomainError(f"need at least two observations, got {x.size}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("generalized Pareto fit requires strictly positive finite values")
    if x.size < 5:
        warnings.warn(
            f"generalized Pareto fit on only {x.size} observations is fragile",
            DataQualityWarning,
            stacklevel=2,
        )
    n = int(x.size)
    mean = float(x.mean())
    if fix_xi_zero:
        return GpFit(
            xi=0.0,
            beta=mean,
            n_obs=n,
            loglik=gp_loglik(x, 0.0, mean),
            n_params=1,
            shape_fixed=True,
        )

    xmax = float(x.max())

    def profile_negll(tau: float) -> float:
        if tau == 0.0:
            return n * (np.log(mean) + 1.0)
        if tau <= -1.0 / xmax:
            return np.inf
        xi = float(np.mean(np.log1p(tau * x)))
        if xi <= -1.0:
            return np.inf
        beta = xi / tau
        if beta <= 0 or not np.isfinite(beta):
            return np.inf
        return n * np.log(beta) + n * (1.0 + xi)

    # Bracket the optimum on a grid covering both signs of tau (ascending,
    # from just above the support bound -1/max(x) up to strongly heavy), then
    # polish the best bracket.
    taus = np.concatenate(
        [
            -1.0 / xmax * (1.0 - np.geomspace(1e-9, 1.0 - 1e-12, 60)),
            [0.0],
            np.geomspace(1e-9, 1e6, 90) / mean,
        ]
    )
    values = np.array([profile_negll(t) for t in taus])
    best = int(np.argmin(values))
    lo = taus[max(best - 1, 0)]
    hi = taus[min(best + 1, taus.size - 1)]
    result = optimize.minimize_scalar(
        profile_negll, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13}
    )
    tau = float(result.x) if result.fun <= values[best] else float(taus[best])
    if profile_negll(0.0) <= profile_negll(tau):
        tau = 0.0
    if tau == 0.0:
        xi, beta = 0.0, mean
    else:
        xi = float(np.mean(np.log1p(tau * x)))
        beta = xi / tau
    return GpFit(
        xi=xi,
        beta=beta,
        n_obs=n,
        loglik=gp_loglik(x, xi, beta),
        n_params=2,
        shape_fixed=False,
    )


# ---------------------------------------------------------------------------
# Structured multivariate normal
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructuredCovParams:
    """Parameters of the block covariance for two lines across four companies.

    The 8x8 covariance stacks the first line's 4 companies on top of the
    second line's.  Within each line all companies share one variance and
    one pairwise correlation (``rho_h``/``rho_mo``), and the cross block
    has a common within-company correlation ``rho_1`` and cross-company
    correlation ``rho_2``.
    """

    sigma_h: float
    sigma_mo: float
    rho_h: float
    rho_mo: float
    rho_1: float
    rho_2: float

    def __post_init__(self) -> None:
        if not self.sigma_h > 0 or not self.sigma_mo > 0:
            raise DomainError(
                f"standard deviations must be positive, got ({self.sigma_h}, {self.sigma_mo})"
            )
        for name, rho in (("rho_h", self.rho_h), ("rho_mo", self.rho_mo)):
            if not -1.0 / 3.0 < rho < 1.0:
                raise DomainError(
                    f"{name} must lie in (-1/3, 1) for a positive definite 4x4 block, got {rho}"
                )
        for name, rho in (("rho_1", self.rho_1), ("rho_2", self.rho_2)):
            if not -1.0 < rho < 1.0:
                raise DomainError(f"{name} must lie in (-1, 1), got {rho}")

    def astuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.sigma_h, self.sigma_mo, self.rho_h, self.rho_mo, self.rho_1, self.rho_2)


def _equicorrelation(rho: float) -> np.ndarray:
    return (1.0 - rho) * _I4 + rho * _J4


def _cross_block(rho_1: float, rho_2: float) -> np.ndarray:
    return (rho_1 - rho_2) * _I4 + rho_2 * _J4


def _assemble(sigma_h, sigma_mo, rho_h, rho_mo, rho_1, rho_2) -> np.ndarray:
    top = sigma_h**2 * _equicorrelation(rho_h)
    bottom = sigma_mo**2 * _equicorrelation(rho_mo)
    cross = sigma_h * sigma_mo * _cross_block(rho_1, rho_2)
    return np.block([[top, cross], [cross, bottom]])


def assemble_sigma(params: StructuredCovParams) -> np.ndarray:
    """Build the 8x8 covariance and verify positive definiteness by factorization.

    Raises:
        DomainError: the Cholesky factorization fails, i.e. the parameter
            combination does not produce a valid covariance.
    """
    sigma = _assemble(*params.astuple())
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise DomainError(
            f"assembled covariance is not positive definite (Cholesky failed: {exc}); "
            f"parameters {params}"
        ) from exc
    return sigma


def _loglik_suffstat(scatter: np.ndarray, n: int, sigma: np.ndarray) -> float:
    chol = np.linalg.cholesky(sigma)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    half = np.linalg.solve(chol, scatter)
    quad = float(np.trace(np.linalg.solve(chol, half.T)))
    return -0.5 * (n * _DIM * _LOG_2PI + n * logdet + quad)


def loglik_structured(params: StructuredCovParams, data: Sequence[Sequence[float]]) -> float:
    """Exact zero-mean multivariate normal log-likelihood of 8-vectors."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != _DIM:
        raise DomainError(f"data must be n x {_DIM}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("data contains non-finite entries")
    sigma = assemble_sigma(params)
    return _loglik_suffstat(x.T @ x, x.shape[0], sigma)


def _structure_derivatives(sigma_h, sigma_mo, rho_h, rho_mo, rho_1, rho_2):
    """dSigma / d(raw parameter) for all six raw parameters."""
    eh = _equicorrelation(rho_h)
    emo = _equicorrelation(rho_mo)
    cross = _cross_block(rho_1, rho_2)
    zero = np.zeros((4, 4))
    offdiag = _J4 - _I4
    return (
        np.block([[2.0 * sigma_h * eh, sigma_mo * cross], [sigma_mo * cross, zero]]),
        np.block([[zero, sigma_h * cross], [sigma_h * cross, 2.0 * sigma_mo * emo]]),
        np.block([[sigma_h**2 * offdiag, zero], [zero, zero]]),
        np.block([[zero, zero], [zero, sigma_mo**2 * offdiag]]),
        np.block([[zero, sigma_h * sigma_mo * _I4], [sigma_h * sigma_mo * _I4, zero]]),
        np.block([[zero, sigma_h * sigma_mo * offdiag], [sigma_h * sigma_mo * offdiag, zero]]),
    )


def _sigmoid(t: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-t))


def _to_interval(t: float, lo: float, hi: float) -> float:
    return lo + (hi - lo) * _sigmoid(t)


def _from_interval(x: float, lo: float, hi: float) -> float:
    x = min(max(x, lo + 1e-9 * (hi - lo)), hi - 1e-9 * (hi - lo))
    p = (x - lo) / (hi - lo)
    return float(np.log(p / (1.0 - p)))


_RHO_BLOCK_BOUNDS = (-1.0 / 3.0, 1.0)
_RHO_CROSS_BOUNDS = (-1.0, 1.0)
_PENALTY = 1e12


class _Parameterization:
    """Unconstrained coordinates for the structured fit.

    Standard deviations are optimized on a log scale and correlations
    through a sigmoid onto their validity interval; equality and zero
    constraints on the cross correlations drop coordinates.
    """

    def __init__(self, rho1_equals_rho2: bool, rho1_zero: bool):
        self.rho1_equals_rho2 = rho1_equals_rho2
        self.rho1_zero = rho1_zero
        if rho1_equals_rho2 and rho1_zero:
            self.n_free = 4
        elif rho1_equals_rho2 or rho1_zero:
            self.n_free = 5
        else:
            self.n_free = 6

    def unpack(self, theta: np.ndarray) -> tuple[float, float, float, float, float, float]:
        sigma_h = float(np.exp(theta[0]))
        sigma_mo = float(np.exp(theta[1]))
        rho_h = _to_interval(theta[2], *_RHO_BLOCK_BOUNDS)
        rho_mo = _to_interval(theta[3], *_RHO_BLOCK_BOUNDS)
        if self.rho1_equals_rho2 and self.rho1_zero:
            rho_1 = rho_2 = 0.0
        elif self.rho1_equals_rho2:
            rho_1 = rho_2 = _to_interval(theta[4], *_RHO_CROSS_BOUNDS)
        elif self.rho1_zero:
            rho_1, rho_2 = 0.0, _to_interval(theta[4], *_RHO_CROSS_BOUNDS)
        else:
            rho_1 = _to_interval(theta[4], *_RHO_CROSS_BOUNDS)
            rho_2 = _to_interval(theta[5], *_RHO_CROSS_BOUNDS)
        return sigma_h, sigma_mo, rho_h, rho_mo, rho_1, rho_2

    def pack(self, raw: tuple[float, float, float, float, float, float]) -> np.ndarray:
        sigma_h, sigma_mo, rho_h, rho_mo, rho_1, rho_2 = raw
        theta = [
            float(np.log(sigma_h)),
            float(np.log(sigma_mo)),
            _from_interval(rho_h, *_RHO_BLOCK_BOUNDS),
            _from_interval(rho_mo, *_RHO_BLOCK_BOUNDS),
        ]
        if self.rho1_equals_rho2 and self.rho1_zero:
            pass
        elif self.rho1_equals_rho2:
            theta.append(_from_interval(rho_1, *_RHO_CROSS_BOUNDS))
        elif self.rho1_zero:
            theta.append(_from_interval(rho_2, *_RHO_CROSS_BOUNDS))
        else:
            theta.append(_from_interval(rho_1, *_RHO_CROSS_BOUNDS))
            theta.append(_from_interval(rho_2, *_RHO_CROSS_BOUNDS))
        return np.array(theta)

    def chain(self, theta: np.ndarray, raw_grad: np.ndarray) -> np.ndarray:
        """Map the gradient w.r.t. raw parameters to the free coordinates."""
        grad = np.empty(self.n_free)
        grad[0] = raw_grad[0] * np.exp(theta[0])
        grad[1] = raw_grad[1] * np.exp(theta[1])
        for i, bounds in ((2, _RHO_BLOCK_BOUNDS), (3, _RHO_BLOCK_BOUNDS)):
            s = _sigmoid(theta[i])
            grad[i] = raw_grad[i] * (bounds[1] - bounds[0]) * s * (1.0 - s)
        if self.n_free == 4:
            return grad
        lo, hi = _RHO_CROSS_BOUNDS
        if self.rho1_equals_rho2:
            s = _sigmoid(theta[4])
            grad[4] = (raw_grad[4] + raw_grad[5]) * (hi - lo) * s * (1.0 - s)
        elif self.rho1_zero:
            s = _sigmoid(theta[4])
            grad[4] = raw_grad[5] * (hi - lo) * s * (1.0 - s)
        else:
            for i, j in ((4, 4), (5, 5)):
                s = _sigmoid(theta[i])
                grad[i] = raw_grad[j] * (hi - lo) * s * (1.0 - s)
        return grad


@dataclass(frozen=True)
class StructuredMvnFit:
    """Result of the structured covariance fit."""

    params: StructuredCovParams
    loglik: float
    n_obs: int
    n_params: int
    converged: bool
    n_starts: int
    start_logliks: tuple[float, ...]

    def astuple(self) -> tuple[StructuredCovParams, float]:
        return (self.params, self.loglik)


def _moment_start(scatter: np.ndarray, n: int) -> tuple[float, float, float, float, float, float]:
    cov = scatter / n
    off = ~np.eye(4, dtype=bool)
    sigma_h = float(np.sqrt(max(np.mean(np.diag(cov)[:4]), 1e-12)))
    sigma_mo = float(np.sqrt(max(np.mean(np.diag(cov)[4:]), 1e-12)))
    rho_h = float(np.clip(np.mean(cov[:4, :4][off]) / sigma_h**2, -0.30, 0.97))
    rho_mo = float(np.clip(np.mean(cov[4:, 4:][off]) / sigma_mo**2, -0.30, 0.97))
    cross = cov[:4, 4:] / (sigma_h * sigma_mo)
    rho_1 = float(np.clip(np.mean(np.diag(cross)), -0.9, 0.9))
    rho_2 = float(np.clip(np.mean(cross[off]), -0.9, 0.9))
    return sigma_h, sigma_mo, rho_h, rho_mo, rho_1, rho_2


def _start_points(scatter: np.ndarray, n: int) -> list[tuple[float, float, float, float, float, float]]:
    sh, sm, rh, rm, r1, r2 = _moment_start(scatter, n)
    return [
        (sh, sm, rh, rm, r1, r2),
        (sh, sm, 0.0, 0.0, 0.0, 0.0),
        (0.5 * sh, 0.5 * sm, rh, rm, r1, r2),
        (2.0 * sh, 2.0 * sm, rh, rm, r1, r2),
        (sh, sm, 0.5, 0.5, 0.25, 0.25),
        (sh, sm, -0.2, -0.2, 0.0, 0.0),
        (sh, sm, 0.8, 0.8, 0.5, 0.5),
        (sh, sm, 0.3, 0.3, -0.3, -0.3),
    ]


def fit_structured_mvn(
    data: Sequence[Sequence[float]],
    rho1_equals_rho2: bool = True,
    rho1_zero: bool = False,
    n_starts: int = 8,
) -> StructuredMvnFit:
    """Maximize the structured-covariance likelihood over the 8-vector sample.

    Multi-start quasi-Newton with analytic gradients on the transformed
    coordinates; convergence when the relative log-likelihood improvement
    drops below 1e-10.  The best start wins; ties break by lexicographic
    parameter order so the result does not depend on evaluation order.

    Args:
        data: complete observation vectors, one row per accounting year.
        rho1_equals_rho2: tie the two cross-correlations together (the
            model used for capital calculation).
        rho1_zero: force the within-company cross correlation to zero (the
            reduced model of the likelihood-ratio test; combined with
            ``rho1_equals_rho2`` this zeroes the whole cross block).
        n_starts: how many deterministic start points to try (max 8).

    Raises:
        DomainError: malformed data or fewer than 3 rows.
        EstimationError: no start point converged.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != _DIM:
        raise DomainError(f"data must be n x {_DIM}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("data contains non-finite entries (drop incomplete years first)")
    n = x.shape[0]
    if n < 3:
        raise DomainError(f"need at least 3 observation vectors, got {n}")
    scatter = x.T @ x
    param = _Parameterization(rho1_equals_rho2, rho1_zero)

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        raw = param.unpack(theta)
        sigma = _assemble(*raw)
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            return _PENALTY, np.zeros(param.n_free)
        logdet = 2.0 * float(np.log(np.diag(chol)).sum())
        inv = np.linalg.inv(sigma)
        ll = -0.5 * (n * _DIM * _LOG_2PI + n * logdet + float(np.sum(inv * scatter)))
        gradient_matrix = 0.5 * (inv @ scatter @ inv - n * inv)
        raw_grad = np.array(
            [float(np.sum(gradient_matrix * d)) for d in _structure_derivatives(*raw)]
        )
        return -ll, -param.chain(theta, raw_grad)

    starts = _start_points(scatter, n)[: max(1, min(n_starts, 8))]
    candidates = []
    messages = []
    any_converged = False
    for raw_start in starts:
        theta0 = param.pack(raw_start)
        result = optimize.minimize(
            objective,
            theta0,
            jac=True,
            method="L-BFGS-B",
            options={"ftol": 1e-14, "gtol": 1e-10, "maxiter": 2000},
        )
        raw = param.unpack(result.x)
        ll = -float(result.fun)
        if ll <= -_PENALTY / 2:
            messages.append(f"start {raw_start}: stuck outside the feasible region")
            continue
        any_converged = any_converged or bool(result.success)
        candidates.append((ll, raw))
        if not result.success:
            messages.append(f"start {raw_start}: {result.message}")
    if not candidates or not any_converged:
        raise EstimationError(
            "structured covariance fit did not converge from any start point: "
            + "; ".join(messages or ["no feasible start"])
        )
    candidates.sort(key=lambda c: (-c[0], c[1]))
    best_ll, best_raw = candidates[0]
    params = StructuredCovParams(*best_raw)
    return StructuredMvnFit(
        params=params,
        loglik=best_ll,
        n_obs=n,
        n_params=2 + param.n_free,
        converged=True,
        n_starts=len(starts),
        start_logliks=tuple(ll for ll, _ in candidates),
    )


# ---------------------------------------------------------------------------
# Likelihood-ratio test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LrtResult:
    """Deviance statistic of two nested fits and its chi-square(1) p-value."""

    d: float
    p_value: float
    loglik_full: float
    loglik_reduced: float


def lr_test(full, reduced) -> LrtResult:
    """Likelihood-ratio test of a one-parameter restriction.

    ``full`` and ``reduced`` are fit results exposing ``loglik`` and
    ``n_params``; the reduced model must have exactly one parameter fewer.
    The deviance D = 2 (l_full - l_reduced) is compared against the
    chi-square distribution with one degree of freedom.

    Raises:
        UsageError: the models do not differ by exactly one parameter.
        EstimationError: the reduced model outscores the full model beyond
            numerical tolerance, which signals a failed fit.
    """
    for name, fit in (("full", full), ("reduced", reduced)):
        if not hasattr(fit, "loglik") or not hasattr(fit, "n_params"):
            raise UsageError(f"{name} model must expose loglik and n_params")
    if full.n_params != reduced.n_params + 1:
        raise UsageError(
            f"models are not a one-parameter restriction: full has {full.n_params} "
            f"parameters, reduced has {reduced.n_params}"
        )
    d = 2.0 * (full.loglik - reduced.loglik)
    if d < -1e-6 * max(1.0, abs(full.loglik)):
        raise EstimationError(
            f"reduced model outscored the full model (D = {d:.3g}); refit with more starts"
        )
    return LrtResult(
        d=d,
        p_value=chi2_sf(max(d, 0.0), 1.0),
        loglik_full=float(full.loglik),
        loglik_reduced=float(reduced.loglik),
    )


# ---------------------------------------------------------------------------
# Panel marshalling for the joint fit
# ---------------------------------------------------------------------------

def joint_loss_matrix(
    panel,
    companies: Sequence[str],
    lobs: Sequence[str] = ("H", "MO"),
) -> tuple[list[int], np.ndarray]:
    """Stack per-company loss series into complete 8-vectors.

    The vector layout is (lob0 for each company, then lob1 for each
    company).  Accounting years missing any of the eight series are
    dropped listwise, which keeps the likelihood exact.

    Returns:
        (years, matrix) with one row per retained accounting year.
    """
    if len(lobs) * len(companies) != _DIM:
        raise DomainError(
            f"joint fit needs {len(lobs)} x {len(companies)} = {_DIM} series, "
            f"got {len(lobs)} lobs x {len(companies)} companies"
        )
    series = [panel.u_series(company, lob) for lob in lobs for company in companies]
    common_years = sorted(set.intersection(*(set(s) for s in series))) if series else []
    matrix = np.array([[s[year] for s in series] for year in common_years], dtype=float)
    return list(common_years), matrix.reshape(len(common_years), _DIM)
