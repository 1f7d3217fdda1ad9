"""Solvency capital under the internal models.

Two model families are implemented.  The per-company model treats every
line of business as an independent zero-mean normal, so the 99.5% loss
quantile has a closed form.  The pooled mixed model describes the total
loss as a sum of four independent components: a Gaussian part combining
the two dependent short-tail lines (with their cross correlation) and the
motor-liability line, plus two symmetric generalized-Pareto components for
the heavy-tailed lines (Laplace components when the shape is zero).  Its
quantile is computed either by discretized convolution of the component
distributions or by seeded Monte Carlo; the two engines cross-check each
other.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigurationError, DataQualityWarning, DomainError, ResolutionError
from .profiles import LiabilityProfile
from .rngs import substream
from .stats import normal_quantile

#: Lines whose loss feeds the Gaussian part of the mixed model.
GAUSSIAN_LOBS = ("H", "MO", "ML")
#: Lines modeled as symmetric generalized-Pareto components.
TAIL_LOBS = ("IA", "BLP")

_Z_995 = normal_quantile(0.995)


# ---------------------------------------------------------------------------
# Parameters and model assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Pooled-data parameter set for the mixed model.

    ``sigma_ml_overrides`` carries per-company motor-liability standard
    deviations for companies excluded from the pooled sample.
    """

    sigma_h: float
    sigma_mo: float
    rho_1: float
    sigma_ml: float
    xi_ia: float
    beta_ia: float
    xi_blp: float
    beta_blp: float
    sigma_ml_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("sigma_h", "sigma_mo", "sigma_ml", "beta_ia", "beta_blp"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not -1.0 < self.rho_1 < 1.0:
            raise DomainError(f"rho_1 must lie in (-1, 1), got {self.rho_1}")
        for company, value in dict(self.sigma_ml_overrides).items():
            if not value > 0:
                raise DomainError(f"sigma_ml override for {company} must be positive, got {value}")
        object.__setattr__(self, "sigma_ml_overrides", dict(self.sigma_ml_overrides))

    def sigma_ml_for(self, company: str) -> float:
        return self.sigma_ml_overrides.get(company, self.sigma_ml)


@dataclass(frozen=True)
class MixedLossModel:
    """Distributional description of one company's total loss.

    ``laplace_scales`` are the monetary scales of the symmetric
    generalized-Pareto components (Laplace scales in the zero-shape case),
    already multiplied by the lob volumes; ``gp_shapes`` are their shape
    parameters.  Components whose volume is zero are dropped and listed in
    ``dropped``.
    """

    sigma_normal: float
    laplace_scales: tuple[float, ...]
    gp_shapes: tuple[float, ...]
    component_lobs: tuple[str, ...]
    dropped: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.sigma_normal < 0:
            raise DomainError(f"sigma_normal must be nonnegative, got {self.sigma_normal}")
        if len(self.laplace_scales) != len(self.gp_shapes) or len(self.laplace_scales) != len(
            self.component_lobs
        ):
            raise DomainError("component lists must have equal length")
        for scale in self.laplace_scales:
            if not scale > 0:
                raise DomainError(f"component scales must be positive, got {scale}")


def build_mixed_model(profile: LiabilityProfile, params: ModelParams) -> MixedLossModel:
    """Scale the pooled parameters by one company's volumes.

    The Gaussian variance combines the two dependent short-tail lines with
    their cross correlation plus the independent motor-liability line:

        sigma^2 = (Y0_H s_H)^2 + (Y0_MO s_MO)^2
                  + 2 Y0_H Y0_MO s_H s_MO rho_1 + (Y0_ML s_ML)^2

    and each heavy-tail component gets scale Y0_lob * beta_lob.  Lines
    missing from the profile contribute zero volume.
    """
    y0 = {lob: (profile.figures[lob].y0 if lob in profile.figures else 0.0) for lob in GAUSSIAN_LOBS + TAIL_LOBS}
    sigma_ml = params.sigma_ml_for(profile.company)
    variance = (
        (y0["H"] * params.sigma_h) ** 2
        + (y0["MO"] * params.sigma_mo) ** 2
        + 2.0 * y0["H"] * y0["MO"] * params.sigma_h * params.sigma_mo * params.rho_1
        + (y0["ML"] * sigma_ml) ** 2
    )
    # |rho_1| < 1 makes the quadratic form positive semidefinite.
    assert variance >= 0.0, f"negative combined variance {variance}"
    scales, shapes, lobs, dropped = [], [], [], []
    for lob, xi, beta in (("IA", params.xi_ia, params.beta_ia), ("BLP", params.xi_blp, params.beta_blp)):
        scale = y0[lob] * beta
        if scale == 0.0:
            dropped.append(lob)
            warnings.warn(
                f"{profile.company}: zero volume for {lob}, its loss component degenerates to 0",
                DataQualityWarning,
                stacklevel=2,
            )
            continue
        scales.append(scale)
        shapes.append(xi)
        lobs.append(lob)
    return MixedLossModel(
        sigma_normal=float(math.sqrt(variance)),
        laplace_scales=tuple(scales),
        gp_shapes=tuple(shapes),
        component_lobs=tuple(lobs),
        dropped=tuple(dropped),
    )


# ---------------------------------------------------------------------------
# Symmetric generalized Pareto distribution
# ---------------------------------------------------------------------------

def gp_quantile(beta: float, xi: float, p: float) -> float:
    """Quantile of the (one-sided) generalized Pareto distribution."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"gp_quantile requires 0 <= p < 1, got {p}")
    if beta <= 0:
        raise DomainError(f"scale must be positive, got {beta}")
    if xi == 0.0:
        return -beta * math.log1p(-p)
    return beta / xi * ((1.0 - p) ** (-xi) - 1.0)


def symmetric_gp_quantile(beta: float, xi: float, p: float) -> float:
    """Upper-tail quantile of a fair-signed generalized Pareto loss.

    For the component X = B Z with P(B = +1) = P(B = -1) = 1/2 and
    Z ~ GP(xi, beta), the upper quantile satisfies
    F_X^{-1}(p) = F_Z^{-1}(2p - 1) for p > 1/2; at xi = 0 this is
    -beta log(2(1 - p)).

    Raises:
        DomainError: p <= 0.5 (only the upper tail is defined here) or a
            nonpositive scale.
    """
    if not 0.5 < p < 1.0:
        raise DomainError(f"symmetric_gp_quantile requires 0.5 < p < 1, got {p}")
    return gp_quantile(beta, xi, 2.0 * p - 1.0)


def _symmetric_gp_cdf(x: np.ndarray, beta: float, xi: float) -> np.ndarray:
    """Distribution function of the fair-signed generalized Pareto loss."""
    ax = np.abs(x)
    if xi == 0.0:
        tail = np.exp(-ax / beta)
    else:
        t = 1.0 + xi * ax / beta
        if xi < 0:
            tail = np.where(t > 0.0, np.maximum(t, 0.0) ** (-1.0 / xi), 0.0)
        else:
            tail = t ** (-1.0 / xi)
    return np.where(x >= 0, 1.0 - 0.5 * tail, 0.5 * tail)


def _symmetric_gp_sd(beta: float, xi: float) -> float | None:
    """Standard deviation of the fair-signed component; None when infinite."""
    if xi >= 0.5:
        return None
    return beta * math.sqrt(2.0 / ((1.0 - xi) * (1.0 - 2.0 * xi)))


# ---------------------------------------------------------------------------
# Quantile engines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvolutionSettings:
    """Grid resolution for the discretized convolution engine."""

    n_points: int = 1 << 16
    width_sds: float = 12.0
    tail_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if self.n_points < 1024:
            raise DomainError(f"convolution grid needs at least 1024 points, got {self.n_points}")
        if self.width_sds <= 0 or self.tail_tolerance <= 0:
            raise DomainError("width_sds and tail_tolerance must be positive")


@dataclass(frozen=True)
class McSettings:
    """Simulation size, stream seed and blocking for the Monte Carlo engine."""

    n_sims: int = 1_000_000
    seed: int = 20121
    block_size: int = 1 << 16
    threads: int = 1

    def __post_init__(self) -> None:
        if self.n_sims < 1 or self.block_size < 1 or self.threads < 1:
            raise DomainError("n_sims, block_size and threads must be positive")


@dataclass(frozen=True)
class QuantileEstimate:
    """A quantile value, with a standard error when it came from simulation."""

    value: float
    engine: str
    stderr: float | None = None


def _component_half_width(model: MixedLossModel, width_sds: float) -> float:
    """Grid half-width: enough combined standard deviations, and enough room
    for each component's own 1e-10 tail."""
    variance = model.sigma_normal**2
    finite_var = True
    for beta, xi in zip(model.laplace_scales, model.gp_shapes):
        sd = _symmetric_gp_sd(beta, xi)
        if sd is None:
            finite_var = False
        else:
            variance += sd * sd
    half = width_sds * math.sqrt(variance) if finite_var else 0.0
    for beta, xi in zip(model.laplace_scales, model.gp_shapes):
        half = max(half, gp_quantile(beta, xi, 1.0 - 1e-10))
    if model.sigma_normal > 0:
        half = max(half, 7.0 * model.sigma_normal)
    return half


def _convolution_quantile(model: MixedLossModel, p: float, settings: ConvolutionSettings) -> float:
    from scipy.stats import norm

    half = _component_half_width(model, settings.width_sds)
    n = settings.n_points
    x = np.linspace(-half, half, n)
    step = x[1] - x[0]
    edges = np.concatenate([[x[0] - 0.5 * step], x + 0.5 * step])

    # Cell masses from CDF differences keep kinked densities (Laplace at 0) exact.
    pmfs = []
    if model.sigma_normal > 0:
        pmfs.append(np.diff(norm.cdf(edges, scale=model.sigma_normal)))
    for beta, xi in zip(model.laplace_scales, model.gp_shapes):
        pmfs.append(np.diff(_symmetric_gp_cdf(edges, beta, xi)))

    total = pmfs[0]
    support_start = x[0]
    for pmf in pmfs[1:]:
        total = fftconvolve(total, pmf)
        support_start += x[0]
    total = np.maximum(total, 0.0)
    cdf = np.cumsum(total)
    lost_mass = 1.0 - float(cdf[-1])
    if lost_mass > settings.tail_tolerance:
        raise ResolutionError(
            f"convolution grid covers too little tail mass ({lost_mass:.3g} beyond the grid, "
            f"tolerance {settings.tail_tolerance:.3g}); widen the grid or add points"
        )
    right_edges = support_start + step * (np.arange(total.size) + 0.5)
    return float(np.interp(p, cdf, right_edges))


def _mc_block(model: MixedLossModel, seed: int, block_index: int, size: int) -> np.ndarray:
    rng = substream(seed, block_index)
    draws = model.sigma_normal * rng.standard_normal(size) if model.sigma_normal > 0 else np.zeros(size)
    for beta, xi in zip(model.laplace_scales, model.gp_shapes):
        u = rng.random(size)
        signs = np.where(u >= 0.5, 1.0, -1.0)
        w = np.abs(2.0 * u - 1.0)
        if xi == 0.0:
            magnitude = -beta * np.log1p(-w)
        else:
            magnitude = beta / xi * ((1.0 - w) ** (-xi) - 1.0)
        draws = draws + signs * magnitude
    return draws


def _mc_quantile(model: MixedLossModel, p: float, settings: McSettings) -> tuple[float, float]:
    sizes = []
    remaining = settings.n_sims
    while remaining > 0:
        sizes.append(min(settings.block_size, remaining))
        remaining -= sizes[-1]

    if settings.threads == 1:
        blocks = [_mc_block(model, settings.seed, i, size) for i, size in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            blocks = list(
                pool.map(lambda args: _mc_block(model, settings.seed, *args), enumerate(sizes))
            )
    draws = np.sort(np.concatenate(blocks))
    n = draws.size
    if n < 10_000:
        warnings.warn(
            f"Monte Carlo quantile from only {n} simulations is noisy",
            DataQualityWarning,
            stacklevel=3,
        )
    position = p * (n - 1)
    lower = int(math.floor(position))
    upper = min(lower + 1, n - 1)
    weight = position - lower
    value = float((1.0 - weight) * draws[lower] + weight * draws[upper])

    # Density at the quantile from an order-statistic spacing, for the
    # asymptotic standard error sqrt(p(1-p)/n) / f(q).
    window = max(1, int(round(0.5 * math.sqrt(n))))
    lo = max(lower - window, 0)
    hi = min(lower + window, n - 1)
    spread = float(draws[hi] - draws[lo])
    if spread <= 0:
        stderr = 0.0
    else:
        density = (hi - lo) / (n * spread)
        stderr = math.sqrt(p * (1.0 - p) / n) / density
    return value, stderr


def quantile_total_loss(
    model: MixedLossModel,
    p: float,
    engine: str = "convolution",
    conv_settings: ConvolutionSettings | None = None,
    mc_settings: McSettings | None = None,
) -> QuantileEstimate:
    """Quantile of the total loss distribution of a mixed model.

    Degenerate models short-circuit to exact formulas: with no heavy-tail
    components the loss is Gaussian, and with no Gaussian part and a single
    component the symmetric generalized-Pareto quantile applies directly.

    Args:
        model: component description from :func:`build_mixed_model`.
        p: probability level in (0, 1); the heavy-tail shortcut needs p > 0.5.
        engine: "convolution" (deterministic grid) or "monte_carlo".

    Raises:
        ResolutionError: the convolution grid leaves more than the allowed
            tail mass outside its range.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {p}")
    if engine not in ("convolution", "monte_carlo"):
        raise DomainError(f"unknown engine {engine!r}")
    if not model.laplace_scales:
        return QuantileEstimate(value=normal_quantile(p) * model.sigma_normal, engine="exact")
    if model.sigma_normal == 0.0 and len(model.laplace_scales) == 1 and p > 0.5:
        value = symmetric_gp_quantile(model.laplace_scales[0], model.gp_shapes[0], p)
        return QuantileEstimate(value=value, engine="exact")
    if engine == "convolution":
        value = _convolution_quantile(model, p, conv_settings or ConvolutionSettings())
        return QuantileEstimate(value=value, engine="convolution")
    value, stderr = _mc_quantile(model, p, mc_settings or McSettings())
    return QuantileEstimate(value=value, engine="monte_carlo", stderr=stderr)


# ---------------------------------------------------------------------------
# Capital requirements
# ---------------------------------------------------------------------------

def scr_simple_internal(profile: LiabilityProfile, stdevs: Mapping[str, float]) -> float:
    """Capital requirement under the independent-normal per-company model.

    With independent zero-mean normal lines, the 99.5% quantile of the
    total loss is the normal quantile times the root of the summed squared
    per-line standard deviations, each scaled by its liability volume.

    Raises:
        ConfigurationError: a line with nonzero volume has no standard deviation.
    """
    total = 0.0
    for lob in profile.lobs():
        y0 = profile.y0(lob)
        if y0 == 0.0:
            continue
        if lob not in stdevs:
            raise ConfigurationError(
                f"{profile.company}: no loss standard deviation configured for {lob}"
            )
        total += (y0 * stdevs[lob]) ** 2
    return _Z_995 * math.sqrt(total)


def scr_mixed_model(
    profile: LiabilityProfile,
    params: ModelParams,
    verify: bool = False,
    conv_settings: ConvolutionSettings | None = None,
    mc_settings: McSettings | None = None,
) -> float:
    """Capital requirement under the pooled mixed model: the 99.5% total-loss quantile.

    The convolution engine is authoritative; with ``verify`` the Monte
    Carlo engine recomputes the quantile and a disagreement beyond three
    Monte Carlo standard errors raises.
    """
    model = build_mixed_model(profile, params)
    estimate = quantile_total_loss(model, 0.995, "convolution", conv_settings=conv_settings)
    if verify:
        check = quantile_total_loss(model, 0.995, "monte_carlo", mc_settings=mc_settings)
        if check.stderr is not None and abs(estimate.value - check.value) > 3.0 * max(check.stderr, 1e-12):
            raise ResolutionError(
                f"{profile.company}: convolution and Monte Carlo quantiles disagree "
                f"({estimate.value:.6g} vs {check.value:.6g} +- {check.stderr:.2g})"
            )
    return estimate.value


@dataclass(frozen=True)
class ModelSigmaRow:
    """Per-lob standard deviation and quantile ratio implied by a parameter set."""

    lob: str
    sigma: float
    quantile_ratio: float
    q995: float


def model_sigma_table(params: ModelParams) -> list[ModelSigmaRow]:
    """Standard deviations and 99.5% quantile-to-sigma ratios per unit volume.

    Gaussian lines have ratio equal to the normal 0.995 quantile; the
    fair-signed generalized-Pareto lines have a heavier ratio, e.g.
    -log(0.01)/sqrt(2) at shape zero.
    """
    rows = []
    for lob, xi, beta in (("IA", params.xi_ia, params.beta_ia), ("BLP", params.xi_blp, params.beta_blp)):
        sd = _symmetric_gp_sd(beta, xi)
        if sd is None:
            raise DomainError(f"{lob}: standard deviation is infinite for shape {xi}")
        q = symmetric_gp_quantile(beta, xi, 0.995)
        rows.append(ModelSigmaRow(lob=lob, sigma=sd, quantile_ratio=q / sd, q995=q))
    gaussian = [("H", params.sigma_h), ("ML", params.sigma_ml)]
    gaussian += [(f"ML ({company})", value) for company, value in sorted(params.sigma_ml_overrides.items())]
    gaussian.append(("MO", params.sigma_mo))
    for lob, sigma in gaussian:
        rows.append(ModelSigmaRow(lob=lob, sigma=sigma, quantile_ratio=_Z_995, q995=_Z_995 * sigma))
    order = {"IA": 0, "H": 1, "BLP": 2, "ML": 3, "MO": 5}
    rows.sort(key=lambda r: (order.get(r.lob, 4), r.lob))
    return rows
