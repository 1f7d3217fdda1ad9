"""Premium-and-reserve-risk capital under the Solvency II standard formula.

The Swedish reporting lines are mapped onto the Solvency II segmentation
with fixed proportions, volume measures are built from earned premiums and
incurred-claims predictions, and per-line standard deviations are combined
through the regulator's correlation assumptions.  Module capital is three
times sigma times volume (the regulator's lognormal calibration equates
the 99.5% quantile with roughly three standard deviations), and the Health
and Non-life modules aggregate independently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DataQualityWarning, DomainError
from .profiles import LiabilityProfile

#: Solvency II lines used here: NonSLT Health pair plus the Non-life set.
HEALTH_LOBS = ("ME", "IP")
NONLIFE_LOBS = ("MVL", "OM", "FPD", "TPL")
S2_LOBS = HEALTH_LOBS + NONLIFE_LOBS

#: Capital per unit of sigma * volume under the lognormal calibration.
QUANTILE_FACTOR = 3.0

DEFAULT_SEGMENTATION: dict[str, dict[str, float]] = {
    "IA": {"ME": 0.25, "IP": 0.75},
    "H": {"FPD": 0.9, "TPL": 0.1},
    "BLP": {"FPD": 0.8, "TPL": 0.2},
    "ML": {"MVL": 1.0},
    "MO": {"OM": 1.0},
}

DEFAULT_SIGMAS: dict[str, tuple[float, float]] = {
    # lob: (sigma_premium, sigma_reserve)
    "ME": (0.050, 0.050),
    "IP": (0.085, 0.14),
    "MVL": (0.10, 0.090),
    "OM": (0.080, 0.080),
    "FPD": (0.080, 0.10),
    "TPL": (0.14, 0.11),
}

DEFAULT_NONLIFE_CORR: dict[frozenset[str], float] = {
    frozenset(("MVL", "OM")): 0.5,
    frozenset(("MVL", "FPD")): 0.25,
    frozenset(("MVL", "TPL")): 0.5,
    frozenset(("OM", "FPD")): 0.25,
    frozenset(("OM", "TPL")): 0.25,
    frozenset(("FPD", "TPL")): 0.25,
}


@dataclass(frozen=True)
class SegmentationMap:
    """Proportions mapping each reporting line onto Solvency II lines."""

    proportions: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: DEFAULT_SEGMENTATION
    )

    def __post_init__(self) -> None:
        cleaned: dict[str, dict[str, float]] = {}
        for swedish, targets in dict(self.proportions).items():
            total = 0.0
            cleaned[swedish] = {}
            for target, pi in dict(targets).items():
                if target not in S2_LOBS:
                    raise ConfigurationError(f"unknown Solvency II lob {target!r} in segmentation")
                if not 0.0 <= pi <= 1.0:
                    raise ConfigurationError(
                        f"segmentation proportion for {swedish}->{target} must lie in [0, 1], got {pi}"
                    )
                cleaned[swedish][target] = float(pi)
                total += pi
            if abs(total - 1.0) > 1e-9:
                raise ConfigurationError(
                    f"segmentation proportions for {swedish} must sum to 1, got {total}"
                )
        object.__setattr__(self, "proportions", cleaned)

    def targets(self, swedish_lob: str) -> dict[str, float]:
        return dict(self.proportions[swedish_lob])


@dataclass(frozen=True)
class RegulatorTable:
    """Standard deviations and correlations specified by the regulators."""

    sigmas: Mapping[str, tuple[float, float]] = field(default_factory=lambda: DEFAULT_SIGMAS)
    alpha: float = 0.5
    rho_me_ip: float = 0.5
    nonlife_corr: Mapping[frozenset[str], float] = field(
        default_factory=lambda: DEFAULT_NONLIFE_CORR
    )

    def __post_init__(self) -> None:
        sigmas = {lob: (float(sp), float(sr)) for lob, (sp, sr) in dict(self.sigmas).items()}
        for lob in S2_LOBS:
            if lob not in sigmas:
                raise ConfigurationError(f"regulator table missing sigmas for {lob}")
            sp, sr = sigmas[lob]
            if sp < 0 or sr < 0:
                raise ConfigurationError(f"regulator sigmas for {lob} must be nonnegative")
        object.__setattr__(self, "sigmas", sigmas)
        corr = {frozenset(pair): float(rho) for pair, rho in dict(self.nonlife_corr).items()}
        object.__setattr__(self, "nonlife_corr", corr)
        matrix = self.nonlife_matrix()
        eigenvalues = np.linalg.eigvalsh(matrix)
        if eigenvalues.min() < -1e-12:
            raise ConfigurationError(
                f"non-life correlation matrix is not positive semidefinite "
                f"(smallest eigenvalue {eigenvalues.min():.3g})"
            )

    def sigma_prem(self, lob: str) -> float:
        return self.sigmas[lob][0]

    def sigma_res(self, lob: str) -> float:
        return self.sigmas[lob][1]

    def rho(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        if {a, b} == set(HEALTH_LOBS):
            return self.rho_me_ip
        try:
            return self.nonlife_corr[frozenset((a, b))]
        except KeyError:
            raise ConfigurationError(f"no correlation configured for ({a}, {b})") from None

    def nonlife_matrix(self) -> np.ndarray:
        return np.array(
            [
                [1.0 if i == j else self.nonlife_corr[frozenset((i, j))] for j in NONLIFE_LOBS]
                for i in NONLIFE_LOBS
            ]
        )


@dataclass(frozen=True)
class SolvencyVolumes:
    """Premium and reserve volume measures per Solvency II line."""

    volumes: Mapping[str, tuple[float, float]]

    def __post_init__(self) -> None:
        cleaned = {}
        for lob in S2_LOBS:
            vp, vr = (self.volumes.get(lob) or (0.0, 0.0))
            if vp < 0 or vr < 0:
                raise DomainError(f"volume measures for {lob} must be nonnegative, got ({vp}, {vr})")
            cleaned[lob] = (float(vp), float(vr))
        object.__setattr__(self, "volumes", cleaned)

    def premium(self, lob: str) -> float:
        return self.volumes[lob][0]

    def reserve(self, lob: str) -> float:
        return self.volumes[lob][1]

    def total(self) -> float:
        return sum(vp + vr for vp, vr in self.volumes.values())


def segment_volumes(profile: LiabilityProfile, seg_map: SegmentationMap | None = None) -> SolvencyVolumes:
    """Allocate a company's premiums and incurred-claims predictions to Solvency II lines.

    Raises:
        ConfigurationError: the profile carries volume on a reporting line
            the segmentation does not map.
    """
    seg_map = seg_map or SegmentationMap()
    volumes = {lob: [0.0, 0.0] for lob in S2_LOBS}
    for swedish_lob, figures in sorted(profile.figures.items()):
        if swedish_lob not in seg_map.proportions:
            if figures.premium != 0 or figures.r0 != 0:
                raise ConfigurationError(
                    f"{profile.company}: reporting line {swedish_lob} carries volume but is not segmented"
                )
            continue
        for target, pi in sorted(seg_map.targets(swedish_lob).items()):
            volumes[target][0] += pi * figures.premium
            volumes[target][1] += pi * figures.r0
    return SolvencyVolumes(volumes={lob: tuple(v) for lob, v in volumes.items()})


def sigma_lob(vp: float, vr: float, sp: float, sr: float, alpha: float = 0.5) -> tuple[float, float]:
    """Combine premium and reserve risk of one line.

    Returns (V, sigma) with V = vp + vr and

        sigma = sqrt((sp vp)^2 + 2 alpha sp sr vp vr + (sr vr)^2) / V.

    A line without volume returns (0, 0) and warns rather than erroring, so
    sparse profiles aggregate cleanly.
    """
    volume = vp + vr
    if volume == 0.0:
        warnings.warn("line without volume: sigma set to 0", DataQualityWarning, stacklevel=2)
        return 0.0, 0.0
    if volume < 0:
        raise DomainError(f"total volume must be nonnegative, got {volume}")
    quadratic = (sp * vp) ** 2 + 2.0 * alpha * sp * sr * vp * vr + (sr * vr) ** 2
    return volume, math.sqrt(quadratic) / volume


def _lob_terms(volumes: SolvencyVolumes, table: RegulatorTable, lobs: Sequence[str]) -> dict[str, tuple[float, float]]:
    """(V, sigma) per line, computed quietly for zero-volume lines."""
    terms = {}
    for lob in lobs:
        vp, vr = volumes.premium(lob), volumes.reserve(lob)
        if vp + vr == 0.0:
            terms[lob] = (0.0, 0.0)
            continue
        terms[lob] = sigma_lob(vp, vr, table.sigma_prem(lob), table.sigma_res(lob), table.alpha)
    return terms


def scr_health(volumes: SolvencyVolumes, table: RegulatorTable | None = None) -> float:
    """Capital for the NonSLT Health sub-module (medical expense + income protection)."""
    table = table or RegulatorTable()
    terms = _lob_terms(volumes, table, HEALTH_LOBS)
    (v_me, s_me), (v_ip, s_ip) = terms["ME"], terms["IP"]
    volume = v_me + v_ip
    if volume == 0.0:
        return 0.0
    quadratic = (
        (s_me * v_me) ** 2
        + 2.0 * table.rho_me_ip * s_me * s_ip * v_me * v_ip
        + (s_ip * v_ip) ** 2
    )
    return QUANTILE_FACTOR * math.sqrt(quadratic)


def scr_nonlife(volumes: SolvencyVolumes, table: RegulatorTable | None = None) -> float:
    """Capital for the Non-life module (motor, fire/property, third-party liability)."""
    table = table or RegulatorTable()
    terms = _lob_terms(volumes, table, NONLIFE_LOBS)
    volume = sum(v for v, _ in terms.values())
    if volume == 0.0:
        return 0.0
    quadratic = 0.0
    for i in NONLIFE_LOBS:
        for j in NONLIFE_LOBS:
            quadratic += table.rho(i, j) * terms[i][1] * terms[j][1] * terms[i][0] * terms[j][0]
    return QUANTILE_FACTOR * math.sqrt(quadratic)


def scr_standard_total(
    profile: LiabilityProfile,
    seg_map: SegmentationMap | None = None,
    table: RegulatorTable | None = None,
) -> float:
    """Overall premium-and-reserve capital: Health and Non-life aggregated independently."""
    volumes = segment_volumes(profile, seg_map)
    table = table or RegulatorTable()
    return math.hypot(scr_health(volumes, table), scr_nonlife(volumes, table))


@dataclass(frozen=True)
class StandardFormulaReport:
    """Per-company breakdown of the standard-formula computation."""

    company: str
    scr_health: float
    scr_nonlife: float
    scr_total: float
    total_liability: float

    @property
    def ratio_to_liability(self) -> float:
        return self.scr_total / self.total_liability if self.total_liability else 0.0


def standard_formula_report(
    profile: LiabilityProfile,
    seg_map: SegmentationMap | None = None,
    table: RegulatorTable | None = None,
) -> StandardFormulaReport:
    volumes = segment_volumes(profile, seg_map)
    table = table or RegulatorTable()
    health = scr_health(volumes, table)
    nonlife = scr_nonlife(volumes, table)
    return StandardFormulaReport(
        company=profile.company,
        scr_health=health,
        scr_nonlife=nonlife,
        scr_total=math.hypot(health, nonlife),
        total_liability=profile.total_liability(),
    )


def aggregate_profiles(profiles: Sequence[LiabilityProfile]) -> LiabilityProfile:
    """Sum volumes across companies into one market-wide profile."""
    from .profiles import LobFigures

    if not profiles:
        raise DomainError("need at least one profile to aggregate")
    lobs = sorted({lob for profile in profiles for lob in profile.figures})
    figures = {}
    for lob in lobs:
        entries = [p.figures[lob] for p in profiles if lob in p.figures]
        figures[lob] = LobFigures(
            premium=sum(e.premium for e in entries),
            r0=sum(e.r0 for e in entries),
            p0=sum(e.p0 for e in entries),
        )
    return LiabilityProfile(company="(aggregate)", figures=figures)


def benchmark_sigma_swedish(
    aggregate: LiabilityProfile,
    seg_map: SegmentationMap | None = None,
    table: RegulatorTable | None = None,
) -> dict[str, float]:
    """Standard-formula sigma implied for each reporting line, market-wide.

    Per Solvency II line a sigma comes from the aggregate volumes; a
    reporting line mapped to one target inherits that sigma, and a line
    split over two targets combines them with the segmentation proportions
    and the regulator correlation:

        sigma = sqrt((s_i pi)^2 + 2 rho_ij s_i s_j pi (1-pi) + (s_j (1-pi))^2).
    """
    seg_map = seg_map or SegmentationMap()
    table = table or RegulatorTable()
    volumes = segment_volumes(aggregate, seg_map)
    terms = _lob_terms(volumes, table, S2_LOBS)
    out: dict[str, float] = {}
    for swedish_lob in sorted(aggregate.figures):
        targets = sorted(seg_map.targets(swedish_lob).items())
        if len(targets) == 1:
            out[swedish_lob] = terms[targets[0][0]][1]
        elif len(targets) == 2:
            (lob_i, pi), (lob_j, pj) = targets
            s_i, s_j = terms[lob_i][1], terms[lob_j][1]
            rho = table.rho(lob_i, lob_j)
            out[swedish_lob] = math.sqrt(
                (s_i * pi) ** 2 + 2.0 * rho * s_i * s_j * pi * pj + (s_j * pj) ** 2
            )
        else:
            raise ConfigurationError(
                f"benchmark sigma supports lines mapped to one or two targets, "
                f"{swedish_lob} maps to {len(targets)}"
            )
    return out
