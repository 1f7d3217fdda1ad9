"""Company liability profiles: the volume inputs of every capital formula.

A profile carries, per line of business, the earned premium for the coming
accounting year and the start-of-year valuation split into its reserve and
premium components.  Profiles can be stated directly (as in the bundled
benchmark dataset) or derived from the latest pair of report snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DataValidationError
from .losses import compute_loss
from .reports import Lob, ReportSnapshot, group_by_series, validate_pair


@dataclass(frozen=True)
class LobFigures:
    """Premium and start-of-year liability valuation of one line of business."""

    premium: float
    r0: float
    p0: float

    @property
    def y0(self) -> float:
        return self.r0 + self.p0


@dataclass(frozen=True)
class LiabilityProfile:
    """Per-lob volumes of one company."""

    company: str
    figures: Mapping[str, LobFigures]

    def __post_init__(self) -> None:
        cleaned = {}
        for key, fig in dict(self.figures).items():
            code = Lob(key).value
            for label, value in (("premium", fig.premium), ("r0", fig.r0), ("p0", fig.p0)):
                if value != value or value in (float("inf"), float("-inf")):
                    raise DataValidationError(f"{self.company}/{code}: non-finite {label}")
            cleaned[code] = fig
        object.__setattr__(self, "figures", cleaned)

    def lobs(self) -> list[str]:
        return sorted(self.figures)

    def y0(self, lob: str) -> float:
        return self.figures[Lob(lob).value].y0

    def total_liability(self) -> float:
        return sum(fig.y0 for fig in self.figures.values())


def profile_from_mapping(company: str, values: Mapping[str, Mapping[str, float]]) -> LiabilityProfile:
    """Build a profile from nested plain dicts, e.g. parsed configuration.

    Each lob entry must provide ``V``, ``R0`` and ``P0``.
    """
    figures = {}
    for lob, entry in values.items():
        missing = {"V", "R0", "P0"} - set(entry)
        if missing:
            raise DataValidationError(f"{company}/{lob}: profile entry missing {sorted(missing)}")
        figures[lob] = LobFigures(premium=float(entry["V"]), r0=float(entry["R0"]), p0=float(entry["P0"]))
    return LiabilityProfile(company=company, figures=figures)


def profiles_from_reports(
    snapshots: Sequence[ReportSnapshot],
    m: int = 3,
) -> dict[str, LiabilityProfile]:
    """Derive one profile per company from the latest valid report pair of each series."""
    series = group_by_series(snapshots)
    per_company: dict[str, dict[str, LobFigures]] = {}
    for (company, lob), snaps in sorted(series.items()):
        by_year = {snap.report_year_n: snap for snap in snaps}
        for year in sorted(by_year, reverse=True):
            if year + 1 not in by_year:
                continue
            pair = validate_pair(by_year[year], by_year[year + 1])
            record = compute_loss(pair, m)
            per_company.setdefault(company, {})[lob] = LobFigures(
                premium=pair.premium_next, r0=record.r0, p0=record.p0
            )
            break
    return {
        company: LiabilityProfile(company=company, figures=figures)
        for company, figures in per_company.items()
    }
