"""Normalized one-year loss construction from paired report snapshots.

At the start of an accounting year the outstanding liability of a line of
business is valued as the sum of two cash flows: claims already incurred
(the reserve side) and claims that will incur during the year (the premium
side, valued through a historical loss ratio).  One year later both cash
flows are revalued with the new report.  The normalized loss is the
relative increase of the total valuation:

    R0 = sum over prior accident years of (ultimo prediction - paid so far)
    P0 = premium for the coming year * loss ratio
    Y0 = R0 + P0
    R1, P1 = the same cash flows revalued one report later
    U  = (Y1 - Y0) / Y0

Both valuations subtract the same cumulative payments, taken from the
earlier report, so U isolates prediction changes plus the new accident
year.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import DataQualityWarning, DataValidationError, DomainError, ScrKitError
from .reports import DataQualityPolicy, PairedSnapshots, ReportSnapshot, group_by_series, validate_pair

LOSS_CSV_COLUMNS = (
    "company",
    "lob",
    "accounting_year",
    "R0",
    "P0",
    "Y0",
    "R1",
    "P1",
    "Y1",
    "loss_ratio",
    "U",
)


@dataclass(frozen=True)
class LossRecord:
    """One normalized loss with its full valuation decomposition."""

    company: str
    lob: str
    accounting_year: int
    r0: float
    p0: float
    y0: float
    r1: float
    p1: float
    y1: float
    loss_ratio: float
    u: float

    def key(self) -> tuple[str, str, int]:
        return (self.company, self.lob, self.accounting_year)


@dataclass(frozen=True)
class PanelDiagnostic:
    """Why a candidate accounting year produced no loss record."""

    company: str
    lob: str
    accounting_year: int
    reason: str


@dataclass(frozen=True)
class LossPanel:
    """Loss records indexed by (company, lob, accounting year).

    ``m`` is the loss-ratio window used to build the records and
    ``skipped`` lists the accounting years that were dropped, either by the
    data-quality policy or because their pair was incomplete.
    """

    records: tuple[LossRecord, ...]
    m: int
    skipped: tuple[PanelDiagnostic, ...] = ()

    def __post_init__(self) -> None:
        keys = [r.key() for r in self.records]
        if len(keys) != len(set(keys)):
            raise DataValidationError("duplicate (company, lob, accounting_year) in loss panel")

    def series(self, company: str, lob: str) -> dict[int, LossRecord]:
        return {r.accounting_year: r for r in self.records if r.company == company and r.lob == lob}

    def u_series(self, company: str, lob: str) -> dict[int, float]:
        return {year: rec.u for year, rec in self.series(company, lob).items()}

    def companies(self) -> list[str]:
        return sorted({r.company for r in self.records})

    def lobs(self) -> list[str]:
        return sorted({r.lob for r in self.records})


def compute_r0(pair: PairedSnapshots) -> float:
    """Start-of-year value of the cash flow from already incurred claims.

    Sums, over the prior accident years still on the books, the predicted
    remaining payments: ultimo prediction minus cumulative payments, both
    from the earlier report.
    """
    s0 = pair.s0
    n, k = s0.report_year_n, s0.lob.horizon_k
    total = 0.0
    for year in range(n - k + 2, n + 1):
        if year not in s0.ultimo or year not in s0.cum_paid:
            raise DataValidationError(
                f"{pair.company}/{pair.lob.code}/{n}: accident year {year} not covered"
            )
        total += s0.ultimo[year] - s0.cum_paid[year]
    return total


def compute_loss_ratio(pair: PairedSnapshots, m: int) -> float:
    """Ultimo predictions over earned premiums, summed over the last m accident years."""
    if m < 1:
        raise DomainError(f"loss-ratio window m must be >= 1, got {m}")
    s0 = pair.s0
    n = s0.report_year_n
    years = range(n - m + 1, n + 1)
    for year in years:
        if year not in s0.ultimo:
            raise DataValidationError(
                f"{pair.company}/{pair.lob.code}/{n}: loss ratio with m={m} needs an ultimo "
                f"prediction for accident year {year}"
            )
        if year not in s0.premiums:
            raise DataValidationError(
                f"{pair.company}/{pair.lob.code}/{n}: loss ratio with m={m} needs the premium "
                f"for accident year {year}"
            )
    premium_sum = sum(s0.premiums[year] for year in years)
    if premium_sum <= 0:
        raise DomainError(
            f"{pair.company}/{pair.lob.code}/{n}: premium sum over m={m} years must be positive, "
            f"got {premium_sum}"
        )
    return sum(s0.ultimo[year] for year in years) / premium_sum


def compute_p0(pair: PairedSnapshots, m: int) -> float:
    """Start-of-year value of the coming accident year: premium times loss ratio."""
    ratio = compute_loss_ratio(pair, m)
    if pair.premium_next == 0:
        warnings.warn(
            f"{pair.company}/{pair.lob.code}: zero premium for the coming year, "
            "new-business value degenerates to 0",
            DataQualityWarning,
            stacklevel=2,
        )
        return 0.0
    return pair.premium_next * ratio


def compute_r1_p1(pair: PairedSnapshots) -> tuple[float, float]:
    """End-of-year revaluation of both cash flows.

    The reserve side keeps the same subtrahend as its start-of-year value
    (cumulative payments from the earlier report), so the difference R1-R0
    is purely a change in ultimo predictions.  The premium side is revalued
    as the new accident year's own ultimo prediction.
    """
    s0, s1 = pair.s0, pair.s1
    n, k = s0.report_year_n, s0.lob.horizon_k
    r1 = 0.0
    for year in range(n - k + 2, n + 1):
        if year not in s1.ultimo:
            raise DataValidationError(
                f"{pair.company}/{pair.lob.code}/{n + 1}: accident year {year} missing an ultimo prediction"
            )
        if year not in s0.cum_paid:
            raise DataValidationError(
                f"{pair.company}/{pair.lob.code}/{n}: accident year {year} missing cumulative payments"
            )
        r1 += s1.ultimo[year] - s0.cum_paid[year]
    if n + 1 not in s1.ultimo:
        raise DataValidationError(
            f"{pair.company}/{pair.lob.code}/{n + 1}: missing ultimo prediction for accident year {n + 1}"
        )
    return r1, s1.ultimo[n + 1]


def compute_loss(pair: PairedSnapshots, m: int) -> LossRecord:
    """Assemble the full loss record for the accounting year the pair spans.

    Raises:
        DomainError: the start-of-year valuation Y0 is zero, which leaves
            the normalized loss undefined.
    """
    r0 = compute_r0(pair)
    ratio = compute_loss_ratio(pair, m)
    p0 = pair.premium_next * ratio
    y0 = r0 + p0
    if y0 == 0:
        raise DomainError(
            f"{pair.company}/{pair.lob.code}/{pair.accounting_year}: total valuation Y0 is zero, "
            "normalized loss undefined"
        )
    if y0 < 0:
        warnings.warn(
            f"{pair.company}/{pair.lob.code}/{pair.accounting_year}: negative valuation Y0={y0}, "
            "the sign of the normalized loss is inverted",
            DataQualityWarning,
            stacklevel=2,
        )
    r1, p1 = compute_r1_p1(pair)
    y1 = r1 + p1
    return LossRecord(
        company=pair.company,
        lob=pair.lob.code.value,
        accounting_year=pair.accounting_year,
        r0=r0,
        p0=p0,
        y0=y0,
        r1=r1,
        p1=p1,
        y1=y1,
        loss_ratio=ratio,
        u=(y1 - y0) / y0,
    )


def build_loss_panel(
    snapshots: Sequence[ReportSnapshot],
    m: int = 3,
    policy: DataQualityPolicy | None = None,
) -> LossPanel:
    """Build the loss panel from all consecutive report pairs.

    Each series contributes one record per consecutive pair of report
    years, minus the policy exclusions.  Gaps in the report sequence and
    pairs that fail validation are skipped, not interpolated; every skip is
    recorded as a diagnostic.  Records come out sorted by (company, lob,
    accounting year).
    """
    policy = policy or DataQualityPolicy()
    series = group_by_series(snapshots)
    policy.check_references(series.keys())
    records: list[LossRecord] = []
    skipped: list[PanelDiagnostic] = []
    for (company, lob_code), snaps in sorted(series.items()):
        if not snaps:
            continue
        first_accounting_year = snaps[0].report_year_n + 1
        last_report_year = snaps[-1].report_year_n
        by_year = {snap.report_year_n: snap for snap in snaps}
        for year in sorted(by_year):
            if year == last_report_year:
                break
            accounting_year = year + 1
            if year + 1 not in by_year:
                if not policy.excludes(company, lob_code, accounting_year, first_accounting_year):
                    skipped.append(
                        PanelDiagnostic(company, lob_code, accounting_year, "no report for the following year")
                    )
                continue
            if policy.excludes(company, lob_code, accounting_year, first_accounting_year):
                skipped.append(PanelDiagnostic(company, lob_code, accounting_year, "excluded by policy"))
                continue
            try:
                pair = validate_pair(by_year[year], by_year[year + 1])
                records.append(compute_loss(pair, m))
            except ScrKitError as exc:
                skipped.append(PanelDiagnostic(company, lob_code, accounting_year, str(exc)))
    records.sort(key=lambda r: r.key())
    return LossPanel(records=tuple(records), m=m, skipped=tuple(skipped))


def write_loss_panel_csv(path: str | Path, panel: LossPanel) -> None:
    """Export the panel in the documented column order, one record per row."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LOSS_CSV_COLUMNS)
        for r in panel.records:
            writer.writerow(
                [r.company, r.lob, r.accounting_year]
                + [
                    repr(float(value))
                    for value in (r.r0, r.p0, r.y0, r.r1, r.p1, r.y1, r.loss_ratio, r.u)
                ]
            )
