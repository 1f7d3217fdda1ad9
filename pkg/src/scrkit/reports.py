"""Yearly-report data model, CSV ingestion and validation.

A report snapshot is one (company, line of business, report year) slice of
a supervisory yearly report: earned premiums per accident year, cumulative
claim payments to date, and the actuarial ultimo predictions of those
payments.  Snapshots for consecutive report years pair up into the unit of
information the loss engine consumes.

The file format is a long-form CSV, one value per row:

    company,lob,report_year,record_type,accident_year,value

with ``record_type`` one of ``premium``, ``cum_paid``, ``ultimo`` and
``lob`` one of IA, H, BLP, ML, MO.  Values use '.' as decimal separator
and no thousands separators.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataQualityWarning, DataValidationError, ReportParseError

CSV_COLUMNS = ("company", "lob", "report_year", "record_type", "accident_year", "value")
RECORD_TYPES = ("premium", "cum_paid", "ultimo")


class Lob(str, enum.Enum):
    """The five lines of business carried by the reports."""

    IA = "IA"    # Illness and Accident
    H = "H"      # Home
    BLP = "BLP"  # Business Liability and Property
    ML = "ML"    # Motor Liability
    MO = "MO"    # Motor Other

    def __str__(self) -> str:  # csv/json friendliness
        return self.value


#: Reporting horizon (number of accident years covered) per line of business.
DEFAULT_HORIZONS: dict[Lob, int] = {
    Lob.IA: 10,
    Lob.H: 3,
    Lob.BLP: 10,
    Lob.ML: 15,
    Lob.MO: 3,
}


@dataclass(frozen=True)
class LobId:
    """A line of business together with its reporting horizon."""

    code: Lob
    horizon_k: int

    def __post_init__(self) -> None:
        if self.horizon_k < 1:
            raise DataValidationError(f"horizon must be a positive number of years, got {self.horizon_k}")

    @classmethod
    def default(cls, code: Lob | str) -> "LobId":
        code = Lob(code)
        return cls(code=code, horizon_k=DEFAULT_HORIZONS[code])


def resolve_horizons(overrides: Mapping[str, int] | None = None) -> dict[Lob, int]:
    """Default horizons, optionally overridden per line of business."""
    horizons = dict(DEFAULT_HORIZONS)
    for key, value in (overrides or {}).items():
        lob = Lob(key)
        if int(value) < 1:
            raise DataValidationError(f"horizon override for {lob} must be positive, got {value}")
        horizons[lob] = int(value)
    return horizons


@dataclass(frozen=True)
class ReportSnapshot:
    """Everything one report says about one line of business.

    ``premiums`` maps accident year to earned premium and must cover at
    least report_year_n - 2 .. report_year_n + 1 (the premium for the
    coming year is treated as known; see the pairing logic for the
    fallback when it is missing).  ``cum_paid`` and ``ultimo`` must cover
    exactly the horizon window report_year_n - k + 1 .. report_year_n.
    """

    company: str
    lob: LobId
    report_year_n: int
    premiums: Mapping[int, float]
    cum_paid: Mapping[int, float]
    ultimo: Mapping[int, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "premiums", dict(self.premiums))
        object.__setattr__(self, "cum_paid", dict(self.cum_paid))
        object.__setattr__(self, "ultimo", dict(self.ultimo))
        self._validate()

    def _validate(self) -> None:
        n, k = self.report_year_n, self.lob.horizon_k
        window = range(n - k + 1, n + 1)
        where = f"{self.company}/{self.lob.code}/{n}"
        for year in window:
            if year not in self.cum_paid:
                raise DataValidationError(f"{where}: missing cum_paid for accident year {year}")
            if year not in self.ultimo:
                raise DataValidationError(f"{where}: missing ultimo for accident year {year}")
        for label, mapping in (("cum_paid", self.cum_paid), ("ultimo", self.ultimo)):
            extra = set(mapping) - set(window)
            if extra:
                raise DataValidationError(
                    f"{where}: {label} accident years {sorted(extra)} outside horizon window "
                    f"{window.start}..{n}"
                )
            for year, value in mapping.items():
                if not math.isfinite(value):
                    raise DataValidationError(f"{where}: non-finite {label} for accident year {year}")
        for year in range(n - 2, n + 1):
            if year not in self.premiums:
                raise DataValidationError(f"{where}: missing premium for accident year {year}")
        if n + 1 not in self.premiums:
            warnings.warn(
                f"{where}: premium for accident year {n + 1} not reported; pairing will "
                "fall back to the next report",
                DataQualityWarning,
                stacklevel=3,
            )
        for year, value in self.premiums.items():
            if not math.isfinite(value) or value <= 0:
                raise DataValidationError(f"{where}: premium for accident year {year} must be > 0, got {value}")
        for year in window:
            if self.ultimo[year] < self.cum_paid[year]:
                warnings.warn(
                    f"{where}: ultimo below cumulative payments for accident year {year} "
                    "(negative outstanding claims)",
                    DataQualityWarning,
                    stacklevel=3,
                )

    @property
    def accident_years(self) -> range:
        n, k = self.report_year_n, self.lob.horizon_k
        return range(n - k + 1, n + 1)

    def key(self) -> tuple[str, str, int]:
        return (self.company, self.lob.code.value, self.report_year_n)


@dataclass(frozen=True)
class PairedSnapshots:
    """Consecutive snapshots of one series, checked to support loss construction.

    ``premium_next`` is the earned premium for the coming accounting year,
    read from the earlier report when available (it is treated as known at
    that point) and from the later report otherwise.
    """

    s0: ReportSnapshot
    s1: ReportSnapshot
    premium_next: float
    premium_from_fallback: bool = False

    @property
    def company(self) -> str:
        return self.s0.company

    @property
    def lob(self) -> LobId:
        return self.s0.lob

    @property
    def accounting_year(self) -> int:
        """The accounting year whose loss this pair describes (year n+1)."""
        return self.s1.report_year_n


def validate_pair(s0: ReportSnapshot, s1: ReportSnapshot) -> PairedSnapshots:
    """Pair the reports for years n and n+1 of one series.

    Checks that the two snapshots belong together, that every accident year
    the loss construction needs is covered, and resolves the premium for
    the coming year.

    Raises:
        DataValidationError: mismatched series, non-consecutive years, or
            an accident-year coverage gap.
    """
    if (s0.company, s0.lob) != (s1.company, s1.lob):
        raise DataValidationError(
            f"cannot pair {s0.company}/{s0.lob.code} with {s1.company}/{s1.lob.code}: "
            "different series"
        )
    n = s0.report_year_n
    if s1.report_year_n != n + 1:
        raise DataValidationError(
            f"{s0.company}/{s0.lob.code}: reports {n} and {s1.report_year_n} are not consecutive"
        )
    k = s0.lob.horizon_k
    # Prior accident years revalued over the accounting year, plus the new
    # accident year n+1; snapshot validation guarantees coverage, but the
    # checks are repeated here because pairs can be built from hand-made
    # snapshots in tests and tools.
    for year in range(n - k + 2, n + 1):
        if year not in s0.cum_paid or year not in s0.ultimo:
            raise DataValidationError(f"{s0.company}/{s0.lob.code}/{n}: accident year {year} not covered")
        if year not in s1.ultimo:
            raise DataValidationError(
                f"{s0.company}/{s0.lob.code}/{n + 1}: accident year {year} missing an ultimo prediction"
            )
    if n + 1 not in s1.ultimo:
        raise DataValidationError(
            f"{s0.company}/{s0.lob.code}/{n + 1}: missing ultimo prediction for accident year {n + 1}"
        )
    if n + 1 in s0.premiums:
        premium_next = s0.premiums[n + 1]
        fallback = False
    elif n + 1 in s1.premiums:
        premium_next = s1.premiums[n + 1]
        fallback = True
        warnings.warn(
            f"{s0.company}/{s0.lob.code}: premium for accident year {n + 1} taken from the "
            f"{n + 1} report because the {n} report does not carry it",
            DataQualityWarning,
            stacklevel=2,
        )
    else:
        raise DataValidationError(
            f"{s0.company}/{s0.lob.code}: premium for accident year {n + 1} not available in either report"
        )
    return PairedSnapshots(s0=s0, s1=s1, premium_next=premium_next, premium_from_fallback=fallback)


@dataclass(frozen=True)
class DataQualityPolicy:
    """Records to drop before analysis.

    ``excluded_accounting_years`` maps (company, lob code) to accounting
    years whose losses are discarded; ``excluded_series`` drops whole
    (company, lob) series.  ``first_accounting_years`` drops that many of
    the earliest accounting years of every series, the usual treatment for
    a reporting regime's break-in period.
    """

    first_accounting_years: int = 0
    excluded_accounting_years: Mapping[tuple[str, str], frozenset[int]] = field(default_factory=dict)
    excluded_series: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        if self.first_accounting_years < 0:
            raise DataValidationError("first_accounting_years must be >= 0")
        object.__setattr__(
            self,
            "excluded_accounting_years",
            {key: frozenset(years) for key, years in dict(self.excluded_accounting_years).items()},
        )
        object.__setattr__(self, "excluded_series", frozenset(self.excluded_series))

    def excludes(self, company: str, lob_code: str, accounting_year: int, first_year_of_series: int) -> bool:
        if (company, lob_code) in self.excluded_series:
            return True
        if accounting_year < first_year_of_series + self.first_accounting_years:
            return True
        return accounting_year in self.excluded_accounting_years.get((company, lob_code), frozenset())

    def check_references(self, series_keys: Iterable[tuple[str, str]]) -> None:
        """Verify every exclusion refers to a series present in the data."""
        known = set(series_keys)
        missing = [key for key in self.excluded_series if key not in known]
        missing += [key for key in self.excluded_accounting_years if key not in known]
        if missing:
            raise DataValidationError(f"exclusion policy references unknown series: {sorted(set(missing))}")


# ---------------------------------------------------------------------------
# CSV parsing and serialization
# ---------------------------------------------------------------------------

def _parse_row(row: Sequence[str], line_number: int) -> tuple[str, str, int, str, int, float]:
    if len(row) != len(CSV_COLUMNS):
        raise ReportParseError(
            f"expected {len(CSV_COLUMNS)} columns, got {len(row)}", line_number
        )
    company, lob_raw, report_year_raw, record_type, accident_year_raw, value_raw = row
    company = company.strip()
    if not company:
        raise ReportParseError("empty company", line_number)
    lob_raw = lob_raw.strip()
    try:
        Lob(lob_raw)
    except ValueError:
        raise ReportParseError(
            f"unknown lob {lob_raw!r}; expected one of {[m.value for m in Lob]}", line_number
        ) from None
    record_type = record_type.strip()
    if record_type not in RECORD_TYPES:
        raise ReportParseError(
            f"unknown record_type {record_type!r}; expected one of {RECORD_TYPES}", line_number
        )
    try:
        report_year = int(report_year_raw)
        accident_year = int(accident_year_raw)
    except ValueError:
        raise ReportParseError(
            f"report_year and accident_year must be integers, got "
            f"{report_year_raw!r}, {accident_year_raw!r}",
            line_number,
        ) from None
    try:
        value = float(value_raw)
    except ValueError:
        raise ReportParseError(f"value must be a decimal number, got {value_raw!r}", line_number) from None
    return company, lob_raw, report_year, record_type, accident_year, value


def parse_report_file(
    path: str | Path,
    horizons: Mapping[str, int] | None = None,
) -> list[ReportSnapshot]:
    """Parse a long-form report CSV into validated snapshots.

    Every non-header row lands in exactly one snapshot; the first offending
    row aborts parsing with its line number.  Snapshots are returned sorted
    by (company, lob, report year).

    Args:
        path: CSV file with header ``company,lob,report_year,record_type,accident_year,value``.
        horizons: optional per-lob horizon overrides.

    Raises:
        ReportParseError: malformed header or row.
        DataValidationError: duplicate keys or snapshot invariant violations.
    """
    path = Path(path)
    resolved = resolve_horizons(horizons)
    groups: dict[tuple[str, str, int], dict[str, dict[int, float]]] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ReportParseError("empty file: missing header") from None
        if tuple(col.strip() for col in header) != CSV_COLUMNS:
            raise ReportParseError(f"bad header {header!r}; expected {','.join(CSV_COLUMNS)}", 1)
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            company, lob_raw, report_year, record_type, accident_year, value = _parse_row(row, line_number)
            group = groups.setdefault(
                (company, lob_raw, report_year),
                {record_type_name: {} for record_type_name in RECORD_TYPES},
            )
            bucket = group[record_type]
            if accident_year in bucket:
                raise DataValidationError(
                    f"line {line_number}: duplicate {record_type} for "
                    f"{company}/{lob_raw}/{report_year}, accident year {accident_year}"
                )
            bucket[accident_year] = value

    snapshots = []
    for (company, lob_raw, report_year) in sorted(groups):
        group = groups[(company, lob_raw, report_year)]
        lob = Lob(lob_raw)
        snapshots.append(
            ReportSnapshot(
                company=company,
                lob=LobId(code=lob, horizon_k=resolved[lob]),
                report_year_n=report_year,
                premiums=group["premium"],
                cum_paid=group["cum_paid"],
                ultimo=group["ultimo"],
            )
        )
    return snapshots


def snapshot_rows(snapshots: Iterable[ReportSnapshot]) -> list[tuple[str, str, int, str, int, float]]:
    """Flatten snapshots back into CSV rows (sorted, one value per row)."""
    rows = []
    for snap in snapshots:
        for record_type, mapping in (
            ("premium", snap.premiums),
            ("cum_paid", snap.cum_paid),
            ("ultimo", snap.ultimo),
        ):
            for accident_year in sorted(mapping):
                rows.append(
                    (
                        snap.company,
                        snap.lob.code.value,
                        snap.report_year_n,
                        record_type,
                        accident_year,
                        float(mapping[accident_year]),
                    )
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    return rows


def write_report_csv(path: str | Path, snapshots: Iterable[ReportSnapshot]) -> None:
    """Serialize snapshots to the long-form CSV format."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in snapshot_rows(snapshots):
            writer.writerow([row[0], row[1], row[2], row[3], row[4], repr(float(row[5]))])


def group_by_series(
    snapshots: Iterable[ReportSnapshot],
) -> dict[tuple[str, str], list[ReportSnapshot]]:
    """Group snapshots by (company, lob code), each series sorted by report year."""
    series: dict[tuple[str, str], list[ReportSnapshot]] = {}
    seen: set[tuple[str, str, int]] = set()
    for snap in snapshots:
        if snap.key() in seen:
            raise DataValidationError(f"duplicate snapshot for {snap.key()}")
        seen.add(snap.key())
        series.setdefault((snap.company, snap.lob.code.value), []).append(snap)
    for snaps in series.values():
        snaps.sort(key=lambda s: s.report_year_n)
    return series
