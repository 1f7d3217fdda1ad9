"""Shared fixtures: hand-built snapshots and synthetic report files."""

from __future__ import annotations

import warnings

import pytest

from scrkit.datasets import synthetic_reports
from scrkit.errors import DataQualityWarning
from scrkit.reports import Lob, LobId, PairedSnapshots, ReportSnapshot, validate_pair


def make_snapshot(
    company: str = "Alpha",
    lob: str = "H",
    k: int = 3,
    n: int = 2010,
    cum_paid: dict[int, float] | None = None,
    ultimo: dict[int, float] | None = None,
    premiums: dict[int, float] | None = None,
    quiet: bool = True,
) -> ReportSnapshot:
    """A valid snapshot with simple defaults; override any piece per test.

    Data-quality warnings are silenced unless ``quiet=False``; tests that
    assert on warnings build with ``quiet=False``.
    """
    window = range(n - k + 1, n + 1)
    if cum_paid is None:
        cum_paid = {year: 10.0 for year in window}
    if ultimo is None:
        ultimo = {year: 20.0 for year in window}
    if premiums is None:
        premiums = {year: 100.0 for year in range(n - 2, n + 2)}

    def build():
        return ReportSnapshot(
            company=company,
            lob=LobId(code=Lob(lob), horizon_k=k),
            report_year_n=n,
            premiums=premiums,
            cum_paid=cum_paid,
            ultimo=ultimo,
        )

    if not quiet:
        return build()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataQualityWarning)
        return build()


def make_pair(
    k: int = 3,
    n: int = 2010,
    cum_paid0: dict[int, float] | None = None,
    ultimo0: dict[int, float] | None = None,
    ultimo1: dict[int, float] | None = None,
    premiums0: dict[int, float] | None = None,
    premiums1: dict[int, float] | None = None,
    lob: str = "H",
) -> PairedSnapshots:
    """A valid consecutive pair; ultimo1 must cover n-k+2 .. n+1."""
    s0 = make_snapshot(lob=lob, k=k, n=n, cum_paid=cum_paid0, ultimo=ultimo0, premiums=premiums0)
    window1 = range(n - k + 2, n + 2)
    if ultimo1 is None:
        ultimo1 = {year: 20.0 for year in window1}
    cum_paid1 = {year: 12.0 for year in window1}
    s1 = make_snapshot(lob=lob, k=k, n=n + 1, cum_paid=cum_paid1, ultimo=ultimo1, premiums=premiums1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataQualityWarning)
        return validate_pair(s0, s1)


@pytest.fixture(scope="session")
def synthetic_snapshots():
    return synthetic_reports()


@pytest.fixture(scope="session")
def report_file(tmp_path_factory, synthetic_snapshots):
    from scrkit.reports import write_report_csv

    path = tmp_path_factory.mktemp("data") / "reports.csv"
    write_report_csv(path, synthetic_snapshots)
    return path
