"""Report parsing, validation and pairing."""

from __future__ import annotations

from collections import Counter

import pytest

from scrkit.errors import DataQualityWarning, DataValidationError, ReportParseError
from scrkit.reports import (
    DataQualityPolicy,
    Lob,
    LobId,
    parse_report_file,
    snapshot_rows,
    validate_pair,
    write_report_csv,
)

from conftest import make_snapshot

MINIMAL_ROWS = """company,lob,report_year,record_type,accident_year,value
Alpha,H,2010,premium,2008,90.0
Alpha,H,2010,premium,2009,95.0
Alpha,H,2010,premium,2010,100.0
Alpha,H,2010,premium,2011,105.0
Alpha,H,2010,cum_paid,2008,50.0
Alpha,H,2010,cum_paid,2009,30.0
Alpha,H,2010,cum_paid,2010,10.0
Alpha,H,2010,ultimo,2008,60.0
Alpha,H,2010,ultimo,2009,55.0
Alpha,H,2010,ultimo,2010,52.0
"""


def write(tmp_path, text, name="reports.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestParsing:
    def test_minimal_complete_group(self, tmp_path):
        snapshots = parse_report_file(write(tmp_path, MINIMAL_ROWS))
        assert len(snapshots) == 1
        snap = snapshots[0]
        assert snap.key() == ("Alpha", "H", 2010)
        assert list(snap.accident_years) == [2008, 2009, 2010]

    def test_missing_ultimo_names_accident_year(self, tmp_path):
        text = "\n".join(line for line in MINIMAL_ROWS.splitlines() if "ultimo,2009" not in line)
        with pytest.raises(DataValidationError, match="2009"):
            parse_report_file(write(tmp_path, text))

    def test_brute_force_grouping_count(self, tmp_path, synthetic_snapshots):
        # Two companies x five lobs x 13 report years; the expected snapshot
        # count is the number of distinct (company, lob, report_year) triples
        # in the file, counted independently of the parser.
        subset = [
            s
            for s in synthetic_snapshots
            if s.company in ("Folksam", "If") and s.report_year_n <= 2010
        ]
        path = tmp_path / "two.csv"
        write_report_csv(path, subset)
        import csv

        with path.open() as handle:
            rows = list(csv.reader(handle))[1:]
        groups = {(r[0], r[1], r[2]) for r in rows}
        assert len(groups) == 2 * 5 * 13
        snapshots = parse_report_file(path)
        assert len(snapshots) == len(groups) == 130

    def test_row_count_conservation(self, tmp_path):
        path = write(tmp_path, MINIMAL_ROWS)
        snapshots = parse_report_file(path)
        n_rows = len(MINIMAL_ROWS.strip().splitlines()) - 1
        n_values = sum(len(s.premiums) + len(s.cum_paid) + len(s.ultimo) for s in snapshots)
        assert n_values == n_rows

    def test_malformed_row_reports_line_number(self, tmp_path):
        text = MINIMAL_ROWS + "Alpha,H,2010\n"
        with pytest.raises(ReportParseError, match="line 12"):
            parse_report_file(write(tmp_path, text))

    def test_non_numeric_value(self, tmp_path):
        text = MINIMAL_ROWS.replace("Alpha,H,2010,ultimo,2010,52.0", "Alpha,H,2010,ultimo,2010,abc")
        with pytest.raises(ReportParseError, match="decimal"):
            parse_report_file(write(tmp_path, text))

    def test_unknown_lob(self, tmp_path):
        text = MINIMAL_ROWS + "Alpha,XX,2010,premium,2010,1.0\n"
        with pytest.raises(ReportParseError, match="XX"):
            parse_report_file(write(tmp_path, text))

    def test_duplicate_key_rejected(self, tmp_path):
        text = MINIMAL_ROWS + "Alpha,H,2010,ultimo,2010,52.0\n"
        with pytest.raises(DataValidationError, match="duplicate"):
            parse_report_file(write(tmp_path, text))

    def test_bad_header(self, tmp_path):
        with pytest.raises(ReportParseError, match="header"):
            parse_report_file(write(tmp_path, "a,b,c\n1,2,3\n"))

    def test_round_trip_preserves_value_multiset(self, tmp_path, synthetic_snapshots):
        path = tmp_path / "all.csv"
        write_report_csv(path, synthetic_snapshots)
        reparsed = parse_report_file(path)
        assert Counter(snapshot_rows(synthetic_snapshots)) == Counter(snapshot_rows(reparsed))

    def test_horizon_window_shape(self, synthetic_snapshots):
        for snap in synthetic_snapshots:
            years = sorted(set(snap.cum_paid) | set(snap.ultimo))
            assert years[-1] - years[0] + 1 == snap.lob.horizon_k


class TestSnapshotInvariants:
    def test_nonpositive_premium_rejected(self):
        with pytest.raises(DataValidationError, match="premium"):
            make_snapshot(premiums={year: 0.0 for year in range(2008, 2012)})

    def test_negative_outstanding_warns(self):
        with pytest.warns(DataQualityWarning, match="outstanding"):
            make_snapshot(
                cum_paid={2008: 10.0, 2009: 10.0, 2010: 10.0},
                ultimo={2008: 9.0, 2009: 10.0, 2010: 10.0},
                quiet=False,
            )

    def test_accident_year_outside_horizon_rejected(self):
        with pytest.raises(DataValidationError, match="outside horizon"):
            make_snapshot(cum_paid={year: 10.0 for year in range(2007, 2011)})

    def test_missing_next_premium_warns(self):
        with pytest.warns(DataQualityWarning, match="2011"):
            make_snapshot(premiums={year: 100.0 for year in range(2008, 2011)}, quiet=False)


class TestPairing:
    def test_consecutive_pair_valid(self):
        pair = validate_pair(make_snapshot(n=2010), make_snapshot(n=2011))
        assert pair.accounting_year == 2011
        assert pair.premium_next == 100.0
        assert not pair.premium_from_fallback

    def test_non_consecutive_rejected(self):
        with pytest.raises(DataValidationError, match="not consecutive"):
            validate_pair(make_snapshot(n=2010), make_snapshot(n=2012))

    def test_different_series_rejected(self):
        with pytest.raises(DataValidationError, match="different series"):
            validate_pair(make_snapshot(company="Alpha"), make_snapshot(company="Beta", n=2011))

    def test_missing_new_year_ultimo_rejected(self):
        s0 = make_snapshot(n=2010)
        s1 = make_snapshot(n=2011)
        broken = dict(s1.ultimo)
        del broken[2011]
        object.__setattr__(s1, "ultimo", broken)
        with pytest.raises(DataValidationError, match="2011"):
            validate_pair(s0, s1)

    def test_premium_fallback_comes_from_later_report(self):
        s0 = make_snapshot(n=2010, premiums={y: 100.0 for y in range(2008, 2011)})
        s1 = make_snapshot(n=2011, premiums={y: 111.0 for y in range(2009, 2013)})
        with pytest.warns(DataQualityWarning, match="2011 report"):
            pair = validate_pair(s0, s1)
        assert pair.premium_next == 111.0
        assert pair.premium_from_fallback


class TestPolicy:
    def test_policy_references_must_exist(self):
        policy = DataQualityPolicy(excluded_series=frozenset({("Ghost", "H")}))
        with pytest.raises(DataValidationError, match="Ghost"):
            policy.check_references([("Alpha", "H")])

    def test_first_years_exclusion_window(self):
        policy = DataQualityPolicy(first_accounting_years=2)
        assert policy.excludes("A", "H", 1999, first_year_of_series=1999)
        assert policy.excludes("A", "H", 2000, first_year_of_series=1999)
        assert not policy.excludes("A", "H", 2001, first_year_of_series=1999)

    def test_lob_id_horizon_positive(self):
        with pytest.raises(DataValidationError):
            LobId(code=Lob.H, horizon_k=0)
