"""Loss engine: valuations, normalized losses and panel construction."""

from __future__ import annotations

import csv
import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scrkit.datasets import synthetic_reports
from scrkit.errors import DataQualityWarning, DataValidationError, DomainError
from scrkit.losses import (
    build_loss_panel,
    compute_loss,
    compute_loss_ratio,
    compute_p0,
    compute_r0,
    compute_r1_p1,
    write_loss_panel_csv,
)
from scrkit.reports import DataQualityPolicy, PairedSnapshots

from conftest import make_pair, make_snapshot


class TestR0:
    def test_hand_evaluated_sum(self):
        # k=3: prior years n-1, n with ultimo (15, 20) and paid (10, 5).
        pair = make_pair(
            cum_paid0={2008: 10.0, 2009: 10.0, 2010: 5.0},
            ultimo0={2008: 10.0, 2009: 15.0, 2010: 20.0},
        )
        assert compute_r0(pair) == pytest.approx((15 - 10) + (20 - 5), abs=1e-12)

    def test_zero_outstanding(self):
        pair = make_pair(
            cum_paid0={2008: 10.0, 2009: 10.0, 2010: 10.0},
            ultimo0={2008: 10.0, 2009: 10.0, 2010: 10.0},
        )
        assert compute_r0(pair) == 0.0

    def test_single_term_negative(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DataQualityWarning)
            pair = make_pair(
                k=2,
                cum_paid0={2009: 1.0, 2010: 7.5},
                ultimo0={2009: 1.0, 2010: 7.0},
            )
        assert compute_r0(pair) == pytest.approx(-0.5, abs=1e-12)


class TestLossRatio:
    def test_identity_ratio(self):
        pair = make_pair(
            ultimo0={2008: 100.0, 2009: 100.0, 2010: 100.0},
            premiums0={2008: 100.0, 2009: 100.0, 2010: 100.0, 2011: 100.0},
            cum_paid0={2008: 50.0, 2009: 50.0, 2010: 50.0},
        )
        assert compute_loss_ratio(pair, m=3) == pytest.approx(1.0, abs=1e-12)

    def test_hand_evaluated_m3(self):
        pair = make_pair(
            ultimo0={2008: 10.0, 2009: 12.0, 2010: 14.0},
            premiums0={2008: 10.0, 2009: 10.0, 2010: 10.0, 2011: 10.0},
            cum_paid0={2008: 5.0, 2009: 5.0, 2010: 5.0},
        )
        assert compute_loss_ratio(pair, m=3) == pytest.approx(1.2, abs=1e-12)

    def test_hand_evaluated_m1(self):
        pair = make_pair(
            ultimo0={2008: 10.0, 2009: 12.0, 2010: 8.0},
            premiums0={2008: 10.0, 2009: 10.0, 2010: 10.0, 2011: 10.0},
            cum_paid0={2008: 5.0, 2009: 5.0, 2010: 5.0},
        )
        assert compute_loss_ratio(pair, m=1) == pytest.approx(0.8, abs=1e-12)

    def test_window_exceeding_history(self):
        pair = make_pair()
        with pytest.raises(DataValidationError, match="m=7"):
            compute_loss_ratio(pair, m=7)

    def test_nonpositive_window(self):
        with pytest.raises(DomainError):
            compute_loss_ratio(make_pair(), m=0)


class TestP0:
    def test_unit_ratio(self):
        pair = make_pair(
            ultimo0={2008: 100.0, 2009: 100.0, 2010: 100.0},
            premiums0={2008: 100.0, 2009: 100.0, 2010: 100.0, 2011: 100.0},
            cum_paid0={2008: 50.0, 2009: 50.0, 2010: 50.0},
        )
        assert compute_p0(pair, m=3) == pytest.approx(100.0, abs=1e-12)

    def test_scaled_ratio(self):
        pair = make_pair(
            ultimo0={2008: 10.0, 2009: 12.0, 2010: 14.0},
            premiums0={2008: 10.0, 2009: 10.0, 2010: 10.0, 2011: 100.0},
            cum_paid0={2008: 5.0, 2009: 5.0, 2010: 5.0},
        )
        assert compute_p0(pair, m=3) == pytest.approx(120.0, abs=1e-10)

    def test_zero_coming_premium_warns(self):
        base = make_pair()
        degenerate = PairedSnapshots(s0=base.s0, s1=base.s1, premium_next=0.0)
        with pytest.warns(DataQualityWarning, match="zero premium"):
            assert compute_p0(degenerate, m=3) == 0.0


class TestR1P1:
    def test_unchanged_predictions_reproduce_r0(self):
        pair = make_pair(
            cum_paid0={2008: 10.0, 2009: 10.0, 2010: 5.0},
            ultimo0={2008: 10.0, 2009: 15.0, 2010: 20.0},
            ultimo1={2009: 15.0, 2010: 20.0, 2011: 30.0},
        )
        r1, p1 = compute_r1_p1(pair)
        assert r1 == pytest.approx(compute_r0(pair), abs=1e-12)
        assert p1 == 30.0

    def test_hand_evaluated_revaluation(self):
        pair = make_pair(
            cum_paid0={2008: 10.0, 2009: 10.0, 2010: 5.0},
            ultimo0={2008: 10.0, 2009: 15.0, 2010: 20.0},
            ultimo1={2009: 16.0, 2010: 19.0, 2011: 50.0},
        )
        r1, p1 = compute_r1_p1(pair)
        assert r1 == pytest.approx((16 - 10) + (19 - 5), abs=1e-12)
        assert p1 == 50.0


class TestLossRecord:
    def test_no_revaluation_means_zero_loss(self):
        pair = make_pair(
            cum_paid0={2008: 0.5, 2009: 0.5, 2010: 0.5},
            ultimo0={2008: 1.0, 2009: 1.0, 2010: 1.0},
            ultimo1={2009: 1.0, 2010: 1.0, 2011: 1.0},
            premiums0={2008: 1.0, 2009: 1.0, 2010: 1.0, 2011: 1.0},
        )
        record = compute_loss(pair, m=3)
        assert record.y1 == pytest.approx(record.y0, abs=1e-12)
        assert record.u == pytest.approx(0.0, abs=1e-12)

    def test_hand_evaluated_gain_and_loss(self):
        # Y0 = R0 + P0 = 5 + 5 = 10 by construction below.
        def build(y1_target):
            return make_pair(
                cum_paid0={2008: 1.0, 2009: 1.0, 2010: 1.0},
                ultimo0={2008: 1.0, 2009: 3.5, 2010: 3.5},
                premiums0={2008: 10.0, 2009: 10.0, 2010: 8.0, 2011: 10.0},
                # loss ratio = (1 + 3.5 + 3.5) / 28 = 2/7; P0 = 10 * 2/7
                ultimo1={2009: 3.5, 2010: 3.5, 2011: y1_target},
            )

        pair = build(5.0)
        record = compute_loss(pair, m=3)
        assert record.y0 == pytest.approx(5.0 + 10.0 * 2.0 / 7.0, abs=1e-12)
        # Choose Y1 by direct construction: R1 = R0 = 5, P1 varies.
        y0 = record.y0
        up = compute_loss(build(y0 * 1.2 - 5.0), m=3)
        assert up.u == pytest.approx(0.2, abs=1e-12)
        down = compute_loss(build(y0 * 0.7 - 5.0), m=3)
        assert down.u == pytest.approx(-0.3, abs=1e-12)

    def test_zero_valuation_rejected(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DataQualityWarning)
            pair = make_pair(
                cum_paid0={2008: 1.0, 2009: 2.0, 2010: 2.0},
                ultimo0={2008: 1.0, 2009: 1.0, 2010: 1.0},
                premiums0={2008: 10.0, 2009: 10.0, 2010: 10.0, 2011: 10.0},
            )
        # R0 = -2, P0 = 3/30 * 10 * ... tune premium_next to cancel exactly.
        ratio = compute_loss_ratio(pair, m=3)
        cancel = PairedSnapshots(s0=pair.s0, s1=pair.s1, premium_next=2.0 / ratio)
        with pytest.raises(DomainError, match="Y0 is zero"):
            compute_loss(cancel, m=3)

    def test_decomposition_identity(self):
        pair = make_pair(
            cum_paid0={2008: 0.3, 2009: 0.7, 2010: 0.2},
            ultimo0={2008: 0.9, 2009: 1.4, 2010: 1.1},
            ultimo1={2009: 1.5, 2010: 1.05, 2011: 2.2},
        )
        record = compute_loss(pair, m=3)
        assert abs(record.y0 - (record.r0 + record.p0)) <= 1e-12 * max(1.0, abs(record.y0))
        assert abs(record.y1 - (record.r1 + record.p1)) <= 1e-12 * max(1.0, abs(record.y1))


class TestScaleInvariance:
    @settings(max_examples=40, deadline=None)
    @given(scale=st.floats(min_value=1e-6, max_value=1e6))
    def test_u_invariant_components_scale(self, scale):
        def build(factor):
            return make_pair(
                cum_paid0={2008: 0.3 * factor, 2009: 0.7 * factor, 2010: 0.2 * factor},
                ultimo0={2008: 0.9 * factor, 2009: 1.4 * factor, 2010: 1.1 * factor},
                ultimo1={2009: 1.5 * factor, 2010: 1.05 * factor, 2011: 2.2 * factor},
                premiums0={y: 2.0 * factor for y in range(2008, 2012)},
            )

        base = compute_loss(build(1.0), m=3)
        scaled = compute_loss(build(scale), m=3)
        assert scaled.u == pytest.approx(base.u, rel=1e-12, abs=1e-12)
        for name in ("r0", "p0", "y0", "r1", "p1", "y1"):
            assert getattr(scaled, name) == pytest.approx(scale * getattr(base, name), rel=1e-9)


class TestPanel:
    def test_thirteen_report_years_minus_two_exclusions(self):
        snaps = synthetic_reports(companies=["Solo"], lobs=["H"], n_report_years=13)
        policy = DataQualityPolicy(first_accounting_years=2)
        panel = build_loss_panel(snaps, m=3, policy=policy)
        assert len(panel.records) == 12 - 2

    def test_empty_input(self):
        panel = build_loss_panel([], m=3)
        assert panel.records == ()

    def test_series_exclusion_removes_whole_series(self):
        snaps = synthetic_reports(companies=["Folksam", "If"], lobs=["H", "BLP"], n_report_years=5)
        policy = DataQualityPolicy(excluded_series=frozenset({("Folksam", "BLP")}))
        panel = build_loss_panel(snaps, m=3, policy=policy)
        assert not panel.series("Folksam", "BLP")
        assert panel.series("Folksam", "H")
        assert panel.series("If", "BLP")

    def test_exclusion_is_exact_set_difference(self):
        snaps = synthetic_reports(companies=["Solo"], lobs=["H", "MO"], n_report_years=8)
        full = build_loss_panel(snaps, m=3)
        policy = DataQualityPolicy(
            excluded_accounting_years={("Solo", "H"): frozenset({2001, 2003})}
        )
        reduced = build_loss_panel(snaps, m=3, policy=policy)
        removed = {r.key() for r in full.records} - {r.key() for r in reduced.records}
        assert removed == {("Solo", "H", 2001), ("Solo", "H", 2003)}

    def test_gap_in_reports_recorded_as_skip(self):
        snaps = synthetic_reports(companies=["Solo"], lobs=["H"], n_report_years=6)
        snaps = [s for s in snaps if s.report_year_n != 2000]
        panel = build_loss_panel(snaps, m=3)
        reasons = {(d.accounting_year, d.reason) for d in panel.skipped}
        assert (2000, "no report for the following year") in reasons
        years = sorted(r.accounting_year for r in panel.records)
        assert 2000 not in years and 2001 not in years

    def test_records_sorted_and_unique(self, synthetic_snapshots):
        panel = build_loss_panel(synthetic_snapshots, m=3)
        keys = [r.key() for r in panel.records]
        assert keys == sorted(keys)
        assert len(keys) == len(set(keys))

    def test_m_sensitivity_only_p0_side_changes(self, synthetic_snapshots):
        panels = {m: build_loss_panel(synthetic_snapshots, m=m) for m in (1, 2, 3)}
        base = {r.key(): r for r in panels[3].records}
        changed = False
        for m in (1, 2):
            assert len(panels[m].records) == len(panels[3].records)
            for record in panels[m].records:
                other = base[record.key()]
                assert record.r0 == pytest.approx(other.r0, rel=1e-12, abs=1e-12)
                assert record.r1 == pytest.approx(other.r1, rel=1e-12, abs=1e-12)
                assert record.p1 == pytest.approx(other.p1, rel=1e-12, abs=1e-12)
                if not math.isclose(record.p0, other.p0, rel_tol=1e-12):
                    changed = True
        assert changed, "different loss-ratio windows should move P0 somewhere"

    def test_csv_export_round_trips(self, tmp_path, synthetic_snapshots):
        panel = build_loss_panel(synthetic_snapshots, m=3)
        path = tmp_path / "losses.csv"
        write_loss_panel_csv(path, panel)
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == list(
            ("company", "lob", "accounting_year", "R0", "P0", "Y0", "R1", "P1", "Y1", "loss_ratio", "U")
        )
        assert len(rows) - 1 == len(panel.records)
        first = panel.records[0]
        assert float(rows[1][10]) == first.u
