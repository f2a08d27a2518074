"""Tests for panel assembly: predictors, labels, scaling, synthetic data."""

import math

import numpy as np
import pytest

from bankmodal import panel
from bankmodal.errors import DataError, ValidationError
from bankmodal.numcore import UsageError
from bankmodal.panel import (
    PREDICTOR_NAMES,
    RawQuarter,
    add_quarters,
    build_panel,
    compute_predictors,
    format_quarter,
    parse_quarter,
    quarter_index,
    synth_generate,
)


def full_raw(firm_id="F1", quarter=(2010, 1), **over):
    """A raw quarter whose 33 predictors are all computable."""
    base = dict(
        actq=4.0, lctq=2.0, apq=1.0, saleq=10.0, cheq=1.0, atq=20.0, chq=1.0,
        dlcq=1.0, dlttq=2.0, invchy=1.0, saley=10.0, invtq=1.0, ltq=10.0,
        cshoq=5.0, prccq=10.0, niq=1.0, oiadpq=2.0, req=3.0, seqq=10.0,
        wcapq=2.0, ret=0.05, vwretd=0.02,
        daily_returns=tuple(0.01 * math.sin(i) for i in range(30)),
    )
    base.update(over)
    return RawQuarter(firm_id=firm_id, quarter=quarter, **base)


class TestQuarterHelpers:
    def test_index_of_consecutive_quarters_differs_by_one(self):
        assert quarter_index((2010, 2)) - quarter_index((2010, 1)) == 1
        assert quarter_index((2011, 1)) - quarter_index((2010, 4)) == 1

    def test_add_quarters_wraps_the_year(self):
        assert add_quarters((2010, 4), 1) == (2011, 1)
        assert add_quarters((2010, 1), 7) == (2011, 4)
        assert add_quarters((2010, 1), -1) == (2009, 4)

    def test_parse_and_format_round_trip(self):
        assert parse_quarter("2010Q3") == (2010, 3)
        assert parse_quarter(" 1999q4 ") == (1999, 4)
        assert format_quarter((2010, 3)) == "2010Q3"

    def test_rejects_malformed_quarters(self):
        for bad in ("2010", "2010Q5", "Q1", "2010-Q1"):
            with pytest.raises(ValidationError):
                parse_quarter(bad)
        with pytest.raises(ValidationError):
            quarter_index((2010, 0))
        with pytest.raises(ValidationError):
            quarter_index((2010.0, 1))


class TestPredictors:
    def test_every_predictor_present(self):
        values = compute_predictors(full_raw(), total_equity=10.0)
        assert tuple(values) == PREDICTOR_NAMES
        assert len(values) == 33
        assert all(v is not None for v in values.values())

    def test_simple_ratio(self):
        values = compute_predictors(full_raw(actq=4.0, lctq=2.0))
        assert values["assets_to_liabilities"] == 2.0

    def test_price_is_capped_before_the_log(self):
        high = compute_predictors(full_raw(prccq=20.0))
        low = compute_predictors(full_raw(prccq=10.0))
        assert high["log_price"] == math.log(15.0)
        assert low["log_price"] == math.log(10.0)

    def test_excess_return(self):
        values = compute_predictors(full_raw(ret=0.05, vwretd=0.02))
        assert abs(values["excess_return"] - 0.03) < 1e-15

    def test_debt_mix_halves_long_term(self):
        values = compute_predictors(full_raw(dlcq=1.0, dlttq=2.0, atq=20.0))
        assert values["debts_to_assets"] == (1.0 + 0.5 * 2.0) / 20.0

    def test_zero_denominator_flags_missing(self):
        values = compute_predictors(full_raw(lctq=0.0))
        assert values["assets_to_liabilities"] is None

    def test_negative_denominator_still_computes(self):
        values = compute_predictors(full_raw(ltq=30.0))
        # book equity atq - ltq goes negative but the ratio is defined
        assert values["market_to_book"] == 50.0 / (20.0 - 30.0)

    def test_nonpositive_log_argument_flags_missing(self):
        values = compute_predictors(full_raw(atq=-5.0))
        assert values["log_assets"] is None

    def test_log_sales_uses_absolute_value(self):
        values = compute_predictors(full_raw(saleq=-10.0))
        assert values["log_sales"] == math.log(10.0)

    def test_missing_input_propagates(self):
        values = compute_predictors(full_raw(saleq=None))
        assert values["ap_to_sales"] is None
        assert values["log_sales"] is None

    def test_relative_size_needs_the_universe_total(self):
        rq = full_raw(cshoq=5.0, prccq=10.0)
        with_te = compute_predictors(rq, total_equity=25.0)
        without = compute_predictors(rq)
        assert with_te["rsize"] == math.log(50.0) / 25.0
        assert without["rsize"] is None

    def test_volatility_needs_21_observations(self):
        short = full_raw(daily_returns=tuple(0.01 * i for i in range(20)))
        exact = full_raw(daily_returns=tuple(0.01 * i for i in range(21)))
        assert compute_predictors(short)["volatility"] is None
        got = compute_predictors(exact)["volatility"]
        want = float(np.std([0.01 * i for i in range(21)], ddof=1))
        assert abs(got - want) < 1e-15

    def test_volatility_skips_missing_days(self):
        vals = (0.01, None, 0.02) * 10 + (0.03,)
        rq = full_raw(daily_returns=vals)
        got = compute_predictors(rq)["volatility"]
        want = float(np.std([v for v in vals if v is not None], ddof=1))
        assert abs(got - want) < 1e-15

    def test_total_equity_by_quarter_sums_and_skips(self):
        rows = [
            full_raw("A", (2010, 1), seqq=10.0),
            full_raw("B", (2010, 1), seqq=5.0),
            full_raw("C", (2010, 1), seqq=None),
            full_raw("A", (2010, 2), seqq=7.0),
        ]
        totals = panel.total_equity_by_quarter(rows)
        assert totals == {(2010, 1): 15.0, (2010, 2): 7.0}


class TestBuildPanel:
    def mda(self, *keys):
        return {(f, q): "%s_%s" % (f, format_quarter(q)) for f, q in keys}

    def test_document_attaches_for_four_quarters(self):
        raws = [full_raw("A", add_quarters((2010, 1), k)) for k in range(6)]
        rows, report = build_panel(raws, self.mda(("A", (2010, 1))), [])
        kept = [r.quarter for r in rows]
        assert kept == [(2010, 1), (2010, 2), (2010, 3), (2010, 4)]
        assert report["drops"]["no_mda"] == 2
        assert all(r.mda_ref == "A_2010Q1" for r in rows)

    def test_latest_attachable_document_wins(self):
        raws = [full_raw("A", (2010, 3))]
        index = self.mda(("A", (2010, 1)), ("A", (2010, 3)))
        rows, _ = build_panel(raws, index, [])
        assert rows[0].mda_ref == "A_2010Q3"

    def test_future_document_never_attaches(self):
        # no peeking: a later filing's text is invisible to earlier rows
        raws = [full_raw("A", (2010, 1))]
        rows, report = build_panel(raws, self.mda(("A", (2010, 2))), [])
        assert rows == []
        assert report["drops"]["no_mda"] == 1

    def test_rows_at_or_after_filing_are_dropped(self):
        raws = [full_raw("A", (2010, q)) for q in (1, 2, 3)]
        index = self.mda(*((("A", (2010, q))) for q in (1, 2, 3)))
        rows, report = build_panel(raws, index, [("A", (2010, 2))])
        assert [r.quarter for r in rows] == [(2010, 1)]
        assert report["drops"]["post_filing"] == 2

    def test_earliest_filing_governs(self):
        raws = [full_raw("A", (2010, 2))]
        index = self.mda(("A", (2010, 2)))
        rows, _ = build_panel(raws, index, [("A", (2011, 1)), ("A", (2010, 2))])
        assert rows == []

    def test_label_horizon_boundaries(self):
        # filing exactly 4 quarters out is inside the 1-year window
        raws = [full_raw("A", (2010, 1)), full_raw("B", (2010, 1))]
        index = self.mda(("A", (2010, 1)), ("B", (2010, 1)))
        rows, _ = build_panel(raws, index, [("A", (2011, 1)), ("B", (2011, 2))])
        by_firm = {r.firm_id: r for r in rows}
        assert by_firm["A"].labels == {1: 1, 2: 1, 3: 1}
        assert by_firm["B"].labels == {1: 0, 2: 1, 3: 1}

    def test_three_year_boundary(self):
        raws = [full_raw("A", (2010, 1)), full_raw("B", (2010, 1))]
        index = self.mda(("A", (2010, 1)), ("B", (2010, 1)))
        rows, _ = build_panel(
            raws, index, [("A", (2013, 1)), ("B", (2013, 2))]
        )
        by_firm = {r.firm_id: r for r in rows}
        assert by_firm["A"].labels == {1: 0, 2: 0, 3: 1}
        assert by_firm["B"].labels == {1: 0, 2: 0, 3: 0}

    def test_missing_predictor_drops_row(self):
        raws = [full_raw("A", (2010, 1)), full_raw("B", (2010, 1), saleq=None)]
        index = self.mda(("A", (2010, 1)), ("B", (2010, 1)))
        rows, report = build_panel(raws, index, [])
        assert [r.firm_id for r in rows] == ["A"]
        assert report["drops"]["missing_predictor"] == 1

    def test_drop_reasons_are_checked_in_order(self):
        # post-filing wins over no-MDA, no-MDA wins over missing predictors
        raws = [
            full_raw("A", (2010, 2), saleq=None),
            full_raw("B", (2010, 1), saleq=None),
        ]
        rows, report = build_panel(raws, {}, [("A", (2010, 1))])
        assert rows == []
        assert report["drops"] == {
            "post_filing": 1,
            "no_mda": 1,
            "missing_predictor": 0,
        }

    def test_duplicate_firm_quarter_rejected(self):
        raws = [full_raw("A", (2010, 1)), full_raw("A", (2010, 1))]
        with pytest.raises(ValidationError):
            build_panel(raws, {}, [])

    def test_rows_sorted_by_firm_then_quarter(self):
        raws = [
            full_raw("B", (2010, 2)),
            full_raw("A", (2010, 2)),
            full_raw("A", (2010, 1)),
        ]
        index = self.mda(
            ("A", (2010, 1)), ("A", (2010, 2)), ("B", (2010, 2))
        )
        rows, _ = build_panel(raws, index, [])
        assert [(r.firm_id, r.quarter) for r in rows] == [
            ("A", (2010, 1)),
            ("A", (2010, 2)),
            ("B", (2010, 2)),
        ]

    def test_report_counts_matched_filings(self):
        raws = [full_raw("A", (2010, 1)), full_raw("B", (2010, 1))]
        index = self.mda(("A", (2010, 1)), ("B", (2010, 1)))
        filings = [("A", (2010, 3)), ("Z", (2012, 1))]
        rows, report = build_panel(raws, index, filings)
        assert report["input_rows"] == 2
        assert report["emitted_rows"] == 2
        assert report["bankruptcies_total"] == 2
        # Z never produced a labeled row, so only A counts as matched
        assert report["bankruptcies_matched"] == 1

    def test_matrix_and_label_extraction(self):
        raws = [full_raw("A", (2010, 1))]
        index = self.mda(("A", (2010, 1)))
        rows, _ = build_panel(raws, index, [("A", (2010, 4))])
        x = panel.rows_to_matrix(rows)
        assert x.shape == (1, 33)
        assert x[0, 0] == 2.0
        y = panel.rows_to_labels(rows, 1)
        assert y.shape == (1, 1) and y[0, 0] == 1.0
        with pytest.raises(ValidationError):
            panel.rows_to_labels(rows, 4)

    def test_empty_matrix_keeps_width(self):
        assert panel.rows_to_matrix([]).shape == (0, 33)


class TestScaler:
    def test_maps_training_range_onto_unit_interval(self):
        x = np.array([[0.0, 10.0], [2.0, 30.0]])
        state = panel.fit_scaler(x)
        got = panel.apply_scaler(np.array([[1.0, 20.0]]), state)
        np.testing.assert_allclose(got, [[0.5, 0.5]])
        np.testing.assert_array_equal(panel.apply_scaler(x, state), [[0, 0], [1, 1]])

    def test_out_of_range_values_clamp(self):
        state = panel.fit_scaler(np.array([[0.0], [2.0]]))
        got = panel.apply_scaler(np.array([[-5.0], [9.0]]), state)
        np.testing.assert_array_equal(got, [[0.0], [1.0]])

    def test_constant_feature_maps_to_zero(self):
        state = panel.fit_scaler(np.array([[3.0], [3.0]]))
        got = panel.apply_scaler(np.array([[3.0], [7.0]]), state)
        np.testing.assert_array_equal(got, [[0.0], [0.0]])

    def test_requires_fitted_state(self):
        with pytest.raises(UsageError):
            panel.apply_scaler(np.zeros((1, 2)), "not a scaler")

    def test_feature_count_checked(self):
        state = panel.fit_scaler(np.zeros((2, 3)))
        with pytest.raises(ValidationError):
            panel.apply_scaler(np.zeros((1, 2)), state)

    def test_rejects_bad_fit_input(self):
        with pytest.raises(ValidationError):
            panel.fit_scaler(np.zeros((0, 3)))
        with pytest.raises(ValidationError):
            panel.fit_scaler(np.array([[np.nan, 1.0]]))


class TestDownsample:
    def test_balances_and_keeps_minority_whole(self):
        y = np.array([1.0] * 10 + [0.0] * 100)
        idx = panel.downsample(y, seed=0)
        assert len(idx) == 20
        assert np.all(np.diff(idx) > 0)
        chosen = y[idx]
        assert chosen.sum() == 10
        assert set(np.flatnonzero(y == 1)) <= set(idx)

    def test_same_seed_same_subset(self):
        y = np.array([1.0] * 5 + [0.0] * 50)
        a = panel.downsample(y, seed=7)
        b = panel.downsample(y, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_balanced_input_passes_through(self):
        y = np.array([1.0, 0.0, 1.0, 0.0])
        np.testing.assert_array_equal(panel.downsample(y, seed=0), [0, 1, 2, 3])

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError):
            panel.downsample(np.ones(10), seed=0)


class TestSplit:
    def rows(self, quarters):
        return [
            panel.PanelRow("F", q, np.zeros(33), "d", {1: 0, 2: 0, 3: 0})
            for q in quarters
        ]

    def test_boundaries_are_inclusive(self):
        rows = self.rows([(2010, 1), (2010, 4), (2011, 1), (2011, 3)])
        train, test = panel.split_by_period(rows, (2010, 4), (2011, 1))
        assert [r.quarter for r in train] == [(2010, 1), (2010, 4)]
        assert [r.quarter for r in test] == [(2011, 1), (2011, 3)]

    def test_gap_quarters_fall_in_neither_side(self):
        rows = self.rows([(2010, 4), (2011, 1), (2011, 2)])
        train, test = panel.split_by_period(rows, (2010, 4), (2011, 2))
        assert [r.quarter for r in train] == [(2010, 4)]
        assert [r.quarter for r in test] == [(2011, 2)]

    def test_overlapping_periods_rejected(self):
        with pytest.raises(ValidationError):
            panel.split_by_period([], (2011, 1), (2011, 1))

    def test_empty_sides_warn(self):
        rows = self.rows([(2012, 1)])
        with pytest.warns(UserWarning):
            panel.split_by_period(rows, (2010, 4), (2011, 1))


class TestSynth:
    def test_same_seed_bit_identical(self):
        a = synth_generate(n_firms=50, xo_dim=6, xm_dim=40, seed=4)
        b = synth_generate(n_firms=50, xo_dim=6, xm_dim=40, seed=4)
        np.testing.assert_array_equal(a.xo, b.xo)
        np.testing.assert_array_equal(a.xm, b.xm)
        np.testing.assert_array_equal(a.y, b.y)

    def test_different_seed_differs(self):
        a = synth_generate(n_firms=50, xo_dim=6, xm_dim=40, seed=4)
        b = synth_generate(n_firms=50, xo_dim=6, xm_dim=40, seed=5)
        assert np.abs(a.xo - b.xo).max() > 0.0

    def test_tabular_block_lies_in_unit_interval(self):
        data = synth_generate(n_firms=200, seed=0)
        assert np.all(data.xo > 0.0) and np.all(data.xo < 1.0)

    def test_text_rows_have_unit_or_zero_norm(self):
        data = synth_generate(n_firms=300, seed=1)
        norms = np.linalg.norm(data.xm, axis=1)
        ok = (np.abs(norms - 1.0) < 1e-12) | (norms == 0.0)
        assert np.all(ok)

    def test_text_rows_are_sparse(self):
        data = synth_generate(n_firms=200, xm_dim=200, seed=2)
        nonzeros = (data.xm != 0.0).sum(axis=1)
        assert nonzeros.max() <= 4

    def test_prevalence_tracks_the_recorded_scores(self):
        data = synth_generate(n_firms=2000, seed=0)
        p = data.bayes
        se = math.sqrt(float((p * (1 - p)).mean()) / len(p))
        assert abs(float(data.y.mean()) - float(p.mean())) < 3 * se

    def test_recorded_scores_match_the_latent_read_out(self):
        data = synth_generate(n_firms=100, seed=3)
        want = 1.0 / (1.0 + np.exp(-(data.z_star @ data.coeff_w + data.bias)))
        np.testing.assert_allclose(data.bayes, want, atol=1e-12)

    def test_label_noise_flattens_the_scores(self):
        data = synth_generate(n_firms=100, seed=3, label_noise=1.0)
        np.testing.assert_array_equal(data.bayes, 0.5)

    def test_missing_share_applies_to_the_text_mask(self):
        full = synth_generate(n_firms=500, seed=6)
        half = synth_generate(n_firms=500, seed=6, xm_missing=0.5)
        assert full.has_xm.all()
        frac = float(half.has_xm.mean())
        assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / 500)

    def test_row_identifiers(self):
        data = synth_generate(n_firms=3, quarters_per_firm=2, seed=0)
        assert data.ids[0] == "F0001_2010Q1"
        assert data.ids[1] == "F0001_2010Q2"
        assert data.firm_ids[2] == data.firm_ids[3] == "F0002"
        assert set(data.sic_division) <= set(range(1, 11))

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            synth_generate(n_firms=0)
        with pytest.raises(ValidationError):
            synth_generate(n_firms=10, label_noise=2.0)

    def test_save_load_round_trip(self, tmp_path):
        data = synth_generate(n_firms=40, xo_dim=5, xm_dim=30, xm_missing=0.4, seed=9)
        panel.save_synth(data, str(tmp_path))
        back = panel.load_synth(str(tmp_path))
        np.testing.assert_array_equal(back.xo, data.xo)
        np.testing.assert_array_equal(back.y, data.y)
        np.testing.assert_array_equal(back.bayes, data.bayes)
        np.testing.assert_array_equal(back.has_xm, data.has_xm)
        # text vectors only persist for rows that have the modality
        np.testing.assert_array_equal(back.xm[data.has_xm], data.xm[data.has_xm])
        assert not back.xm[~data.has_xm].any()
        assert back.ids == data.ids
        assert back.quarters == data.quarters
        assert back.sic_division == data.sic_division
        assert back.config == data.config


class TestCsvFiles:
    def write(self, path, text):
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_fundamentals_missing_column_names_line_one(self, tmp_path):
        p = self.write(tmp_path / "f.csv", "firm_id,year,quarter\nA,2010,1\n")
        with pytest.raises(DataError, match="line 1"):
            panel.read_fundamentals_csv(p)

    def test_fundamentals_bad_cell_names_its_line(self, tmp_path):
        cols = ",".join(("firm_id", "year", "quarter") + panel.FUNDAMENTAL_COLUMNS)
        good = "A,2010,1," + ",".join(["1.0"] * 20)
        bad = "B,2010,1," + ",".join(["oops"] + ["1.0"] * 19)
        p = self.write(tmp_path / "f.csv", "%s\n%s\n%s\n" % (cols, good, bad))
        with pytest.raises(DataError, match="line 3"):
            panel.read_fundamentals_csv(p)

    def test_fundamentals_blank_cells_become_missing(self, tmp_path):
        cols = ",".join(("firm_id", "year", "quarter") + panel.FUNDAMENTAL_COLUMNS)
        row = "A,2010,1," + ",".join([""] + ["2.5"] * 19)
        p = self.write(tmp_path / "f.csv", "%s\n%s\n" % (cols, row))
        out = panel.read_fundamentals_csv(p)
        values = out[("A", (2010, 1))]
        assert values["actq"] is None
        assert values["lctq"] == 2.5

    def test_fundamentals_duplicate_rejected(self, tmp_path):
        cols = ",".join(("firm_id", "year", "quarter") + panel.FUNDAMENTAL_COLUMNS)
        row = "A,2010,1," + ",".join(["1.0"] * 20)
        p = self.write(tmp_path / "f.csv", "%s\n%s\n%s\n" % (cols, row, row))
        with pytest.raises(DataError, match="duplicate"):
            panel.read_fundamentals_csv(p)

    def test_market_blanks_allowed_in_daily_returns(self, tmp_path):
        cols = ",".join(("firm_id", "year", "quarter", "ret", "vwretd")
                        + panel.MARKET_RETURN_COLUMNS)
        row = "A,2010,1,0.05,0.02," + ",".join(["0.01", ""] + ["0.02"] * 61)
        p = self.write(tmp_path / "m.csv", "%s\n%s\n" % (cols, row))
        out = panel.read_market_csv(p)
        rec = out[("A", (2010, 1))]
        assert rec["ret"] == 0.05
        assert rec["daily_returns"][0] == 0.01
        assert rec["daily_returns"][1] is None
        assert len(rec["daily_returns"]) == 63

    def test_bankruptcies_filter_by_chapter(self, tmp_path):
        text = (
            "firm_id,filing_year,filing_quarter,chapter\n"
            "A,2010,1,7\nB,2010,2,11\nC,2010,3,13\n"
        )
        p = self.write(tmp_path / "b.csv", text)
        filings, skipped = panel.read_bankruptcies_csv(p)
        assert filings == [("A", (2010, 1)), ("B", (2010, 2))]
        assert skipped == 1

    def test_bankruptcies_bad_quarter_named(self, tmp_path):
        text = "firm_id,filing_year,filing_quarter,chapter\nA,2010,9,7\n"
        p = self.write(tmp_path / "b.csv", text)
        with pytest.raises(DataError, match="line 2"):
            panel.read_bankruptcies_csv(p)

    def test_assemble_raw_joins_market_when_present(self):
        fundamentals = {
            ("A", (2010, 1)): {c: 1.0 for c in panel.FUNDAMENTAL_COLUMNS},
            ("B", (2010, 1)): {c: 1.0 for c in panel.FUNDAMENTAL_COLUMNS},
        }
        market = {
            ("A", (2010, 1)): {
                "ret": 0.05, "vwretd": 0.02, "daily_returns": (0.01,) * 63,
            }
        }
        rows = panel.assemble_raw(fundamentals, market)
        by_firm = {r.firm_id: r for r in rows}
        assert by_firm["A"].ret == 0.05
        assert len(by_firm["A"].daily_returns) == 63
        assert by_firm["B"].ret is None
        assert by_firm["B"].daily_returns == ()

    def test_panel_round_trip_is_exact(self, tmp_path):
        raws = [full_raw("A", (2010, 1)), full_raw("B", (2010, 1), actq=7.3)]
        index = {("A", (2010, 1)): "dA", ("B", (2010, 1)): "dB"}
        rows, _ = build_panel(raws, index, [("A", (2010, 3))])
        p = tmp_path / "panel.csv"
        panel.write_panel_csv(rows, str(p))
        back = panel.read_panel_csv(str(p))
        assert len(back) == 2
        for got, want in zip(back, rows):
            assert got.firm_id == want.firm_id
            assert got.quarter == want.quarter
            assert got.mda_ref == want.mda_ref
            assert got.labels == want.labels
            np.testing.assert_array_equal(got.predictors, want.predictors)

    def test_panel_reader_rejects_bad_labels(self, tmp_path):
        raws = [full_raw("A", (2010, 1))]
        rows, _ = build_panel(raws, {("A", (2010, 1)): "dA"}, [])
        p = tmp_path / "panel.csv"
        panel.write_panel_csv(rows, str(p))
        text = p.read_text(encoding="utf-8").replace("dA,0,0,0", "dA,2,0,0")
        p.write_text(text, encoding="utf-8")
        with pytest.raises(DataError, match="label_1y"):
            panel.read_panel_csv(str(p))

    def test_panel_reader_rejects_blank_predictors(self, tmp_path):
        raws = [full_raw("A", (2010, 1))]
        rows, _ = build_panel(raws, {("A", (2010, 1)): "dA"}, [])
        p = tmp_path / "panel.csv"
        panel.write_panel_csv(rows, str(p))
        text = p.read_text(encoding="utf-8").replace("2.0", "")
        p.write_text(text, encoding="utf-8")
        with pytest.raises(DataError, match="line 2"):
            panel.read_panel_csv(str(p))
