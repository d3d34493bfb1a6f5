import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capplan.errors import CellLookupError, DomainError
from capplan.growth import GrowthModel, doubling_period
from capplan.scaling import vendor_table
from capplan.scenario import (
    NEVER,
    UpgradeScenario,
    clock_delta_from_table,
    deflate_curve,
    run_scenario,
    saturation_week,
)

CASE_STUDY = GrowthModel(80.62, 0.0309)
T2 = vendor_table([[115755, 152432], [133629, 175969]], ["52-way", "64-way"], ["333/4", "400/8"])
T3 = vendor_table([[57605, 75859], [60875, 80165]], ["52-way", "64-way"], ["333/4", "400/8"])


class TestDeflate:
    def test_case_study_week_20(self):
        assert deflate_curve(CASE_STUDY, 0.317, 20) == pytest.approx(102.15, abs=0.05)

    def test_null_upgrade(self):
        assert deflate_curve(CASE_STUDY, 0.0, 13) == 80.62 * math.exp(0.0309 * 13)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-10, 100))
    def test_multiplier(self, w):
        assert deflate_curve(CASE_STUDY, 0.317, w) == pytest.approx(deflate_curve(CASE_STUDY, 0, w) * 0.683, rel=1e-12)

    @pytest.mark.parametrize("d", [1.0, 1.5, -0.1])
    def test_domain(self, d):
        with pytest.raises(DomainError):
            deflate_curve(CASE_STUDY, d, 1)


class TestSaturationWeek:
    def test_baseline_crossing(self):
        w = saturation_week(CASE_STUDY, 0.0, 100)
        assert w == pytest.approx(math.log(100 / 80.62) / 0.0309, rel=1e-15)
        assert w == pytest.approx(6.97, abs=0.01)

    def test_upgraded_crossing(self):
        w = saturation_week(CASE_STUDY, 0.317, 100)
        # ln(100 / (80.62 * 0.683)) / 0.0309; the week-20 value 102.15 lies just above 100
        assert w == pytest.approx(19.31, abs=0.01)
        assert w < 20

    def test_at_threshold(self):
        assert saturation_week(CASE_STUDY, 0.0, 80.62) == 0.0

    def test_already_past_is_negative(self):
        assert saturation_week(CASE_STUDY, 0.0, 50) < 0

    @pytest.mark.parametrize("b", [0.0, -0.02])
    def test_never(self, b):
        assert saturation_week(GrowthModel(50, b), 0.0, 100) == NEVER

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1, 300), st.floats(0.001, 0.5), st.floats(0, 0.95), st.floats(1, 1000))
    def test_inverse_of_deflate(self, u0, b, d, t):
        g = GrowthModel(u0, b)
        assert deflate_curve(g, d, saturation_week(g, d, t)) == pytest.approx(t, rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 0.9), st.floats(0.001, 0.09), st.floats(50, 300), st.floats(1, 100))
    def test_monotone_in_delta_and_threshold(self, d, dd, t, dt):
        assert saturation_week(CASE_STUDY, d + dd, t) > saturation_week(CASE_STUDY, d, t)
        assert saturation_week(CASE_STUDY, d, t + dt) > saturation_week(CASE_STUDY, d, t)


class TestRunScenario:
    def test_case_study_scenarios_ordered(self):
        deltas = [0.0, 0.317, 0.39, 0.52]
        reports = [run_scenario(UpgradeScenario(f"s{i}", CASE_STUDY, d), 26) for i, d in enumerate(deltas)]
        for t in (100.0, 200.0):
            weeks = [r.crossings[t] for r in reports]
            assert all(a < b for a, b in zip(weeks, weeks[1:]))
        doubling = {r.doubling_weeks for r in reports}
        assert doubling == {doubling_period(CASE_STUDY).weeks}

    def test_columns(self):
        r = run_scenario(UpgradeScenario("clock", CASE_STUDY, 0.317), 26)
        assert r.weeks == list(range(27))
        assert np.allclose(r.deflated, np.array(r.baseline) * 0.683, rtol=1e-15)
        assert all(r.extrapolated[1:])
        assert r.to_rows()[0] == ["week", "baseline_pct", "deflated_pct", "extrapolated"]

    def test_horizon_zero(self):
        with pytest.raises(DomainError):
            run_scenario(UpgradeScenario("x", CASE_STUDY), 0)

    def test_report_dict(self):
        r = run_scenario(UpgradeScenario("x", CASE_STUDY, 0.0, (50, 100)), 4, date(1999, 9, 29))
        d = r.to_dict()
        first, second = d["crossings"]
        assert first["already_past"] and not second["already_past"]
        assert second["date"] == "1999-11-16"
        flat = run_scenario(UpgradeScenario("f", GrowthModel(50, 0.0)), 4).to_dict()
        assert flat["crossings"][0]["never"] and flat["doubling_weeks"] is None

    def test_scenario_validation(self):
        with pytest.raises(DomainError):
            UpgradeScenario("x", CASE_STUDY, 1.0)
        with pytest.raises(DomainError):
            UpgradeScenario("x", CASE_STUDY, 0.1, (0,))


class TestClockDelta:
    def test_vendor_clock(self):
        d = clock_delta_from_table(T2, ("52-way", "333/4"), ("52-way", "400/8"))
        assert d == pytest.approx(0.317, abs=1e-3)

    def test_model_combined(self):
        d = clock_delta_from_table(T3, ("52-way", "333/4"), ("64-way", "400/8"))
        assert d == pytest.approx(0.3916, abs=1e-4)

    def test_identical(self):
        assert clock_delta_from_table(T3, ("52-way", "333/4"), ("52-way", "333/4")) == 0

    def test_missing(self):
        with pytest.raises(CellLookupError):
            clock_delta_from_table(T3, ("52-way", "333/4"), ("8-way", "333/4"))
