import random

import pytest

from circmat.circularity import (
    EmptyGrid,
    EmptySchedule,
    UnknownVariable,
    alpha,
    compute_report,
    lambda_approx,
    lambda_closed_form,
    lambda_numeric,
    lambda_trapezoid,
    round_half_away,
    sensitivity_sweep,
    sweep_csv,
)
from circmat.flows import (
    DisassemblyOutcome,
    PiecewiseConstant,
    ScenarioParams,
    batch_mass_schedule,
    functional_batch_schedule,
    zero_rate,
)

TABLE = dict(t_2in4=2_592_000.0, T_t=3_600.0, T_r=2_592_000.0, T_i=86_400.0)


def params(**overrides):
    return ScenarioParams(**{**TABLE, **overrides})


def segment_area_oracle(p: ScenarioParams, m0: float, s: float, t_d: float, mu: float = 2.0):
    """Hand-evaluated rectangle areas of the three-stage trajectory."""
    m_u = m0 * (1.0 - s / 100.0)
    t1 = p.t_2in4 + t_d + p.T_t
    t2 = p.t_2in4 + t_d + p.T_r
    t_f = p.t_2in4 + t_d + p.T_r + p.T_i
    area = m0 * t1 + (m0 + m_u) * (t2 - t1) + 2.0 * m0 * (t_f - t2)
    return -mu * area / t_f, t_f


class TestRounding:
    def test_half_away_from_zero(self):
        assert round_half_away(-2.25, 1) == -2.3
        assert round_half_away(-2.24, 1) == -2.2
        assert round_half_away(2.25, 1) == 2.3
        assert round_half_away(-2.1344262, 1) == -2.1
        assert round_half_away(0.0, 1) == 0.0


class TestLambdaNumeric:
    def test_constant_unit_schedule(self):
        schedule = PiecewiseConstant(breakpoints=((0.0, 1.0),), end_time=10.0)
        assert lambda_numeric(schedule, mu=2.0) == pytest.approx(-2.0, abs=1e-15)

    def test_reference_run_matches_hand_areas(self):
        p = params()
        schedule = batch_mass_schedule(p, 1.05, DisassemblyOutcome(s=100.0, T_d=0.4))
        expected, _ = segment_area_oracle(p, 1.05, 100.0, 0.4)
        value = lambda_numeric(schedule, mu=2.0)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(-2.1344, abs=5e-5)

    def test_zero_schedule_is_perfectly_circular(self):
        schedule = PiecewiseConstant(breakpoints=((0.0, 0.0),), end_time=10.0)
        assert lambda_numeric(schedule, mu=2.0) == 0.0

    def test_missing_schedule_rejected(self):
        with pytest.raises(EmptySchedule):
            lambda_numeric(None, mu=2.0)

    def test_trapezoid_cross_check(self):
        p = params()
        for s, t_d in ((100.0, 0.4), (80.0, 0.8), (0.0, 86_400.0)):
            schedule = batch_mass_schedule(p, 1.05, DisassemblyOutcome(s=s, T_d=t_d))
            exact = lambda_numeric(schedule, mu=2.0)
            quad = lambda_trapezoid(schedule, mu=2.0, samples=1_000_000)
            assert quad == pytest.approx(exact, rel=1e-5)

    def test_continuous_rate_term(self):
        schedule = PiecewiseConstant(breakpoints=((0.0, 1.0),), end_time=10.0)
        rate = PiecewiseConstant(breakpoints=((0.0, 0.5),), end_time=10.0)
        # -(2*1*10 + 3*0.5*10) / 10
        assert lambda_numeric(schedule, rate, mu=2.0, delta=3.0) == pytest.approx(-3.5)
        assert lambda_numeric(schedule, zero_rate(10.0), mu=2.0, delta=3.0) == pytest.approx(-2.0)

    def test_narrow_scope_functionality_weighting(self):
        p = params()
        outcome = DisassemblyOutcome(s=0.0, T_d=86_400.0)
        schedule = batch_mass_schedule(p, 1.05, outcome)
        functional = functional_batch_schedule(p, 1.05, outcome)
        wide = lambda_numeric(schedule, mu=2.0)
        narrow = lambda_numeric(schedule, mu=2.0, functional_schedule=functional)
        # Weighting only the functional batch penalizes less.
        assert narrow > wide
        # mu=1 collapses both modes to the unweighted integral.
        assert lambda_numeric(schedule, mu=1.0, functional_schedule=functional) == pytest.approx(
            lambda_numeric(schedule, mu=1.0), rel=1e-12
        )


class TestLambdaClosedForm:
    @pytest.mark.parametrize(
        "m0,s,t_d,expected",
        [
            (1.05, 100.0, 0.4, -2.1),
            (1.05, 80.0, 0.8, -2.3),
            (1.05, 0.0, 86_400.0, -3.1),
            (2.1, 0.0, 86_400.0, -6.3),
            (2.4, 0.0, 86_400.0, -7.2),
        ],
    )
    def test_reference_values_at_display_precision(self, m0, s, t_d, expected):
        lam, _ = lambda_closed_form(params(), m0, DisassemblyOutcome(s=s, T_d=t_d))
        assert round_half_away(lam, 1) == expected

    def test_final_time(self):
        _, t_f = lambda_closed_form(params(), 1.05, DisassemblyOutcome(s=0.0, T_d=86_400.0))
        assert t_f == 5_356_800.0

    def test_matches_numeric_on_randomized_scenarios(self):
        rng = random.Random(23)
        for _ in range(300):
            p = params(
                t_2in4=TABLE["t_2in4"] * rng.uniform(0.5, 1.5),
                T_t=TABLE["T_t"] * rng.uniform(0.5, 1.5),
                T_r=TABLE["T_r"] * rng.uniform(0.5, 1.5),
                T_i=TABLE["T_i"] * rng.uniform(0.5, 1.5),
            )
            m0 = 1.05 * rng.uniform(0.5, 1.5)
            outcome = DisassemblyOutcome(s=rng.uniform(0.0, 100.0), T_d=rng.uniform(0.2, 1e5))
            closed, _ = lambda_closed_form(p, m0, outcome)
            numeric = lambda_numeric(batch_mass_schedule(p, m0, outcome), mu=2.0)
            assert abs(numeric - closed) <= 1e-9 * abs(closed)

    def test_strictly_increasing_in_success(self):
        p = params()
        values = [
            lambda_closed_form(p, 1.05, DisassemblyOutcome(s=s, T_d=0.4))[0]
            for s in range(0, 101, 5)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_homogeneous_in_mass(self):
        p = params()
        outcome = DisassemblyOutcome(s=42.0, T_d=321.0)
        base, _ = lambda_closed_form(p, 1.05, outcome)
        scaled, _ = lambda_closed_form(p, 3.5 * 1.05, outcome)
        assert scaled == pytest.approx(3.5 * base, rel=1e-12)

    def test_non_positive_and_zero_only_at_zero_mass(self):
        p = params()
        assert lambda_closed_form(p, 0.0, DisassemblyOutcome(s=50.0, T_d=1.0))[0] == 0.0
        rng = random.Random(3)
        for _ in range(100):
            lam, _ = lambda_closed_form(
                p,
                rng.uniform(1e-6, 10.0),
                DisassemblyOutcome(s=rng.uniform(0, 100), T_d=rng.uniform(0.1, 1e5)),
            )
            assert lam < 0.0


class TestApproximation:
    def test_total_failure_value(self):
        assert lambda_approx(params(), 1.05, 0.0) == pytest.approx(-3.15, abs=1e-12)

    def test_perfect_disassembly_value(self):
        # Independent of time when fully successful.
        assert lambda_approx(params(), 1.05, 100.0) == pytest.approx(-2.1, abs=1e-12)

    def test_zero_mass(self):
        assert lambda_approx(params(), 0.0, 37.0) == 0.0

    def test_factorizes_through_alpha(self):
        p = params()
        for s in (0.0, 25.0, 50.0, 75.0, 100.0):
            assert lambda_approx(p, 1.05, s) == pytest.approx(-2.0 * 1.05 * alpha(p, s), rel=1e-12)

    def test_within_two_percent_of_exact(self):
        p = params()
        for s in range(0, 101, 10):
            for t_d in (0.4, 3600.0, 43_200.0, 86_400.0):
                exact, _ = lambda_closed_form(p, 1.05, DisassemblyOutcome(s=float(s), T_d=t_d))
                approx = lambda_approx(p, 1.05, float(s))
                assert abs(approx - exact) / abs(exact) < 0.02


class TestAlpha:
    def test_reference_endpoints(self):
        assert alpha(params(), 0.0) == pytest.approx(1.5, abs=1e-12)
        assert alpha(params(), 100.0) == pytest.approx(1.0, abs=1e-12)

    def test_limit_toward_two(self):
        p = params(T_r=1e9 * TABLE["t_2in4"])
        assert alpha(p, 0.0) == pytest.approx(2.0, abs=1e-6)

    def test_bounds_and_monotonicity(self):
        p = params()
        values = [alpha(p, s / 2.0) for s in range(0, 201)]
        assert all(1.0 <= a < 2.0 for a in values)
        assert all(b < a for a, b in zip(values, values[1:]))


class TestReportAndSweep:
    def test_report_consistency(self):
        report = compute_report(params(), 1.05, DisassemblyOutcome(s=100.0, T_d=0.4))
        assert report.lambda_numeric == pytest.approx(report.lambda_closed_form, rel=1e-12)
        assert report.lambda_rounded == -2.1
        assert report.mu == 2
        total = sum(report.segment_contributions)
        assert -total / report.t_f == pytest.approx(report.lambda_numeric, rel=1e-12)
        assert "lambda_closed_form" in report.to_text()
        assert report.to_csv().count("\n") == 2

    def test_sweep_grid_rows(self):
        rows = sensitivity_sweep(
            params(), 1.05, DisassemblyOutcome(s=100.0, T_d=0.4), {"s": [0.0, 50.0, 100.0]}
        )
        assert [r.value for r in rows] == [0.0, 50.0, 100.0]
        lams = [r.lambda_exact for r in rows]
        assert lams[0] < lams[1] < lams[2]

    def test_sweep_disassembly_time_is_negligible(self):
        rows = sensitivity_sweep(
            params(), 1.05, DisassemblyOutcome(s=100.0, T_d=0.4), {"T_d": [0.4, 3600.0]}
        )
        assert abs(rows[0].lambda_exact - rows[1].lambda_exact) < 0.01

    def test_sweep_mass_doubles_lambda(self):
        rows = sensitivity_sweep(
            params(), 1.05, DisassemblyOutcome(s=0.0, T_d=86_400.0), {"m0": [1.05, 2.1]}
        )
        assert rows[1].lambda_exact == pytest.approx(2.0 * rows[0].lambda_exact, rel=1e-12)

    def test_sweep_errors(self):
        with pytest.raises(UnknownVariable):
            sensitivity_sweep(params(), 1.0, DisassemblyOutcome(s=1.0, T_d=1.0), {"bogus": [1.0]})
        with pytest.raises(EmptyGrid):
            sensitivity_sweep(params(), 1.0, DisassemblyOutcome(s=1.0, T_d=1.0), {"s": []})

    def test_sweep_csv_header(self):
        rows = sensitivity_sweep(
            params(), 1.05, DisassemblyOutcome(s=50.0, T_d=1.0), {"s": [0.0, 100.0]}
        )
        assert sweep_csv(rows).splitlines()[0] == "var,value,lambda_exact,lambda_approx,alpha"
