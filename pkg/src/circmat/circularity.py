"""Time-window circularity of the supply-disassembly-incineration chain.

The metric is non-positive: 0 means perfectly circular, more negative means
more weighted material counted against the time window. Three routes are
provided:

  * exact integration of the staged mass trajectory (rectangle sums, no
    discretization error),
  * the closed-form expression specialised to the solid-material chain with
    one functional discarded batch,
  * the long-horizon approximation used for sensitivity analysis, where
    transport, incineration and disassembly times are negligible next to
    the first-use and reuse phases.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .flows import (
    DisassemblyOutcome,
    FlowError,
    PiecewiseConstant,
    ScenarioParams,
    SuccessOutOfRange,
    batch_mass_schedule,
    functionality_coefficient,
)


class EmptySchedule(FlowError):
    pass


class EmptyGrid(ValueError):
    pass


class UnknownVariable(ValueError):
    pass


SWEEPABLE = ("s", "T_d", "m0")


def round_half_away(x: float, ndigits: int = 1) -> float:
    """Round with halves away from zero (-2.25 -> -2.3), matching how the
    reported circularity values are displayed."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(x)).copy_abs().quantize(q, rounding=ROUND_HALF_UP)) * (
        -1.0 if x < 0 else 1.0
    )


def lambda_numeric(
    schedule: PiecewiseConstant,
    continuous_rate: PiecewiseConstant | None = None,
    mu: float = 2.0,
    delta: float = 1.0,
    functional_schedule: PiecewiseConstant | None = None,
) -> float:
    """Circularity by exact integration of the staged trajectories.

    lambda = -(1/t_f) * integral of [mu * batch_mass(t) + delta * rate(t)]
    over [0, t_f), evaluated as rectangle sums over the constant segments.

    When ``functional_schedule`` is given, the functionality multiplier is
    applied only to that component instead of the whole batch trajectory
    (integrand becomes batch + (mu - 1) * functional). This narrow-scope
    variant is provided for comparison only; the default wide-scope weighting
    is what the reported values use.
    """
    if schedule is None or not schedule.breakpoints:
        raise EmptySchedule("batch schedule is required")
    t_f = schedule.end_time
    if t_f <= 0.0:
        raise EmptySchedule(f"t_f must be positive, got {t_f}")
    if functional_schedule is None:
        batch_part = mu * schedule.integral()
    else:
        batch_part = schedule.integral() + (mu - 1.0) * functional_schedule.integral()
    continuous_part = delta * continuous_rate.integral() if continuous_rate is not None else 0.0
    return -(batch_part + continuous_part) / t_f


def lambda_trapezoid(
    schedule: PiecewiseConstant,
    continuous_rate: PiecewiseConstant | None = None,
    mu: float = 2.0,
    delta: float = 1.0,
    samples: int = 1_000_000,
) -> float:
    """Independent quadrature cross-check: trapezoid rule on a uniform grid.

    Kept deliberately separate from the exact path; only tests should need
    it. Accuracy is limited by the jumps of the integrand (relative error
    around jump_size * dt / integral).
    """
    def sampled(fn: PiecewiseConstant, t: np.ndarray) -> np.ndarray:
        times = np.array([bt for bt, _ in fn.breakpoints])
        values = np.array([bv for _, bv in fn.breakpoints])
        idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(values) - 1)
        return values[idx]

    t_f = schedule.end_time
    t = np.linspace(0.0, t_f, samples + 1)
    y = mu * sampled(schedule, t)
    if continuous_rate is not None:
        y = y + delta * sampled(continuous_rate, t)
    return float(-np.trapezoid(y, t) / t_f)


def lambda_closed_form(
    params: ScenarioParams, m0_bar: float, outcome: DisassemblyOutcome
) -> tuple[float, float]:
    """Closed-form circularity of the solid chain and its final time.

    Derived for one functional discarded batch (multiplier 2) and zero
    continuous flow:

      lambda = -(2/t_f) * [ m0*(t_2in4 + T_d + T_t)
                            + (m0 + m0*(1 - s/100)) * (T_r - T_t)
                            + 2*m0*T_i ]
      t_f    = t_2in4 + T_d + T_r + T_i
    """
    t_f = params.t_2in4 + outcome.T_d + params.T_r + params.T_i
    bracket = (
        m0_bar * (params.t_2in4 + outcome.T_d + params.T_t)
        + (m0_bar + m0_bar * (1.0 - outcome.s / 100.0)) * (params.T_r - params.T_t)
        + 2.0 * m0_bar * params.T_i
    )
    return -(2.0 / t_f) * bracket, t_f


def lambda_approx(params: ScenarioParams, m0_bar: float, s: float) -> float:
    """Long-horizon approximation: -2*m0 / (t_2in4 + T_r) * [t_2in4 + (2 - s/100)*T_r].

    Valid when disassembly, transport and incineration are much shorter than
    the arrival and reuse phases; independent of T_d by construction.
    """
    if not (0.0 <= s <= 100.0):
        raise SuccessOutOfRange(f"s must be in [0, 100], got {s}")
    horizon = params.t_2in4 + params.T_r
    return -(2.0 * m0_bar / horizon) * (params.t_2in4 + (2.0 - s / 100.0) * params.T_r)


def alpha(params: ScenarioParams, s: float) -> float:
    """Sensitivity factor in [1, 2): (t_2in4 + (2 - s/100)*T_r) / (t_2in4 + T_r).

    Equals 1 at s = 100 and approaches 2 at s = 0 as the reuse phase
    dominates the arrival phase. The approximation above factors as
    -2 * m0_bar * alpha(s).
    """
    if not (0.0 <= s <= 100.0):
        raise SuccessOutOfRange(f"s must be in [0, 100], got {s}")
    return (params.t_2in4 + (2.0 - s / 100.0) * params.T_r) / (params.t_2in4 + params.T_r)


@dataclass(frozen=True)
class CircularityReport:
    """All circularity routes for one scenario plus the inputs that fed them."""

    lambda_numeric: float
    lambda_closed_form: float
    lambda_approx: float
    alpha: float
    t_f: float
    segment_contributions: tuple[float, float, float]
    continuous_contribution: float
    m0_bar: float
    s: float
    T_d: float
    mu: int
    delta: float

    @property
    def lambda_rounded(self) -> float:
        return round_half_away(self.lambda_closed_form, 1)

    def to_text(self) -> str:
        seg = ", ".join(f"{c:.6f}" for c in self.segment_contributions)
        lines = [
            f"m0_bar              {self.m0_bar:.6f} kg",
            f"s                   {self.s:.6f} %",
            f"T_d                 {self.T_d:.6f} s",
            f"mu                  {self.mu}",
            f"delta               {self.delta:.6f} s",
            f"t_f                 {self.t_f:.6f} s",
            f"lambda_closed_form  {self.lambda_closed_form:.10f}  (display {self.lambda_rounded:.1f})",
            f"lambda_numeric      {self.lambda_numeric:.10f}",
            f"lambda_approx       {self.lambda_approx:.10f}",
            f"alpha               {self.alpha:.10f}",
            f"segments_kg_s       {seg}",
        ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        header = (
            "m0_bar_kg,s_percent,T_d_s,mu,delta_s,t_f_s,"
            "lambda_closed_form,lambda_numeric,lambda_approx,alpha,lambda_rounded,"
            "seg1_kg_s,seg2_kg_s,seg3_kg_s,continuous_kg_s"
        )
        row = ",".join(
            [
                repr(self.m0_bar),
                repr(self.s),
                repr(self.T_d),
                str(self.mu),
                repr(self.delta),
                repr(self.t_f),
                repr(self.lambda_closed_form),
                repr(self.lambda_numeric),
                repr(self.lambda_approx),
                repr(self.alpha),
                repr(self.lambda_rounded),
                repr(self.segment_contributions[0]),
                repr(self.segment_contributions[1]),
                repr(self.segment_contributions[2]),
                repr(self.continuous_contribution),
            ]
        )
        return header + "\n" + row + "\n"


def compute_report(
    params: ScenarioParams, m0_bar: float, outcome: DisassemblyOutcome
) -> CircularityReport:
    """Evaluate every route on one scenario and echo the inputs used."""
    mu = functionality_coefficient(params.l)
    schedule = batch_mass_schedule(params, m0_bar, outcome)
    segments = tuple(float(mu) * v * (t1 - t0) for t0, t1, v in schedule.segments())
    continuous = (
        params.delta * params.continuous_rate.integral()
        if params.continuous_rate is not None
        else 0.0
    )
    lam_num = lambda_numeric(
        schedule, continuous_rate=params.continuous_rate, mu=float(mu), delta=params.delta
    )
    lam_closed, t_f = lambda_closed_form(params, m0_bar, outcome)
    return CircularityReport(
        lambda_numeric=lam_num,
        lambda_closed_form=lam_closed,
        lambda_approx=lambda_approx(params, m0_bar, outcome.s),
        alpha=alpha(params, outcome.s),
        t_f=t_f,
        segment_contributions=segments,  # type: ignore[arg-type]
        continuous_contribution=continuous,
        m0_bar=m0_bar,
        s=outcome.s,
        T_d=outcome.T_d,
        mu=mu,
        delta=params.delta,
    )


@dataclass(frozen=True)
class SweepRow:
    var: str
    value: float
    lambda_exact: float
    lambda_approx: float
    alpha: float


def sensitivity_sweep(
    params: ScenarioParams,
    m0_bar: float,
    outcome: DisassemblyOutcome,
    grids: dict[str, list[float]],
) -> list[SweepRow]:
    """Evaluate the exact and approximate circularity over one-dimensional
    grids of s, T_d and/or m0, holding the other inputs at their baseline.

    Rows come out grouped by variable in the fixed order s, T_d, m0 and
    ordered by grid position within each variable.
    """
    for var in grids:
        if var not in SWEEPABLE:
            raise UnknownVariable(f"cannot sweep {var!r}; choose from {SWEEPABLE}")
    if not any(len(grids.get(var, [])) > 0 for var in SWEEPABLE):
        raise EmptyGrid("at least one non-empty grid is required")

    rows: list[SweepRow] = []
    for var in SWEEPABLE:
        for value in grids.get(var, []):
            s, t_d, m0 = outcome.s, outcome.T_d, m0_bar
            if var == "s":
                s = value
            elif var == "T_d":
                t_d = value
            else:
                m0 = value
            point = DisassemblyOutcome(s=s, T_d=t_d)
            lam_exact, _ = lambda_closed_form(params, m0, point)
            rows.append(
                SweepRow(
                    var=var,
                    value=value,
                    lambda_exact=lam_exact,
                    lambda_approx=lambda_approx(params, m0, s),
                    alpha=alpha(params, s),
                )
            )
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["var,value,lambda_exact,lambda_approx,alpha"]
    for r in rows:
        lines.append(f"{r.var},{r.value!r},{r.lambda_exact!r},{r.lambda_approx!r},{r.alpha!r}")
    return "\n".join(lines) + "\n"
