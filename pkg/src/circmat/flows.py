"""Material batches, criticality weighting and the staged mass schedule.

All masses are weighted by a criticality coefficient in (0, 1]; times are in
seconds, masses in kilograms. The supply-disassembly-incineration chain
produces a piecewise-constant weighted mass trajectory with three stages:

  1. the extracted batch, from extraction until the not-disassembled parts
     reach the incinerator,
  2. additionally the not-disassembled mass once it arrives there,
  3. additionally the reused mass once its reuse phase ends, until the end
     of incineration.
"""

from __future__ import annotations

from dataclasses import dataclass


class FlowError(ValueError):
    """Base class for flow-level validation failures."""


class InvalidCriticality(FlowError):
    pass


class NegativeMass(FlowError):
    pass


class SuccessOutOfRange(FlowError):
    pass


class NonMonotoneBreakpoints(FlowError):
    pass


@dataclass(frozen=True)
class MaterialSpec:
    """One material batch: name, criticality in (0, 1], initial mass in kg."""

    name: str
    criticality: float
    mass_kg: float

    def __post_init__(self):
        if not (0.0 < self.criticality <= 1.0):
            raise InvalidCriticality(
                f"criticality of {self.name!r} must be in (0, 1], got {self.criticality}"
            )
        if self.mass_kg < 0.0:
            raise NegativeMass(f"mass of {self.name!r} must be >= 0, got {self.mass_kg}")


@dataclass(frozen=True)
class ScenarioParams:
    """Timing constants of the chain plus the flow-to-mass interval and the
    functional-discard count.

    t_2in4: arrival time of the extracted batch at the disassembler (s)
    T_t:    transport time of the not-disassembled batch to the incinerator (s)
    T_r:    reuse duration of the disassembled batch (s)
    T_i:    incineration duration (s)
    delta:  constant interval converting continuous flows to mass (s)
    l:      number of functional (non-faulty) discarded batches
    continuous_rate: weighted continuously-transported rate (kg/s), zero by
        default; no bundled scenario uses it but the integrator supports it.

    The chain ordering requires T_t < T_r; that is checked where the schedule
    is built so parameter objects stay usable for sweeps.
    """

    t_2in4: float
    T_t: float
    T_r: float
    T_i: float
    delta: float = 1.0
    l: int = 1
    continuous_rate: "PiecewiseConstant | None" = None

    def __post_init__(self):
        if self.t_2in4 < 0.0:
            raise FlowError(f"t_2in4 must be >= 0, got {self.t_2in4}")
        for name in ("T_t", "T_r", "T_i", "delta"):
            value = getattr(self, name)
            if value <= 0.0:
                raise FlowError(f"{name} must be positive, got {value}")
        if not isinstance(self.l, int) or self.l < 0:
            raise FlowError(f"l must be a non-negative integer, got {self.l!r}")


@dataclass(frozen=True)
class DisassemblyOutcome:
    """Evaluated disassembler performance: success percentage and duration."""

    s: float
    T_d: float

    def __post_init__(self):
        if not (0.0 <= self.s <= 100.0):
            raise SuccessOutOfRange(f"s must be in [0, 100], got {self.s}")
        if self.T_d <= 0.0:
            raise FlowError(f"T_d must be positive, got {self.T_d}")


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-open piecewise-constant function on [0, end_time).

    Used both for the weighted batch mass (kg) and for continuous weighted
    rates (kg/s). Breakpoints are (time, value) pairs with strictly
    increasing times starting at 0 and non-negative values.
    """

    breakpoints: tuple[tuple[float, float], ...]
    end_time: float

    def __post_init__(self):
        if not self.breakpoints:
            raise FlowError("piecewise function needs at least one breakpoint")
        times = [t for t, _ in self.breakpoints]
        if times[0] != 0.0:
            raise FlowError(f"first breakpoint must be at t=0, got {times[0]}")
        for a, b in zip(times, times[1:]):
            if b <= a:
                raise NonMonotoneBreakpoints(f"breakpoint times must increase: {a} -> {b}")
        if any(v < 0.0 for _, v in self.breakpoints):
            raise NegativeMass("piecewise values must be >= 0")
        if self.end_time <= times[-1]:
            raise NonMonotoneBreakpoints(
                f"end_time {self.end_time} must exceed last breakpoint {times[-1]}"
            )

    def segments(self) -> list[tuple[float, float, float]]:
        """(t_start, t_end, value) triples covering [0, end_time)."""
        out = []
        for i, (t, v) in enumerate(self.breakpoints):
            t_next = self.breakpoints[i + 1][0] if i + 1 < len(self.breakpoints) else self.end_time
            out.append((t, t_next, v))
        return out

    def value_at(self, t: float) -> float:
        """Segment value at time t; times at or beyond end_time take the last
        value (right-continuous extension, convenient for samplers)."""
        if t < 0.0:
            return 0.0
        value = self.breakpoints[0][1]
        for bp_t, bp_v in self.breakpoints:
            if bp_t <= t:
                value = bp_v
            else:
                break
        return value

    def integral(self) -> float:
        """Exact integral over [0, end_time) as a sum of rectangle areas."""
        return sum(v * (t1 - t0) for t0, t1, v in self.segments())

    def scaled(self, k: float) -> "PiecewiseConstant":
        return PiecewiseConstant(
            breakpoints=tuple((t, k * v) for t, v in self.breakpoints),
            end_time=self.end_time,
        )

    def to_csv(self, header: str = "time_s,mass_kg") -> str:
        """CSV with one row per breakpoint plus a closing row at end_time."""
        lines = [header]
        for t, v in self.breakpoints:
            lines.append(f"{t!r},{v!r}")
        lines.append(f"{self.end_time!r},{self.breakpoints[-1][1]!r}")
        return "\n".join(lines) + "\n"


def zero_rate(end_time: float) -> PiecewiseConstant:
    """Identically-zero continuous rate on [0, end_time)."""
    return PiecewiseConstant(breakpoints=((0.0, 0.0),), end_time=end_time)


def weighted_initial_mass(materials) -> float:
    """Criticality-weighted initial mass: sum of c_i * m_i over the batch."""
    mats = list(materials)
    if not mats:
        raise FlowError("at least one material is required")
    total = 0.0
    for m in mats:
        if not (0.0 < m.criticality <= 1.0):
            raise InvalidCriticality(f"criticality of {m.name!r} out of (0, 1]")
        if m.mass_kg < 0.0:
            raise NegativeMass(f"mass of {m.name!r} is negative")
        total += m.criticality * m.mass_kg
    return total


def split_by_success(m0_bar: float, s: float) -> tuple[float, float]:
    """Split the weighted mass into (not disassembled, reused) by success %.

    Mass is conserved: the two parts always sum back to m0_bar.
    """
    if m0_bar < 0.0:
        raise NegativeMass(f"m0_bar must be >= 0, got {m0_bar}")
    if not (0.0 <= s <= 100.0):
        raise SuccessOutOfRange(f"s must be in [0, 100], got {s}")
    m_unprocessed = m0_bar * (1.0 - s / 100.0)
    m_reused = m0_bar * (s / 100.0)
    return m_unprocessed, m_reused


def functionality_coefficient(l: int) -> int:
    """Penalty multiplier 1 + l, where l counts functional discarded batches."""
    if not isinstance(l, int) or l < 0:
        raise FlowError(f"l must be a non-negative integer, got {l!r}")
    return 1 + l


def batch_mass_schedule(
    params: ScenarioParams, m0_bar: float, outcome: DisassemblyOutcome
) -> PiecewiseConstant:
    """Weighted batch-mass trajectory of the chain as a three-stage function.

    Values: m0_bar until the not-disassembled batch reaches the incinerator
    at t_2in4 + T_d + T_t; then m0_bar plus the not-disassembled mass until
    the reused batch arrives at t_2in4 + T_d + T_r; then 2*m0_bar until the
    end of incineration at t_f = t_2in4 + T_d + T_r + T_i.
    """
    if m0_bar < 0.0:
        raise NegativeMass(f"m0_bar must be >= 0, got {m0_bar}")
    if params.T_t >= params.T_r:
        raise NonMonotoneBreakpoints(
            f"T_t ({params.T_t}) must be smaller than T_r ({params.T_r})"
        )
    m_unprocessed, m_reused = split_by_success(m0_bar, outcome.s)
    t_incinerator_in = params.t_2in4 + outcome.T_d + params.T_t
    t_reuse_end = params.t_2in4 + outcome.T_d + params.T_r
    t_f = params.t_2in4 + outcome.T_d + params.T_r + params.T_i
    return PiecewiseConstant(
        breakpoints=(
            (0.0, m0_bar),
            (t_incinerator_in, m0_bar + m_unprocessed),
            (t_reuse_end, m0_bar + m_unprocessed + m_reused),
        ),
        end_time=t_f,
    )


def functional_batch_schedule(
    params: ScenarioParams, m0_bar: float, outcome: DisassemblyOutcome
) -> PiecewiseConstant:
    """Trajectory of only the functional discarded mass (the not-disassembled
    batch sent to incineration while still working).

    Companion to the optional narrow-scope weighting mode of the integrator;
    the default mode applies the functionality multiplier to the whole batch
    trajectory instead.
    """
    if params.T_t >= params.T_r:
        raise NonMonotoneBreakpoints(
            f"T_t ({params.T_t}) must be smaller than T_r ({params.T_r})"
        )
    m_unprocessed, _ = split_by_success(m0_bar, outcome.s)
    t_incinerator_in = params.t_2in4 + outcome.T_d + params.T_t
    t_f = params.t_2in4 + outcome.T_d + params.T_r + params.T_i
    return PiecewiseConstant(
        breakpoints=((0.0, 0.0), (t_incinerator_in, m_unprocessed)),
        end_time=t_f,
    )
