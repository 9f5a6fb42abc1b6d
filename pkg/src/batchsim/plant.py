"""Batch liquid-heating plant: fill -> heat -> release phase machine over a
lumped single-node thermal model, plus the heater wear-rate generator.

The vessel takes one batch of raw product at ambient temperature, heats
it to the setpoint with an electric heater running at a commanded load
level, and drains the finished batch.  Heat leaks to ambient through a
linear loss term, which is what makes slow heating expensive: a longer
operation loses more energy at the same setpoint.

The heater ages faster than linearly with its load level.  Service life
in a mode with load ``k`` is ``t_nominal * k**-alpha``, so the life
consumed per second is ``k**alpha / t_nominal``; integrated over an
operation this gives the wear charged to that operation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernel import Block, SimClock, SimulationError

# Phase codes (ints keep the per-tick dispatch cheap).
IDLE, FILLING, HEATING, RELEASING = 0, 1, 2, 3
PHASE_NAMES = {IDLE: "idle", FILLING: "filling", HEATING: "heating",
               RELEASING: "releasing"}

# Safety margin applied above the asymptotic feasibility bound so heating
# time stays finite and numerically stable at the low end of a sweep.
FEASIBILITY_MARGIN = 0.05


class NeverReachesSetpoint(SimulationError):
    """Commanded load cannot push the temperature up to the setpoint."""

    def __init__(self, control_k: float, tick: int):
        super().__init__(
            f"load level {control_k:g} cannot reach the setpoint "
            f"(asymptotic temperature at or below it), at tick {tick}")
        self.control_k = control_k
        self.tick = tick


@dataclass(frozen=True, slots=True)
class UnitCosts:
    """Cost per unit of each flow: raw (per kg), energy (per J), wear
    (per life-fraction unit), output (per kg)."""

    raw: float
    energy: float
    wear: float
    output: float


@dataclass(frozen=True, slots=True)
class PlantConfig:
    """Physical and economic parameters of the heating subsystem.

    Validation happens at the parsing/run boundary (see config module),
    not at construction, so probe configs for edge cases stay cheap to
    build.
    """

    batch_volume: float        # kg of raw product per operation
    fill_rate: float           # kg/s into the vessel
    release_intensity: float   # kg/s out of the vessel
    ambient_temp: float        # deg C
    setpoint: float            # deg C the batch must reach
    heat_capacity: float       # J/K for one batch
    loss_coeff: float          # W/K linear loss to ambient
    heater_nominal_power: float  # W drawn at load level 1
    heater_efficiency: float   # fraction of drawn power delivered as heat
    wear_t_nominal: float      # s of service life at load level 1
    wear_alpha: float          # wear growth exponent (>= 0)
    unit_costs: UnitCosts


@dataclass(slots=True)
class PlantState:
    """Per-tick state of one plant instance."""

    phase: int = IDLE
    temp: float = 0.0
    mass_in_vessel: float = 0.0
    load_level: float = 0.0
    # Flow volumes accumulated since the start of the current operation.
    rtv: float = 0.0   # raw product in, kg
    rpv: float = 0.0   # energy product in, J
    ptv: float = 0.0   # output product out, kg
    rwv: float = 0.0   # equipment wear, life fraction


def wear_rate(control_k: float, config: PlantConfig) -> float:
    """Life fraction consumed per second at load level ``control_k``.

    Service life scales as ``t_nominal * k**-alpha``; the wear rate is
    its reciprocal, so nominal mode (k=1) consumes exactly 1/t_nominal
    per second regardless of alpha.
    """
    return control_k ** config.wear_alpha / config.wear_t_nominal


def feasible_control_range(config: PlantConfig) -> float:
    """Smallest load level that can still reach the setpoint, padded by
    the safety margin.  With no losses any positive load works and only
    the margin remains."""
    denom = config.heater_nominal_power * config.heater_efficiency
    delta = config.setpoint - config.ambient_temp
    base = config.loss_coeff * delta / denom
    return max(base * (1.0 + FEASIBILITY_MARGIN), FEASIBILITY_MARGIN)


class BatchHeaterPlant(Block):
    """The technological subsystem as a single block.

    Input port CL commands the heater load level.  The plant runs whole
    operations autonomously: while idle with CL > 0 it starts a new
    batch, emitting one-tick pulses at each phase boundary:

    * RTB - start of raw product feed (operation start)
    * RTF - vessel full, heating begins next tick
    * RED - setpoint reached, release begins next tick
    * PTF - vessel drained, operation complete

    Level outputs carry the current flow rates (RT raw kg/s, RP energy W,
    PT output kg/s), the batch temperature TMP, and RWM, which goes to 1
    only when an operation had to be aborted.

    A fill or drain tick that would overshoot the batch volume is scaled
    to land exactly on the boundary, so integrated flow volumes equal the
    batch volume to rounding error.
    """

    input_ports = ("CL",)
    output_ports = ("RTB", "RTF", "RED", "PTF", "RT", "RP", "PT", "TMP", "RWM")
    pulse_ports = frozenset({"RTB", "RTF", "RED", "PTF"})

    def __init__(self, name: str, config: PlantConfig):
        super().__init__(name)
        self.config = config
        self.state = PlantState(temp=config.ambient_temp)
        c = config
        self._batch = c.batch_volume
        self._fill = c.fill_rate
        self._release = c.release_intensity
        self._t_amb = c.ambient_temp
        self._setpoint = c.setpoint
        self._c = c.heat_capacity
        self._h = c.loss_coeff
        self._p_nom = c.heater_nominal_power
        self._p_eta = c.heater_nominal_power * c.heater_efficiency
        self._alpha = c.wear_alpha
        self._t_n = c.wear_t_nominal
        self._loss_at_setpoint = c.loss_coeff * (c.setpoint - c.ambient_temp)
        self._mass_eps = 1e-9 * c.batch_volume
        self.out["TMP"] = self.state.temp

    def evaluate(self, clock: SimClock) -> None:
        state = self.state
        out = self.out
        dt = clock.dt
        phase = state.phase
        rt = rp = pt = 0.0

        if phase == HEATING:
            k = self.read("CL")
            rp = k * self._p_nom
            state.load_level = k
            state.rpv += rp * dt
            state.rwv += (k ** self._alpha / self._t_n) * dt
            temp = state.temp
            temp += dt * (k * self._p_eta - self._h * (temp - self._t_amb)) / self._c
            state.temp = temp
            if temp >= self._setpoint:
                state.load_level = 0.0
                state.phase = RELEASING
                self.pulse("RED")
        elif phase == FILLING:
            room = self._batch - state.mass_in_vessel
            rt = self._fill if room >= self._fill * dt else room / dt
            state.mass_in_vessel += rt * dt
            state.rtv += rt * dt
            if state.mass_in_vessel >= self._batch - self._mass_eps:
                state.mass_in_vessel = self._batch
                state.phase = HEATING
                self.pulse("RTF")
        elif phase == RELEASING:
            mass = state.mass_in_vessel
            pt = self._release if mass >= self._release * dt else mass / dt
            mass -= pt * dt
            state.ptv += pt * dt
            if mass <= self._mass_eps:
                mass = 0.0
                state.phase = IDLE
                self.pulse("PTF")
            state.mass_in_vessel = mass
        else:  # IDLE
            k = self.read("CL")
            if k > 0.0:
                if k * self._p_eta <= self._loss_at_setpoint:
                    out["RWM"] = 1.0
                    raise NeverReachesSetpoint(k, clock.tick_index)
                state.phase = FILLING
                state.temp = self._t_amb
                state.mass_in_vessel = 0.0
                state.rtv = state.rpv = state.ptv = state.rwv = 0.0
                self.pulse("RTB")

        out["RT"] = rt
        out["RP"] = rp
        out["PT"] = pt
        out["TMP"] = state.temp


class WearRateGenerator(Block):
    """Turns the live energy feed rate into the heater wear rate.

    The input is the drawn power in watts; dividing by the nominal power
    recovers the load level k, and the output is k**alpha / t_nominal.
    Zero input (heater idle) produces zero wear.
    """

    input_ports = ("IN",)
    output_ports = ("OUT",)

    def __init__(self, name: str, nominal_rate: float, t_nominal: float,
                 alpha: float):
        super().__init__(name)
        self._nominal = nominal_rate
        self._t_n = t_nominal
        self._alpha = alpha

    def evaluate(self, clock: SimClock) -> None:
        rate = self.read("IN")
        if rate > 0.0:
            k = rate / self._nominal
            self.out["OUT"] = k ** self._alpha / self._t_n
        else:
            self.out["OUT"] = 0.0
