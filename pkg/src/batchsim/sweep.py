"""Control-range sweep orchestration.

Wires the full experiment graph (scanner -> plant -> instruments ->
economics -> report latch), runs one complete operation per scan point,
and locates the optimum of the configured criterion across the range.

Closed-form twins of the simulated quantities live here too: heating
time from the linear loss model and per-operation flow volumes.  They
never touch the tick engine, which makes them usable as independent
checks on the simulated results and as a cheap dense scan when
bracketing an extremum.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import log1p

from . import econ
from .blocks import (Constant, IntervalTimer, Multiplier, PulseTrain,
                     RangeScanner, ReportGenerator, ResettableIntegrator,
                     Summator, UnitDelay, enumerate_scan_values)
from .econ import (Criterion, OperationRecord, OperationEvaluator,
                   get_criterion)
from .kernel import (BlockGraph, SimClock, SimulationError,
                     TickBudgetExceeded, build_graph, run_until)
from .plant import (BatchHeaterPlant, PlantConfig, WearRateGenerator,
                    feasible_control_range)

DEFAULT_DT = 0.1

_SERIES_COLUMNS = ("control_k", "t_op", "rtv", "rpv", "ptv", "rwv",
                   "re", "pe", "prf", "rnt", "r", "e")


class InfeasibleRange(SimulationError):
    """Requested control values fall outside the feasible range."""


class NoValidRecords(SimulationError):
    """Extremum requested over a record set with no valid entries."""


@dataclass(frozen=True, slots=True)
class SweepConfig:
    """Scan settings for the control range."""

    k_min: float
    k_max: float
    k_step: float
    direction: str = "ascending"
    criterion: str = "efficiency"
    stop_on_boundary: bool = True
    tick_budget: int = 2_000_000

    def direction_code(self) -> int:
        return 1 if self.direction == "descending" else 0


@dataclass(frozen=True, slots=True)
class ExtremumResult:
    """Best record under a criterion: list index, control and score."""

    index: int
    control_k: float
    score: float


@dataclass(slots=True)
class SweepReport:
    """Ordered sweep outcome plus the located extremum.

    ``pulse_times`` holds, per record, the second-valued times of the
    four phase pulses of that operation (keys rtb, rtf, red, ptf);
    ``pulse_events`` is the raw ordered (channel, time) stream they were
    grouped from, kept for protocol verification.
    """

    records: list[OperationRecord]
    criterion: str
    extremum: ExtremumResult
    series: dict[str, list[float]] = field(default_factory=dict)
    pulse_times: list[dict[str, float]] = field(default_factory=list)
    pulse_events: list[tuple[str, float]] = field(default_factory=list)
    dt: float = DEFAULT_DT


def oracle_heating_time(config: PlantConfig, control_k: float) -> float:
    """Closed-form heating duration for the linear loss model.

    Solves dT/dt = (k*P*eta - h*(T - T_amb)) / C from ambient up to the
    setpoint.  With losses the time is -(C/h)*ln(1 - h*dT/(k*P*eta));
    without losses it degrades to C*dT/(k*P*eta).  log1p keeps the h -> 0
    limit numerically clean.
    """
    power = control_k * config.heater_nominal_power * config.heater_efficiency
    delta = config.setpoint - config.ambient_temp
    loss = config.loss_coeff * delta
    if power <= loss:
        raise InfeasibleRange(
            f"control {control_k:g} is infeasible: delivered power "
            f"{power:g} W cannot overcome losses {loss:g} W at the setpoint")
    if config.loss_coeff == 0.0:
        return config.heat_capacity * delta / power
    return -(config.heat_capacity / config.loss_coeff) * log1p(-loss / power)


def oracle_operation(config: PlantConfig, control_k: float) -> dict[str, float]:
    """Closed-form per-operation times and flow volumes at one control."""
    heat = oracle_heating_time(config, control_k)
    fill = config.batch_volume / config.fill_rate
    release = config.batch_volume / config.release_intensity
    rpv = control_k * config.heater_nominal_power * heat
    rwv = (control_k ** config.wear_alpha / config.wear_t_nominal) * heat
    return {
        "heat_time": heat,
        "t_op": fill + heat + release,
        "rtv": config.batch_volume,
        "rpv": rpv,
        "ptv": config.batch_volume,
        "rwv": rwv,
    }


def oracle_cost_curve(config: PlantConfig,
                      ks: list[float]) -> list[tuple[float, float]]:
    """(k, input cost) pairs from the closed forms, for dense scans."""
    curve = []
    for k in ks:
        op = oracle_operation(config, k)
        re, _ = econ.aggregate_costs(
            econ.FlowVolumes(op["rtv"], op["rpv"], op["ptv"], op["rwv"]),
            config.unit_costs)
        curve.append((k, re))
    return curve


def find_extremum(records: list[OperationRecord],
                  criterion: Criterion) -> ExtremumResult:
    """Index of the maximal criterion score among valid records.

    Ties break toward the lower control level: at equal merit the
    gentler mode wins.
    """
    best_i = -1
    best_score = 0.0
    for i, rec in enumerate(records):
        if not rec.valid:
            continue
        score = criterion.score(rec.re, rec.pe, rec.t_op)
        if (best_i < 0 or score > best_score
                or (score == best_score
                    and rec.control_k < records[best_i].control_k)):
            best_i = i
            best_score = score
    if best_i < 0:
        raise NoValidRecords("no valid operation records to rank")
    return ExtremumResult(best_i, records[best_i].control_k, best_score)


def _instrument_wiring(plant_cfg: PlantConfig,
                       control_out: str) -> tuple[list, list]:
    """Blocks and wires shared by the serial and single-operation graphs:
    plant, wear generator, four reset integrators, cost network, timer,
    evaluator and report latch.  ``control_out`` names the port driving
    the plant load level (and report channel 1)."""
    uc = plant_cfg.unit_costs
    blocks = [
        BatchHeaterPlant("plant", plant_cfg),
        WearRateGenerator("wear_gen", plant_cfg.heater_nominal_power,
                          plant_cfg.wear_t_nominal, plant_cfg.wear_alpha),
        ResettableIntegrator("rtv_int"),
        ResettableIntegrator("rpv_int"),
        ResettableIntegrator("ptv_int"),
        ResettableIntegrator("rwv_int"),
        Constant("raw_price", uc.raw),
        Constant("energy_price", uc.energy),
        Constant("wear_price", uc.wear),
        Constant("output_price", uc.output),
        Multiplier("raw_cost"),
        Multiplier("energy_cost"),
        Multiplier("wear_cost"),
        Multiplier("output_value"),
        Summator("re_sum", n_inputs=3),
        IntervalTimer("op_timer"),
        OperationEvaluator("evaluator"),
        ReportGenerator("report"),
    ]
    wires = [
        (control_out, "plant.CL"),
        ("plant.RP", "wear_gen.IN"),
        ("plant.RT", "rtv_int.IN"), ("plant.RTB", "rtv_int.RES"),
        ("plant.RP", "rpv_int.IN"), ("plant.RTB", "rpv_int.RES"),
        ("plant.PT", "ptv_int.IN"), ("plant.RTB", "ptv_int.RES"),
        ("wear_gen.OUT", "rwv_int.IN"), ("plant.RTB", "rwv_int.RES"),
        ("rtv_int.OUT", "raw_cost.IN1"), ("raw_price.OUT", "raw_cost.IN2"),
        ("rpv_int.OUT", "energy_cost.IN1"), ("energy_price.OUT", "energy_cost.IN2"),
        ("rwv_int.OUT", "wear_cost.IN1"), ("wear_price.OUT", "wear_cost.IN2"),
        ("ptv_int.OUT", "output_value.IN1"), ("output_price.OUT", "output_value.IN2"),
        ("raw_cost.OUT", "re_sum.IN1"),
        ("energy_cost.OUT", "re_sum.IN2"),
        ("wear_cost.OUT", "re_sum.IN3"),
        ("plant.RTB", "op_timer.STR"), ("plant.PTF", "op_timer.FIN"),
        ("re_sum.OUT", "evaluator.RE"),
        ("output_value.OUT", "evaluator.PE"),
        ("op_timer.TIM", "evaluator.TO"),
        ("plant.PTF", "evaluator.FIN"),
        ("plant.PTF", "report.STR"),
        (control_out, "report.IN1"),
        ("op_timer.TIM", "report.IN2"),
        ("rtv_int.OUT", "report.IN3"),
        ("rpv_int.OUT", "report.IN4"),
        ("ptv_int.OUT", "report.IN5"),
        ("rwv_int.OUT", "report.IN6"),
        ("re_sum.OUT", "report.IN7"),
        ("output_value.OUT", "report.IN8"),
        ("evaluator.PRF", "report.IN9"),
        ("evaluator.RNT", "report.IN10"),
    ]
    return blocks, wires


def build_sweep_graph(plant_cfg: PlantConfig, sweep: SweepConfig) -> BlockGraph:
    """Full serial protocol graph.

    A one-shot pulse strobes the scanner at tick 0; afterwards each
    operation-complete pulse, delayed one tick to break the feedback
    loop, strobes the scanner to advance the control for the next
    operation.  With stop_on_boundary set, the strobe that follows the
    boundary operation halts the system.
    """
    blocks, wires = _instrument_wiring(plant_cfg, "control.OUT")
    blocks += [
        PulseTrain("start"),
        UnitDelay("ptf_delay"),
        Summator("strobe", n_inputs=2),
        RangeScanner("control", sweep.k_min, sweep.k_max, sweep.k_step,
                     direction=sweep.direction_code(),
                     stop_on_boundary=sweep.stop_on_boundary),
    ]
    wires += [
        ("plant.PTF", "ptf_delay.IN"),
        ("start.OUT", "strobe.IN1"),
        ("ptf_delay.OUT", "strobe.IN2"),
        ("strobe.OUT", "control.STR"),
    ]
    return build_graph(blocks, wires)


def build_single_graph(plant_cfg: PlantConfig, control_k: float) -> BlockGraph:
    """One-operation graph driven by a constant control level."""
    blocks, wires = _instrument_wiring(plant_cfg, "control.OUT")
    blocks.append(Constant("control", control_k))
    return build_graph(blocks, wires)


def _make_pulse_observer(graph: BlockGraph):
    """Observer collecting (channel, tick) phase-pulse events."""
    plant_out = graph.block("plant").out
    events: list[tuple[str, int]] = []

    def observer(g: BlockGraph, clock: SimClock) -> None:
        tick = clock.tick_index - 1
        if plant_out["RTB"] > 0.5:
            events.append(("rtb", tick))
        if plant_out["RTF"] > 0.5:
            events.append(("rtf", tick))
        if plant_out["RED"] > 0.5:
            events.append(("red", tick))
        if plant_out["PTF"] > 0.5:
            events.append(("ptf", tick))

    return events, observer


def _group_pulse_events(events: list[tuple[str, int]],
                        dt: float) -> list[dict[str, float]]:
    """Per-operation pulse times; a trailing operation cut off by the
    system stop is dropped."""
    ops: list[dict[str, float]] = []
    current: dict[str, float] = {}
    for channel, tick in events:
        if channel == "rtb":
            current = {}
        current[channel] = tick * dt
        if channel == "ptf":
            ops.append(current)
            current = {}
    return ops


def _assemble_records(report: ReportGenerator,
                      evaluator: OperationEvaluator) -> list[OperationRecord]:
    records = []
    for row, ident in zip(report.rows, evaluator.records):
        v = row.values
        records.append(OperationRecord(
            num=row.num, control_k=v[0], t_op=v[1],
            rtv=v[2], rpv=v[3], ptv=v[4], rwv=v[5],
            re=v[6], pe=v[7],
            prf=ident.prf, rnt=ident.rnt, r=ident.r, e=ident.e,
            valid=ident.valid))
    return records


def _finalize(records: list[OperationRecord], criterion: Criterion,
              events: list[tuple[str, int]], dt: float) -> SweepReport:
    extremum = find_extremum(records, criterion)
    series = {col: [getattr(r, col) for r in records]
              for col in _SERIES_COLUMNS}
    pulse_events = [(channel, tick * dt) for channel, tick in events]
    return SweepReport(records, criterion.name, extremum, series,
                       _group_pulse_events(events, dt), pulse_events, dt)


def _check_feasible(plant_cfg: PlantConfig, sweep: SweepConfig) -> None:
    k_floor = feasible_control_range(plant_cfg)
    if sweep.k_min < k_floor:
        raise InfeasibleRange(
            f"k_min={sweep.k_min:g} is below the feasible control floor "
            f"{k_floor:g}")


def run_sweep(plant_cfg: PlantConfig, sweep: SweepConfig,
              dt: float = DEFAULT_DT, parallel: bool = False) -> SweepReport:
    """Run one complete operation per scan point and rank the records.

    Serial mode (default) exercises the full strobe protocol through the
    scanner block.  Parallel mode runs each scan point in its own
    independent graph; the scan sequence is precomputed with the exact
    arithmetic the scanner uses, so both modes produce identical records.
    """
    _check_feasible(plant_cfg, sweep)
    ks = enumerate_scan_values(sweep.k_min, sweep.k_max, sweep.k_step,
                               sweep.direction_code())
    criterion = get_criterion(sweep.criterion)
    if parallel:
        with ThreadPoolExecutor(max_workers=min(8, len(ks))) as pool:
            results = list(pool.map(
                lambda k: _single_operation(plant_cfg, k, dt,
                                            sweep.tick_budget), ks))
        records = [replace(rec, num=i + 1)
                   for i, (rec, _) in enumerate(results)]
        # Event times are graph-local (each operation ran from tick 0).
        events = [event for _, op_events in results for event in op_events]
        return _finalize(records, criterion, events, dt)

    graph = build_sweep_graph(plant_cfg, sweep)
    clock = SimClock(dt)
    report: ReportGenerator = graph.block("report")
    evaluator: OperationEvaluator = graph.block("evaluator")
    events, observer = _make_pulse_observer(graph)
    n_ops = len(ks)
    if sweep.stop_on_boundary:
        def predicate(g, c):
            return False
    else:
        def predicate(g, c):
            return len(report.rows) >= n_ops
    try:
        run_until(graph, clock, predicate, tick_budget=sweep.tick_budget,
                  observer=observer)
    except TickBudgetExceeded as exc:
        active_k = ks[min(len(report.rows), n_ops - 1)]
        err = TickBudgetExceeded(
            exc.tick, detail=f"operation at control {active_k:g} unfinished")
        err.control_k = active_k
        raise err from None
    if len(report.rows) != n_ops:
        raise SimulationError(
            f"sweep stopped with {len(report.rows)} of {n_ops} operations")
    records = _assemble_records(report, evaluator)
    return _finalize(records, criterion, events, dt)


def _single_operation(plant_cfg: PlantConfig, control_k: float, dt: float,
                      tick_budget: int) -> tuple[OperationRecord,
                                                 list[tuple[str, int]]]:
    """One complete operation at a fixed control in a fresh graph."""
    graph = build_single_graph(plant_cfg, control_k)
    clock = SimClock(dt)
    evaluator: OperationEvaluator = graph.block("evaluator")
    events, observer = _make_pulse_observer(graph)

    def predicate(g, c):
        return len(evaluator.records) >= 1

    try:
        run_until(graph, clock, predicate, tick_budget=tick_budget,
                  observer=observer)
    except TickBudgetExceeded as exc:
        err = TickBudgetExceeded(
            exc.tick, detail=f"operation at control {control_k:g} unfinished")
        err.control_k = control_k
        raise err from None
    report: ReportGenerator = graph.block("report")
    record = _assemble_records(report, evaluator)[0]
    return record, events


def run_single(plant_cfg: PlantConfig, control_k: float,
               dt: float = DEFAULT_DT, tick_budget: int = 2_000_000,
               criterion: str = "efficiency") -> SweepReport:
    """Single-operation run packaged as a one-record report."""
    k_floor = feasible_control_range(plant_cfg)
    if control_k < k_floor:
        raise InfeasibleRange(
            f"control {control_k:g} is below the feasible floor {k_floor:g}")
    record, events = _single_operation(plant_cfg, control_k, dt, tick_budget)
    return _finalize([record], get_criterion(criterion), events, dt)
