"""batchsim: fixed-step block-dataflow simulator for batch heating
operations with techno-economic sweep analysis."""

from .kernel import (AlgebraicLoop, Block, BlockGraph, MultipleDrivers,
                     NumericFault, SimClock, SimulationError,
                     TickBudgetExceeded, UnknownPort, build_graph, run_until,
                     step)
from .blocks import (Constant, IntervalTimer, InvalidRange, Multiplier,
                     PulseTrain, RangeScanner, ReportGenerator, ReportRow,
                     ResettableIntegrator, SequenceSource, Summator,
                     UnitDelay, enumerate_scan_values, scan_value)
from .plant import (BatchHeaterPlant, FEASIBILITY_MARGIN,
                    NeverReachesSetpoint, PlantConfig, PlantState, UnitCosts,
                    WearRateGenerator, feasible_control_range, wear_rate)
from .econ import (BUILTIN_CRITERIA, Criterion, FlowVolumes,
                   OperationEvaluator, OperationRecord, UnknownCriterion,
                   aggregate_costs, compute_indicators, evaluate_criterion,
                   get_criterion)
from .sweep import (DEFAULT_DT, ExtremumResult, InfeasibleRange,
                    NoValidRecords, SweepConfig, SweepReport, find_extremum,
                    oracle_cost_curve, oracle_heating_time, oracle_operation,
                    run_single, run_sweep)
from .config import (ParseError, ValidationError, load_config, parse_config,
                     validate_plant_config, validate_sweep_config)
from .reportio import (CSV_HEADER, read_operations_csv, write_report)

__version__ = "0.1.0"
