"""Config document parsing and field-level validation.

The on-disk format is a flat INI document with four sections, one key
per line, so every plant parameter stays independently settable:

    [plant]   physical parameters of the heating subsystem
    [costs]   unit costs: raw, energy, wear, output
    [wear]    t_nominal and alpha of the wear law
    [sweep]   control range, direction, criterion, stop flag, budget

Parsing is fail-closed: unknown sections or keys are rejected, and every
field is checked against its constraint with the offending field named
in the error.
"""

from __future__ import annotations

import configparser
import math

from .econ import BUILTIN_CRITERIA
from .plant import PlantConfig, UnitCosts
from .sweep import SweepConfig


class ParseError(Exception):
    """Document is not well-formed."""


class ValidationError(Exception):
    """A field violates its constraint; ``field`` names it."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _to_float(field: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(field, f"not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ValidationError(field, "must be finite")
    return value


def _to_int(field: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(field, f"not an integer: {raw!r}") from None


def _to_bool(field: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValidationError(field, f"not a boolean: {raw!r}")


_SCHEMA: dict[str, dict[str, object]] = {
    "plant": {
        "batch_volume": _to_float,
        "fill_rate": _to_float,
        "release_intensity": _to_float,
        "ambient_temp": _to_float,
        "setpoint": _to_float,
        "heat_capacity": _to_float,
        "loss_coeff": _to_float,
        "heater_nominal_power": _to_float,
        "heater_efficiency": _to_float,
    },
    "costs": {
        "raw": _to_float,
        "energy": _to_float,
        "wear": _to_float,
        "output": _to_float,
    },
    "wear": {
        "t_nominal": _to_float,
        "alpha": _to_float,
    },
    "sweep": {
        "k_min": _to_float,
        "k_max": _to_float,
        "k_step": _to_float,
        "direction": str,
        "criterion": str,
        "stop_on_boundary": _to_bool,
        "tick_budget": _to_int,
    },
}

# Sweep keys that fall back to SweepConfig defaults when omitted.
_SWEEP_OPTIONAL = {"direction", "criterion", "stop_on_boundary", "tick_budget"}


def _require_positive(field: str, value: float) -> None:
    if value <= 0.0:
        raise ValidationError(field, f"must be > 0, got {value:g}")


def validate_plant_config(cfg: PlantConfig) -> None:
    """Check plant invariants, naming the offending field."""
    _require_positive("batch_volume", cfg.batch_volume)
    _require_positive("fill_rate", cfg.fill_rate)
    _require_positive("release_intensity", cfg.release_intensity)
    _require_positive("heat_capacity", cfg.heat_capacity)
    _require_positive("heater_nominal_power", cfg.heater_nominal_power)
    if cfg.loss_coeff < 0.0:
        raise ValidationError("loss_coeff", "must be >= 0")
    if not 0.0 < cfg.heater_efficiency <= 1.0:
        raise ValidationError("heater_efficiency", "must be in (0, 1]")
    if cfg.setpoint <= cfg.ambient_temp:
        raise ValidationError(
            "setpoint", f"must exceed ambient_temp ({cfg.ambient_temp:g}), "
            f"got {cfg.setpoint:g}")
    _require_positive("t_nominal", cfg.wear_t_nominal)
    if cfg.wear_alpha < 0.0:
        raise ValidationError("alpha", "must be >= 0")
    _require_positive("raw", cfg.unit_costs.raw)
    _require_positive("energy", cfg.unit_costs.energy)
    _require_positive("wear", cfg.unit_costs.wear)
    _require_positive("output", cfg.unit_costs.output)


def validate_sweep_config(sweep: SweepConfig) -> None:
    """Check sweep invariants, naming the offending field."""
    _require_positive("k_min", sweep.k_min)
    _require_positive("k_step", sweep.k_step)
    if sweep.k_min >= sweep.k_max:
        raise ValidationError(
            "k_min", f"must be below k_max ({sweep.k_max:g}), "
            f"got {sweep.k_min:g}")
    if sweep.direction not in ("ascending", "descending"):
        raise ValidationError(
            "direction", f"must be 'ascending' or 'descending', "
            f"got {sweep.direction!r}")
    if sweep.criterion not in BUILTIN_CRITERIA:
        raise ValidationError(
            "criterion", f"unknown name {sweep.criterion!r}; available: "
            + ", ".join(sorted(BUILTIN_CRITERIA)))
    if sweep.tick_budget <= 0:
        raise ValidationError("tick_budget", "must be a positive tick count")


def parse_config(text: str) -> tuple[PlantConfig, SweepConfig]:
    """Parse and validate a config document."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None

    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValidationError(section, "unknown section")
        schema = _SCHEMA[section]
        out: dict[str, object] = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ValidationError(f"{section}.{key}", "unknown key")
            converter = schema[key]
            out[key] = raw.strip() if converter is str else converter(
                f"{section}.{key}", raw)
        values[section] = out

    for section, schema in _SCHEMA.items():
        present = values.get(section, {})
        for key in schema:
            if key in present:
                continue
            if section == "sweep" and key in _SWEEP_OPTIONAL:
                continue
            raise ValidationError(f"{section}.{key}", "missing required key")

    plant = values["plant"]
    costs = values["costs"]
    wear = values["wear"]
    plant_cfg = PlantConfig(
        batch_volume=plant["batch_volume"],
        fill_rate=plant["fill_rate"],
        release_intensity=plant["release_intensity"],
        ambient_temp=plant["ambient_temp"],
        setpoint=plant["setpoint"],
        heat_capacity=plant["heat_capacity"],
        loss_coeff=plant["loss_coeff"],
        heater_nominal_power=plant["heater_nominal_power"],
        heater_efficiency=plant["heater_efficiency"],
        wear_t_nominal=wear["t_nominal"],
        wear_alpha=wear["alpha"],
        unit_costs=UnitCosts(raw=costs["raw"], energy=costs["energy"],
                             wear=costs["wear"], output=costs["output"]),
    )
    sweep_values = values["sweep"]
    sweep_cfg = SweepConfig(
        k_min=sweep_values["k_min"],
        k_max=sweep_values["k_max"],
        k_step=sweep_values["k_step"],
        **{key: sweep_values[key] for key in _SWEEP_OPTIONAL
           if key in sweep_values},
    )
    validate_plant_config(plant_cfg)
    validate_sweep_config(sweep_cfg)
    return plant_cfg, sweep_cfg


def load_config(path) -> tuple[PlantConfig, SweepConfig]:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
