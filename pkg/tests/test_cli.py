"""Config parsing, report files and the command-line front end."""

from __future__ import annotations

import hashlib
import math

import pytest

from batchsim import (CSV_HEADER, ParseError, SweepConfig, ValidationError,
                      load_config, parse_config, read_operations_csv,
                      run_sweep, validate_plant_config, validate_sweep_config,
                      write_report)
from batchsim.cli import main

from conftest import REFERENCE_INI, make_reference_plant, make_reference_sweep


def read_reference_text():
    return REFERENCE_INI.read_text(encoding="utf-8")


class TestParseConfig:
    def test_reference_document_round_trip(self):
        plant, sweep = parse_config(read_reference_text())
        assert plant == make_reference_plant()
        assert sweep == make_reference_sweep()

    def test_setpoint_below_ambient_names_field(self):
        text = read_reference_text().replace("setpoint = 70.0",
                                             "setpoint = 10.0")
        with pytest.raises(ValidationError) as excinfo:
            parse_config(text)
        assert excinfo.value.field == "setpoint"

    def test_unknown_key_rejected(self):
        text = read_reference_text().replace(
            "[plant]", "[plant]\nheater_color = red")
        with pytest.raises(ValidationError) as excinfo:
            parse_config(text)
        assert "heater_color" in str(excinfo.value)

    def test_unknown_section_rejected(self):
        text = read_reference_text() + "\n[turbo]\nboost = 11\n"
        with pytest.raises(ValidationError):
            parse_config(text)

    def test_missing_key_rejected(self):
        text = read_reference_text().replace("batch_volume = 10.0\n", "")
        with pytest.raises(ValidationError) as excinfo:
            parse_config(text)
        assert "batch_volume" in str(excinfo.value)

    def test_malformed_document_is_parse_error(self):
        with pytest.raises(ParseError):
            parse_config("batch_volume = 10\nno section header")

    def test_non_numeric_value_names_field(self):
        text = read_reference_text().replace("fill_rate = 1.0",
                                             "fill_rate = fast")
        with pytest.raises(ValidationError) as excinfo:
            parse_config(text)
        assert "fill_rate" in str(excinfo.value)

    def test_sweep_defaults_apply(self):
        text = read_reference_text()
        for line in ("direction = ascending", "criterion = efficiency",
                     "stop_on_boundary = true", "tick_budget = 2000000"):
            text = text.replace(line, "")
        _, sweep = parse_config(text)
        assert sweep == SweepConfig(k_min=0.6, k_max=3.0, k_step=0.2)

    def test_validators_cover_field_constraints(self):
        plant = make_reference_plant()
        validate_plant_config(plant)  # reference passes
        from dataclasses import replace
        bad = replace(plant, heater_efficiency=1.5)
        with pytest.raises(ValidationError) as excinfo:
            validate_plant_config(bad)
        assert excinfo.value.field == "heater_efficiency"
        with pytest.raises(ValidationError):
            validate_sweep_config(SweepConfig(2.0, 1.0, 0.2))
        with pytest.raises(ValidationError):
            validate_sweep_config(SweepConfig(0.5, 2.0, 0.2,
                                              criterion="bogus"))


@pytest.fixture(scope="module")
def small_report():
    """A fast three-point sweep used for serialization tests."""
    plant, sweep = load_config(REFERENCE_INI)
    from dataclasses import replace
    return run_sweep(plant, replace(sweep, k_min=2.0, k_max=3.0, k_step=0.5))


class TestWriteReport:
    def test_row_count_and_header(self, small_report, tmp_path):
        csv_path, summary_path = write_report(small_report, tmp_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[0] == ("num,control_k,t_op,rtv,rpv,ptv,rwv,"
                            "re,pe,prf,rnt,r,e,valid")
        assert len(lines) == 1 + len(small_report.records)
        assert summary_path.read_text().startswith("criterion: efficiency\n")

    def test_round_trip_to_emitted_precision(self, small_report, tmp_path):
        csv_path, _ = write_report(small_report, tmp_path)
        back = read_operations_csv(csv_path)
        for original, parsed in zip(small_report.records, back):
            assert parsed.num == original.num
            assert parsed.valid == original.valid
            for field in ("control_k", "t_op", "rtv", "rpv", "ptv", "rwv",
                          "re", "pe", "prf", "rnt", "r", "e"):
                assert getattr(parsed, field) == pytest.approx(
                    getattr(original, field), rel=1e-8)

    def test_rewrite_is_byte_identical(self, small_report, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        paths_a = write_report(small_report, first)
        paths_b = write_report(small_report, second)
        for pa, pb in zip(paths_a, paths_b):
            assert hashlib.sha256(pa.read_bytes()).digest() == \
                hashlib.sha256(pb.read_bytes()).digest()

    def test_invalid_record_encodes_nan_indicators(self, small_report,
                                                   tmp_path):
        from dataclasses import replace
        nan = float("nan")
        broken = replace(small_report.records[0], prf=nan, rnt=nan, r=nan,
                         e=nan, valid=False)
        report = replace_records(small_report, [broken])
        csv_path, _ = write_report(report, tmp_path)
        row = csv_path.read_text().splitlines()[1].split(",")
        assert row[-1] == "0"
        assert row[9:13] == ["nan", "nan", "nan", "nan"]
        parsed = read_operations_csv(csv_path)[0]
        assert not parsed.valid
        assert math.isnan(parsed.rnt)

    def test_empty_report_refused(self, small_report, tmp_path):
        report = replace_records(small_report, [])
        with pytest.raises(ValueError):
            write_report(report, tmp_path)

    def test_no_partial_file_on_error(self, small_report, tmp_path):
        target = tmp_path / "out"
        target.mkdir()
        (target / "operations.csv").write_text("sentinel")
        bad = replace_records(small_report, [object()])  # unformattable
        with pytest.raises(Exception):
            write_report(bad, target)
        assert (target / "operations.csv").read_text() == "sentinel"


def replace_records(report, records):
    from dataclasses import replace
    from batchsim import SweepReport
    return SweepReport(records=records, criterion=report.criterion,
                       extremum=report.extremum, series=report.series,
                       pulse_times=report.pulse_times, dt=report.dt)


class TestCli:
    def test_validate_reference(self, capsys):
        rc = main(["validate", "--config", str(REFERENCE_INI)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "config: OK" in out
        assert "k_min_feasible: 0.525" in out
        assert "predicted_operations: 13" in out
        assert "heating_time_at_k_min:" in out

    def test_validate_infeasible_names_endpoint(self, tmp_path, capsys):
        # The reference floor is 0.525, so 0.5 is just below it.
        text = read_reference_text().replace("k_min = 0.6", "k_min = 0.5")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(text)
        rc = main(["validate", "--config", str(cfg)])
        out = capsys.readouterr().out
        assert rc == 1
        assert "k_min=0.5" in out

    def test_validate_bad_config_nonzero_exit(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(read_reference_text().replace("setpoint = 70.0",
                                                     "setpoint = 5.0"))
        rc = main(["validate", "--config", str(cfg)])
        err = capsys.readouterr().err
        assert rc == 1
        assert "setpoint" in err

    def test_sweep_command_writes_reports(self, tmp_path, capsys):
        text = read_reference_text().replace("k_min = 0.6", "k_min = 2.0") \
                                    .replace("k_step = 0.2", "k_step = 0.5")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(text)
        out_dir = tmp_path / "results"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out_dir)])
        assert rc == 0
        assert (out_dir / "operations.csv").exists()
        assert (out_dir / "summary.txt").exists()
        stdout = capsys.readouterr().out
        assert "extremum of 'efficiency'" in stdout
        assert len((out_dir / "operations.csv")
                   .read_text().splitlines()) == 1 + 3

    def test_run_once_command(self, tmp_path, capsys):
        out_dir = tmp_path / "results"
        rc = main(["run-once", "--config", str(REFERENCE_INI),
                   "--out", str(out_dir), "--k", "1.5"])
        assert rc == 0
        records = read_operations_csv(out_dir / "operations.csv")
        assert len(records) == 1
        assert records[0].control_k == 1.5

    def test_run_once_infeasible_k(self, tmp_path, capsys):
        rc = main(["run-once", "--config", str(REFERENCE_INI),
                   "--out", str(tmp_path), "--k", "0.2"])
        assert rc == 1
        assert "feasible" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["validate", "--config", str(tmp_path / "absent.ini")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err
