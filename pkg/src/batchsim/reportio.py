"""Sweep report serialization: operations.csv and summary.txt.

Numbers are written with nine significant digits so the files are
deterministic and round-trip cleanly; invalid indicators appear as
``nan``.  Files are written to a temp name and renamed into place, so an
error can never leave a partially written report behind.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

from .econ import OperationRecord
from .sweep import SweepReport

CSV_HEADER = ["num", "control_k", "t_op", "rtv", "rpv", "ptv", "rwv",
              "re", "pe", "prf", "rnt", "r", "e", "valid"]

OPERATIONS_FILENAME = "operations.csv"
SUMMARY_FILENAME = "summary.txt"


def _fmt(value: float) -> str:
    return format(value, ".9g")


def _atomic_write(path: Path, content: str) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _record_row(rec: OperationRecord) -> list[str]:
    return [str(rec.num)] + [
        _fmt(v) for v in (rec.control_k, rec.t_op, rec.rtv, rec.rpv,
                          rec.ptv, rec.rwv, rec.re, rec.pe, rec.prf,
                          rec.rnt, rec.r, rec.e)
    ] + ["1" if rec.valid else "0"]


def write_report(report: SweepReport, output_dir) -> list[Path]:
    """Write operations.csv and summary.txt; returns the written paths."""
    if not report.records:
        raise ValueError("refusing to write an empty report")
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = [",".join(CSV_HEADER)]
    lines += [",".join(_record_row(rec)) for rec in report.records]
    csv_path = out_dir / OPERATIONS_FILENAME
    _atomic_write(csv_path, "\n".join(lines) + "\n")

    ext = report.extremum
    summary = (
        f"criterion: {report.criterion}\n"
        f"records: {len(report.records)}\n"
        f"extremum_index: {ext.index}\n"
        f"extremum_control_k: {_fmt(ext.control_k)}\n"
        f"extremum_score: {_fmt(ext.score)}\n"
    )
    summary_path = out_dir / SUMMARY_FILENAME
    _atomic_write(summary_path, summary)
    return [csv_path, summary_path]


def read_operations_csv(path) -> list[OperationRecord]:
    """Parse operations.csv back into records (round-trip support)."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(
                f"unexpected CSV header {reader.fieldnames!r} in {path}")
        for row in reader:
            records.append(OperationRecord(
                num=int(row["num"]),
                control_k=float(row["control_k"]),
                t_op=float(row["t_op"]),
                rtv=float(row["rtv"]),
                rpv=float(row["rpv"]),
                ptv=float(row["ptv"]),
                rwv=float(row["rwv"]),
                re=float(row["re"]),
                pe=float(row["pe"]),
                prf=float(row["prf"]),
                rnt=float(row["rnt"]),
                r=float(row["r"]),
                e=float(row["e"]),
                valid=row["valid"] == "1",
            ))
    return records
