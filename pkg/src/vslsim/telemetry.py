"""Telemetry records and their CSV serialization.

One record per sim step (or per configured decimation). The CSV format is a
stable contract: fixed column order, 6 decimal places, '\\n' newlines, so
identical runs produce byte-identical files suitable for golden-file tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CSV_HEADER = ("t,theta_x,theta_y,alpha_x,alpha_y,"
              "theta_dot_x,theta_dot_y,alpha_dot_x,alpha_dot_y,"
              "sigma_target,sigma_measured,k_s,c_s,"
              "tau_d_x,tau_d_y,tau_w_x,tau_w_y,"
              "load_cell,m_p,x_uav,y_uav,x_tip,y_tip,validity")

FLOAT_FIELDS = CSV_HEADER.split(",")[:-1]

_ROW_FMT = ",".join(["%.6f"] * len(FLOAT_FIELDS)) + ",%d"


@dataclass(frozen=True)
class TelemetryRecord:
    t: float
    theta_x: float
    theta_y: float
    alpha_x: float
    alpha_y: float
    theta_dot_x: float
    theta_dot_y: float
    alpha_dot_x: float
    alpha_dot_y: float
    sigma_target: float
    sigma_measured: float
    k_s: float
    c_s: float
    tau_d_x: float
    tau_d_y: float
    tau_w_x: float
    tau_w_y: float
    load_cell: float
    m_p: float
    x_uav: float
    y_uav: float
    x_tip: float
    y_tip: float
    validity: int  # 1 while the state is outside the small-angle envelope

    def csv_row(self) -> str:
        return _ROW_FMT % (
            self.t, self.theta_x, self.theta_y, self.alpha_x, self.alpha_y,
            self.theta_dot_x, self.theta_dot_y, self.alpha_dot_x, self.alpha_dot_y,
            self.sigma_target, self.sigma_measured, self.k_s, self.c_s,
            self.tau_d_x, self.tau_d_y, self.tau_w_x, self.tau_w_y,
            self.load_cell, self.m_p, self.x_uav, self.y_uav,
            self.x_tip, self.y_tip, self.validity,
        )


def render_csv(records: Sequence[TelemetryRecord]) -> str:
    if not records:
        raise ValueError("no telemetry: record list is empty")
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"


def write_telemetry(records: Sequence[TelemetryRecord], destination: str | Path) -> Path:
    """Write records as CSV. Raises ValueError on an empty record list and
    lets I/O errors (unwritable destination) propagate as OSError."""
    text = render_csv(records)
    path = Path(destination)
    path.write_text(text, newline="")
    return path


def read_telemetry(path: str | Path) -> list[TelemetryRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a telemetry CSV (bad header)")
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        values = [float(v) for v in parts[:-1]]
        records.append(TelemetryRecord(*values, validity=int(parts[-1])))
    return records


def columns(records: Iterable[TelemetryRecord]) -> dict[str, np.ndarray]:
    """Column arrays keyed by field name; the layout metrics code works on."""
    records = list(records)
    out: dict[str, np.ndarray] = {}
    for name in FLOAT_FIELDS:
        out[name] = np.array([getattr(r, name) for r in records])
    out["validity"] = np.array([r.validity for r in records], dtype=int)
    return out
