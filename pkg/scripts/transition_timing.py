#!/usr/bin/env python3
"""Measure the flexible->rigid transition with different tip payloads.

The drive never sees the payload, so the measured sigma traces coincide and
the settle time stays ~7.8 s for every mass. Writes one trace CSV per payload
and prints the settle times; the load-cell column shows the holding-effort
step that accompanies rigidization.
"""

import argparse
from pathlib import Path

from vslsim.actuator import settle_time
from vslsim.engine import run
from vslsim.scenario import loads
from vslsim.telemetry import write_telemetry

TEMPLATE = """
schema_version: 1
name: transition_{m_p}
duration: 12.0
dt: 0.001
params: {{m_p: {m_p}}}
stiffness_schedule:
  - {{t: 0.0, sigma: 0.0}}
  - {{t: 1.0, sigma: 1.0}}
"""


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/transition", type=Path)
    parser.add_argument("--masses", default="0.3,2.0",
                        help="comma-separated tip masses, kg")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for m_p in (float(v) for v in args.masses.split(",")):
        result = run(loads(TEMPLATE.format(m_p=m_p)))
        write_telemetry(result.records, args.out / f"trace_m{m_p:g}.csv")
        trace = [(r.t - 1.0, r.sigma_measured) for r in result.records if r.t >= 1.0]
        settle = settle_time(trace, 0.0, 1.0)
        cell0 = result.records[0].load_cell
        cell1 = result.records[-1].load_cell
        print(f"m_p={m_p:g} kg: settle {settle:.3f} s, "
              f"load cell {cell0:.2f} -> {cell1:.2f} N")


if __name__ == "__main__":
    main()
