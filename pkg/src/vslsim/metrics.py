"""Quantitative analysis of telemetry: per-window signal metrics, modal
analysis across the stiffness blend, and run-to-run comparison.

Windows are the named [t0, t1] spans a scenario declares (its flexible /
rigid phases). Angle metrics treat the two axes as one planar vector, so a
single-axis experiment reads the same as its per-axis trace.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .model import assemble_state_matrix
from .params import ModelParams, effective_tip_mass
from .telemetry import TelemetryRecord, columns

# A mode's amplitude must fall below this fraction of its in-window peak to
# count as settled.
SETTLE_FRACTION = 0.05

DEFAULT_MODAL_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class WindowMetrics:
    label: str
    t0: float
    t1: float
    sigma_mean: float
    rms_theta: float          # rad
    rms_alpha: float          # rad
    peak_theta: float         # rad
    peak_alpha: float         # rad
    settling_time: float      # s after the last in-window disturbance
    transmissibility: float   # RMS(theta)/RMS(alpha)
    rms_tracking: float       # RMS(alpha - theta)
    peak_tracking: float      # max |alpha - theta|


@dataclass(frozen=True)
class ModalPoint:
    sigma: float
    eigenvalues: tuple[complex, ...]      # all four, sorted by imag then real
    frequencies: tuple[float, ...]        # distinct natural frequencies |lambda|, ascending
    damping_ratios: tuple[float, ...]     # aligned with frequencies
    max_real_part: float


@dataclass(frozen=True)
class RunSummary:
    name: str
    duration: float
    dt: float
    n_records: int
    validity_breaches: int
    windows: tuple[WindowMetrics, ...]
    modal: tuple[ModalPoint, ...]
    params: ModelParams


def _vector_norm(cols: dict, a: str, b: str) -> np.ndarray:
    return np.hypot(cols[a], cols[b])


def window_metrics(records: Sequence[TelemetryRecord], t0: float, t1: float,
                   label: str = "") -> WindowMetrics:
    """Signal metrics over [t0, t1]. Transmissibility is 0/0 := 0 so an
    all-quiet window reads as zero coupling rather than an error."""
    if not t1 > t0:
        raise ValueError(f"window must have t1 > t0, got [{t0}, {t1}]")
    records = list(records)
    if not records:
        raise ValueError("no records")
    if t0 < records[0].t - 1e-9 or t1 > records[-1].t + 1e-9:
        raise ValueError(
            f"window [{t0}, {t1}] outside record range "
            f"[{records[0].t}, {records[-1].t}]")
    selected = [r for r in records if t0 - 1e-12 <= r.t <= t1 + 1e-12]
    if not selected:
        raise ValueError(f"window [{t0}, {t1}] contains no records")
    cols = columns(selected)

    theta = _vector_norm(cols, "theta_x", "theta_y")
    alpha = _vector_norm(cols, "alpha_x", "alpha_y")
    track = np.hypot(cols["alpha_x"] - cols["theta_x"],
                     cols["alpha_y"] - cols["theta_y"])
    rms_theta = float(np.sqrt(np.mean(theta ** 2)))
    rms_alpha = float(np.sqrt(np.mean(alpha ** 2)))
    peak_alpha = float(np.max(alpha))

    if rms_alpha == 0.0:
        transmissibility = 0.0 if rms_theta == 0.0 else math.inf
    else:
        transmissibility = rms_theta / rms_alpha

    t = cols["t"]
    forcing = (np.abs(cols["tau_d_x"]) + np.abs(cols["tau_d_y"])
               + np.abs(cols["tau_w_x"]) + np.abs(cols["tau_w_y"]))
    active = np.nonzero(forcing > 0.0)[0]
    t_ref = float(t[active[-1]]) if active.size else float(t[0])

    if peak_alpha == 0.0:
        settling = 0.0
    else:
        threshold = SETTLE_FRACTION * peak_alpha
        after = np.nonzero(t >= t_ref)[0]
        quiet = alpha[after] < threshold
        # first index from which the deflection stays below threshold
        settled_idx = None
        run_ok = np.flip(np.cumprod(np.flip(quiet)))  # 1 where quiet until the end
        hits = np.nonzero(run_ok)[0]
        if hits.size:
            settled_idx = after[hits[0]]
        settling = float(t[settled_idx] - t_ref) if settled_idx is not None else float(t1 - t_ref)

    return WindowMetrics(
        label=label, t0=t0, t1=t1,
        sigma_mean=float(np.mean(cols["sigma_measured"])),
        rms_theta=rms_theta, rms_alpha=rms_alpha,
        peak_theta=float(np.max(theta)), peak_alpha=peak_alpha,
        settling_time=settling,
        transmissibility=transmissibility,
        rms_tracking=float(np.sqrt(np.mean(track ** 2))),
        peak_tracking=float(np.max(track)),
    )


def modal_point(sigma: float, params: ModelParams, m_p: Optional[float] = None,
                merge_rtol: float = 1e-9) -> ModalPoint:
    A = assemble_state_matrix(sigma, params, m_p=m_p)
    lam = [complex(z) for z in np.linalg.eigvals(A)]
    lam.sort(key=lambda z: (round(abs(z), 12), z.imag))
    freqs: list[float] = []
    damps: list[float] = []
    for z in lam:
        w = abs(z)
        zeta = 1.0 if w == 0.0 else -z.real / w
        if not any(math.isclose(f, w, rel_tol=merge_rtol, abs_tol=1e-12) for f in freqs):
            freqs.append(w)
            damps.append(zeta)
    order = np.argsort(freqs)
    return ModalPoint(
        sigma=sigma,
        eigenvalues=tuple(lam),
        frequencies=tuple(float(freqs[i]) for i in order),
        damping_ratios=tuple(float(damps[i]) for i in order),
        max_real_part=float(max(z.real for z in lam)),
    )


def modal_sweep(params: ModelParams, sigma_grid: Sequence[float] = DEFAULT_MODAL_GRID,
                m_p: Optional[float] = None) -> list[ModalPoint]:
    """Eigenstructure of the coupled axis across the stiffness blend. For
    non-negative damping every point has max real part <= 0 (the blend never
    destabilizes the system); stiffening raises the natural frequencies."""
    for s in sigma_grid:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"sigma grid value out of [0, 1]: {s}")
    return [modal_point(float(s), params, m_p=m_p) for s in sigma_grid]


def build_summary(result, modal_grid: Sequence[float] = DEFAULT_MODAL_GRID) -> RunSummary:
    """Summarize a RunResult: metrics for each scenario analysis window plus
    a modal table at the scenario's parameters."""
    sc = result.scenario
    windows = tuple(
        window_metrics(result.records, w.t0, w.t1, label=w.label)
        for w in sc.analysis_windows
    )
    modal = tuple(modal_sweep(sc.params, modal_grid,
                              m_p=effective_tip_mass(sc.params.m_p)))
    return RunSummary(
        name=sc.name, duration=sc.duration, dt=sc.dt,
        n_records=len(result.records),
        validity_breaches=result.breach_steps,
        windows=windows, modal=modal, params=sc.params,
    )


@dataclass(frozen=True)
class WindowComparison:
    label: str
    ratios: dict[str, float]   # metric -> a/b
    dominant: str              # "a", "b" or "mixed"


@dataclass(frozen=True)
class ComparisonReport:
    windows: tuple[WindowComparison, ...]


_RATIO_METRICS = ("rms_theta", "rms_alpha", "peak_theta", "peak_alpha",
                  "transmissibility", "rms_tracking", "peak_tracking",
                  "settling_time")


def _ratio(a: float, b: float) -> float:
    if a == b:
        return 1.0
    if b == 0.0:
        return math.inf
    return a / b


def compare_runs(a: RunSummary, b: RunSummary) -> ComparisonReport:
    """Per-window metric ratios between two runs of the same scenario family,
    matched by window label. A run dominates a window when both its tip
    oscillation (peak_alpha) and its tracking error (peak_tracking) are
    strictly smaller."""
    labels_a = [w.label for w in a.windows]
    labels_b = [w.label for w in b.windows]
    if labels_a != labels_b:
        only_a = [l for l in labels_a if l not in labels_b]
        only_b = [l for l in labels_b if l not in labels_a]
        raise ValueError(
            f"window mismatch: only in a: {only_a}; only in b: {only_b}")
    comparisons = []
    for wa, wb in zip(a.windows, b.windows):
        ratios = {m: _ratio(getattr(wa, m), getattr(wb, m)) for m in _RATIO_METRICS}
        if wa.peak_alpha < wb.peak_alpha and wa.peak_tracking < wb.peak_tracking:
            dominant = "a"
        elif wb.peak_alpha < wa.peak_alpha and wb.peak_tracking < wa.peak_tracking:
            dominant = "b"
        else:
            dominant = "mixed"
        comparisons.append(WindowComparison(label=wa.label, ratios=ratios,
                                            dominant=dominant))
    return ComparisonReport(windows=tuple(comparisons))


# -- serialization ----------------------------------------------------------

def summary_to_dict(summary: RunSummary) -> dict:
    return {
        "summary_version": 1,
        "name": summary.name,
        "duration": summary.duration,
        "dt": summary.dt,
        "n_records": summary.n_records,
        "validity_breaches": summary.validity_breaches,
        "params": asdict(summary.params),
        "windows": [asdict(w) for w in summary.windows],
        "modal": [
            {
                "sigma": m.sigma,
                "frequencies": list(m.frequencies),
                "damping_ratios": list(m.damping_ratios),
                "max_real_part": m.max_real_part,
                "eigenvalues": [[z.real, z.imag] for z in m.eigenvalues],
            }
            for m in summary.modal
        ],
    }


def write_summary(summary: RunSummary, destination: str | Path) -> Path:
    path = Path(destination)
    path.write_text(yaml.safe_dump(summary_to_dict(summary), sort_keys=False))
    return path


WINDOW_CSV_HEADER = ("label,t0,t1,sigma_mean,rms_theta,rms_alpha,peak_theta,"
                     "peak_alpha,settling_time,transmissibility,rms_tracking,"
                     "peak_tracking")


def write_window_csv(windows: Sequence[WindowMetrics], destination: str | Path,
                     extra_column: Optional[tuple[str, Sequence[float]]] = None) -> Path:
    """Flat CSV of window metrics for plotting; optionally prefixed with a
    sweep-parameter column."""
    lines = []
    if extra_column is not None:
        name, values = extra_column
        lines.append(f"{name},{WINDOW_CSV_HEADER}")
        for v, w in zip(values, windows):
            lines.append(f"{v:.6g}," + _window_row(w))
    else:
        lines.append(WINDOW_CSV_HEADER)
        lines.extend(_window_row(w) for w in windows)
    path = Path(destination)
    path.write_text("\n".join(lines) + "\n")
    return path


def _window_row(w: WindowMetrics) -> str:
    vals = (w.t0, w.t1, w.sigma_mean, w.rms_theta, w.rms_alpha, w.peak_theta,
            w.peak_alpha, w.settling_time, w.transmissibility, w.rms_tracking,
            w.peak_tracking)
    return w.label + "," + ",".join(f"{v:.6g}" for v in vals)
