"""Desk-scale simulator for a quadrotor coupled to a payload through a
variable-stiffness link, with scripted experiment scenarios, analysis
metrics, a CLI and a live teleoperation service."""

from .actuator import (ActuatorConfig, LoadCellSample, StiffnessState,
                       actuator_step, command_stiffness, load_cell_reading,
                       make_actuator_state)
from .disturbances import (DisturbanceSample, DisturbanceSignal, ImpulseEvent,
                           SustainedEvent, sample, union)
from .engine import RunResult, SimSession, run
from .metrics import (ComparisonReport, ModalPoint, RunSummary, WindowMetrics,
                      build_summary, compare_runs, modal_sweep, window_metrics)
from .model import (AxisState, DegeneratePayloadError, SimState,
                    assemble_state_matrix, blend_stiffness,
                    closed_form_solution, coupling_torque, dynamics_rhs,
                    mechanical_energy, step)
from .params import ModelParams, RESIDUAL_TIP_MASS, effective_tip_mass
from .scenario import (Scenario, ScenarioError, ScenarioSchemaError,
                       ScenarioValidationError, load_bundled, load_scenario,
                       loads)
from .telemetry import (CSV_HEADER, TelemetryRecord, read_telemetry,
                        write_telemetry)

__version__ = "0.1.0"
