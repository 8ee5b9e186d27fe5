"""Desk-scale flight-control lab for an overactuated tiltrotor hexacopter.

Four controllers (nominal NMPC, adaptive-augmented NMPC, disturbance-EKF
NMPC, cascaded PID) tracking a 6-DOF reference against mismatched plant
variants, with RMSE benchmarking, a YAML config surface, and a CLI.
"""

from .allocation import (
    ActuatorCommand,
    ActuatorGeometry,
    AllocationMatrices,
    allocate,
    allocate_mismatched,
    build_matrices,
    forward_model,
    rotor_thrust_vector,
)
from .config import LabConfig, default_config, load_config, save_config
from .ekf import EkfConfig, EkfState, ekf_predict, ekf_update, solve_ocp_ekf
from .harness import (
    ExperimentSpec,
    RunMetrics,
    RunResult,
    rmse,
    run_experiment,
    sweep,
)
from .l1 import L1Config, L1State, adapt, b_matrix_inverse, l1_step, lpf_step
from .nmpc import (
    ConstraintSet,
    NmpcSolver,
    OcpError,
    OcpWeights,
    ReferenceWindow,
    SolverConfig,
    shift_warm_start,
    stage_error,
)
from .pid import PidController, PidGains, pid_wrench
from .trajectory import TrajectorySpec, reference
from .vehicle import (
    PlantPerturbation,
    VehicleParams,
    VehicleState,
    dynamics_nominal,
    dynamics_plant,
    rk4_step,
)

__version__ = "0.1.0"
