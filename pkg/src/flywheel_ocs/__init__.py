"""Two-flywheel attitude control for a free-flying rigid body: sizing, simulation and control."""

from .beanie import BeanieState, BeanieTrajectory, beanie_closed_form, beanie_simulate
from .control import (
    AttitudeController,
    AttitudeReference,
    Gains,
    allocate_to_wheels,
    backflip_reference,
    feedback_torque,
    saturate,
    setpoint_reference,
)
from .design import (
    DesignError,
    FlywheelSpec,
    InfeasibleDesignError,
    OcsParams,
    allocation_matrix,
    hollow_cylinder_inertia,
    min_flywheel_inertia,
    optimal_incident_angle,
    solve_inner_radius,
    split_inertia,
)
from .dynamics import (
    BodyState,
    DisturbancePulse,
    RobotParams,
    SimulationDiverged,
    Trajectory,
    detect_touchdown,
    dynamics_derivative,
    rk4_step,
    simulate,
    simulate_flight,
    total_angular_momentum_world,
)
from .harness import RunSummary, compare, design_report, read_csv, run, write_csv
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .so3 import (
    Quaternion,
    attitude_error,
    inertia_tensor,
    integrate_attitude,
    quat_multiply,
    rotate_world_from_body,
)

__version__ = "0.1.0"
