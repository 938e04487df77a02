"""Joint offloading order and transmit power optimisation for single-user
mobile-edge computing."""

__version__ = "0.1.0"

from .core import (
    ChannelConfig,
    DomainError,
    InfeasiblePowerError,
    UNBOUNDED,
    db_to_linear,
    dbm_to_watts,
    phi,
    phi_closed_form,
    psi,
    psi_derivatives,
    rate,
    rate_inverse_to_power,
    xi_lower_bound,
)
from .delay import (
    Instance,
    ObjectiveValue,
    ServerConfig,
    TaskSpec,
    Timeline,
    exec_time,
    makespan_closed_form,
    objective,
    timeline,
    transmit_energy,
    tx_time,
)
from .flowshop import JohnsonPartition, johnson_schedule, partition
from .powercrt import P3Problem, P3Solution, build_p3, check_monotonicity, objective_in_xi, solve_p3
from .altmin import AltMinConfig, SolveReport, alternate
from .oracle import OracleResult, OracleSizeError, brute_force_schedule, grid_power_search, joint_brute_force, nested_power_search
