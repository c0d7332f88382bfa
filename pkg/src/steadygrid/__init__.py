"""steadygrid: robust steady-state solver for transmission and distribution grids.

Networks (positive sequence or three phase) are modeled as equivalent
circuits in rectangular current/voltage coordinates, solved by Newton-Raphson
with circuit-style limiting, and driven to convergence from arbitrary starts
by continuation (series shorting or power stepping).
"""

from .network import (
    BigLoad,
    Branch,
    Bus,
    BusKind,
    Connection,
    Generator,
    Network,
    PhaseDomain,
    Shunt,
    Transformer,
    ZipLoad,
    validate,
)
from .caseio import load_case, parse_case, write_case, write_solution
from .indexing import IndexMap, StateVector
from .nr import NrOptions, check_convergence
from .homotopy import HomotopySchedule, power_transform, run_homotopy, tx_transform
from .solver import (
    InitSpec,
    MismatchReport,
    SolveReport,
    SolverOptions,
    initialize_state,
    solve,
    validate_solution,
)
from .reference import dense_reference_solve
from .analyses import ContingencySet, Outage, SweepSpec, run_contingencies, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BigLoad",
    "Branch",
    "Bus",
    "BusKind",
    "Connection",
    "ContingencySet",
    "Generator",
    "HomotopySchedule",
    "IndexMap",
    "InitSpec",
    "MismatchReport",
    "Network",
    "NrOptions",
    "Outage",
    "PhaseDomain",
    "Shunt",
    "SolveReport",
    "SolverOptions",
    "StateVector",
    "SweepSpec",
    "Transformer",
    "ZipLoad",
    "check_convergence",
    "dense_reference_solve",
    "initialize_state",
    "load_case",
    "parse_case",
    "power_transform",
    "run_contingencies",
    "run_homotopy",
    "run_sweep",
    "solve",
    "tx_transform",
    "validate",
    "validate_solution",
    "write_case",
    "write_solution",
]
