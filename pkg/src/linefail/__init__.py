"""Phase-field damage and failure-probability model of an overhead conductor span."""

__version__ = "0.1.0"

from .config import ConfigError, ConfigFile, dump_config, load_config, parse_config
from .ensemble import EnsembleResult, run_mc, run_pcm
from .environment import LoadParams, SagChain, ScenarioConfig, loads_at, tension_at
from .fem import Mesh1D, MeshError, SingularSystemError, build_mesh, solve_tridiagonal
from .physics import FieldState, MaterialParams, MaterialSeveredError
from .simulator import MeshSpec, RunConfig, RunResult, SimulationError, failure_indicator, run
from .stochastic import (
    CollocationGrid,
    RandomParam,
    expectation,
    gauss_nodes,
    probability_of_failure,
    relative_error,
    sobol_first_order,
    std_dev,
)
from .units import convert_units

__all__ = [name for name in dir() if not name.startswith("_")]
