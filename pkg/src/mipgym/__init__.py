"""Branch-and-bound MIP solving with exposed decision points.

The package centres on an exact branch-and-bound engine whose branching and
parameter decisions are surfaced through Gym-style environments:

- :mod:`mipgym.model` — problem data (:class:`MipInstance`) and LP/JSON file I/O.
- :mod:`mipgym.lp` — bounded-variable revised simplex with warm starts.
- :mod:`mipgym.engine` — the exact branch-and-bound solver.
- :mod:`mipgym.env` — :class:`Branching`, :class:`Configuring`, and
  :class:`DefaultSolve` environments over the engine.
- :mod:`mipgym.observations` — bipartite and per-candidate feature extractors.
- :mod:`mipgym.rewards` — composable per-step reward functions.
- :mod:`mipgym.generators` — seeded benchmark-instance generators.
- :mod:`mipgym.policies` — baseline branching policies.
- :mod:`mipgym.runner` — parallel benchmark episodes and report tables.
- :mod:`mipgym.cli` — the ``mipgym`` command-line entry point.
"""

from mipgym.engine import (
    PARAMETER_SPACE,
    BranchCandidateSet,
    Engine,
    EngineEvent,
    EngineStatus,
    Limits,
    solve_instance,
)
from mipgym.env import (
    Branching,
    Configuring,
    DefaultSolve,
    EnvironmentBase,
    ParameterSpace,
    make_env,
)
from mipgym.errors import (
    ConfigurationError,
    EnvProtocolError,
    GenerationError,
    InvalidActionError,
    ParameterError,
    ParseError,
    StructureError,
    UnsupportedFeatureError,
)
from mipgym.generators import (
    CapacitatedFacilityLocation,
    CombinatorialAuction,
    GeneratorConfig,
    InstanceGenerator,
    MaximumIndependentSet,
    SetCover,
    make_generator,
    preset,
)
from mipgym.lp import (
    BasisStatus,
    LinearProgram,
    LpSolution,
    LpStatus,
    SimplexWorkspace,
    solve_lp,
)
from mipgym.model import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    MAXIMIZE,
    MINIMIZE,
    Constraint,
    MipInstance,
    Variable,
    read_problem,
    stats,
    write_problem,
)
from mipgym.observations import (
    CandidateFeatures,
    CandidateFeaturesObs,
    NoObservation,
    NodeBipartite,
    NodeBipartiteObs,
)
from mipgym.policies import (
    MostInfeasiblePolicy,
    Policy,
    PseudocostPolicy,
    RandomPolicy,
    StrongBranching,
    make_policy,
)
from mipgym.rewards import (
    DualIntegral,
    IsDone,
    LPIterations,
    NNodes,
    PrimalDualIntegral,
    PrimalIntegral,
    RewardFunction,
    SolvingTime,
)
from mipgym.runner import (
    BenchmarkReport,
    EpisodeRow,
    report_table,
    run_episodes,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "MipInstance", "Variable", "Constraint", "stats",
    "read_problem", "write_problem",
    "MINIMIZE", "MAXIMIZE", "BINARY", "INTEGER", "CONTINUOUS",
    # lp
    "LinearProgram", "LpSolution", "LpStatus", "BasisStatus",
    "SimplexWorkspace", "solve_lp",
    # engine
    "Engine", "EngineEvent", "EngineStatus", "BranchCandidateSet",
    "Limits", "PARAMETER_SPACE", "solve_instance",
    # environments
    "EnvironmentBase", "Branching", "Configuring", "DefaultSolve",
    "ParameterSpace", "make_env",
    # observations
    "NodeBipartite", "NodeBipartiteObs",
    "CandidateFeatures", "CandidateFeaturesObs", "NoObservation",
    # rewards
    "RewardFunction", "NNodes", "LPIterations", "SolvingTime", "IsDone",
    "PrimalIntegral", "DualIntegral", "PrimalDualIntegral",
    # generators
    "InstanceGenerator", "CombinatorialAuction", "SetCover",
    "CapacitatedFacilityLocation", "MaximumIndependentSet",
    "GeneratorConfig", "make_generator", "preset",
    # policies
    "Policy", "RandomPolicy", "MostInfeasiblePolicy", "PseudocostPolicy",
    "StrongBranching", "make_policy",
    # runner
    "run_episodes", "BenchmarkReport", "EpisodeRow", "report_table",
    # errors
    "ConfigurationError", "EnvProtocolError", "GenerationError",
    "InvalidActionError", "ParameterError", "ParseError",
    "StructureError", "UnsupportedFeatureError",
]
