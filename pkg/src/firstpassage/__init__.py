"""Mean and variance of absorption time in discrete absorbing Markov chains,
with Monte Carlo propagation of the sampling error in estimated transitions."""

__version__ = "0.1.0"

from .chain import (
    AbsorbingChainSpec,
    MomentPair,
    fundamental_matrix,
    passage_time_moments,
    validate_spec,
)
from .engine import McConfig, McResult, SweepPoint, run_mc, sweep_sample_fraction
from .errors import (
    FirstPassageError,
    InsufficientReplicates,
    InvalidProbabilityVector,
    NumericalError,
    ParseError,
    SingularSystem,
    TooManySkips,
    TrajectoryOverflow,
    ValidationError,
)
from .formats import (
    StageTable,
    load_table,
    parse_counts,
    parse_stage_table,
    stage_table_to_counts,
)
from .oracle import simulate_trajectories, simulate_trajectory, truncated_sum_moments
from .sampling import RngStream, TransitionCountTable, sample_matrix, sample_row
