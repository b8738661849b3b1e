"""Exponential-weights aggregation of expert predictions under unbounded quadratic loss."""

from .aggregator import (
    UNBOUNDED,
    AggregatorConfig,
    AggregatorState,
    ExponentialAggregator,
    PredictPhase,
    RoundRecord,
    init,
    predict,
    run,
    update,
)
from .baselines import FixedBoundEW, FollowLeader, Uniform, baseline_step, run_baseline
from .diagnostics import RegretReport, RoundCertificate, certify_round, certify_run
from .errors import (
    ConfigurationError,
    ExpertMixError,
    InputError,
    InvariantViolation,
    PreconditionError,
    StreamParseError,
)
from .expweights import mixloss, weights_from_losses
from .scenarios import Family, ScenarioSpec, Stream, generate, parse_scenario
from .streamio import read_stream, write_stream

__version__ = "0.1.0"
