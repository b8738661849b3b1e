"""Exponential-weights aggregation with a self-tuned learning rate.

Each round is split in two phases so a live caller can commit to the
aggregated prediction before the outcome is known::

    state = init(AggregatorConfig(num_experts=3, dimension=2))
    phase = predict(state, expert_predictions)
    ...                                   # use phase.aggregated
    state, record = update(state, phase, expert_predictions, outcome)

The scale ``B_t`` is the larger of the previous post-round scale and the
diameter of the current predictions; the learning rate is
``1 / (2 B_t^2)``.  After the losses are revealed, the post-round scale
jumps to ``sqrt(2) * max_n sqrt(l_n)`` whenever some expert landed farther
than ``B_t`` from the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigurationError, InputError
from .expweights import UNBOUNDED, _mixloss, _weights, is_unbounded, weights_from_losses
from .vectorspace import as_matrix, as_vector, max_pairwise_distance

__all__ = [
    "UNBOUNDED",
    "AggregatorConfig",
    "AggregatorState",
    "PredictPhase",
    "RoundRecord",
    "init",
    "predict",
    "update",
    "run",
    "weights_from_losses",
    "ExponentialAggregator",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AggregatorConfig:
    num_experts: int
    dimension: int
    # accepted for completeness; the update rules never look at it
    declared_horizon: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.num_experts, (int, np.integer)) or self.num_experts < 1:
            raise ConfigurationError(f"num_experts must be a positive integer, got {self.num_experts!r}")
        if not isinstance(self.dimension, (int, np.integer)) or self.dimension < 1:
            raise ConfigurationError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.declared_horizon is not None and self.declared_horizon < 1:
            raise ConfigurationError("declared_horizon must be positive when given")


@dataclass(frozen=True)
class AggregatorState:
    config: AggregatorConfig
    t: int
    scale_dagger: float
    cumulative_losses: np.ndarray


@dataclass(frozen=True)
class PredictPhase:
    round: int
    scale: float
    learning_rate: float
    weights: np.ndarray
    aggregated: np.ndarray


@dataclass(frozen=True)
class RoundRecord:
    """Audit trail of one round.

    ``scale``, ``learning_rate``, ``scale_dagger`` and ``mixloss`` are
    ``None`` for baselines that have no such notion.
    """

    t: int
    scale: Optional[float]
    learning_rate: Optional[float]
    weights: np.ndarray
    aggregated: np.ndarray
    player_loss: float
    expert_losses: np.ndarray
    scale_dagger: Optional[float]
    mixloss: Optional[float]
    algo: str = "paper"

    def to_dict(self) -> dict:
        eta = self.learning_rate
        if eta is not None and is_unbounded(eta):
            eta = "unbounded"
        return {
            "type": "round",
            "algo": self.algo,
            "t": self.t,
            "B": self.scale,
            "eta": eta,
            "weights": self.weights.tolist(),
            "aggregated": self.aggregated.tolist(),
            "h": self.player_loss,
            "l": self.expert_losses.tolist(),
            "B_dagger": self.scale_dagger,
            "mixloss": self.mixloss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        eta = d["eta"]
        if eta == "unbounded":
            eta = UNBOUNDED
        return cls(
            t=int(d["t"]),
            scale=_opt_float(d["B"]),
            learning_rate=_opt_float(eta),
            weights=np.asarray(d["weights"], dtype=np.float64),
            aggregated=np.asarray(d["aggregated"], dtype=np.float64),
            player_loss=float(d["h"]),
            expert_losses=np.asarray(d["l"], dtype=np.float64),
            scale_dagger=_opt_float(d["B_dagger"]),
            mixloss=_opt_float(d["mixloss"]),
            algo=d.get("algo", "paper"),
        )


def _opt_float(x):
    return None if x is None else float(x)


def init(config: AggregatorConfig) -> AggregatorState:
    return AggregatorState(
        config=config,
        t=0,
        scale_dagger=0.0,
        cumulative_losses=np.zeros(config.num_experts),
    )


def predict(state: AggregatorState, predictions) -> PredictPhase:
    cfg = state.config
    return _predict(state, as_matrix(predictions, cfg.num_experts, cfg.dimension))


def _predict(state: AggregatorState, X: np.ndarray) -> PredictPhase:
    scale = max(state.scale_dagger, max_pairwise_distance(X))
    eta = 1.0 / (2.0 * scale * scale) if scale > 0 else UNBOUNDED
    if eta == 0.0:
        raise InputError(f"scale {scale!r} too large for a positive float64 learning rate")
    # weights come straight from the exponential map, already on the simplex
    w = _weights(state.cumulative_losses, eta)
    return PredictPhase(
        round=state.t + 1,
        scale=scale,
        learning_rate=eta,
        weights=w,
        aggregated=w @ X,
    )


def expert_losses(predictions: np.ndarray, outcome: np.ndarray) -> np.ndarray:
    diff = predictions - outcome
    return np.einsum("nd,nd->n", diff, diff)


def update(state: AggregatorState, phase: PredictPhase, predictions, outcome):
    """Settle a round: charge losses, escalate the scale, advance the clock.

    Returns the new state and the round's :class:`RoundRecord`.
    """
    cfg = state.config
    if phase.round != state.t + 1:
        raise InputError(f"phase belongs to round {phase.round}, state is at round {state.t}")
    X = as_matrix(predictions, cfg.num_experts, cfg.dimension)
    return _update(state, phase, X, _outcome(outcome, cfg.dimension))


def _outcome(outcome, dim: int) -> np.ndarray:
    try:
        return as_vector(outcome, dim)
    except ConfigurationError as exc:
        raise InputError(f"outcome {exc}") from None


def _update(state: AggregatorState, phase: PredictPhase, X: np.ndarray, omega: np.ndarray):
    r = omega - phase.aggregated
    h = float(np.dot(r, r))
    l = expert_losses(X, omega)

    dagger = phase.scale
    worst = math.sqrt(float(l.max()))
    if worst > dagger:
        dagger = SQRT2 * worst

    new_state = AggregatorState(
        config=state.config,
        t=state.t + 1,
        scale_dagger=dagger,
        cumulative_losses=state.cumulative_losses + l,
    )
    record = RoundRecord(
        t=phase.round,
        scale=phase.scale,
        learning_rate=phase.learning_rate,
        weights=phase.weights,
        aggregated=phase.aggregated,
        player_loss=h,
        expert_losses=l,
        scale_dagger=dagger,
        mixloss=_mixloss(phase.weights, l, phase.learning_rate),
    )
    return new_state, record


def run(config: AggregatorConfig, stream: Iterable) -> list[RoundRecord]:
    """Play the whole stream of ``(predictions, outcome)`` rounds."""
    state = init(config)
    records = []
    for i, (predictions, outcome) in enumerate(stream, start=1):
        try:
            X = as_matrix(predictions, config.num_experts, config.dimension)
            omega = _outcome(outcome, config.dimension)
            state, record = _update(state, _predict(state, X), X, omega)
        except InputError as exc:
            raise InputError(str(exc), round_index=i) from exc
        except ConfigurationError as exc:
            raise ConfigurationError(f"round {i}: {exc}") from exc
        records.append(record)
    return records


@dataclass
class ExponentialAggregator:
    """Stateful wrapper for live use.

    >>> agg = ExponentialAggregator(AggregatorConfig(2, 1))
    >>> agg.predict([[0.0], [1.0]])
    array([0.5])
    >>> rec = agg.observe([1.0])
    >>> rec.player_loss
    0.25
    """

    config: AggregatorConfig
    state: AggregatorState = field(init=False)
    records: list = field(init=False, default_factory=list)
    _pending: Optional[tuple] = field(init=False, default=None, repr=False)

    def __post_init__(self):
        self.state = init(self.config)

    def predict(self, predictions) -> np.ndarray:
        phase = predict(self.state, predictions)
        self._pending = (phase, predictions)
        return phase.aggregated

    def observe(self, outcome) -> RoundRecord:
        if self._pending is None:
            raise InputError("observe() called before predict()")
        phase, predictions = self._pending
        self.state, record = update(self.state, phase, predictions, outcome)
        self._pending = None
        self.records.append(record)
        return record
