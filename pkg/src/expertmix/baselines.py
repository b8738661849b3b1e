"""Reference aggregators used in comparison runs.

All three produce :class:`~expertmix.aggregator.RoundRecord` objects so the
reporting pipeline treats them exactly like the adaptive algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .aggregator import AggregatorConfig, RoundRecord, expert_losses
from .errors import ConfigurationError, InputError
from .expweights import mixloss, weights_from_losses
from .vectorspace import as_matrix, as_vector, convex_combine


@dataclass(frozen=True)
class FixedBoundEW:
    """Exponential weights with a loss bound ``B`` fixed in advance (eta = 1/(2B^2))."""

    bound: float

    def __post_init__(self):
        if not (self.bound > 0 and np.isfinite(self.bound)):
            raise ConfigurationError(f"fixed-ew bound must be a positive finite number, got {self.bound!r}")

    @property
    def learning_rate(self) -> float:
        return 1.0 / (2.0 * self.bound * self.bound)

    @property
    def name(self) -> str:
        return f"fixed-ew:{self.bound!r}"


@dataclass(frozen=True)
class FollowLeader:
    name = "ftl"


@dataclass(frozen=True)
class Uniform:
    name = "uniform"


BaselineKind = Union[FixedBoundEW, FollowLeader, Uniform]


def baseline_step(kind: BaselineKind, cumulative_losses, predictions):
    """Weights and aggregated prediction of a baseline for one round."""
    L = np.asarray(cumulative_losses, dtype=np.float64)
    X = as_matrix(predictions, count=L.shape[0])
    n = L.shape[0]
    if isinstance(kind, FixedBoundEW):
        w = weights_from_losses(L, kind.learning_rate)
    elif isinstance(kind, FollowLeader):
        w = np.zeros(n)
        w[int(np.argmin(L))] = 1.0  # argmin returns the first minimiser
    elif isinstance(kind, Uniform):
        w = np.full(n, 1.0 / n)
    else:
        raise ConfigurationError(f"unknown baseline {kind!r}")
    return w, convex_combine(w, X)


def run_baseline(kind: BaselineKind, config: AggregatorConfig, stream: Iterable) -> list[RoundRecord]:
    L = np.zeros(config.num_experts)
    records = []
    for t, (predictions, outcome) in enumerate(stream, start=1):
        try:
            X = as_matrix(predictions, config.num_experts, config.dimension)
            omega = as_vector(outcome)
            if omega.shape[0] != config.dimension:
                raise InputError(f"outcome has dimension {omega.shape[0]}, expected {config.dimension}")
            w, agg = baseline_step(kind, L, X)
        except InputError as exc:
            raise InputError(str(exc), round_index=t) from exc
        r = omega - agg
        l = expert_losses(X, omega)
        L = L + l
        fixed = isinstance(kind, FixedBoundEW)
        records.append(
            RoundRecord(
                t=t,
                scale=kind.bound if fixed else None,
                learning_rate=kind.learning_rate if fixed else None,
                weights=w,
                aggregated=agg,
                player_loss=float(np.dot(r, r)),
                expert_losses=l,
                scale_dagger=kind.bound if fixed else None,
                mixloss=mixloss(w, l, kind.learning_rate) if fixed else None,
                algo=kind.name,
            )
        )
    return records
