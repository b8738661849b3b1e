"""Seeded synthetic expert/outcome streams.

Randomness comes from SplitMix64, written out here so that streams are
reproducible from any language:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15        (mod 2^64)
    z = state_i
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9             (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB             (mod 2^64)
    out_i = z ^ (z >> 31)

A uniform variate is ``(out_i >> 11) * 2^-53`` in [0, 1).  A standard
normal uses two consecutive draws ``a, b`` (Box-Muller, cosine branch)::

    z = sqrt(-2 ln(1 - U(a))) * cos(2 pi U(b))

Draw layout.  Round ``t`` (1-based) owns the draws with indices
``(t - 1) * (1 + 2 N D)`` up to, but excluding, ``t * (1 + 2 N D)``:

    slot 0            event uniform (burst decision; unused by other families)
    slots 1 .. 2ND    N*D normals, expert-major then coordinate
                      (normal k = n*D + d uses draws 1 + 2k and 2 + 2k)

Every family consumes the same layout, so SCALE_BURST with ``p = 0`` is
bit-for-bit NOISY_REGRESSION.

Families (``target_d(t) = sin(2 pi t / period + 2 pi d / D)``):

NOISY_REGRESSION
    outcome = target; expert n predicts ``target + sigma_n * z_{n,d}``.
    Default ``sigma_n = sigma * (1 + n / (N - 1))``, overridable by ``sigmas``.
DRIFTING_LEADER
    As above, but in epoch ``e = (t - 1) // k`` expert n uses
    ``sigma_{(n - e) mod N}`` of the profile, so the low-noise expert
    index rotates every ``k`` rounds.
SCALE_BURST
    As NOISY_REGRESSION, but when the event uniform is ``< p`` the outcome
    is ``M * target``.
DENSITY_GRID
    Gaussian bumps of width ``width`` on D cells of [0, 1] (cell centres
    ``(j + 1/2) / D``), normalised so ``sum_j f_j^2 / D = 1``.  The outcome
    bump is centred at ``0.5 + 0.25 sin(2 pi t / period)``; expert n shifts
    that centre by ``sigma_n * z_{n,0}`` (its first normal of the round).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigurationError

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Scalar reference generator (pure Python)."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def splitmix64_block(seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` of the SplitMix64 sequence for ``seed``."""
    z = np.arange(start + 1, start + 1 + count, dtype=np.uint64)
    z *= np.uint64(GAMMA)
    z += np.uint64(seed & MASK64)
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX2)
    z ^= z >> np.uint64(31)
    return z


def to_uniform(u64: np.ndarray) -> np.ndarray:
    out = (u64 >> np.uint64(11)).astype(np.float64)
    out *= 2.0**-53
    return out


def box_muller(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    r = to_uniform(a)
    np.subtract(1.0, r, out=r)
    np.log(r, out=r)
    r *= -2.0
    np.sqrt(r, out=r)
    c = to_uniform(b)
    c *= 2.0 * np.pi
    np.cos(c, out=c)
    r *= c
    return r


class Family(str, Enum):
    NOISY_REGRESSION = "noisy_regression"
    DRIFTING_LEADER = "drifting_leader"
    SCALE_BURST = "scale_burst"
    DENSITY_GRID = "density_grid"


@dataclass(frozen=True)
class ScenarioSpec:
    family: Family
    N: int
    T: int
    D: int
    seed: int = 0
    sigma: float = 1.0
    M: float = 100.0
    p: float = 0.05
    k: int = 50
    period: float = 50.0
    width: float = 0.1
    sigmas: Optional[tuple] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            raise ConfigurationError(f"unknown scenario family {self.family!r}") from None
        if self.N < 1 or self.D < 1 or self.T < 0:
            raise ConfigurationError("need N >= 1, D >= 1, T >= 0")
        if not -(1 << 63) <= self.seed <= MASK64:
            raise ConfigurationError("seed must fit in 64 bits")
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ConfigurationError("sigma must be positive")
        if not self.M > 0 or not math.isfinite(self.M):
            raise ConfigurationError("burst magnitude M must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError("burst probability p must lie in [0, 1]")
        if self.k < 1:
            raise ConfigurationError("drift period k must be >= 1")
        if not self.period > 0 or not self.width > 0:
            raise ConfigurationError("period and width must be positive")
        if self.sigmas is not None:
            s = tuple(float(x) for x in self.sigmas)
            if len(s) != self.N:
                raise ConfigurationError(f"sigmas has {len(s)} entries for N={self.N}")
            if any(not (x >= 0 and math.isfinite(x)) for x in s):
                raise ConfigurationError("sigmas must be finite and nonnegative")
            object.__setattr__(self, "sigmas", s)

    def noise_profile(self) -> np.ndarray:
        if self.sigmas is not None:
            return np.array(self.sigmas)
        if self.N == 1:
            return np.array([self.sigma])
        return self.sigma * (1.0 + np.arange(self.N) / (self.N - 1))


@dataclass(frozen=True)
class Stream:
    """T rounds of N expert predictions and one outcome, all in R^D."""

    predictions: np.ndarray  # (T, N, D)
    outcomes: np.ndarray  # (T, D)

    def __post_init__(self):
        P = np.asarray(self.predictions, dtype=np.float64)
        O = np.asarray(self.outcomes, dtype=np.float64)
        if P.ndim != 3 or O.ndim != 2 or P.shape[0] != O.shape[0] or P.shape[2] != O.shape[1]:
            raise ConfigurationError(f"inconsistent stream shapes {P.shape} and {O.shape}")
        object.__setattr__(self, "predictions", P)
        object.__setattr__(self, "outcomes", O)

    @property
    def num_experts(self) -> int:
        return self.predictions.shape[1]

    @property
    def dimension(self) -> int:
        return self.predictions.shape[2]

    def __len__(self) -> int:
        return self.predictions.shape[0]

    def __iter__(self) -> Iterator[tuple]:
        return zip(self.predictions, self.outcomes)

    def equals(self, other: "Stream") -> bool:
        return (
            self.predictions.shape == other.predictions.shape
            and np.array_equal(self.predictions, other.predictions)
            and np.array_equal(self.outcomes, other.outcomes)
        )


_CHUNK_DRAWS = 1 << 20


def _round_draws(spec: ScenarioSpec):
    """Yield ``(t, event_uniform, normals[N, D])`` for every round."""
    per_round = 1 + 2 * spec.N * spec.D
    rounds_per_chunk = max(1, _CHUNK_DRAWS // per_round)
    t = 0
    while t < spec.T:
        r = min(rounds_per_chunk, spec.T - t)
        block = splitmix64_block(spec.seed, t * per_round, r * per_round).reshape(r, per_round)
        events = to_uniform(block[:, 0])
        normals = box_muller(block[:, 1::2], block[:, 2::2]).reshape(r, spec.N, spec.D)
        yield t, events, normals
        t += r


def _target(t: np.ndarray, D: int, period: float) -> np.ndarray:
    phase = 2.0 * np.pi * np.arange(D) / D
    return np.sin(2.0 * np.pi * t[:, None] / period + phase[None, :])


def _bumps(centres: np.ndarray, D: int, width: float) -> np.ndarray:
    x = (np.arange(D) + 0.5) / D
    f = np.exp(-((x - centres[..., None]) ** 2) / (2.0 * width * width))
    norm = np.sqrt((f * f).sum(axis=-1, keepdims=True) / D)
    flat = norm == 0.0
    return np.where(flat, 1.0, f / np.where(flat, 1.0, norm))


def generate(spec: ScenarioSpec) -> Stream:
    N, D, T = spec.N, spec.D, spec.T
    P = np.empty((T, N, D))
    O = np.empty((T, D))
    profile = spec.noise_profile()
    for start, events, z in _round_draws(spec):
        r = events.shape[0]
        t = np.arange(start + 1, start + r + 1, dtype=np.float64)
        sl = slice(start, start + r)
        if spec.family is Family.DENSITY_GRID:
            centre = 0.5 + 0.25 * np.sin(2.0 * np.pi * t / spec.period)
            shifted = centre[:, None] + profile[None, :] * z[:, :, 0]
            P[sl] = _bumps(shifted, D, spec.width)
            O[sl] = _bumps(centre, D, spec.width)
            continue
        target = _target(t, D, spec.period)
        if spec.family is Family.DRIFTING_LEADER:
            epoch = (np.arange(start, start + r) // spec.k)[:, None]
            sig = profile[(np.arange(N)[None, :] - epoch) % N]
        else:
            sig = np.broadcast_to(profile, (r, N))
        P[sl] = target[:, None, :] + sig[:, :, None] * z
        if spec.family is Family.SCALE_BURST:
            scale = np.where(events < spec.p, spec.M, 1.0)
            O[sl] = scale[:, None] * target
        else:
            O[sl] = target
    return Stream(P, O)


_INT_KEYS = {"N", "T", "D", "seed", "k"}
_FLOAT_KEYS = {"sigma", "M", "p", "period", "width"}


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse a ``key=value,key=value`` scenario string.

    Keys: ``family`` (noisy_regression | drifting_leader | scale_burst |
    density_grid), ``N``, ``T``, ``D``, ``seed`` (integers), ``sigma``,
    ``M``, ``p``, ``period``, ``width`` (floats), ``k`` (integer) and
    ``sigmas`` (colon-separated floats, one per expert).  Example::

        family=scale_burst,N=10,T=1000,D=4,seed=7,M=50,p=0.02
    """
    fields: dict = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ConfigurationError(f"malformed scenario item {item!r}")
        if key in fields:
            raise ConfigurationError(f"duplicate scenario key {key!r}")
        try:
            if key == "family":
                fields[key] = value.lower()
            elif key in _INT_KEYS:
                fields[key] = int(value, 0)
            elif key in _FLOAT_KEYS:
                fields[key] = float(value)
            elif key == "sigmas":
                fields[key] = tuple(float(x) for x in value.split(":"))
            else:
                raise ConfigurationError(f"unknown scenario key {key!r}")
        except ValueError:
            raise ConfigurationError(f"bad value for {key}: {value!r}") from None
    missing = {"family", "N", "T", "D"} - fields.keys()
    if missing:
        raise ConfigurationError(f"scenario is missing {', '.join(sorted(missing))}")
    return ScenarioSpec(**fields)
