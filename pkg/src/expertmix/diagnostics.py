"""Per-round and per-run certificates for the regret guarantee.

Every inequality is checked with an additive slack of ``1e-9`` times the
largest magnitude involved (and at least ``1e-9``).  Failures are reported,
never raised.

Checked per round (adaptive algorithm only, except where noted):

* weights on the simplex (all algorithms)
* ``h_t <= max_n l_t^n`` (all algorithms)
* learning rate nonincreasing, scale consistency ``B_t >= B_dagger_{t-1}``,
  ``B_dagger_t >= B_t``
* ``h_t <= m_t(eta_t) + B_dagger_t^2 - B_t^2``

Checked per run:

* ``sum_t m_t(eta_t) <= ln N / eta_T + min_n L_T^n``
* ``B_dagger_T <= 2 max_{t,n} sqrt(l_t^n)``
* ``R_T <= (2 ln N + 1) B_dagger_T^2 <= 4 (2 ln N + 1) max_{t,n} l_t^n``
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .aggregator import RoundRecord
from .errors import PreconditionError
from .expweights import is_unbounded, mixloss
from .vectorspace import NEGATIVE_DUST, SIMPLEX_TOL

__all__ = ["mixloss", "RoundCertificate", "RegretReport", "certify_round", "certify_run", "REL_TOL"]

REL_TOL = 1e-9
DIAMETER_TOL = 1e-12


def _tol(*magnitudes: float) -> float:
    return REL_TOL * max(1.0, *(abs(m) for m in magnitudes))


@dataclass(frozen=True)
class RoundCertificate:
    t: int
    simplex_ok: bool
    convexity_ok: bool
    convexity_slack: float
    # None marks a check that does not apply (baseline records)
    eta_monotone_ok: Optional[bool] = None
    scale_ok: Optional[bool] = None
    mixloss_ineq_ok: Optional[bool] = None
    mixloss_slack: Optional[float] = None
    simplex_slack: float = 0.0

    @property
    def ok(self) -> bool:
        return all(
            v is not False
            for v in (self.simplex_ok, self.convexity_ok, self.eta_monotone_ok, self.scale_ok, self.mixloss_ineq_ok)
        )


def _simplex(weights: np.ndarray):
    total = float(weights.sum())
    slack = SIMPLEX_TOL - abs(total - 1.0)
    ok = slack >= 0 and bool((weights >= -NEGATIVE_DUST).all())
    return ok, slack


def certify_round(prev_dagger: Optional[float], record: RoundRecord, prev_eta: Optional[float]) -> RoundCertificate:
    """Certify one round.

    ``prev_dagger`` and ``prev_eta`` are the post-round scale and the
    learning rate of the previous round (``0.0`` and ``None`` for the first
    round).  Baseline records (``record.algo != "paper"``) get the simplex
    and convexity checks only.
    """
    h = record.player_loss
    lmax = float(record.expert_losses.max())
    simplex_ok, simplex_slack = _simplex(record.weights)
    convexity_slack = lmax - h
    convexity_ok = convexity_slack >= -_tol(h, lmax)

    if record.algo != "paper":
        return RoundCertificate(
            t=record.t,
            simplex_ok=simplex_ok,
            simplex_slack=simplex_slack,
            convexity_ok=convexity_ok,
            convexity_slack=convexity_slack,
        )

    eta = record.learning_rate
    if prev_eta is None or is_unbounded(prev_eta):
        eta_ok = True
    elif is_unbounded(eta):
        eta_ok = False
    else:
        eta_ok = eta <= prev_eta + _tol(eta, prev_eta)

    B, Bd = record.scale, record.scale_dagger
    prev = prev_dagger or 0.0
    scale_ok = B >= prev and Bd >= B

    m = record.mixloss
    rhs = m + Bd * Bd - B * B
    mix_slack = rhs - h
    mix_ok = mix_slack >= -_tol(h, m, Bd * Bd, B * B)

    return RoundCertificate(
        t=record.t,
        simplex_ok=simplex_ok,
        simplex_slack=simplex_slack,
        convexity_ok=convexity_ok,
        convexity_slack=convexity_slack,
        eta_monotone_ok=eta_ok,
        scale_ok=scale_ok,
        mixloss_ineq_ok=mix_ok,
        mixloss_slack=mix_slack,
    )


@dataclass
class RegretReport:
    algo: str
    num_experts: int
    rounds: int
    total_player_loss: float
    best_expert_loss: float
    best_expert_index: int
    regret: float
    max_expert_loss: float
    final_scale_dagger: Optional[float]
    final_learning_rate: Optional[float]
    bound_dagger: Optional[float]
    bound_maxloss: float
    # bound checks: True / False, or None when not applicable to this run
    regret_dagger_ok: Optional[bool]
    regret_maxloss_ok: Optional[bool]
    bound_chain_ok: Optional[bool]
    mixloss_cum_bound_ok: Optional[bool]
    mixloss_cum_checked: bool
    dagger_dominated_ok: Optional[bool]
    rounds_ok: bool
    failed_rounds: list = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        checks = (
            self.regret_dagger_ok,
            self.regret_maxloss_ok,
            self.bound_chain_ok,
            self.mixloss_cum_bound_ok,
            self.dagger_dominated_ok,
            self.rounds_ok,
        )
        return all(c is not False for c in checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["final_learning_rate"] is not None and is_unbounded(d["final_learning_rate"]):
            d["final_learning_rate"] = "unbounded"
        d["all_ok"] = self.all_ok
        return {"type": "report", **d}

    @classmethod
    def from_dict(cls, d: dict) -> "RegretReport":
        d = {k: v for k, v in d.items() if k not in ("type", "all_ok")}
        if d.get("final_learning_rate") == "unbounded":
            d["final_learning_rate"] = math.inf
        return cls(**d)


def certify_all_rounds(records: Sequence[RoundRecord]) -> list[RoundCertificate]:
    certs = []
    prev_dagger, prev_eta = 0.0, None
    for rec in records:
        certs.append(certify_round(prev_dagger, rec, prev_eta))
        prev_dagger, prev_eta = rec.scale_dagger, rec.learning_rate
    return certs


def certify_run(
    records: Sequence[RoundRecord],
    num_experts: Optional[int] = None,
    certificates: Optional[Sequence[RoundCertificate]] = None,
) -> RegretReport:
    """Build the :class:`RegretReport` for a finished run.

    ``certificates`` may carry the output of :func:`certify_all_rounds` for
    the same records, to avoid recomputing it.
    """
    if len(records) == 0:
        raise PreconditionError("cannot certify an empty run")
    n = num_experts if num_experts is not None else records[0].expert_losses.shape[0]
    algo = records[0].algo
    paper = algo == "paper"

    certs = certificates if certificates is not None else certify_all_rounds(records)
    failed = [c.t for c in certs if not c.ok]

    H = 0.0
    L = np.zeros(n)
    lmax = 0.0
    sum_m = 0.0
    for rec in records:
        H += rec.player_loss
        L += rec.expert_losses
        lmax = max(lmax, float(rec.expert_losses.max()))
        if paper:
            sum_m += rec.mixloss
    best = int(np.argmin(L))
    best_loss = float(L[best])
    regret = H - best_loss
    log_n = math.log(n)
    bound_maxloss = 4.0 * (2.0 * log_n + 1.0) * lmax

    rep = dict(
        algo=algo,
        num_experts=n,
        rounds=len(records),
        total_player_loss=H,
        best_expert_loss=best_loss,
        best_expert_index=best,
        regret=regret,
        max_expert_loss=lmax,
        bound_maxloss=bound_maxloss,
        rounds_ok=not failed,
        failed_rounds=failed,
    )
    if not paper:
        return RegretReport(
            **rep,
            final_scale_dagger=None,
            final_learning_rate=None,
            bound_dagger=None,
            regret_dagger_ok=None,
            regret_maxloss_ok=None,
            bound_chain_ok=None,
            mixloss_cum_bound_ok=None,
            mixloss_cum_checked=False,
            dagger_dominated_ok=None,
        )

    last = records[-1]
    dagger = last.scale_dagger
    eta_T = last.learning_rate
    bound_dagger = (2.0 * log_n + 1.0) * dagger * dagger

    if is_unbounded(eta_T):
        cum_ok, cum_checked = None, False
    else:
        rhs = log_n / eta_T + best_loss
        cum_ok, cum_checked = sum_m <= rhs + _tol(sum_m, rhs), True

    return RegretReport(
        **rep,
        final_scale_dagger=dagger,
        final_learning_rate=eta_T,
        bound_dagger=bound_dagger,
        regret_dagger_ok=regret <= bound_dagger + _tol(regret, bound_dagger, H),
        regret_maxloss_ok=regret <= bound_maxloss + _tol(regret, bound_maxloss, H),
        bound_chain_ok=bound_dagger <= bound_maxloss + _tol(bound_dagger, bound_maxloss),
        mixloss_cum_bound_ok=cum_ok,
        mixloss_cum_checked=cum_checked,
        dagger_dominated_ok=dagger <= 2.0 * math.sqrt(lmax) * (1.0 + DIAMETER_TOL),
    )
