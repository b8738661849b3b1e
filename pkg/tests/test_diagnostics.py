import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import golden
from expertmix.aggregator import AggregatorConfig, run
from expertmix.baselines import FollowLeader, Uniform, run_baseline
from expertmix.diagnostics import RegretReport, certify_all_rounds, certify_round, certify_run
from expertmix.errors import PreconditionError
from expertmix.scenarios import Family, ScenarioSpec, generate
from oracle import HAND_TRACE
from test_aggregator import cfg_for, small_streams


@pytest.fixture
def hand_records():
    return run(AggregatorConfig(2, 1), HAND_TRACE)


class TestCertifyRound:
    def test_round_one(self, hand_records):
        c = certify_round(0.0, hand_records[0], None)
        assert c.ok and c.mixloss_ineq_ok
        assert c.mixloss_slack == pytest.approx(golden.M[0] - 0.25, abs=1e-15)
        assert c.mixloss_slack == pytest.approx(0.1881404, abs=1e-7)

    def test_round_two(self, hand_records):
        c = certify_round(1.0, hand_records[1], 0.5)
        assert c.ok
        # right-hand side is m_2 + 196 >= 64 + 196
        assert c.mixloss_slack + golden.H[1] >= 260.0
        assert c.mixloss_slack == pytest.approx(golden.M[1] + 196.0 - golden.H[1], rel=1e-12)

    def test_zero_loss_round(self):
        rec = run(AggregatorConfig(3, 2), [([[1.0, 1.0]] * 3, [1.0, 1.0])])[0]
        c = certify_round(0.0, rec, None)
        assert c.ok
        assert c.mixloss_slack >= 0 and c.convexity_slack >= 0

    def test_detects_inflated_loss(self, hand_records):
        bad = dataclasses.replace(hand_records[1], player_loss=hand_records[1].player_loss + 1e6)
        c = certify_round(1.0, bad, 0.5)
        assert not c.mixloss_ineq_ok and not c.convexity_ok and not c.ok

    def test_detects_eta_increase(self, hand_records):
        c = certify_round(1.0, hand_records[1], 0.1)
        assert c.eta_monotone_ok is False

    def test_unbounded_predecessor_is_compatible(self, hand_records):
        assert certify_round(0.0, hand_records[0], math.inf).eta_monotone_ok

    def test_baseline_gets_reduced_checks(self):
        rec = run_baseline(Uniform(), AggregatorConfig(2, 1), HAND_TRACE)[1]
        c = certify_round(None, rec, None)
        assert c.ok and c.mixloss_ineq_ok is None and c.eta_monotone_ok is None


class TestCertifyRun:
    def test_hand_trace(self, hand_records):
        rep = certify_run(hand_records, 2)
        assert rep.total_player_loss == pytest.approx(golden.TOTAL, rel=1e-14)
        assert rep.best_expert_loss == golden.BEST and rep.best_expert_index == 1
        assert rep.regret == pytest.approx(golden.REGRET, rel=1e-13)
        assert rep.bound_maxloss == pytest.approx(4 * (2 * math.log(2) + 1) * 100, rel=1e-15)
        assert rep.bound_maxloss == pytest.approx(golden.BOUND_MAXLOSS, rel=1e-14)
        assert rep.bound_dagger == pytest.approx(golden.BOUND_DAGGER, rel=1e-14)
        assert rep.all_ok and rep.mixloss_cum_checked

    def test_single_expert(self):
        stream = generate(ScenarioSpec("scale_burst", N=1, T=40, D=3, seed=2, p=0.2))
        rep = certify_run(run(AggregatorConfig(1, 3), stream))
        assert rep.regret == 0.0 and rep.all_ok

    def test_identical_everything(self):
        stream = [([[2.0, 3.0]] * 4, [2.0, 3.0])] * 5
        rep = certify_run(run(AggregatorConfig(4, 2), stream))
        assert rep.regret == 0.0 and rep.final_scale_dagger == 0.0
        assert rep.bound_dagger == 0.0 and rep.bound_maxloss == 0.0
        assert rep.all_ok
        assert rep.mixloss_cum_checked is False and rep.mixloss_cum_bound_ok is None

    def test_empty(self):
        with pytest.raises(PreconditionError):
            certify_run([])

    def test_baseline_report_marks_not_applicable(self):
        recs = run_baseline(FollowLeader(), AggregatorConfig(2, 1), HAND_TRACE)
        rep = certify_run(recs)
        assert rep.bound_dagger is None and rep.regret_dagger_ok is None
        assert rep.rounds_ok and rep.all_ok

    def test_regret_recomputation(self):
        stream = generate(ScenarioSpec("drifting_leader", N=6, T=300, D=2, seed=4, k=7))
        recs = run(AggregatorConfig(6, 2), stream)
        rep = certify_run(recs)
        H = math.fsum(r.player_loss for r in recs)
        L = [math.fsum(r.expert_losses[n] for r in recs) for n in range(6)]
        assert rep.regret == pytest.approx(H - min(L), rel=1e-12)
        assert rep.regret == rep.total_player_loss - rep.best_expert_loss

    def test_dict_round_trip(self, hand_records):
        rep = certify_run(hand_records)
        assert RegretReport.from_dict(rep.to_dict()).to_dict() == rep.to_dict()


@settings(max_examples=200, deadline=None)
@given(small_streams(max_n=6, max_t=12, max_d=3, lim=100.0))
def test_theorem_on_fuzzed_streams(stream):
    rep = certify_run(run(cfg_for(stream), stream))
    assert rep.all_ok, rep


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(list(Family)),
    st.integers(1, 8),
    st.integers(1, 60),
    st.integers(1, 4),
    st.integers(0, 2**64 - 1),
)
def test_theorem_on_scenarios(family, n, t, d, seed):
    stream = generate(ScenarioSpec(family, N=n, T=t, D=d, seed=seed, p=0.1, M=1e3))
    recs = run(AggregatorConfig(n, d), stream)
    certs = certify_all_rounds(recs)
    assert all(c.ok for c in certs)
    assert certify_run(recs).all_ok
