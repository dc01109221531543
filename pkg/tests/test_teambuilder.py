import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metadiscovery.battle import BattleResult, Side
from metadiscovery.stats import UsageStats
from metadiscovery.teambuilder import (TEAM_SIZE, EpsilonSchedule, ScoreWeights, TeamBuilder, build_team,
                                       epsilon_at, inverse_pickrate_weights, meta_type_value,
                                       pick_distribution, sample_pick, score_abc, score_bsd, type_value)

import oracles
from conftest import fixture_roster, small_roster


def played(n, battles, seed):
    rng = random.Random(seed)
    s = UsageStats.empty(n)
    for _ in range(battles):
        s.record_battle(BattleResult(Side(rng.randrange(2)), 10, tuple(rng.sample(range(n), 12))))
    return s


class TestTypeValues:
    def test_single_mono_meta(self):
        # type 1 is super effective against type 0
        chart = [[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [1.0, 1.0, 1.0]]
        r = small_roster([("m", ["fire"], [80] * 6, ["fire-40"]), ("w", ["water"], [80] * 6, ["water-40"]),
                          ("g", ["grass"], [80] * 6, ["grass-40"])], chart=chart)
        assert meta_type_value(r, [0]).tolist() == [0.0, 1.0, 0.0]

    def test_neutral_chart(self):
        r = small_roster([("m", ["fire"], [80] * 6, ["fire-40"]), ("w", ["water", "grass"], [80] * 6, ["water-40"])])
        assert np.all(meta_type_value(r, [0, 1]) == 0.0)
        assert np.all(type_value(r, [0, 1]) == 0.0)

    def test_sole_counter_chain(self):
        # team is fire; water is the only type strong against fire; grass is strong against water
        chart = [[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [1.0, 2.0, 1.0]]
        r = small_roster([("f", ["fire"], [80] * 6, ["fire-40"]), ("w", ["water"], [80] * 6, ["water-40"]),
                          ("g", ["grass"], [80] * 6, ["grass-40"])], chart=chart)
        assert type_value(r, [0]).tolist() == [0.0, 0.0, 1.0]

    def test_fixture_meta_matches_oracle(self, roster50):
        meta = list(range(10))
        assert np.allclose(meta_type_value(roster50, meta), oracles.meta_type_value(roster50, meta), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 49), min_size=1, max_size=6, unique=True))
    def test_type_value_two_hop_oracle(self, roster50, team):
        assert np.allclose(type_value(roster50, team), oracles.type_value(roster50, team), atol=1e-12)


class TestScores:
    def test_abc_arithmetic(self):
        r = small_roster([("a", ["fire"], [100] * 6, ["fire-40"]), ("b", ["fire"], [80] * 6, ["fire-40"])])
        s = UsageStats.empty(2)
        s.num_battles, s.picks[:] = 10, [20, 10]
        out = score_abc(r, s, None, [], ScoreWeights.abc())
        assert out[1] == pytest.approx(0.5 * 0.8, abs=1e-15)

    def test_banned_is_zero(self, roster20):
        s = played(20, 50, 1)
        out = score_abc(roster20, s, [0, 1], [2], ScoreWeights.abc(), banned=[5, 7])
        assert out[5] == out[7] == 0.0
        dist = TeamBuilder(roster20, s, [0, 1], ScoreWeights.abc(), banned=[5, 7]).distribution([2], 0.3)
        assert dist[5] == dist[7] == 0.0 and abs(dist.sum() - 1) < 1e-12

    def test_zero_weights_mean_pickrate_alone(self, roster20):
        s = played(20, 40, 2)
        out = score_abc(roster20, s, [0, 1, 2], [4], ScoreWeights.abc(0, 0, 0))
        assert np.array_equal(out, s.picks / (2 * s.num_battles))

    def test_bsd_arithmetic(self):
        # .6 + .5*.8 + .25*.4 + .25*.2 + .1 = 1.25, assembled term by term
        terms = dict(winrate=0.6, bst=0.8, mtv=0.4, tv=0.2, pop=0.1)
        w = ScoreWeights.bsd()
        total = terms["winrate"] + w.a * terms["bst"] + w.b * terms["mtv"] + w.c * terms["tv"] + terms["pop"]
        assert total == pytest.approx(1.25, abs=1e-15)

    def test_bsd_cold_empty_team(self, roster20):
        out = score_bsd(roster20, UsageStats.empty(20), None, [], ScoreWeights.bsd())
        assert np.allclose(out, 0.5 * roster20.bst, atol=0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), c=st.sampled_from([(1, 0, 0), (0.5, 0.25, 0.25), (0, 1, 0), (0, 0, 0)]),
           team_size=st.integers(0, 5))
    def test_abc_matches_oracle(self, roster50, seed, c, team_size):
        rng = random.Random(seed)
        s = played(50, 30, seed)
        meta, team = rng.sample(range(50), 8), rng.sample(range(50), team_size)
        got = score_abc(roster50, s, meta, team, ScoreWeights.abc(*c), banned=[3])
        assert np.allclose(got, oracles.score_abc(roster50, s, meta, team, *c, banned={3}), atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), team_size=st.integers(0, 5))
    def test_bsd_matches_oracle(self, roster50, seed, team_size):
        rng = random.Random(seed)
        s = played(50, 30, seed)
        meta, team = rng.sample(range(50), 8), rng.sample(range(50), team_size)
        got = score_bsd(roster50, s, meta, team, ScoreWeights.bsd())
        assert np.allclose(got, oracles.score_bsd(roster50, s, meta, team, 0.5, 0.25, 0.25), atol=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mode=st.sampled_from(["ABC", "BSD"]))
    def test_builder_matches_direct_scores(self, roster50, seed, mode):
        rng = random.Random(seed)
        s = played(50, 30, seed)
        meta, team = rng.sample(range(50), 8), rng.sample(range(50), 3)
        w = ScoreWeights.abc(0.5, 0.25, 0.25) if mode == "ABC" else ScoreWeights.bsd()
        direct = (score_abc if mode == "ABC" else score_bsd)(roster50, s, meta, team, w)
        assert np.allclose(TeamBuilder(roster50, s, meta, w).scores(team), direct, atol=1e-12)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ScoreWeights.abc(-1, 0, 0)
        with pytest.raises(ValueError):
            ScoreWeights("XYZ")


class TestEpsilon:
    def test_bsd_endpoints(self):
        sched = EpsilonSchedule.bsd()
        assert epsilon_at(sched, 0) == 1.0
        assert epsilon_at(sched, 20_000) == 0.001
        assert epsilon_at(sched, 10_000) == pytest.approx(0.5005, abs=1e-15)
        assert epsilon_at(sched, 450_000) == 0.001

    def test_abc_fixed(self):
        assert {epsilon_at(EpsilonSchedule.abc(), b) for b in (0, 1, 10**6)} == {0.001}

    @given(st.integers(0, 50_000), st.integers(0, 50_000))
    def test_monotone(self, x, y):
        sched = EpsilonSchedule.bsd()
        lo, hi = sorted((x, y))
        assert 0.001 <= epsilon_at(sched, hi) <= epsilon_at(sched, lo) <= 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            EpsilonSchedule(0.1, 0.5)
        with pytest.raises(ValueError):
            epsilon_at(EpsilonSchedule.bsd(), -1)


class TestSampling:
    def test_greedy_single_mass(self):
        scores = np.zeros(10)
        scores[4] = 3.0
        rng = random.Random(0)
        assert {sample_pick(scores, np.full(10, 0.1), 0.0, [], None, rng) for _ in range(200)} == {4}

    def test_uniform_exploration(self):
        rng = random.Random(1)
        draws = [sample_pick(np.arange(8.0), np.full(8, 0.2), 1.0, [0], None, rng, 100) for _ in range(16_000)]
        counts = np.bincount(draws, minlength=8)
        assert counts[0] == 0
        assert np.all(np.abs(counts[1:] / 16_000 - 1 / 7) < 0.015)

    def test_all_zero_scores_explore(self):
        rng = random.Random(2)
        pick = sample_pick(np.zeros(5), np.array([0.0, 0.9, 0.9, 0.9, 0.9]), 0.0, [], None, rng, 10)
        assert pick in range(5)
        dist = pick_distribution(np.zeros(5), np.array([0.0, 0.9, 0.9, 0.9, 0.9]), 0.0, np.ones(5, bool), 10)
        assert dist.argmax() == 0

    def test_no_eligible(self):
        with pytest.raises(ValueError):
            sample_pick(np.ones(3), np.zeros(3), 0.1, [0, 1], [2], random.Random(0))

    def test_inverse_weights_cold(self):
        w = inverse_pickrate_weights(np.zeros(4), 0)
        assert np.all(w == 2.0)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), eps=st.floats(0, 1), battles=st.integers(0, 500))
    def test_distribution_matches_fraction_oracle(self, seed, eps, battles):
        rng = np.random.default_rng(seed)
        scores = rng.random(15) * (rng.random(15) < 0.7)
        pick = rng.integers(0, 2 * max(battles, 1), 15) / (2 * max(battles, 1))
        eligible = rng.random(15) < 0.8
        eligible[0] = True
        got = pick_distribution(scores, pick, eps, eligible, battles)
        assert np.allclose(got, oracles.mixture(scores, pick, eps, eligible, battles), atol=1e-12)

    def test_half_epsilon_frequencies(self, roster20):
        s = played(20, 40, 3)
        builder = TeamBuilder(roster20, s, [0, 1, 2], ScoreWeights.abc())
        scores = builder.scores([])
        expected = oracles.mixture(scores, builder.pickrate, 0.5, np.ones(20, bool), s.num_battles)
        rng = random.Random(4)
        draws = [sample_pick(scores, builder.pickrate, 0.5, [], None, rng, s.num_battles) for _ in range(100_000)]
        freq = np.bincount(draws, minlength=20) / 100_000
        assert np.max(np.abs(freq - expected)) <= 0.01


class TestTeamBuilder:
    def test_exactly_six_eligible(self, roster20):
        s = played(20, 40, 5)
        banned = list(range(6, 20))
        team = build_team(roster20, s, None, ScoreWeights.abc(), 0.0, random.Random(1), banned=banned)
        assert sorted(team) == list(range(6))

    def test_too_few_eligible(self, roster20):
        with pytest.raises(ValueError, match="eligible"):
            TeamBuilder(roster20, played(20, 10, 1), None, ScoreWeights.abc(), banned=list(range(5, 20)))

    def test_deterministic(self, roster20):
        s = played(20, 40, 6)
        builder = TeamBuilder(roster20, s, [0, 1], ScoreWeights.bsd())
        assert builder.build(0.3, random.Random(9)) == builder.build(0.3, random.Random(9))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mode=st.sampled_from(["ABC", "BSD"]), eps=st.floats(0, 1))
    def test_team_invariants(self, roster50, seed, mode, eps):
        s = played(50, 20, seed)
        w = ScoreWeights.abc(0.5, 0.25, 0.25) if mode == "ABC" else ScoreWeights.bsd()
        banned = [1, 2, 3]
        team = TeamBuilder(roster50, s, [4, 5, 6], w, banned=banned).build(eps, random.Random(seed))
        assert len(team) == TEAM_SIZE == len(set(team))
        assert not set(team) & set(banned)

    def test_dominant_score(self):
        # ten characters, one with 10x every other score: P(left out) = prod (9-k)/(19-k), k=0..5
        n = 10
        r, _ = fixture_roster(seed=3, size=12, type_count=4)
        s = UsageStats.empty(12)
        s.num_battles = 1000
        s.picks[:n] = 100
        s.picks[0] = 1000
        chart_free = TeamBuilder(r, s, None, ScoreWeights.abc(0, 0, 0), banned=[10, 11])
        rng = random.Random(7)
        hits = sum(0 in chart_free.build(0.001, rng) for _ in range(10_000)) / 10_000
        left_out = np.prod([(9 - k) / (19 - k) for k in range(6)])
        assert hits > 0.99
        assert abs(hits - (1 - left_out)) < 0.003
