"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints in order.
"""
import dataclasses
import math
import os
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from metadiscovery import harness
from metadiscovery.agents import make_agent
from metadiscovery.battle import BattleTables, Side, run_battle
from metadiscovery.discovery import MetaSnapshot, RankEntry, RunConfig, run_discovery
from metadiscovery.fixtures import write_fixture
from metadiscovery.metrics import (edit_distance, edit_distance_delta, naive_baseline, overlap, spearman,
                                   tier_capture)
from metadiscovery.roster import load_roster
from metadiscovery.stats import UsageStats, pickrates
from metadiscovery.teambuilder import (EpsilonSchedule, ScoreWeights, epsilon_at, pick_distribution,
                                       sample_pick, score_abc, score_bsd)

import oracles
from conftest import VERDICTS

GATE_THROUGHPUT = os.environ.get("METADISCO_GATE_THROUGHPUT") == "1"


@contextmanager
def criterion(n, label):
    notes = []
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as err:
        verdict = f"FAIL {label} ({type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''})"
        raise
    else:
        verdict = f"PASS {label}"
    finally:
        extra = "; ".join(notes)
        line = f"{verdict} [{time.perf_counter() - start:.1f}s{'; ' + extra if extra else ''}]"
        VERDICTS[f"criterion {n}:"] = line
        print(f"criterion {n}: {line}")


def snap(species, meta_size):
    return MetaSnapshot(tuple(RankEntry(s, 0.0) for s in species), meta_size)


def random_stats(rng, n):
    s = UsageStats.empty(n)
    s.num_battles = rng.randint(1, 500)
    s.picks[:] = [rng.randint(0, 2 * s.num_battles) for _ in range(n)]
    s.wins[:] = [rng.randint(0, p) for p in s.picks]
    pop = np.array([[rng.randint(0, 40) for _ in range(n)] for _ in range(n)])
    s.pop[:] = pop + pop.T
    np.fill_diagonal(s.pop, 0)
    return s


@pytest.fixture(scope="module")
def synthetic(tmp_path_factory):
    return harness.write_synthetic_scenarios(tmp_path_factory.mktemp("acceptance"), seed=7)


@pytest.fixture(scope="module")
def abc_result(synthetic, tmp_path_factory):
    spec = harness.override(harness.load_scenario(synthetic.abc), out=tmp_path_factory.mktemp("abc_first"))
    start = time.perf_counter()
    result = harness.run_scenario(spec)
    return result, time.perf_counter() - start


def test_criterion_1_metric_oracles():
    with criterion(1, "metric oracles agree on >=1000 random fixtures each") as notes:
        rng = random.Random(2024)
        labels = ["AG", "Ubers", "OU", "UU", "NU"]
        start = time.perf_counter()
        for _ in range(1000):
            size = rng.randint(4, 40)
            pool = [f"s{k}" for k in range(size + rng.randint(0, 20))]
            meta_size = rng.randint(1, size)
            a, b = rng.sample(pool, size), rng.sample(pool, size)
            assert overlap(snap(a, meta_size), snap(b, meta_size)) == oracles.overlap(a, b, meta_size)
            if set(a) & set(b):
                assert edit_distance(snap(a, meta_size), snap(b, meta_size)) == oracles.edit_distance(a, b)
            banned = set(rng.sample(a, rng.randint(1, 3)))
            assert naive_baseline(snap(a, meta_size), banned).species == oracles.naive(a, banned)
            tier_map = {s: rng.choice(labels) for s in pool}
            rep = tier_capture(snap(a, meta_size), tier_map, labels[:3])
            assert (rep.capture, rep.composition) == oracles.tier_capture(a[:meta_size], tier_map, labels[:3],
                                                                          meta_size)
        worst = 0.0
        exact_runs = 0
        while exact_runs < 1000:
            n = rng.choice([2, 3, 4, 5, 6, 7, 8] if exact_runs % 50 == 0 else [2, 3, 4, 5, 6])
            x = [rng.randint(0, 6) for _ in range(n)]
            y = [rng.randint(0, 6) for _ in range(n)]
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            res = spearman(x, y, exact=True)
            worst = max(worst, abs(res.rho - oracles.spearman_rho(x, y)))
            assert res.p_value == oracles.exact_p(x, y)
            exact_runs += 1
        for _ in range(1000):
            n = rng.randint(9, 60)
            x = [rng.randint(0, 20) for _ in range(n)]
            y = [rng.random() for _ in range(n)]
            if len(set(x)) > 1:
                worst = max(worst, abs(spearman(x, y).rho - oracles.spearman_rho(x, y)))
        assert worst <= 1e-12
        elapsed = time.perf_counter() - start
        notes.append(f"max |rho diff| {worst:.1e}")
        assert elapsed < 60


def test_criterion_2_formula_conformance(roster20):
    with criterion(2, "score formulas and epsilon endpoints") as notes:
        rng = random.Random(77)
        start = time.perf_counter()
        worst = 0.0
        for trial in range(300):
            stats = random_stats(rng, 20)
            meta = rng.sample(range(20), rng.randint(0, 8))
            team = rng.sample(range(20), rng.randint(0, 5))
            banned = set(rng.sample(range(20), rng.randint(0, 3)))
            abc = score_abc(roster20, stats, meta, team, ScoreWeights.abc(1, 0, 0), banned)
            product = pickrates(stats) * roster20.bst
            product[list(banned)] = 0.0
            assert np.array_equal(abc, product)
            assert list(abc) == oracles.score_abc(roster20, stats, meta, team, 1, 0, 0, banned)
            bsd = score_bsd(roster20, stats, meta, team, ScoreWeights.bsd(0.50, 0.25, 0.25), banned)
            ref = oracles.score_bsd(roster20, stats, meta, team, 0.50, 0.25, 0.25, banned)
            worst = max(worst, float(np.max(np.abs(bsd - np.array(ref)))))
        assert worst <= 1e-12
        schedule = EpsilonSchedule.bsd()
        assert epsilon_at(schedule, 0) == 1.0 and epsilon_at(schedule, 20_000) == 0.001
        assert epsilon_at(EpsilonSchedule.abc(), 0) == 0.001
        notes.append(f"max |BSD diff| {worst:.1e}")
        assert time.perf_counter() - start < 60


def test_criterion_3_sampling(roster20):
    with criterion(3, "samplePick matches the analytic mixture") as notes:
        rng = random.Random(5)
        start = time.perf_counter()
        stats = random_stats(rng, 20)
        team = [3, 11]
        banned = {7}
        scores = score_bsd(roster20, stats, [0, 1, 2, 4], team, ScoreWeights.bsd(), banned)
        p = pickrates(stats)
        eps = 0.3
        eligible = np.ones(20, bool)
        eligible[[3, 11, 7]] = False
        analytic = np.array(oracles.mixture(list(scores), list(p), eps, list(eligible), stats.num_battles))
        assert np.allclose(analytic, pick_distribution(scores, p, eps, eligible, stats.num_battles),
                           atol=1e-15)
        draws = 100_000
        counts = np.zeros(20)
        for _ in range(draws):
            counts[sample_pick(scores, p, eps, team, banned, rng, stats.num_battles)] += 1
        tv = 0.5 * float(np.abs(counts / draws - analytic).sum())
        notes.append(f"TV {tv:.4f}")
        assert counts[[3, 7, 11]].sum() == 0
        assert tv <= 0.01
        assert time.perf_counter() - start < 60


def test_criterion_4_simulator_sanity(roster50):
    with criterion(4, "mirrored self-play is fair, heuristic beats random") as notes:
        start = time.perf_counter()
        tables = BattleTables(roster50)
        rng = random.Random(9)
        rand = make_agent("random", tables)
        a_wins = 0
        for k in range(10_000):
            team = rng.sample(range(50), 6)
            a_wins += run_battle(tables, team, list(team), rand, rand, seed=k).winner == Side.A
        mirror_rate = a_wins / 10_000
        heur = make_agent("heuristic", tables)
        h_wins = 0
        for k in range(1_000):
            team_h, team_r = rng.sample(range(50), 6), rng.sample(range(50), 6)
            if k % 2 == 0:
                h_wins += run_battle(tables, team_h, team_r, heur, rand, seed=k).winner == Side.A
            else:
                h_wins += run_battle(tables, team_r, team_h, rand, heur, seed=k).winner == Side.B
        heuristic_rate = h_wins / 1_000
        notes.append(f"mirror side-A winrate {mirror_rate:.4f}; heuristic winrate {heuristic_rate:.3f}")
        assert abs(mirror_rate - 0.5) <= 0.02
        assert heuristic_rate > 0.90
        assert time.perf_counter() - start < 120


def test_criterion_5_abc_synthetic(synthetic, abc_result):
    with criterion(5, "ABC synthetic beats or ties naive against the oracle meta") as notes:
        result, elapsed = abc_result
        a, b = result.pre, synthetic.oracle_post
        naive = naive_baseline(a, synthetic.dominant)
        found = result.discovered
        assert synthetic.dominant not in found.species
        ours = (overlap(b, found), edit_distance_delta(a, b, found))
        base = (overlap(b, naive), edit_distance_delta(a, b, naive))
        notes.append(f"run {elapsed:.1f}s; overlap {ours[0]:.3f} vs naive {base[0]:.3f}; "
                     f"edit-distance delta {ours[1]:.3f} vs naive {base[1]:.3f}")
        assert ours[0] >= base[0]
        assert ours[1] <= base[1]
        assert elapsed < 600


def test_criterion_6_bsd_synthetic(synthetic, tmp_path):
    with criterion(6, "BSD synthetic captures the top tiers") as notes:
        spec = harness.override(harness.load_scenario(synthetic.bsd), out=tmp_path)
        assert spec.run.total_battles == 50_000
        start = time.perf_counter()
        result = harness.run_scenario(spec)
        elapsed = time.perf_counter() - start
        roster = load_roster(spec.roster_path, spec.tier_path)
        tier_map = {c.species: c.tier for c in roster.characters}
        rep = tier_capture(result.discovered, tier_map, ["AG", "Ubers"])
        notes.append(f"AG {rep.capture['AG']:.2f}; Ubers {rep.capture['Ubers']:.2f}")
        assert rep.capture["AG"] == 1.0
        assert rep.capture["Ubers"] >= 0.6
        assert elapsed < 600


def test_criterion_7_determinism(synthetic, abc_result, tmp_path):
    with criterion(7, "reruns are byte-identical and resume equals an uninterrupted run") as notes:
        start = time.perf_counter()
        first, _ = abc_result
        rerun = harness.run_scenario(dataclasses.replace(first.spec, output_dir=tmp_path / "rerun"))
        names = sorted(p.name for p in first.files)
        assert names == sorted(p.name for p in rerun.files)
        for p in first.files:
            assert p.read_bytes() == (tmp_path / "rerun" / p.name).read_bytes(), p.name
        bsd = harness.load_scenario(synthetic.bsd)
        whole = harness.run_scenario(harness.override(bsd, battles=4_000, out=tmp_path / "whole"))
        half = harness.run_scenario(harness.override(bsd, battles=2_000, out=tmp_path / "half"))
        resumed = harness.run_scenario(harness.override(bsd, battles=4_000, out=tmp_path / "resumed"),
                                       resume=half.checkpoint)
        assert resumed.checkpoint.to_dict() == whole.checkpoint.to_dict()
        for p in whole.files:
            if p.name != "manifest.json":
                assert p.read_bytes() == (tmp_path / "resumed" / p.name).read_bytes(), p.name
        notes.append(f"{len(names)} report files compared")
        assert time.perf_counter() - start < 300


def test_criterion_8_throughput(tmp_path):
    with criterion(8, "throughput measured" + (" and gated" if GATE_THROUGHPUT else " (not gated)")) as notes:
        fx = write_fixture(tmp_path, 0, 740, 18)
        roster = load_roster(fx.roster_path, fx.tier_path)
        workers = os.cpu_count() or 1
        cfg = RunConfig(total_battles=6_000, battles_per_month=6_000, stats_update_interval=1_000,
                        team_pool_size=500, meta_size=40, blanket_ban_tiers=(), agent="heuristic",
                        weights=ScoreWeights.bsd(), epsilon=EpsilonSchedule.bsd(), workers=workers)
        start = time.perf_counter()
        run_discovery(roster, cfg)
        rate = cfg.total_battles / (time.perf_counter() - start)
        notes.append(f"{rate:,.0f} battles/s on {workers} core(s), target 2,000 on 4 cores")
        if GATE_THROUGHPUT:
            assert rate >= 2_000


def test_criterion_9_grid_search(synthetic, tmp_path):
    with criterion(9, "default grid runs and BST alone is not beaten by meta type value alone") as notes:
        start = time.perf_counter()
        spec = harness.override(harness.load_scenario(synthetic.abc), out=tmp_path)
        rows = harness.run_grid_search(spec)
        assert len(rows) == 8
        by_weights = {(r.c1, r.c2, r.c3): r for r in rows}
        bst_only, mtv_only = by_weights[(1, 0, 0)], by_weights[(0, 1, 0)]
        notes.append(f"overlap (1,0,0) {bst_only.overlap:.3f} vs (0,1,0) {mtv_only.overlap:.3f}")
        assert bst_only.overlap >= mtv_only.overlap
        assert not any(math.isnan(r.overlap) for r in rows)
        assert time.perf_counter() - start < 1800

