"""Sequential, epsilon-greedy team generation driven by usage statistics.

Two score families are supported. The balance-change mode multiplies the
current pickrate by a weighted mix of static terms::

    score = pickrate * (c1 * BST + c2 * MetaTypeValue + c3 * TypeValue)

with ``(c1, c2, c3) = (0, 0, 0)`` meaning "pickrate alone". The blank-slate
mode sums instead, dropping pickrates in favour of winrates and popularity::

    score = winrate + a * BST + b * MetaTypeValue + c * TypeValue + popularity
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Collection, Iterable, Sequence

import numpy as np

from .roster import Roster, minmax, type_vector_for
from .stats import UsageStats, normalized_pop, pickrates, winrates

TEAM_SIZE = 6
ABC, BSD = "ABC", "BSD"


@dataclass(frozen=True)
class ScoreWeights:
    mode: str = ABC
    c1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0
    a: float = 0.50
    b: float = 0.25
    c: float = 0.25

    def __post_init__(self):
        if self.mode not in (ABC, BSD):
            raise ValueError(f"unknown score mode {self.mode!r}")
        for name in ("c1", "c2", "c3", "a", "b", "c"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be non-negative")

    @classmethod
    def abc(cls, c1=1.0, c2=0.0, c3=0.0) -> "ScoreWeights":
        return cls(ABC, c1, c2, c3)

    @classmethod
    def bsd(cls, a=0.50, b=0.25, c=0.25) -> "ScoreWeights":
        return cls(BSD, a=a, b=b, c=c)


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float
    end: float
    decay_battles: int = 0

    def __post_init__(self):
        if not 0 <= self.end <= self.start <= 1:
            raise ValueError("need 0 <= end <= start <= 1")
        if self.decay_battles < 0:
            raise ValueError("decay_battles must be non-negative")

    @classmethod
    def abc(cls) -> "EpsilonSchedule":
        return cls(0.001, 0.001, 0)

    @classmethod
    def bsd(cls) -> "EpsilonSchedule":
        return cls(1.0, 0.001, 20_000)


def epsilon_at(schedule: EpsilonSchedule, battles_elapsed: int) -> float:
    if battles_elapsed < 0:
        raise ValueError("battles_elapsed must be non-negative")
    if battles_elapsed >= schedule.decay_battles:
        return schedule.end
    f = battles_elapsed / schedule.decay_battles
    # convex form keeps both endpoints exact in floating point
    return schedule.start * (1 - f) + schedule.end * f


def _type_counts(roster: Roster, members: Iterable[int]) -> np.ndarray:
    counts = np.zeros(roster.chart.size, dtype=np.int64)
    for i in members:
        for t in roster.characters[i].types:
            counts[t] += 1
    return counts


def meta_type_value(roster: Roster, meta_set: Collection[int]) -> np.ndarray:
    """Reward types that hit the current meta's types hard."""
    if len(meta_set) == 0:
        raise ValueError("meta set is empty")
    types = [t for i in meta_set for t in roster.characters[i].types]
    return roster.character_values(type_vector_for(types, roster.chart))


def _type_value_from_counts(roster: Roster, team_type_counts: np.ndarray) -> np.ndarray:
    chart = roster.chart
    strong = (chart.score_values == 1).astype(np.int64)
    counters = strong @ team_type_counts
    if counters.sum() == 0:
        return np.zeros(len(roster))
    return roster.character_values(minmax(chart.score_values @ counters))


def type_value(roster: Roster, team: Collection[int]) -> np.ndarray:
    """Reward types that beat whatever beats the current team.

    The counter group is the multiset of attacking types that are super
    effective against each type occurrence on the team.
    """
    if len(team) == 0:
        return np.zeros(len(roster))
    return _type_value_from_counts(roster, _type_counts(roster, team))


def _banned_mask(n: int, banned) -> np.ndarray:
    if banned is None:
        return np.zeros(n, dtype=bool)
    if isinstance(banned, np.ndarray) and banned.dtype == bool:
        return banned
    mask = np.zeros(n, dtype=bool)
    mask[list(banned)] = True
    return mask


def score_abc(roster: Roster, stats: UsageStats, meta_set: Collection[int] | None,
              team: Collection[int], weights: ScoreWeights, banned=None) -> np.ndarray:
    p = pickrates(stats)
    if weights.c1 == weights.c2 == weights.c3 == 0:
        scores = p.copy()
    else:
        mix = weights.c1 * roster.bst
        if weights.c2 and meta_set:
            mix = mix + weights.c2 * meta_type_value(roster, meta_set)
        if weights.c3 and team:
            mix = mix + weights.c3 * type_value(roster, team)
        scores = p * mix
    scores[_banned_mask(len(roster), banned)] = 0.0
    return scores


def score_bsd(roster: Roster, stats: UsageStats, meta_set: Collection[int] | None,
              team: Collection[int], weights: ScoreWeights, banned=None) -> np.ndarray:
    scores = winrates(stats) + weights.a * roster.bst
    if meta_set:
        scores = scores + weights.b * meta_type_value(roster, meta_set)
    if team:
        scores = scores + weights.c * type_value(roster, team)
        scores = scores + normalized_pop(stats)[:, list(team)].mean(axis=1)
    scores[_banned_mask(len(roster), banned)] = 0.0
    return scores


def inverse_pickrate_weights(pickrate: np.ndarray, num_battles: int) -> np.ndarray:
    delta = 1.0 / (2 * max(num_battles, 1))
    return 1.0 / (np.asarray(pickrate, dtype=float) + delta)


def pick_distribution(scores: np.ndarray, pickrate: np.ndarray, epsilon: float,
                      eligible: np.ndarray, num_battles: int) -> np.ndarray:
    """Exact probability of each index under one epsilon-greedy pick."""
    if not eligible.any():
        raise ValueError("no eligible characters")
    inv = np.where(eligible, inverse_pickrate_weights(pickrate, num_battles), 0.0)
    inv = inv / inv.sum()
    greedy = np.where(eligible, scores, 0.0)
    total = greedy.sum()
    if total <= 0:
        return inv
    return (1 - epsilon) * greedy / total + epsilon * inv


def _weighted_choice(weights: np.ndarray, rng: random.Random) -> int:
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    if idx >= len(weights) or weights[idx] <= 0:
        idx = int(np.flatnonzero(weights > 0)[-1])
    return idx


def sample_pick(scores: np.ndarray, pickrate: np.ndarray, epsilon: float,
                already_picked: Collection[int], banned, rng: random.Random,
                num_battles: int = 0) -> int:
    """Draw one character: greedy on scores w.p. 1-epsilon, inverse pickrate otherwise."""
    n = len(scores)
    eligible = ~_banned_mask(n, banned)
    if already_picked:
        eligible[list(already_picked)] = False
    return _sample(np.asarray(scores, dtype=float), np.asarray(pickrate, dtype=float),
                   epsilon, eligible, num_battles, rng)


def _sample(scores, pickrate, epsilon, eligible, num_battles, rng) -> int:
    if not eligible.any():
        raise ValueError("no eligible characters")
    explore = rng.random() < epsilon
    if not explore:
        greedy = np.where(eligible, scores, 0.0)
        if greedy.sum() > 0:
            return _weighted_choice(greedy, rng)
    inv = np.where(eligible, inverse_pickrate_weights(pickrate, num_battles), 0.0)
    return _weighted_choice(inv, rng)


class TeamBuilder:
    """Scores precomputed against one immutable stats snapshot.

    Team-independent terms are computed once; the type-value and popularity
    terms are recomputed after every pick as the current team grows.
    """

    def __init__(self, roster: Roster, stats: UsageStats, meta_set: Collection[int] | None,
                 weights: ScoreWeights, banned=None, tv_cache: dict | None = None):
        n = len(roster)
        self.roster = roster
        self.weights = weights
        self.num_battles = stats.num_battles
        self.banned = _banned_mask(n, banned).copy()
        self.pickrate = pickrates(stats)
        self.inverse = inverse_pickrate_weights(self.pickrate, stats.num_battles)
        self._tv_cache = {} if tv_cache is None else tv_cache
        mtv = meta_type_value(roster, meta_set) if meta_set else np.zeros(n)
        if weights.mode == ABC:
            if weights.c1 == weights.c2 == weights.c3 == 0:
                self.base, self.tv_weight = self.pickrate.copy(), None
            else:
                self.base = self.pickrate * (weights.c1 * roster.bst + weights.c2 * mtv)
                self.tv_weight = self.pickrate * weights.c3 if weights.c3 else None
            self.pop_norm = None
        else:
            self.base = winrates(stats) + weights.a * roster.bst + weights.b * mtv
            self.tv_weight = np.full(n, weights.c) if weights.c else None
            self.pop_norm = normalized_pop(stats)
        if self.eligible_count() < TEAM_SIZE:
            raise ValueError(f"only {self.eligible_count()} eligible characters; a team needs {TEAM_SIZE}")

    def eligible_count(self) -> int:
        return int((~self.banned).sum())

    def _type_value(self, type_counts: np.ndarray) -> np.ndarray:
        key = type_counts.tobytes()
        tv = self._tv_cache.get(key)
        if tv is None:
            tv = _type_value_from_counts(self.roster, type_counts)
            self._tv_cache[key] = tv
        return tv

    def scores(self, team: Sequence[int]) -> np.ndarray:
        scores = self.base
        if team:
            if self.tv_weight is not None:
                scores = scores + self.tv_weight * self._type_value(_type_counts(self.roster, team))
            if self.pop_norm is not None:
                scores = scores + self.pop_norm[:, list(team)].mean(axis=1)
        scores = np.array(scores, dtype=float)
        scores[self.banned] = 0.0
        return scores

    def distribution(self, team: Sequence[int], epsilon: float) -> np.ndarray:
        eligible = ~self.banned
        eligible[list(team)] = False
        return pick_distribution(self.scores(team), self.pickrate, epsilon, eligible, self.num_battles)

    def build(self, epsilon: float, rng: random.Random) -> tuple[int, ...]:
        roster = self.roster
        team: list[int] = []
        eligible = ~self.banned
        type_counts = np.zeros(roster.chart.size, dtype=np.int64)
        pop_sum = np.zeros(len(roster)) if self.pop_norm is not None else None
        for _ in range(TEAM_SIZE):
            scores = self.base
            if team:
                if self.tv_weight is not None:
                    scores = scores + self.tv_weight * self._type_value(type_counts)
                if pop_sum is not None:
                    scores = scores + pop_sum / len(team)
            pick = _sample(scores, self.pickrate, epsilon, eligible, self.num_battles, rng)
            team.append(pick)
            eligible[pick] = False
            for t in roster.characters[pick].types:
                type_counts[t] += 1
            if pop_sum is not None:
                pop_sum += self.pop_norm[:, pick]
        return tuple(team)


def build_team(roster: Roster, stats: UsageStats, meta_set: Collection[int] | None,
               weights: ScoreWeights, epsilon: float, rng: random.Random, banned=None) -> tuple[int, ...]:
    return TeamBuilder(roster, stats, meta_set, weights, banned).build(epsilon, rng)
