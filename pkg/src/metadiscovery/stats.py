"""Usage statistics: picks, wins and the co-win ("popularity") matrix."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .battle import BattleResult

STATS_FORMAT_VERSION = 1


@dataclass
class UsageStats:
    num_battles: int
    picks: np.ndarray
    wins: np.ndarray
    pop: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "UsageStats":
        return cls(0, np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                   np.zeros((n, n), dtype=np.int64))

    @property
    def size(self) -> int:
        return len(self.picks)

    def copy(self) -> "UsageStats":
        return UsageStats(self.num_battles, self.picks.copy(), self.wins.copy(), self.pop.copy())

    def snapshot(self) -> "UsageStats":
        """Read-only copy handed to team builders while the aggregator keeps folding."""
        snap = self.copy()
        for arr in (snap.picks, snap.wins, snap.pop):
            arr.flags.writeable = False
        return snap

    def record_battle(self, result: BattleResult) -> "UsageStats":
        """Fold one battle into the counts (in place) and return self."""
        participants = result.participants
        if len(participants) != 12:
            raise ValueError(f"expected 12 participants, got {len(participants)}")
        for side in (participants[:6], participants[6:]):
            if len(set(side)) != 6:
                raise ValueError(f"duplicate character within a side: {list(side)}")
            for c in side:
                if not 0 <= c < self.size:
                    raise ValueError(f"character index {c} out of range")
        self.num_battles += 1
        np.add.at(self.picks, list(participants), 1)
        winners = result.winners
        self.wins[list(winners)] += 1
        pop = self.pop
        for x, y in combinations(winners, 2):
            pop[x, y] += 1
            pop[y, x] += 1
        return self

    def record_all(self, results: Iterable[BattleResult]) -> "UsageStats":
        for r in results:
            self.record_battle(r)
        return self

    def to_dict(self, species: Sequence[str] | None = None) -> dict:
        rows, cols = np.nonzero(np.triu(self.pop, 1))
        doc = {
            "format_version": STATS_FORMAT_VERSION,
            "num_battles": int(self.num_battles),
            "picks": self.picks.tolist(),
            "wins": self.wins.tolist(),
            "pop": [[int(i), int(j), int(self.pop[i, j])] for i, j in zip(rows, cols)],
        }
        if species is not None:
            doc["species"] = list(species)
        return doc

    @classmethod
    def from_dict(cls, doc: dict, species: Sequence[str] | None = None) -> "UsageStats":
        if doc.get("format_version") != STATS_FORMAT_VERSION:
            raise ValueError(f"unsupported stats format_version {doc.get('format_version')}")
        if species is not None and "species" in doc and list(doc["species"]) != list(species):
            raise ValueError("stats were recorded against a different roster")
        picks = np.asarray(doc["picks"], dtype=np.int64)
        n = len(picks)
        pop = np.zeros((n, n), dtype=np.int64)
        for i, j, count in doc["pop"]:
            pop[i, j] = pop[j, i] = count
        return cls(int(doc["num_battles"]), picks, np.asarray(doc["wins"], dtype=np.int64), pop)

    def save(self, path: str | Path, species: Sequence[str] | None = None):
        Path(path).write_text(json.dumps(self.to_dict(species)))

    @classmethod
    def load(cls, path: str | Path, species: Sequence[str] | None = None) -> "UsageStats":
        return cls.from_dict(json.loads(Path(path).read_text()), species)

    def __eq__(self, other):
        if not isinstance(other, UsageStats):
            return NotImplemented
        return (self.num_battles == other.num_battles
                and np.array_equal(self.picks, other.picks)
                and np.array_equal(self.wins, other.wins)
                and np.array_equal(self.pop, other.pop))


def pickrates(stats: UsageStats) -> np.ndarray:
    if stats.num_battles == 0:
        return np.zeros(stats.size)
    return stats.picks / (2 * stats.num_battles)


def pickrate(stats: UsageStats, x: int) -> float:
    return float(pickrates(stats)[x])


def winrates(stats: UsageStats) -> np.ndarray:
    out = np.zeros(stats.size)
    picked = stats.picks > 0
    out[picked] = stats.wins[picked] / stats.picks[picked]
    return out


def winrate(stats: UsageStats, x: int) -> float:
    return float(winrates(stats)[x])


def normalized_pop(stats: UsageStats) -> np.ndarray:
    """Global min-max over off-diagonal cells; constant matrices map to zeros."""
    pop = stats.pop.astype(float)
    n = len(pop)
    out = np.zeros_like(pop)
    if n < 2:
        return out
    off = ~np.eye(n, dtype=bool)
    lo, hi = pop[off].min(), pop[off].max()
    if hi > lo:
        out[off] = (pop[off] - lo) / (hi - lo)
    return out


def popularity_vector(pop_norm: np.ndarray, team: Sequence[int]) -> np.ndarray:
    """Mean normalized co-win value with the current team, for every character."""
    if len(team) == 0:
        raise ValueError("current team is empty")
    return pop_norm[:, list(team)].mean(axis=1)


def popularity(stats: UsageStats, x: int, team: Sequence[int]) -> float:
    if x in team:
        raise ValueError(f"character {x} is already on the team")
    return float(popularity_vector(normalized_pop(stats), team)[x])
