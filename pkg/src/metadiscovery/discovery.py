"""Discovery runs: team pools, batched battles, aggregation and meta extraction."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .agents import AGENT_KINDS, make_agent
from .battle import BattleResult, BattleTables, Side, run_battle
from .rng import derive_seed
from .roster import Roster
from .stats import UsageStats, pickrates, winrates
from .teambuilder import ABC, BSD, EpsilonSchedule, ScoreWeights, TeamBuilder, epsilon_at

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    total_battles: int = 450_000
    battles_per_month: int = 150_000
    stats_update_interval: int = 1_000
    team_pool_size: int = 2_500
    meta_size: int = 40
    banned: tuple[str, ...] = ()
    blanket_ban_tiers: tuple[str, ...] = ("LC",)
    seed: int = 0
    agent: str = "heuristic"
    weights: ScoreWeights = field(default_factory=ScoreWeights.abc)
    epsilon: EpsilonSchedule = field(default_factory=EpsilonSchedule.abc)
    workers: int = 1

    def __post_init__(self):
        for name in ("total_battles", "battles_per_month", "stats_update_interval",
                     "team_pool_size", "meta_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.stats_update_interval > self.total_battles:
            raise ValueError("stats_update_interval exceeds total_battles")
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent {self.agent!r}")
        object.__setattr__(self, "banned", tuple(self.banned))
        object.__setattr__(self, "blanket_ban_tiers", tuple(self.blanket_ban_tiers))

    @property
    def mode(self) -> str:
        return self.weights.mode

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "weights" in doc:
            doc["weights"] = ScoreWeights(**doc["weights"])
        if "epsilon" in doc:
            doc["epsilon"] = EpsilonSchedule(**doc["epsilon"])
        return cls(**doc)

    def digest(self) -> str:
        """Hash of everything that shapes the trajectory.

        The battle budget and worker count are left out so a finished run can
        be resumed with a larger budget.
        """
        doc = self.to_dict()
        doc.pop("workers")
        doc.pop("total_battles")
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def apply_ban(config: RunConfig, species: Iterable[str], roster: Roster) -> RunConfig:
    species = list(species)
    for s in species:
        if s not in roster.species_index:
            raise KeyError(f"cannot ban unknown species {s!r}")
    banned = tuple(dict.fromkeys([*config.banned, *species]))
    return dataclasses.replace(config, banned=banned)


def banned_mask(roster: Roster, config: RunConfig) -> np.ndarray:
    """Explicit bans plus every member of a blanket-banned tier."""
    mask = np.zeros(len(roster), dtype=bool)
    for s in config.banned:
        mask[roster.index(s)] = True
    tiers = set(config.blanket_ban_tiers)
    for i, c in enumerate(roster.characters):
        if c.tier in tiers:
            mask[i] = True
    return mask


@dataclass(frozen=True)
class RankEntry:
    species: str
    pickrate: float
    winrate: float = 0.0


@dataclass(frozen=True)
class MetaSnapshot:
    """A full ranking (descending usage) plus the size of the meta cut."""

    ranking: tuple[RankEntry, ...]
    meta_size: int

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        if len({e.species for e in self.ranking}) != len(self.ranking):
            raise ValueError("ranking contains a species twice")

    @property
    def species(self) -> list[str]:
        return [e.species for e in self.ranking]

    @property
    def meta_set(self) -> tuple[str, ...]:
        return tuple(e.species for e in self.ranking[:self.meta_size])

    def ranks(self) -> dict[str, int]:
        return {e.species: r for r, e in enumerate(self.ranking, start=1)}

    def to_dict(self) -> dict:
        return {"meta_size": self.meta_size,
                "ranking": [dataclasses.asdict(e) for e in self.ranking]}

    @classmethod
    def from_dict(cls, doc: dict) -> "MetaSnapshot":
        return cls(tuple(RankEntry(**e) for e in doc["ranking"]), int(doc["meta_size"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rank", "species", "pickrate", "winrate"])
        for r, e in enumerate(self.ranking, start=1):
            writer.writerow([r, e.species, repr(e.pickrate), repr(e.winrate)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta_size: int) -> "MetaSnapshot":
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda row: int(row["rank"]))
        return cls(tuple(RankEntry(row["species"], float(row["pickrate"]), float(row.get("winrate") or 0))
                         for row in rows), meta_size)

    def save(self, path: str | Path):
        path = Path(path)
        if path.suffix == ".csv":
            path.write_text(self.to_csv())
        else:
            path.write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path, meta_size: int | None = None) -> "MetaSnapshot":
        path = Path(path)
        if path.suffix == ".csv":
            if meta_size is None:
                raise ValueError("CSV snapshots need an explicit meta_size")
            return cls.from_csv(path.read_text(), meta_size)
        snap = cls.from_dict(json.loads(path.read_text()))
        return snap if meta_size is None else MetaSnapshot(snap.ranking, meta_size)


def extract_meta(stats: UsageStats, meta_size: int, roster: Roster,
                 eligible: np.ndarray | None = None) -> MetaSnapshot:
    """Rank eligible characters by pickrate, then winrate, then species id."""
    if eligible is None:
        eligible = np.ones(len(roster), dtype=bool)
    if stats.size != len(roster):
        raise ValueError("stats and roster sizes differ")
    count = int(eligible.sum())
    if count < meta_size:
        raise ValueError(f"only {count} eligible characters for a meta of {meta_size}")
    p = pickrates(stats)
    w = winrates(stats)
    order = sorted(np.flatnonzero(eligible), key=lambda i: (-p[i], -w[i], roster.species(i)))
    return MetaSnapshot(tuple(RankEntry(roster.species(i), float(p[i]), float(w[i])) for i in order),
                        meta_size)


@dataclass
class Checkpoint:
    config_digest: str
    battles_done: int
    stats: UsageStats
    monthly: list[MetaSnapshot] = field(default_factory=list)

    def to_dict(self, species: Sequence[str] | None = None) -> dict:
        return {"config_digest": self.config_digest, "battles_done": self.battles_done,
                "stats": self.stats.to_dict(species),
                "monthly": [m.to_dict() for m in self.monthly]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Checkpoint":
        return cls(doc["config_digest"], int(doc["battles_done"]),
                   UsageStats.from_dict(doc["stats"]),
                   [MetaSnapshot.from_dict(m) for m in doc["monthly"]])

    def save(self, path: str | Path, species: Sequence[str] | None = None):
        Path(path).write_text(json.dumps(self.to_dict(species)))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class DiscoveryOutcome:
    meta: MetaSnapshot
    stats: UsageStats
    monthly: list[MetaSnapshot]
    battles: int
    aggregations: int
    checkpoint: Checkpoint


# Worker-process state, set once per pool by _init_worker.
_WORKER: dict = {}


def _init_worker(roster: Roster, agent_kind: str):
    tables = BattleTables(roster)
    agent = make_agent(agent_kind, tables)
    _WORKER.update(tables=tables, agent=agent)


def _run_chunk(pool: Sequence[tuple[int, ...]], jobs: Sequence[tuple[int, int, int]], seed: int):
    tables, agent = _WORKER["tables"], _WORKER["agent"]
    out = []
    for index, i, j in jobs:
        r = run_battle(tables, pool[i], pool[j], agent, agent, derive_seed(seed, "battle", index))
        out.append((int(r.winner), r.turns))
    return out


def sample_pair(pool_size: int, rng: random.Random) -> tuple[int, int]:
    """Two pool slots, uniform with replacement, redrawing when both pick the same team."""
    i = rng.randrange(pool_size)
    j = rng.randrange(pool_size)
    while pool_size > 1 and j == i:
        j = rng.randrange(pool_size)
    return i, j


def build_pool(roster: Roster, stats: UsageStats, meta_set_idx, config: RunConfig,
               banned: np.ndarray, window: int, battles_done: int,
               tv_cache: dict | None = None) -> list[tuple[int, ...]]:
    builder = TeamBuilder(roster, stats, meta_set_idx, config.weights, banned, tv_cache)
    eps = epsilon_at(config.epsilon, battles_done)
    return [builder.build(eps, random.Random(derive_seed(config.seed, "team", window, k)))
            for k in range(config.team_pool_size)]


def run_discovery(roster: Roster, config: RunConfig, initial_stats: UsageStats | None = None,
                  resume: Checkpoint | None = None, stop_after: int | None = None,
                  battle_log: Callable[[dict], None] | None = None, log_battles: int = 0,
                  executor: ProcessPoolExecutor | None = None) -> DiscoveryOutcome:
    """Run (or resume) a discovery and return the final meta, stats and monthly metas.

    ``stop_after`` halts at the first aggregation boundary at or beyond that many
    battles, leaving a checkpoint that ``resume`` continues bit-exactly.
    """
    if config.mode == ABC and initial_stats is None and resume is None:
        raise ValueError("balance-change runs need initial usage stats")
    banned = banned_mask(roster, config)
    eligible = ~banned
    if int(eligible.sum()) < config.meta_size:
        raise ValueError(f"roster has {int(eligible.sum())} eligible characters, "
                         f"fewer than meta size {config.meta_size}")
    digest = config.digest()
    if resume is not None:
        if resume.config_digest != digest:
            raise ValueError("checkpoint was written by a different configuration")
        stats = resume.stats.copy()
        done = resume.battles_done
        monthly = list(resume.monthly)
    else:
        stats = initial_stats.copy() if initial_stats is not None else UsageStats.empty(len(roster))
        if stats.size != len(roster):
            raise ValueError("initial stats do not match the roster size")
        done = 0
        monthly = []
    interval = config.stats_update_interval
    if done % interval and done != config.total_battles:
        raise ValueError("checkpoints must sit on an aggregation boundary")

    tables = BattleTables(roster)
    agent = make_agent(config.agent, tables)
    own_executor = None
    if executor is None and config.workers > 1:
        own_executor = executor = ProcessPoolExecutor(
            config.workers, initializer=_init_worker, initargs=(roster, config.agent))
    tv_cache: dict = {}
    aggregations = 0
    try:
        while done < config.total_battles:
            if stop_after is not None and done >= stop_after:
                break
            window = done // interval
            size = min(interval, config.total_battles - done)
            snap = stats.snapshot()
            meta_idx = None
            if snap.num_battles > 0:
                meta = extract_meta(snap, config.meta_size, roster, eligible)
                meta_idx = [roster.index(s) for s in meta.meta_set]
            pool = build_pool(roster, snap, meta_idx, config, banned, window, done, tv_cache)
            jobs = []
            for index in range(done, done + size):
                i, j = sample_pair(len(pool), random.Random(derive_seed(config.seed, "pair", index)))
                jobs.append((index, i, j))
            outcomes = _play(jobs, pool, tables, agent, config, executor, battle_log, log_battles)
            for (index, i, j), (winner, turns) in zip(jobs, outcomes):
                stats.record_battle(BattleResult(Side(winner), turns, pool[i] + pool[j]))
            done += size
            aggregations += 1
            month_end = (len(monthly) + 1) * config.battles_per_month
            if done >= month_end:
                monthly.append(extract_meta(stats, config.meta_size, roster, eligible))
            log.debug("window %d: %d battles done", window, done)
    finally:
        if own_executor is not None:
            own_executor.shutdown()
    final = extract_meta(stats, config.meta_size, roster, eligible)
    return DiscoveryOutcome(final, stats, monthly, done, aggregations,
                            Checkpoint(digest, done, stats.copy(), list(monthly)))


def _play(jobs, pool, tables, agent, config, executor, battle_log, log_battles):
    if executor is None or len(jobs) < 2:
        out = []
        for index, i, j in jobs:
            hook = None
            if battle_log is not None and index < log_battles:
                hook = (lambda entry, _index=index: battle_log({"battle": _index, **entry}))
            r = run_battle(tables, pool[i], pool[j], agent, agent,
                           derive_seed(config.seed, "battle", index), log=hook)
            out.append((int(r.winner), r.turns))
        return out
    logged = [job for job in jobs if battle_log is not None and job[0] < log_battles]
    if logged:
        head = _play(logged, pool, tables, agent, config, None, battle_log, log_battles)
        rest = _play(jobs[len(logged):], pool, tables, agent, config, executor, None, 0)
        return head + rest
    workers = max(1, config.workers)
    chunk = max(1, -(-len(jobs) // (4 * workers)))
    futures = [executor.submit(_run_chunk, pool, jobs[k:k + chunk], config.seed)
               for k in range(0, len(jobs), chunk)]
    out = []
    for f in futures:  # collected in submission order: results fold in battle-index order
        out.extend(f.result())
    return out
