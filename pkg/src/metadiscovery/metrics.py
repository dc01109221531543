"""Comparisons between metas: overlap, rank shifts, rank correlation, tier coverage."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .discovery import MetaSnapshot, RankEntry
from .roster import Roster

BELOW = "below"


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int


def overlap(b: MetaSnapshot, b_prime: MetaSnapshot) -> float:
    if b.meta_size != b_prime.meta_size:
        raise ValueError(f"meta sizes differ: {b.meta_size} vs {b_prime.meta_size}")
    if not b.meta_set or not b_prime.meta_set:
        raise ValueError("empty meta set")
    return len(set(b.meta_set) & set(b_prime.meta_set)) / b.meta_size


def edit_distance(a: MetaSnapshot, x: MetaSnapshot) -> float:
    """Mean absolute change in 1-based rank over species ranked in both snapshots."""
    ra, rx = a.ranks(), x.ranks()
    common = ra.keys() & rx.keys()
    if not common:
        raise ValueError("rankings share no species")
    return sum(abs(ra[s] - rx[s]) for s in common) / len(common)


def edit_distance_delta(a: MetaSnapshot, b: MetaSnapshot, b_prime: MetaSnapshot) -> float:
    return abs(edit_distance(a, b) - edit_distance(a, b_prime))


def rank_changes(a: MetaSnapshot, b: MetaSnapshot, b_prime: MetaSnapshot) -> tuple[list[int], list[int]]:
    """Per-species rank change A->B and A->B' over species ranked in all three."""
    ra, rb, rp = a.ranks(), b.ranks(), b_prime.ranks()
    common = sorted(ra.keys() & rb.keys() & rp.keys())
    return [rb[s] - ra[s] for s in common], [rp[s] - ra[s] for s in common]


def average_ranks(values: Sequence[float]) -> np.ndarray:
    return sps.rankdata(values, method="average")


def _pearson(rx: np.ndarray, ry: np.ndarray) -> float:
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        raise ValueError("rank correlation undefined: an input is constant")
    return max(-1.0, min(1.0, float(dx @ dy) / denom))


def permutation_p_value(x: Sequence[float], y: Sequence[float], max_n: int = 10) -> float:
    """Exact two-sided p-value by enumerating every pairing of the ranks."""
    n = len(x)
    if n > max_n:
        raise ValueError(f"exact permutation test limited to n <= {max_n}")
    rx = average_ranks(x)
    ry = average_ranks(y)
    observed = abs(_pearson(rx, ry))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    scale = math.sqrt(float(dx @ dx) * float(dy @ dy))
    hits = total = 0
    perms = itertools.permutations(dy)
    while True:
        block = np.array(list(itertools.islice(perms, 200_000)))
        if block.size == 0:
            break
        rhos = np.abs(block @ dx) / scale
        hits += int((rhos >= observed - 1e-12).sum())
        total += len(block)
    return hits / total


def spearman(x: Sequence[float], y: Sequence[float], exact: bool = False) -> CorrelationResult:
    """Spearman's rho with average ranks for ties.

    The p-value uses the t approximation with n-2 degrees of freedom unless
    ``exact`` asks for the full permutation distribution (n <= 10).
    """
    n = len(x)
    if n != len(y):
        raise ValueError("paired inputs differ in length")
    if n < 2:
        raise ValueError("need at least 2 paired observations")
    rho = _pearson(average_ranks(x), average_ranks(y))
    if exact:
        p = permutation_p_value(x, y)
    elif n == 2:
        p = 1.0
    elif abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1 - rho * rho))
        p = float(2 * sps.t.sf(abs(t), n - 2))
    return CorrelationResult(rho, min(1.0, p), n)


def naive_baseline(a: MetaSnapshot, banned: str | Iterable[str]) -> MetaSnapshot:
    """Drop the banned species; everything ranked below moves up one place."""
    banned = {banned} if isinstance(banned, str) else set(banned)
    present = set(a.species)
    missing = banned - present
    if missing:
        raise KeyError(f"species not in ranking: {sorted(missing)}")
    return MetaSnapshot(tuple(e for e in a.ranking if e.species not in banned), a.meta_size)


@dataclass(frozen=True)
class TierReport:
    capture: dict[str, float]
    composition: dict[str, float]


def tier_capture(b_prime: MetaSnapshot, tier_map: Mapping[str, str], tiers: Sequence[str]) -> TierReport:
    """Share of each tier found in the meta, and the meta's make-up by tier.

    Labels outside ``tiers`` are pooled into a residual ``"below"`` bucket.
    """
    missing = [s for s in b_prime.species if s not in tier_map]
    if missing:
        raise KeyError(f"species without a tier label: {missing[:5]}")
    meta = set(b_prime.meta_set)
    capture, composition = {}, {}
    for t in tiers:
        members = {s for s, label in tier_map.items() if label == t}
        hit = len(meta & members)
        capture[t] = hit / len(members) if members else 0.0
        composition[t] = hit / b_prime.meta_size
    known = set(tiers)
    composition[BELOW] = sum(1 for s in meta if tier_map[s] not in known) / b_prime.meta_size
    return TierReport(capture, composition)


def bst_baseline(roster: Roster, meta_size: int, eligible: np.ndarray | None = None) -> MetaSnapshot:
    """Characters sorted by base stat total (ties by species id)."""
    idx = range(len(roster)) if eligible is None else np.flatnonzero(eligible)
    order = sorted(idx, key=lambda i: (-roster.bst[i], roster.species(i)))
    return MetaSnapshot(tuple(RankEntry(roster.species(i), float(roster.bst[i])) for i in order), meta_size)
