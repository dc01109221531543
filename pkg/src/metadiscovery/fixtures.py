"""Synthetic roster generator for tests, benchmarks and desk-scale scenarios."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .roster import STAT_NAMES

# Tier sizes of the 740-character reference roster; other sizes scale from these.
REFERENCE_TIERS = (("AG", 2), ("Ubers", 38), ("OU", 40), ("UU", 40), ("NU", 40),
                   ("PU", 40), ("ZU", 330), ("LC", 210))
TIER_ORDER = tuple(t for t, _ in REFERENCE_TIERS)
REFERENCE_SIZE = sum(n for _, n in REFERENCE_TIERS)
STAT_TOTALS = {"AG": (690, 720), "Ubers": (620, 680), "OU": (560, 610), "UU": (510, 550),
               "NU": (470, 505), "PU": (430, 465), "ZU": (360, 425), "LC": (220, 320)}
# moves a tier draws its primary STAB move from
STAB_POWER = {"AG": 100, "Ubers": 90, "OU": 90, "UU": 80, "NU": 60, "PU": 60, "ZU": 60, "LC": 40}
MOVE_POWERS = (40, 60, 80, 90, 100, 120)
CHART_VALUES = (1.0, 2.0, 0.5, 0.0)
CHART_PROBS = (0.58, 0.18, 0.19, 0.05)
DOMINANT_STATS = (200, 200, 200, 200, 200, 200)


@dataclass(frozen=True)
class Fixture:
    roster_path: Path
    tier_path: Path
    dominant: str | None
    tiers: dict[str, int]


def tier_counts(size: int) -> dict[str, int]:
    """Scale the reference tier sizes to ``size``; AG keeps at least 2 members, others 1."""
    if size < 12:
        raise ValueError("fixture rosters need at least 12 characters")
    minimum = {t: (2 if t == "AG" else 1) for t in TIER_ORDER}
    raw = {t: n * size / REFERENCE_SIZE for t, n in REFERENCE_TIERS}
    counts = {t: max(minimum[t], int(raw[t])) for t in TIER_ORDER}
    rest = sorted(TIER_ORDER, key=lambda t: (-(raw[t] - int(raw[t])), TIER_ORDER.index(t)))
    k = 0
    while sum(counts.values()) < size:
        counts[rest[k % len(rest)]] += 1
        k += 1
    while sum(counts.values()) > size:
        largest = max(TIER_ORDER, key=lambda t: counts[t] - minimum[t])
        counts[largest] -= 1
    return counts


def _chart(rng: np.random.Generator, n: int) -> list[list[float]]:
    return [[float(v) for v in rng.choice(CHART_VALUES, size=n, p=CHART_PROBS)] for _ in range(n)]


def _stats(rng: np.random.Generator, total: int) -> list[int]:
    share = rng.dirichlet(np.full(6, 8.0))
    return [int(min(255, max(1, round(total * s)))) for s in share]


def generate_fixture(seed: int, size: int, type_count: int, dominant: bool = False,
                     counts: dict[str, int] | None = None) -> tuple[dict, dict[str, str], str | None]:
    """Return (roster document, tier map, dominant species) for a synthetic roster.

    Stat totals are stratified by tier so tier labels track strength. With
    ``dominant`` one AG character gets 200 in every stat and four coverage moves.
    """
    if type_count < 2:
        raise ValueError("need at least 2 types")
    counts = tier_counts(size) if counts is None else dict(counts)
    if sum(counts.values()) != size:
        raise ValueError("tier counts do not add up to size")
    rng = np.random.default_rng(seed)
    types = [f"t{k:02d}" for k in range(type_count)]
    chart = _chart(rng, type_count)
    moves, by_type = [], {}
    for t in types:
        for k, power in enumerate(MOVE_POWERS):
            category = "physical" if k % 2 == 0 else "special"
            acc = 0.85 if power >= 120 else (0.9 if power >= 100 else 1.0)
            mid = f"{t}-{power}-{category[:4]}"
            moves.append({"id": mid, "type": t, "base_power": power, "accuracy": acc,
                          "category": category})
            by_type.setdefault(t, {})[power] = mid
    for t in types[:3]:
        moves.append({"id": f"{t}-status", "type": t, "base_power": 0, "accuracy": 1.0,
                      "category": "status"})
    status_ids = [m["id"] for m in moves if m["category"] == "status"]
    damaging = [m["id"] for m in moves if m["category"] != "status"]

    entries = []
    for tier in TIER_ORDER:
        lo, hi = STAT_TOTALS[tier]
        for _ in range(counts.get(tier, 0)):
            n_types = 1 if rng.random() < 0.5 else 2
            own = [types[k] for k in rng.choice(type_count, size=n_types, replace=False)]
            stats = _stats(rng, int(rng.integers(lo, hi + 1)))
            n_moves = int(rng.integers(2, 5))
            ids = [by_type[own[0]][STAB_POWER[tier]]]
            while len(ids) < n_moves:
                pick = status_ids[int(rng.integers(len(status_ids)))] if rng.random() < 0.05 \
                    else damaging[int(rng.integers(len(damaging)))]
                if pick not in ids:
                    ids.append(pick)
            entries.append({"types": own, "stats": stats, "moves": ids, "tier": tier})
    dominant_entry = None
    if dominant:
        dominant_entry = entries[0]
        dominant_entry["stats"] = list(DOMINANT_STATS)
        own = dominant_entry["types"]
        dominant_entry["moves"] = [by_type[own[0]][100]] + [
            by_type[t][100] for t in _coverage_types(chart, types, own[0])]
    order = rng.permutation(len(entries))
    characters, tiers = [], {}
    dominant_species = None
    for position, k in enumerate(order):
        e = entries[k]
        species = f"mon{position:03d}"
        if e is dominant_entry:
            dominant_species = species
        characters.append({"species": species, "types": e["types"],
                           "base_stats": dict(zip(STAT_NAMES, e["stats"])), "moves": e["moves"]})
        tiers[species] = e["tier"]
    doc = {"format_version": 1, "types": types, "chart": chart, "moves": moves,
           "characters": characters,
           "fixture": {"seed": seed, "size": size, "type_count": type_count,
                       "dominant": dominant_species}}
    return doc, tiers, dominant_species


def _coverage_types(chart, types, first: str) -> list[str]:
    """Three attacking types that together hit the most defending types super-effectively."""
    arr = np.asarray(chart)
    chosen = [types.index(first)]
    while len(chosen) < 4:
        covered = (arr[chosen] >= 2).any(axis=0)
        gains = [(-int(((arr[t] >= 2) & ~covered).sum()), t) for t in range(len(types)) if t not in chosen]
        chosen.append(min(gains)[1])
    return [types[t] for t in chosen[1:]]


def write_fixture(out_dir: str | Path, seed: int, size: int, type_count: int,
                  dominant: bool = False, counts: dict[str, int] | None = None) -> Fixture:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc, tiers, dom = generate_fixture(seed, size, type_count, dominant, counts)
    roster_path = out_dir / "roster.json"
    tier_path = out_dir / "tiers.json"
    roster_path.write_text(json.dumps(doc, indent=1) + "\n")
    tier_path.write_text(json.dumps(tiers, indent=1) + "\n")
    tally = {t: sum(1 for v in tiers.values() if v == t) for t in TIER_ORDER}
    return Fixture(roster_path, tier_path, dom, tally)
