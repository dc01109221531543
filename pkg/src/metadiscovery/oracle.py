"""Analytic one-on-one matchup table, used as a ground-truth meta for synthetic scenarios.

Each duel is settled in closed form from expected damage per turn, without
running the battle engine: the side that needs fewer turns to knock the other
out wins, the faster side wins a tie, and identical speed splits the point.
"""
from __future__ import annotations

import math

import numpy as np

from .discovery import MetaSnapshot, RankEntry
from .roster import Roster

_MEAN_ROLL = 0.925
_MEAN_CRIT = 1 + 0.5 / 24


def _stat(base: int) -> int:
    return 2 * base + 5


def expected_damage(roster: Roster, x: int, y: int) -> float:
    """Best expected damage per turn that ``x`` deals to ``y``."""
    cx, cy = roster.characters[x], roster.characters[y]
    best = 0.0
    for mid in cx.moves:
        m = roster.moves[mid]
        if m.is_status:
            continue
        eff = roster.chart.effectiveness(m.type, cy.types)
        if eff == 0:
            continue
        if m.category == "physical":
            a, d = _stat(cx.base_stats[1]), _stat(cy.base_stats[2])
        else:
            a, d = _stat(cx.base_stats[3]), _stat(cy.base_stats[4])
        stab = 1.5 if m.type in cx.types else 1.0
        dmg = (42 * m.base_power * a / d / 50 + 2) * _MEAN_CRIT * _MEAN_ROLL * stab * eff * m.accuracy
        best = max(best, dmg)
    return best


def duel(roster: Roster, x: int, y: int) -> float:
    """1.0 if x beats y one-on-one, 0.0 if it loses, 0.5 for a dead heat."""
    hp_x = 2 * roster.characters[x].base_stats[0] + 110
    hp_y = 2 * roster.characters[y].base_stats[0] + 110
    dxy, dyx = expected_damage(roster, x, y), expected_damage(roster, y, x)
    ttk_x = math.ceil(hp_y / dxy) if dxy > 0 else math.inf
    ttk_y = math.ceil(hp_x / dyx) if dyx > 0 else math.inf
    if ttk_x != ttk_y:
        return 1.0 if ttk_x < ttk_y else 0.0
    if ttk_x == math.inf:
        return 0.5
    sx, sy = roster.characters[x].base_stats[5], roster.characters[y].base_stats[5]
    if sx != sy:
        return 1.0 if sx > sy else 0.0
    return 0.5


def matchup_table(roster: Roster) -> np.ndarray:
    n = len(roster)
    table = np.full((n, n), 0.5)
    for x in range(n):
        for y in range(x + 1, n):
            table[x, y] = duel(roster, x, y)
            table[y, x] = 1.0 - table[x, y]
    return table


def strength(table: np.ndarray, eligible: np.ndarray, field_weights: np.ndarray | None = None) -> np.ndarray:
    """Mean duel score against the eligible field (optionally usage-weighted)."""
    w = eligible.astype(float) if field_weights is None else np.where(eligible, field_weights, 0.0)
    out = np.zeros(len(table))
    for x in range(len(table)):
        wx = w.copy()
        wx[x] = 0.0
        out[x] = (table[x] * wx).sum() / wx.sum() if wx.sum() > 0 else 0.0
    return out


def oracle_meta(roster: Roster, eligible: np.ndarray, meta_size: int,
                table: np.ndarray | None = None, field_weights: np.ndarray | None = None) -> MetaSnapshot:
    """Eligible characters ranked by matchup strength, then base stat total, then species."""
    table = matchup_table(roster) if table is None else table
    s = strength(table, eligible, field_weights)
    order = sorted(np.flatnonzero(eligible), key=lambda i: (-s[i], -roster.bst[i], roster.species(i)))
    return MetaSnapshot(tuple(RankEntry(roster.species(i), float(s[i])) for i in order), meta_size)
