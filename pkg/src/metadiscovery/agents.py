"""Battle policies: a uniform random agent and a type-aware heuristic agent."""
from __future__ import annotations

import random
from typing import Sequence

from .battle import STATUS, Action, BattleTables, Observation

AGENT_KINDS = ("random", "heuristic")


def random_policy(legal: Sequence[Action], rng: random.Random) -> Action:
    if not legal:
        raise ValueError("no legal actions")
    return legal[int(rng.random() * len(legal))]


def offense(tables: BattleTables, character: int, target: int) -> float:
    """Best type multiplier among a character's damaging moves against ``target``."""
    best = 0.0
    eff = tables.eff
    for m in tables.moves[character]:
        if m.category != STATUS and eff[m.type][target] > best:
            best = eff[m.type][target]
    return best


def defense(tables: BattleTables, attacker_types: Sequence[int], character: int) -> float:
    """Worst-case multiplier the attacker's own types deal to ``character``."""
    return max(tables.eff[t][character] for t in attacker_types)


def matchup(tables: BattleTables, character: int, opponent: int, opponent_types) -> float:
    return offense(tables, character, opponent) - defense(tables, opponent_types, character)


def _best_switch(tables: BattleTables, obs: Observation, switches, predicate=None) -> Action | None:
    best, best_score = None, None
    for action in switches:  # slot order, so strict ">" keeps the lowest slot on ties
        mate = obs.team.members[action.slot].character
        if predicate is not None and not predicate(mate):
            continue
        score = matchup(tables, mate, obs.opponent_character, obs.opponent_types)
        if best_score is None or score > best_score:
            best, best_score = action, score
    return best


def heuristic_policy(tables: BattleTables, obs: Observation, legal: Sequence[Action],
                     rng: random.Random | None = None) -> Action:
    """Pick the highest expected-damage move, switching out of bad matchups.

    Rules, in order:
      1. forced switch: the teammate with the best matchup against the opposing active;
      2. otherwise the move maximising power * STAB * effectiveness * accuracy;
      3. if that move is resisted (effectiveness < 1), switch to the best teammate that
         resists the opponent's types (<= 0.5x) and hits it for >= 2x, if any.
    Ties go to the lowest slot, so ``rng`` is never consumed.
    """
    if not legal:
        raise ValueError("no legal actions")
    switches = [a for a in legal if a.kind == "switch"]
    if obs.forced_switch:
        return _best_switch(tables, obs, switches)
    active = obs.team.active.character
    opp = obs.opponent_character
    moves = tables.moves[active]
    stab = tables.stab[active]
    best, best_score, best_eff = None, -1.0, 0.0
    for action in legal:
        if action.kind != "move":
            continue
        m = moves[action.slot]
        eff = tables.eff[m.type][opp]
        score = 0.0 if m.category == STATUS else \
            m.power * (1.5 if stab[action.slot] else 1.0) * eff * m.accuracy
        if score > best_score:
            best, best_score, best_eff = action, score, eff
    if best_eff < 1.0 and switches:
        opp_types = obs.opponent_types
        escape = _best_switch(
            tables, obs, switches,
            lambda mate: defense(tables, opp_types, mate) <= 0.5 and offense(tables, mate, opp) >= 2.0,
        )
        if escape is not None:
            return escape
    return best


class RandomAgent:
    kind = "random"

    def choose(self, obs: Observation, legal, rng: random.Random) -> Action:
        return random_policy(legal, rng)


class HeuristicAgent:
    kind = "heuristic"

    def __init__(self, tables: BattleTables):
        self.tables = tables

    def choose(self, obs: Observation, legal, rng: random.Random) -> Action:
        return heuristic_policy(self.tables, obs, legal, rng)


def make_agent(kind: str, tables: BattleTables):
    if kind == "random":
        return RandomAgent()
    if kind == "heuristic":
        return HeuristicAgent(tables)
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")
