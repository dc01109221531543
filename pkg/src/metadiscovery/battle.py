"""Seeded 6-vs-6 singles battle resolution.

Every battler is level 100 with no EVs/IVs: ``maxHp = 2*base + 110`` and every
other stat is ``2*base + 5``. Damage follows the mainline closed form

    base = floor(42 * power * A / D / 50) + 2

then, flooring after each step: critical hit (x1.5, chance 1/24), random roll
(85..100 %), STAB (x1.5) and composed type effectiveness. A hit that is not
fully resisted always deals at least 1 damage.

Each battle owns four engine streams (order, accuracy, crit, damage) plus one
stream per agent, all derived from the battle seed, so agent choices never
shift damage rolls.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, NamedTuple, Sequence

from .rng import derive_seed
from .roster import Roster

LEVEL = 100
TEAM_SIZE = 6
TURN_CAP = 500
CRIT_CHANCE = 1 / 24
PHYSICAL, SPECIAL, STATUS = 0, 1, 2
_CATEGORY_CODES = {"physical": PHYSICAL, "special": SPECIAL, "status": STATUS}


class Side(IntEnum):
    A = 0
    B = 1

    @property
    def other(self) -> "Side":
        return Side(1 - self)


class IllegalActionError(ValueError):
    pass


class BattleFinishedError(RuntimeError):
    pass


class Action(NamedTuple):
    kind: str  # "move" or "switch"
    slot: int

    def __repr__(self):
        return f"{self.kind}({self.slot})"


MOVES = tuple(Action("move", i) for i in range(4))
SWITCHES = tuple(Action("switch", i) for i in range(TEAM_SIZE))


class MoveRecord(NamedTuple):
    type: int
    power: int
    accuracy: float
    category: int
    id: str


class BattleTables:
    """Roster data compiled into flat per-character lists for the hot loop."""

    def __init__(self, roster: Roster):
        chart = roster.chart
        self.roster = roster
        self.size = len(roster)
        self.max_hp = [2 * c.base_stats[0] + 110 for c in roster.characters]
        self.stats = [tuple(2 * s + 5 for s in c.base_stats) for c in roster.characters]
        self.speed = [s[5] for s in self.stats]
        self.types = [c.types for c in roster.characters]
        self.moves = [
            tuple(
                MoveRecord(m.type, m.base_power, m.accuracy, _CATEGORY_CODES[m.category], m.id)
                for m in (roster.moves[mid] for mid in c.moves)
            )
            for c in roster.characters
        ]
        self.stab = [tuple(m.type in c.types for m in moves)
                     for c, moves in zip(roster.characters, self.moves)]
        # eff[t][i]: composed multiplier of attacking type t against character i
        self.eff = [
            [chart.effectiveness(t, c.types) for c in roster.characters]
            for t in range(chart.size)
        ]


@dataclass(slots=True)
class BattlerState:
    character: int
    current_hp: int
    max_hp: int

    @property
    def fainted(self) -> bool:
        return self.current_hp == 0


@dataclass(slots=True)
class TeamState:
    members: list[BattlerState]
    active_index: int = 0

    @property
    def active(self) -> BattlerState:
        return self.members[self.active_index]

    def alive_count(self) -> int:
        return sum(1 for m in self.members if m.current_hp > 0)

    def hp_fraction(self) -> float:
        return sum(m.current_hp / m.max_hp for m in self.members)

    def fainted_count(self) -> int:
        return sum(1 for m in self.members if m.current_hp == 0)


@dataclass(slots=True)
class BattleState:
    teams: tuple[TeamState, TeamState]
    turn: int = 0
    winner: Side | None = None

    @property
    def finished(self) -> bool:
        return self.winner is not None


@dataclass(frozen=True)
class BattleResult:
    winner: Side
    turns: int
    participants: tuple[int, ...]  # side A's six, then side B's six

    @property
    def winners(self) -> tuple[int, ...]:
        return self.participants[:6] if self.winner == Side.A else self.participants[6:]

    @property
    def losers(self) -> tuple[int, ...]:
        return self.participants[6:] if self.winner == Side.A else self.participants[:6]


@dataclass
class BattleStreams:
    order: random.Random
    accuracy: random.Random
    crit: random.Random
    damage: random.Random
    agents: tuple[random.Random, random.Random]
    mirror: bool = False

    @classmethod
    def from_seed(cls, seed: int, mirror: bool = False) -> "BattleStreams":
        agents = (random.Random(derive_seed(seed, "agent", 0)),
                  random.Random(derive_seed(seed, "agent", 1)))
        if mirror:
            agents = agents[::-1]
        return cls(
            order=random.Random(derive_seed(seed, "order")),
            accuracy=random.Random(derive_seed(seed, "accuracy")),
            crit=random.Random(derive_seed(seed, "crit")),
            damage=random.Random(derive_seed(seed, "damage")),
            agents=agents,
            mirror=mirror,
        )

    def coin(self) -> Side:
        """Fair coin from the order stream; mirrored battles read it from the other side."""
        heads = self.order.random() < 0.5
        return Side.A if heads != self.mirror else Side.B


class Observation(NamedTuple):
    """What one side can see: its own team, and the opponent's active battler only."""

    side: Side
    team: TeamState
    forced_switch: bool
    opponent_character: int
    opponent_types: tuple[int, ...]
    opponent_hp_fraction: float
    opponent_fainted: int


def observe(state: BattleState, side: Side, tables: BattleTables) -> Observation:
    team = state.teams[side]
    opp = state.teams[1 - side]
    opp_active = opp.active
    return Observation(
        side, team, team.active.current_hp == 0, opp_active.character,
        tables.types[opp_active.character], opp_active.current_hp / opp_active.max_hp,
        opp.fainted_count(),
    )


def new_battle(tables: BattleTables, team_a: Sequence[int], team_b: Sequence[int]) -> BattleState:
    teams = []
    for label, team in (("A", team_a), ("B", team_b)):
        if len(team) != TEAM_SIZE or len(set(team)) != TEAM_SIZE:
            raise ValueError(f"team {label} must hold {TEAM_SIZE} distinct characters: {list(team)}")
        for c in team:
            if not 0 <= c < tables.size:
                raise ValueError(f"team {label}: character index {c} out of range")
        teams.append(TeamState([BattlerState(c, tables.max_hp[c], tables.max_hp[c]) for c in team]))
    return BattleState((teams[0], teams[1]))


def legal_actions(state: BattleState, side: Side, tables: BattleTables) -> list[Action]:
    if state.winner is not None:
        raise BattleFinishedError("battle is finished")
    team = state.teams[side]
    active = team.active
    switches = [SWITCHES[i] for i, m in enumerate(team.members)
                if m.current_hp > 0 and i != team.active_index]
    if active.current_hp == 0:
        return switches
    return list(MOVES[:len(tables.moves[active.character])]) + switches


def damage_formula(power: int, attack: int, defense: int, stab: bool, effectiveness: float,
                   crit: bool = False, roll: int = 100) -> int:
    """Deterministic part of the damage calculation; ``roll`` is a percentage in 85..100."""
    if effectiveness == 0:
        return 0
    dmg = (42 * power * attack) // (50 * defense) + 2
    if crit:
        dmg = dmg * 3 // 2
    dmg = dmg * roll // 100
    if stab:
        dmg = dmg * 3 // 2
    dmg = int(dmg * effectiveness)
    return max(dmg, 1)


def compute_damage(tables: BattleTables, attacker: BattlerState, defender: BattlerState,
                   slot: int, streams: BattleStreams) -> int:
    a = attacker.character
    d = defender.character
    move = tables.moves[a][slot]
    if move.category == STATUS:
        raise ValueError(f"status move {move.id!r} deals no damage")
    if move.accuracy < 1.0 and streams.accuracy.random() >= move.accuracy:
        return 0
    crit = streams.crit.random() < CRIT_CHANCE
    roll = 85 + int(streams.damage.random() * 16)
    if move.category == PHYSICAL:
        attack, defense = tables.stats[a][1], tables.stats[d][2]
    else:
        attack, defense = tables.stats[a][3], tables.stats[d][4]
    return damage_formula(move.power, attack, defense, tables.stab[a][slot],
                          tables.eff[move.type][d], crit, roll)


def _check_action(state: BattleState, side: Side, action: Action | None, tables: BattleTables):
    team = state.teams[side]
    active = team.active
    if active.current_hp == 0:
        if action is None or action.kind != "switch":
            raise IllegalActionError(f"side {side.name} must switch out a fainted battler")
    elif any(t.active.current_hp == 0 for t in state.teams):
        if action is not None:
            raise IllegalActionError(f"side {side.name} cannot act during the opponent's forced switch")
        return
    if action is None:
        raise IllegalActionError(f"side {side.name} must act")
    if action.kind == "switch":
        if not 0 <= action.slot < TEAM_SIZE or action.slot == team.active_index \
                or team.members[action.slot].current_hp == 0:
            raise IllegalActionError(f"side {side.name}: illegal switch to slot {action.slot}")
    elif action.kind == "move":
        if not 0 <= action.slot < len(tables.moves[active.character]):
            raise IllegalActionError(f"side {side.name}: no move in slot {action.slot}")
    else:
        raise IllegalActionError(f"unknown action kind {action.kind!r}")


def resolve_turn(state: BattleState, action_a: Action | None, action_b: Action | None,
                 tables: BattleTables, streams: BattleStreams, log: dict | None = None) -> BattleState:
    """Apply one simultaneous turn in place and return the state.

    ``None`` marks a side that does not act because the opponent is replacing
    a fainted battler.
    """
    if state.winner is not None:
        raise BattleFinishedError("battle is finished")
    actions = (action_a, action_b)
    _check_action(state, Side.A, action_a, tables)
    _check_action(state, Side.B, action_b, tables)
    teams = state.teams
    for side in (0, 1):
        act = actions[side]
        if act is not None and act.kind == "switch":
            teams[side].active_index = act.slot
    movers = [side for side in (0, 1) if actions[side] is not None and actions[side].kind == "move"]
    if len(movers) == 2:
        speed_a = tables.speed[teams[0].active.character]
        speed_b = tables.speed[teams[1].active.character]
        if speed_a == speed_b:
            first = streams.coin()
        else:
            first = Side.A if speed_a > speed_b else Side.B
        movers = [first, 1 - first]
    for side in movers:
        attacker = teams[side].active
        if attacker.current_hp == 0:
            continue
        slot = actions[side].slot
        if tables.moves[attacker.character][slot].category == STATUS:
            continue
        defender_team = teams[1 - side]
        defender = defender_team.active
        dmg = min(compute_damage(tables, attacker, defender, slot, streams), defender.current_hp)
        defender.current_hp -= dmg
        if log is not None:
            log.setdefault("damage", []).append({"side": Side(side).name, "slot": slot, "damage": dmg})
        if defender.current_hp == 0:
            if log is not None:
                log.setdefault("faints", []).append(
                    {"side": Side(1 - side).name, "character": defender.character})
            if defender_team.alive_count() == 0:
                state.winner = Side(side)
                break
    state.turn += 1
    return state


def _cap_winner(state: BattleState, streams: BattleStreams) -> Side:
    a, b = state.teams
    if a.alive_count() != b.alive_count():
        return Side.A if a.alive_count() > b.alive_count() else Side.B
    hp_a, hp_b = a.hp_fraction(), b.hp_fraction()
    if hp_a != hp_b:
        return Side.A if hp_a > hp_b else Side.B
    return streams.coin()


Agent = Callable[[Observation, list, random.Random], Action]


def run_battle(tables: BattleTables, team_a: Sequence[int], team_b: Sequence[int],
               agent_a, agent_b, seed: int, mirror: bool = False,
               log: Callable[[dict], None] | None = None) -> BattleResult:
    """Play a full battle; identical arguments always give the identical result.

    ``mirror`` swaps the side roles of the side-specific random streams, so
    ``run_battle(B, A, ..., mirror=True)`` replays ``run_battle(A, B, ...)``
    with the winner label flipped.
    """
    state = new_battle(tables, team_a, team_b)
    streams = BattleStreams.from_seed(seed, mirror)
    agents = (agent_a, agent_b)
    teams = state.teams
    while state.winner is None:
        if state.turn >= TURN_CAP:
            state.winner = _cap_winner(state, streams)
            break
        pending = (teams[0].active.current_hp == 0, teams[1].active.current_hp == 0)
        actions = [None, None]
        for side in (Side.A, Side.B):
            if pending[side] or not (pending[0] or pending[1]):
                legal = legal_actions(state, side, tables)
                obs = observe(state, side, tables)
                actions[side] = agents[side].choose(obs, legal, streams.agents[side])
        entry = {"turn": state.turn + 1, "actions": [repr(a) if a else None for a in actions]} \
            if log is not None else None
        resolve_turn(state, actions[0], actions[1], tables, streams, entry)
        if log is not None:
            log(entry)
    participants = tuple(m.character for m in teams[0].members) + \
        tuple(m.character for m in teams[1].members)
    return BattleResult(state.winner, state.turn, participants)
