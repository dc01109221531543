"""Roster, move and type-chart loading plus the static per-character values.

Roster file layout (JSON, ``format_version`` 1)::

    {
      "format_version": 1,
      "types": ["fire", "water", ...],
      "chart": [[1, 0.5, ...], ...],          # chart[attacker][defender]
      "moves": [{"id": "ember", "type": "fire", "base_power": 40,
                 "accuracy": 1.0, "category": "special"}, ...],
      "characters": [{"species": "charmander", "types": ["fire"],
                      "base_stats": {"hp": 39, "atk": 52, "def": 43,
                                     "spa": 60, "spd": 50, "spe": 65},
                      "moves": ["ember"], "tier": "LC"}, ...]
    }

Types may be given by name or by integer index. ``tier`` is optional; a
separate tier file (a JSON object mapping species to label) overrides it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

FORMAT_VERSION = 1
STAT_NAMES = ("hp", "atk", "def", "spa", "spd", "spe")
CATEGORIES = ("physical", "special", "status")
MULTIPLIER_SCORES = {0.0: -2, 0.5: -1, 1.0: 0, 2.0: 1}


class RosterError(ValueError):
    """Malformed or inconsistent roster data; ``location`` points at the offending entry."""

    def __init__(self, message: str, location: str = ""):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class TypeChart:
    names: tuple[str, ...]
    multipliers: np.ndarray
    score_values: np.ndarray

    @classmethod
    def from_multipliers(cls, names: Sequence[str], matrix) -> "TypeChart":
        names = tuple(names)
        mult = np.asarray(matrix, dtype=float)
        if mult.shape != (len(names), len(names)):
            raise RosterError(f"chart must be {len(names)}x{len(names)}, got {mult.shape}", "chart")
        scores = np.empty(mult.shape, dtype=np.int64)
        for (a, d), value in np.ndenumerate(mult):
            if float(value) not in MULTIPLIER_SCORES:
                raise RosterError(f"multiplier {value} not in {{0, 0.5, 1, 2}}", f"chart[{a}][{d}]")
            scores[a, d] = MULTIPLIER_SCORES[float(value)]
        mult.flags.writeable = False
        scores.flags.writeable = False
        return cls(names, mult, scores)

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise RosterError(f"unknown type {name!r}") from None

    def effectiveness(self, attack_type: int, defender_types: Iterable[int]) -> float:
        """Composed multiplier of one attacking type against a (dual) typing."""
        out = 1.0
        for d in defender_types:
            out *= float(self.multipliers[attack_type, d])
        return out


@dataclass(frozen=True)
class MoveDef:
    id: str
    type: int
    base_power: int
    accuracy: float
    category: str

    @property
    def is_status(self) -> bool:
        return self.category == "status"


@dataclass(frozen=True)
class Character:
    species: str
    types: tuple[int, ...]
    base_stats: tuple[int, int, int, int, int, int]
    moves: tuple[str, ...]
    tier: str | None = None

    @property
    def stat_sum(self) -> int:
        return sum(self.base_stats)


@dataclass(frozen=True)
class Roster:
    characters: tuple[Character, ...]
    moves: Mapping[str, MoveDef]
    chart: TypeChart
    species_index: Mapping[str, int] = field(repr=False)
    bst: np.ndarray = field(repr=False)
    type_membership: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, characters: Sequence[Character], moves: Mapping[str, MoveDef],
              chart: TypeChart) -> "Roster":
        characters = tuple(characters)
        species_index: dict[str, int] = {}
        for i, c in enumerate(characters):
            loc = f"characters[{i}]"
            if c.species in species_index:
                raise RosterError(f"duplicate species {c.species!r}", loc)
            species_index[c.species] = i
            _validate_character(c, moves, chart, loc)
        if not characters:
            raise RosterError("roster has no characters", "characters")
        sums = np.array([c.stat_sum for c in characters], dtype=float)
        bst = sums / sums.max()
        membership = np.zeros((len(characters), chart.size))
        for i, c in enumerate(characters):
            for t in c.types:
                membership[i, t] = 1.0 / len(c.types)
        bst.flags.writeable = False
        membership.flags.writeable = False
        return cls(characters, dict(moves), chart, species_index, bst, membership)

    def __len__(self) -> int:
        return len(self.characters)

    def index(self, species: str) -> int:
        try:
            return self.species_index[species]
        except KeyError:
            raise KeyError(f"unknown species {species!r}") from None

    def species(self, i: int) -> str:
        return self.characters[i].species

    def base_stat_total(self, i: int) -> float:
        return float(self.bst[i])

    def tier_map(self) -> dict[str, str]:
        return {c.species: c.tier for c in self.characters if c.tier is not None}

    def character_values(self, type_vector: np.ndarray) -> np.ndarray:
        """Map a per-type vector onto characters, averaging over dual types."""
        return self.type_membership @ type_vector


def _validate_character(c: Character, moves: Mapping[str, MoveDef], chart: TypeChart, loc: str):
    if not 1 <= len(c.types) <= 2:
        raise RosterError(f"{c.species}: needs 1 or 2 types, got {len(c.types)}", f"{loc}.types")
    if len(set(c.types)) != len(c.types):
        raise RosterError(f"{c.species}: types must be distinct", f"{loc}.types")
    for t in c.types:
        if not 0 <= t < chart.size:
            raise RosterError(f"{c.species}: type index {t} out of range", f"{loc}.types")
    if len(c.base_stats) != 6:
        raise RosterError(f"{c.species}: needs 6 base stats", f"{loc}.base_stats")
    for name, value in zip(STAT_NAMES, c.base_stats):
        if not 1 <= value <= 255:
            raise RosterError(f"{c.species}: base stat {name}={value} outside [1, 255]",
                              f"{loc}.base_stats.{name}")
    if not 1 <= len(c.moves) <= 4:
        raise RosterError(f"{c.species}: needs 1-4 moves, got {len(c.moves)}", f"{loc}.moves")
    for j, move_id in enumerate(c.moves):
        if move_id not in moves:
            raise RosterError(f"{c.species}: move {move_id!r} is not defined", f"{loc}.moves[{j}]")


def _validate_move(m: MoveDef, chart: TypeChart, loc: str):
    if m.category not in CATEGORIES:
        raise RosterError(f"move {m.id!r}: bad category {m.category!r}", f"{loc}.category")
    if not 0 <= m.type < chart.size:
        raise RosterError(f"move {m.id!r}: type index {m.type} out of range", f"{loc}.type")
    if not 0.0 < m.accuracy <= 1.0:
        raise RosterError(f"move {m.id!r}: accuracy {m.accuracy} outside (0, 1]", f"{loc}.accuracy")
    if m.is_status and m.base_power != 0:
        raise RosterError(f"status move {m.id!r} must have base_power 0", f"{loc}.base_power")
    if not m.is_status and m.base_power <= 0:
        raise RosterError(f"damaging move {m.id!r} needs base_power > 0", f"{loc}.base_power")


def _type_ref(value, chart: TypeChart, loc: str) -> int:
    if isinstance(value, bool):
        raise RosterError(f"bad type reference {value!r}", loc)
    if isinstance(value, int):
        if not 0 <= value < chart.size:
            raise RosterError(f"type index {value} out of range", loc)
        return value
    if isinstance(value, str):
        try:
            return chart.index(value)
        except RosterError:
            raise RosterError(f"unknown type {value!r}", loc) from None
    raise RosterError(f"bad type reference {value!r}", loc)


def roster_from_dict(doc: Mapping, tiers: Mapping[str, str] | None = None) -> Roster:
    try:
        version = doc.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise RosterError(f"unsupported format_version {version}", "format_version")
        chart = TypeChart.from_multipliers(doc["types"], doc["chart"])
        moves: dict[str, MoveDef] = {}
        for i, raw in enumerate(doc["moves"]):
            loc = f"moves[{i}]"
            move = MoveDef(
                id=str(raw["id"]),
                type=_type_ref(raw["type"], chart, f"{loc}.type"),
                base_power=int(raw["base_power"]),
                accuracy=float(raw.get("accuracy", 1.0)),
                category=str(raw["category"]),
            )
            if move.id in moves:
                raise RosterError(f"duplicate move id {move.id!r}", loc)
            _validate_move(move, chart, loc)
            moves[move.id] = move
        characters = []
        for i, raw in enumerate(doc["characters"]):
            loc = f"characters[{i}]"
            stats = raw["base_stats"]
            if isinstance(stats, Mapping):
                missing = [s for s in STAT_NAMES if s not in stats]
                if missing:
                    raise RosterError(f"missing base stats {missing}", f"{loc}.base_stats")
                stats = [stats[s] for s in STAT_NAMES]
            characters.append(Character(
                species=str(raw["species"]),
                types=tuple(_type_ref(t, chart, f"{loc}.types") for t in raw["types"]),
                base_stats=tuple(int(s) for s in stats),
                moves=tuple(str(m) for m in raw["moves"]),
                tier=raw.get("tier"),
            ))
    except KeyError as exc:
        raise RosterError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RosterError):
            raise
        raise RosterError(f"malformed roster: {exc}") from None
    if tiers is not None:
        known = {c.species for c in characters}
        for species in tiers:
            if species not in known:
                raise RosterError(f"tier entry for unknown species {species!r}", "tiers")
        characters = [Character(c.species, c.types, c.base_stats, c.moves,
                                tiers.get(c.species, c.tier)) for c in characters]
    return Roster.build(characters, moves, chart)


def load_roster(roster_file: str | Path, tier_file: str | Path | None = None) -> Roster:
    """Read and validate a roster file; errors carry the file path and entry location."""
    roster_file = Path(roster_file)
    try:
        doc = json.loads(roster_file.read_text())
    except json.JSONDecodeError as exc:
        raise RosterError(f"parse error: {exc.msg}", f"{roster_file}:{exc.lineno}:{exc.colno}") from None
    tiers = None
    if tier_file is not None:
        tier_file = Path(tier_file)
        try:
            tiers = json.loads(tier_file.read_text())
        except json.JSONDecodeError as exc:
            raise RosterError(f"parse error: {exc.msg}", f"{tier_file}:{exc.lineno}:{exc.colno}") from None
        if not isinstance(tiers, dict):
            raise RosterError("tier file must be a JSON object", str(tier_file))
    try:
        return roster_from_dict(doc, tiers)
    except RosterError as exc:
        loc = f"{roster_file}:{exc.location}" if exc.location else str(roster_file)
        raise RosterError(exc.message, loc) from None


def roster_to_dict(roster: Roster) -> dict:
    chart = roster.chart
    return {
        "format_version": FORMAT_VERSION,
        "types": list(chart.names),
        "chart": [[float(v) for v in row] for row in chart.multipliers],
        "moves": [
            {"id": m.id, "type": chart.names[m.type], "base_power": m.base_power,
             "accuracy": m.accuracy, "category": m.category}
            for m in roster.moves.values()
        ],
        "characters": [
            {"species": c.species, "types": [chart.names[t] for t in c.types],
             "base_stats": dict(zip(STAT_NAMES, c.base_stats)), "moves": list(c.moves),
             **({"tier": c.tier} if c.tier is not None else {})}
            for c in roster.characters
        ],
    }


def base_stat_total(roster: Roster, i: int) -> float:
    return roster.base_stat_total(i)


def minmax(vector: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant vector maps to all zeros."""
    vector = np.asarray(vector, dtype=float)
    lo, hi = vector.min(), vector.max()
    if hi == lo:
        return np.zeros_like(vector)
    return (vector - lo) / (hi - lo)


def type_group_sums(types: Iterable[int], chart: TypeChart) -> np.ndarray:
    """Per attacking type, summed score against every member of a type group (a multiset)."""
    counts = np.bincount(np.fromiter(types, dtype=np.int64), minlength=chart.size)
    if counts.sum() == 0:
        raise ValueError("type group is empty")
    return chart.score_values @ counts


def type_vector_for(types: Iterable[int], chart: TypeChart) -> np.ndarray:
    return minmax(type_group_sums(types, chart))
