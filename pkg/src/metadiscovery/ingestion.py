"""Usage-table ingestion.

Canonical text format, one table per month::

    # comment lines start with '#'
    + ---- + --------- + -------- +
    | Rank | Species   | Usage %  |
    + ---- + --------- + -------- +
    | 1    | Greninja  | 31.5%    |
    | 2    | Landorus  | 27.25%   |

Blank lines, ``#`` comments and ``+`` separator lines are skipped. The first
cell of a header row is ``Rank``. Data rows need at least three cells (extra
columns are ignored); ranks must run 1, 2, 3, ... in file order and usage
must not increase with rank. The trailing ``%`` is optional; the value is
always a percentage.

The JSON equivalent is ``[{"rank": 1, "species": "...", "usage": 0.315}, ...]``
with usage stored as a fraction.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .roster import Roster
from .stats import UsageStats

log = logging.getLogger(__name__)


class UsageParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<text>"):
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class UnknownSpeciesError(KeyError):
    pass


@dataclass(frozen=True)
class UsageRecord:
    species: str
    usage: float
    rank: int


def _parse_percent(cell: str) -> float:
    text = cell.strip()
    if text.endswith("%"):
        text = text[:-1].strip()
    value = Decimal(text)
    if not value.is_finite():
        raise InvalidOperation
    return float(value / 100)


def parse_usage_table(text: str, source: str = "<text>") -> list[UsageRecord]:
    records: list[UsageRecord] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("+"):
            continue
        if not line.startswith("|"):
            raise UsageParseError(f"expected a table row, got {line[:40]!r}", lineno, source)
        cells = [c.strip() for c in line.strip("|").split("|")]
        if len(cells) < 3:
            raise UsageParseError(f"row has {len(cells)} cells, need rank | species | usage",
                                  lineno, source)
        if cells[0].lower() == "rank":
            continue
        try:
            rank = int(cells[0])
        except ValueError:
            raise UsageParseError(f"rank {cells[0]!r} is not an integer", lineno, source) from None
        species = cells[1]
        if not species:
            raise UsageParseError("empty species name", lineno, source)
        try:
            usage = _parse_percent(cells[2])
        except (InvalidOperation, ValueError):
            raise UsageParseError(f"usage {cells[2]!r} is not a percentage", lineno, source) from None
        if not 0.0 <= usage <= 1.0:
            raise UsageParseError(f"usage {cells[2]!r} outside 0-100%", lineno, source)
        if rank != len(records) + 1:
            raise UsageParseError(f"non-contiguous rank {rank}, expected {len(records) + 1}",
                                  lineno, source)
        if records and usage > records[-1].usage:
            raise UsageParseError(f"usage increases at rank {rank}", lineno, source)
        records.append(UsageRecord(species, usage, rank))
    return records


def parse_usage_json(doc, source: str = "<json>") -> list[UsageRecord]:
    records = []
    for k, row in enumerate(doc, start=1):
        try:
            rec = UsageRecord(str(row["species"]).strip(), float(row["usage"]), int(row["rank"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageParseError(f"bad entry {k}: {exc}", None, source) from None
        if rec.rank != k:
            raise UsageParseError(f"non-contiguous rank {rec.rank}, expected {k}", None, source)
        if records and rec.usage > records[-1].usage:
            raise UsageParseError(f"usage increases at rank {rec.rank}", None, source)
        records.append(rec)
    return records


def read_usage(path: str | Path) -> list[UsageRecord]:
    path = Path(path)
    if path.suffix == ".json":
        return parse_usage_json(json.loads(path.read_text()), str(path))
    return parse_usage_table(path.read_text(), str(path))


def _percent_text(usage: float) -> str:
    # repr -> Decimal keeps every digit, so the parser recovers the same float
    return format((Decimal(repr(float(usage))) * 100).normalize(), "f")


def emit_usage_table(records: Sequence[UsageRecord], title: str | None = None) -> str:
    rows = [(str(r.rank), r.species, _percent_text(r.usage) + "%") for r in records]
    widths = [max([len("Rank")] + [len(row[0]) for row in rows]),
              max([len("Species")] + [len(row[1]) for row in rows]),
              max([len("Usage %")] + [len(row[2]) for row in rows])]
    sep = "+ " + " + ".join("-" * w for w in widths) + " +"

    def fmt(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    lines = [f"# {title}"] if title else []
    lines += [sep, fmt(("Rank", "Species", "Usage %")), sep]
    lines += [fmt(row) for row in rows]
    lines.append(sep)
    return "\n".join(lines) + "\n"


def emit_usage_json(records: Sequence[UsageRecord]) -> str:
    return json.dumps([{"rank": r.rank, "species": r.species, "usage": r.usage} for r in records],
                      indent=1)


def rerank(usage: dict[str, float]) -> list[UsageRecord]:
    order = sorted(usage.items(), key=lambda kv: (-kv[1], kv[0]))
    return [UsageRecord(s, u, r) for r, (s, u) in enumerate(order, start=1)]


def average_months(months: Sequence[Sequence[UsageRecord]]) -> list[UsageRecord]:
    """Equal-weight mean per species across months; a missing species counts as 0."""
    if not months:
        raise ValueError("no monthly usage tables to average")
    totals: dict[str, float] = {}
    for month in months:
        for rec in month:
            totals[rec.species] = totals.get(rec.species, 0.0) + rec.usage
    return rerank({s: total / len(months) for s, total in totals.items()})


def to_initial_stats(records: Iterable[UsageRecord], roster: Roster, nominal_battles: int = 100_000,
                     skip_unknown: bool = False) -> UsageStats:
    """Turn usage fractions into pick counts over a nominal number of battles.

    Wins and co-wins stay zero: public usage data does not carry them.
    """
    if nominal_battles <= 0:
        raise ValueError("nominal_battles must be positive")
    stats = UsageStats.empty(len(roster))
    stats.num_battles = nominal_battles
    seen = False
    for rec in records:
        seen = True
        if rec.species not in roster.species_index:
            if skip_unknown:
                log.warning("skipping unknown species %r", rec.species)
                continue
            raise UnknownSpeciesError(f"usage data names unknown species {rec.species!r}")
        stats.picks[roster.index(rec.species)] = int(np.floor(rec.usage * 2 * nominal_battles + 0.5))
    if not seen:
        raise ValueError("no usage records")
    return stats
