from __future__ import annotations

import pytest

from metadiscovery.fixtures import generate_fixture
from metadiscovery.roster import roster_from_dict

VERDICTS: dict[str, str] = {}


def small_roster(characters, types=("fire", "water", "grass"), chart=None, moves=None):
    """Build a roster from compact tuples: (species, types, stats, moves[, tier])."""
    n = len(types)
    if chart is None:
        chart = [[1.0] * n for _ in range(n)]
    if moves is None:
        moves = [{"id": f"{t}-{p}", "type": t, "base_power": p, "accuracy": 1.0,
                  "category": "physical"} for t in types for p in (40, 80)]
    chars = []
    for entry in characters:
        species, ctypes, stats, cmoves = entry[:4]
        doc = {"species": species, "types": list(ctypes), "base_stats": list(stats), "moves": list(cmoves)}
        if len(entry) > 4:
            doc["tier"] = entry[4]
        chars.append(doc)
    return roster_from_dict({"types": list(types), "chart": chart, "moves": moves, "characters": chars})


def fixture_roster(seed=1, size=20, type_count=6, dominant=False):
    doc, tiers, dom = generate_fixture(seed, size, type_count, dominant)
    return roster_from_dict(doc, tiers), dom


@pytest.fixture(scope="session")
def roster20():
    return fixture_roster(seed=11, size=20, type_count=6)[0]


@pytest.fixture(scope="session")
def roster50():
    return fixture_roster(seed=5, size=50, type_count=18)[0]


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for name in sorted(VERDICTS, key=lambda k: int(k.split()[1].rstrip(":"))):
            terminalreporter.write_line(f"{name} {VERDICTS[name]}")
