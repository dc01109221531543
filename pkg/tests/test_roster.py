import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metadiscovery.fixtures import generate_fixture, write_fixture
from metadiscovery.roster import (RosterError, TypeChart, load_roster, minmax, roster_from_dict,
                                  roster_to_dict, type_group_sums, type_vector_for)

from conftest import small_roster


def test_smallest_roster():
    r = roster_from_dict({
        "types": ["a", "b"], "chart": [[1, 1], [1, 1]],
        "moves": [{"id": "hit", "type": "a", "base_power": 50, "category": "physical"}],
        "characters": [{"species": "solo", "types": ["a"], "base_stats": [50] * 6, "moves": ["hit"]}],
    })
    assert len(r) == 1
    assert dict(r.species_index) == {"solo": 0}


def test_undefined_move_names_species_and_move():
    with pytest.raises(RosterError) as err:
        small_roster([("bulba", ["grass"], [45] * 6, ["vine-whip"])])
    assert "bulba" in str(err.value) and "vine-whip" in str(err.value)


@pytest.mark.parametrize("bad, fragment", [
    ({"base_stats": [0, 50, 50, 50, 50, 50]}, "hp=0"),
    ({"base_stats": [50, 256, 50, 50, 50, 50]}, "atk=256"),
    ({"types": ["fire", "fire"]}, "distinct"),
    ({"types": ["fire", "water", "grass"]}, "1 or 2 types"),
    ({"moves": []}, "1-4 moves"),
    ({"types": ["ice"]}, "unknown type"),
])
def test_character_validation(bad, fragment):
    entry = {"species": "x", "types": ["fire"], "base_stats": [50] * 6, "moves": ["fire-40"], **bad}
    doc = roster_to_dict(small_roster([("y", ["fire"], [50] * 6, ["fire-40"])]))
    doc["characters"].append(entry)
    with pytest.raises(RosterError, match=fragment):
        roster_from_dict(doc)


def test_chart_rejects_other_multipliers():
    with pytest.raises(RosterError, match="multiplier"):
        TypeChart.from_multipliers(["a", "b"], [[1, 1.5], [1, 1]])


def test_duplicate_species_rejected():
    with pytest.raises(RosterError, match="duplicate species"):
        small_roster([("a", ["fire"], [50] * 6, ["fire-40"]), ("a", ["water"], [50] * 6, ["water-40"])])


def test_load_roster_reports_file_and_location(tmp_path):
    doc = roster_to_dict(small_roster([("a", ["fire"], [50] * 6, ["fire-40"])]))
    doc["characters"][0]["moves"] = ["nope"]
    path = tmp_path / "r.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(RosterError) as err:
        load_roster(path)
    assert str(path) in str(err.value) and "characters[0].moves[0]" in str(err.value)
    path.write_text("{ not json")
    with pytest.raises(RosterError, match="parse error"):
        load_roster(path)


def test_tier_file_for_unknown_species(tmp_path):
    fx = write_fixture(tmp_path, 0, 20, 4)
    fx.tier_path.write_text(json.dumps({"ghost": "OU"}))
    with pytest.raises(RosterError, match="ghost"):
        load_roster(fx.roster_path, fx.tier_path)


def test_roundtrip_through_dict(roster20):
    again = roster_from_dict(roster_to_dict(roster20))
    assert again.characters == roster20.characters
    assert np.array_equal(again.chart.multipliers, roster20.chart.multipliers)


def test_740_fixture_loads(tmp_path):
    fx = write_fixture(tmp_path, 3, 740, 18)
    r = load_roster(fx.roster_path, fx.tier_path)
    assert len(r) == 740
    assert sum(c.tier == "LC" for c in r.characters) == 210


class TestBaseStatTotal:
    def test_maximum_is_one(self, roster20):
        assert roster20.bst.max() == 1.0

    def test_half_of_maximum(self):
        r = small_roster([("big", ["fire"], [120] * 6, ["fire-40"]), ("half", ["fire"], [60] * 6, ["fire-40"])])
        assert r.base_stat_total(r.index("half")) == 0.5

    def test_identical_stats(self):
        r = small_roster([(f"c{k}", ["fire"], [77] * 6, ["fire-40"]) for k in range(4)])
        assert np.all(r.bst == 1.0)


class TestTypeVector:
    def test_single_immunity(self):
        names = ["a", "b", "c"]
        chart = TypeChart.from_multipliers(names, [[1, 1, 1], [0, 1, 1], [1, 1, 1]])
        sums = type_group_sums([0], chart)
        assert sums.tolist() == [0, -2, 0]
        assert type_vector_for([0], chart).tolist() == [1.0, 0.0, 1.0]

    def test_balanced_chart_is_all_zero(self):
        chart = TypeChart.from_multipliers(["a", "b"], [[1, 1], [1, 1]])
        assert type_vector_for([0, 1], chart).tolist() == [0.0, 0.0]

    def test_three_type_group_column_sums(self):
        doc, _, _ = generate_fixture(2, 20, 18)
        chart = TypeChart.from_multipliers(doc["types"], doc["chart"])
        group = [3, 7, 11]
        expected = [sum(chart.score_values[a, d] for d in group) for a in range(18)]
        assert type_group_sums(group, chart).tolist() == expected

    def test_empty_group_raises(self):
        chart = TypeChart.from_multipliers(["a", "b"], [[1, 1], [1, 1]])
        with pytest.raises(ValueError):
            type_group_sums([], chart)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_minmax_bounds(values):
    out = minmax(np.array(values))
    assert out.min() >= 0.0 and out.max() <= 1.0
    if max(values) > min(values):
        assert out.max() == 1.0 and out.min() == 0.0
    else:
        assert np.all(out == 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(12, 80), st.integers(2, 12))
def test_generated_rosters_validate(seed, size, type_count):
    doc, tiers, _ = generate_fixture(seed, size, type_count)
    r = roster_from_dict(doc, tiers)
    assert len(r) == size
    assert all(2 <= len(c.moves) <= 4 for c in r.characters)
    assert np.allclose(r.type_membership.sum(axis=1), 1.0)
