import json
import os
import random

import pytest

from modules.classify import check_bistratified
from modules.corpus import (
    MAX_DEGREE,
    MAX_OBJECTS,
    bigluing_instances,
    builtin,
    enumerate_exact,
    enumerate_small,
    iso_pair_fs_structure,
    mismatches,
    names,
    random_diagram,
    random_diagram_map,
)
from modules.errors import BoundsExceeded, UnknownEntry
from modules.formats import dump_category

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def test_registry():
    assert len(names()) == 14
    assert names() == sorted(names())
    assert builtin("terminal") is builtin("terminal")
    with pytest.raises(UnknownEntry):
        builtin("no_such_entry")


def test_every_entry_records_all_classes():
    for n in names():
        entry = builtin(n)
        assert entry.name == n
        assert len(entry.expected) == 12
        assert entry.provenance


def test_emitted_entry_matches_golden_file():
    with open(os.path.join(GOLDEN, "iso_pair.json"), encoding="utf-8") as f:
        golden = json.load(f)
    assert dump_category(builtin("iso_pair").category) == golden


def test_mismatches_reports_differences():
    entry = builtin("terminal")
    verdicts = dict(entry.expected)
    assert mismatches(entry, verdicts) == []
    verdicts["reedy"] = False
    assert mismatches(entry, verdicts) == ["reedy"]


def test_small_enumeration_counts():
    assert len(list(enumerate_small(1, 2))) == 3 * (MAX_DEGREE + 1)
    assert len(list(enumerate_exact(1, 2))) == 2 * (MAX_DEGREE + 1)
    assert len(list(enumerate_small(1, 2, max_degree=0))) == 3
    assert len(list(enumerate_exact(2, 2, max_degree=1))) == 4
    assert list(enumerate_exact(2, 1)) == []


def test_enumerated_names():
    C = next(iter(enumerate_exact(1, 2)))
    assert C.objects == ("x0",)
    assert set(C.ids) == {"id_x0", "f0"}
    assert C.deg("x0") == 0


def test_degrees_default_to_the_degree_cap():
    assert MAX_DEGREE == 3
    degrees = {tuple(sorted(C.degree.values())) for C in enumerate_exact(2, 2)}
    assert degrees == {(a, b) for a in range(MAX_DEGREE + 1) for b in range(a, MAX_DEGREE + 1)}
    narrow = {tuple(sorted(C.degree.values())) for C in enumerate_exact(2, 2, max_degree=1)}
    assert narrow == {(0, 0), (0, 1), (1, 1)}


@pytest.mark.parametrize("args", [(MAX_OBJECTS + 1, 4), (2, 8), (2, 3, 4)])
def test_bounds(args):
    with pytest.raises(BoundsExceeded):
        list(enumerate_exact(*args))


def test_random_diagrams_are_seeded():
    C = builtin("delta_le_1").category.base
    a = random_diagram(C, random.Random(7), 3)
    b = random_diagram(C, random.Random(7), 3)
    assert a == b
    m = random_diagram_map(C, random.Random(7), 2)
    m.validate()
    assert m.shape == C


def test_bigluing_instances_come_from_bistratified_shapes():
    found = list(bigluing_instances(limit=5))
    assert len(found) == 5
    for E, abd in found:
        assert check_bistratified(E)
        assert set(abd.C.objects) | set(abd.D.objects) == set(E.objects)


def test_iso_pair_structure_factors_the_identity_through_zero():
    ff = iso_pair_fs_structure()
    assert ff.split["id_1"].mid == "0"
    assert ff.up == frozenset({"id_0", "id_1", "f"})
    assert ff.down == frozenset({"id_0", "id_1", "g"})
