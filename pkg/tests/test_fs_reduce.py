from dataclasses import replace

import pytest

from modules.classify import (
    canonical_functorial_factorization,
    commutative_squares,
    fs_reduce,
    functorial_factorization,
    validate_functorial_factorization,
)
from modules.corpus import builtin, iso_pair_fs_structure, rezk_enlarged_classes
from modules.errors import NotFsReedy
from modules.factorization import Factorization, basic_classes


def test_iso_pair_reduces_to_one_object():
    C = builtin("iso_pair").category
    red = fs_reduce(C, iso_pair_fs_structure())
    assert red.objects == ("0",)
    r = red.replacements["1"]
    assert (r.target, r.forward, r.backward) == ("0", "g", "f")
    assert red.subcategory.objects == ("0",)
    assert red.supplied_check.ok
    assert red.canonical_check.ok


def test_rezk_enlarged_classes_are_functorial_but_not_reedy():
    C = builtin("rezk_poset").category
    up, down = rezk_enlarged_classes()
    ff = validate_functorial_factorization(C, canonical_functorial_factorization(C, up, down))
    assert ff.split["12"] == Factorization("10", "02", "0")
    red = fs_reduce(C, ff)
    assert red.objects == ("0", "1", "2")
    assert red.replacements == {}
    assert not red.supplied_check.ok
    assert red.canonical_check.ok


def test_basic_classes_of_reedy_category_are_functorial():
    C = builtin("delta_le_1").category
    classes = basic_classes(C)
    ff = canonical_functorial_factorization(C, classes.up, classes.down)
    assert set(ff.connector) == set(commutative_squares(C))
    assert fs_reduce(C, ff).canonical_check.ok


def test_class_data_must_be_subcategories():
    C = builtin("iso_pair").category
    with pytest.raises(NotFsReedy):
        canonical_functorial_factorization(C, {"f", "id_0"}, {"g", "id_0", "id_1"})


def test_chosen_factorization_must_be_down_then_up():
    C = builtin("iso_pair").category
    ff = iso_pair_fs_structure()
    split = dict(ff.split)
    split["f"] = Factorization("f", "id_1", "1")
    with pytest.raises(NotFsReedy):
        functorial_factorization(C, split, ff.up, ff.down)


def test_tampered_connector_is_rejected():
    C = builtin("iso_pair").category
    ff = iso_pair_fs_structure()
    square = ("f", "f", "id_0", "id_1")
    assert ff.connector[square] == "id_0"
    connector = dict(ff.connector)
    connector[square] = "f"
    with pytest.raises(NotFsReedy):
        validate_functorial_factorization(C, replace(ff, connector=connector))
