import pytest

import modules.classify as classify_module
from modules.classify import reedy_factor
from modules.corpus import builtin
from modules.errors import NotAlmostReedy, UnknownMorphism
from modules.factorization import (
    Factorization,
    basic_classes,
    basic_morphisms,
    boundary_hom,
    connected_within,
    enumerate_reedy_factorizations,
    factorization_components,
    factorizations_below,
    fundamental_factorizations,
    is_basic,
    reedy_split,
    stratum,
    zigzag_components,
)
from modules.fincat_core import with_degrees


@pytest.fixture
def square():
    return builtin("almost_reedy_square").category


@pytest.fixture
def c_square():
    return builtin("c_reedy_square").category


def test_only_the_diagonal_is_not_basic(square):
    assert basic_morphisms(square) == frozenset(square.ids) - {"ad"}
    assert fundamental_factorizations(square, "ad") == [Factorization("ac", "cd", "c")]
    with pytest.raises(UnknownMorphism):
        is_basic(square, "zz")


def test_basic_classes_of_the_square(square):
    classes = basic_classes(square)
    ids = frozenset(square.identity.values())
    assert classes.down == ids | {"ab", "bd", "ac"}
    assert classes.up == ids | {"cd"}
    assert classes.level == ids


def test_basic_classes_of_truncated_simplex():
    C = builtin("delta_le_1").category
    classes = basic_classes(C)
    assert classes.up - classes.level == {"0>1:0", "0>1:1"}
    assert classes.down - classes.level == {"1>0:00"}
    assert not is_basic(C, "1>1:00")


def test_factorizations_below_respect_the_bound(square):
    assert factorizations_below(square, "ad", 1) == [Factorization("ac", "cd", "c")]
    mids = {p.mid for p in factorizations_below(square, "ad", 3)}
    assert mids == {"b", "c", "d"}


def test_factorizations_connect_through_the_target(square):
    comps = factorization_components(square, "ad", 3)
    assert comps.connected
    p, q = Factorization("ab", "bd", "b"), Factorization("ac", "cd", "c")
    path = comps.zigzag(p, q)
    assert len(path) == 2
    assert {e.connector for e in path} == {"bd", "cd"}
    assert connected_within(square, "ad", p, q, 3)


def test_level_connectivity_splits_the_c_square(c_square):
    vertices = factorizations_below(c_square, "ad", 2)
    assert len(vertices) == 3
    assert zigzag_components(c_square, vertices).connected
    level = set(c_square.identity.values()) | {"ab"}
    comps = zigzag_components(c_square, vertices, allowed=level)
    assert len(comps.components) == 2
    assert comps.disconnected_pair() is not None


def test_boundary_hom_counts(square):
    for bound in (1, 2, 3):
        B = boundary_hom(square, "a", "d", bound)
        assert len(B) == 1
        assert B.to_hom == ("ad",)
    assert len(boundary_hom(square, "a", "d", 0)) == 0


def test_boundary_hom_keeps_parallel_arrows_apart():
    C = builtin("parallel_pair").category
    B = boundary_hom(C, "x", "y", 1)
    assert len(B) == 2
    assert sorted(B.to_hom) == ["f", "g"]
    assert len(B.fiber("f")) == 1
    assert B.class_of(("g", "id_y")) == B.fiber("g")[0]


def test_boundary_classes_match_factorization_components():
    for name in ("almost_reedy_square", "c_reedy_square", "delta_le_2", "orbit_Z2_index"):
        C = builtin(name).category
        for x in C.objects:
            for y in C.objects:
                for bound in range(max(C.degrees()) + 2):
                    comps = sum(len(factorization_components(C, f, bound).components) for f in C.hom(x, y))
                    assert len(boundary_hom(C, x, y, bound)) == comps


def test_reedy_factor_modes(square, c_square):
    assert reedy_factor(square, "ad") == Factorization("ac", "cd", "c")
    assert reedy_factor(square, "ab") == Factorization("ab", "id_b", "b")
    assert reedy_factor(square, "cd") == Factorization("id_c", "cd", "c")
    assert reedy_factor(c_square, "ad", mode="c") == Factorization("ac", "cd", "c")
    with pytest.raises(NotAlmostReedy):
        reedy_factor(c_square, "ad", mode="s")
    with pytest.raises(ValueError):
        reedy_factor(square, "ad", mode="x")


def test_reedy_factor_on_truncated_simplex():
    C = builtin("delta_le_1").category
    assert reedy_factor(C, "1>1:00") == Factorization("1>0:00", "0>1:0", "[0]")
    assert reedy_factor(C, "1>1:11") == Factorization("1>0:00", "0>1:1", "[0]")


def test_enumerated_factorizations_are_unique_on_almost_reedy(square):
    classes = basic_classes(square)
    for f in square.ids:
        facs = enumerate_reedy_factorizations(square, f, classes.up, classes.down)
        assert len(facs) == 1
        assert facs[0] == reedy_factor(square, f)


def test_stratum_of_level_arrow(c_square):
    S = stratum(c_square, 1)
    assert S.objects == ("a", "b")
    assert set(S.ids) == {"id_a", "id_b", "ab"}


def test_unchecked_split_agrees_with_checked_factor(square):
    for f in square.ids:
        assert reedy_split(square, f) == reedy_factor(square, f)
    with pytest.raises(ValueError):
        reedy_split(square, "ad", mode="x")


def test_almost_reedy_check_runs_once_per_category(monkeypatch):
    shape = builtin("almost_reedy_square").category
    C = with_degrees(shape.base, shape.degree)
    calls = []
    real = classify_module.check_almost_reedy

    def counting(D):
        calls.append(D)
        return real(D)

    monkeypatch.setattr(classify_module, "check_almost_reedy", counting)
    for f in C.ids:
        reedy_factor(C, f)
    assert len(calls) == 1
    assert C.memo["almost_s"].ok
