import random

import pytest
from hypothesis import given, settings, strategies as st

from modules.corpus import builtin, random_diagram
from modules.diagrams import (
    DiagramMap,
    constant,
    corepresentable,
    graph_limit,
    identity_map,
    latching_object,
    latching_stratum,
    make_diagram,
    matching_object,
    matching_stratum,
    natural_maps,
    representable,
    weighted_colimit,
    weighted_limit,
)
from modules.errors import NotFunctorial, NotNatural

SHAPES = ["almost_reedy_square", "c_reedy_square", "delta_le_1", "orbit_Z2_index", "idempotent_collage", "z2_group"]


def _two_point(C):
    sets = {x: ["0", "1"] for x in C.objects}
    maps = {f: {"0": "0", "1": "1"} for f in C.ids if not C.is_identity(f)}
    return make_diagram(C.base, sets, maps)


def test_matching_object_differs_from_graph_limit():
    C = builtin("almost_reedy_square").category
    X = _two_point(C)
    M = matching_object(C, "a", X)
    assert M.index == ("ab", "ac", "ad")
    assert len(M) == 2
    assert len(graph_limit(C, "a", X)) == 4
    for t in M.elements:
        assert M.project(t, "ab") == M.project(t, "ad")


def test_latching_object_of_the_square():
    C = builtin("almost_reedy_square").category
    X = _two_point(C)
    L = latching_object(C, "d", X)
    assert L.index == ("cd",)
    assert len(L) == 2
    assert L.inject("cd", "0") != L.inject("cd", "1")
    assert len(latching_object(C, "c", X)) == 0


def test_degenerate_maps_glue_in_latching():
    C = builtin("delta_le_1").category
    X = representable(C.base, "[0]")
    L = latching_object(C, "[1]", X)
    # two face maps, one vertex each, glued along nothing below degree 0
    assert L.index == ("0>1:0", "0>1:1")
    assert len(L) == 2


def test_make_diagram_rejects_broken_functor():
    C = builtin("z2_group").category.base
    with pytest.raises(NotFunctorial):
        make_diagram(C, {"*": ["0", "1"]}, {"s": {"0": "0", "1": "0"}})
    with pytest.raises(NotFunctorial):
        make_diagram(C, {"*": ["0"]}, {})


def test_diagram_map_naturality():
    C = builtin("z2_group").category.base
    swap = make_diagram(C, {"*": ["0", "1"]}, {"s": {"0": "1", "1": "0"}})
    point = constant(C, ["p"])
    DiagramMap(swap, point, {"*": {"0": "p", "1": "p"}}).validate()
    with pytest.raises(NotNatural):
        DiagramMap(point, swap, {"*": {"p": "0"}}).validate()
    assert natural_maps(point, swap) == []
    assert len(natural_maps(swap, swap)) == 2


def test_identity_map_composes_trivially():
    X = _two_point(builtin("rezk_poset").category)
    idX = identity_map(X).validate()
    assert idX.then(idX).components == idX.components


@pytest.mark.parametrize("name", SHAPES)
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_yoneda_and_coyoneda(name, seed):
    C = builtin(name).category
    X = random_diagram(C.base, random.Random(seed), 2)
    for c in C.objects:
        assert len(weighted_limit(representable(C.base, c), X)) == len(X.sets[c])
        assert len(weighted_colimit(corepresentable(C.base, c), X)) == len(X.sets[c])
        assert len(natural_maps(representable(C.base, c), X)) == len(X.sets[c])


@pytest.mark.parametrize("name", SHAPES + ["delta_le_2", "rezk_poset"])
@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_conical_and_weighted_boundaries_agree(name, seed):
    C = builtin(name).category
    X = random_diagram(C.base, random.Random(seed), 2)
    for x in C.objects:
        # both raise InternalInvariantBroken on disagreement
        matching_object(C, x, X, cross_check=True)
        latching_object(C, x, X, cross_check=True)


def test_strata_diagrams():
    C = builtin("orbit_Z2_index").category
    X = representable(C.base, "G/e")
    M, objs = matching_stratum(C, 2, X)
    assert M.shape.objects == ("G/e",)
    assert len(objs["G/e"]) == 1
    M.validate()
    L, lobjs = latching_stratum(C, 1, X)
    assert L.shape.objects == ("G/G",)
    assert len(lobjs["G/G"]) == 0
    L.validate()
