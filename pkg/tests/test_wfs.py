import random

import pytest
from hypothesis import given, settings, strategies as st

from modules.corpus import builtin, random_diagram_map
from modules.diagrams import DiagramMap, constant, identity_map, make_diagram, representable
from modules.errors import InvalidInput, NotBistratified, NotDiscreteBistratified
from modules.factorization import stratum
from modules.fincat_core import opposite
from modules.wfs import (
    LiftingProblem,
    all_fillers,
    as_terminal_diagram_map,
    base_classify,
    base_factorize,
    creedy_classify_map,
    dual_reedy_is_R,
    finite_map,
    lifting_squares,
    projective_L_check,
    reedy_classify_map,
    reedy_factorize_map,
    relative_latching_map,
    same_map,
    solve_lifting,
)

REEDY_SHAPES = ["parallel_pair", "rezk_poset", "delta_le_1", "idempotent_collage"]
DISCRETE_SHAPES = REEDY_SHAPES + ["almost_reedy_square", "terminal"]
SEEDS = st.integers(min_value=0, max_value=10_000)


# ---- base structure ----

def test_base_classes():
    inj = finite_map(["a"], ["a", "b"], {"a": "a"})
    surj = finite_map(["x", "y"], ["z"], {"x": "z", "y": "z"})
    assert (base_classify(inj).is_L, base_classify(inj).is_R) == (True, False)
    assert (base_classify(surj).is_L, base_classify(surj).is_R) == (False, True)
    with pytest.raises(InvalidInput):
        finite_map(["a"], ["b"], {"a": "c"})


def test_base_factorization():
    f = finite_map(["x", "y"], ["z", "w"], {"x": "z", "y": "z"})
    i, p = base_factorize(f)
    assert i.is_injective()
    assert p.is_surjective()
    assert all(p(i(a)) == f(a) for a in f.source)
    assert len(i.target) == 4


def test_injections_lift_against_surjections():
    inj = as_terminal_diagram_map(finite_map(["a"], ["a", "b"], {"a": "a"}))
    surj = as_terminal_diagram_map(finite_map(["x", "y"], ["z"], {"x": "z", "y": "z"}))
    squares = lifting_squares(inj, surj)
    assert len(squares) == 2
    for p in squares:
        assert solve_lifting(p) is not None
        assert len(all_fillers(p)) == 2


def test_injection_does_not_lift_against_injection():
    left = as_terminal_diagram_map(finite_map(["a"], ["a", "b"], {"a": "a"}))
    right = as_terminal_diagram_map(finite_map(["p"], ["p", "q"], {"p": "p"}))
    squares = lifting_squares(left, right)
    assert len(squares) == 2
    stuck = [p for p in squares if solve_lifting(p) is None]
    assert len(stuck) == 1
    assert stuck[0].bottom.components["*"] == {"a": "p", "b": "q"}


def test_lifting_square_must_commute():
    inj = as_terminal_diagram_map(finite_map(["a"], ["a", "b"], {"a": "a"}))
    ident = as_terminal_diagram_map(finite_map(["a", "b"], ["a", "b"], {"a": "a", "b": "b"}))
    top = as_terminal_diagram_map(finite_map(["a"], ["a", "b"], {"a": "b"}))
    with pytest.raises(InvalidInput):
        LiftingProblem(inj, ident, top, ident).validate()


# ---- Reedy classification ----

def test_identity_maps_are_in_both_classes():
    C = builtin("delta_le_1").category
    m = identity_map(representable(C.base, "[1]"))
    result = reedy_classify_map(C, m)
    assert result.is_L and result.is_R


def test_latching_injectivity_decides_left_class():
    C = builtin("parallel_pair").category
    # x --f,g--> y ; collapsing y's two images of the same point is not a cofibration
    empty = make_diagram(C.base, {}, {"f": {}, "g": {}})
    X = make_diagram(C.base, {"x": ["0"], "y": ["1", "2"]}, {"f": {"0": "1"}, "g": {"0": "2"}})
    m = DiagramMap(empty, X, {"x": {}, "y": {}}).validate()
    assert reedy_classify_map(C, m).is_L
    assert relative_latching_map(C, "y", m).is_injective()
    Y = make_diagram(C.base, {"x": ["0"], "y": ["1"]}, {"f": {"0": "1"}, "g": {"0": "1"}})
    n = DiagramMap(X, Y, {"x": {"0": "0"}, "y": {"1": "1", "2": "1"}}).validate()
    assert not reedy_classify_map(C, n).is_L


def test_classification_needs_discrete_strata():
    C = builtin("z2_group").category
    m = identity_map(constant(C.base, ["0"]))
    with pytest.raises(NotDiscreteBistratified):
        reedy_classify_map(C, m)
    iso = builtin("iso_pair").category
    with pytest.raises(NotBistratified):
        creedy_classify_map(iso, identity_map(constant(iso.base, ["0"])))


@pytest.mark.parametrize("name", DISCRETE_SHAPES)
@settings(max_examples=10, deadline=None)
@given(seed=SEEDS)
def test_factorization_lands_in_the_classes(name, seed):
    C = builtin(name).category
    m = random_diagram_map(C.base, random.Random(seed), 2)
    left, right = reedy_factorize_map(C, m)
    assert same_map(left.then(right), m)
    assert reedy_classify_map(C, left).is_L
    assert reedy_classify_map(C, right).is_R


@pytest.mark.parametrize("name", DISCRETE_SHAPES)
@settings(max_examples=10, deadline=None)
@given(seed=SEEDS)
def test_c_reedy_agrees_with_reedy_on_discrete_strata(name, seed):
    C = builtin(name).category
    m = random_diagram_map(C.base, random.Random(seed), 2)
    plain = reedy_classify_map(C, m)
    projective = creedy_classify_map(C, m)
    assert (plain.is_L, plain.is_R) == (projective.is_L, projective.is_R)


@pytest.mark.parametrize("name", DISCRETE_SHAPES)
@settings(max_examples=10, deadline=None)
@given(seed=SEEDS)
def test_dual_structure_through_opposite(name, seed):
    C = builtin(name).category
    op = opposite(C)
    m = random_diagram_map(op.base, random.Random(seed), 2)
    assert dual_reedy_is_R(C, m) == reedy_classify_map(op, m).is_L


@pytest.mark.parametrize("name", DISCRETE_SHAPES)
def test_dual_structure_accepts_identities(name):
    C = builtin(name).category
    X = random_diagram_map(opposite(C).base, random.Random(1), 2).source
    assert dual_reedy_is_R(C, identity_map(X))


def test_dual_right_class_over_a_point_is_injections():
    C = builtin("terminal").category
    (x,) = C.objects
    point = opposite(C).base
    pair = make_diagram(point, {x: ["a", "b"]}, {})
    one = make_diagram(point, {x: ["p"]}, {})
    two = make_diagram(point, {x: ["p", "q"]}, {})
    assert not dual_reedy_is_R(C, DiagramMap(pair, one, {x: {"a": "p", "b": "p"}}))
    assert dual_reedy_is_R(C, DiagramMap(one, two, {x: {"p": "q"}}))


@pytest.mark.parametrize("name", REEDY_SHAPES)
@settings(max_examples=5, deadline=None)
@given(seed=SEEDS)
def test_left_class_lifts_against_right_class(name, seed):
    C = builtin(name).category
    rng = random.Random(seed)
    left, _ = reedy_factorize_map(C, random_diagram_map(C.base, rng, 1))
    _, right = reedy_factorize_map(C, random_diagram_map(C.base, rng, 1))
    for problem in lifting_squares(left, right):
        filler = solve_lifting(problem)
        assert filler is not None
        assert same_map(left.then(filler), problem.top)
        assert same_map(filler.then(right), problem.bottom)


# ---- projective strata ----

def test_projective_check_on_group_stratum():
    C = builtin("z2_group").category
    S = stratum(C, 0)
    empty = make_diagram(S, {"*": []}, {"s": {}})
    free = representable(S, "*")
    point = constant(S, ["0"])
    assert projective_L_check(S, DiagramMap(empty, free, {"*": {}})).ok
    trivial = projective_L_check(S, DiagramMap(empty, point, {"*": {}}))
    assert not trivial.ok
    assert "retracts" in trivial.reason
    collapse = projective_L_check(S, DiagramMap(free, point, {"*": {"id_*": "0", "s": "0"}}))
    assert collapse.reason.startswith("not injective")
