from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from modules.classify import (
    CLASS_NAMES,
    CHECKS,
    IMPLICATIONS,
    Witness,
    check_almost_reedy,
    check_c_reedy,
    check_c_reedy_definitional,
    check_g_reedy,
    check_g_reedy_definitional,
    check_initial_final,
    check_reedy,
    check_reedy_definitional,
    classify,
    recheck_witness,
    reedy_factor,
    retract_decomposition,
)
from modules.corpus import MAX_DEGREE, builtin, enumerate_small, mismatches, names, rezk_enlarged_classes
from modules.diagrams import constant, representable
from modules.errors import NotAlmostReedy
from modules.factorization import (
    basic_classes,
    connected_within,
    enumerate_reedy_factorizations,
    fundamental_factorizations,
    zigzag_components,
)

SMALL = list(enumerate_small(2, 4))


@pytest.mark.parametrize("name", names())
def test_builtin_verdicts(name):
    entry = builtin(name)
    report = classify(entry.category)
    assert mismatches(entry, report.verdicts) == []
    assert report.implications_hold() == []
    assert set(report.to_json()["verdicts"]) == set(CLASS_NAMES)


@pytest.mark.parametrize("name", names())
def test_builtin_witnesses_recheck(name):
    C = builtin(name).category
    for w in classify(C).witnesses.values():
        assert recheck_witness(C, w), str(w)


def test_reedy_failure_on_square_names_the_open_composite():
    C = builtin("almost_reedy_square").category
    res = check_reedy(C)
    assert not res
    assert res.witness == Witness("down_not_closed", ("ab", "bd"))
    assert check_almost_reedy(C)


def test_c_reedy_failure_on_square_names_the_level_arrow():
    C = builtin("c_reedy_square").category
    res = check_c_reedy(C)
    assert not res.ok
    assert res.witness.clause == "up_not_closed"
    assert res.witness.morphisms == ("ab", "bd")


def test_not_free_action_witness():
    C = builtin("orbit_Z2_op_degH").category
    res = CHECKS["almost_g_reedy"](C)
    assert not res.ok
    assert res.witness.clause == "not_free"
    assert res.witness.morphisms[0] == "s"


def test_witness_rendering():
    w = Witness("not_free", ("s", "p"), ("G/e",), "x")
    assert str(w) == "not_free (s, p) at G/e [x]"
    assert w.to_json() == {"clause": "not_free", "morphisms": ["s", "p"], "objects": ["G/e"], "detail": "x"}


def test_rezk_definitional_checks():
    C = builtin("rezk_poset").category
    classes = basic_classes(C)
    assert check_reedy_definitional(C, classes.up, classes.down)
    up, down = rezk_enlarged_classes()
    res = check_reedy_definitional(C, up, down)
    assert res.witness.clause == "factorization_not_unique"
    assert res.witness.morphisms[0] == "12"
    assert recheck_witness(C, res.witness, up, down)


def test_definitional_rejects_non_subcategory_data():
    C = builtin("rezk_poset").category
    res = check_reedy_definitional(C, {"02"}, {"10"})
    assert res.witness.clause == "class_missing_identity"
    assert res.witness.detail == "up"


def test_c_definitional_detects_unconnected_factorizations():
    C = builtin("c_reedy_square").category
    classes = basic_classes(C)
    res = check_c_reedy_definitional(C, classes.up | {"ad"}, classes.down, classes.level)
    assert not res.ok
    assert res.witness.clause == "factorizations_not_level_connected"
    assert res.witness.morphisms[0] == "ad"


@pytest.mark.parametrize("name", names())
def test_basic_classes_agree_with_definitions_on_builtins(name):
    C = builtin(name).category
    classes = basic_classes(C)
    assert check_reedy(C).ok == check_reedy_definitional(C, classes.up, classes.down).ok
    assert check_g_reedy(C).ok == check_g_reedy_definitional(C, classes.up, classes.down).ok


def _criteria_agree_with_definitions(C):
    classes = basic_classes(C)
    assert check_reedy(C).ok == check_reedy_definitional(C, classes.up, classes.down).ok
    assert check_c_reedy(C).ok == check_c_reedy_definitional(C, classes.up, classes.down, classes.level).ok
    assert check_g_reedy(C).ok == check_g_reedy_definitional(C, classes.up, classes.down).ok


def _factorizations_are_unique(C):
    classes = basic_classes(C)
    if check_almost_reedy(C).ok:
        for f in C.ids:
            assert enumerate_reedy_factorizations(C, f, classes.up, classes.down) == [reedy_factor(C, f)]
    if check_c_reedy(C).ok:
        for f in C.ids:
            facs = enumerate_reedy_factorizations(C, f, classes.up, classes.down)
            assert facs
            assert zigzag_components(C, facs, allowed=classes.level).connected


def _zigzags_stay_below_the_larger_degree(C):
    if not check_almost_reedy(C).ok:
        return
    for f in C.ids:
        for p, q in combinations(fundamental_factorizations(C, f), 2):
            assert connected_within(C, f, p, q, max(C.deg(p.mid), C.deg(q.mid)))


def _graph_criterion_matches_reedy(C):
    if not check_almost_reedy(C).ok:
        return
    everywhere = all(r.initial and r.final for r in (check_initial_final(C, x) for x in C.objects))
    assert everywhere == check_reedy(C).ok


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL))
def test_criteria_match_definitions(C):
    _criteria_agree_with_definitions(C)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL))
def test_reedy_factorizations_are_unique(C):
    _factorizations_are_unique(C)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL))
def test_fundamental_zigzags_respect_degree_bound(C):
    _zigzags_stay_below_the_larger_degree(C)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL))
def test_initial_final_everywhere_iff_reedy(C):
    _graph_criterion_matches_reedy(C)


@pytest.mark.slow
def test_criteria_hold_over_the_whole_enumeration():
    for C in enumerate_small(max_degree=MAX_DEGREE):
        _criteria_agree_with_definitions(C)
        _factorizations_are_unique(C)
        _zigzags_stay_below_the_larger_degree(C)
        _graph_criterion_matches_reedy(C)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL))
def test_implication_lattice_on_small_categories(C):
    verdicts = classify(C).verdicts
    for stronger, weaker in IMPLICATIONS:
        assert not verdicts[stronger] or verdicts[weaker]


def test_graph_criterion_on_square():
    C = builtin("almost_reedy_square").category
    at_a = check_initial_final(C, "a")
    assert not at_a.initial
    assert at_a.final
    assert at_a.witness == Witness("comma_graph_disconnected", ("ad",), ("a",), "initial")
    assert recheck_witness(C, at_a.witness)


@pytest.mark.parametrize("name", ["rezk_poset", "delta_le_2", "idempotent_collage", "parallel_pair", "terminal"])
def test_graph_criterion_holds_on_reedy_entries(name):
    C = builtin(name).category
    for x in C.objects:
        r = check_initial_final(C, x)
        assert r.initial and r.final


def test_graph_criterion_needs_almost_reedy():
    with pytest.raises(NotAlmostReedy):
        check_initial_final(builtin("c_reedy_square").category, "a")


def test_retract_decomposition():
    z2 = builtin("z2_group").category.base
    free = retract_decomposition(representable(z2, "*"))
    assert free.ok
    assert len(free.cones) == 1
    trivial = retract_decomposition(constant(z2, ["0"]))
    assert not trivial.ok
    assert trivial.failed_component == (("*", "0"),)
