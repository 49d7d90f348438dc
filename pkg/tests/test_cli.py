import json

import pytest

from modules.corpus import builtin, names
from modules.diagrams import recognize_collage
from modules.formats import dump_bigluing, dump_category
from reedy_app import EXIT_FALSE, EXIT_GUARD, EXIT_INVALID, EXIT_OK, ReedyApp


def run(*argv):
    return ReedyApp(list(argv)).run()


@pytest.fixture
def category_file(write_json):
    def make(name):
        return write_json(f"{name}.json", dump_category(builtin(name).category))
    return make


def test_validate(category_file, capsys):
    assert run("validate", category_file("rezk_poset")) == EXIT_OK
    assert "3 objects" in capsys.readouterr().out


def test_validate_reports_violations(write_json):
    data = dump_category(builtin("iso_pair").category)
    data["composition"].pop()
    assert run("validate", write_json("broken.json", data)) == EXIT_INVALID


def test_missing_file_is_invalid_input(tmp_path):
    assert run("validate", str(tmp_path / "nope.json")) == EXIT_INVALID


def test_classify_exit_follows_queried_class(category_file, capsys):
    path = category_file("almost_reedy_square")
    assert run("classify", path) == EXIT_FALSE
    assert run("classify", path, "--class", "almost_reedy") == EXIT_OK
    capsys.readouterr()
    assert run("--json", "classify", path) == EXIT_FALSE
    report = json.loads(capsys.readouterr().out)
    assert report["verdicts"]["almost_reedy"] is True
    witness = report["witnesses"]["reedy"]
    assert (witness["clause"], witness["morphisms"]) == ("down_not_closed", ["ab", "bd"])


@pytest.mark.parametrize("name", names())
def test_classify_json_is_stable(name, category_file, capsys):
    path = category_file(name)
    run("--json", "classify", path)
    first = capsys.readouterr().out
    run("--json", "classify", path)
    assert capsys.readouterr().out == first
    verdicts = json.loads(first)["verdicts"]
    expected = builtin(name).expected
    assert {k: verdicts[k] for k in expected} == dict(expected)


def test_factor(category_file, capsys):
    path = category_file("almost_reedy_square")
    assert run("factor", path, "--morphism", "ad") == EXIT_OK
    assert "ad = cd ∘ ac" in capsys.readouterr().out
    assert run("--json", "factor", path, "--morphism", "ad", "--all") == EXIT_OK
    assert json.loads(capsys.readouterr().out) == [{"down": "ac", "up": "cd", "through": "c"}]
    assert run("factor", path, "--morphism", "zz") == EXIT_INVALID


def test_factor_refuses_non_almost_reedy(category_file):
    assert run("factor", category_file("c_reedy_square"), "--morphism", "ad") == EXIT_INVALID
    assert run("factor", category_file("c_reedy_square"), "--morphism", "ad", "--mode", "c") == EXIT_OK


def test_boundary(category_file, capsys):
    path = category_file("parallel_pair")
    assert run("--json", "boundary", path, "--source", "x", "--target", "y", "--bound", "1") == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert sorted(c["composite"] for c in payload["classes"]) == ["f", "g"]


def _two_point_diagram(write_json):
    shape = write_json("square.json", dump_category(builtin("almost_reedy_square").category))
    payload = {
        "shape": "square.json",
        "sets": {x: ["0", "1"] for x in "abcd"},
        "maps": {f: {"0": "0", "1": "1"} for f in ("ab", "bd", "ac", "cd", "ad")},
    }
    assert shape.endswith("square.json")
    return write_json("two_point.json", payload)


def test_matching_and_latching(write_json, capsys):
    path = _two_point_diagram(write_json)
    assert run("--json", "matching", path, "--object", "a") == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["elements"]) == 2
    assert run("--json", "latching", path, "--object", "d") == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["elements"]) == 2


def test_size_guard_exit(write_json):
    path = _two_point_diagram(write_json)
    assert run("--max-search", "1", "matching", path, "--object", "a") == EXIT_GUARD


def test_recognize_and_collage(category_file, write_json, capsys):
    assert run("recognize", category_file("idempotent_collage"), "--split", "1") == EXIT_OK
    assert run("recognize", category_file("iso_pair"), "--split", "1") == EXIT_FALSE
    capsys.readouterr()
    abd = recognize_collage(builtin("idempotent_collage").category, 1)
    assert run("--json", "collage", write_json("abd.json", dump_bigluing(abd))) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["morphisms"]) == 5


def test_random_map_feeds_wfs_commands(tmp_path, capsys):
    assert run("--seed", "3", "corpus", "random-map", "delta_le_1") == EXIT_OK
    path = tmp_path / "map.json"
    path.write_text(capsys.readouterr().out, encoding="utf-8")
    assert run("--json", "wfs-classify", str(path)) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert set(result) == {"is_L", "is_R", "matching", "latching"}
    assert run("wfs-classify", str(path), "--structure", "c-reedy") == EXIT_OK
    capsys.readouterr()
    assert run("--json", "wfs-factor", str(path)) == EXIT_OK
    assert set(json.loads(capsys.readouterr().out)) == {"left", "right"}


def test_wfs_needs_discrete_strata(write_json):
    payload = {
        "shape": dump_category(builtin("z2_group").category),
        "source": {"sets": {"*": ["p"]}, "maps": {"s": {"p": "p"}}},
        "target": {"sets": {"*": ["p"]}, "maps": {"s": {"p": "p"}}},
        "components": {"*": {"p": "p"}},
    }
    assert run("wfs-classify", write_json("map.json", payload)) == EXIT_INVALID


def _lift_payload(right_components):
    return {
        "shape": dump_category(builtin("terminal").category),
        "diagrams": {
            "A": {"sets": {"*": ["a"]}},
            "B": {"sets": {"*": ["a", "b"]}},
            "X": {"sets": {"*": ["p", "q"]}},
            "Y": {"sets": {"*": ["p", "q"]}},
        },
        "left": {"source": "A", "target": "B", "components": {"*": {"a": "a"}}},
        "right": {"source": "X", "target": "Y", "components": {"*": right_components}},
        "top": {"source": "A", "target": "X", "components": {"*": {"a": "p"}}},
        "bottom": {"source": "B", "target": "Y", "components": {"*": {"a": "p", "b": "q"}}},
    }


def test_lift(write_json, capsys):
    solvable = write_json("lift.json", _lift_payload({"p": "p", "q": "q"}))
    assert run("--json", "lift", solvable, "--all") == EXIT_OK
    assert json.loads(capsys.readouterr().out)["fillers"] == [{"*": {"a": "p", "b": "q"}}]
    stuck = write_json("stuck.json", _lift_payload({"p": "p", "q": "p"}))
    assert run("lift", stuck) == EXIT_FALSE


def test_fs_reduce(category_file, write_json, capsys):
    structure = write_json("fs.json", {"up": ["id_0", "id_1", "f"], "down": ["id_0", "id_1", "g"]})
    assert run("--json", "fs-reduce", category_file("iso_pair"), structure) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["objects"] == ["0"]
    assert payload["replacements"]["1"] == {"target": "0", "forward": "g", "backward": "f"}


def test_corpus_commands(capsys):
    assert run("corpus", "list") == EXIT_OK
    assert "iso_pair" in capsys.readouterr().out
    assert run("corpus", "emit", "iso_pair") == EXIT_OK
    assert json.loads(capsys.readouterr().out) == dump_category(builtin("iso_pair").category)
    assert run("corpus", "emit", "nope") == EXIT_INVALID
    assert run("corpus", "check") == EXIT_OK


def test_arguments_are_required():
    with pytest.raises(SystemExit):
        ReedyApp(["factor", "x.json"])
