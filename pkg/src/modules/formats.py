# modules/formats.py
import json
import logging
import os
from typing import Dict, Iterable, Mapping, Optional, Tuple

from modules.diagrams import AbstractBigluingData, DiagramMap, SetDiagram, make_diagram
from modules.errors import InvalidInput
from modules.factorization import Factorization
from modules.fincat_core import (
    DegreedCategory,
    FinCategory,
    Profunctor,
    to_presentation,
    validate_category,
    validate_degreed,
)
from modules.wfs import LiftingProblem

logger = logging.getLogger(__name__)

CATEGORY_FIELDS = {"objects", "morphisms", "identities", "composition"}


def read_json(path: str) -> object:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InvalidInput(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path}: not valid JSON ({e})") from None


def dumps(payload: object) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _fields(data: object, allowed: Iterable[str], what: str, required: Iterable[str] = ()) -> Mapping:
    if not isinstance(data, Mapping):
        raise InvalidInput(f"{what} must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise InvalidInput(f"{what}: unknown field(s) {', '.join(unknown)}")
    missing = [k for k in required if k not in data]
    if missing:
        raise InvalidInput(f"{what}: missing field(s) {', '.join(missing)}")
    return data


# ---- categories ----

def _check_category_record(data: object) -> Mapping:
    data = _fields(data, CATEGORY_FIELDS, "category", required=("objects", "morphisms", "identities"))
    for o in data.get("objects", []):
        _fields(o, ("id", "degree"), "object record", required=("id",))
    for m in data["morphisms"] if isinstance(data["morphisms"], list) else []:
        _fields(m, ("id", "src", "tgt"), "morphism record")
    return data


def load_category(data: object) -> DegreedCategory:
    return validate_degreed(_check_category_record(data))


def load_plain_category(data: object) -> FinCategory:
    return validate_category(_check_category_record(data))


def load_category_file(path: str) -> DegreedCategory:
    C = load_category(read_json(path))
    logger.debug(f"read category {path}: {len(C.objects)} objects, {len(C.morphisms)} morphisms")
    return C


def dump_category(C) -> Dict[str, object]:
    return to_presentation(C)


# ---- diagrams ----

def _shape(data: Mapping, base_dir: str) -> DegreedCategory:
    shape = data.get("shape")
    if isinstance(shape, str):
        return load_category_file(os.path.join(base_dir, shape))
    return load_category(shape)


def _diagram_body(shape: FinCategory, data: object, what: str) -> SetDiagram:
    data = _fields(data, ("sets", "maps"), what, required=("sets",))
    sets, maps = data["sets"], data.get("maps", {})
    if not isinstance(sets, Mapping) or not isinstance(maps, Mapping):
        raise InvalidInput(f"{what}: sets and maps must be objects")
    unknown = sorted(set(sets) - set(shape.objects))
    if unknown:
        raise InvalidInput(f"{what}: sets given for unknown objects {', '.join(unknown)}")
    return make_diagram(shape, sets, maps)


def load_diagram(data: object, base_dir: str = ".") -> Tuple[DegreedCategory, SetDiagram]:
    data = _fields(data, ("shape", "sets", "maps"), "diagram", required=("shape", "sets"))
    C = _shape(data, base_dir)
    return C, _diagram_body(C.base, {k: data[k] for k in ("sets", "maps") if k in data}, "diagram")


def dump_diagram(X: SetDiagram) -> Dict[str, object]:
    return {
        "sets": {x: list(X.sets[x]) for x in X.shape.objects},
        "maps": {f: {a: X.maps[f][a] for a in sorted(X.maps[f])} for f in X.shape.ids},
    }


def _components(data: object, what: str) -> Dict[str, Dict[str, str]]:
    if not isinstance(data, Mapping) or not all(isinstance(v, Mapping) for v in data.values()):
        raise InvalidInput(f"{what}: components must map objects to element mappings")
    return {x: dict(v) for x, v in data.items()}


def load_diagram_map(data: object, base_dir: str = ".") -> Tuple[DegreedCategory, DiagramMap]:
    data = _fields(data, ("shape", "source", "target", "components"), "diagram map",
                   required=("shape", "source", "target", "components"))
    C = _shape(data, base_dir)
    source = _diagram_body(C.base, data["source"], "source diagram")
    target = _diagram_body(C.base, data["target"], "target diagram")
    return C, DiagramMap(source, target, _components(data["components"], "diagram map")).validate()


def dump_diagram_map(m: DiagramMap) -> Dict[str, object]:
    return {
        "source": dump_diagram(m.source),
        "target": dump_diagram(m.target),
        "components": {x: {a: m.components[x][a] for a in sorted(m.components[x])} for x in m.shape.objects},
    }


def load_lift_problem(data: object, base_dir: str = ".") -> Tuple[DegreedCategory, LiftingProblem]:
    data = _fields(data, ("shape", "diagrams", "left", "right", "top", "bottom"), "lifting problem",
                   required=("shape", "diagrams", "left", "right", "top", "bottom"))
    C = _shape(data, base_dir)
    if not isinstance(data["diagrams"], Mapping):
        raise InvalidInput("lifting problem: diagrams must be an object")
    diagrams = {name: _diagram_body(C.base, body, f"diagram {name}") for name, body in data["diagrams"].items()}

    def side(key: str) -> DiagramMap:
        raw = _fields(data[key], ("source", "target", "components"), key, required=("source", "target", "components"))
        try:
            src, tgt = diagrams[raw["source"]], diagrams[raw["target"]]
        except (KeyError, TypeError):
            raise InvalidInput(f"{key}: source and target must name declared diagrams") from None
        return DiagramMap(src, tgt, _components(raw["components"], key))

    return C, LiftingProblem(side("left"), side("right"), side("top"), side("bottom")).validate()


# ---- bigluing data ----

def _triples(data: object, what: str) -> Iterable[Tuple[str, str, str]]:
    if not isinstance(data, list):
        raise InvalidInput(f"{what} must be an array of triples")
    for t in data:
        if not (isinstance(t, list) and len(t) == 3 and all(isinstance(s, str) for s in t)):
            raise InvalidInput(f"{what}: entry {t!r} is not a triple of strings")
        yield tuple(t)


def _profunctor(data: object, source: FinCategory, target: FinCategory, what: str) -> Profunctor:
    data = _fields(data, ("elements", "left", "right"), what, required=("elements",))
    elements: Dict[Tuple[str, str], list] = {}
    for d, c, e in _triples(data["elements"], f"{what}.elements"):
        elements.setdefault((d, c), []).append(e)
    left = {(k, h): r for k, h, r in _triples(data.get("left", []), f"{what}.left")}
    right = {(h, l): r for h, l, r in _triples(data.get("right", []), f"{what}.right")}
    # identity actions may be left implicit
    for (d, c), es in elements.items():
        for e in es:
            if c in source.identity:
                left.setdefault((source.identity[c], e), e)
            if d in target.identity:
                right.setdefault((e, target.identity[d]), e)
    return Profunctor(source, target, {k: tuple(sorted(v)) for k, v in elements.items()}, left, right)


def load_bigluing(data: object) -> AbstractBigluingData:
    data = _fields(data, ("C", "D", "U", "W", "alpha"), "bigluing data", required=("C", "D", "U", "W", "alpha"))
    C = load_category(data["C"])
    D = load_plain_category(data["D"])
    U = _profunctor(data["U"], D, C.base, "U")
    W = _profunctor(data["W"], C.base, D, "W")
    alpha = {(w, u): k for w, u, k in _triples(data["alpha"], "alpha")}
    return AbstractBigluingData(C, D, U, W, alpha)


def _dump_profunctor(P: Profunctor) -> Dict[str, object]:
    return {
        "elements": [[d, c, e] for (d, c) in sorted(P.elements) for e in P.elements[(d, c)]],
        "left": [[k, h, r] for (k, h), r in sorted(P.left.items())],
        "right": [[h, l, r] for (h, l), r in sorted(P.right.items())],
    }


def dump_bigluing(abd: AbstractBigluingData) -> Dict[str, object]:
    return {
        "C": to_presentation(abd.C),
        "D": to_presentation(abd.D),
        "U": _dump_profunctor(abd.U),
        "W": _dump_profunctor(abd.W),
        "alpha": [[w, u, k] for (w, u), k in sorted(abd.alpha.items())],
    }


# ---- functorial factorization data ----

def load_fs_structure(data: object, C: DegreedCategory) -> Tuple[frozenset, frozenset, Dict[str, Factorization]]:
    data = _fields(data, ("up", "down", "split"), "fs-structure", required=("up", "down"))
    up, down = data["up"], data["down"]
    if not isinstance(up, list) or not isinstance(down, list):
        raise InvalidInput("fs-structure: up and down must be arrays of morphism ids")
    for f in list(up) + list(down):
        C.base.morphism(f)
    split: Dict[str, Factorization] = {}
    raw_split: Optional[Mapping] = data.get("split")
    if raw_split is not None:
        if not isinstance(raw_split, Mapping):
            raise InvalidInput("fs-structure: split must map morphisms to [down, up] pairs")
        for f, pair in raw_split.items():
            if not (isinstance(pair, list) and len(pair) == 2):
                raise InvalidInput(f"fs-structure: split for {f} must be [down, up]")
            first, second = pair
            split[f] = Factorization(first, second, C.tgt(first))
    return frozenset(up), frozenset(down), split


def dump_factorization(p: Factorization) -> Dict[str, str]:
    return {"down": p.first, "up": p.second, "through": p.mid}
