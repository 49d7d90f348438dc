# modules/corpus.py
import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from modules.classify import (
    FunctorialFactorization,
    check_bistratified,
    canonical_functorial_factorization,
)
from modules.config_loader import DEFAULTS
from modules.diagrams import (
    AbstractBigluingData,
    DiagramMap,
    SetDiagram,
    recognize_collage,
    search_families,
)
from modules.errors import BoundsExceeded, InvalidBigluingData, NotACollage, NotFunctorial, UnknownEntry
from modules.fincat_core import DegreedCategory, FinCategory, make_category, opposite, with_degrees

logger = logging.getLogger(__name__)

MAX_OBJECTS = 3
MAX_MORPHISMS = 7
MAX_DEGREE = 3


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    category: DegreedCategory
    expected: Mapping[str, bool] = field(default_factory=dict)
    provenance: str = ""


# -------------------------------------------------------------------
# Builtin entries
# -------------------------------------------------------------------

def _square(degrees: Mapping[str, int]) -> DegreedCategory:
    base = make_category(
        ["a", "b", "c", "d"],
        [("ab", "a", "b"), ("bd", "b", "d"), ("ac", "a", "c"), ("cd", "c", "d"), ("ad", "a", "d")],
        {("bd", "ab"): "ad", ("cd", "ac"): "ad"},
    )
    return with_degrees(base, degrees)


def _monotone_category(top: int) -> DegreedCategory:
    """Δ restricted to [0], ..., [top]; a map [m] -> [n] is named m>n:images."""
    objects = [f"[{n}]" for n in range(top + 1)]

    def maps(m: int, n: int) -> List[Tuple[int, ...]]:
        return list(combinations_with_replacement(range(n + 1), m + 1))

    def name(m: int, n: int, images: Tuple[int, ...]) -> str:
        if m == n and images == tuple(range(m + 1)):
            return f"id_[{m}]"
        return f"{m}>{n}:" + "".join(str(i) for i in images)

    arrows = []
    composites = {}
    for m, n in product(range(top + 1), repeat=2):
        for f in maps(m, n):
            if name(m, n, f).startswith("id_"):
                continue
            arrows.append((name(m, n, f), f"[{m}]", f"[{n}]"))
            for k in range(top + 1):
                for g in maps(n, k):
                    if name(n, k, g).startswith("id_"):
                        continue
                    composites[(name(n, k, g), name(m, n, f))] = name(m, k, tuple(g[i] for i in f))
    base = make_category(objects, arrows, composites)
    return with_degrees(base, {f"[{n}]": n for n in range(top + 1)})


def _orbit_z2(opposite_side: bool, by_index: bool) -> DegreedCategory:
    base = make_category(
        ["G/e", "G/G"],
        [("s", "G/e", "G/e"), ("p", "G/e", "G/G")],
        {("s", "s"): "id_G/e", ("p", "s"): "p"},
    )
    if opposite_side:
        base = opposite(base)
    degrees = {"G/e": 2, "G/G": 1} if by_index else {"G/e": 1, "G/G": 2}
    return with_degrees(base, degrees)


def _verdicts(true: str = "", false: str = "") -> Dict[str, bool]:
    out = {name: True for name in true.split()}
    out.update({name: False for name in false.split()})
    return out


_ALL_TRUE = "inverse direct stratified bistratified discrete_strata groupoidal_strata almost_reedy reedy almost_g_reedy g_reedy almost_c_reedy c_reedy"


def _almost_reedy_square() -> CorpusEntry:
    return CorpusEntry(
        "almost_reedy_square",
        _square({"a": 3, "b": 2, "d": 1, "c": 0}),
        _verdicts("bistratified discrete_strata groupoidal_strata almost_reedy almost_g_reedy almost_c_reedy",
                  "inverse direct stratified reedy g_reedy c_reedy"),
        "commutative square; only a->d is non-basic and down-morphisms a->b, b->d compose to it",
    )


def _c_reedy_square() -> CorpusEntry:
    return CorpusEntry(
        "c_reedy_square",
        _square({"d": 2, "a": 1, "b": 1, "c": 0}),
        _verdicts("bistratified almost_c_reedy",
                  "inverse direct stratified discrete_strata groupoidal_strata almost_reedy reedy "
                  "almost_g_reedy g_reedy c_reedy"),
        "commutative square with a level arrow a->b; a->d has two unrelated Reedy factorizations",
    )


def _iso_pair() -> CorpusEntry:
    base = make_category(["0", "1"], [("f", "0", "1"), ("g", "1", "0")],
                         {("g", "f"): "id_0", ("f", "g"): "id_1"})
    return CorpusEntry("iso_pair", with_degrees(base, {"0": 0, "1": 1}), _verdicts(false=_ALL_TRUE),
                       "two objects and a single nonidentity isomorphism; not bistratified")


def _rezk_poset() -> CorpusEntry:
    base = make_category(["0", "1", "2"], [("10", "1", "0"), ("02", "0", "2"), ("12", "1", "2")],
                         {("02", "10"): "12"})
    return CorpusEntry(
        "rezk_poset",
        with_degrees(base, {"0": 0, "1": 1, "2": 2}),
        _verdicts("bistratified discrete_strata groupoidal_strata almost_reedy reedy almost_g_reedy g_reedy "
                  "almost_c_reedy c_reedy", "inverse direct stratified"),
        "poset 1 <= 0 <= 2; Reedy with its basic classes, fs-Reedy only once 1->2 joins the up class",
    )


def _orbit_deg_h() -> CorpusEntry:
    return CorpusEntry(
        "orbit_Z2_degH", _orbit_z2(False, False),
        _verdicts("bistratified groupoidal_strata almost_g_reedy g_reedy almost_c_reedy c_reedy",
                  "inverse direct stratified discrete_strata almost_reedy reedy"),
        "orbit category of Z/2 with deg(G/H) = |H|",
    )


def _orbit_index() -> CorpusEntry:
    return CorpusEntry(
        "orbit_Z2_index", _orbit_z2(False, True),
        _verdicts("stratified bistratified groupoidal_strata almost_g_reedy g_reedy almost_c_reedy c_reedy",
                  "inverse direct discrete_strata almost_reedy reedy"),
        "orbit category of Z/2 with deg(G/H) = [G:H]; freeness holds",
    )


def _orbit_op_deg_h() -> CorpusEntry:
    return CorpusEntry(
        "orbit_Z2_op_degH", _orbit_z2(True, False),
        _verdicts("stratified bistratified groupoidal_strata",
                  "inverse direct discrete_strata almost_reedy reedy almost_g_reedy g_reedy almost_c_reedy c_reedy"),
        "opposite orbit category of Z/2 with deg(G/H) = |H|; the automorphism action is not free",
    )


def _orbit_op_index() -> CorpusEntry:
    return CorpusEntry(
        "orbit_Z2_op_index", _orbit_z2(True, True),
        _verdicts("bistratified groupoidal_strata almost_g_reedy g_reedy almost_c_reedy c_reedy",
                  "inverse direct stratified discrete_strata almost_reedy reedy"),
        "opposite orbit category of Z/2 with deg(G/H) = [G:H]",
    )


def _parallel_pair() -> CorpusEntry:
    base = make_category(["x", "y"], [("f", "x", "y"), ("g", "x", "y")])
    return CorpusEntry(
        "parallel_pair", with_degrees(base, {"x": 1, "y": 0}),
        _verdicts(_ALL_TRUE.replace("direct ", ""), "direct"),
        "two parallel arrows lowering degree; an inverse category",
    )


def _delta(top: int) -> CorpusEntry:
    return CorpusEntry(
        f"delta_le_{top}", _monotone_category(top),
        _verdicts("bistratified discrete_strata groupoidal_strata almost_reedy reedy almost_g_reedy g_reedy "
                  "almost_c_reedy c_reedy", "inverse direct stratified"),
        f"simplex category truncated at [{top}], degree n at [n]",
    )


def _idempotent_collage() -> CorpusEntry:
    base = make_category(
        ["c", "d"],
        [("u", "c", "d"), ("w", "d", "c"), ("e", "d", "d")],
        {("w", "u"): "id_c", ("u", "w"): "e", ("e", "e"): "e", ("e", "u"): "u", ("w", "e"): "w"},
    )
    return CorpusEntry(
        "idempotent_collage", with_degrees(base, {"c": 0, "d": 1}),
        _verdicts("bistratified discrete_strata groupoidal_strata almost_reedy reedy almost_g_reedy g_reedy "
                  "almost_c_reedy c_reedy", "inverse direct stratified"),
        "a retraction c -> d -> c splitting the idempotent e on d",
    )


def _terminal() -> CorpusEntry:
    return CorpusEntry("terminal", with_degrees(make_category(["*"], []), {"*": 0}), _verdicts(_ALL_TRUE),
                       "one object, one morphism")


def _z2_group() -> CorpusEntry:
    base = make_category(["*"], [("s", "*", "*")], {("s", "s"): "id_*"})
    return CorpusEntry(
        "z2_group", with_degrees(base, {"*": 0}),
        _verdicts("stratified bistratified groupoidal_strata almost_g_reedy g_reedy almost_c_reedy c_reedy",
                  "inverse direct discrete_strata almost_reedy reedy"),
        "the group Z/2 on one object of degree 0",
    )


_REGISTRY: Dict[str, Callable[[], CorpusEntry]] = {
    "almost_reedy_square": _almost_reedy_square,
    "c_reedy_square": _c_reedy_square,
    "iso_pair": _iso_pair,
    "rezk_poset": _rezk_poset,
    "orbit_Z2_degH": _orbit_deg_h,
    "orbit_Z2_index": _orbit_index,
    "orbit_Z2_op_degH": _orbit_op_deg_h,
    "orbit_Z2_op_index": _orbit_op_index,
    "parallel_pair": _parallel_pair,
    "delta_le_1": lambda: _delta(1),
    "delta_le_2": lambda: _delta(2),
    "idempotent_collage": _idempotent_collage,
    "terminal": _terminal,
    "z2_group": _z2_group,
}


def names() -> List[str]:
    return sorted(_REGISTRY)


@lru_cache(maxsize=None)
def builtin(name: str) -> CorpusEntry:
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise UnknownEntry(f"no corpus entry named {name!r}") from None
    return builder()


def rezk_enlarged_classes() -> Tuple[frozenset, frozenset]:
    """(up, down) for the Rezk poset with 1->2 added to the up class."""
    ids = frozenset({"id_0", "id_1", "id_2"})
    return ids | {"02", "12"}, ids | {"10"}


def iso_pair_fs_structure() -> FunctorialFactorization:
    C = builtin("iso_pair").category
    ids = frozenset({"id_0", "id_1"})
    return canonical_functorial_factorization(C, ids | {"f"}, ids | {"g"})


# -------------------------------------------------------------------
# Exhaustive enumeration
# -------------------------------------------------------------------

def _hom_distributions(pairs: Sequence[Tuple[str, str]], count: int) -> Iterator[Tuple[Tuple[str, str], ...]]:
    """Multisets of `count` (src, tgt) pairs in canonical order."""
    yield from combinations_with_replacement(pairs, count)


def _tables(objects: Sequence[str], arrows: Sequence[Tuple[str, str, str]]) -> Iterator[Dict[Tuple[str, str], str]]:
    """Associative composition tables for the given non-identity arrows.

    Backtracks over composable pairs; a partial table is dropped as soon
    as some fully determined triple breaks associativity.
    """
    ends = {a: (s, t) for a, s, t in arrows}
    ident = {x: f"id_{x}" for x in objects}
    for x in objects:
        ends[ident[x]] = (x, x)
    is_id = set(ident.values())
    pairs = [(g, f) for f, _, _ in arrows for g, _, _ in arrows if ends[g][0] == ends[f][1]]
    options = {(g, f): [h for h, (s, t) in sorted(ends.items()) if s == ends[f][0] and t == ends[g][1]]
               for g, f in pairs}
    triples = [(h, g, f) for g, f in pairs for h, _, _ in arrows if ends[h][0] == ends[g][1]]
    table: Dict[Tuple[str, str], str] = {}

    def comp(g: str, f: str) -> Optional[str]:
        if g in is_id:
            return f
        if f in is_id:
            return g
        return table.get((g, f))

    def consistent() -> bool:
        for h, g, f in triples:
            gf, hg = comp(g, f), comp(h, g)
            if gf is None or hg is None:
                continue
            left, right = comp(h, gf), comp(hg, f)
            if left is not None and right is not None and left != right:
                return False
        return True

    def search(i: int) -> Iterator[Dict[Tuple[str, str], str]]:
        if i == len(pairs):
            yield dict(table)
            return
        for h in options[pairs[i]]:
            table[pairs[i]] = h
            if consistent():
                yield from search(i + 1)
            del table[pairs[i]]

    yield from search(0)


def _degree_assignments(objects: Sequence[str], max_degree: Optional[int]) -> Iterator[Dict[str, int]]:
    top = MAX_DEGREE if max_degree is None else max_degree
    for values in product(range(top + 1), repeat=len(objects)):
        yield dict(zip(objects, values))


def enumerate_categories(n_objects: int, n_morphisms: int) -> Iterator[FinCategory]:
    """Every composition table with exactly these counts; no deduplication up to renaming."""
    objects = [f"x{i}" for i in range(n_objects)]
    extra = n_morphisms - n_objects
    if extra < 0:
        return
    pairs = [(s, t) for s in objects for t in objects]
    for dist in _hom_distributions(pairs, extra):
        arrows = [(f"f{i}", s, t) for i, (s, t) in enumerate(dist)]
        for table in _tables(objects, arrows):
            yield make_category(objects, arrows, table)


def _check_bounds(n_objects: int, n_morphisms: int, max_degree: Optional[int]) -> None:
    if n_objects > MAX_OBJECTS or n_morphisms > MAX_MORPHISMS:
        raise BoundsExceeded(f"enumeration is capped at {MAX_OBJECTS} objects and {MAX_MORPHISMS} morphisms")
    if max_degree is not None and max_degree > MAX_DEGREE:
        raise BoundsExceeded(f"degree values are capped at {MAX_DEGREE}")


def enumerate_exact(n_objects: int, n_morphisms: int, max_degree: Optional[int] = None) -> Iterator[DegreedCategory]:
    _check_bounds(n_objects, n_morphisms, max_degree)
    objects = [f"x{i}" for i in range(n_objects)]
    for base in enumerate_categories(n_objects, n_morphisms):
        for degree in _degree_assignments(objects, max_degree):
            yield with_degrees(base, degree)


def enumerate_small(max_objects: int = int(DEFAULTS["ENUM_MAX_OBJECTS"]),
                    max_morphisms: int = int(DEFAULTS["ENUM_MAX_MORPHISMS"]),
                    max_degree: Optional[int] = None) -> Iterator[DegreedCategory]:
    """All categories with 1..max_objects objects and at most max_morphisms morphisms."""
    _check_bounds(max_objects, max_morphisms, max_degree)
    for n in range(1, max_objects + 1):
        for m in range(n, max_morphisms + 1):
            yield from enumerate_exact(n, m, max_degree)


# -------------------------------------------------------------------
# Random diagrams
# -------------------------------------------------------------------

def _decompositions(C: FinCategory) -> Dict[str, List[Tuple[str, str]]]:
    out: Dict[str, List[Tuple[str, str]]] = {}
    for g, f in C.composable_pairs():
        if not C.is_identity(g) and not C.is_identity(f):
            out.setdefault(C.compose(g, f), []).append((g, f))
    return out


def _attempt(C: FinCategory, rng: random.Random, max_size: int) -> SetDiagram:
    sets = {x: tuple(str(i) for i in range(rng.randint(0, max_size))) for x in C.objects}
    maps: Dict[str, Dict[str, str]] = {C.identity[x]: {a: a for a in sets[x]} for x in C.objects}
    decompositions = _decompositions(C)
    pending = [m for m in C.morphisms if not C.is_identity(m.id)]
    while pending:
        progress = False
        for m in list(pending):
            for g, f in decompositions.get(m.id, ()):
                if g in maps and f in maps:
                    maps[m.id] = {a: maps[g][maps[f][a]] for a in sets[m.src]}
                    pending.remove(m)
                    progress = True
                    break
        if progress:
            continue
        m = pending.pop(0)
        if sets[m.src] and not sets[m.tgt]:
            raise NotFunctorial(f"no map from a nonempty set into an empty one along {m.id}")
        maps[m.id] = {a: rng.choice(sets[m.tgt]) for a in sets[m.src]}
    return SetDiagram(C, sets, maps).validate()


def random_diagram(C: FinCategory, rng: random.Random, max_size: int = int(DEFAULTS["RANDOM_SET_SIZE"]),
                   attempts: int = 50) -> SetDiagram:
    """Seeded random diagram: random sets and maps, composites filled in, rejected until functorial."""
    for _ in range(attempts):
        try:
            return _attempt(C, rng, max_size)
        except NotFunctorial as e:
            logger.debug(f"random_diagram: rejected draw ({e})")
    logger.warning(f"random_diagram: no functorial draw in {attempts} attempts; using the one-point diagram")
    return SetDiagram(C, {x: ("0",) for x in C.objects}, {m.id: {"0": "0"} for m in C.morphisms})


def random_diagram_map(C: FinCategory, rng: random.Random, max_size: int = int(DEFAULTS["RANDOM_SET_SIZE"]),
                       attempts: int = 50) -> DiagramMap:
    for _ in range(attempts):
        A = random_diagram(C, rng, max_size)
        B = random_diagram(C, rng, max_size)
        variables = []
        for c in C.objects:
            for a in A.sets[c]:
                cands = list(B.sets[c])
                rng.shuffle(cands)
                variables.append(((c, a), cands))
        constraints: Dict = {}
        for m in C.morphisms:
            if C.is_identity(m.id):
                continue
            for a in A.sets[m.src]:
                constraints.setdefault((m.src, a), []).append((B.maps[m.id], (m.tgt, A.maps[m.id][a])))
        found = search_families(variables, constraints, first_only=True, what="random diagram map")
        if found:
            comps = {c: {} for c in C.objects}
            for (c, a), b in found[0].items():
                comps[c][a] = b
            return DiagramMap(A, B, comps).validate()
        logger.debug("random_diagram_map: no natural map between the drawn diagrams, redrawing")
    A = random_diagram(C, rng, max_size)
    return DiagramMap(A, A, {x: {a: a for a in A.sets[x]} for x in C.objects})


# -------------------------------------------------------------------
# Bigluing instances
# -------------------------------------------------------------------

def bigluing_instances(max_profunctor_size: int = 2, limit: Optional[int] = None,
                       sources: Optional[Sequence[DegreedCategory]] = None) -> Iterator[Tuple[DegreedCategory, AbstractBigluingData]]:
    """Abstract bigluing data recognised from bistratified corpus shapes at each degree split."""
    if sources is None:
        sources = [builtin(n).category for n in names()]
        sources += list(enumerate_small(2, 4, max_degree=1)) + list(enumerate_exact(3, 5, max_degree=2))
    produced = 0
    for E in sources:
        if not check_bistratified(E).ok:
            continue
        for split in E.degrees()[1:]:
            try:
                abd = recognize_collage(E, split)
            except (NotACollage, InvalidBigluingData) as e:
                logger.debug(f"bigluing_instances: split {split} rejected: {e}")
                continue
            sizes = [len(v) for v in list(abd.U.elements.values()) + list(abd.W.elements.values())]
            if sizes and max(sizes) > max_profunctor_size:
                continue
            yield E, abd
            produced += 1
            if limit is not None and produced >= limit:
                return


def mismatches(entry: CorpusEntry, verdicts: Mapping[str, bool]) -> List[str]:
    """Classes whose computed verdict differs from the recorded one."""
    return [name for name, want in entry.expected.items() if verdicts.get(name) != want]
