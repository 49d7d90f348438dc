# modules/classify.py
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from modules.config_loader import DEFAULTS
from modules.diagrams import SetDiagram, search_families
from modules.errors import (
    InternalInvariantBroken,
    IterationGuardExceeded,
    NotAlmostReedy,
    NotFsReedy,
    SizeGuardExceeded,
)
from modules.factorization import (
    Factorization,
    basic_classes,
    basic_morphisms,
    enumerate_reedy_factorizations,
    factorization_components,
    fundamental_factorizations,
    reedy_split,
    zigzag_components,
)
from modules.fincat_core import DegreedCategory, FinCategory, opposite, subcategory

logger = logging.getLogger(__name__)

MAX_SEARCH = int(DEFAULTS["MAX_SEARCH"])

CLASS_NAMES = (
    "inverse",
    "direct",
    "stratified",
    "bistratified",
    "discrete_strata",
    "groupoidal_strata",
    "almost_reedy",
    "reedy",
    "almost_g_reedy",
    "g_reedy",
    "almost_c_reedy",
    "c_reedy",
)

# (stronger, weaker)
IMPLICATIONS = (
    ("reedy", "almost_reedy"),
    ("almost_reedy", "almost_c_reedy"),
    ("almost_reedy", "discrete_strata"),
    ("g_reedy", "almost_g_reedy"),
    ("almost_g_reedy", "almost_c_reedy"),
    ("almost_g_reedy", "groupoidal_strata"),
    ("reedy", "c_reedy"),
    ("reedy", "g_reedy"),
    ("g_reedy", "c_reedy"),
    ("c_reedy", "almost_c_reedy"),
    ("almost_reedy", "bistratified"),
    ("almost_g_reedy", "bistratified"),
    ("almost_c_reedy", "bistratified"),
    ("inverse", "stratified"),
    ("stratified", "bistratified"),
    ("discrete_strata", "bistratified"),
    ("groupoidal_strata", "bistratified"),
)


@dataclass(frozen=True)
class Witness:
    """Why a check failed: the clause and the morphisms/objects that break it."""

    clause: str
    morphisms: Tuple[str, ...] = ()
    objects: Tuple[str, ...] = ()
    detail: str = ""

    def to_json(self) -> Dict[str, object]:
        out: Dict[str, object] = {"clause": self.clause, "morphisms": list(self.morphisms)}
        if self.objects:
            out["objects"] = list(self.objects)
        if self.detail:
            out["detail"] = self.detail
        return out

    def __str__(self) -> str:
        parts = [self.clause]
        if self.morphisms:
            parts.append("(" + ", ".join(self.morphisms) + ")")
        if self.objects:
            parts.append("at " + ", ".join(self.objects))
        if self.detail:
            parts.append(f"[{self.detail}]")
        return " ".join(parts)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: Optional[Witness] = None

    def __bool__(self) -> bool:
        return self.ok


OK = CheckResult(True)


def _fail(clause: str, morphisms: Iterable[str] = (), objects: Iterable[str] = (), detail: str = "") -> CheckResult:
    return CheckResult(False, Witness(clause, tuple(morphisms), tuple(objects), detail))


# -------------------------------------------------------------------
# Degree-only classes
# -------------------------------------------------------------------

def check_inverse(C: DegreedCategory) -> CheckResult:
    for m in C.morphisms:
        if not C.is_identity(m.id) and not C.deg(m.src) > C.deg(m.tgt):
            return _fail("nonidentity_not_decreasing", (m.id,))
    return OK


def check_direct(C: DegreedCategory) -> CheckResult:
    res = check_inverse(opposite(C))
    if res.ok:
        return OK
    return _fail("nonidentity_not_increasing", res.witness.morphisms)


def check_stratified(C: DegreedCategory) -> CheckResult:
    for m in C.morphisms:
        if C.deg(m.src) < C.deg(m.tgt):
            return _fail("not_non_increasing", (m.id,))
    return OK


# -------------------------------------------------------------------
# Shared clauses
# -------------------------------------------------------------------

def _identities_basic(C: DegreedCategory) -> CheckResult:
    basic = basic_morphisms(C)
    for x in C.objects:
        if C.identity[x] not in basic:
            return _fail("identity_not_basic", (C.identity[x],), (x,))
    return OK


def _basic_level(C: DegreedCategory) -> List[str]:
    basic = basic_morphisms(C)
    return [f for f in C.ids if f in basic and C.is_level(f)]


def _basic_level_closed(C: DegreedCategory) -> CheckResult:
    basic = basic_morphisms(C)
    level = set(_basic_level(C))
    for f in _basic_level(C):
        for g in C.base.out_of(C.tgt(f)):
            if g in level and C.compose(g, f) not in basic:
                return _fail("basic_level_not_closed", (f, g))
    return OK


def _disconnected(C: DegreedCategory, f: str) -> Optional[Witness]:
    bound = min(C.deg(C.src(f)), C.deg(C.tgt(f)))
    comps = factorization_components(C, f, bound)
    pair = comps.disconnected_pair()
    if pair is None:
        return None
    p, q = pair
    return Witness("factorizations_disconnected", (f, p.first, p.second, q.first, q.second))


def _nonbasic_connected(C: DegreedCategory, level_only: bool = False) -> CheckResult:
    basic = basic_morphisms(C)
    for f in C.ids:
        if f in basic or (level_only and not C.is_level(f)):
            continue
        w = _disconnected(C, f)
        if w is not None:
            return CheckResult(False, w)
    return OK


def _closure(C: DegreedCategory, cls: FrozenSet[str], name: str) -> CheckResult:
    for f in C.ids:
        if f not in cls:
            continue
        for g in C.base.out_of(C.tgt(f)):
            if g in cls and C.compose(g, f) not in cls:
                return _fail(f"{name}_not_closed", (f, g))
    return OK


def _first_failure(*thunks) -> CheckResult:
    for thunk in thunks:
        res = thunk()
        if not res.ok:
            return res
    return OK


# -------------------------------------------------------------------
# Bistratified and strata
# -------------------------------------------------------------------

def check_bistratified(C: DegreedCategory) -> CheckResult:
    return _first_failure(
        lambda: _identities_basic(C),
        lambda: _basic_level_closed(C),
        lambda: _nonbasic_connected(C, level_only=True),
    )


def check_discrete_strata(C: DegreedCategory) -> CheckResult:
    res = check_bistratified(C)
    if not res.ok:
        return res
    for f in _basic_level(C):
        if not C.is_identity(f):
            return _fail("basic_level_not_identity", (f,))
    return OK


def _groupoidal_clauses(C: DegreedCategory) -> CheckResult:
    level = set(_basic_level(C))
    isos = C.base.isos()
    for f in C.ids:
        if f in level and f not in isos:
            return _fail("basic_level_not_iso", (f,))
        if f in isos and f not in level:
            return _fail("iso_not_basic_level", (f,))
    return OK


def check_groupoidal_strata(C: DegreedCategory) -> CheckResult:
    return _first_failure(lambda: check_bistratified(C), lambda: _groupoidal_clauses(C))


# -------------------------------------------------------------------
# Reedy
# -------------------------------------------------------------------

def check_almost_reedy(C: DegreedCategory) -> CheckResult:
    def level_identities() -> CheckResult:
        for f in _basic_level(C):
            if not C.is_identity(f):
                return _fail("basic_level_not_identity", (f,))
        return OK

    return _first_failure(
        lambda: _identities_basic(C),
        level_identities,
        lambda: _nonbasic_connected(C),
    )


def _up_down_closed(C: DegreedCategory) -> CheckResult:
    classes = basic_classes(C)
    return _first_failure(
        lambda: _closure(C, classes.up, "up"),
        lambda: _closure(C, classes.down, "down"),
    )


def check_reedy(C: DegreedCategory) -> CheckResult:
    return _first_failure(lambda: check_almost_reedy(C), lambda: _up_down_closed(C))


def _subcategory_clauses(C: DegreedCategory, cls: FrozenSet[str], name: str) -> CheckResult:
    for x in C.objects:
        if C.identity[x] not in cls:
            return _fail("class_missing_identity", (C.identity[x],), (x,), name)
    res = _closure(C, cls, "class")
    if not res.ok:
        return CheckResult(False, Witness(res.witness.clause, res.witness.morphisms, (), name))
    return OK


def _strict_degrees(C: DegreedCategory, up: FrozenSet[str], down: FrozenSet[str], exempt) -> CheckResult:
    for f in C.ids:
        if exempt(f):
            continue
        s, t = C.deg(C.src(f)), C.deg(C.tgt(f))
        if f in up and not s < t:
            return _fail("up_not_raising", (f,))
        if f in down and not s > t:
            return _fail("down_not_lowering", (f,))
    return OK


def check_reedy_definitional(C: DegreedCategory, up: Iterable[str], down: Iterable[str]) -> CheckResult:
    """Classical definition against explicit up/down data, by exhaustive enumeration."""
    up, down = frozenset(up), frozenset(down)

    def unique() -> CheckResult:
        for f in C.ids:
            facs = enumerate_reedy_factorizations(C, f, up, down)
            if not facs:
                return _fail("no_factorization", (f,))
            if len(facs) > 1:
                p, q = facs[0], facs[1]
                return _fail("factorization_not_unique", (f, p.first, p.second, q.first, q.second))
        return OK

    return _first_failure(
        lambda: _subcategory_clauses(C, up, "up"),
        lambda: _subcategory_clauses(C, down, "down"),
        lambda: _strict_degrees(C, up, down, C.is_identity),
        unique,
    )


# -------------------------------------------------------------------
# Generalized Reedy
# -------------------------------------------------------------------

def _free_action(C: DegreedCategory, lowering: Iterable[str]) -> CheckResult:
    for f in lowering:
        y = C.tgt(f)
        for theta in C.base.automorphisms(y):
            if not C.is_identity(theta) and C.compose(theta, f) == f:
                return _fail("not_free", (theta, f), (y,))
    return OK


def _basic_lowering(C: DegreedCategory) -> List[str]:
    basic = basic_morphisms(C)
    return [f for f in C.ids if f in basic and C.deg(C.src(f)) > C.deg(C.tgt(f))]


def check_almost_g_reedy(C: DegreedCategory) -> CheckResult:
    return _first_failure(
        lambda: _identities_basic(C),
        lambda: _groupoidal_clauses(C),
        lambda: _nonbasic_connected(C),
        lambda: _free_action(C, _basic_lowering(C)),
    )


def check_g_reedy(C: DegreedCategory) -> CheckResult:
    return _first_failure(lambda: check_almost_g_reedy(C), lambda: _up_down_closed(C))


def check_g_reedy_definitional(C: DegreedCategory, up: Iterable[str], down: Iterable[str]) -> CheckResult:
    up, down = frozenset(up), frozenset(down)
    isos = C.base.isos()

    def isos_are_both() -> CheckResult:
        for f in C.ids:
            both = f in up and f in down
            if f in isos and not both:
                return _fail("iso_not_in_up_and_down", (f,))
            if both and f not in isos:
                return _fail("up_and_down_not_iso", (f,))
            if f in isos and not C.is_level(f):
                return _fail("iso_not_level", (f,))
        return OK

    def unique_up_to_iso() -> CheckResult:
        for f in C.ids:
            facs = enumerate_reedy_factorizations(C, f, up, down)
            if not facs:
                return _fail("no_factorization", (f,))
            p = facs[0]
            for q in facs[1:]:
                related = any(
                    C.compose(theta, p.first) == q.first and C.compose(q.second, theta) == p.second
                    for theta in C.hom(p.mid, q.mid) if theta in isos
                )
                if not related:
                    return _fail("factorization_not_unique_up_to_iso", (f, p.first, p.second, q.first, q.second))
        return OK

    return _first_failure(
        lambda: _subcategory_clauses(C, up, "up"),
        lambda: _subcategory_clauses(C, down, "down"),
        lambda: _strict_degrees(C, up, down, lambda f: f in isos),
        isos_are_both,
        unique_up_to_iso,
        lambda: _free_action(C, [f for f in C.ids if f in down]),
    )


# -------------------------------------------------------------------
# c-Reedy and projective strata
# -------------------------------------------------------------------

@dataclass(frozen=True)
class Cone:
    vertex: Tuple[str, str]
    projections: Mapping[Tuple[str, str], str]


@dataclass(frozen=True)
class RetractDecomposition:
    ok: bool
    cones: Tuple[Cone, ...] = ()
    failed_component: Optional[Tuple[Tuple[str, str], ...]] = None


def retract_decomposition(F: SetDiagram, max_search: int = MAX_SEARCH) -> RetractDecomposition:
    """Decide whether F is a coproduct of retracts of representables.

    Each connected component of the category of elements needs a cone
    over its identity functor with vertex one of its own elements.
    """
    F.validate()
    C = F.shape
    elements = [(y, a) for y in C.objects for a in F.sets[y]]
    arrows = []
    G = nx.Graph()
    G.add_nodes_from(elements)
    for m in C.morphisms:
        for a in F.sets[m.src]:
            e, e2 = (m.src, a), (m.tgt, F.maps[m.id][a])
            arrows.append((m.id, e, e2))
            if e != e2:
                G.add_edge(e, e2)
    components = sorted(tuple(sorted(c)) for c in nx.connected_components(G))
    cones = []
    for comp in components:
        members = set(comp)
        comp_arrows = [(g, e, e2) for g, e, e2 in arrows if e in members and not C.is_identity(g)]
        cone = None
        for vertex in comp:
            y0, a0 = vertex
            variables = [(e, [h for h in C.hom(y0, e[0]) if F.maps[h][a0] == e[1]]) for e in comp]
            constraints: Dict = {}
            for g, e, e2 in comp_arrows:
                table = {h: C.compose(g, h) for h in C.hom(y0, e[0])}
                constraints.setdefault(e, []).append((table, e2))
            found = search_families(variables, constraints, max_search, first_only=True, what="cone search")
            if found:
                cone = Cone(vertex, found[0])
                break
        if cone is None:
            return RetractDecomposition(False, tuple(cones), comp)
        cones.append(cone)
    return RetractDecomposition(True, tuple(cones))


def _hom_functor_on(C: DegreedCategory, x: str, S: FinCategory, allowed: FrozenSet[str]) -> SetDiagram:
    """y -> allowed(x, y) on S, acted on by postcomposition."""
    sets = {y: tuple(f for f in C.hom(x, y) if f in allowed) for y in S.objects}
    maps = {k: {f: C.compose(k, f) for f in sets[S.src(k)]} for k in S.ids}
    return SetDiagram(S, sets, maps)


def _projective_strata(C: DegreedCategory, down: FrozenSet[str], level: FrozenSet[str], max_search: int) -> CheckResult:
    for x in C.objects:
        for delta in C.degrees():
            if delta >= C.deg(x):
                break
            objs = C.objects_of_degree(delta)
            keep = [f for f in level if C.src(f) in objs and C.tgt(f) in objs]
            S = subcategory(C.base, keep, objs)
            F = _hom_functor_on(C, x, S, down)
            if not retract_decomposition(F, max_search).ok:
                return _fail("stratum_functor_not_projective", (), (x,), str(delta))
    return OK


def _decreasing_then_level(C: DegreedCategory) -> CheckResult:
    basic = basic_morphisms(C)
    level = set(_basic_level(C))
    for f in _basic_lowering(C):
        for g in C.base.out_of(C.tgt(f)):
            if g in level and C.compose(g, f) not in basic:
                return _fail("decreasing_then_level_not_basic", (f, g))
    return OK


def check_almost_c_reedy(C: DegreedCategory, max_search: int = MAX_SEARCH) -> CheckResult:
    def projective() -> CheckResult:
        return _projective_strata(C, frozenset(_basic_lowering(C)), frozenset(_basic_level(C)), max_search)

    return _first_failure(
        lambda: _identities_basic(C),
        lambda: _basic_level_closed(C),
        lambda: _nonbasic_connected(C),
        lambda: _decreasing_then_level(C),
        projective,
    )


def check_c_reedy(C: DegreedCategory, max_search: int = MAX_SEARCH) -> CheckResult:
    return _first_failure(lambda: check_almost_c_reedy(C, max_search), lambda: _up_down_closed(C))


def almost_c_composition_property(C: DegreedCategory) -> CheckResult:
    """Basic strictly decreasing followed by basic level stays basic."""
    return _decreasing_then_level(C)


def check_c_reedy_definitional(
    C: DegreedCategory, up: Iterable[str], down: Iterable[str], level: Iterable[str], max_search: int = MAX_SEARCH
) -> CheckResult:
    up, down, level = frozenset(up), frozenset(down), frozenset(level)

    def level_inside() -> CheckResult:
        for f in sorted(level):
            if f not in up or f not in down:
                return _fail("level_not_in_up_and_down", (f,))
            if not C.is_level(f):
                return _fail("level_not_level", (f,))
        return OK

    def connected_factorizations() -> CheckResult:
        for f in C.ids:
            facs = enumerate_reedy_factorizations(C, f, up, down)
            if not facs:
                return _fail("no_factorization", (f,))
            comps = zigzag_components(C, facs, allowed=level)
            pair = comps.disconnected_pair()
            if pair is not None:
                p, q = pair
                return _fail("factorizations_not_level_connected", (f, p.first, p.second, q.first, q.second))
        return OK

    lowering = frozenset(f for f in down if f not in level)
    return _first_failure(
        lambda: _subcategory_clauses(C, up, "up"),
        lambda: _subcategory_clauses(C, down, "down"),
        lambda: _subcategory_clauses(C, level, "level"),
        level_inside,
        lambda: _strict_degrees(C, up, down, lambda f: f in level),
        connected_factorizations,
        lambda: _projective_strata(C, lowering, level, max_search),
    )


# -------------------------------------------------------------------
# Checked Reedy factorization
# -------------------------------------------------------------------

def _almost_verdict(C: DegreedCategory, mode: str, max_search: int) -> CheckResult:
    key = f"almost_{mode}"
    if key not in C.memo:
        C.memo[key] = check_almost_reedy(C) if mode == "s" else check_almost_c_reedy(C, max_search)
    return C.memo[key]


def reedy_factor(C: DegreedCategory, f: str, mode: str = "s", verify: bool = True,
                 max_search: int = MAX_SEARCH) -> Factorization:
    """reedy_split behind an almost-Reedy (mode "s") or almost-c-Reedy (mode "c") check.

    The verdict is kept in C.memo, so factoring every morphism of C runs
    the check once.
    """
    if mode not in ("s", "c"):
        raise ValueError(f"unknown factorization mode {mode!r}")
    C.base.morphism(f)
    if verify:
        result = _almost_verdict(C, mode, max_search)
        if not result.ok:
            raise NotAlmostReedy(f"mode {mode} factorization needs an almost-{'' if mode == 's' else 'c-'}Reedy category: {result.witness}")
    try:
        return reedy_split(C, f, mode)
    except NotAlmostReedy as e:
        if verify:
            raise InternalInvariantBroken(str(e)) from e
        raise


# -------------------------------------------------------------------
# Initial / final graph criterion
# -------------------------------------------------------------------

@dataclass(frozen=True)
class InitialFinal:
    initial: bool
    final: bool
    witness: Optional[Witness] = None


def _initial(C: DegreedCategory, x: str) -> Optional[str]:
    """First object f of x⇓C below x whose comma graph is not connected."""
    down = basic_classes(C).down
    vertices = [g for g in C.base.out_of(x) if g in down and not C.is_identity(g)]
    for f in C.base.out_of(x):
        if C.deg(C.tgt(f)) >= C.deg(x):
            continue
        comma = [(g, m) for g in vertices for m in C.hom(C.tgt(g), C.tgt(f)) if C.compose(m, g) == f]
        G = nx.Graph()
        G.add_nodes_from(comma)
        for (g, m), (g2, m2) in product(comma, comma):
            if g == g2:
                continue
            for j in C.hom(C.tgt(g), C.tgt(g2)):
                if j in down and C.compose(j, g) == g2 and C.compose(m2, j) == m:
                    G.add_edge((g, m), (g2, m2))
        if G.number_of_nodes() == 0 or not nx.is_connected(G):
            return f
    return None


def check_initial_final(C: DegreedCategory, x: str) -> InitialFinal:
    C.base.check_object(x)
    pre = check_almost_reedy(C)
    if not pre.ok:
        raise NotAlmostReedy(f"graph criterion needs an almost-Reedy category: {pre.witness}")
    bad_initial = _initial(C, x)
    bad_final = _initial(opposite(C), x)
    witness = None
    if bad_initial is not None:
        witness = Witness("comma_graph_disconnected", (bad_initial,), (x,), "initial")
    elif bad_final is not None:
        witness = Witness("comma_graph_disconnected", (bad_final,), (x,), "final")
    return InitialFinal(bad_initial is None, bad_final is None, witness)


# -------------------------------------------------------------------
# Functorial factorizations and fs-reduction
# -------------------------------------------------------------------

Square = Tuple[str, str, str, str]  # (f, f2, u, v) with v∘f = f2∘u


@dataclass(frozen=True)
class FunctorialFactorization:
    up: FrozenSet[str]
    down: FrozenSet[str]
    split: Mapping[str, Factorization]
    connector: Mapping[Square, str] = field(repr=False)


def commutative_squares(C: DegreedCategory) -> List[Square]:
    out = []
    for f in C.morphisms:
        for f2 in C.morphisms:
            for u in C.hom(f.src, f2.src):
                for v in C.hom(f.tgt, f2.tgt):
                    if C.compose(v, f.id) == C.compose(f2.id, u):
                        out.append((f.id, f2.id, u, v))
    return out


def _connector_candidates(C: DegreedCategory, split: Mapping[str, Factorization], sq: Square) -> List[str]:
    f, f2, u, v = sq
    a, b = split[f], split[f2]
    return [w for w in C.hom(a.mid, b.mid)
            if C.compose(w, a.first) == C.compose(b.first, u)
            and C.compose(b.second, w) == C.compose(v, a.second)]


def _split_clauses(C: DegreedCategory, up: FrozenSet[str], down: FrozenSet[str], split: Mapping[str, Factorization]) -> None:
    for cls, name in ((up, "up"), (down, "down")):
        res = _subcategory_clauses(C, cls, name)
        if not res.ok:
            raise NotFsReedy(f"{name} data is not a subcategory: {res.witness}")
    res = _strict_degrees(C, up, down, C.is_identity)
    if not res.ok:
        raise NotFsReedy(f"degree condition fails: {res.witness}")
    for f in C.ids:
        p = split.get(f)
        if p is None:
            raise NotFsReedy(f"no factorization chosen for {f}")
        if p.first not in down or p.second not in up or C.compose(p.second, p.first) != f:
            raise NotFsReedy(f"chosen factorization of {f} is not down-then-up")


def _functoriality_failure(C: DegreedCategory, split, connector: Mapping[Square, str], squares: List[Square]) -> Optional[str]:
    for sq in squares:
        f, f2, u, v = sq
        if f == f2 and C.is_identity(u) and C.is_identity(v) and connector[sq] != C.identity[split[f].mid]:
            return f"identity square on {f} has connector {connector[sq]}"
    by_source: Dict[str, List[Square]] = {}
    for sq in squares:
        by_source.setdefault(sq[0], []).append(sq)
    for sq in squares:
        f, f2, u, v = sq
        for sq2 in by_source.get(f2, ()):
            _, f3, u2, v2 = sq2
            pasted = (f, f3, C.compose(u2, u), C.compose(v2, v))
            if connector[pasted] != C.compose(connector[sq2], connector[sq]):
                return f"pasting {sq} with {sq2} breaks functoriality"
    return None


def functorial_factorization(
    C: DegreedCategory, split: Mapping[str, Factorization], up: Iterable[str], down: Iterable[str],
    max_search: int = MAX_SEARCH,
) -> FunctorialFactorization:
    """Attach connectors to a choice of factorizations, searching when a square is ambiguous."""
    up, down = frozenset(up), frozenset(down)
    _split_clauses(C, up, down, split)
    squares = commutative_squares(C)
    candidates = {}
    for sq in squares:
        cands = _connector_candidates(C, split, sq)
        if not cands:
            raise NotFsReedy(f"square {sq} has no connector")
        candidates[sq] = cands
    fixed = {sq: c[0] for sq, c in candidates.items() if len(c) == 1}
    open_squares = [sq for sq, c in candidates.items() if len(c) > 1]
    tried = 0
    for choice in product(*(candidates[sq] for sq in open_squares)):
        tried += 1
        if tried > max_search:
            raise SizeGuardExceeded(max_search, "connector search")
        connector = dict(fixed)
        connector.update(zip(open_squares, choice))
        if _functoriality_failure(C, split, connector, squares) is None:
            return FunctorialFactorization(up, down, dict(split), connector)
    raise NotFsReedy("no functorial choice of connectors exists")


def canonical_functorial_factorization(C: DegreedCategory, up: Iterable[str], down: Iterable[str]) -> FunctorialFactorization:
    """Take the first down-then-up factorization of every morphism."""
    up, down = frozenset(up), frozenset(down)
    split = {}
    for f in C.ids:
        facs = enumerate_reedy_factorizations(C, f, up, down)
        if not facs:
            raise NotFsReedy(f"{f} has no down-then-up factorization")
        split[f] = facs[0]
    return functorial_factorization(C, split, up, down)


def validate_functorial_factorization(C: DegreedCategory, ff: FunctorialFactorization) -> FunctorialFactorization:
    _split_clauses(C, ff.up, ff.down, ff.split)
    squares = commutative_squares(C)
    for sq in squares:
        w = ff.connector.get(sq)
        if w is None or w not in _connector_candidates(C, ff.split, sq):
            raise NotFsReedy(f"connector for square {sq} is missing or does not commute")
    problem = _functoriality_failure(C, ff.split, ff.connector, squares)
    if problem:
        raise NotFsReedy(problem)
    return ff


@dataclass(frozen=True)
class Replacement:
    obj: str
    target: str
    forward: str
    backward: str


@dataclass(frozen=True)
class FsReduction:
    objects: Tuple[str, ...]
    replacements: Mapping[str, Replacement]
    subcategory: DegreedCategory
    supplied_check: CheckResult
    canonical_check: CheckResult


def fs_reduce(C: DegreedCategory, ff: FunctorialFactorization) -> FsReduction:
    validate_functorial_factorization(C, ff)
    basic = basic_morphisms(C)
    D = tuple(x for x in C.objects if C.identity[x] in basic)
    replacements: Dict[str, Replacement] = {}
    guard = len(C.morphisms) + 2
    for x in sorted((x for x in C.objects if x not in D), key=lambda o: (C.deg(o), o)):
        fac = fundamental_factorizations(C, C.identity[x])[0]
        g, h = fac.first, fac.second
        for step in range(guard):
            gh = C.compose(g, h)
            if C.is_identity(gh):
                break
            p = ff.split[gh]
            g, h = C.compose(p.first, g), C.compose(h, p.second)
            logger.debug(f"fs_reduce {x}: step {step} through {C.tgt(g)}")
        else:
            raise IterationGuardExceeded(f"reduction of {x} did not settle in {guard} steps")
        y = C.tgt(g)
        if y not in D:
            r = replacements.get(y)
            if r is None:
                raise InternalInvariantBroken(f"{x} reduced to {y} which has not been reduced yet")
            g, h, y = C.compose(r.forward, g), C.compose(h, r.backward), r.target
        if C.compose(h, g) != C.identity[x] or C.compose(g, h) != C.identity[y]:
            raise InternalInvariantBroken(f"{x} and {y} are not shown isomorphic")
        replacements[x] = Replacement(x, y, g, h)

    keep = [m.id for m in C.morphisms if m.src in D and m.tgt in D]
    sub = DegreedCategory(subcategory(C.base, keep, D), {x: C.deg(x) for x in D})
    keep_set = frozenset(keep)
    supplied = check_reedy_definitional(sub, ff.up & keep_set, ff.down & keep_set)
    classes = basic_classes(sub)
    canonical = check_reedy_definitional(sub, classes.up, classes.down)
    logger.info(f"fs_reduce: kept {len(D)} of {len(C.objects)} objects; canonical Reedy={canonical.ok}")
    return FsReduction(D, replacements, sub, supplied, canonical)


# -------------------------------------------------------------------
# Report
# -------------------------------------------------------------------

@dataclass(frozen=True)
class ClassificationReport:
    verdicts: Mapping[str, bool]
    witnesses: Mapping[str, Witness]

    def implications_hold(self) -> List[Tuple[str, str]]:
        """Violated implications; empty when the lattice is respected."""
        return [(a, b) for a, b in IMPLICATIONS if self.verdicts[a] and not self.verdicts[b]]

    def to_json(self) -> Dict[str, object]:
        return {
            "verdicts": {name: self.verdicts[name] for name in CLASS_NAMES},
            "witnesses": {name: self.witnesses[name].to_json() for name in CLASS_NAMES if name in self.witnesses},
        }


CHECKS = {
    "inverse": check_inverse,
    "direct": check_direct,
    "stratified": check_stratified,
    "bistratified": check_bistratified,
    "discrete_strata": check_discrete_strata,
    "groupoidal_strata": check_groupoidal_strata,
    "almost_reedy": check_almost_reedy,
    "reedy": check_reedy,
    "almost_g_reedy": check_almost_g_reedy,
    "g_reedy": check_g_reedy,
    "almost_c_reedy": check_almost_c_reedy,
    "c_reedy": check_c_reedy,
}


def classify(C: DegreedCategory, max_search: int = MAX_SEARCH) -> ClassificationReport:
    verdicts = {}
    witnesses = {}
    for name in CLASS_NAMES:
        check = CHECKS[name]
        res = check(C, max_search) if name in ("almost_c_reedy", "c_reedy") else check(C)
        verdicts[name] = res.ok
        if not res.ok:
            witnesses[name] = res.witness
    report = ClassificationReport(verdicts, witnesses)
    broken = report.implications_hold()
    if broken:
        raise InternalInvariantBroken(f"implication lattice violated: {broken}")
    holds = ", ".join(n for n in CLASS_NAMES if verdicts[n])
    logger.info(f"classify: {holds or 'no class holds'}")
    return report


# -------------------------------------------------------------------
# Witness re-checks
# -------------------------------------------------------------------

def recheck_witness(C: DegreedCategory, w: Witness, up: Iterable[str] = (), down: Iterable[str] = (),
                    level: Iterable[str] = ()) -> bool:
    """True when the witness still breaks its clause when checked on its own."""
    basic = basic_morphisms(C)
    up, down, level = frozenset(up), frozenset(down), frozenset(level)
    ms = w.morphisms
    clause = w.clause
    if clause == "nonidentity_not_decreasing":
        f = ms[0]
        return not C.is_identity(f) and C.deg(C.src(f)) <= C.deg(C.tgt(f))
    if clause == "nonidentity_not_increasing":
        f = ms[0]
        return not C.is_identity(f) and C.deg(C.src(f)) >= C.deg(C.tgt(f))
    if clause == "not_non_increasing":
        return C.deg(C.src(ms[0])) < C.deg(C.tgt(ms[0]))
    if clause == "identity_not_basic":
        return C.is_identity(ms[0]) and ms[0] not in basic
    if clause == "basic_level_not_closed":
        f, g = ms
        return all(k in basic and C.is_level(k) for k in (f, g)) and C.compose(g, f) not in basic
    if clause == "factorizations_disconnected":
        f = ms[0]
        p, q = Factorization(ms[1], ms[2], C.tgt(ms[1])), Factorization(ms[3], ms[4], C.tgt(ms[3]))
        bound = min(C.deg(C.src(f)), C.deg(C.tgt(f)))
        return not factorization_components(C, f, bound).same_component(p, q)
    if clause == "basic_level_not_identity":
        return ms[0] in basic and C.is_level(ms[0]) and not C.is_identity(ms[0])
    if clause == "basic_level_not_iso":
        return ms[0] in basic and C.is_level(ms[0]) and not C.base.is_iso(ms[0])
    if clause == "iso_not_basic_level":
        return C.base.is_iso(ms[0]) and not (ms[0] in basic and C.is_level(ms[0]))
    if clause in ("up_not_closed", "down_not_closed"):
        classes = basic_classes(C)
        cls = classes.up if clause.startswith("up") else classes.down
        f, g = ms
        return f in cls and g in cls and C.compose(g, f) not in cls
    if clause == "not_free":
        theta, f = ms
        return C.base.is_iso(theta) and not C.is_identity(theta) and C.compose(theta, f) == f
    if clause == "decreasing_then_level_not_basic":
        f, g = ms
        return (f in basic and C.deg(C.src(f)) > C.deg(C.tgt(f)) and g in basic and C.is_level(g)
                and C.compose(g, f) not in basic)
    if clause == "stratum_functor_not_projective":
        x, delta = w.objects[0], int(w.detail)
        lowering = frozenset(down) if down else frozenset(_basic_lowering(C))
        lvl = level if level else frozenset(_basic_level(C))
        objs = C.objects_of_degree(delta)
        S = subcategory(C.base, [f for f in lvl if C.src(f) in objs and C.tgt(f) in objs], objs)
        return not retract_decomposition(_hom_functor_on(C, x, S, lowering)).ok
    if clause == "class_missing_identity":
        cls = {"up": up, "down": down, "level": level}[w.detail]
        return ms[0] not in cls
    if clause == "class_not_closed":
        cls = {"up": up, "down": down, "level": level}[w.detail]
        f, g = ms
        return f in cls and g in cls and C.compose(g, f) not in cls
    if clause == "up_not_raising":
        return ms[0] in up and C.deg(C.src(ms[0])) >= C.deg(C.tgt(ms[0]))
    if clause == "down_not_lowering":
        return ms[0] in down and C.deg(C.src(ms[0])) <= C.deg(C.tgt(ms[0]))
    if clause == "no_factorization":
        return not enumerate_reedy_factorizations(C, ms[0], up, down)
    if clause == "factorization_not_unique":
        return len(enumerate_reedy_factorizations(C, ms[0], up, down)) > 1
    if clause == "comma_graph_disconnected":
        x = w.objects[0]
        target = C if w.detail == "initial" else opposite(C)
        return _initial(target, x) is not None
    raise ValueError(f"no re-check for clause {clause!r}")
