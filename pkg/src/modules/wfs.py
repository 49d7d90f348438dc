# modules/wfs.py
import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

from modules.classify import (
    RetractDecomposition,
    check_bistratified,
    check_discrete_strata,
    retract_decomposition,
)
from modules.config_loader import DEFAULTS
from modules.diagrams import (
    DiagramMap,
    SetDiagram,
    family_token,
    latching_object,
    matching_object,
    natural_maps,
    search_families,
)
from modules.errors import (
    InternalInvariantBroken,
    InvalidInput,
    NotBistratified,
    NotDiscreteBistratified,
)
from modules.factorization import fundamental_factorizations, stratum
from modules.fincat_core import DegreedCategory, FinCategory, terminal_category
from modules.union_find import UnionFind

logger = logging.getLogger(__name__)

MAX_SEARCH = int(DEFAULTS["MAX_SEARCH"])


# -------------------------------------------------------------------
# Plain finite functions and the base (injection, surjection) wfs
# -------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteMap:
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    table: Mapping[str, str]

    def __call__(self, a: str) -> str:
        return self.table[a]

    def validate(self) -> "FiniteMap":
        if set(self.table) != set(self.source):
            raise InvalidInput("finite map is not total on its source")
        target = set(self.target)
        if any(v not in target for v in self.table.values()):
            raise InvalidInput("finite map leaves its target")
        return self

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def is_surjective(self) -> bool:
        return set(self.table.values()) == set(self.target)


def finite_map(source, target, table: Mapping[str, str]) -> FiniteMap:
    return FiniteMap(tuple(sorted(source)), tuple(sorted(target)), dict(table)).validate()


@dataclass(frozen=True)
class MapClass:
    is_L: bool
    is_R: bool


@dataclass(frozen=True)
class MapClassification:
    is_L: bool
    is_R: bool
    # object -> relative map, for inspection
    matching: Mapping[str, FiniteMap] = field(default_factory=dict)
    latching: Mapping[str, FiniteMap] = field(default_factory=dict)

    @property
    def map_class(self) -> MapClass:
        return MapClass(self.is_L, self.is_R)


def base_classify(f: FiniteMap) -> MapClass:
    return MapClass(f.is_injective(), f.is_surjective())


def base_factorize(f: FiniteMap) -> Tuple[FiniteMap, FiniteMap]:
    """X -> X ⊔ Y -> Y: coproduct inclusion, then f on X and the identity on Y."""
    coproduct = tuple([f"in0:{x}" for x in f.source] + [f"in1:{y}" for y in f.target])
    inclusion = FiniteMap(f.source, coproduct, {x: f"in0:{x}" for x in f.source})
    fold = {f"in0:{x}": f(x) for x in f.source}
    fold.update({f"in1:{y}": y for y in f.target})
    return inclusion, FiniteMap(coproduct, f.target, fold)


# -------------------------------------------------------------------
# Relative matching and latching maps
# -------------------------------------------------------------------

def _matching_family(C: DegreedCategory, x: str, X: SetDiagram, a: str, index) -> Dict[str, str]:
    return {f: X.maps[f][a] for f in index}


def relative_matching_map(C: DegreedCategory, x: str, m: DiagramMap, max_search: int = MAX_SEARCH) -> FiniteMap:
    """A_x -> M_xA ×_{M_xB} B_x."""
    A, B = m.source, m.target
    MA = matching_object(C, x, A, max_search, cross_check=False)
    MB = matching_object(C, x, B, max_search, cross_check=False)
    pushed = {t: family_token({f: m.components[C.tgt(f)][fam[f]] for f in MA.index}) for t, fam in MA.families.items()}
    own = {b: family_token(_matching_family(C, x, B, b, MB.index)) for b in B.sets[x]}
    pullback = tuple(f"({t}|{b})" for t in MA.elements for b in B.sets[x] if pushed[t] == own[b])
    table = {a: f"({family_token(_matching_family(C, x, A, a, MA.index))}|{m.components[x][a]})" for a in A.sets[x]}
    return FiniteMap(A.sets[x], pullback, table)


@dataclass(frozen=True)
class _Pushout:
    """L_xB ⊔_{L_xA} A_x with canonical tokens."""

    elements: Tuple[str, ...]
    token: Mapping[Tuple[str, str], str]
    members: Mapping[str, Tuple[Tuple[str, str], ...]]


def _latching_pushout(C: DegreedCategory, x: str, A: SetDiagram, E: SetDiagram, along: Mapping[str, Mapping[str, str]]) -> Tuple[_Pushout, object]:
    """Pushout of L_xE <- L_xA -> A_x where L_xA -> L_xE is induced by `along`."""
    LA = latching_object(C, x, A, cross_check=False)
    LE = latching_object(C, x, E, cross_check=False)
    uf = UnionFind()
    for t in LE.elements:
        uf.add(("L", t))
    for a in A.sets[x]:
        uf.add(("A", a))
    for t, members in LA.classes.items():
        f, a = members[0]
        uf.union(("L", LE.of[(f, along[C.src(f)][a])]), ("A", A.maps[f][a]))
    token = {}
    members = {}
    for rep, cls in uf.classes().items():
        name = f"{rep[0]}:{rep[1]}"
        members[name] = tuple(cls)
        for e in cls:
            token[e] = name
    return _Pushout(tuple(sorted(members)), token, members), LE


def relative_latching_map(C: DegreedCategory, x: str, m: DiagramMap) -> FiniteMap:
    """L_xB ⊔_{L_xA} A_x -> B_x."""
    A, B = m.source, m.target
    P, LB = _latching_pushout(C, x, A, B, m.components)
    table = {}
    for name, cls in P.members.items():
        tag, v = cls[0]
        if tag == "A":
            table[name] = m.components[x][v]
        else:
            f, b = LB.classes[v][0]
            table[name] = B.maps[f][b]
    return FiniteMap(P.elements, B.sets[x], table)


def _relative_maps(C: DegreedCategory, m: DiagramMap, max_search: int):
    matching = {x: relative_matching_map(C, x, m, max_search) for x in C.objects}
    latching = {x: relative_latching_map(C, x, m) for x in C.objects}
    return matching, latching


# -------------------------------------------------------------------
# Reedy and c-Reedy classification
# -------------------------------------------------------------------

def _require_discrete(C: DegreedCategory) -> None:
    res = check_discrete_strata(C)
    if not res.ok:
        raise NotDiscreteBistratified(f"needs a bistratified category with discrete strata: {res.witness}")


def reedy_classify_map(C: DegreedCategory, m: DiagramMap, max_search: int = MAX_SEARCH) -> MapClassification:
    _require_discrete(C)
    m.validate()
    matching, latching = _relative_maps(C, m, max_search)
    is_R = all(r.is_surjective() for r in matching.values())
    is_L = all(l.is_injective() for l in latching.values())
    logger.debug(f"reedy_classify_map: L={is_L} R={is_R}")
    return MapClassification(is_L, is_R, matching, latching)


@dataclass(frozen=True)
class ProjectiveCheck:
    ok: bool
    reason: str = ""
    decomposition: Optional[RetractDecomposition] = None


def projective_L_check(D: FinCategory, m: DiagramMap, max_search: int = MAX_SEARCH) -> ProjectiveCheck:
    """Injective, with a complement closed under the action that splits into retracts of representables."""
    m.validate()
    complement = {}
    for y in D.objects:
        image = set(m.components[y].values())
        if len(image) != len(m.components[y]):
            return ProjectiveCheck(False, f"not injective at {y}")
        complement[y] = tuple(b for b in m.target.sets[y] if b not in image)
    for k in D.morphisms:
        moved = m.target.maps[k.id]
        keep = set(complement[k.tgt])
        for b in complement[k.src]:
            if moved[b] not in keep:
                return ProjectiveCheck(False, f"complement not closed under {k.id} at {b}")
    F = SetDiagram(D, complement, {k.id: {b: m.target.maps[k.id][b] for b in complement[k.src]} for k in D.morphisms})
    decomposition = retract_decomposition(F, max_search)
    if not decomposition.ok:
        return ProjectiveCheck(False, "complement is not a coproduct of retracts of representables", decomposition)
    return ProjectiveCheck(True, "", decomposition)


def _latching_stratum_map(C: DegreedCategory, delta: int, m: DiagramMap) -> DiagramMap:
    """Relative latching maps of the degree-δ objects as one map of stratum diagrams."""
    S = stratum(C, delta)
    A, B = m.source, m.target
    pushouts = {}
    for x in S.objects:
        pushouts[x] = _latching_pushout(C, x, A, B, m.components)
    sets = {x: pushouts[x][0].elements for x in S.objects}
    maps = {}
    for k in S.morphisms:
        P, LB = pushouts[k.src]
        P2, LB2 = pushouts[k.tgt]
        table = {}
        for name, cls in P.members.items():
            tag, v = cls[0]
            if tag == "A":
                table[name] = P2.token[("A", A.maps[k.id][v])]
            else:
                f, b = LB.classes[v][0]
                table[name] = P2.token[("L", LB2.of[(C.compose(k.id, f), b)])]
        maps[k.id] = table
    source = SetDiagram(S, sets, maps)
    comps = {x: dict(relative_latching_map(C, x, m).table) for x in S.objects}
    return DiagramMap(source, B.restrict(S), comps)


def creedy_classify_map(C: DegreedCategory, m: DiagramMap, max_search: int = MAX_SEARCH) -> MapClassification:
    res = check_bistratified(C)
    if not res.ok:
        raise NotBistratified(f"needs a bistratified category: {res.witness}")
    m.validate()
    matching, latching = _relative_maps(C, m, max_search)
    is_R = all(r.is_surjective() for r in matching.values())
    is_L = True
    for delta in C.degrees():
        check = projective_L_check(stratum(C, delta), _latching_stratum_map(C, delta, m), max_search)
        if not check.ok:
            logger.debug(f"creedy_classify_map: degree {delta} fails: {check.reason}")
            is_L = False
            break
    return MapClassification(is_L, is_R, matching, latching)


# -------------------------------------------------------------------
# Inductive factorization
# -------------------------------------------------------------------

def same_map(m1: DiagramMap, m2: DiagramMap) -> bool:
    return all(dict(m1.components[x]) == dict(m2.components[x]) for x in m1.shape.objects)


def reedy_factorize_map(C: DegreedCategory, m: DiagramMap, max_search: int = MAX_SEARCH) -> Tuple[DiagramMap, DiagramMap]:
    """Factor m = r∘ℓ, building the middle diagram one object at a time by increasing degree."""
    _require_discrete(C)
    m.validate()
    A, B = m.source, m.target
    sets: Dict[str, Tuple[str, ...]] = {}
    maps: Dict[str, Dict[str, str]] = {}
    ell: Dict[str, Dict[str, str]] = {}
    r: Dict[str, Dict[str, str]] = {}
    # sets/maps are filled in place; only lower-degree entries are read
    E = SetDiagram(C.base, sets, maps)

    for delta in C.degrees():
        layer = C.objects_of_degree(delta)
        for x in layer:
            P, LE = _latching_pushout(C, x, A, E, ell)
            ME = matching_object(C, x, E, max_search, cross_check=False)
            MB = matching_object(C, x, B, max_search, cross_check=False)

            def family_of(name: str) -> Dict[str, str]:
                tag, v = P.members[name][0]
                if tag == "A":
                    return {f: ell[C.tgt(f)][A.maps[f][v]] for f in ME.index}
                g, e = LE.classes[v][0]
                return {f: maps[C.compose(f, g)][e] for f in ME.index}

            def to_b(name: str) -> str:
                tag, v = P.members[name][0]
                if tag == "A":
                    return m.components[x][v]
                g, e = LE.classes[v][0]
                return B.maps[g][r[C.src(g)][e]]

            pushed = {t: family_token({f: r[C.tgt(f)][fam[f]] for f in ME.index}) for t, fam in ME.families.items()}
            own = {b: family_token({f: B.maps[f][b] for f in MB.index}) for b in B.sets[x]}
            pullback = [(t, b) for t in ME.elements for b in B.sets[x] if pushed[t] == own[b]]
            p_token = {pair: f"({pair[0]}|{pair[1]})" for pair in pullback}
            corner = finite_map(P.elements, p_token.values(),
                                {q: p_token[(family_token(family_of(q)), to_b(q))] for q in P.elements})
            inclusion, _ = base_factorize(corner)
            sets[x] = inclusion.target
            ell[x] = {a: inclusion(P.token[("A", a)]) for a in A.sets[x]}
            r[x] = {f"in0:{q}": to_b(q) for q in P.elements}
            r[x].update({f"in1:{p_token[pair]}": pair[1] for pair in pullback})

            for g in C.base.into(x):
                if C.deg(C.src(g)) < delta:
                    maps[g] = {e: inclusion(P.token[("L", LE.of[(g, e)])]) for e in sets[C.src(g)]}
            for f in ME.index:
                table = {f"in0:{q}": family_of(q)[f] for q in P.elements}
                table.update({f"in1:{p_token[(t, b)]}": ME.families[t][f] for t, b in pullback})
                maps[f] = table
            logger.debug(f"reedy_factorize_map: {x} gets {len(sets[x])} elements")

        for x in layer:
            for h in C.base.out_of(x):
                if C.tgt(h) not in layer:
                    continue
                if C.is_identity(h):
                    maps[h] = {e: e for e in sets[x]}
                    continue
                facs = fundamental_factorizations(C, h)
                if not facs:
                    raise InternalInvariantBroken(f"level morphism {h} is basic but not an identity")
                u, v = facs[0].first, facs[0].second
                maps[h] = {e: maps[v][maps[u][e]] for e in sets[x]}

    E = SetDiagram(C.base, dict(sets), dict(maps)).validate()
    left = DiagramMap(A, E, ell).validate()
    right = DiagramMap(E, B, r).validate()
    if not same_map(left.then(right), m):
        raise InternalInvariantBroken("factorization does not compose back to the map")
    if not reedy_classify_map(C, left, max_search).is_L or not reedy_classify_map(C, right, max_search).is_R:
        raise InternalInvariantBroken("factorization pieces are not in the expected classes")
    logger.info(f"reedy_factorize_map: middle diagram has {E.size()} elements")
    return left, right


# -------------------------------------------------------------------
# Duality check through Set^op
# -------------------------------------------------------------------

def dual_reedy_is_R(C: DegreedCategory, m: DiagramMap) -> bool:
    """For m over opposite(C): is the opposite map R over C for (surjections^op, injections^op)?

    A limit in Set^op is a colimit in Set. For every x this glues B over
    C's morphisms x -> z into lower degree, pushes out along A_x, and
    asks that the induced map into B_x be injective. The walk runs on C
    itself and never builds opposite(C).
    """
    _require_discrete(C)
    A, B = m.source, m.target
    for x in C.objects:
        dx = C.deg(x)
        index = [f for f in C.base.out_of(x) if C.deg(C.tgt(f)) < dx]
        uf = UnionFind()
        for f in index:
            for b in B.sets[C.tgt(f)]:
                uf.add(("L", f, b))
        for a in A.sets[x]:
            uf.add(("A", "", a))
        for f in index:
            z = C.tgt(f)
            for k in C.base.out_of(z):
                if C.deg(C.tgt(k)) >= dx:
                    continue
                for b in B.sets[C.tgt(k)]:
                    uf.union(("L", C.compose(k, f), b), ("L", f, B.maps[k][b]))
            for a in A.sets[z]:
                uf.union(("L", f, m.components[z][a]), ("A", "", A.maps[f][a]))
        image = {}
        for rep, members in uf.classes().items():
            tag, f, v = members[0]
            value = m.components[x][v] if tag == "A" else B.maps[f][v]
            if value in image.values():
                return False
            image[rep] = value
    return True


# -------------------------------------------------------------------
# Lifting
# -------------------------------------------------------------------

@dataclass(frozen=True)
class LiftingProblem:
    """left: A -> B, right: X -> Y, top: A -> X, bottom: B -> Y."""

    left: DiagramMap
    right: DiagramMap
    top: DiagramMap
    bottom: DiagramMap

    def validate(self) -> "LiftingProblem":
        for piece in (self.left, self.right, self.top, self.bottom):
            piece.validate()
        if (self.top.source != self.left.source or self.top.target != self.right.source
                or self.bottom.source != self.left.target or self.bottom.target != self.right.target):
            raise InvalidInput("lifting square has mismatched corners")
        if not same_map(self.top.then(self.right), self.left.then(self.bottom)):
            raise InvalidInput("lifting square does not commute")
        return self


def _fillers(p: LiftingProblem, max_search: int, first_only: bool) -> List[DiagramMap]:
    p.validate()
    C = p.left.shape
    B, X = p.left.target, p.right.source
    variables = []
    for c in C.objects:
        for b in B.sets[c]:
            target = p.bottom.components[c][b]
            variables.append(((c, b), [x for x in X.sets[c] if p.right.components[c][x] == target]))
    constraints: Dict[Hashable, List] = {}
    for k in C.morphisms:
        if C.is_identity(k.id):
            continue
        for b in B.sets[k.src]:
            constraints.setdefault((k.src, b), []).append((X.maps[k.id], (k.tgt, B.maps[k.id][b])))
    forced = {}
    for c in C.objects:
        for a, b in p.left.components[c].items():
            key, value = (c, b), p.top.components[c][a]
            if forced.get(key, value) != value:
                return []
            forced[key] = value
    out = []
    for fam in search_families(variables, constraints, max_search, forced=forced, first_only=first_only, what="lifting search"):
        comps = {c: {} for c in C.objects}
        for (c, b), x in fam.items():
            comps[c][b] = x
        out.append(DiagramMap(B, X, comps))
    return out


def solve_lifting(p: LiftingProblem, max_search: int = MAX_SEARCH) -> Optional[DiagramMap]:
    """First diagonal filler in canonical order, or None."""
    found = _fillers(p, max_search, first_only=True)
    return found[0] if found else None


def all_fillers(p: LiftingProblem, max_search: int = MAX_SEARCH) -> List[DiagramMap]:
    return _fillers(p, max_search, first_only=False)


def as_terminal_diagram_map(f: FiniteMap, obj: str = "*") -> DiagramMap:
    T = terminal_category(obj)
    ident = T.identity[obj]
    src = SetDiagram(T, {obj: f.source}, {ident: {a: a for a in f.source}})
    tgt = SetDiagram(T, {obj: f.target}, {ident: {b: b for b in f.target}})
    return DiagramMap(src, tgt, {obj: dict(f.table)})


def lifting_squares(left: DiagramMap, right: DiagramMap, max_search: int = MAX_SEARCH) -> List[LiftingProblem]:
    """Every commuting square from left to right."""
    out = []
    for top in natural_maps(left.source, right.source, max_search):
        for bottom in natural_maps(left.target, right.target, max_search):
            if same_map(top.then(right), left.then(bottom)):
                out.append(LiftingProblem(left, right, top, bottom))
    return out
