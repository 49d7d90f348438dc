# modules/diagrams.py
import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from modules.config_loader import DEFAULTS
from modules.errors import (
    FactorizationMismatch,
    InternalInvariantBroken,
    InvalidBigluingData,
    InvalidCategory,
    InvalidProfunctor,
    NotACollage,
    NotFunctorial,
    NotNatural,
    SizeGuardExceeded,
)
from modules.factorization import (
    basic_classes,
    boundary_hom,
    factorization_components,
    factorizations_below,
    stratum,
)
from modules.fincat_core import (
    DegreedCategory,
    FinCategory,
    Profunctor,
    full_subcategory,
    hom_profunctor,
    opposite,
    subcategory,
    validate_category,
    validate_profunctor,
    with_degrees,
)
from modules.union_find import UnionFind

logger = logging.getLogger(__name__)

MAX_SEARCH = int(DEFAULTS["MAX_SEARCH"])


# -------------------------------------------------------------------
# Diagrams and maps
# -------------------------------------------------------------------

@dataclass(frozen=True)
class SetDiagram:
    """A functor from a finite category to finite sets of string tokens."""

    shape: FinCategory
    sets: Mapping[str, Tuple[str, ...]]
    maps: Mapping[str, Mapping[str, str]] = field(repr=False)

    def apply(self, f: str, a: str) -> str:
        return self.maps[f][a]

    def size(self) -> int:
        return sum(len(s) for s in self.sets.values())

    def validate(self) -> "SetDiagram":
        C = self.shape
        for x in C.objects:
            if x not in self.sets:
                raise NotFunctorial(f"no set for object {x}")
            if len(set(self.sets[x])) != len(self.sets[x]):
                raise NotFunctorial(f"repeated element in the set at {x}")
        for m in C.morphisms:
            fm = self.maps.get(m.id)
            if fm is None or set(fm) != set(self.sets[m.src]):
                raise NotFunctorial(f"map for {m.id} is not total on {m.src}")
            target = set(self.sets[m.tgt])
            if any(v not in target for v in fm.values()):
                raise NotFunctorial(f"map for {m.id} leaves the set at {m.tgt}")
        for x in C.objects:
            if any(self.maps[C.identity[x]][a] != a for a in self.sets[x]):
                raise NotFunctorial(f"identity of {x} does not act trivially")
        for g, f in C.composable_pairs():
            gf = C.compose(g, f)
            for a in self.sets[C.src(f)]:
                if self.maps[g][self.maps[f][a]] != self.maps[gf][a]:
                    raise NotFunctorial(f"X({g})X({f}) != X({gf}) at {a}")
        return self

    def restrict(self, sub: FinCategory) -> "SetDiagram":
        return SetDiagram(
            sub,
            {x: self.sets[x] for x in sub.objects},
            {f: dict(self.maps[f]) for f in sub.ids},
        )


def make_diagram(shape: FinCategory, sets: Mapping[str, Iterable[str]], maps: Mapping[str, Mapping[str, str]]) -> SetDiagram:
    """Normalise sets to sorted tuples, fill identity maps and validate."""
    sets = {x: tuple(sorted(sets.get(x, ()))) for x in shape.objects}
    full = {}
    for m in shape.morphisms:
        if m.id in maps:
            full[m.id] = dict(maps[m.id])
        elif shape.is_identity(m.id):
            full[m.id] = {a: a for a in sets[m.src]}
        else:
            raise NotFunctorial(f"no map given for {m.id}")
    return SetDiagram(shape, sets, full).validate()


@dataclass(frozen=True)
class DiagramMap:
    source: SetDiagram
    target: SetDiagram
    components: Mapping[str, Mapping[str, str]]

    @property
    def shape(self) -> FinCategory:
        return self.source.shape

    def validate(self) -> "DiagramMap":
        if self.source.shape != self.target.shape:
            raise NotNatural("source and target diagrams have different shapes")
        for x in self.shape.objects:
            comp = self.components.get(x)
            if comp is None or set(comp) != set(self.source.sets[x]):
                raise NotNatural(f"component at {x} is not total")
            if any(v not in set(self.target.sets[x]) for v in comp.values()):
                raise NotNatural(f"component at {x} leaves the target set")
        for m in self.shape.morphisms:
            for a in self.source.sets[m.src]:
                if self.target.maps[m.id][self.components[m.src][a]] != self.components[m.tgt][self.source.maps[m.id][a]]:
                    raise NotNatural(f"naturality square for {m.id} fails at {a}")
        return self

    def then(self, other: "DiagramMap") -> "DiagramMap":
        """other after self."""
        comps = {x: {a: other.components[x][b] for a, b in self.components[x].items()}
                 for x in self.shape.objects}
        return DiagramMap(self.source, other.target, comps)


def identity_map(X: SetDiagram) -> DiagramMap:
    return DiagramMap(X, X, {x: {a: a for a in X.sets[x]} for x in X.shape.objects})


def representable(C: FinCategory, c: str) -> SetDiagram:
    """hom(c, -)."""
    sets = {y: C.hom(c, y) for y in C.objects}
    maps = {m.id: {h: C.compose(m.id, h) for h in sets[m.src]} for m in C.morphisms}
    return SetDiagram(C, sets, maps)


def corepresentable(C: FinCategory, c: str) -> SetDiagram:
    """hom(-, c) as a diagram on opposite(C)."""
    op = opposite(C)
    sets = {y: C.hom(y, c) for y in C.objects}
    # k: y -> y' in C acts hom(y', c) -> hom(y, c)
    maps = {m.id: {h: C.compose(h, m.id) for h in sets[m.tgt]} for m in C.morphisms}
    return SetDiagram(op, sets, maps)


def constant(C: FinCategory, elements: Iterable[str]) -> SetDiagram:
    elements = tuple(sorted(elements))
    return SetDiagram(C, {x: elements for x in C.objects},
                      {m.id: {a: a for a in elements} for m in C.morphisms})


# -------------------------------------------------------------------
# Family search: assignments constrained by value[dst] = map[value[src]]
# -------------------------------------------------------------------

_UNSET = object()


def search_families(
    variables: Sequence[Tuple[Hashable, Sequence[str]]],
    constraints: Mapping[Hashable, Sequence[Tuple[Mapping[str, str], Hashable]]],
    max_search: int = MAX_SEARCH,
    forced: Optional[Mapping[Hashable, str]] = None,
    first_only: bool = False,
    what: str = "family search",
) -> List[Dict[Hashable, str]]:
    """Backtracking over variables in the given order with forward propagation.

    Each constraint (mapping, dst) listed under src forces
    value[dst] = mapping[value[src]] as soon as src is assigned.
    """
    order = [k for k, _ in variables]
    candidates = {k: tuple(c) for k, c in variables}
    allowed = {k: frozenset(c) for k, c in candidates.items()}
    counter = [0]
    results: List[Dict[Hashable, str]] = []

    def propagate(assign: Dict, key, value) -> Optional[Dict]:
        stack = [(key, value)]
        while stack:
            k, v = stack.pop()
            cur = assign.get(k, _UNSET)
            if cur is not _UNSET:
                if cur != v:
                    return None
                continue
            if v not in allowed[k]:
                return None
            assign[k] = v
            for mapping, k2 in constraints.get(k, ()):
                stack.append((k2, mapping[v]))
        return assign

    start: Optional[Dict] = {}
    for k, v in (forced or {}).items():
        start = propagate(start, k, v)
        if start is None:
            return []

    def search(i: int, assign: Dict) -> bool:
        while i < len(order) and order[i] in assign:
            i += 1
        if i == len(order):
            results.append(dict(assign))
            return first_only
        k = order[i]
        for v in candidates[k]:
            counter[0] += 1
            if counter[0] > max_search:
                raise SizeGuardExceeded(max_search, what)
            new = propagate(dict(assign), k, v)
            if new is not None and search(i + 1, new):
                return True
        return False

    search(0, start)
    return results


def family_token(family: Mapping) -> str:
    def part(key) -> str:
        return "/".join(key) if isinstance(key, tuple) else str(key)
    return "{" + ",".join(f"{part(k)}:{family[k]}" for k in sorted(family)) + "}"


def _transformations(W: SetDiagram, X: SetDiagram, max_search: int, **kw) -> List[Dict]:
    C = X.shape
    variables = [((c, w), X.sets[c]) for c in C.objects for w in W.sets[c]]
    constraints: Dict = {}
    for m in C.morphisms:
        if C.is_identity(m.id):
            continue
        for w in W.sets[m.src]:
            constraints.setdefault((m.src, w), []).append((X.maps[m.id], (m.tgt, W.maps[m.id][w])))
    return search_families(variables, constraints, max_search, **kw)


def natural_maps(A: SetDiagram, B: SetDiagram, max_search: int = MAX_SEARCH) -> List[DiagramMap]:
    """Every natural transformation A => B, in canonical order."""
    out = []
    for fam in _transformations(A, B, max_search, what="natural map search"):
        comps = {x: {} for x in A.shape.objects}
        for (c, a), b in fam.items():
            comps[c][a] = b
        out.append(DiagramMap(A, B, comps))
    return sorted(out, key=lambda m: family_token({(c, a): b for c in m.components for a, b in m.components[c].items()}))


# -------------------------------------------------------------------
# Weighted limits and colimits
# -------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedLimit:
    elements: Tuple[str, ...]
    families: Mapping[str, Mapping[Tuple[str, str], str]]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class WeightedColimit:
    elements: Tuple[str, ...]
    classes: Mapping[str, Tuple[Tuple[str, str, str], ...]]
    of: Mapping[Tuple[str, str, str], str]

    def __len__(self) -> int:
        return len(self.elements)


def weighted_limit(W: SetDiagram, X: SetDiagram, max_search: int = MAX_SEARCH) -> WeightedLimit:
    if W.shape != X.shape:
        raise NotFunctorial("weight and diagram have different shapes")
    families = {}
    for fam in _transformations(W, X, max_search, what="weighted limit"):
        families[family_token(fam)] = fam
    return WeightedLimit(tuple(sorted(families)), families)


def weighted_colimit(U: SetDiagram, X: SetDiagram) -> WeightedColimit:
    """Coend of U (on the opposite shape) against X, quotiented by union-find."""
    C = X.shape
    if U.shape != opposite(C):
        raise NotFunctorial("weight must live on the opposite of the diagram's shape")
    uf = UnionFind()
    for c in C.objects:
        for u in U.sets[c]:
            for a in X.sets[c]:
                uf.add((c, u, a))
    for m in C.morphisms:
        # (u.k, a) ~ (u, k.a) for k: c -> c', u in U(c'), a in X(c)
        for u in U.sets[m.tgt]:
            for a in X.sets[m.src]:
                uf.union((m.src, U.maps[m.id][u], a), (m.tgt, u, X.maps[m.id][a]))
    classes = {}
    of = {}
    for rep, members in uf.classes().items():
        token = "[" + "|".join(rep) + "]"
        classes[token] = tuple(members)
        for e in members:
            of[e] = token
    return WeightedColimit(tuple(sorted(classes)), classes, of)


# -------------------------------------------------------------------
# Boundary weights, matching and latching
# -------------------------------------------------------------------

def _pair_token(pair: Tuple[str, str]) -> str:
    return f"<{pair[0]}|{pair[1]}>"


def boundary_weight(C: DegreedCategory, x: str, bound: int) -> Tuple[SetDiagram, Dict[str, Dict[Tuple[str, str], str]]]:
    """∂(x, -) on C, with a lookup from composable pairs to class tokens."""
    lookup: Dict[str, Dict[Tuple[str, str], str]] = {}
    sets = {}
    for y in C.objects:
        B = boundary_hom(C, x, y, bound)
        lookup[y] = {p: _pair_token(cls[0]) for cls in B.classes for p in cls}
        sets[y] = tuple(sorted(_pair_token(cls[0]) for cls in B.classes))
    maps = {}
    for m in C.morphisms:
        table = {}
        for (p, q), token in lookup[m.src].items():
            table[token] = lookup[m.tgt][(p, C.compose(m.id, q))]
        maps[m.id] = table
    return SetDiagram(C.base, sets, maps), lookup


def boundary_coweight(C: DegreedCategory, x: str, bound: int) -> Tuple[SetDiagram, Dict[str, Dict[Tuple[str, str], str]]]:
    """∂(-, x) as a diagram on opposite(C)."""
    lookup: Dict[str, Dict[Tuple[str, str], str]] = {}
    sets = {}
    for y in C.objects:
        B = boundary_hom(C, y, x, bound)
        lookup[y] = {p: _pair_token(cls[0]) for cls in B.classes for p in cls}
        sets[y] = tuple(sorted(_pair_token(cls[0]) for cls in B.classes))
    maps = {}
    for m in C.morphisms:
        # k: y -> y' acts ∂(y', x) -> ∂(y, x) by precomposition
        table = {}
        for (p, q), token in lookup[m.tgt].items():
            table[token] = lookup[m.src][(C.compose(p, m.id), q)]
        maps[m.id] = table
    return SetDiagram(opposite(C.base), sets, maps), lookup


def matching_index(C: DegreedCategory, x: str) -> Tuple[str, ...]:
    return tuple(f for f in C.base.out_of(x) if C.deg(C.tgt(f)) < C.deg(x))


def latching_index(C: DegreedCategory, x: str) -> Tuple[str, ...]:
    return tuple(f for f in C.base.into(x) if C.deg(C.src(f)) < C.deg(x))


@dataclass(frozen=True)
class MatchingObject:
    obj: str
    index: Tuple[str, ...]
    elements: Tuple[str, ...]
    families: Mapping[str, Mapping[str, str]]

    def project(self, token: str, f: str) -> str:
        return self.families[token][f]

    def token_for(self, family: Mapping[str, str]) -> str:
        return family_token(family)

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class LatchingObject:
    obj: str
    index: Tuple[str, ...]
    elements: Tuple[str, ...]
    classes: Mapping[str, Tuple[Tuple[str, str], ...]]
    of: Mapping[Tuple[str, str], str]

    def inject(self, f: str, b: str) -> str:
        return self.of[(f, b)]

    def __len__(self) -> int:
        return len(self.elements)


def _conical_matching(C: DegreedCategory, x: str, X: SetDiagram, max_search: int) -> List[Dict[str, str]]:
    index = matching_index(C, x)
    dx = C.deg(x)
    variables = [(f, X.sets[C.tgt(f)]) for f in index]
    constraints: Dict = {}
    for f in index:
        for k in C.base.out_of(C.tgt(f)):
            if C.is_identity(k) or C.deg(C.tgt(k)) >= dx:
                continue
            constraints.setdefault(f, []).append((X.maps[k], C.compose(k, f)))
    return search_families(variables, constraints, max_search, what=f"matching object at {x}")


def matching_object(C: DegreedCategory, x: str, X: SetDiagram, max_search: int = MAX_SEARCH, cross_check: bool = True) -> MatchingObject:
    C.base.check_object(x)
    families = {family_token(fam): fam for fam in _conical_matching(C, x, X, max_search)}
    if cross_check:
        weight, lookup = boundary_weight(C, x, C.deg(x))
        weighted = weighted_limit(weight, X, max_search)
        normalised = set()
        for fam in weighted.families.values():
            normalised.add(family_token({f: fam[(C.tgt(f), lookup[C.tgt(f)][(f, C.identity[C.tgt(f)])])]
                                         for f in matching_index(C, x)}))
        if normalised != set(families):
            raise InternalInvariantBroken(f"conical and weighted matching objects disagree at {x}")
    return MatchingObject(x, matching_index(C, x), tuple(sorted(families)), families)


def latching_object(C: DegreedCategory, x: str, X: SetDiagram, cross_check: bool = True) -> LatchingObject:
    C.base.check_object(x)
    index = latching_index(C, x)
    dx = C.deg(x)
    uf = UnionFind()
    for f in index:
        for b in X.sets[C.src(f)]:
            uf.add((f, b))
    for f2 in index:
        z2 = C.src(f2)
        for k in C.base.into(z2):
            if C.deg(C.src(k)) >= dx:
                continue
            for b in X.sets[C.src(k)]:
                uf.union((C.compose(f2, k), b), (f2, X.maps[k][b]))
    classes = {}
    of = {}
    for rep, members in uf.classes().items():
        token = "[" + "|".join(rep) + "]"
        classes[token] = tuple(members)
        for e in members:
            of[e] = token
    L = LatchingObject(x, index, tuple(sorted(classes)), classes, of)
    if cross_check:
        _check_latching(C, x, X, L)
    return L


def _check_latching(C: DegreedCategory, x: str, X: SetDiagram, L: LatchingObject) -> None:
    if matching_index(opposite(C), x) != L.index:
        raise InternalInvariantBroken(f"latching index at {x} is not the matching index of the opposite")
    weight, lookup = boundary_coweight(C, x, C.deg(x))
    pairs = {y: {} for y in lookup}
    for y, table in lookup.items():
        for pair, tok in table.items():
            pairs[y].setdefault(tok, pair)
    coend = weighted_colimit(weight, X)
    image = {}
    for token, members in coend.classes.items():
        values = set()
        for (y, tok, a) in members:
            p, q = pairs[y][tok]
            values.add(L.of[(q, X.maps[p][a])])
        if len(values) != 1:
            raise InternalInvariantBroken(f"weighted latching class {token} splits at {x}")
        image[token] = values.pop()
    if sorted(set(image.values())) != list(L.elements) or len(image) != len(L.elements):
        raise InternalInvariantBroken(f"conical and weighted latching objects disagree at {x}")


def matching_stratum(C: DegreedCategory, degree: int, X: SetDiagram, max_search: int = MAX_SEARCH) -> Tuple[SetDiagram, Dict[str, MatchingObject]]:
    """Matching sets of the degree-δ objects as a diagram on the stratum."""
    S = stratum(C, degree)
    objs = {x: matching_object(C, x, X, max_search, cross_check=False) for x in S.objects}
    maps = {}
    for m in S.morphisms:
        target = objs[m.tgt]
        table = {}
        for token, fam in objs[m.src].families.items():
            table[token] = family_token({f: fam[C.compose(f, m.id)] for f in target.index})
        maps[m.id] = table
    return SetDiagram(S, {x: objs[x].elements for x in S.objects}, maps), objs


def latching_stratum(C: DegreedCategory, degree: int, X: SetDiagram) -> Tuple[SetDiagram, Dict[str, LatchingObject]]:
    S = stratum(C, degree)
    objs = {x: latching_object(C, x, X, cross_check=False) for x in S.objects}
    maps = {}
    for m in S.morphisms:
        table = {}
        for token, members in objs[m.src].classes.items():
            f, b = members[0]
            table[token] = objs[m.tgt].of[(C.compose(m.id, f), b)]
        maps[m.id] = table
    return SetDiagram(S, {x: objs[x].elements for x in S.objects}, maps), objs


def graph_limit(C: DegreedCategory, x: str, X: SetDiagram, max_search: int = MAX_SEARCH) -> WeightedLimit:
    """Limit of X over the graph of nonidentity down morphisms out of x."""
    down = basic_classes(C).down
    vertices = [f for f in C.base.out_of(x) if f in down and not C.is_identity(f)]
    vset = set(vertices)
    constraints: Dict = {}
    for f in vertices:
        for k in C.base.out_of(C.tgt(f)):
            if k in down and not C.is_identity(k) and C.compose(k, f) in vset:
                constraints.setdefault(f, []).append((X.maps[k], C.compose(k, f)))
    variables = [(f, X.sets[C.tgt(f)]) for f in vertices]
    families = {family_token(fam): fam for fam in search_families(variables, constraints, max_search, what=f"graph limit at {x}")}
    return WeightedLimit(tuple(sorted(families)), families)


# -------------------------------------------------------------------
# Abstract bigluing data and collages
# -------------------------------------------------------------------

@dataclass(frozen=True)
class AbstractBigluingData:
    """U: D ⇸ C with U(c, d); W: C ⇸ D with W(d, c); alpha(w, u): c -> c'."""

    C: DegreedCategory
    D: FinCategory
    U: Profunctor
    W: Profunctor
    alpha: Mapping[Tuple[str, str], str] = field(repr=False)


def validate_bigluing(abd: AbstractBigluingData) -> AbstractBigluingData:
    C, D, U, W = abd.C.base, abd.D, abd.U, abd.W
    if set(C.objects) & set(D.objects):
        raise InvalidBigluingData("C and D share object identifiers")
    if U.source != D or U.target != C or W.source != C or W.target != D:
        raise InvalidBigluingData("profunctors are not between C and D")
    try:
        validate_profunctor(U)
        validate_profunctor(W)
    except InvalidProfunctor as e:
        raise InvalidBigluingData(str(e)) from e
    for (d, c2), ws in W.elements.items():
        for w in ws:
            for c in C.objects:
                for u in U.at(c, d):
                    k = abd.alpha.get((w, u))
                    if k is None or k not in C.hom(c, c2):
                        raise InvalidBigluingData(f"alpha({w}, {u}) missing or not a morphism {c} -> {c2}")
    for (w, u), k in abd.alpha.items():
        c, d = U.locate(u)
        _, c2 = W.locate(w)
        for k2 in C.out_of(c2):
            if abd.alpha[(W.act_left(k2, w), u)] != C.compose(k2, k):
                raise InvalidBigluingData(f"alpha not natural in the codomain at ({k2}, {w}, {u})")
        for m in C.into(c):
            if abd.alpha[(w, U.act_right(u, m))] != C.compose(k, m):
                raise InvalidBigluingData(f"alpha not natural in the domain at ({w}, {u}, {m})")
    for l in D.morphisms:
        for c2 in C.objects:
            for w in W.at(l.tgt, c2):
                for c in C.objects:
                    for u in U.at(c, l.src):
                        if abd.alpha[(W.act_right(w, l.id), u)] != abd.alpha[(w, U.act_left(l.id, u))]:
                            raise InvalidBigluingData(f"alpha not balanced over {l.id} at ({w}, {u})")
    return abd


def _tensor_classes(abd: AbstractBigluingData) -> Tuple[Dict[Tuple[str, str], str], Dict[str, Tuple[Tuple[str, str], ...]]]:
    """Classes of pairs (u, w) representing u∘w : d -> d', glued along C."""
    C, U, W = abd.C.base, abd.U, abd.W
    uf = UnionFind()
    for (c, d2), us in U.elements.items():
        for u in us:
            for d in abd.D.objects:
                for w in W.at(d, c):
                    uf.add((u, w))
    for m in C.morphisms:
        # (u.k, w) ~ (u, k.w) for k: c -> c2, u in U(c2, d'), w in W(d, c)
        for d2 in abd.D.objects:
            for u in U.at(m.tgt, d2):
                for d in abd.D.objects:
                    for w in W.at(d, m.src):
                        uf.union((U.act_right(u, m.id), w), (u, W.act_left(m.id, w)))
    of = {}
    classes = {}
    for rep, members in uf.classes().items():
        token = f"{rep[0]}*{rep[1]}"
        classes[token] = tuple(members)
        for p in members:
            of[p] = token
    return of, classes


def collage(abd: AbstractBigluingData) -> DegreedCategory:
    validate_bigluing(abd)
    C, D, U, W, alpha = abd.C.base, abd.D, abd.U, abd.W, abd.alpha
    tensor_of, tensor_classes = _tensor_classes(abd)

    ends: Dict[str, Tuple[str, str]] = {}
    kind: Dict[str, str] = {}
    for m in C.morphisms:
        ends[m.id], kind[m.id] = (m.src, m.tgt), "C"
    for m in D.morphisms:
        ends[m.id], kind[m.id] = (m.src, m.tgt), "D"
    for (c, d), us in U.elements.items():
        for u in us:
            ends[u], kind[u] = (c, d), "U"
    for (d, c), ws in W.elements.items():
        for w in ws:
            ends[w], kind[w] = (d, c), "W"
    for token, members in tensor_classes.items():
        u, w = members[0]
        ends[token], kind[token] = (W.locate(w)[0], U.locate(u)[1]), "T"
    n_ids = len(C.morphisms) + len(D.morphisms) + len(U.all_elements()) + len(W.all_elements()) + len(tensor_classes)
    if len(ends) != n_ids:
        raise InvalidBigluingData("morphism, element and tensor identifiers collide")

    def tensor(u: str, w: str) -> str:
        return tensor_of[(u, w)]

    def comp(b: str, a: str, rep_a=None, rep_b=None) -> str:
        ka, kb = kind[a], kind[b]
        if ka == "T":
            u, w = rep_a or tensor_classes[a][0]
        if kb == "T":
            u2, w2 = rep_b or tensor_classes[b][0]
        if ka == "C" and kb == "C":
            return C.compose(b, a)
        if ka == "C" and kb == "U":
            return U.act_right(b, a)
        if ka == "W" and kb == "C":
            return W.act_left(b, a)
        if ka == "W" and kb == "U":
            return tensor(b, a)
        if ka == "U" and kb == "W":
            return alpha[(b, a)]
        if ka == "U" and kb == "D":
            return U.act_left(b, a)
        if ka == "U" and kb == "T":
            return U.act_right(u2, alpha[(w2, a)])
        if ka == "D" and kb == "W":
            return W.act_right(b, a)
        if ka == "D" and kb == "D":
            return D.compose(b, a)
        if ka == "D" and kb == "T":
            return tensor(u2, W.act_right(w2, a))
        if ka == "T" and kb == "W":
            return W.act_left(alpha[(b, u)], w)
        if ka == "T" and kb == "D":
            return tensor(U.act_left(b, u), w)
        if ka == "T" and kb == "T":
            return tensor(u2, W.act_left(alpha[(w2, u)], w))
        raise InternalInvariantBroken(f"no composition rule for {kb} after {ka}")

    table = []
    for a, (sa, ta) in ends.items():
        for b, (sb, tb) in ends.items():
            if sb != ta:
                continue
            result = comp(b, a)
            # tensor composites must not depend on the chosen representative
            reps_a = tensor_classes[a] if kind[a] == "T" else [None]
            reps_b = tensor_classes[b] if kind[b] == "T" else [None]
            for ra in reps_a:
                for rb in reps_b:
                    if comp(b, a, ra, rb) != result:
                        raise InvalidBigluingData(f"composite {b} after {a} depends on representatives")
            table.append([b, a, result])

    objects = list(C.objects) + list(D.objects)
    identities = {x: C.identity[x] for x in C.objects}
    identities.update({x: D.identity[x] for x in D.objects})
    presentation = {
        "objects": objects,
        "morphisms": [{"id": f, "src": s, "tgt": t} for f, (s, t) in ends.items()],
        "identities": identities,
        "composition": table,
    }
    try:
        base = validate_category(presentation)
    except InvalidCategory as e:
        raise InvalidBigluingData(f"collage is not a category: {e}") from e
    top = 1 + max(abd.C.degree.values()) if C.objects else 0
    degree = dict(abd.C.degree)
    degree.update({d: top for d in D.objects})
    logger.debug(f"collage built: {len(objects)} objects, {len(ends)} morphisms, {len(tensor_classes)} tensor classes")
    return with_degrees(base, degree)


def recognize_collage(E: DegreedCategory, split_degree: int) -> AbstractBigluingData:
    """Split E into C (degree < split_degree) and D (the rest) glued along profunctors."""
    C = full_subcategory(E, split_degree)
    d_objects = [x for x in E.objects if E.deg(x) >= split_degree]
    d_set = set(d_objects)
    between = [m.id for m in E.morphisms if m.src in d_set and m.tgt in d_set]
    candidates = {f for f in between if not factorizations_below(E, f, split_degree)}

    for d in d_objects:
        if E.identity[d] not in candidates:
            raise NotACollage(f"identity of {d} factors through C", (E.identity[d],))
    for f in sorted(candidates):
        for g in E.base.out_of(E.tgt(f)):
            if g in candidates and E.compose(g, f) not in candidates:
                raise NotACollage(f"{g} after {f} factors through C", (f, g))
    for f in between:
        if f in candidates:
            continue
        comps = factorization_components(E, f, split_degree)
        pair = comps.disconnected_pair()
        if pair is not None:
            p, q = pair
            raise NotACollage(f"factorizations of {f} through C are not connected",
                              (f, p.first, p.second, q.first, q.second))

    D = subcategory(E.base, candidates, d_objects)
    U = hom_profunctor(E.base, source=D, target=C.base)
    W = hom_profunctor(E.base, source=C.base, target=D)
    alpha = {}
    for (d, c2), ws in W.elements.items():
        for w in ws:
            for c in C.objects:
                for u in U.at(c, d):
                    alpha[(w, u)] = E.compose(w, u)
    return AbstractBigluingData(C, D, U, W, alpha)


def collage_comparison(abd: AbstractBigluingData, E: DegreedCategory) -> Dict[str, str]:
    """Identity-on-objects comparison collage(abd) -> E for data recognised from E.

    Raises NotACollage when the comparison is not an isomorphism.
    """
    coll = collage(abd)
    _, tensor_classes = _tensor_classes(abd)
    comparison = {}
    for f in coll.ids:
        if f in tensor_classes:
            u, w = tensor_classes[f][0]
            comparison[f] = E.compose(u, w)
        else:
            comparison[f] = f
    if set(coll.objects) != set(E.objects):
        raise NotACollage("collage and category have different objects")
    if sorted(comparison.values()) != sorted(E.ids):
        raise NotACollage("comparison is not bijective on morphisms")
    for f, g in coll.base.composable_pairs():
        if comparison[coll.compose(f, g)] != E.compose(comparison[f], comparison[g]):
            raise NotACollage(f"comparison does not preserve {f} after {g}", (g, f))
    return comparison


# -------------------------------------------------------------------
# Bigluing split / merge
# -------------------------------------------------------------------

def u_column(abd: AbstractBigluingData, d: str) -> SetDiagram:
    """U(-, d) on opposite(C)."""
    C = abd.C.base
    sets = {c: tuple(sorted(abd.U.at(c, d))) for c in C.objects}
    maps = {m.id: {u: abd.U.act_right(u, m.id) for u in sets[m.tgt]} for m in C.morphisms}
    return SetDiagram(opposite(C), sets, maps)


def w_row(abd: AbstractBigluingData, d: str) -> SetDiagram:
    """W(d, -) on C."""
    C = abd.C.base
    sets = {c: tuple(sorted(abd.W.at(d, c))) for c in C.objects}
    maps = {m.id: {w: abd.W.act_left(m.id, w) for w in sets[m.src]} for m in C.morphisms}
    return SetDiagram(C, sets, maps)


@dataclass(frozen=True)
class BigluedDiagram:
    M: SetDiagram
    N: SetDiagram
    phi: Mapping[str, Mapping[str, str]]
    gamma: Mapping[str, Mapping[str, str]]
    colimits: Mapping[str, WeightedColimit] = field(repr=False)
    limits: Mapping[str, WeightedLimit] = field(repr=False)


def _alpha_bar(abd: AbstractBigluingData, M: SetDiagram, d: str, colim: WeightedColimit) -> Dict[str, str]:
    C = abd.C.base
    out = {}
    for token, members in colim.classes.items():
        c, u, a = members[0]
        fam = {}
        for c2 in C.objects:
            for w in abd.W.at(d, c2):
                fam[(c2, w)] = M.maps[abd.alpha[(w, u)]][a]
        out[token] = family_token(fam)
    return out


def biglue_split(abd: AbstractBigluingData, X: SetDiagram, max_search: int = MAX_SEARCH) -> BigluedDiagram:
    coll = collage(abd)
    if X.shape != coll.base:
        raise NotFunctorial("diagram does not live on the collage")
    X.validate()
    M = X.restrict(abd.C.base)
    N = X.restrict(abd.D)
    phi, gamma, colimits, limits = {}, {}, {}, {}
    for d in abd.D.objects:
        colim = weighted_colimit(u_column(abd, d), M)
        lim = weighted_limit(w_row(abd, d), M, max_search)
        phi[d] = {token: X.maps[members[0][1]][members[0][2]] for token, members in colim.classes.items()}
        gamma[d] = {}
        for n in N.sets[d]:
            fam = {(c, w): X.maps[w][n] for c in abd.C.objects for w in abd.W.at(d, c)}
            gamma[d][n] = family_token(fam)
        expected = _alpha_bar(abd, M, d, colim)
        if any(gamma[d][phi[d][t]] != expected[t] for t in colim.elements):
            raise InternalInvariantBroken(f"gamma after phi is not the canonical map at {d}")
        colimits[d], limits[d] = colim, lim
    return BigluedDiagram(M, N, phi, gamma, colimits, limits)


def biglue_merge(abd: AbstractBigluingData, glued: BigluedDiagram) -> SetDiagram:
    coll = collage(abd)
    M, N = glued.M, glued.N
    for d in abd.D.objects:
        colim = glued.colimits[d]
        expected = _alpha_bar(abd, M, d, colim)
        for t in colim.elements:
            if glued.gamma[d][glued.phi[d][t]] != expected[t]:
                raise FactorizationMismatch(f"gamma after phi differs from the canonical map at {d} on {t}")

    sets = {x: M.sets[x] for x in abd.C.objects}
    sets.update({x: N.sets[x] for x in abd.D.objects})
    maps: Dict[str, Dict[str, str]] = {}
    for f in abd.C.ids:
        maps[f] = dict(M.maps[f])
    for f in abd.D.ids:
        maps[f] = dict(N.maps[f])
    for (c, d), us in abd.U.elements.items():
        for u in us:
            maps[u] = {a: glued.phi[d][glued.colimits[d].of[(c, u, a)]] for a in M.sets[c]}
    for (d, c), ws in abd.W.elements.items():
        for w in ws:
            fams = glued.limits[d].families
            maps[w] = {n: fams[glued.gamma[d][n]][(c, w)] for n in N.sets[d]}
    _, tensor_classes = _tensor_classes(abd)
    for token, members in tensor_classes.items():
        u, w = members[0]
        d = abd.W.locate(w)[0]
        maps[token] = {n: maps[u][maps[w][n]] for n in N.sets[d]}
    return SetDiagram(coll.base, sets, maps).validate()
