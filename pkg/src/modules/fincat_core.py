# modules/fincat_core.py
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from modules.errors import (
    InvalidCategory,
    InvalidInput,
    InvalidProfunctor,
    UnknownMorphism,
    UnknownObject,
    Violation,
    ViolationKind,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Morphism:
    src: str
    tgt: str
    id: str


# -------------------------------------------------------------------
# FinCategory
# -------------------------------------------------------------------

@dataclass(frozen=True)
class FinCategory:
    """A finite category stored as an explicit composition table.

    Build instances through validate_category or make_category; the
    constructor itself trusts its arguments.
    """

    objects: Tuple[str, ...]
    morphisms: Tuple[Morphism, ...]
    identity: Mapping[str, str]
    composition: Mapping[Tuple[str, str], str] = field(repr=False)

    @cached_property
    def _by_id(self) -> Dict[str, Morphism]:
        return {m.id: m for m in self.morphisms}

    @cached_property
    def _hom(self) -> Dict[Tuple[str, str], Tuple[str, ...]]:
        out: Dict[Tuple[str, str], List[str]] = {}
        for m in self.morphisms:
            out.setdefault((m.src, m.tgt), []).append(m.id)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _identities(self) -> FrozenSet[str]:
        return frozenset(self.identity.values())

    @cached_property
    def _inverses(self) -> Dict[str, str]:
        inv = {}
        for m in self.morphisms:
            for g in self.hom(m.tgt, m.src):
                if (self.composition[(g, m.id)] == self.identity[m.src]
                        and self.composition[(m.id, g)] == self.identity[m.tgt]):
                    inv[m.id] = g
                    break
        return inv

    # ---- access ----
    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(m.id for m in self.morphisms)

    def has(self, f: str) -> bool:
        return f in self._by_id

    def morphism(self, f: str) -> Morphism:
        try:
            return self._by_id[f]
        except KeyError:
            raise UnknownMorphism(f"unknown morphism {f!r}") from None

    def check_object(self, x: str) -> str:
        if x not in self.identity:
            raise UnknownObject(f"unknown object {x!r}")
        return x

    def src(self, f: str) -> str:
        return self.morphism(f).src

    def tgt(self, f: str) -> str:
        return self.morphism(f).tgt

    def hom(self, x: str, y: str) -> Tuple[str, ...]:
        return self._hom.get((x, y), ())

    def out_of(self, x: str) -> Tuple[str, ...]:
        return tuple(m.id for m in self.morphisms if m.src == x)

    def into(self, y: str) -> Tuple[str, ...]:
        return tuple(m.id for m in self.morphisms if m.tgt == y)

    def compose(self, g: str, f: str) -> str:
        """g after f."""
        try:
            return self.composition[(g, f)]
        except KeyError:
            self.morphism(g)
            self.morphism(f)
            raise ValueError(f"{g} and {f} are not composable") from None

    def compose_path(self, *fs: str) -> str:
        """Compose right to left: compose_path(h, g, f) = h∘g∘f."""
        out = fs[-1]
        for g in reversed(fs[:-1]):
            out = self.compose(g, out)
        return out

    def composable_pairs(self) -> Iterator[Tuple[str, str]]:
        for f in self.morphisms:
            for g in self.out_of(f.tgt):
                yield g, f.id

    def is_identity(self, f: str) -> bool:
        return f in self._identities

    def inverse(self, f: str) -> Optional[str]:
        self.morphism(f)
        return self._inverses.get(f)

    def is_iso(self, f: str) -> bool:
        return self.inverse(f) is not None

    def isos(self) -> FrozenSet[str]:
        return frozenset(self._inverses)

    def automorphisms(self, x: str) -> Tuple[str, ...]:
        return tuple(f for f in self.hom(x, x) if f in self._inverses)


# -------------------------------------------------------------------
# DegreedCategory
# -------------------------------------------------------------------

@dataclass(frozen=True)
class DegreedCategory:
    base: FinCategory
    degree: Mapping[str, int]
    # derived data (basic morphisms, classes) computed once per instance
    memo: Dict[str, object] = field(default_factory=dict, compare=False, repr=False)

    @property
    def objects(self) -> Tuple[str, ...]:
        return self.base.objects

    @property
    def morphisms(self) -> Tuple[Morphism, ...]:
        return self.base.morphisms

    @property
    def ids(self) -> Tuple[str, ...]:
        return self.base.ids

    @property
    def identity(self) -> Mapping[str, str]:
        return self.base.identity

    def deg(self, x: str) -> int:
        return self.degree[x]

    def degrees(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.degree.values())))

    def src(self, f: str) -> str:
        return self.base.src(f)

    def tgt(self, f: str) -> str:
        return self.base.tgt(f)

    def hom(self, x: str, y: str) -> Tuple[str, ...]:
        return self.base.hom(x, y)

    def compose(self, g: str, f: str) -> str:
        return self.base.compose(g, f)

    def is_identity(self, f: str) -> bool:
        return self.base.is_identity(f)

    def is_level(self, f: str) -> bool:
        m = self.base.morphism(f)
        return self.degree[m.src] == self.degree[m.tgt]

    def objects_of_degree(self, d: int) -> Tuple[str, ...]:
        return tuple(x for x in self.objects if self.degree[x] == d)

    def objects_below(self, d: int) -> Tuple[str, ...]:
        return tuple(x for x in self.objects if self.degree[x] < d)


def with_degrees(base: FinCategory, degree: Mapping[str, int]) -> DegreedCategory:
    violations = []
    for x in base.objects:
        d = degree.get(x)
        if d is None:
            violations.append(Violation(ViolationKind.BAD_DEGREE, "object has no degree", (x,)))
        elif isinstance(d, bool) or not isinstance(d, int) or d < 0:
            violations.append(Violation(ViolationKind.BAD_DEGREE, f"degree {d!r} is not a natural number", (x,)))
    for x in degree:
        if x not in base.identity:
            violations.append(Violation(ViolationKind.DANGLING_REFERENCE, "degree for unknown object", (x,)))
    if violations:
        raise InvalidCategory(violations)
    return DegreedCategory(base, {x: int(degree[x]) for x in base.objects})


# -------------------------------------------------------------------
# Validation
# -------------------------------------------------------------------

def _as_list(presentation: Mapping, key: str) -> list:
    value = presentation.get(key, [])
    if not isinstance(value, list):
        raise InvalidInput(f"field {key!r} must be an array")
    return value


def validate_category(presentation: Mapping) -> FinCategory:
    """Check a raw category description and return the FinCategory.

    Every violation found is collected; the law checks only run once the
    table is structurally sound.
    """
    if not isinstance(presentation, Mapping):
        raise InvalidInput("category presentation must be an object")
    raw_objects = _as_list(presentation, "objects")
    raw_morphisms = _as_list(presentation, "morphisms")
    raw_identities = presentation.get("identities", {})
    raw_composition = _as_list(presentation, "composition")
    if not isinstance(raw_identities, Mapping):
        raise InvalidInput("field 'identities' must be an object")

    violations: List[Violation] = []
    objects: List[str] = []
    for o in raw_objects:
        oid = o.get("id") if isinstance(o, Mapping) else o
        if not isinstance(oid, str):
            raise InvalidInput(f"object identifier {oid!r} is not a string")
        if oid in objects:
            violations.append(Violation(ViolationKind.DUPLICATE_IDENTIFIER, "object declared twice", (oid,)))
            continue
        objects.append(oid)
    object_set = set(objects)

    by_id: Dict[str, Morphism] = {}
    for m in raw_morphisms:
        if not isinstance(m, Mapping) or not all(isinstance(m.get(k), str) for k in ("id", "src", "tgt")):
            raise InvalidInput(f"morphism record {m!r} needs string id, src and tgt")
        if m["id"] in by_id:
            violations.append(Violation(ViolationKind.DUPLICATE_IDENTIFIER, "morphism declared twice", (m["id"],)))
            continue
        for end in ("src", "tgt"):
            if m[end] not in object_set:
                violations.append(Violation(ViolationKind.DANGLING_REFERENCE, f"{end} is not an object", (m["id"], m[end])))
        by_id[m["id"]] = Morphism(m["src"], m["tgt"], m["id"])

    identity: Dict[str, str] = {}
    for x in objects:
        i = raw_identities.get(x)
        if i is None:
            violations.append(Violation(ViolationKind.MISSING_IDENTITY, "object has no identity", (x,)))
        elif not isinstance(i, str) or i not in by_id:
            violations.append(Violation(ViolationKind.DANGLING_REFERENCE, "identity is not a morphism", (x, str(i))))
        elif by_id[i].src != x or by_id[i].tgt != x:
            violations.append(Violation(ViolationKind.MISSING_IDENTITY, "identity is not an endomorphism of its object", (x, i)))
        else:
            identity[x] = i
    for x in raw_identities:
        if x not in object_set:
            violations.append(Violation(ViolationKind.DANGLING_REFERENCE, "identity for unknown object", (str(x),)))

    composition: Dict[Tuple[str, str], str] = {}
    for triple in raw_composition:
        if not (isinstance(triple, (list, tuple)) and len(triple) == 3 and all(isinstance(t, str) for t in triple)):
            raise InvalidInput(f"composition entry {triple!r} must be [g, f, composite]")
        g, f, h = triple
        missing = [t for t in (g, f, h) if t not in by_id]
        if missing:
            violations.append(Violation(ViolationKind.DANGLING_REFERENCE, "composition mentions unknown morphism", tuple(missing)))
            continue
        if by_id[f].tgt != by_id[g].src:
            violations.append(Violation(ViolationKind.NON_TOTAL_COMPOSITION, "composite given for a non-composable pair", (g, f)))
            continue
        if by_id[h].src != by_id[f].src or by_id[h].tgt != by_id[g].tgt:
            violations.append(Violation(ViolationKind.NON_TOTAL_COMPOSITION, "composite has the wrong endpoints", (g, f, h)))
            continue
        if (g, f) in composition and composition[(g, f)] != h:
            violations.append(Violation(ViolationKind.NON_TOTAL_COMPOSITION, "pair composed two different ways", (g, f)))
            continue
        composition[(g, f)] = h

    for f in by_id.values():
        for g in by_id.values():
            if g.src == f.tgt and (g.id, f.id) not in composition:
                violations.append(Violation(ViolationKind.NON_TOTAL_COMPOSITION, "composable pair has no composite", (g.id, f.id)))

    if violations:
        raise InvalidCategory(violations)

    morphisms = tuple(sorted(by_id.values()))
    cat = FinCategory(tuple(sorted(objects)), morphisms, identity, composition)

    for f in morphisms:
        left = composition[(identity[f.tgt], f.id)]
        if left != f.id:
            violations.append(Violation(ViolationKind.UNIT_LAW, "left unit fails", (identity[f.tgt], f.id, left)))
        right = composition[(f.id, identity[f.src])]
        if right != f.id:
            violations.append(Violation(ViolationKind.UNIT_LAW, "right unit fails", (f.id, identity[f.src], right)))
    for f in morphisms:
        for g in cat.out_of(f.tgt):
            gf = composition[(g, f.id)]
            for h in cat.out_of(by_id[g].tgt):
                if composition[(h, gf)] != composition[(composition[(h, g)], f.id)]:
                    violations.append(Violation(ViolationKind.ASSOCIATIVITY, "h(gf) != (hg)f", (h, g, f.id)))
    if violations:
        raise InvalidCategory(violations)
    return cat


def validate_degreed(presentation: Mapping) -> DegreedCategory:
    base = validate_category(presentation)
    degree = {}
    for o in presentation.get("objects", []):
        if isinstance(o, Mapping):
            degree[o.get("id")] = o.get("degree")
    return with_degrees(base, degree)


def make_category(
    objects: Sequence[str],
    arrows: Iterable[Tuple[str, str, str]],
    composites: Optional[Mapping[Tuple[str, str], str]] = None,
    identity_prefix: str = "id_",
) -> FinCategory:
    """Programmatic builder: identities and their compositions are filled in."""
    composites = dict(composites or {})
    arrows = list(arrows)
    ids = {x: f"{identity_prefix}{x}" for x in objects}
    morphisms = [{"id": ids[x], "src": x, "tgt": x} for x in objects]
    morphisms += [{"id": a, "src": s, "tgt": t} for a, s, t in arrows]
    ends = {m["id"]: (m["src"], m["tgt"]) for m in morphisms}
    table = []
    for f, (fs, ft) in ends.items():
        for g, (gs, gt) in ends.items():
            if gs != ft:
                continue
            if g == ids[gs]:
                table.append([g, f, f])
            elif f == ids[fs]:
                table.append([g, f, g])
            elif (g, f) in composites:
                table.append([g, f, composites[(g, f)]])
    return validate_category({
        "objects": list(objects),
        "morphisms": morphisms,
        "identities": ids,
        "composition": table,
    })


def to_presentation(C) -> Dict[str, object]:
    """Inverse of validate_degreed / validate_category, in canonical order."""
    base = C.base if isinstance(C, DegreedCategory) else C
    if isinstance(C, DegreedCategory):
        objects = [{"id": x, "degree": C.degree[x]} for x in base.objects]
    else:
        objects = [{"id": x} for x in base.objects]
    return {
        "objects": objects,
        "morphisms": [{"id": m.id, "src": m.src, "tgt": m.tgt} for m in base.morphisms],
        "identities": {x: base.identity[x] for x in base.objects},
        "composition": [[g, f, base.composition[(g, f)]] for g, f in sorted(base.composition)],
    }


# -------------------------------------------------------------------
# Constructions
# -------------------------------------------------------------------

def _opposite_base(C: FinCategory) -> FinCategory:
    morphisms = tuple(sorted(Morphism(m.tgt, m.src, m.id) for m in C.morphisms))
    composition = {(f, g): h for (g, f), h in C.composition.items()}
    return FinCategory(C.objects, morphisms, dict(C.identity), composition)


def opposite(C):
    """Swap sources and targets; identifiers are kept, so opposite is an involution."""
    if isinstance(C, DegreedCategory):
        return DegreedCategory(_opposite_base(C.base), dict(C.degree))
    return _opposite_base(C)


def subcategory(C: FinCategory, morphisms: Iterable[str], objects: Optional[Iterable[str]] = None) -> FinCategory:
    """Subcategory on the given morphisms; identities of the objects are always added."""
    keep_objects = set(objects) if objects is not None else set()
    keep = set(morphisms)
    if objects is None:
        for f in keep:
            keep_objects.update((C.src(f), C.tgt(f)))
    keep.update(C.identity[x] for x in keep_objects)
    violations = []
    for f in keep:
        if C.src(f) not in keep_objects or C.tgt(f) not in keep_objects:
            violations.append(Violation(ViolationKind.DANGLING_REFERENCE, "morphism leaves the object set", (f,)))
    composition = {}
    for (g, f), h in C.composition.items():
        if g in keep and f in keep:
            if h not in keep:
                violations.append(Violation(ViolationKind.NON_TOTAL_COMPOSITION, "composite leaves the morphism set", (g, f)))
            composition[(g, f)] = h
    if violations:
        raise InvalidCategory(violations)
    return FinCategory(
        tuple(sorted(keep_objects)),
        tuple(m for m in C.morphisms if m.id in keep),
        {x: C.identity[x] for x in keep_objects},
        composition,
    )


def full_subcategory(C: DegreedCategory, max_degree: int) -> DegreedCategory:
    objects = [x for x in C.objects if C.degree[x] < max_degree]
    keep = [m.id for m in C.morphisms if C.degree[m.src] < max_degree and C.degree[m.tgt] < max_degree]
    base = subcategory(C.base, keep, objects)
    return DegreedCategory(base, {x: C.degree[x] for x in objects})


def terminal_category(obj: str = "*") -> FinCategory:
    return make_category([obj], [])


# -------------------------------------------------------------------
# Profunctor
# -------------------------------------------------------------------

@dataclass(frozen=True)
class Profunctor:
    """H: source ⇸ target with H(d, c) for d in target, c in source.

    Source morphisms act on the left (post-composition on c), target
    morphisms on the right (pre-composition on d). Element tokens are
    unique across all hom-sets.
    """

    source: FinCategory
    target: FinCategory
    elements: Mapping[Tuple[str, str], Tuple[str, ...]]
    left: Mapping[Tuple[str, str], str] = field(repr=False)
    right: Mapping[Tuple[str, str], str] = field(repr=False)

    @cached_property
    def _where(self) -> Dict[str, Tuple[str, str]]:
        out = {}
        for key, elems in self.elements.items():
            for e in elems:
                out[e] = key
        return out

    def at(self, d: str, c: str) -> Tuple[str, ...]:
        return self.elements.get((d, c), ())

    def locate(self, h: str) -> Tuple[str, str]:
        return self._where[h]

    def all_elements(self) -> Tuple[str, ...]:
        return tuple(sorted(self._where))

    def act_left(self, k: str, h: str) -> str:
        return self.left[(k, h)]

    def act_right(self, h: str, l: str) -> str:
        return self.right[(h, l)]


def validate_profunctor(P: Profunctor) -> Profunctor:
    C, D = P.source, P.target
    seen: Dict[str, Tuple[str, str]] = {}
    for (d, c), elems in P.elements.items():
        if d not in D.identity or c not in C.identity:
            raise InvalidProfunctor(f"elements indexed by unknown objects ({d}, {c})")
        for e in elems:
            if e in seen:
                raise InvalidProfunctor(f"element token {e!r} appears in two hom-sets")
            seen[e] = (d, c)

    for h, (d, c) in seen.items():
        for k in C.out_of(c):
            r = P.left.get((k, h))
            if r is None or r not in P.at(d, C.tgt(k)):
                raise InvalidProfunctor(f"left action of {k} on {h} missing or misplaced")
        for l in D.into(d):
            r = P.right.get((h, l))
            if r is None or r not in P.at(D.src(l), c):
                raise InvalidProfunctor(f"right action of {l} on {h} missing or misplaced")
        if P.left[(C.identity[c], h)] != h or P.right[(h, D.identity[d])] != h:
            raise InvalidProfunctor(f"identities do not act trivially on {h}")

    for h, (d, c) in seen.items():
        for k in C.out_of(c):
            kh = P.left[(k, h)]
            for k2 in C.out_of(C.tgt(k)):
                if P.left[(k2, kh)] != P.left[(C.compose(k2, k), h)]:
                    raise InvalidProfunctor(f"left action not functorial at ({k2}, {k}, {h})")
        for l in D.into(d):
            hl = P.right[(h, l)]
            for l2 in D.into(D.src(l)):
                if P.right[(hl, l2)] != P.right[(h, D.compose(l, l2))]:
                    raise InvalidProfunctor(f"right action not functorial at ({h}, {l}, {l2})")
        for k, l in product(C.out_of(c), D.into(d)):
            if P.right[(P.left[(k, h)], l)] != P.left[(k, P.right[(h, l)])]:
                raise InvalidProfunctor(f"bimodule law fails at ({k}, {h}, {l})")
    return P


def hom_profunctor(E: FinCategory, source: FinCategory, target: FinCategory) -> Profunctor:
    """The restriction of E's hom to (target objects) x (source objects).

    H(d, c) = E(d, c); source morphisms post-compose, target morphisms
    pre-compose. Both categories must be subcategories of E.
    """
    elements = {}
    left = {}
    right = {}
    for d in target.objects:
        for c in source.objects:
            hs = E.hom(d, c)
            if hs:
                elements[(d, c)] = hs
            for h in hs:
                for k in source.out_of(c):
                    left[(k, h)] = E.compose(k, h)
                for l in target.into(d):
                    right[(h, l)] = E.compose(h, l)
    return Profunctor(source, target, elements, left, right)
