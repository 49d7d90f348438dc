# modules/factorization.py
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from modules.errors import InternalInvariantBroken, NotAlmostReedy
from modules.fincat_core import DegreedCategory, FinCategory, subcategory
from modules.union_find import UnionFind

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Factorization:
    """f = second ∘ first, passing through mid."""

    first: str
    second: str
    mid: str


@dataclass(frozen=True)
class Connection:
    """A connecting morphism k from one factorization to another.

    target.first = k ∘ source.first and source.second = target.second ∘ k.
    """

    source: Factorization
    target: Factorization
    connector: str


@dataclass(frozen=True)
class FactorizationGraph:
    vertices: Tuple[Factorization, ...]
    edges: Tuple[Connection, ...]

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.vertices)
        for e in self.edges:
            # keep the first connector found for a pair of vertices
            if not G.has_edge(e.source, e.target):
                G.add_edge(e.source, e.target, connection=e)
        return G


@dataclass(frozen=True)
class FactorizationComponents:
    components: Tuple[Tuple[Factorization, ...], ...]
    tree: nx.Graph

    @property
    def connected(self) -> bool:
        # the empty category is not connected
        return len(self.components) == 1

    def component_of(self, p: Factorization) -> int:
        for i, comp in enumerate(self.components):
            if p in comp:
                return i
        raise KeyError(p)

    def same_component(self, p: Factorization, q: Factorization) -> bool:
        return self.component_of(p) == self.component_of(q)

    def zigzag(self, p: Factorization, q: Factorization) -> List[Connection]:
        """Explicit zigzag from p to q along the spanning tree."""
        path = nx.shortest_path(self.tree, p, q)
        return [self.tree.edges[a, b]["connection"] for a, b in zip(path, path[1:])]

    def disconnected_pair(self) -> Optional[Tuple[Factorization, Factorization]]:
        if len(self.components) < 2:
            return None
        return self.components[0][0], self.components[1][0]


@dataclass(frozen=True)
class BoundaryHom:
    source: str
    target: str
    bound: int
    classes: Tuple[Tuple[Tuple[str, str], ...], ...]
    to_hom: Tuple[str, ...]

    def fiber(self, f: str) -> List[int]:
        return [i for i, h in enumerate(self.to_hom) if h == f]

    def class_of(self, pair: Tuple[str, str]) -> int:
        for i, cls in enumerate(self.classes):
            if pair in cls:
                return i
        raise KeyError(pair)

    def __len__(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class BasicClasses:
    up: FrozenSet[str]
    down: FrozenSet[str]
    level: FrozenSet[str]


# -------------------------------------------------------------------
# Factorizations and basic morphisms
# -------------------------------------------------------------------

def factorizations_below(C: DegreedCategory, f: str, bound: int) -> List[Factorization]:
    x, y = C.src(f), C.tgt(f)
    out = []
    for z in C.objects_below(bound):
        for g in C.hom(x, z):
            for h in C.hom(z, y):
                if C.compose(h, g) == f:
                    out.append(Factorization(g, h, z))
    return sorted(out)


def fundamental_factorizations(C: DegreedCategory, f: str) -> List[Factorization]:
    x, y = C.src(f), C.tgt(f)
    return factorizations_below(C, f, min(C.deg(x), C.deg(y)))


def basic_morphisms(C: DegreedCategory) -> FrozenSet[str]:
    if "basic" not in C.memo:
        C.memo["basic"] = frozenset(f for f in C.ids if not fundamental_factorizations(C, f))
    return C.memo["basic"]


def is_basic(C: DegreedCategory, f: str) -> bool:
    C.base.morphism(f)
    return f in basic_morphisms(C)


def basic_classes(C: DegreedCategory) -> BasicClasses:
    if "classes" not in C.memo:
        basic = basic_morphisms(C)
        up = frozenset(f for f in basic if C.deg(C.src(f)) <= C.deg(C.tgt(f)))
        down = frozenset(f for f in basic if C.deg(C.src(f)) >= C.deg(C.tgt(f)))
        C.memo["classes"] = BasicClasses(up, down, up & down)
    return C.memo["classes"]


def stratum(C: DegreedCategory, degree: int) -> FinCategory:
    """Objects of one degree with the basic morphisms between them.

    Raises InvalidCategory when basic level morphisms do not compose.
    """
    objects = C.objects_of_degree(degree)
    basic = basic_morphisms(C)
    keep = [m.id for m in C.morphisms
            if m.id in basic and C.deg(m.src) == degree and C.deg(m.tgt) == degree]
    return subcategory(C.base, keep, objects)


# -------------------------------------------------------------------
# Zigzag connectivity
# -------------------------------------------------------------------

def connections(C, vertices: Sequence[Factorization], allowed: Optional[Iterable[str]] = None) -> List[Connection]:
    allowed = None if allowed is None else frozenset(allowed)
    edges = []
    for p in vertices:
        for q in vertices:
            if p == q:
                continue
            for k in C.hom(p.mid, q.mid):
                if allowed is not None and k not in allowed:
                    continue
                if C.compose(k, p.first) == q.first and C.compose(q.second, k) == p.second:
                    edges.append(Connection(p, q, k))
    return edges


def zigzag_components(C, vertices: Iterable[Factorization], allowed: Optional[Iterable[str]] = None) -> FactorizationComponents:
    """Connected components (edge direction ignored) with a spanning forest."""
    vertices = sorted(set(vertices))
    graph = FactorizationGraph(tuple(vertices), tuple(connections(C, vertices, allowed)))
    G = graph.to_networkx()
    comps = sorted(tuple(sorted(c)) for c in nx.connected_components(G))
    tree = nx.Graph()
    tree.add_nodes_from(vertices)
    for comp in comps:
        for a, b in nx.bfs_edges(G, comp[0]):
            tree.add_edge(a, b, connection=G.edges[a, b]["connection"])
    return FactorizationComponents(tuple(comps), tree)


def factorization_graph(C: DegreedCategory, f: str, bound: int, extra: Iterable[Factorization] = ()) -> FactorizationGraph:
    vertices = sorted(set(factorizations_below(C, f, bound)) | set(extra))
    return FactorizationGraph(tuple(vertices), tuple(connections(C, vertices)))


def factorization_components(
    C: DegreedCategory, f: str, bound: int, extra: Iterable[Factorization] = ()
) -> FactorizationComponents:
    """Components of the factorizations of f with mid degree < bound.

    Vertices in `extra` are included whatever their mid degree.
    """
    C.base.morphism(f)
    vertices = set(factorizations_below(C, f, bound)) | set(extra)
    return zigzag_components(C, vertices)


def connected_within(C: DegreedCategory, f: str, p: Factorization, q: Factorization, bound: int) -> bool:
    return factorization_components(C, f, bound, extra=(p, q)).same_component(p, q)


def zigzag_path(components: FactorizationComponents, p: Factorization, q: Factorization) -> List[Connection]:
    return components.zigzag(p, q)


# -------------------------------------------------------------------
# Boundary hom
# -------------------------------------------------------------------

def boundary_hom(C: DegreedCategory, x: str, y: str, bound: int) -> BoundaryHom:
    C.base.check_object(x)
    C.base.check_object(y)
    below = C.objects_below(bound)
    uf = UnionFind()
    for z in below:
        for g in C.hom(x, z):
            for h in C.hom(z, y):
                uf.add((g, h))
    for z in below:
        for z2 in below:
            for k in C.hom(z, z2):
                for p in C.hom(x, z):
                    for q in C.hom(z2, y):
                        uf.union((p, C.compose(q, k)), (C.compose(k, p), q))
    classes = tuple(tuple(members) for members in uf.classes().values())
    to_hom = tuple(C.compose(cls[0][1], cls[0][0]) for cls in classes)
    return BoundaryHom(x, y, bound, classes, to_hom)


# -------------------------------------------------------------------
# Reedy factorizations
# -------------------------------------------------------------------

def enumerate_reedy_factorizations(
    C: DegreedCategory, f: str, up: Iterable[str], down: Iterable[str]
) -> List[Factorization]:
    up, down = frozenset(up), frozenset(down)
    x, y = C.src(f), C.tgt(f)
    out = []
    for z in C.objects:
        for g in C.hom(x, z):
            if g not in down:
                continue
            for h in C.hom(z, y):
                if h in up and C.compose(h, g) == f:
                    out.append(Factorization(g, h, z))
    return sorted(out)


def reedy_split(C: DegreedCategory, f: str, mode: str = "s") -> Factorization:
    """Factor f as an up morphism after a down morphism.

    mode "s" stops when both inner refactors are identities, mode "c"
    when both are basic level. In mode "c" the result depends on the
    canonical scan order when several factorizations exist. Nothing here
    checks that C is almost (c-)Reedy; a result outside the basic
    classes raises NotAlmostReedy.
    """
    if mode not in ("s", "c"):
        raise ValueError(f"unknown factorization mode {mode!r}")
    C.base.morphism(f)
    classes = basic_classes(C)
    guard = len(C.objects) + len(C.degrees()) + 2
    down, up = _reedy_split(C, f, mode, classes, guard)
    out = Factorization(down, up, C.tgt(down))
    if out.first not in classes.down or out.second not in classes.up or C.compose(up, down) != f:
        raise NotAlmostReedy(f"factorization of {f} came out as {out}")
    logger.debug(f"reedy_split({f}, mode={mode}) -> {out.first} then {out.second}")
    return out


def _reedy_split(C: DegreedCategory, f: str, mode: str, classes: BasicClasses, guard: int) -> Tuple[str, str]:
    if f in classes.down:
        return f, C.identity[C.tgt(f)]
    if f in classes.up:
        return C.identity[C.src(f)], f
    facs = fundamental_factorizations(C, f)
    if not facs:
        raise NotAlmostReedy(f"{f} is basic but in neither class")
    g, h = facs[0].first, facs[0].second

    def trivial(k: str) -> bool:
        return C.is_identity(k) if mode == "s" else k in classes.level

    for step in range(guard):
        dg, ug = _reedy_split(C, g, mode, classes, guard)
        dh, uh = _reedy_split(C, h, mode, classes, guard)
        if trivial(ug) and trivial(dh):
            if mode == "s":
                return dg, uh
            return C.compose(dh, C.compose(ug, dg)), uh
        logger.debug(f"  step {step}: {f} via {C.tgt(g)}")
        if not trivial(ug) and C.deg(C.src(ug)) < C.deg(C.tgt(g)):
            g, h = dg, C.compose(h, ug)
        else:
            g, h = C.compose(dh, g), uh
    raise InternalInvariantBroken(f"factorization of {f} did not settle in {guard} steps")
