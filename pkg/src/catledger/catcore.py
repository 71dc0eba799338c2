"""Finite presented categories, functors, natural transformations, FinSet limits.

Categories here are *presented*: objects and generator morphisms are given
explicitly, identities are implicit (one per object), and composites are
generator paths.  Law checks therefore quantify over generators and
composable generator pairs only, and they check structure (endpoints,
composability), never the numeric weights carried by morphisms: weights
are bookkeeping data, not part of categorical identity.

The FinSet constructions (`finset_pullback`, `finset_pushout`) are ordinary
limits/colimits of finite labeled sets, with deterministic element order so
they can be asserted against verbatim.  Universal-property verification by
exhaustive mediating-map search is provided for small fixtures; it is a
test-time tool, never a runtime cost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Mapping


class CategoryError(Exception):
    """Structural misuse of a category, functor or transformation."""


class DuplicateObjectError(CategoryError):
    pass


class ObjectNotFoundError(CategoryError):
    pass


class DanglingEndpointError(CategoryError):
    pass


class PayloadKindError(CategoryError):
    pass


class FinSetError(ValueError):
    """Ill-formed finite-set map or mismatched (co)domains."""


@dataclass
class Quantity:
    """Unit-tagged amount carried by an account object."""

    unit: str
    amount: float


@dataclass
class CatObject:
    id: int
    name: str
    payload: Quantity | None = None


@dataclass
class Morphism:
    id: int
    src: int
    dst: int
    label: str = ""
    weight: float = 0.0


@dataclass(frozen=True)
class Path:
    """A composite morphism, recorded as its generator sequence.

    The empty sequence at an object is that object's identity; composition
    is concatenation, so the identity and associativity laws hold by
    construction and can be checked by plain equality.
    """

    src: int
    dst: int
    morphism_ids: tuple[int, ...] = ()


class FiniteCategory:
    """A finitely presented category: named objects plus generator morphisms.

    Parallel generators are allowed (the underlying graph is a multigraph).
    Object and morphism ids start at 1 and are never reused.
    """

    def __init__(self, name: str = "") -> None:
        self.name = name
        self._objects: list[CatObject] = []
        self._morphisms: list[Morphism] = []
        self._by_name: dict[str, int] = {}

    # -- objects ------------------------------------------------------

    @property
    def objects(self) -> tuple[CatObject, ...]:
        return tuple(self._objects)

    @property
    def morphisms(self) -> tuple[Morphism, ...]:
        return tuple(self._morphisms)

    def add_object(self, name: str, payload: Quantity | tuple[str, float] | None = None) -> int:
        """Add a named object, returning its fresh id.

        Raises DuplicateObjectError if the name is already present.
        """
        if name in self._by_name:
            raise DuplicateObjectError(f"object {name!r} already exists in {self.name!r}")
        if isinstance(payload, tuple):
            payload = Quantity(*payload)
        obj = CatObject(id=len(self._objects) + 1, name=name, payload=payload)
        self._objects.append(obj)
        self._by_name[name] = obj.id
        return obj.id

    def get_object(self, name: str) -> int:
        """Return the id of the object called `name`."""
        try:
            return self._by_name[name]
        except KeyError:
            raise ObjectNotFoundError(f"no object {name!r} in {self.name!r}") from None

    def object_by_id(self, obj_id: int) -> CatObject:
        if not 1 <= obj_id <= len(self._objects):
            raise ObjectNotFoundError(f"no object id {obj_id} in {self.name!r}")
        return self._objects[obj_id - 1]

    def has_object(self, name: str) -> bool:
        return name in self._by_name

    def update_object(self, name: str, amount: float) -> None:
        """Replace the amount of the object's payload; everything else is untouched."""
        obj = self.object_by_id(self.get_object(name))
        if obj.payload is None:
            raise PayloadKindError(f"object {name!r} carries no amount payload")
        obj.payload.amount = amount

    def amount(self, name: str) -> float:
        obj = self.object_by_id(self.get_object(name))
        if obj.payload is None:
            raise PayloadKindError(f"object {name!r} carries no amount payload")
        return obj.payload.amount

    # -- morphisms ----------------------------------------------------

    def add_morphism(self, src: int, dst: int, weight: float = 0.0, label: str = "") -> int:
        """Append a generator morphism src -> dst, returning its fresh id."""
        for endpoint in (src, dst):
            if not 1 <= endpoint <= len(self._objects):
                raise DanglingEndpointError(
                    f"morphism endpoint {endpoint} does not exist in {self.name!r}"
                )
        mor = Morphism(id=len(self._morphisms) + 1, src=src, dst=dst, label=label, weight=weight)
        self._morphisms.append(mor)
        return mor.id

    def morphism_by_id(self, mor_id: int) -> Morphism:
        if not 1 <= mor_id <= len(self._morphisms):
            raise ObjectNotFoundError(f"no morphism id {mor_id} in {self.name!r}")
        return self._morphisms[mor_id - 1]

    def composable_pairs(self) -> Iterator[tuple[Morphism, Morphism]]:
        """All generator pairs (f, g) with f followed by g, i.e. dst(f) == src(g)."""
        by_src: dict[int, list[Morphism]] = {}
        for m in self._morphisms:
            by_src.setdefault(m.src, []).append(m)
        for f in self._morphisms:
            for g in by_src.get(f.dst, ()):
                yield f, g

    # -- composition (generator paths) ----------------------------------

    def identity_path(self, obj_id: int) -> Path:
        self.object_by_id(obj_id)
        return Path(obj_id, obj_id, ())

    def as_path(self, mor_id: int) -> Path:
        mor = self.morphism_by_id(mor_id)
        return Path(mor.src, mor.dst, (mor.id,))

    def compose(self, first: Path, second: Path) -> Path:
        """`first` followed by `second`; raises unless the endpoints meet."""
        if first.dst != second.src:
            raise CategoryError(
                f"paths do not compose: {first.dst} != {second.src} in {self.name!r}"
            )
        return Path(first.src, second.dst, first.morphism_ids + second.morphism_ids)


@dataclass
class Functor:
    """A functor between presented categories, given on generators.

    `object_map` sends source object ids to target object ids and must be
    total; `morphism_map` sends source generator ids to target generator
    ids.  Identities are preserved automatically (they are implicit), so
    the checkable laws are endpoint coherence and composability of images.
    """

    source: FiniteCategory
    target: FiniteCategory
    object_map: dict[int, int] = field(default_factory=dict)
    morphism_map: dict[int, int] = field(default_factory=dict)

    def map_object(self, obj_id: int) -> int:
        return self.object_map[obj_id]

    def map_morphism(self, mor_id: int) -> int:
        return self.morphism_map[mor_id]

    @staticmethod
    def identity(cat: FiniteCategory) -> "Functor":
        return Functor(
            source=cat,
            target=cat,
            object_map={o.id: o.id for o in cat.objects},
            morphism_map={m.id: m.id for m in cat.morphisms},
        )


@dataclass
class NaturalTransformation:
    """A transformation between parallel functors, one component per source object.

    `components[A]` is the id of a target morphism F(A) -> G(A).
    """

    F: Functor
    G: Functor
    components: dict[int, int] = field(default_factory=dict)


@dataclass
class LawReport:
    """Outcome of a structural law check; failures name the offending pieces."""

    ok: bool
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_functor_laws(functor: Functor) -> LawReport:
    """Check totality, endpoint coherence and composition preservation.

    Identity preservation is implied by object totality for presented
    categories (identities are implicit and map to identities), so the
    report concentrates on the failure modes that can actually occur:
    unmapped generators, incoherent endpoints, and composable generator
    pairs whose images fail to compose.
    """
    src_cat, dst_cat = functor.source, functor.target
    failures: list[str] = []

    for obj in src_cat.objects:
        image = functor.object_map.get(obj.id)
        if image is None:
            failures.append(f"object {obj.name!r} has no image")
        elif not 1 <= image <= len(dst_cat.objects):
            failures.append(f"object {obj.name!r} maps to missing id {image}")

    def image_of(mor: Morphism) -> Morphism | None:
        mapped = functor.morphism_map.get(mor.id)
        if mapped is None:
            failures.append(f"morphism {mor.id} ({mor.label or 'unlabeled'}) has no image")
            return None
        if not 1 <= mapped <= len(dst_cat.morphisms):
            failures.append(f"morphism {mor.id} maps to missing id {mapped}")
            return None
        return dst_cat.morphism_by_id(mapped)

    for mor in src_cat.morphisms:
        img = image_of(mor)
        if img is None:
            continue
        if img.src != functor.object_map.get(mor.src):
            failures.append(
                f"morphism {mor.id}: image source {img.src} != F(src) "
                f"{functor.object_map.get(mor.src)}"
            )
        if img.dst != functor.object_map.get(mor.dst):
            failures.append(
                f"morphism {mor.id}: image target {img.dst} != F(dst) "
                f"{functor.object_map.get(mor.dst)}"
            )

    for f, g in src_cat.composable_pairs():
        fi = functor.morphism_map.get(f.id)
        gi = functor.morphism_map.get(g.id)
        if fi is None or gi is None:
            continue  # already reported above
        f_img = dst_cat.morphism_by_id(fi)
        g_img = dst_cat.morphism_by_id(gi)
        if f_img.dst != g_img.src:
            failures.append(
                f"composable pair ({f.id}, {g.id}) maps to non-composing pair ({fi}, {gi})"
            )

    return LawReport(ok=not failures, failures=failures)


def check_naturality(eta: NaturalTransformation) -> LawReport:
    """Check component typing and that every generator square commutes.

    In a presented category the two composites around the square for a
    generator f: A -> B are the paths (eta_A ; G(f)) and (F(f) ; eta_B);
    the square commutes structurally when both paths are composable and
    parallel.  Weights are ignored, as everywhere in the law checks.
    """
    F, G = eta.F, eta.G
    failures: list[str] = []
    if F.source is not G.source or F.target is not G.target:
        return LawReport(False, ["functors are not parallel"])
    src_cat, dst_cat = F.source, F.target

    comps: dict[int, Morphism] = {}
    for obj in src_cat.objects:
        comp_id = eta.components.get(obj.id)
        if comp_id is None:
            failures.append(f"object {obj.name!r} has no component")
            continue
        comp = dst_cat.morphism_by_id(comp_id)
        comps[obj.id] = comp
        if comp.src != F.object_map.get(obj.id) or comp.dst != G.object_map.get(obj.id):
            failures.append(
                f"component at {obj.name!r} is mistyped: "
                f"{comp.src}->{comp.dst} is not F({obj.name})->G({obj.name})"
            )

    for mor in src_cat.morphisms:
        eta_a = comps.get(mor.src)
        eta_b = comps.get(mor.dst)
        fi = F.morphism_map.get(mor.id)
        gi = G.morphism_map.get(mor.id)
        if None in (eta_a, eta_b, fi, gi):
            failures.append(f"square for morphism {mor.id} is incomplete")
            continue
        f_img = dst_cat.morphism_by_id(fi)
        g_img = dst_cat.morphism_by_id(gi)
        # left path: eta_A then G(f); right path: F(f) then eta_B
        if eta_a.dst != g_img.src or f_img.dst != eta_b.src:
            failures.append(f"square for morphism {mor.id} does not compose")
            continue
        if eta_a.src != f_img.src or g_img.dst != eta_b.dst:
            failures.append(f"square for morphism {mor.id} is not parallel")

    return LawReport(ok=not failures, failures=failures)


# ---------------------------------------------------------------------------
# FinSet: maps between finite labeled sets, pullbacks and pushouts.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinSetMap:
    """A total function between finite labeled sets.

    Element order of `domain` and `codomain` is meaningful: it makes the
    derived constructions deterministic.
    """

    domain: tuple[Hashable, ...]
    codomain: tuple[Hashable, ...]
    mapping: Mapping[Hashable, Hashable]

    def __post_init__(self) -> None:
        dom, cod = set(self.domain), set(self.codomain)
        if len(dom) != len(self.domain):
            raise FinSetError("domain has repeated elements")
        if len(cod) != len(self.codomain):
            raise FinSetError("codomain has repeated elements")
        missing = dom - set(self.mapping)
        if missing:
            raise FinSetError(f"mapping is not total: missing {sorted(map(str, missing))}")
        for x in self.domain:
            if self.mapping[x] not in cod:
                raise FinSetError(f"image of {x!r} lies outside the codomain")

    def __call__(self, x: Hashable) -> Hashable:
        return self.mapping[x]

    def then(self, other: "FinSetMap") -> "FinSetMap":
        """Composition self ; other (apply self first)."""
        if tuple(self.codomain) != tuple(other.domain):
            raise FinSetError("maps do not compose: codomain != domain")
        return FinSetMap(self.domain, other.codomain, {x: other(self(x)) for x in self.domain})


def finset_pullback(
    f: FinSetMap, g: FinSetMap
) -> tuple[tuple[tuple[Hashable, Hashable], ...], FinSetMap, FinSetMap]:
    """Pullback of f: A -> C and g: B -> C.

    Returns the apex P = {(a, b) | f(a) = g(b)} ordered lexicographically by
    (A-index, B-index), plus the two projections.
    """
    if tuple(f.codomain) != tuple(g.codomain):
        raise FinSetError("pullback requires a shared codomain")
    apex = tuple((a, b) for a in f.domain for b in g.domain if f(a) == g(b))
    p_a = FinSetMap(apex, f.domain, {p: p[0] for p in apex})
    p_b = FinSetMap(apex, g.domain, {p: p[1] for p in apex})
    return apex, p_a, p_b


def finset_pushout(
    f: FinSetMap, g: FinSetMap
) -> tuple[tuple[frozenset, ...], FinSetMap, FinSetMap]:
    """Pushout of f: C -> A and g: C -> B.

    Returns the apex P: the quotient of the tagged disjoint union A ⊔ B by
    the relation f(c) ~ g(c), as classes of ("A", a) / ("B", b) pairs
    ordered by first occurrence (A first, then B), plus both injections.
    """
    if tuple(f.domain) != tuple(g.domain):
        raise FinSetError("pushout requires a shared domain")

    elements = [("A", a) for a in f.codomain] + [("B", b) for b in g.codomain]
    parent: dict[tuple, tuple] = {e: e for e in elements}

    def find(x: tuple) -> tuple:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: tuple, y: tuple) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for c in f.domain:
        union(("A", f(c)), ("B", g(c)))

    members: dict[tuple, list[tuple]] = {}
    order: list[tuple] = []
    for e in elements:
        root = find(e)
        if root not in members:
            members[root] = []
            order.append(root)
        members[root].append(e)

    classes = tuple(frozenset(members[root]) for root in order)
    class_of = {e: cls for cls in classes for e in cls}
    i_a = FinSetMap(f.codomain, classes, {a: class_of[("A", a)] for a in f.codomain})
    i_b = FinSetMap(g.codomain, classes, {b: class_of[("B", b)] for b in g.codomain})
    return classes, i_a, i_b


def enumerate_maps(
    domain: tuple[Hashable, ...], codomain: tuple[Hashable, ...]
) -> Iterator[dict[Hashable, Hashable]]:
    """All total maps domain -> codomain, in deterministic order."""
    if not domain:
        yield {}
        return
    for images in itertools.product(codomain, repeat=len(domain)):
        yield dict(zip(domain, images))


def _cone_domains(max_size: int) -> Iterator[tuple[str, ...]]:
    for size in range(1, max_size + 1):
        yield tuple(f"d{i}" for i in range(size))


def verify_pullback_universal(
    f: FinSetMap,
    g: FinSetMap,
    apex: tuple,
    p_a: FinSetMap,
    p_b: FinSetMap,
    max_cone_size: int = 2,
) -> bool:
    """Exhaustively verify the pullback universal property on small sets.

    Checks f∘p_A = g∘p_B pointwise, then for every test cone (D, d_A, d_B)
    with f∘d_A = g∘d_B searches all maps u: D -> P and demands exactly one
    mediator.  In FinSet, mediators are determined pointwise, so cones of
    size one already decide the property; larger sizes are sheer paranoia.
    """
    for p in apex:
        if f(p_a(p)) != g(p_b(p)):
            return False
    for dom in _cone_domains(max_cone_size):
        for d_a_map in enumerate_maps(dom, f.domain):
            for d_b_map in enumerate_maps(dom, g.domain):
                if any(f(d_a_map[d]) != g(d_b_map[d]) for d in dom):
                    continue
                mediators = 0
                for u in enumerate_maps(dom, apex):
                    if all(p_a(u[d]) == d_a_map[d] and p_b(u[d]) == d_b_map[d] for d in dom):
                        mediators += 1
                if mediators != 1:
                    return False
    return True


def verify_pushout_universal(
    f: FinSetMap,
    g: FinSetMap,
    apex: tuple,
    i_a: FinSetMap,
    i_b: FinSetMap,
    max_cocone_size: int = 2,
) -> bool:
    """Exhaustively verify the pushout universal property on small sets.

    Dual to the pullback search: i_A∘f = i_B∘g must hold pointwise, and for
    every cocone (D, d_A, d_B) with d_A∘f = d_B∘g there must be exactly one
    u: P -> D with u∘i_A = d_A and u∘i_B = d_B.
    """
    for c in f.domain:
        if i_a(f(c)) != i_b(g(c)):
            return False
    for dom in _cone_domains(max_cocone_size):
        for d_a_map in enumerate_maps(f.codomain, dom):
            for d_b_map in enumerate_maps(g.codomain, dom):
                if any(d_a_map[f(c)] != d_b_map[g(c)] for c in f.domain):
                    continue
                mediators = 0
                for u in enumerate_maps(apex, dom):
                    if all(u[i_a(a)] == d_a_map[a] for a in f.codomain) and all(
                        u[i_b(b)] == d_b_map[b] for b in g.codomain
                    ):
                        mediators += 1
                if mediators != 1:
                    return False
    return True
