"""Exact arithmetic in finitely generated abelian groups with named bases.

A group is an ordered direct sum of cyclic factors ``Z/n`` (``n = 0`` encodes
``Z``); an element is an integer coordinate vector reduced into ``[0, n)`` on
finite factors.  Everything here is immutable and pure.

Membership and orbit computations are done by plain enumeration: every group
this package ships is tiny (a few hundred elements after exponent-bounding),
so no Smith-normal-form machinery is needed or wanted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, lcm

from .errors import GyrostabError, PresentationError


@dataclass(frozen=True)
class GroupPresentation:
    """Ordered list of cyclic factors ``(generator_name, order)``.

    Order 0 encodes an infinite cyclic factor.  Finite orders must be >= 2
    and generator names must be unique.
    """

    factors: tuple[tuple[str, int], ...]
    name: str = ""

    def __post_init__(self):
        names = [f[0] for f in self.factors]
        if len(set(names)) != len(names):
            raise GyrostabError(f"duplicate generator names in {names}")
        for gen, order in self.factors:
            if order < 0 or order == 1:
                raise GyrostabError(f"factor order of {gen} must be 0 or >= 2, got {order}")
        object.__setattr__(self, "_hash", hash((self.factors, self.name)))

    def __hash__(self):
        return self._hash

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(order for _, order in self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def generator_names(self) -> tuple[str, ...]:
        return tuple(gen for gen, _ in self.factors)

    def exponent(self) -> int:
        """lcm of all finite factor orders; 1 if there are none."""
        if not self.factors:
            raise GyrostabError("exponent of an empty presentation")
        finite = [order for _, order in self.factors if order != 0]
        return lcm(*finite) if finite else 1

    def is_finite(self) -> bool:
        return all(order != 0 for _, order in self.factors)

    def size(self) -> int:
        if not self.is_finite():
            raise GyrostabError(f"{self.name or self.factors}: not a finite group")
        n = 1
        for _, order in self.factors:
            n *= order
        return n

    def element(self, coords) -> "GroupElement":
        return GroupElement(self, tuple(coords)).normalized()

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def basis_element(self, i: int) -> "GroupElement":
        coords = [0] * self.rank
        coords[i] = 1
        return GroupElement(self, tuple(coords))

    def elements(self):
        """All elements, lexicographic by coordinates.  Finite groups only."""
        ranges = [range(self.size_of(i)) for i in range(self.rank)]
        for coords in itertools.product(*ranges):
            yield GroupElement(self, coords)

    def size_of(self, i: int) -> int:
        order = self.factors[i][1]
        if order == 0:
            raise GyrostabError(f"factor {self.factors[i][0]} is infinite")
        return order

    def describe(self) -> str:
        if not self.factors:
            return "0"
        parts = []
        for gen, order in self.factors:
            cyc = "Z" if order == 0 else f"Z/{order}"
            parts.append(f"{cyc}<{gen}>")
        return " + ".join(parts)


@dataclass(frozen=True)
class GroupElement:
    group: GroupPresentation
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.group.rank:
            raise PresentationError(
                f"coordinate vector of length {len(self.coords)} against "
                f"presentation of rank {self.group.rank}"
            )

    def __hash__(self):
        return hash((self.group._hash, self.coords))

    def normalized(self) -> "GroupElement":
        """Reduce finite coordinates into [0, order).  Idempotent."""
        coords = tuple(
            c % order if order != 0 else c
            for c, (_, order) in zip(self.coords, self.group.factors)
        )
        return GroupElement(self.group, coords)

    def _check_same(self, other: "GroupElement"):
        if self.group != other.group:
            raise PresentationError(
                f"elements of different presentations: "
                f"{self.group.name or self.group.factors} vs {other.group.name or other.group.factors}"
            )

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check_same(other)
        return GroupElement(
            self.group, tuple(a + b for a, b in zip(self.coords, other.coords))
        ).normalized()

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, tuple(-c for c in self.coords)).normalized()

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def scale(self, n: int) -> "GroupElement":
        return GroupElement(self.group, tuple(n * c for c in self.coords)).normalized()

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.normalized().coords)

    def order(self) -> int:
        """Additive order; 0 for infinite order."""
        e = self.normalized()
        result = 1
        for c, (_, order) in zip(e.coords, e.group.factors):
            if c == 0:
                continue
            if order == 0:
                return 0
            result = lcm(result, order // gcd(c, order))
        return result

    def describe(self) -> str:
        e = self.normalized()
        parts = [
            f"{c}*{gen}" if c != 1 else gen
            for c, (gen, _) in zip(e.coords, e.group.factors)
            if c != 0
        ]
        return " + ".join(parts) if parts else "0"


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def neg(a: GroupElement) -> GroupElement:
    return -a


def scale(n: int, a: GroupElement) -> GroupElement:
    return a.scale(n)


def normalize(e: GroupElement) -> GroupElement:
    return e.normalized()


def exponent(g: GroupPresentation) -> int:
    return g.exponent()


def reachable_set(images, bounds) -> dict:
    """All sums ``sum_i c_i * images[i]`` with ``0 <= c_i < bounds[i]``.

    Returns ``{element: witness}`` where the witness is the lexicographically
    least coefficient vector producing the element.  ``bounds[i]`` is the
    order of the i-th source coordinate, or the target exponent when that
    coordinate has infinite order (only the residue can matter there).
    """
    if not images:
        raise GyrostabError("reachable_set needs at least one image")
    if len(bounds) != len(images):
        raise GyrostabError("images and bounds length mismatch")
    group = images[0].group
    for img in images:
        if img.group != group:
            raise PresentationError("reachable_set images in different presentations")
    orders = group.orders
    raw = [img.normalized().coords for img in images]
    found: dict[tuple[int, ...], tuple[int, ...]] = {}
    # lexicographic coefficient enumeration: the first witness recorded for an
    # element is automatically the least one
    for coeffs in itertools.product(*(range(b) for b in bounds)):
        total = tuple(
            sum(c * img[i] for c, img in zip(coeffs, raw)) % o if o else
            sum(c * img[i] for c, img in zip(coeffs, raw))
            for i, o in enumerate(orders)
        )
        if total not in found:
            found[total] = coeffs
    return {GroupElement(group, coords): coeffs for coords, coeffs in found.items()}


def span(generators, ambient: GroupPresentation) -> set:
    """Additive closure of the generators inside a finite ambient group."""
    if not ambient.is_finite():
        raise GyrostabError("span enumeration needs a finite ambient group")
    closed = {ambient.zero()}
    frontier = [ambient.zero()]
    while frontier:
        e = frontier.pop()
        for g in generators:
            nxt = e + g
            if nxt not in closed:
                closed.add(nxt)
                frontier.append(nxt)
    return closed


@dataclass(frozen=True)
class Subgroup:
    ambient: GroupPresentation
    generators: tuple[GroupElement, ...]

    def __post_init__(self):
        for g in self.generators:
            if g.group != self.ambient:
                raise PresentationError("subgroup generator outside ambient presentation")

    def elements(self) -> set:
        return span(self.generators, self.ambient)


def subgroup_contains(s: Subgroup, e: GroupElement) -> bool:
    if e.group != s.ambient:
        raise PresentationError("membership query against the wrong ambient group")
    return e.normalized() in s.elements()


def orbit_partition(points, related) -> list[list]:
    """Partition under the transitive closure of a verified relation.

    ``related`` must be reflexive and symmetric on the given points; this is
    checked and a violation raises (for the gyration criterion this doubles
    as the check that it is a genuine equivalence relation).  Classes come
    back sorted, each labeled by its lexicographically least member.
    """
    points = list(points)
    for p in points:
        if not related(p, p):
            raise GyrostabError(f"relation not reflexive at {p}")
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        pi = points[i]
        for j in range(i + 1, n):
            rij = related(pi, points[j])
            if rij != related(points[j], pi):
                raise GyrostabError(
                    f"relation not symmetric on ({pi}, {points[j]})"
                )
            if rij:
                parent[find(i)] = find(j)

    def key(p):
        return p.coords if isinstance(p, GroupElement) else p

    classes: dict[int, list] = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(points[i])
    out = [sorted(cls, key=key) for cls in classes.values()]
    out.sort(key=lambda cls: key(cls[0]))
    return out
