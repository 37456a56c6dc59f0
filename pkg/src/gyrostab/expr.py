"""Formal homotopy-class expressions.

An expression is an integer combination of chains; a chain is a composite
(written left-to-right, so ``(a, b)`` means ``a ∘ b``) of nodes:

* ``Atom(family, index)`` — a named generator like ``eta(7)`` or ``Snu'(4)``;
* ``Susp(k, node)`` — a k-fold suspension, resolved during normalization;
* ``Wh(left, right)`` — a Whitehead product of two expressions;
* ``Block(expr)`` — a parenthesized sum used as a single composition factor;
* ``PRef(name)`` — an element-valued parameter from the database.

Coefficients may carry symbolic parameter factors (for relations such as
``xi * nu!(8).sigma!(11)``); they resolve to integers under an assignment.

Construction here is purely syntactic apart from two universally valid
moves: composition distributes over sums of the *right-hand* factor (left
distributivity holds for any map out of a co-H space, and all our domains
are spheres), and the Whitehead product expands bilinearly.  Distributing a
sum on the *left* of a composition is only sound through suspensions; that
is normalization's job, so ``compose`` wraps a non-trivial left factor in a
``Block`` instead of distributing it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DimensionError, GyrostabError


@dataclass(frozen=True)
class Family:
    """Shape of one generator family: instances are maps S^(n+stem) -> S^n."""

    name: str
    stem: int
    min_index: int
    susp_from: int | None  # instance at n is a suspension iff n >= susp_from
    orders: tuple[tuple[int, int], ...]  # (from_index, order); 0 = infinite
    max_index: int | None = None
    cite: str = ""

    def defined_at(self, n: int) -> bool:
        if n < self.min_index:
            return False
        return self.max_index is None or n <= self.max_index

    def is_suspension(self, n: int) -> bool:
        return self.susp_from is not None and n >= self.susp_from

    def order_at(self, n: int) -> int:
        best = None
        for from_index, order in self.orders:
            if n >= from_index and (best is None or from_index >= best[0]):
                best = (from_index, order)
        if best is None:
            raise GyrostabError(f"no declared order for {self.name}({n})")
        return best[1]

    def shiftable(self, n: int, k: int) -> bool:
        """Susp(k, fam(n)) may be replaced by fam(n+k).

        Valid when every intermediate instance is, by declaration, the
        suspension of the previous one.
        """
        if not self.defined_at(n + k):
            return False
        return all(self.is_suspension(m) for m in range(n + 1, n + k + 1))


class FamilyTable:
    def __init__(self, families=()):
        self._by_name: dict[str, Family] = {}
        for fam in families:
            self.add(fam)

    def add(self, fam: Family):
        if fam.name in self._by_name:
            raise GyrostabError(f"duplicate family {fam.name}")
        self._by_name[fam.name] = fam

    def get(self, name: str) -> Family:
        try:
            return self._by_name[name]
        except KeyError:
            raise GyrostabError(f"unknown generator family {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self._by_name.values())


@dataclass(frozen=True)
class Atom:
    family: str
    index: int


@dataclass(frozen=True)
class Susp:
    k: int
    inner: "Node"


@dataclass(frozen=True)
class Wh:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Block:
    inner: "Expr"


@dataclass(frozen=True)
class PRef:
    name: str


Node = Atom | Susp | Wh | Block | PRef


@dataclass(frozen=True)
class Term:
    coef: int
    chain: tuple[Node, ...]
    params: tuple[str, ...] = ()  # symbolic coefficient factors


@dataclass(frozen=True)
class Expr:
    terms: tuple[Term, ...]

    def is_zero(self) -> bool:
        return not self.terms


ZERO = Expr(())


# ---------------------------------------------------------------------------
# Dimensions


class DimContext:
    """Resolves node shapes; parameter dims come from the database."""

    def __init__(self, families: FamilyTable, param_dims=None):
        self.families = families
        self.param_dims = param_dims or {}
        self._dims_cache: dict = {}

    def node_dims(self, node: Node) -> tuple[int, int]:
        """(domain sphere dim, codomain sphere dim) of a node."""
        hit = self._dims_cache.get(node)
        if hit is None:
            hit = self._dims_cache[node] = self._node_dims(node)
        return hit

    def _node_dims(self, node: Node) -> tuple[int, int]:
        if isinstance(node, Atom):
            fam = self.families.get(node.family)
            if not fam.defined_at(node.index):
                raise DimensionError(
                    f"{node.family}({node.index}) outside the family's declared range"
                )
            return node.index + fam.stem, node.index
        if isinstance(node, Susp):
            d, c = self.node_dims(node.inner)
            return d + node.k, c + node.k
        if isinstance(node, Wh):
            dl, cl = self.expr_dims(node.left)
            dr, cr = self.expr_dims(node.right)
            if cl != cr:
                raise DimensionError(
                    f"Whitehead product needs a common codomain: S^{cl} vs S^{cr}"
                )
            return dl + dr - 1, cl
        if isinstance(node, Block):
            return self.expr_dims(node.inner)
        if isinstance(node, PRef):
            try:
                return self.param_dims[node.name]
            except KeyError:
                raise DimensionError(
                    f"parameter {node.name!r} has no declared element domain"
                ) from None
        raise TypeError(node)

    def chain_dims(self, chain) -> tuple[int, int]:
        dims = [self.node_dims(n) for n in chain]
        for i in range(len(dims) - 1):
            if dims[i][0] != dims[i + 1][1]:
                raise DimensionError(
                    f"cannot compose: node {i} has domain S^{dims[i][0]} but "
                    f"node {i + 1} has codomain S^{dims[i + 1][1]}"
                )
        return dims[-1][0], dims[0][1]

    def expr_dims(self, e: Expr) -> tuple[int, int]:
        """Dims of a nonzero expression (all terms must agree)."""
        if e.is_zero():
            raise DimensionError("the zero expression has no intrinsic dimensions")
        dims = {self.chain_dims(t.chain) for t in e.terms}
        if len(dims) != 1:
            raise DimensionError(f"terms with mismatched hom-sets: {sorted(dims)}")
        return dims.pop()


# ---------------------------------------------------------------------------
# Constructors


def atom(family: str, index: int) -> Expr:
    return Expr((Term(1, (Atom(family, index),)),))


def chain_expr(*nodes: Node) -> Expr:
    return Expr((Term(1, tuple(nodes)),))


def add(*exprs: Expr) -> Expr:
    terms = []
    for e in exprs:
        terms.extend(e.terms)
    return Expr(tuple(terms))


def scale(n: int, e: Expr) -> Expr:
    if n == 0:
        return ZERO
    return Expr(tuple(Term(n * t.coef, t.chain, t.params) for t in e.terms))


def neg(e: Expr) -> Expr:
    return scale(-1, e)


def compose(e1: Expr, e2: Expr, ctx: DimContext) -> Expr:
    """Formal composite e1 ∘ e2 (e2 is applied first)."""
    if e1.is_zero() or e2.is_zero():
        return ZERO
    d1 = ctx.expr_dims(e1)
    d2 = ctx.expr_dims(e2)
    if d1[0] != d2[1]:
        raise DimensionError(
            f"cannot compose: left factor S^{d1[0]} -> S^{d1[1]} with "
            f"right factor S^{d2[0]} -> S^{d2[1]}"
        )
    if len(e1.terms) == 1 and e1.terms[0].coef == 1 and not e1.terms[0].params:
        head = e1.terms[0].chain
    else:
        head = (Block(e1),)
    # distributing over the right factor's sum is left distributivity: valid.
    terms = [Term(t.coef, head + t.chain, t.params) for t in e2.terms]
    return Expr(tuple(terms))


def suspend(e: Expr, k: int) -> Expr:
    """Suspend every term; Susp markers are resolved during normalization."""
    if k <= 0:
        raise GyrostabError(f"suspension count must be positive, got {k}")
    if e.is_zero():
        return ZERO

    def susp_node(node: Node) -> Node:
        if isinstance(node, Susp):
            return Susp(node.k + k, node.inner)
        if isinstance(node, Block):
            return Block(suspend(node.inner, k))
        return Susp(k, node)

    return Expr(
        tuple(Term(t.coef, tuple(susp_node(n) for n in t.chain), t.params) for t in e.terms)
    )


def whitehead(e1: Expr, e2: Expr, ctx: DimContext) -> Expr:
    """Whitehead product, expanded bilinearly over both arguments."""
    if e1.is_zero() or e2.is_zero():
        return ZERO
    c1 = ctx.expr_dims(e1)[1]
    c2 = ctx.expr_dims(e2)[1]
    if c1 != c2:
        raise DimensionError(f"Whitehead product needs a common codomain: S^{c1} vs S^{c2}")
    terms = []
    for t1 in e1.terms:
        for t2 in e2.terms:
            node = Wh(Expr((Term(1, t1.chain),)), Expr((Term(1, t2.chain),)))
            terms.append(Term(t1.coef * t2.coef, (node,), t1.params + t2.params))
    return Expr(tuple(terms))


# ---------------------------------------------------------------------------
# Rendering (matches the dataset text syntax)


def render_node(node: Node) -> str:
    if isinstance(node, Atom):
        return f"{node.family}({node.index})"
    if isinstance(node, Susp):
        inner = render_node(node.inner)
        return f"S({inner})" if node.k == 1 else f"S^{node.k}({inner})"
    if isinstance(node, Wh):
        return f"wh({render_expr(node.left)}, {render_expr(node.right)})"
    if isinstance(node, Block):
        return f"({render_expr(node.inner)})"
    if isinstance(node, PRef):
        return node.name
    raise TypeError(node)


def render_chain(chain) -> str:
    return ".".join(render_node(n) for n in chain)


def render_term(t: Term) -> str:
    factors = list(t.params)
    body = render_chain(t.chain)
    coef = t.coef
    parts = []
    if coef != 1 or (not factors and not t.chain):
        parts.append(str(coef))
    parts.extend(factors)
    if body:
        parts.append(body)
    return "*".join(parts) if parts else body


def render_expr(e: Expr) -> str:
    if e.is_zero():
        return "0"
    out = []
    for i, t in enumerate(e.terms):
        text = render_term(t if t.coef > 0 or t.coef == 0 else Term(-t.coef, t.chain, t.params))
        if i == 0:
            out.append(text if t.coef > 0 else f"-{text}")
        else:
            out.append(f"+ {text}" if t.coef > 0 else f"- {text}")
    return " ".join(out)
