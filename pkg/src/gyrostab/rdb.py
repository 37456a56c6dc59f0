"""Relation-database text format: parser, schema, serializer.

The format is line-oriented UTF-8 with ``#`` comments.  One declaration per
line; the keywords are ``family``, ``group``, ``subgroup``, ``rel``,
``param``, ``check`` (in ``toda.rdb``) and ``case`` (in ``cases.rdb``).

Expression syntax: composition ``.``, suspension ``S(...)``/``S^k(...)``,
Whitehead product ``wh(a, b)``, scalar ``n*expr`` (scalars may include
declared parameter names), sum ``+``/``-``, zero ``0``.  Generator atoms are
``family(index)``; ``!`` marks a 2-primary component (``nu!`` for the
order-8 part of ``nu``) and ``Snu'``/``Ssigma'`` are the pre-suspended
aliases for the primed classes.

Parsing is total: it never stops at the first problem, and every error
carries a line, a column and a one-line diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .errors import DimensionError, GyrostabError
from .abelian import GroupPresentation

KEYWORDS = ("family", "group", "subgroup", "rel", "param", "check", "case")
PLANES = ("CP2", "HP2", "OP2")
PLANE_M = {"CP2": 2, "HP2": 4, "OP2": 8}


@dataclass(frozen=True)
class ParseError:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"line {self.line}, col {self.col}: {self.message}"


# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class GroupDecl:
    from_dim: int
    to_dim: int
    presentation: GroupPresentation
    basis_chains: tuple[tuple, ...]  # node chains, parallel to presentation.factors
    suspension_subgroup: tuple[str, ...] | None = None
    cite: str = ""
    susp_cite: str = ""
    line: int = field(default=0, compare=False)

    def key(self):
        return (self.from_dim, self.to_dim)


@dataclass(frozen=True)
class RelationDecl:
    lhs_chain: tuple  # nodes of the single unit-coefficient left-hand term
    rhs: ex.Expr
    cite: str = ""
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ParameterDecl:
    name: str
    kind: str  # "int" or "elem"
    int_values: tuple[int, ...] = ()
    elem_values: tuple[ex.Expr, ...] = ()
    cite: str = ""
    line: int = field(default=0, compare=False)

    def values(self):
        return self.int_values if self.kind == "int" else self.elem_values


@dataclass(frozen=True)
class CheckDecl:
    lhs: ex.Expr
    rhs: ex.Expr
    when: tuple[tuple[str, int], ...] = ()
    cite: str = ""
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CaseDecl:
    plane: str
    m: int
    k: int
    f_chain: tuple  # attaching class of the projective plane, e.g. sigma(8)
    twist_order: int  # 0 for Z, n for Z/n; twist group of pi_{k-1}(SO(2m))
    image_full: bool
    image_elements: tuple[ex.Expr, ...] = ()
    params: tuple[str, ...] = ()
    cite: str = ""
    line: int = field(default=0, compare=False)

    @property
    def case_id(self):
        return f"{self.plane}:k={self.k}"

    def twist_group(self) -> GroupPresentation:
        if self.twist_order == 1:
            return GroupPresentation((), name=f"pi_{self.k - 1}(SO({2 * self.m}))")
        return GroupPresentation(
            (("tau", self.twist_order),), name=f"pi_{self.k - 1}(SO({2 * self.m}))"
        )


class Database:
    """Parsed dataset: families, groups, relations, parameters, cases."""

    def __init__(self):
        self.families = ex.FamilyTable()
        self.groups: dict[tuple[int, int], GroupDecl] = {}
        self.relations: list[RelationDecl] = []
        self.params: dict[str, ParameterDecl] = {}
        self.checks: list[CheckDecl] = []
        self.cases: dict[tuple[str, int], CaseDecl] = {}
        # chain tuple -> (group key, factor index); built as groups are added
        self.basis_index: dict[tuple, tuple[tuple[int, int], int]] = {}

    # -- structure ----------------------------------------------------------

    def add_group(self, decl: GroupDecl):
        self.groups[decl.key()] = decl
        for i, chain in enumerate(decl.basis_chains):
            self.basis_index[chain] = (decl.key(), i)

    def group_for(self, from_dim: int, to_dim: int) -> GroupDecl:
        try:
            return self.groups[(from_dim, to_dim)]
        except KeyError:
            raise GyrostabError(
                f"hom-group pi({from_dim} -> {to_dim}) is not declared in the dataset"
            ) from None

    def has_group(self, from_dim: int, to_dim: int) -> bool:
        return (from_dim, to_dim) in self.groups

    def basis_order(self, chain: tuple) -> int | None:
        """Declared order of a chain that is some group's basis composite."""
        hit = self.basis_index.get(chain)
        if hit is None:
            return None
        key, i = hit
        return self.groups[key].presentation.factors[i][1]

    def dim_context(self) -> ex.DimContext:
        cached = getattr(self, "_dim_ctx", None)
        if cached is not None and cached[0] == len(self.params):
            return cached[1]
        param_dims = {}
        for p in self.params.values():
            if p.kind == "elem":
                dims = {
                    self.dim_context_plain().expr_dims(v)
                    for v in p.elem_values
                    if not v.is_zero()
                }
                if len(dims) == 1:
                    param_dims[p.name] = dims.pop()
        ctx = ex.DimContext(self.families, param_dims)
        self._dim_ctx = (len(self.params), ctx)
        return ctx

    def dim_context_plain(self) -> ex.DimContext:
        return ex.DimContext(self.families)

    def __eq__(self, other):
        if not isinstance(other, Database):
            return NotImplemented
        return (
            list(self.families) == list(other.families)
            and self.groups == other.groups
            and self.relations == other.relations
            and self.params == other.params
            and self.checks == other.checks
            and self.cases == other.cases
        )


# ---------------------------------------------------------------------------
# Lexer


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_IDENT_CONT = _IDENT_START | set("0123456789_'!")
_PUNCT = set("()<>{}=+-*/.,:^")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, STR, or the punctuation character itself
    value: str
    line: int
    col: int


def lex_line(text: str, line_no: int, errors: list[ParseError]) -> list[Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "#":
            break
        if c.isspace():
            i += 1
            continue
        col = i + 1
        if c in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(Token("IDENT", text[i:j], line_no, col))
            i = j
        elif c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line_no, col))
            i = j
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                errors.append(ParseError(line_no, col, "unterminated string"))
                break
            tokens.append(Token("STR", text[i + 1 : j], line_no, col))
            i = j + 1
        elif c in _PUNCT:
            tokens.append(Token(c, c, line_no, col))
            i += 1
        else:
            errors.append(ParseError(line_no, col, f"unexpected character {c!r}"))
            i += 1
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _LineParser:
    """Recursive descent over one declaration line."""

    def __init__(self, tokens: list[Token], db: Database, errors: list[ParseError], line_no: int):
        self.toks = tokens
        self.pos = 0
        self.db = db
        self.errors = errors
        self.line_no = line_no

    # -- token plumbing ------------------------------------------------------

    def peek(self, ahead=0) -> Token | None:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _Bail(self.err("unexpected end of line"))
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            got = "end of line" if tok is None else f"{tok.value!r}"
            raise _Bail(self.err(f"expected {kind!r}, got {got}"))
        return self.next()

    def expect_ident(self, value: str) -> Token:
        tok = self.expect("IDENT")
        if tok.value != value:
            raise _Bail(self.err(f"expected {value!r}, got {tok.value!r}", tok))
        return tok

    def at_ident(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "IDENT" and tok.value == value

    def err(self, message: str, tok: Token | None = None) -> ParseError:
        if tok is None:
            tok = self.peek() or (self.toks[-1] if self.toks else None)
        col = tok.col if tok else 1
        e = ParseError(self.line_no, col, message)
        self.errors.append(e)
        return e

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise _Bail(self.err(f"trailing input starting at {tok.value!r}", tok))

    # -- shared pieces --------------------------------------------------------

    def parse_int(self, allow_sign=False) -> int:
        sign = 1
        if allow_sign and self.peek() and self.peek().kind in "+-":
            sign = -1 if self.next().kind == "-" else 1
        return sign * int(self.expect("INT").value)

    def parse_cite(self) -> str:
        if self.at_ident("cite"):
            self.next()
            return self.expect("STR").value
        return ""

    def parse_pi_key(self) -> tuple[int, int]:
        self.expect_ident("pi")
        self.expect("(")
        from_dim = self.parse_int()
        self.expect("-")
        self.expect(">")
        to_dim = self.parse_int()
        self.expect(")")
        return from_dim, to_dim

    def parse_cyclic_order(self) -> int:
        tok = self.expect("IDENT")
        if tok.value != "Z":
            raise _Bail(self.err("cyclic factor must be Z or Z/n", tok))
        if self.peek() and self.peek().kind == "/":
            self.next()
            return self.parse_int()
        return 0

    # -- expressions -----------------------------------------------------------

    def parse_expr(self) -> ex.Expr:
        terms = []
        sign = 1
        tok = self.peek()
        if tok and tok.kind == "-":
            self.next()
            sign = -1
        terms.extend(self._parse_term(sign))
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in "+-":
                break
            sign = -1 if self.next().kind == "-" else 1
            terms.extend(self._parse_term(sign))
        return ex.Expr(tuple(terms))

    def _parse_term(self, sign: int) -> list[ex.Term]:
        coef = sign
        params: list[str] = []
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind == "INT" and self._tok_after_is("*"):
                coef *= int(self.next().value)
                self.next()  # '*'
                continue
            if (
                tok.kind == "IDENT"
                and tok.value in self.db.params
                and self._tok_after_is("*")
            ):
                params.append(self.next().value)
                self.next()  # '*'
                continue
            break
        tok = self.peek()
        if tok is not None and tok.kind == "INT":
            value = int(self.next().value)
            if value == 0:
                return []  # the zero class contributes no terms
            if value == 1:
                raise _Bail(self.err("bare scalar term; write n*chain", tok))
            raise _Bail(self.err(f"bare integer {value} is not a homotopy class", tok))
        if (
            tok is not None
            and tok.kind == "IDENT"
            and tok.value in self.db.params
            and not self._tok_after_is("(")
        ):
            name = self.next().value
            return [ex.Term(coef, (ex.PRef(name),), tuple(params))]
        chain = self.parse_chain()
        if len(chain) == 1 and isinstance(chain[0], ex.Block):
            # a scalar multiple of a grouped sum is just a sum of scalar
            # multiples; flatten so rendering round-trips
            inner = chain[0].inner
            return [
                ex.Term(coef * t.coef, t.chain, tuple(params) + t.params)
                for t in inner.terms
            ]
        return [ex.Term(coef, chain, tuple(params))]

    def _tok_after_is(self, kind: str) -> bool:
        tok = self.peek(1)
        return tok is not None and tok.kind == kind

    def parse_chain(self) -> tuple:
        nodes = [self.parse_node()]
        while self.peek() and self.peek().kind == ".":
            self.next()
            nodes.append(self.parse_node())
        return tuple(nodes)

    def parse_node(self) -> ex.Node:
        tok = self.peek()
        if tok is not None and tok.kind == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return self._expr_to_node(inner, tok)
        tok = self.expect("IDENT")
        if tok.value == "wh":
            self.expect("(")
            left = self.parse_expr()
            self.expect(",")
            right = self.parse_expr()
            self.expect(")")
            return self._expr_to_node(ex.whitehead(left, right, self.db.dim_context()), tok)
        if tok.value == "S" and self.peek() and self.peek().kind in ("^", "("):
            k = 1
            if self.peek().kind == "^":
                self.next()
                k = self.parse_int()
            self.expect("(")
            inner = self.parse_expr()
            self.expect(")")
            return self._expr_to_node(ex.suspend(inner, k), tok)
        if tok.value not in self.db.families:
            raise _Bail(self.err(f"unknown generator family {tok.value!r}", tok))
        self.expect("(")
        index = self.parse_int()
        self.expect(")")
        return ex.Atom(tok.value, index)

    def _expr_to_node(self, e: ex.Expr, tok: Token) -> ex.Node:
        if e.is_zero():
            raise _Bail(self.err("a vanishing class cannot appear inside a chain", tok))
        if len(e.terms) == 1 and e.terms[0].coef == 1 and not e.terms[0].params:
            chain = e.terms[0].chain
            if len(chain) == 1:
                return chain[0]
        return ex.Block(e)

    # -- declarations ------------------------------------------------------------

    def parse_decl(self):
        tok = self.expect("IDENT")
        if tok.value not in KEYWORDS:
            raise _Bail(self.err(f"unknown keyword {tok.value!r}", tok))
        getattr(self, f"_decl_{tok.value}")()

    def _decl_family(self):
        name = self.expect("IDENT").value
        if name in ("S", "wh") or name in self.db.families:
            raise _Bail(self.err(f"family name {name!r} is reserved or duplicated"))
        self.expect_ident("stem")
        stem = self.parse_int()
        self.expect_ident("min")
        min_index = self.parse_int()
        max_index = None
        if self.at_ident("max"):
            self.next()
            max_index = self.parse_int()
        self.expect_ident("susp")
        if self.peek() and self.peek().kind == "-":
            self.next()
            susp_from = None
        else:
            susp_from = self.parse_int()
        self.expect_ident("order")
        orders = []
        while self.peek() and self.peek().kind == "INT":
            from_index = self.parse_int()
            self.expect(":")
            tok = self.peek()
            if tok and tok.kind == "IDENT" and tok.value == "Z":
                self.next()
                orders.append((from_index, 0))
            else:
                orders.append((from_index, self.parse_int()))
        if not orders:
            raise _Bail(self.err("family needs at least one order entry"))
        cite = self.parse_cite()
        self.done()
        self.db.families.add(
            ex.Family(name, stem, min_index, susp_from, tuple(orders), max_index, cite)
        )

    def _decl_group(self):
        from_dim, to_dim = self.parse_pi_key()
        if (from_dim, to_dim) in self.db.groups:
            raise _Bail(self.err(f"duplicate group declaration pi({from_dim} -> {to_dim})"))
        self.expect("=")
        factors = []
        chains = []
        ctx = self.db.dim_context_plain()
        while True:
            order = self.parse_cyclic_order()
            self.expect("<")
            chain = self.parse_chain()
            self.expect(">")
            dims = ctx.chain_dims(chain)
            if dims != (from_dim, to_dim):
                raise _Bail(
                    self.err(
                        f"basis composite {ex.render_chain(chain)} has dims "
                        f"S^{dims[0]} -> S^{dims[1]}, expected S^{from_dim} -> S^{to_dim}"
                    )
                )
            name = ex.render_chain(chain)
            factors.append((name, order))
            chains.append(chain)
            if self.peek() and self.peek().kind == "+":
                self.next()
                continue
            break
        cite = self.parse_cite()
        self.done()
        pres = GroupPresentation(tuple(factors), name=f"pi({from_dim} -> {to_dim})")
        self.db.add_group(
            GroupDecl(from_dim, to_dim, pres, tuple(chains), None, cite, line=self.line_no)
        )

    def _decl_subgroup(self):
        self.expect_ident("susp")
        from_dim, to_dim = self.parse_pi_key()
        decl = self.db.groups.get((from_dim, to_dim))
        if decl is None:
            raise _Bail(self.err(f"subgroup of undeclared group pi({from_dim} -> {to_dim})"))
        if decl.suspension_subgroup is not None:
            raise _Bail(self.err("duplicate suspension subgroup declaration"))
        self.expect("=")
        self.expect("{")
        names = []
        while True:
            chain = self.parse_chain()
            name = ex.render_chain(chain)
            if name not in decl.presentation.generator_names():
                raise _Bail(self.err(f"{name} is not a basis composite of the group"))
            names.append(name)
            if self.peek() and self.peek().kind == ",":
                self.next()
                continue
            break
        self.expect("}")
        cite = self.parse_cite()
        self.done()
        new = GroupDecl(
            decl.from_dim,
            decl.to_dim,
            decl.presentation,
            decl.basis_chains,
            tuple(names),
            decl.cite,
            cite,
            decl.line,
        )
        self.db.groups[decl.key()] = new

    def _decl_rel(self):
        lhs = self.parse_expr()
        if len(lhs.terms) != 1 or lhs.terms[0].coef != 1 or lhs.terms[0].params:
            raise _Bail(self.err("relation left side must be a single unit-coefficient chain"))
        self.expect("=")
        rhs = self.parse_expr()
        cite = self.parse_cite()
        self.done()
        ctx = self.db.dim_context()
        lhs_dims = ctx.chain_dims(lhs.terms[0].chain)
        if not rhs.is_zero():
            rhs_dims = ctx.expr_dims(rhs)
            if lhs_dims != rhs_dims:
                raise _Bail(
                    self.err(
                        f"relation sides live in different hom-sets: "
                        f"S^{lhs_dims[0]} -> S^{lhs_dims[1]} vs S^{rhs_dims[0]} -> S^{rhs_dims[1]}"
                    )
                )
        self.db.relations.append(
            RelationDecl(lhs.terms[0].chain, rhs, cite, self.line_no)
        )

    def _decl_param(self):
        name = self.expect("IDENT").value
        if name in self.db.params:
            raise _Bail(self.err(f"duplicate parameter {name!r}"))
        self.expect_ident("in")
        self.expect("{")
        ints: list[int] = []
        elems: list[ex.Expr] = []
        saw_chain = False
        while True:
            tok = self.peek()
            if tok and (tok.kind in "+-" or tok.kind == "INT") and self._scalar_ahead():
                ints.append(self.parse_int(allow_sign=True))
            else:
                elems.append(self.parse_expr())
                saw_chain = True
            if self.peek() and self.peek().kind == ",":
                self.next()
                continue
            break
        self.expect("}")
        cite = self.parse_cite()
        self.done()
        if saw_chain:
            values = [ex.ZERO if v == 0 else None for v in ints]
            if None in values:
                raise _Bail(self.err("element-valued domain may only mix in 0"))
            all_elems = tuple(values) + tuple(elems) if values else tuple(elems)
            decl = ParameterDecl(name, "elem", (), all_elems, cite, self.line_no)
        else:
            decl = ParameterDecl(name, "int", tuple(ints), (), cite, self.line_no)
        self.db.params[name] = decl

    def _scalar_ahead(self) -> bool:
        # an INT (optionally signed) followed directly by ',' or '}' is a scalar
        i = 1 if self.peek().kind in "+-" else 0
        tok = self.peek(i)
        after = self.peek(i + 1)
        return (
            tok is not None
            and tok.kind == "INT"
            and after is not None
            and after.kind in (",", "}")
        )

    def _decl_check(self):
        lhs = self.parse_expr()
        self.expect("=")
        rhs = self.parse_expr()
        when = []
        if self.at_ident("when"):
            self.next()
            while True:
                pname = self.expect("IDENT").value
                if pname not in self.db.params:
                    raise _Bail(self.err(f"unknown parameter {pname!r}"))
                self.expect("=")
                when.append((pname, self.parse_int(allow_sign=True)))
                if self.peek() and self.peek().kind == ",":
                    self.next()
                    continue
                break
        cite = self.parse_cite()
        self.done()
        ctx = self.db.dim_context()
        if not lhs.is_zero() and not rhs.is_zero():
            if ctx.expr_dims(lhs) != ctx.expr_dims(rhs):
                raise _Bail(self.err("check sides live in different hom-sets"))
        self.db.checks.append(CheckDecl(lhs, rhs, tuple(when), cite, self.line_no))

    def _decl_case(self):
        plane = self.expect("IDENT").value
        if plane not in PLANES:
            raise _Bail(self.err(f"plane must be one of {PLANES}, got {plane!r}"))
        self.expect_ident("m")
        m = self.parse_int()
        if m != PLANE_M[plane]:
            raise _Bail(self.err(f"{plane} has m = {PLANE_M[plane]}, not {m}"))
        self.expect_ident("k")
        k = self.parse_int()
        if (plane, k) in self.db.cases:
            raise _Bail(self.err(f"duplicate case {plane} k={k}"))
        self.expect_ident("f")
        f_chain = self.parse_chain()
        ctx = self.db.dim_context()
        if ctx.chain_dims(f_chain) != (2 * m - 1, m):
            raise _Bail(self.err(f"attaching class must map S^{2 * m - 1} -> S^{m}"))
        self.expect_ident("twist")
        tok = self.peek()
        if tok and tok.kind == "INT" and tok.value == "0":
            self.next()
            twist_order = 1
        else:
            twist_order = self.parse_cyclic_order()
        self.expect_ident("image")
        if self.at_ident("full"):
            self.next()
            image_full, image_elements = True, ()
        else:
            self.expect("{")
            elems = []
            while True:
                elems.append(self.parse_expr())
                if self.peek() and self.peek().kind == ",":
                    self.next()
                    continue
                break
            self.expect("}")
            image_full, image_elements = False, tuple(elems)
        self.expect_ident("params")
        self.expect("{")
        names = []
        while self.peek() and self.peek().kind == "IDENT":
            pname = self.next().value
            if pname not in self.db.params:
                raise _Bail(self.err(f"unknown parameter {pname!r}"))
            names.append(pname)
            if self.peek() and self.peek().kind == ",":
                self.next()
        self.expect("}")
        cite = self.parse_cite()
        self.done()
        for e in image_elements:
            dims = ctx.expr_dims(e)
            if dims != (2 * m + k - 2, 2 * m - 1):
                raise _Bail(
                    self.err(
                        f"twist image element must live in pi({2 * m + k - 2} -> {2 * m - 1})"
                    )
                )
        self.db.cases[(plane, k)] = CaseDecl(
            plane, m, k, f_chain, twist_order, image_full, image_elements,
            tuple(names), cite, self.line_no,
        )


class _Bail(Exception):
    """Abandon the current line after recording its error."""


def parse(text: str, db: Database | None = None) -> tuple[Database, list[ParseError]]:
    """Parse declarations into a database, collecting all errors."""
    if db is None:
        db = Database()
    errors: list[ParseError] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = lex_line(raw, line_no, errors)
        if not tokens:
            continue
        parser = _LineParser(tokens, db, errors, line_no)
        try:
            parser.parse_decl()
        except _Bail:
            continue
        except (GyrostabError, DimensionError) as e:
            errors.append(ParseError(line_no, 1, str(e)))
    return db, errors


def parse_files(*texts: str) -> tuple[Database, list[ParseError]]:
    db = Database()
    errors: list[ParseError] = []
    for text in texts:
        _, errs = parse(text, db)
        errors.extend(errs)
    return db, errors


def assignments(db: Database, restrict=None) -> list[dict]:
    """Cartesian product of parameter domains, in declaration order.

    ``restrict`` limits the product to the named parameters (an empty
    collection yields exactly one empty assignment).
    """
    import itertools

    if restrict is None:
        names = list(db.params)
    else:
        names = [n for n in db.params if n in set(restrict)]
        missing = set(restrict) - set(names)
        if missing:
            raise GyrostabError(f"undeclared parameters: {sorted(missing)}")
    domains = [db.params[n].values() for n in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*domains)]


# ---------------------------------------------------------------------------
# Serializer (canonical formatting: one declaration per line, LF endings)


def _fmt_cite(cite: str) -> str:
    return f' cite "{cite}"' if cite else ""


def _fmt_cyclic(order: int) -> str:
    return "Z" if order == 0 else f"Z/{order}"


def serialize_family(fam: ex.Family) -> str:
    parts = [f"family {fam.name} stem {fam.stem} min {fam.min_index}"]
    if fam.max_index is not None:
        parts.append(f"max {fam.max_index}")
    parts.append(f"susp {fam.susp_from if fam.susp_from is not None else '-'}")
    orders = " ".join(
        f"{i}:{'Z' if order == 0 else order}" for i, order in fam.orders
    )
    parts.append(f"order {orders}")
    return " ".join(parts) + _fmt_cite(fam.cite)


def serialize_group(decl: GroupDecl) -> list[str]:
    factors = " + ".join(
        f"{_fmt_cyclic(order)}<{name}>" for name, order in decl.presentation.factors
    )
    lines = [f"group pi({decl.from_dim} -> {decl.to_dim}) = {factors}" + _fmt_cite(decl.cite)]
    if decl.suspension_subgroup is not None:
        names = ", ".join(decl.suspension_subgroup)
        lines.append(
            f"subgroup susp pi({decl.from_dim} -> {decl.to_dim}) = {{ {names} }}"
            + _fmt_cite(decl.susp_cite)
        )
    return lines

def serialize_rel(decl: RelationDecl) -> str:
    return f"rel {ex.render_chain(decl.lhs_chain)} = {ex.render_expr(decl.rhs)}" + _fmt_cite(decl.cite)


def serialize_param(decl: ParameterDecl) -> str:
    if decl.kind == "int":
        values = ", ".join(str(v) for v in decl.int_values)
    else:
        values = ", ".join(ex.render_expr(v) for v in decl.elem_values)
    return f"param {decl.name} in {{ {values} }}" + _fmt_cite(decl.cite)


def serialize_check(decl: CheckDecl) -> str:
    text = f"check {ex.render_expr(decl.lhs)} = {ex.render_expr(decl.rhs)}"
    if decl.when:
        text += " when " + ", ".join(f"{n}={v}" for n, v in decl.when)
    return text + _fmt_cite(decl.cite)


def serialize_case(decl: CaseDecl) -> str:
    twist = "0" if decl.twist_order == 1 else _fmt_cyclic(decl.twist_order)
    if decl.image_full:
        image = "full"
    else:
        image = "{ " + ", ".join(ex.render_expr(e) for e in decl.image_elements) + " }"
    params = "{ " + ", ".join(decl.params) + " }" if decl.params else "{ }"
    return (
        f"case {decl.plane} m {decl.m} k {decl.k} f {ex.render_chain(decl.f_chain)} "
        f"twist {twist} image {image} params {params}" + _fmt_cite(decl.cite)
    )


def serialize(db: Database) -> dict[str, str]:
    """Canonical text for the dataset, split as it ships on disk."""
    # parameters precede groups and relations so re-parsing resolves them
    toda: list[str] = []
    for fam in db.families:
        toda.append(serialize_family(fam))
    for p in db.params.values():
        toda.append(serialize_param(p))
    for decl in sorted(db.groups.values(), key=lambda d: d.line):
        toda.extend(serialize_group(decl))
    for rel in db.relations:
        toda.append(serialize_rel(rel))
    for c in db.checks:
        toda.append(serialize_check(c))
    cases = [serialize_case(c) for c in sorted(db.cases.values(), key=lambda d: d.line)]
    return {
        "toda.rdb": "\n".join(toda) + "\n",
        "cases.rdb": "\n".join(cases) + "\n",
    }
