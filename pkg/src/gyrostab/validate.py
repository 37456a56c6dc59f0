"""Semantic validation of a parsed relation database.

Checks, in order: single-atom basis factors agree with their family's
declared order; every declared order annihilates its basis element; both
sides of every relation anchored in a declared hom-group normalize to the
same element (under every assignment of the parameters involved); subgroup
generators lie in their ambient group; each case matches the Bott table for
pi_{k-1}(SO(2m)) and its twist image normalizes; every ``check`` assertion
holds under every relevant assignment.

Failures are report records, never exceptions: the validator's job is to
list everything that is wrong with a dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from . import rdb
from .abelian import GroupElement
from .errors import GyrostabError, UnassignedParameterError
from .rewrite import normalize


@dataclass(frozen=True)
class Failure:
    kind: str
    location: str
    detail: str

    def to_json(self):
        return {"kind": self.kind, "location": self.location, "detail": self.detail}

    def __str__(self):
        return f"[{self.kind}] {self.location}: {self.detail}"


@dataclass
class Report:
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self):
        return {"ok": self.ok, "failures": [f.to_json() for f in self.failures]}


def _params_of_expr(e: ex.Expr) -> set:
    names = set()

    def walk_node(node):
        if isinstance(node, ex.PRef):
            names.add(node.name)
        elif isinstance(node, ex.Susp):
            walk_node(node.inner)
        elif isinstance(node, ex.Block):
            walk_expr(node.inner)
        elif isinstance(node, ex.Wh):
            walk_expr(node.left)
            walk_expr(node.right)

    def walk_expr(e):
        for t in e.terms:
            names.update(t.params)
            for node in t.chain:
                walk_node(node)

    walk_expr(e)
    return names


def _assert_equal_everywhere(db, lhs, rhs, gdecl, names, pinned):
    """Normalize both sides under every assignment of the named parameters,
    growing the parameter set when normalization consults one the static
    scan could not see (a parameterized relation applied along the way)."""
    names = set(names) - set(pinned)
    while True:
        try:
            for asg in rdb.assignments(db, restrict=sorted(names)):
                asg = {**asg, **pinned}
                left = normalize(lhs, db, asg=asg, group=gdecl)
                right = normalize(rhs, db, asg=asg, group=gdecl)
                if left != right:
                    return (
                        f"{ex.render_expr(lhs)} = {left.describe()} but "
                        f"{ex.render_expr(rhs)} = {right.describe()} "
                        f"(assignment {asg})"
                    )
            return None
        except UnassignedParameterError as e:
            if e.name in names or e.name in pinned:
                raise
            names.add(e.name)


def _bott_expected(k: int) -> int:
    """Twist group order for pi_{k-1}(SO(2m)): 0 is Z, 1 is trivial."""
    r = k % 8
    if r in (1, 2):
        return 2
    if r in (0, 4):
        return 0
    return 1


def validate(db: rdb.Database) -> Report:
    failures = []
    ctx = db.dim_context()

    # family order vs group factor order on single-atom basis composites
    for key, decl in sorted(db.groups.items()):
        for chain, (name, order) in zip(decl.basis_chains, decl.presentation.factors):
            if len(chain) == 1 and isinstance(chain[0], ex.Atom):
                a = chain[0]
                declared = db.families.get(a.family).order_at(a.index)
                if declared != order:
                    failures.append(Failure(
                        "order-mismatch",
                        f"group pi({key[0]} -> {key[1]})",
                        f"factor {name} has order {order} but family {a.family} "
                        f"declares order {declared or 'Z'} at index {a.index}; "
                        f"{order}*{name} = 0 is inconsistent with relation usage",
                    ))

    # declared order annihilates each basis element
    for key, decl in sorted(db.groups.items()):
        pres = decl.presentation
        for i, (name, order) in enumerate(pres.factors):
            if order == 0:
                continue
            if not pres.basis_element(i).scale(order).is_zero():
                failures.append(Failure(
                    "order-annihilation",
                    f"group pi({key[0]} -> {key[1]})",
                    f"{order}*{name} does not vanish",
                ))

    # relation sides agree wherever the hom-group is declared
    for rel in db.relations:
        try:
            dims = ctx.chain_dims(rel.lhs_chain)
        except GyrostabError as e:
            failures.append(Failure("relation", f"line {rel.line}", str(e)))
            continue
        if not db.has_group(*dims):
            continue  # exercised indirectly through checks in declared groups
        gdecl = db.group_for(*dims)
        lhs = ex.Expr((ex.Term(1, rel.lhs_chain),))
        names = _params_of_expr(lhs) | _params_of_expr(rel.rhs)
        try:
            problem = _assert_equal_everywhere(db, lhs, rel.rhs, gdecl, names, {})
        except GyrostabError as e:
            problem = f"{ex.render_chain(rel.lhs_chain)}: {e}"
        if problem:
            failures.append(Failure("relation", f"line {rel.line}", problem))

    # subgroup generators lie in their ambient group
    for key, decl in sorted(db.groups.items()):
        if decl.suspension_subgroup is None:
            continue
        names = decl.presentation.generator_names()
        for name in decl.suspension_subgroup:
            if name not in names:
                failures.append(Failure(
                    "subgroup", f"group pi({key[0]} -> {key[1]})",
                    f"{name} is not a basis composite of the ambient group",
                ))

    # cases: Bott table, k range, twist image normalizes, parameters declared
    for (plane, k), case in sorted(db.cases.items()):
        loc = f"case {plane} k={k}"
        if not 2 <= k <= 2 * case.m - 2:
            failures.append(Failure(
                "case", loc, f"k={k} outside the valid range [2, {2 * case.m - 2}]"
            ))
        expected = _bott_expected(k)
        if case.twist_order != expected:
            have = {0: "Z", 1: "trivial"}.get(case.twist_order, f"Z/{case.twist_order}")
            want = {0: "Z", 1: "trivial"}.get(expected, f"Z/{expected}")
            failures.append(Failure(
                "bott-table", loc,
                f"twist group {have} contradicts the Bott table ({want} for k = {k % 8} mod 8)",
            ))
        for pname in case.params:
            if pname not in db.params:
                failures.append(Failure("case", loc, f"undeclared parameter {pname!r}"))
        w_dims = (2 * case.m + k - 2, 2 * case.m - 1)
        if not db.has_group(*w_dims):
            failures.append(Failure(
                "case", loc, f"twist class group pi({w_dims[0]} -> {w_dims[1]}) is not declared"
            ))
            continue
        wdecl = db.group_for(*w_dims)
        for e in case.image_elements:
            try:
                normalize(e, db, group=wdecl)
            except GyrostabError as err:
                failures.append(Failure("case", loc, f"twist image element: {err}"))

    # check assertions
    for chk in db.checks:
        names = _params_of_expr(chk.lhs) | _params_of_expr(chk.rhs)
        pinned = dict(chk.when)
        gdecl = None
        for side in (chk.lhs, chk.rhs):
            if not side.is_zero():
                try:
                    gdecl = db.group_for(*ctx.expr_dims(side))
                except GyrostabError as e:
                    failures.append(Failure("check", f"line {chk.line}", str(e)))
                    gdecl = None
                break
        if gdecl is None:
            continue
        try:
            problem = _assert_equal_everywhere(db, chk.lhs, chk.rhs, gdecl, names, pinned)
        except GyrostabError as e:
            problem = str(e)
        if problem:
            failures.append(Failure("check", f"line {chk.line}", problem))

    return Report(failures)
