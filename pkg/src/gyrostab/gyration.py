"""The gyration decision procedure.

For a projective plane with cells in dimensions m and 2m, attaching class f,
and gyration index k, the top cell of a gyration attaches along a class
determined by a triple of coefficients: the twisted part ``f o taubar``, the
``S^(k-1) f`` part, and the Whitehead part ``[i1, i2]``.  Two twistings give
homotopy-equivalent gyrations exactly when some lambda in pi_{m+k-1}(S^m)
satisfies

    f o taubar + lambda o S^(k-1) f + [iota_m, lambda]  =  (+-) f o omegabar.

The map lambda -> lambda o S^(k-1) f + [iota_m, lambda] is additive (the
composition factor is a suspension, and Whitehead products are bilinear), so
its image is spanned by the per-generator images; witnesses are found by
precomputing that reachable set and looking up the required difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from . import rdb
from .abelian import GroupElement, orbit_partition, reachable_set
from .errors import GyrostabError
from .rewrite import Trace, normalize

SPHERE_NOTE = "top-cell attaches to a point"
TRIVIAL_NOTE = "trivial twisting group (Bott periodicity)"
FULL_IMAGE_NOTE = (
    "twist classes labeled by coordinates; image of J recorded as the full group "
    "(dataset assumption `image full`)"
)


@dataclass(frozen=True)
class AttachingMap:
    """Coefficients (a, b, c) of i1 o (-), i2 o S^(k-1) f and [i1, i2]."""

    m: int
    k: int
    a: GroupElement
    b: int = 1
    c: int = 1


@dataclass(frozen=True)
class SelfEquivalence:
    sign_i: int  # restriction to S^m is (-1)^sign_i
    sign_j: int  # top-sphere degree is (-1)^sign_j
    lam: GroupElement  # the pi_{m+k-1}(S^m) component


@dataclass(frozen=True)
class Witness:
    lam: GroupElement
    sign: int  # the criterion holds against sign * (f o omegabar)

    def to_json(self):
        return {"lambda": list(self.lam.coords), "sign": self.sign}


def _fmt_asg(asg: dict) -> str:
    if not asg:
        return "(no parameters)"
    parts = []
    for name, value in asg.items():
        if isinstance(value, ex.Expr):
            parts.append(f"{name}={ex.render_expr(value)}")
        else:
            parts.append(f"{name}={value:+d}" if name.startswith("sign") else f"{name}={value}")
    return ", ".join(parts)


def _asg_json(asg: dict) -> dict:
    return {
        name: (ex.render_expr(v) if isinstance(v, ex.Expr) else v)
        for name, v in asg.items()
    }


class CaseEngine:
    """All per-case machinery: groups, images, reachable sets, witnesses."""

    def __init__(self, case: rdb.CaseDecl, db: rdb.Database):
        m, k = case.m, case.k
        if not 2 <= k <= 2 * m - 2:
            raise GyrostabError(
                f"index k={k} is outside [2, {2 * m - 2}]: the attaching-map "
                f"description needs 2 <= k <= 2m-2"
            )
        self.case = case
        self.db = db
        self.m, self.k = m, k
        self.W = db.group_for(2 * m + k - 2, 2 * m - 1)  # twist classes taubar
        self.T = db.group_for(2 * m + k - 2, m)  # where the criterion lives
        self.L = db.group_for(m + k - 1, m)  # where lambda lives
        self.ctx = db.dim_context()
        self.f_expr = ex.chain_expr(*case.f_chain)
        self.susp_f = ex.suspend(self.f_expr, k - 1)
        self.iota = ex.atom("iota", m)
        self._reach_cache: dict = {}
        self._fmap_cache: dict = {}
        self._fimg_cache: dict = {}
        self._lam_cache: dict = {}

    # -- basic conversions ----------------------------------------------------

    def element_expr(self, e: GroupElement, gdecl: rdb.GroupDecl) -> ex.Expr:
        terms = [
            ex.Term(c, chain)
            for c, chain in zip(e.normalized().coords, gdecl.basis_chains)
            if c != 0
        ]
        return ex.Expr(tuple(terms))

    def f_image(self, tau_bar: GroupElement, asg: dict, trace=None) -> GroupElement:
        """normalize(f o taubar) in the target group."""
        key = (self._asg_key(asg), tau_bar.normalized().coords)
        if trace is None and key in self._fimg_cache:
            return self._fimg_cache[key]
        e = ex.compose(self.f_expr, self.element_expr(tau_bar, self.W), self.ctx)
        value = normalize(e, self.db, asg=asg, group=self.T, trace=trace)
        self._fimg_cache[key] = value
        return value

    def lam_parts(self, lam: GroupElement, asg: dict, trace=None):
        """(lambda o S^(k-1) f, [iota_m, lambda]) as target-group elements."""
        key = (self._asg_key(asg), lam.normalized().coords)
        if trace is None and key in self._lam_cache:
            return self._lam_cache[key]
        lam_expr = self.element_expr(lam, self.L)
        comp = ex.compose(lam_expr, self.susp_f, self.ctx)
        wh = ex.whitehead(self.iota, lam_expr, self.ctx)
        parts = (
            normalize(comp, self.db, asg=asg, group=self.T, trace=trace),
            normalize(wh, self.db, asg=asg, group=self.T, trace=trace),
        )
        self._lam_cache[key] = parts
        return parts

    def lam_image(self, lam: GroupElement, asg: dict, trace=None) -> GroupElement:
        comp, wh = self.lam_parts(lam, asg, trace=trace)
        return comp + wh

    # -- search space ------------------------------------------------------------

    def bounds(self) -> tuple[int, ...]:
        """Per-coordinate search moduli for lambda: the factor order, or the
        target group's exponent for infinite-order factors."""
        exp = self.T.presentation.exponent()
        return tuple(
            order if order != 0 else exp for _, order in self.L.presentation.factors
        )

    def _asg_key(self, asg: dict):
        def render(v):
            return ex.render_expr(v) if isinstance(v, ex.Expr) else v

        return tuple(sorted((k, render(v)) for k, v in asg.items()))

    def generator_images(self, asg: dict) -> list[GroupElement]:
        return [
            self.lam_image(self.L.presentation.basis_element(i), asg)
            for i in range(self.L.presentation.rank)
        ]

    def reach(self, asg: dict) -> dict:
        key = self._asg_key(asg)
        if key not in self._reach_cache:
            self._reach_cache[key] = reachable_set(self.generator_images(asg), self.bounds())
        return self._reach_cache[key]

    def twist_image(self) -> list[GroupElement]:
        """The possible taubar classes, always including 0."""
        if self.case.image_full:
            return sorted(self.W.presentation.elements(), key=lambda e: e.coords)
        from .abelian import span

        gens = [normalize(e, self.db, group=self.W) for e in self.case.image_elements]
        return sorted(span(gens, self.W.presentation), key=lambda e: e.coords)

    def f_map(self, asg: dict) -> dict:
        """taubar -> f o taubar over the whole twist image."""
        key = self._asg_key(asg)
        if key not in self._fmap_cache:
            self._fmap_cache[key] = {
                t: self.f_image(t, asg) for t in self.twist_image()
            }
        return self._fmap_cache[key]

    # -- the criterion -------------------------------------------------------------

    def equivalent(self, tau_bar, omega_bar, asg: dict, verify: bool = True):
        """Find the lexicographically least witness, or None.

        Among all (lambda, sign) pairs satisfying the criterion the witness
        with the least lambda coordinates wins, preferring sign +1 on ties.
        """
        reach = self.reach(asg)
        f_tau = self.f_image(tau_bar, asg)
        f_omega = self.f_image(omega_bar, asg)
        candidates = []
        for sign in (1, -1):
            need = f_omega.scale(sign) - f_tau
            coeffs = reach.get(need)
            if coeffs is not None:
                candidates.append((coeffs, 0 if sign == 1 else 1, sign))
        if not candidates:
            return None
        coeffs, _, sign = min(candidates)
        witness = Witness(GroupElement(self.L.presentation, coeffs), sign)
        if verify:
            self.verify_witness(tau_bar, omega_bar, witness, asg)
        return witness

    def verify_witness(self, tau_bar, omega_bar, witness: Witness, asg: dict):
        """Replay the witness through apply_equivalence and compare the
        resulting coefficient triple against the sign-adjusted target."""
        phi_tau = self.attaching_map(tau_bar, asg)
        eps = SelfEquivalence(0, 0 if witness.sign == 1 else 1, witness.lam)
        moved = self.apply_equivalence(eps, phi_tau, asg)
        f_omega = self.f_image(omega_bar, asg)
        expected = AttachingMap(
            self.m, self.k, f_omega.scale(witness.sign), witness.sign, witness.sign
        )
        if (moved.a, moved.b, moved.c) != (expected.a, expected.b, expected.c):
            raise GyrostabError(
                f"witness re-verification failed for ({tau_bar.coords}, "
                f"{omega_bar.coords}) with lambda={witness.lam.coords}, "
                f"sign={witness.sign:+d}"
            )

    def attaching_map(self, tau_bar: GroupElement, asg: dict) -> AttachingMap:
        return AttachingMap(self.m, self.k, self.f_image(tau_bar, asg), 1, 1)

    def apply_equivalence(
        self, eps: SelfEquivalence, phi: AttachingMap, asg: dict
    ) -> AttachingMap:
        si = (-1) ** eps.sign_i
        sj = (-1) ** eps.sign_j
        comp, wh = self.lam_parts(eps.lam, asg)
        a = phi.a.scale(si) + comp + wh.scale(si)
        return AttachingMap(phi.m, phi.k, a, sj * phi.b, si * sj * phi.c)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class ClassReport:
    representative: GroupElement
    members: tuple[GroupElement, ...]
    witnesses: dict  # member -> Witness (relative to the representative)

    def to_json(self):
        return {
            "representative": list(self.representative.coords),
            "members": [list(m.coords) for m in self.members],
            "witnesses": {
                str(list(m.coords)): w.to_json() for m, w in self.witnesses.items()
            },
        }


@dataclass(frozen=True)
class AssignmentReport:
    assignment: dict
    classes: tuple[ClassReport, ...]

    @property
    def count(self) -> int:
        return len(self.classes)

    def to_json(self):
        return {
            "assignment": _asg_json(self.assignment),
            "count": self.count,
            "classes": [c.to_json() for c in self.classes],
        }


@dataclass(frozen=True)
class StabilityReport:
    case_id: str
    plane: str
    k: int
    assignments: tuple[AssignmentReport, ...]
    note: str = ""

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.assignments)

    @property
    def gsi(self) -> bool:
        return all(c == 1 for c in self.counts)

    def aggregate(self) -> list[tuple[int, list[dict]]]:
        """Distinct counts with the assignment sets achieving each."""
        buckets: dict[int, list[dict]] = {}
        for a in self.assignments:
            buckets.setdefault(a.count, []).append(a.assignment)
        return sorted(buckets.items())

    def to_json(self):
        return {
            "case": self.case_id,
            "plane": self.plane,
            "k": self.k,
            "gsi": self.gsi,
            "counts": sorted(set(self.counts)),
            "aggregate": [
                {"count": c, "assignments": [_asg_json(a) for a in asgs]}
                for c, asgs in self.aggregate()
            ],
            "assignments": [a.to_json() for a in self.assignments],
            "note": self.note,
        }


@dataclass(frozen=True)
class TableRow:
    plane: str
    k: int | None
    gsi: bool
    counts: tuple[int, ...]
    note: str = ""
    report: StabilityReport | None = field(default=None, compare=False)

    def to_json(self):
        out = {
            "plane": self.plane,
            "k": self.k,
            "gsi": "yes" if self.gsi else "no",
            "counts": sorted(set(self.counts)),
            "note": self.note,
        }
        if self.report is not None:
            out["aggregate"] = [
                {"count": c, "assignments": [_asg_json(a) for a in asgs]}
                for c, asgs in self.report.aggregate()
            ]
        return out


# ---------------------------------------------------------------------------
# Spec-level operations


def twist_image(case: rdb.CaseDecl, db: rdb.Database):
    return CaseEngine(case, db).twist_image()


def attaching_map(case, tau_bar, db, asg) -> AttachingMap:
    return CaseEngine(case, db).attaching_map(tau_bar, asg)


def apply_equivalence(eps, phi, case, db, asg) -> AttachingMap:
    return CaseEngine(case, db).apply_equivalence(eps, phi, asg)


def equivalent(case, tau_bar, omega_bar, db, asg):
    return CaseEngine(case, db).equivalent(tau_bar, omega_bar, asg)


def classify(case: rdb.CaseDecl, db: rdb.Database, restrict_asg=None) -> StabilityReport:
    """Orbit partition of the twist classes for every parameter assignment."""
    engine = CaseEngine(case, db)
    points = engine.twist_image()
    reports = []
    assignments = rdb.assignments(db, restrict=case.params)
    if restrict_asg:
        assignments = [
            a for a in assignments
            if all(engine._asg_key({n: v}) == engine._asg_key({n: a[n]})
                   for n, v in restrict_asg.items() if n in a)
        ]
        if not assignments:
            raise GyrostabError("no parameter assignment matches the requested pins")
    for asg in assignments:
        fmap = engine.f_map(asg)
        reach = engine.reach(asg)
        orders = engine.T.presentation.orders

        # the reachable set is the subgroup H spanned by the generator
        # images, so "some lambda and sign work" says exactly that f(omega)
        # lies in the coset union (f(tau) + H) u (-f(tau) + H); those unions
        # are labeled once each, making relatedness a constant-time compare
        reach_coords = [e.coords for e in reach]
        label: dict = {}
        key_of: dict = {}
        for p in points:
            c = fmap[p].coords
            if c not in label:
                cid = len(label) + 1
                neg = tuple((-a) % o if o else -a for a, o in zip(c, orders))
                for base in (c, neg):
                    for h in reach_coords:
                        label[tuple(
                            (a + b) % o if o else a + b
                            for a, b, o in zip(base, h, orders)
                        )] = cid
            key_of[p] = label[c]

        def related(p, q):
            return key_of[p] == key_of[q]

        classes = []
        for members in orbit_partition(points, related):
            rep = members[0]
            witnesses = {}
            for member in members:
                w = engine.equivalent(rep, member, asg)
                if w is None:
                    raise GyrostabError(
                        "orbit member without a witness: partition and witness "
                        "search disagree (engine bug)"
                    )
                witnesses[member] = w
            classes.append(ClassReport(rep, tuple(members), witnesses))
        reports.append(AssignmentReport(asg, tuple(classes)))
    note = FULL_IMAGE_NOTE if case.image_full else ""
    return StabilityReport(case.case_id, case.plane, case.k, tuple(reports), note)


def classify_plane_k(plane: str, k: int, db: rdb.Database, restrict_asg=None):
    """Classification for any index in range, declared or trivially stable."""
    m = rdb.PLANE_M[plane]
    if not 2 <= k <= 2 * m - 2:
        raise GyrostabError(
            f"{plane} supports gyration indices 2 <= k <= {2 * m - 2}; got k={k}"
        )
    case = db.cases.get((plane, k))
    if case is not None:
        return classify(case, db, restrict_asg=restrict_asg)
    if k % 8 in (3, 5, 6, 7):
        return TableRow(plane, k, True, (1,), TRIVIAL_NOTE)
    raise GyrostabError(
        f"case {plane} k={k} has a nontrivial twisting group but is not declared"
    )


def table(db: rdb.Database) -> list[TableRow]:
    """Every row: declared cases, trivial-twist indices, and the sphere row."""
    rows = []
    for plane in rdb.PLANES:
        m = rdb.PLANE_M[plane]
        for k in range(2, 2 * m - 1):
            result = classify_plane_k(plane, k, db)
            if isinstance(result, TableRow):
                rows.append(result)
            else:
                rows.append(
                    TableRow(plane, k, result.gsi, result.counts, result.note, result)
                )
    rows.append(TableRow("S^n", None, True, (1,), SPHERE_NOTE))
    return rows


def theorem_a_check(db: rdb.Database) -> list[dict]:
    """For k=2: CP^2 has a single class; HP^2 and OP^2 are diagonal-only,
    under every parameter assignment."""
    results = []
    for plane, expect_diagonal in (("CP2", False), ("HP2", True), ("OP2", True)):
        case = db.cases[(plane, 2)]
        engine = CaseEngine(case, db)
        points = engine.twist_image()
        ok = True
        detail = []
        for asg in rdb.assignments(db, restrict=case.params):
            for i, t in enumerate(points):
                for w in points[i:]:
                    witness = engine.equivalent(t, w, asg)
                    equal = t == w
                    should = True if not expect_diagonal else equal
                    if (witness is not None) != should:
                        ok = False
                        detail.append(
                            f"{_fmt_asg(asg)}: pair ({t.coords}, {w.coords}) "
                            f"{'has' if witness else 'lacks'} a witness"
                        )
        results.append(
            {
                "plane": plane,
                "expected": "diagonal pairs only" if expect_diagonal else "all pairs",
                "ok": ok,
                "detail": detail,
            }
        )
    return results


# ---------------------------------------------------------------------------
# Witness explanation


def explain(case: rdb.CaseDecl, tau_bar, omega_bar, db, asg) -> str:
    """Human-readable account of one witness search, with citations."""
    engine = CaseEngine(case, db)
    lines = [f"case {case.case_id}, assignment {_fmt_asg(asg)}"]
    trace = Trace()
    f_tau = engine.f_image(tau_bar, asg, trace=trace)
    f_omega = engine.f_image(omega_bar, asg, trace=trace)
    lines.append(f"tau-bar   = {tau_bar.describe()}  ->  f o tau-bar   = {f_tau.describe()}")
    lines.append(f"omega-bar = {omega_bar.describe()}  ->  f o omega-bar = {f_omega.describe()}")
    witness = engine.equivalent(tau_bar, omega_bar, asg)
    if witness is None:
        bounds = engine.bounds()
        total = 1
        for b in bounds:
            total *= b
        lines.append(
            f"no witness: lambda search space in {engine.L.presentation.name} "
            f"bounded by {bounds} x signs {{+1,-1}} exhausted ({total} candidates per sign)"
        )
        return "\n".join(lines)
    comp, wh = engine.lam_parts(witness.lam, asg, trace=trace)
    if witness.lam.is_zero() and witness.sign == 1 and tau_bar == omega_bar:
        lines.append("identity witness lambda = 0")
    lines.append(f"witness: lambda = {witness.lam.describe()}, sign = {witness.sign:+d}")
    lines.append(f"  f o tau-bar              = {f_tau.describe()}")
    lines.append(f"  lambda o S^{case.k - 1}(f)        = {comp.describe()}")
    lines.append(f"  [iota_{case.m}, lambda]          = {wh.describe()}")
    total = f_tau + comp + wh
    lines.append(
        f"  sum = {total.describe()} = {witness.sign:+d} * (f o omega-bar)"
    )
    seen = set()
    cited = []
    for desc, cite in trace.entries:
        if desc not in seen:
            seen.add(desc)
            cited.append((desc, cite))
    if cited:
        lines.append("relations used:")
        for desc, cite in cited:
            lines.append(f"  - {desc}" + (f"  [{cite}]" if cite else ""))
    return "\n".join(lines)
