"""Command-line front end.

Commands: classify, table, solve, normalize, verify-db, explain.
Reports go to stdout, diagnostics to stderr; exit codes are 0 (success),
1 (domain failure: missing dataset, stuck normalization, failed validation),
2 (usage error).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dataset, gyration, rdb
from . import expr as ex
from .errors import GyrostabError
from .rewrite import normalize as normalize_expr
from .validate import validate


def _parse_params(pairs, db):
    asg = {}
    for raw in pairs or ():
        if "=" not in raw:
            raise _Usage(f"--param needs name=value, got {raw!r}")
        name, value = raw.split("=", 1)
        decl = db.params.get(name)
        if decl is None:
            raise _Usage(f"unknown parameter {name!r}")
        if decl.kind == "int":
            try:
                parsed = int(value)
            except ValueError:
                raise _Usage(f"parameter {name} takes an integer, got {value!r}")
            if parsed not in decl.int_values:
                raise _Usage(f"parameter {name} ranges over {decl.int_values}")
        else:
            matches = [
                v for v in decl.elem_values if ex.render_expr(v) == value.strip()
            ]
            if not matches:
                options = ", ".join(ex.render_expr(v) for v in decl.elem_values)
                raise _Usage(f"parameter {name} ranges over: {options}")
            parsed = matches[0]
        asg[name] = parsed
    return asg


def _parse_coords(raw, gdecl, what):
    try:
        coords = tuple(int(c) for c in raw.split(","))
    except ValueError:
        raise _Usage(f"--{what} must be comma-separated integers, got {raw!r}")
    if len(coords) != gdecl.presentation.rank:
        raise _Usage(
            f"--{what} needs {gdecl.presentation.rank} coordinates for "
            f"{gdecl.presentation.name} = {gdecl.presentation.describe()}"
        )
    return gdecl.presentation.element(coords)


class _Usage(Exception):
    pass


def parse_expression(text: str, db) -> ex.Expr:
    """Parse one expression string against the loaded database."""
    errors: list = []
    tokens = rdb.lex_line(text, 1, errors)
    parser = rdb._LineParser(tokens, db, errors, 1)
    e = None
    try:
        e = parser.parse_expr()
        parser.done()
    except rdb._Bail:
        pass
    if errors or e is None:
        raise GyrostabError("; ".join(str(err) for err in errors) or "empty expression")
    return e


def _require_case(args, db):
    if not args.plane or args.k is None:
        raise _Usage("this command needs --plane and --k")
    if args.plane not in rdb.PLANES:
        raise _Usage(f"--plane must be one of {', '.join(rdb.PLANES)}")
    return args.plane, args.k


def _witness_json(witness):
    return None if witness is None else witness.to_json()


def cmd_classify(args, db, out):
    plane, k = _require_case(args, db)
    pins = _parse_params(args.param, db)
    result = gyration.classify_plane_k(plane, k, db, restrict_asg=pins or None)
    if isinstance(result, gyration.TableRow):
        if args.json:
            print(json.dumps(result.to_json(), indent=2), file=out)
        else:
            print(f"{plane} k={k}: GSI yes, GSII = 1 ({result.note})", file=out)
        return 0
    if args.json:
        print(json.dumps(result.to_json(), indent=2), file=out)
        return 0
    counts = sorted(set(result.counts))
    if len(counts) == 1:
        summary = f"GSII = {counts[0]}"
        if len(result.assignments) > 1:
            summary += " (all assignments)"
    else:
        parts = [
            f"{count} for {'; '.join(gyration._fmt_asg(a) for a in asgs)}"
            for count, asgs in result.aggregate()
        ]
        summary = "GSII = " + ", ".join(parts)
    print(f"{plane} k={k}: GSI {'yes' if result.gsi else 'no'}, {summary}", file=out)
    if result.note:
        print(f"note: {result.note}", file=out)
    for rep in result.assignments:
        print(f"  assignment {gyration._fmt_asg(rep.assignment)}: {rep.count} classes", file=out)
        for cls in rep.classes:
            members = ", ".join(str(list(m.coords)) for m in cls.members)
            print(f"    class {list(cls.representative.coords)}: {{{members}}}", file=out)
    return 0


def cmd_table(args, db, out):
    rows = gyration.table(db)
    if args.json:
        print(json.dumps([r.to_json() for r in rows], indent=2), file=out)
        return 0
    print(f"{'M':6} {'k':>3}  {'GSI':3}  GSII", file=out)
    for row in rows:
        counts = sorted(set(row.counts))
        gsii = str(counts[0]) if len(counts) == 1 else "{" + ", ".join(map(str, counts)) + "}"
        if row.report is not None and len(counts) > 1:
            keyed = "; ".join(
                f"{c} for {', '.join(gyration._fmt_asg(a) for a in asgs)}"
                for c, asgs in row.report.aggregate()
            )
            gsii += f"  ({keyed})"
        note = f"  [{row.note}]" if row.note and row.report is None else ""
        k = "" if row.k is None else row.k
        print(f"{row.plane:6} {k!s:>3}  {'yes' if row.gsi else 'no':3}  {gsii}{note}", file=out)
    return 0


def _solve_common(args, db):
    plane, k = _require_case(args, db)
    case = db.cases.get((plane, k))
    if case is None:
        raise GyrostabError(f"case {plane} k={k} is not declared (trivial or out of range)")
    engine = gyration.CaseEngine(case, db)
    if args.tau is None or args.omega is None:
        raise _Usage("solve/explain need --tau and --omega coordinates")
    tau = _parse_coords(args.tau, engine.W, "tau")
    omega = _parse_coords(args.omega, engine.W, "omega")
    pins = _parse_params(args.param, db)
    assignments = [
        {**a, **pins} for a in rdb.assignments(db, restrict=case.params)
        if all(n not in a or engine._asg_key({n: a[n]}) == engine._asg_key({n: v})
               for n, v in pins.items())
    ]
    # deduplicate (pins may collapse several assignments onto one)
    unique = []
    for a in assignments:
        if a not in unique:
            unique.append(a)
    return case, engine, tau, omega, unique


def cmd_solve(args, db, out):
    case, engine, tau, omega, assignments = _solve_common(args, db)
    results = []
    for asg in assignments:
        witness = engine.equivalent(tau, omega, asg)
        results.append((asg, witness))
    if args.json:
        payload = [
            {"assignment": gyration._asg_json(a), "witness": _witness_json(w)}
            for a, w in results
        ]
        print(json.dumps(payload, indent=2), file=out)
        return 0
    for asg, witness in results:
        prefix = f"{gyration._fmt_asg(asg)}: "
        if witness is None:
            print(prefix + "no witness (gyrations not homotopy equivalent)", file=out)
        else:
            print(
                prefix
                + f"witness lambda = {witness.lam.describe()}, sign = {witness.sign:+d}",
                file=out,
            )
    return 0


def cmd_explain(args, db, out):
    case, engine, tau, omega, assignments = _solve_common(args, db)
    blocks = [gyration.explain(case, tau, omega, db, asg) for asg in assignments]
    if args.json:
        print(json.dumps([{"text": b} for b in blocks], indent=2), file=out)
    else:
        print("\n\n".join(blocks), file=out)
    return 0


def cmd_normalize(args, db, out):
    if not args.expr:
        raise _Usage("normalize needs an expression argument")
    e = parse_expression(args.expr, db)
    pins = _parse_params(args.param, db)
    dims = db.dim_context().expr_dims(e)
    gdecl = db.group_for(*dims)
    value = normalize_expr(e, db, asg=pins, group=gdecl)
    if args.json:
        print(
            json.dumps(
                {
                    "group": gdecl.presentation.name,
                    "presentation": gdecl.presentation.describe(),
                    "coords": list(value.coords),
                    "value": value.describe(),
                },
                indent=2,
            ),
            file=out,
        )
    else:
        print(f"{value.describe()}  in {gdecl.presentation.name} = {gdecl.presentation.describe()}", file=out)
    return 0


def cmd_verify_db(args, db, out):
    report = validate(db)
    if args.json:
        print(json.dumps(report.to_json(), indent=2), file=out)
    else:
        if report.ok:
            print("dataset valid: all checks passed", file=out)
        else:
            for f in report.failures:
                print(json.dumps(f.to_json()), file=out)
    return 0 if report.ok else 1


COMMANDS = {
    "classify": cmd_classify,
    "table": cmd_table,
    "solve": cmd_solve,
    "normalize": cmd_normalize,
    "verify-db": cmd_verify_db,
    "explain": cmd_explain,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gyrostab",
        description="Decide gyration stability and enumerate gyration homotopy "
        "types for the projective planes CP2, HP2, OP2.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("expr", nargs="?", help="expression (for `normalize`)")
    parser.add_argument("--plane", choices=rdb.PLANES)
    parser.add_argument("--k", type=int)
    parser.add_argument("--tau", help="tau-bar coordinates, comma separated")
    parser.add_argument("--omega", help="omega-bar coordinates, comma separated")
    parser.add_argument(
        "--param", action="append", metavar="NAME=VALUE",
        help="pin a parameter branch (repeatable)",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--db", help="directory containing toda.rdb and cases.rdb")
    return parser


def run(argv, out=sys.stdout, err=sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        db = dataset.load(args.db)
    except GyrostabError as e:
        print(f"error: {e}", file=err)
        return 1
    try:
        return COMMANDS[args.command](args, db, out)
    except _Usage as e:
        print(f"usage error: {e}", file=err)
        return 2
    except GyrostabError as e:
        print(f"error: {e}", file=err)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
