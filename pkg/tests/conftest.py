import itertools

import pytest

from gyrostab import dataset, rdb
from gyrostab import expr as ex
from gyrostab.cli import parse_expression


@pytest.fixture(scope="session")
def db():
    return dataset.load()


@pytest.fixture(scope="session")
def texts():
    return dataset.dataset_texts()


@pytest.fixture(scope="session")
def default_asg(db):
    """First value of every parameter domain; used where any branch will do."""
    return {name: decl.values()[0] for name, decl in db.params.items()}


def parse_e(db, text):
    return parse_expression(text, db)


def group_of(db, e):
    return db.group_for(*db.dim_context().expr_dims(e))


def shipped_corpus(db):
    """(expr, group, params-it-needs) for the expressions the engine
    actually exercises: anchored relation sides, check sides, and every
    case's twist images and per-generator lambda images."""
    from gyrostab.gyration import CaseEngine

    corpus = []

    def add(e, gdecl):
        if not e.is_zero():
            corpus.append((e, gdecl))

    for rel in db.relations:
        dims = db.dim_context().chain_dims(rel.lhs_chain)
        if db.has_group(*dims):
            add(ex.Expr((ex.Term(1, rel.lhs_chain),)), db.group_for(*dims))
    for chk in db.checks:
        for side in (chk.lhs, chk.rhs):
            if not side.is_zero():
                gdecl = db.group_for(*db.dim_context().expr_dims(side))
                add(side, gdecl)
    for case in db.cases.values():
        engine = CaseEngine(case, db)
        points = engine.twist_image()
        sample = points if len(points) <= 6 else points[:3] + points[-3:]
        for p in sample:
            add(ex.compose(engine.f_expr, engine.element_expr(p, engine.W), engine.ctx),
                engine.T)
        for i in range(engine.L.presentation.rank):
            g = engine.L.presentation.basis_element(i)
            lam = engine.element_expr(g, engine.L)
            add(ex.compose(lam, engine.susp_f, engine.ctx), engine.T)
            add(ex.whitehead(engine.iota, lam, engine.ctx), engine.T)
    return corpus


def enumerate_small(*orders):
    """All coordinate tuples over the given cyclic orders."""
    return list(itertools.product(*(range(o) for o in orders)))
