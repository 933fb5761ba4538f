import random
import shutil
import subprocess
from fractions import Fraction

import pytest

from foalt.logic import (
    And,
    Cmp,
    Const,
    EqValue,
    Exists,
    Forall,
    ID,
    Not,
    Or,
    Pred,
    PredSym,
    REAL,
    Var,
)
from foalt.solver import SolverSession, build_query, formula_to_smt, term_to_smt
from foalt.theory import check_sat_qf

X = Var("x", REAL)
Y = Var("y", REAL)
U = Var("u", ID)


def c(v):
    return Const(Fraction(v), REAL)


pytestmark = pytest.mark.skipif(
    shutil.which("foalt-smt") is None, reason="foalt-smt console script not installed"
)


def test_term_printing():
    assert term_to_smt(c(-2)) == "(- 2)"
    assert term_to_smt(Const(Fraction(1, 2), REAL)) == "(/ 1 2)"
    assert term_to_smt(Var("x", REAL, 1)) == "|x@1|"


def test_formula_printing():
    phi = And((Cmp("<", X, Y), Not(Cmp("=", X, c(0)))))
    s = formula_to_smt(phi)
    assert s.startswith("(and ") and "(not (= x 0))" in s


def test_build_query_infers_logic():
    assert build_query(Cmp("<", X, c(0))).logic == "LRA"
    assert build_query(Cmp("=", U, Const(EqValue(0), ID))).logic == "UF"
    mixed = And((Cmp("<", X, c(0)), Pred(PredSym("q", 1), (X,))))
    assert build_query(mixed).logic == "UFLRA"


def test_build_query_declares_distinct_eq_values():
    q = build_query(Cmp("=", U, Const(EqValue(0), ID)))
    assert any("declare-sort Id" in d for d in q.declarations)
    assert any("distinct" in d for d in q.declarations) or len(q.declarations) <= 3


def test_session_basic_verdicts():
    s = SolverSession()
    try:
        assert s.check(Cmp("<", X, c(0))) == "sat"
        assert s.check(And((Cmp("<", X, c(0)), Cmp("<", c(0), X)))) == "unsat"
    finally:
        s.close()


def test_session_is_reused_across_queries():
    s = SolverSession()
    try:
        assert s.check(Cmp("<", X, c(0))) == "sat"
        proc = s.proc
        assert s.check(Cmp("<", X, Y)) == "sat"
        assert s.proc is proc
    finally:
        s.close()


def test_session_quantified_refutation():
    s = SolverSession()
    try:
        phi = And(
            (Cmp("<=", c(0), X), Forall(Y, Or((Not(Cmp("<=", c(0), Y)), Cmp("<", Y, X)))))
        )
        assert s.check(phi) == "unsat"
    finally:
        s.close()


def test_session_eq_theory():
    s = SolverSession()
    try:
        v0 = Const(EqValue(0), ID)
        v1 = Const(EqValue(1), ID)
        assert s.check(Cmp("=", v0, v1)) == "unsat"
        assert s.check(Not(Cmp("=", U, v0))) == "sat"
    finally:
        s.close()


def test_missing_binary_degrades_to_unknown():
    s = SolverSession(binary="/nonexistent/solver")
    try:
        assert s.check(Cmp("<", X, c(0))) == "unknown"
    finally:
        s.close()


def test_external_agrees_with_builtin_on_random_qf_corpus():
    rng = random.Random(3)
    terms = [X, Y, c(0), c(1), c(-1)]
    s = SolverSession()
    try:
        for _ in range(40):
            lits = []
            for _ in range(rng.randint(1, 4)):
                a = Cmp(rng.choice(["<", "<=", "="]), rng.choice(terms), rng.choice(terms))
                lits.append(Not(a) if rng.random() < 0.3 else a)
            phi = And(tuple(lits)) if len(lits) > 1 else lits[0]
            builtin = "sat" if check_sat_qf(phi) is not None else "unsat"
            assert s.check(phi) == builtin
    finally:
        s.close()


def test_smt_server_speaks_smtlib_directly():
    out = subprocess.run(
        ["foalt-smt"],
        input="(set-logic LRA)(declare-const x Real)(assert (< x 0))(check-sat)(get-model)\n",
        capture_output=True,
        text=True,
        timeout=10,
    )
    lines = out.stdout.strip().splitlines()
    assert lines[0] == "sat"
    assert any("define-fun" in l for l in lines[1:])
