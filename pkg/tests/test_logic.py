from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from foalt.logic import (
    And,
    Cmp,
    Const,
    Exists,
    FALSE,
    Forall,
    ID,
    Not,
    Or,
    Pred,
    PredSym,
    REAL,
    TRUE,
    Var,
    conj,
    disj,
    dual,
    free_vars,
    is_positive,
    is_quantifier_free,
    neg,
    nnf,
    pred_syms,
    prenex,
    rename_apart,
    simplify,
    stamp,
    substitute,
    unstamp_preds,
)

X = Var("x", REAL)
Y = Var("y", REAL)
Z = Var("z", REAL)
Q = PredSym("q", 1)
QF = PredSym("qf", 0)


def c(v) -> Const:
    return Const(Fraction(v), REAL)


# ---------------------------------------------------------------------------
# random quantifier-free formulas for the property tests

terms = st.sampled_from([X, Y, Z, c(0), c(1), c(-2)])
atoms = st.builds(Cmp, st.sampled_from(["<", "<=", "="]), terms, terms) | st.builds(
    Pred, st.just(Q), st.tuples(terms)
)


def _combine(children):
    return st.builds(lambda a, b: And((a, b)), children, children) | st.builds(
        lambda a, b: Or((a, b)), children, children
    ) | st.builds(Not, children)


formulas = st.recursive(atoms, _combine, max_leaves=8)
positive_formulas = st.recursive(
    atoms | st.builds(Not, st.builds(Cmp, st.sampled_from(["<", "<="]), terms, terms)),
    lambda ch: st.builds(lambda a, b: And((a, b)), ch, ch)
    | st.builds(lambda a, b: Or((a, b)), ch, ch),
    max_leaves=8,
)


def test_structural_equality_is_the_only_equality():
    assert Cmp("<", X, Y) == Cmp("<", X, Y)
    assert hash(And((TRUE, FALSE))) == hash(And((TRUE, FALSE)))
    assert Var("x", REAL) != Var("x", ID)


def test_free_vars_respect_binders():
    phi = Exists(X, And((Cmp("<", X, Y), Pred(Q, (X,)))))
    assert free_vars(phi) == frozenset({Y})
    assert free_vars(Forall(Y, phi)) == frozenset()


def test_substitute_only_free_occurrences():
    phi = And((Cmp("<", X, Y), Exists(X, Cmp("=", X, Y))))
    out = substitute(phi, {X: c(3)})
    assert out.args[0] == Cmp("<", c(3), Y)
    assert isinstance(out.args[1], Exists)  # bound x untouched
    assert out.args[1].body == Cmp("=", X, Y)


@given(formulas)
def test_nnf_pushes_all_negations_to_literals(phi):
    out = nnf(Not(phi))

    def ok(f):
        if isinstance(f, Not):
            return isinstance(f.arg, (Cmp, Pred))
        if isinstance(f, (And, Or)):
            return all(ok(a) for a in f.args)
        return True

    assert ok(out)


@given(positive_formulas)
def test_dual_is_an_involution_on_positive_formulas(phi):
    # negated data literals are normalized to flipped comparisons on the
    # first pass, after which double dualization is the identity
    assert is_positive(phi)
    norm = dual(dual(phi))
    assert dual(dual(norm)) == norm


def test_dual_fixes_predicate_atoms_and_flips_literals():
    phi = And((Cmp("<", X, Y), Pred(Q, (X,))))
    d = dual(phi)
    assert isinstance(d, Or)
    assert Pred(Q, (X,)) in d.args
    assert Cmp("<=", Y, X) in d.args


def test_dual_swaps_quantifiers():
    phi = Exists(X, Forall(Y, Pred(Q, (X,))))
    d = dual(phi)
    assert isinstance(d, Forall) and isinstance(d.body, Exists)


def test_prenex_pulls_quantifiers_without_capture():
    phi = And((Exists(X, Cmp("<", X, Y)), Forall(X, Cmp("<=", Y, X))))
    p = prenex(phi)
    assert is_quantifier_free(p.matrix)
    kinds = [k for k, _ in p.prefix]
    assert sorted(kinds) == ["A", "E"]
    names = {v.name for _, v in p.prefix}
    assert len(names | {v for _, v in p.prefix}) >= 2  # renamed apart


def test_rename_apart_makes_binders_unique():
    phi = And((Exists(X, Pred(Q, (X,))), Exists(X, Cmp("<", X, c(0)))))
    out = rename_apart(phi)
    b1, b2 = out.args
    assert b1.var != b2.var


def test_stamp_marks_inputs_and_predicates():
    phi = And((Cmp("<", X, Y), Pred(Q, (X,))))
    out = stamp(phi, 2, frozenset({"x"}))
    lit, at = out.args
    assert lit.lhs.stamp == 2 and lit.rhs.stamp is None
    assert at.sym.stamp == 2
    assert unstamp_preds(out) == And((lit, Pred(Q, (lit.lhs,))))


def test_pred_syms_and_positivity():
    phi = And((Pred(Q, (X,)), Not(Cmp("<", X, c(0)))))
    assert pred_syms(phi) == frozenset({Q})
    assert is_positive(phi)
    assert not is_positive(Not(Pred(Q, (X,))))


def test_neg_and_simplify_constants():
    assert simplify(And((TRUE, Pred(QF, ())))) == Pred(QF, ())
    assert simplify(Or((TRUE, Pred(QF, ())))) == TRUE
    assert simplify(And((FALSE, Pred(QF, ())))) == FALSE
    assert simplify(neg(FALSE)) == TRUE


def test_simplify_folds_ground_comparisons():
    assert simplify(Cmp("<", c(1), c(2))) == TRUE
    assert simplify(Cmp("<=", c(2), c(1))) == FALSE


def test_conj_disj_flatten():
    phi = conj([Cmp("<", X, Y), conj([Cmp("<", Y, Z), TRUE])])
    assert isinstance(phi, And) and len(phi.args) == 2
    assert disj([]) == FALSE
    assert conj([]) == TRUE
