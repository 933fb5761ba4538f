import random
from fractions import Fraction

import pytest

from foalt.gen import EQ_INPUT, random_eq_automaton, random_eq_word
from foalt.logic import (
    And,
    Cmp,
    Const,
    EqValue,
    Not,
    Or,
    Pred,
    PredSym,
    REAL,
    Var,
    conj,
    free_vars,
    is_quantifier_free,
    nnf,
    neg,
    pred_syms,
)
from foalt.oracle import accepts_explicit
from foalt.symbolic import (
    SPURIOUS,
    SymbolicError,
    acceptance_formula,
    build_path,
    check_event_sequence,
    member,
    path_formula,
)
from foalt.theory import check_sat_qf, eliminate_quantifiers, try_refute

from conftest import load


def conjuncts(phi) -> set:
    return set(phi.args) if isinstance(phi, And) else {phi}


def test_shared_prefix_and_step_map(example1):
    sp = build_path(example1, ["a1", "a2"])
    assert [k for k, _ in sp.prefix] == ["E", "A"]
    assert sp.xi == (0, 1)
    # both formulas use exactly the same prefix
    assert sp.theta.prefix == sp.upsilon.prefix == sp.prefix


def test_theta_matches_displayed_form(example1):
    sp = build_path(example1, ["a1", "a2"])
    (_, z1), (_, z2) = sp.prefix
    x1 = Var("x", REAL, 1)
    q0 = PredSym("q", 1, 0)
    q1 = PredSym("q", 1, 1)
    zero = Const(Fraction(0), REAL)
    assert conjuncts(sp.base_matrix) == {Cmp("<=", zero, z1), Pred(q0, (z1,))}
    # step 1: q⁰(z₁) → x¹ ≥ 0 ∧ (z₂ ≥ z₁ → q¹(x¹+z₂))
    (g1,) = sp.step_groups[0]
    assert isinstance(g1, Or) and Not(Pred(q0, (z1,))) in g1.args
    rest = [a for a in g1.args if a != Not(Pred(q0, (z1,)))]
    assert Cmp("<=", zero, x1) in conjuncts(rest[0])
    (g2,) = sp.step_groups[1]
    assert isinstance(g2, Or)
    # final step: q¹ atom implies the final-state body
    heads = [a for a in g2.args if isinstance(a, Not)]
    assert len(heads) == 1 and heads[0].arg.sym == q1
    assert sp.final_group == ()


def test_upsilon_is_predicate_free_and_quantifier_free_matrix(example1):
    sp = build_path(example1, ["a1", "a2"])
    assert pred_syms(sp.upsilon_matrix) == frozenset()
    assert is_quantifier_free(sp.upsilon_matrix)


def test_upsilon_matches_displayed_form(example1):
    sp = build_path(example1, ["a1", "a2"])
    (_, z1), (_, z2) = sp.prefix
    x1 = Var("x", REAL, 1)
    zero = Const(Fraction(0), REAL)
    got = conjuncts(sp.upsilon_matrix)
    assert free_vars(sp.upsilon_matrix) == {z1, z2, x1}
    assert Cmp("<=", zero, z1) in got
    assert Cmp("<=", zero, x1) in got
    guard = [g for g in got if isinstance(g, Or)]
    assert len(guard) == 1
    assert Not(Cmp("<=", z1, z2)) in guard[0].args


def test_upsilon_unsat_for_spurious_sequence(example1):
    sp = build_path(example1, ["a1", "a2"])
    ground = eliminate_quantifiers(sp.upsilon.close())
    assert check_sat_qf(ground, predicates_as_booleans=False) is None
    assert try_refute(sp.upsilon.close()) == "unsat"


def test_check_event_sequence_verdicts(example1, nonempty):
    assert check_event_sequence(example1, ["a1", "a2"]) is SPURIOUS
    out = check_event_sequence(nonempty, ["a"])
    assert out is not SPURIOUS
    assert member(nonempty, out.word)


def test_member_basic(nonempty):
    x = nonempty.input_vars[0]
    assert member(nonempty, [("a", {x: Fraction(1)})])
    assert not member(nonempty, [("a", {x: Fraction(-1)})])
    assert not member(nonempty, [])


def test_unknown_event_rejected(example1):
    with pytest.raises(SymbolicError):
        build_path(example1, ["nope"])


def test_acceptance_formula_constrains_last_step(example1):
    # the acceptance formula adds the final-state axioms at step n
    theta = path_formula(example1, ["a1"])
    acc = acceptance_formula(example1, ["a1"])
    extra = conjuncts(acc) - conjuncts(theta)
    assert extra  # non-final q must be empty at the last step
    assert any(PredSym("q", 1, 1) in pred_syms(f) for f in extra)


def test_member_agrees_with_oracle_on_random_corpus():
    rng = random.Random(7)
    dom = [EqValue(0), EqValue(1), EqValue(2)]
    for _ in range(30):
        a = random_eq_automaton(rng)
        w = random_eq_word(rng, a.events)
        assert member(a, w) == accepts_explicit(a, w, dom)
