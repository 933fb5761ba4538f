import random
from fractions import Fraction

from foalt.automaton import parse
from foalt.gen import EQ_INPUT, random_eq_automaton, random_eq_word
from foalt.logic import And, Cmp, Const, EqValue, Exists, Forall, ID, Not, Or, Pred, PredSym, Var
from foalt.oracle import Config, accepts_explicit, all_models, minimal_models

DOM = [EqValue(0), EqValue(1), EqValue(2)]
Q = PredSym("q", 1)
P = PredSym("p", 0)
U = Var("u", ID)


def e(i):
    return Const(EqValue(i), ID)


def cfg(name, *vals):
    return Config(name, tuple(vals))


def test_minimal_models_of_disjunction_are_singletons():
    phi = Or((Pred(Q, (e(0),)), Pred(Q, (e(1),))))
    ms = minimal_models(phi, DOM)
    assert ms == {frozenset({cfg("q", EqValue(0))}), frozenset({cfg("q", EqValue(1))})}


def test_minimal_models_of_conjunction():
    phi = And((Pred(Q, (e(0),)), Pred(P, ())))
    ms = minimal_models(phi, DOM)
    assert ms == {frozenset({cfg("q", EqValue(0)), cfg("p")})}


def test_minimal_models_prune_supersets():
    # q(v0) ∨ (q(v0) ∧ q(v1)) has the single minimal model {q(v0)}
    phi = Or((Pred(Q, (e(0),)), And((Pred(Q, (e(0),)), Pred(Q, (e(1),))))))
    assert minimal_models(phi, DOM) == {frozenset({cfg("q", EqValue(0))})}


def test_all_models_include_non_minimal_ones():
    phi = Or((Pred(Q, (e(0),)), Pred(Q, (e(1),))))
    ms = all_models(phi, DOM)
    assert frozenset({cfg("q", EqValue(0)), cfg("q", EqValue(1))}) in ms
    assert minimal_models(phi, DOM) < ms


def test_quantifiers_range_over_the_domain():
    phi = Exists(U, Pred(Q, (U,)))
    assert len(minimal_models(phi, DOM)) == len(DOM)
    assert minimal_models(Forall(U, Pred(Q, (U,))), DOM) == {
        frozenset(cfg("q", v) for v in DOM)
    }


def test_data_literals_are_decided_not_chosen():
    phi = And((Cmp("=", e(0), e(1)), Pred(P, ())))
    assert minimal_models(phi, DOM) == set()
    phi = And((Not(Cmp("=", e(0), e(1))), Pred(P, ())))
    assert minimal_models(phi, DOM) == {frozenset({cfg("p")})}


def test_accepts_explicit_two_distinct_letters(eqpair):
    x = eqpair.input_vars[0]
    w_yes = [("a", {x: EqValue(0)}), ("a", {x: EqValue(1)})]
    w_no = [("a", {x: EqValue(0)}), ("a", {x: EqValue(0)})]
    assert accepts_explicit(eqpair, w_yes, DOM)
    assert not accepts_explicit(eqpair, w_no, DOM)
    assert not accepts_explicit(eqpair, [], DOM)


def test_minimal_and_all_model_semantics_agree_on_random_corpus():
    rng = random.Random(23)
    for _ in range(30):
        a = random_eq_automaton(rng)
        w = random_eq_word(rng, a.events)
        assert accepts_explicit(a, w, DOM) == accepts_explicit(a, w, DOM, use_all_models=True)
