from fractions import Fraction

import pytest

from foalt.interp import (
    Gli,
    InterpolationError,
    compute_gli,
    compute_witnesses,
    project,
    substitute_witnesses,
    validate_gli,
)
from foalt.logic import (
    And,
    Cmp,
    Const,
    FALSE,
    Not,
    Or,
    Pred,
    PredSym,
    REAL,
    TRUE,
    Var,
    conj,
    nnf,
    neg,
    pred_syms,
)
from foalt.logic import free_vars, is_positive, pred_atoms
from foalt.symbolic import build_path
from foalt.theory import Plain, check_sat_qf

from conftest import load

Z = Var("z", REAL)
X1 = Var("x", REAL, 1)
Q0 = PredSym("q", 1, 0)
Q1 = PredSym("q", 1, 1)


def c(v):
    return Const(Fraction(v), REAL)


def equivalent(phi, psi) -> bool:
    fwd = check_sat_qf(conj((phi, nnf(neg(psi))))) is None
    bwd = check_sat_qf(conj((psi, nnf(neg(phi))))) is None
    return fwd and bwd


@pytest.fixture
def golden(example1):
    sp = build_path(example1, ["a1", "a2"])
    wa = compute_witnesses(sp)
    return example1, sp, wa, compute_gli(example1, sp, wa)


def test_witness_maps_universal_to_existential(golden):
    _, sp, wa, _ = golden
    (_, z1), (_, z2) = sp.prefix
    assert wa.items == ((z2, Plain(z1)),)


def test_witness_substitution_makes_matrix_unsat(golden):
    _, sp, wa, _ = golden
    inst = substitute_witnesses(sp.upsilon_matrix, wa)
    assert check_sat_qf(inst, predicates_as_booleans=False) is None


def test_gli_matches_reference_triple(golden):
    _, sp, _, g = golden
    (_, z1), _ = sp.prefix
    i0, i1, i2 = g.formulas
    ref0 = And((Pred(Q0, (z1,)), Cmp("<=", c(0), z1)))
    assert equivalent(i0, ref0)
    # I₁ mentions q¹ applied to x¹+z₁
    atoms1 = [a for a in pred_atoms(i1) if a.sym == Q1]
    assert len(atoms1) == 1
    ref1 = And((Cmp("<=", c(0), X1), atoms1[0], Cmp("<=", c(0), z1)))
    assert equivalent(i1, ref1)
    assert i2 == FALSE


def test_gli_validates(golden):
    a, sp, _, g = golden
    assert validate_gli(a, ("a1", "a2"), g) is True


def test_validate_rejects_permuted_sequence(golden):
    a, _, _, g = golden
    bad = Gli((g.formulas[1], g.formulas[0], g.formulas[2]), g.allowed_vars)
    assert validate_gli(a, ("a1", "a2"), bad) is not True


def test_validate_rejects_top_final(golden):
    a, _, _, g = golden
    bad = Gli((g.formulas[0], g.formulas[1], TRUE), g.allowed_vars)
    assert validate_gli(a, ("a1", "a2"), bad) is False


def test_validate_rejects_vocabulary_violation(golden):
    a, _, _, g = golden
    # a step-0 interpolant mentioning a step-1 stamped variable is illegal
    bad0 = And((g.formulas[0], Cmp("<=", c(0), X1)))
    bad = Gli((bad0,) + g.formulas[1:], g.allowed_vars)
    assert validate_gli(a, ("a1", "a2"), bad) is False


def test_compute_witnesses_requires_spurious_path(nonempty):
    sp = build_path(nonempty, ["a"])
    with pytest.raises(InterpolationError):
        compute_witnesses(sp)


def test_gli_formulas_are_positive(golden):
    _, _, _, g = golden
    for f in g.formulas:
        assert is_positive(f, pred_syms(f))


def test_project_drops_predicates_and_variables():
    # project q⁰(z) ∧ z = x¹ ∧ p⁰ onto {q⁰}, {z}: p is dropped, x¹ rewritten
    P0 = PredSym("p", 0, 0)
    phi = And((Pred(Q0, (Z,)), Cmp("=", Z, X1), Pred(P0, ())))
    out = project(phi, frozenset({Q0}), frozenset({Z}))
    assert pred_syms(out) == frozenset({Q0})
    assert X1 not in free_vars(out)


def test_project_is_a_consequence():
    # the projection is entailed by the original formula
    phi = And((Pred(Q0, (Z,)), Cmp("<=", c(1), Z)))
    out = project(phi, frozenset({Q0}), frozenset({Z}))
    assert check_sat_qf(conj((phi, nnf(neg(out))))) is None
