from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from foalt.logic import (
    And,
    Cmp,
    Const,
    EqValue,
    Exists,
    FALSE,
    Forall,
    ID,
    Not,
    Or,
    REAL,
    TRUE,
    Var,
    conj,
    neg,
    nnf,
    substitute,
)
from foalt.theory import (
    Plain,
    check_sat_qf,
    eliminate_quantifiers,
    evaluate,
    qe_exists,
    substitute_virtual,
    try_refute,
    witness_for_universal,
)

X = Var("x", REAL)
Y = Var("y", REAL)
Z = Var("z", REAL)
U = Var("u", ID)
V = Var("v", ID)


def c(v) -> Const:
    return Const(Fraction(v), REAL)


def e(i) -> Const:
    return Const(EqValue(i), ID)


def equivalent(phi, psi) -> bool:
    """Quantifier-free equivalence via the satisfiability engine."""
    a = check_sat_qf(conj((phi, nnf(neg(psi))))) is None
    b = check_sat_qf(conj((psi, nnf(neg(phi))))) is None
    return a and b


# ---------------------------------------------------------------------------
# quantifier elimination


def test_qe_lra_strict_lower_bound():
    # ∃x. x < 0 is valid, with the plain witness -1 among the candidates
    res, tau = qe_exists(X, Cmp("<", X, c(0)))
    assert equivalent(res, TRUE)
    # the witness satisfies the matrix
    inst = substitute_virtual(Cmp("<", X, c(0)), X, tau)
    assert check_sat_qf(nnf(neg(inst))) is None


def test_qe_lra_interval():
    # ∃x. y < x ∧ x < z  ≡  y < z
    phi = And((Cmp("<", Y, X), Cmp("<", X, Z)))
    res, _ = qe_exists(X, phi)
    assert equivalent(res, Cmp("<", Y, Z))


def test_qe_lra_unsat_interval():
    phi = And((Cmp("<", X, Y), Cmp("<", Y, X)))
    res, _ = qe_exists(X, phi)
    assert equivalent(res, FALSE)


def test_qe_eq_fresh_value_always_exists():
    # over an infinite domain a value distinct from any finite set exists
    phi = And((Not(Cmp("=", U, V)), Not(Cmp("=", U, e(0)))))
    res, _ = qe_exists(U, phi)
    assert equivalent(res, TRUE)


def test_qe_eq_equality_propagates():
    phi = And((Cmp("=", U, V), Not(Cmp("=", U, e(1)))))
    res, _ = qe_exists(U, phi)
    assert equivalent(res, Not(Cmp("=", V, e(1))))


@given(st.sampled_from(["<", "<="]), st.integers(-3, 3), st.integers(-3, 3))
def test_qe_witness_contract_lra(op, lo, hi):
    # whenever ∃x.φ holds, the witness term satisfies φ
    phi = And((Cmp(op, c(lo), X), Cmp(op, X, c(hi))))
    res, tau = qe_exists(X, phi)
    if check_sat_qf(res) is None:
        return
    inst = substitute_virtual(phi, X, tau)
    assert check_sat_qf(conj((res, nnf(neg(inst))))) is None


def test_eliminate_quantifiers_nested():
    phi = Forall(X, Exists(Y, Cmp("<", X, Y)))
    assert equivalent(eliminate_quantifiers(phi), TRUE)
    phi = Exists(X, Forall(Y, Cmp("<", Y, X)))
    assert equivalent(eliminate_quantifiers(phi), FALSE)


# ---------------------------------------------------------------------------
# universal witnesses


def test_witness_for_universal_contract():
    # τ with ¬∃x.¬φ ⊨ φ[τ/x]; here the matrix is z ≤ y → z < 0
    matrix = Or((Not(Cmp("<=", Z, Y)), Cmp("<", Z, c(0))))
    tau = witness_for_universal(Z, matrix)
    inst = substitute_virtual(matrix, Z, tau)
    closure = Not(Exists(Z, nnf(neg(matrix))))
    refuted = check_sat_qf(
        conj((eliminate_quantifiers(closure), nnf(neg(inst))))
    )
    assert refuted is None


def test_witness_for_universal_is_plain():
    # universal witnesses must be substitutable under predicate atoms,
    # so no virtual elements may appear
    from foalt.theory import CondTerm, EpsAbove, MinusInf

    matrix = Or((Not(Cmp("<=", Z, Y)), Cmp("<", Z, c(0))))
    tau = witness_for_universal(Z, matrix)

    def plain_only(t):
        if isinstance(t, (MinusInf, EpsAbove)):
            return False
        if isinstance(t, CondTerm):
            return all(plain_only(b) for _, b in t.branches) and plain_only(t.default)
        return True

    assert plain_only(tau)


# ---------------------------------------------------------------------------
# quantifier-free satisfiability


def test_check_sat_qf_lra_model():
    phi = And((Cmp("<", c(0), X), Cmp("<", X, c(1))))
    m = check_sat_qf(phi)
    assert m is not None
    assert evaluate(phi, dict(m.valuation))


def test_check_sat_qf_lra_unsat():
    phi = And((Cmp("<=", X, Y), Cmp("<=", Y, Z), Cmp("<", Z, X)))
    assert check_sat_qf(phi) is None


def test_check_sat_qf_eq_congruence():
    # u = v ∧ v = w ∧ u ≠ w is unsatisfiable
    W = Var("w", ID)
    phi = And((Cmp("=", U, V), Cmp("=", V, W), Not(Cmp("=", U, W))))
    assert check_sat_qf(phi) is None


def test_check_sat_qf_eq_distinct_constants():
    assert check_sat_qf(Cmp("=", e(0), e(1))) is None
    assert check_sat_qf(Not(Cmp("=", e(0), e(1)))) is not None


def test_check_sat_qf_boolean_structure():
    phi = And((Or((Cmp("<", X, c(0)), Cmp("<", c(0), X))), Cmp("=", X, c(0))))
    assert check_sat_qf(phi) is None


# ---------------------------------------------------------------------------
# quantified refutation


def test_try_refute_simple_forall():
    phi = And((Cmp("<=", c(0), X), Forall(Y, Or((Not(Cmp("<=", c(0), Y)), Cmp("<", Y, X))))))
    # instantiating y := x refutes
    assert try_refute(phi) == "unsat"


def test_try_refute_sat_returns_unknown_or_sat():
    phi = Exists(X, Cmp("<", X, c(0)))
    assert try_refute(phi) in ("sat", "unknown")


def test_try_refute_is_sound():
    # a satisfiable quantified formula must never come back unsat
    phi = Forall(X, Exists(Y, Cmp("<", X, Y)))
    assert try_refute(phi) != "unsat"
