"""Data-theory engine for equality (EQ) and linear rational arithmetic (LRA).

Provides ground evaluation, witness-producing quantifier elimination
(Loos-Weispfenning test points for LRA, equality case splits plus a
fresh-value construct for EQ), virtual substitution of extended terms,
and a complete satisfiability check for quantifier-free formulas with
uninterpreted predicate atoms (DPLL over congruence closure and
Fourier-Motzkin with exact rationals).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .logic import (
    App,
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
    Pred,
    REAL,
    TRUE,
    Term,
    Var,
    ZERO,
    conj,
    disj,
    free_vars,
    neg,
    nnf,
    pred_atoms,
    rconst,
    simplify,
    subst_term,
    substitute,
    term_sort,
    term_vars,
)


class NonLinearError(Exception):
    pass


# ---------------------------------------------------------------------------
# extended (witness) terms


@dataclass(frozen=True)
class Plain:
    term: Term

    def __repr__(self):
        return repr(self.term)


@dataclass(frozen=True)
class MinusInf:
    def __repr__(self):
        return "-oo"


MINUS_INF = MinusInf()


@dataclass(frozen=True)
class EpsAbove:
    term: Term

    def __repr__(self):
        return f"({self.term!r} + eps)"


@dataclass(frozen=True)
class CondTerm:
    cond: object
    then: object
    els: object

    def __repr__(self):
        return f"(ite {self.cond!r} {self.then!r} {self.els!r})"


ExtendedTerm = Plain | MinusInf | EpsAbove | CondTerm


# ---------------------------------------------------------------------------
# linear forms


def linearize(t: Term) -> tuple[dict, Fraction]:
    """Decompose a Real term into (variable coefficients, constant)."""
    if isinstance(t, Var):
        return {t: Fraction(1)}, Fraction(0)
    if isinstance(t, Const):
        return {}, Fraction(t.value)
    coeffs: dict = {}
    const = Fraction(0)

    def add(c, k):
        for v, x in c.items():
            coeffs[v] = coeffs.get(v, Fraction(0)) + k * x
            if coeffs[v] == 0:
                del coeffs[v]

    if t.fn == "+":
        for a in t.args:
            c, k = linearize(a)
            add(c, Fraction(1))
            const += k
        return coeffs, const
    if t.fn == "-":
        c, k = linearize(t.args[0])
        if len(t.args) == 1:
            add(c, Fraction(-1))
            const -= k
        else:
            add(c, Fraction(1))
            const += k
            for a in t.args[1:]:
                c2, k2 = linearize(a)
                add(c2, Fraction(-1))
                const -= k2
        return coeffs, const
    if t.fn == "*":
        lhs, rhs = t.args
        if isinstance(lhs, Const):
            c, k = linearize(rhs)
            add(c, Fraction(lhs.value))
            return coeffs, const + Fraction(lhs.value) * k
        if isinstance(rhs, Const):
            c, k = linearize(lhs)
            add(c, Fraction(rhs.value))
            return coeffs, const + Fraction(rhs.value) * k
        raise NonLinearError(repr(t))
    if t.fn == "/":
        num, den = t.args
        if not isinstance(den, Const) or den.value == 0:
            raise NonLinearError(repr(t))
        c, k = linearize(num)
        add(c, Fraction(1) / Fraction(den.value))
        return coeffs, const / Fraction(den.value)
    raise NonLinearError(repr(t))


def term_of_linear(coeffs: dict, const: Fraction) -> Term:
    parts = []
    for v in sorted(coeffs, key=lambda u: (u.name, u.stamp if u.stamp is not None else -1)):
        k = coeffs[v]
        parts.append(v if k == 1 else App("*", (rconst(k), v)))
    if const != 0 or not parts:
        parts.append(rconst(const))
    return parts[0] if len(parts) == 1 else App("+", tuple(parts))


def atom_of_linear(op: str, coeffs: dict, const: Fraction):
    if not coeffs:
        if op == "=":
            return TRUE if const == 0 else FALSE
        if op == "<=":
            return TRUE if const <= 0 else FALSE
        return TRUE if const < 0 else FALSE
    return Cmp(op, term_of_linear(coeffs, const), rconst(0))


def scale(coeffs: dict, k: Fraction) -> dict:
    return {v: c * k for v, c in coeffs.items()} if k != 1 else dict(coeffs)


def lin_add(c1, k1, c2, k2) -> tuple[dict, Fraction]:
    out = dict(c1)
    for v, c in c2.items():
        out[v] = out.get(v, Fraction(0)) + c
        if out[v] == 0:
            del out[v]
    return out, k1 + k2


# ---------------------------------------------------------------------------
# literal normal form


def canon_atom(a: Cmp):
    """Canonical literal form t ⋈ 0 with sorted monomials (Real atoms only)."""
    if term_sort(a.lhs) != REAL:
        return a
    cl, kl = linearize(a.lhs)
    cr, kr = linearize(a.rhs)
    coeffs, const = lin_add(cl, kl, scale(cr, Fraction(-1)), -kr)
    if a.op == "=" and coeffs:
        lead = min(coeffs, key=lambda u: (u.name, u.stamp if u.stamp is not None else -1))
        if coeffs[lead] < 0:
            coeffs = scale(coeffs, Fraction(-1))
            const = -const
    return atom_of_linear(a.op, coeffs, const)


def literal_nnf(phi):
    """NNF with negated inequalities normalized to atoms and Real atoms
    canonicalized; only ``not`` is left wrapping equalities and predicate
    atoms."""
    phi = nnf(phi)

    def walk(f):
        if isinstance(f, Pred):
            return f
        if isinstance(f, Cmp):
            return canon_atom(f)
        if isinstance(f, Not):
            a = f.arg
            if isinstance(a, Cmp):
                a = canon_atom(a)
                if not isinstance(a, Cmp):
                    return neg(a)
                if a.op == "<=":
                    return canon_atom(Cmp("<", a.rhs, a.lhs))
                if a.op == "<":
                    return canon_atom(Cmp("<=", a.rhs, a.lhs))
                return Not(a)
            return f
        if isinstance(f, (And, Or)):
            return type(f)(tuple(walk(x) for x in f.args))
        return type(f)(f.var, walk(f.body))

    return walk(phi)


def _atoms_with(phi, x: Var):
    """Cmp atoms (and negated equalities) mentioning x, deduplicated in order."""
    out, seen = [], set()

    def walk(f):
        if isinstance(f, Cmp):
            if x in term_vars(f.lhs) | term_vars(f.rhs) and f not in seen:
                seen.add(f)
                out.append((f, False))
        elif isinstance(f, Not):
            a = f.arg
            if isinstance(a, Cmp) and x in term_vars(a.lhs) | term_vars(a.rhs):
                if f not in seen:
                    seen.add(f)
                    out.append((a, True))
            elif not isinstance(a, (Cmp, Pred)):
                walk(a)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        elif isinstance(f, (Exists, Forall)):
            walk(f.body)

    walk(phi)
    return out


# ---------------------------------------------------------------------------
# virtual substitution


def substitute_virtual(phi, x: Var, tau: ExtendedTerm):
    """Substitute an extended term for the free variable x."""
    if isinstance(tau, Plain):
        return simplify(literal_nnf(substitute(phi, {x: tau.term})))
    if isinstance(tau, CondTerm):
        a = substitute_virtual(phi, x, tau.then)
        b = substitute_virtual(phi, x, tau.els)
        return simplify(disj((conj((tau.cond, a)), conj((literal_nnf(neg(tau.cond)), b)))))
    if x.sort != REAL:
        raise ValueError("virtual element substituted for a non-Real variable")

    def walk(f):
        if isinstance(f, Pred):
            if any(x in term_vars(a) for a in f.args):
                raise ValueError("virtual element under a predicate atom")
            return f
        if isinstance(f, Cmp):
            return _virtual_atom(f, False, x, tau)
        if isinstance(f, Not):
            if isinstance(f.arg, Cmp):
                return _virtual_atom(f.arg, True, x, tau)
            return neg(walk(f.arg))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(walk(a) for a in f.args))
        if f.var == x:
            return f
        return type(f)(f.var, walk(f.body))

    return simplify(walk(phi))


def _virtual_atom(atom: Cmp, negated: bool, x: Var, tau):
    cl, kl = linearize(atom.lhs)
    cr, kr = linearize(atom.rhs)
    coeffs, const = lin_add(cl, kl, scale(cr, Fraction(-1)), -kr)
    a = coeffs.pop(x, Fraction(0))
    if a == 0:
        out = atom_of_linear(atom.op, coeffs, const)
        return simplify(neg(out)) if negated else out
    if isinstance(tau, MinusInf):
        if atom.op == "=":
            res = FALSE
        else:  # <= or < : a*x -> -oo iff a > 0
            res = TRUE if a > 0 else FALSE
    else:  # EpsAbove(t)
        ct, kt = linearize(tau.term)
        ncoeffs, nconst = lin_add(coeffs, const, scale(ct, a), a * kt)
        if atom.op == "=":
            res = FALSE
        elif a > 0:
            res = atom_of_linear("<", ncoeffs, nconst)
        else:
            res = atom_of_linear("<=", ncoeffs, nconst)
    if negated:
        res = simplify(neg(res)) if res in (TRUE, FALSE) else literal_nnf(neg(res))
    return res


# ---------------------------------------------------------------------------
# quantifier elimination with witnesses


def qe_exists(x: Var, phi, plain: bool = False) -> tuple[object, ExtendedTerm]:
    """Eliminate ``exists x`` from a quantifier-free formula.

    Returns (psi, tau) with psi equivalent to ∃x.phi and free of x, and
    psi ⊨ phi[tau/x].  Predicate atoms not containing x pass through.
    With ``plain`` the witness avoids the −∞/ε virtual elements (so it can
    be substituted under predicate atoms) at the price of a larger test set.
    """
    phi = simplify(literal_nnf(phi))
    if x not in free_vars(phi):
        return phi, _default_witness(x)
    if x.sort == REAL:
        points = _lra_plain_test_points(x, phi) if plain else _lra_test_points(x, phi)
    else:
        points = _eq_test_points(x, phi)
    disjuncts = []
    for tau in points:
        d = substitute_virtual(phi, x, tau)
        disjuncts.append((tau, d))
    psi = simplify(disj(d for _, d in disjuncts))
    witness = _fold_witness(disjuncts, x, context=psi if plain else None)
    return psi, witness


def _default_witness(x: Var) -> ExtendedTerm:
    if x.sort == REAL:
        return Plain(rconst(0))
    return Plain(Const(EqValue(0), ID))


def _fold_witness(disjuncts, x, context=None) -> ExtendedTerm:
    useful = [(tau, d) for tau, d in disjuncts if d != FALSE]
    if context is not None:
        # prune branches unreachable under the context, and cut the chain
        # once a branch condition is entailed
        pruned = []
        ctx = [context]
        for tau, d in useful:
            if check_sat_qf(conj(ctx + [d])) is None:
                continue
            if check_sat_qf(conj(ctx + [literal_nnf(neg(d))])) is None:
                pruned.append((tau, TRUE))
                break
            pruned.append((tau, d))
            ctx.append(literal_nnf(neg(d)))
        useful = pruned
    if not useful:
        return _default_witness(x)
    witness = useful[-1][0]
    for tau, d in reversed(useful[:-1]):
        if d == TRUE:
            witness = tau
        else:
            witness = CondTerm(d, tau, witness)
    return witness


def _lra_test_points(x: Var, phi) -> list:
    points: list = [MINUS_INF]
    seen = set()
    for atom, negated in _atoms_with(phi, x):
        cl, kl = linearize(atom.lhs)
        cr, kr = linearize(atom.rhs)
        coeffs, const = lin_add(cl, kl, scale(cr, Fraction(-1)), -kr)
        a = coeffs.pop(x, Fraction(0))
        if a == 0:
            continue
        # solution of a*x + r = 0: x = -r/a
        sol = term_of_linear(scale(coeffs, Fraction(-1) / a), -const / a)
        if atom.op == "=" and not negated:
            tau = Plain(sol)
        elif atom.op == "=" and negated:
            tau = EpsAbove(sol)
        elif a < 0 and atom.op == "<=":
            tau = Plain(sol)  # non-strict lower bound
        elif a < 0 and atom.op == "<":
            tau = EpsAbove(sol)  # strict lower bound
        else:
            continue  # upper bounds need no test point
        if tau not in seen:
            seen.add(tau)
            points.append(tau)
    return points


def _lra_plain_test_points(x: Var, phi) -> list:
    """A complete test set of ordinary terms: every atom solution together
    with unit offsets and pairwise midpoints (and 0 as a fallback)."""
    sols = []
    for atom, _negated in _atoms_with(phi, x):
        cl, kl = linearize(atom.lhs)
        cr, kr = linearize(atom.rhs)
        coeffs, const = lin_add(cl, kl, scale(cr, Fraction(-1)), -kr)
        a = coeffs.pop(x, Fraction(0))
        if a == 0:
            continue
        lin = (tuple(sorted(scale(coeffs, Fraction(-1) / a).items(), key=lambda it: repr(it[0]))), -const / a)
        if lin not in sols:
            sols.append(lin)
    points = []

    def add(coeffs, const):
        t = Plain(term_of_linear(dict(coeffs), const))
        if t not in points:
            points.append(t)

    for c, k in sols:
        add(c, k)
        add(c, k - 1)
        add(c, k + 1)
    for i, (ci, ki) in enumerate(sols):
        for cj, kj in sols[i + 1 :]:
            mid = lin_add(scale(dict(ci), Fraction(1, 2)), ki / 2, scale(dict(cj), Fraction(1, 2)), kj / 2)
            add(tuple(sorted(mid[0].items(), key=lambda it: repr(it[0]))), mid[1])
    add((), Fraction(0))
    return points


def _eq_test_points(x: Var, phi) -> list:
    partners: list[Term] = []
    seen = set()
    for atom, _negated in _atoms_with(phi, x):
        if atom.op != "=":
            raise ValueError(f"non-equality atom on sort Id: {atom!r}")
        for side, other in ((atom.lhs, atom.rhs), (atom.rhs, atom.lhs)):
            if side == x:
                if x in term_vars(other):
                    continue
                if other not in seen:
                    seen.add(other)
                    partners.append(other)
    points = [Plain(t) for t in partners]
    points.append(Plain(App("fresh!", tuple(partners))))
    return points


def witness_for_universal(x: Var, matrix) -> ExtendedTerm:
    """Witness for a universal quantifier: a value making ¬matrix true when
    one exists (so substituting it preserves unsatisfiability)."""
    _, tau = qe_exists(x, literal_nnf(neg(matrix)), plain=True)
    return tau


def eliminate_quantifiers(phi):
    """Full QE for predicate-free formulas (bottom-up)."""
    if isinstance(phi, (Pred, Cmp)):
        return phi
    if isinstance(phi, Not):
        return simplify(neg(eliminate_quantifiers(phi.arg)))
    if isinstance(phi, (And, Or)):
        return simplify(type(phi)(tuple(eliminate_quantifiers(a) for a in phi.args)))
    body = eliminate_quantifiers(phi.body)
    if isinstance(phi, Exists):
        return qe_exists(phi.var, body)[0]
    return simplify(neg(qe_exists(phi.var, literal_nnf(neg(body)))[0]))


# ---------------------------------------------------------------------------
# ground evaluation


def eval_term(t: Term, nu: dict):
    if isinstance(t, Var):
        if t not in nu:
            raise KeyError(f"unbound variable {t!r}")
        return nu[t]
    if isinstance(t, Const):
        return t.value
    if t.fn == "fresh!":
        used = {eval_term(a, nu) for a in t.args}
        i = 0
        while EqValue(i) in used:
            i += 1
        return EqValue(i)
    args = [eval_term(a, nu) for a in t.args]
    if t.fn == "+":
        return sum(args, Fraction(0))
    if t.fn == "-":
        if len(args) == 1:
            return -args[0]
        out = args[0]
        for a in args[1:]:
            out -= a
        return out
    if t.fn == "*":
        return args[0] * args[1]
    if t.fn == "/":
        return args[0] / args[1]
    raise ValueError(f"unknown function {t.fn}")


def _domain_values(domain, sort):
    if isinstance(domain, dict):
        return domain.get(sort, [])
    want = Fraction if sort == REAL else EqValue
    return [v for v in domain if isinstance(v, want)]


def evaluate(phi, nu: dict, interp: dict | None = None, domain=None) -> bool:
    """Tarskian truth under valuation nu.

    Predicate atoms require a finite interpretation ``interp`` (symbol ->
    set of value tuples).  Quantifiers range over ``domain`` when given;
    otherwise the formula under the quantifier must be predicate-free and
    is resolved by quantifier elimination.
    """
    if isinstance(phi, Pred):
        if interp is None:
            raise ValueError("predicate atom without interpretation")
        vals = tuple(eval_term(a, nu) for a in phi.args)
        return vals in interp.get(phi.sym, set())
    if isinstance(phi, Cmp):
        lv, rv = eval_term(phi.lhs, nu), eval_term(phi.rhs, nu)
        if phi.op == "=":
            return lv == rv
        if phi.op == "<=":
            return lv <= rv
        return lv < rv
    if isinstance(phi, Not):
        return not evaluate(phi.arg, nu, interp, domain)
    if isinstance(phi, And):
        return all(evaluate(a, nu, interp, domain) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate(a, nu, interp, domain) for a in phi.args)
    v = phi.var
    if domain is not None:
        values = _domain_values(domain, v.sort)
        results = (evaluate(phi.body, {**nu, v: d}, interp, domain) for d in values)
        return any(results) if isinstance(phi, Exists) else all(results)
    if pred_atoms(phi):
        raise ValueError("unbounded quantifier over predicate atoms; use the oracle")
    ground = eliminate_quantifiers(phi)
    return evaluate(ground, nu, interp, domain)


# ---------------------------------------------------------------------------
# satisfiability of quantifier-free formulas


@dataclass
class Model:
    valuation: dict  # Var -> value
    atoms: dict  # Pred -> bool


def _expand_real_equalities(phi):
    """Rewrite Real (dis)equalities into inequalities for the FM backend."""
    if isinstance(phi, Cmp):
        if phi.op == "=" and term_sort(phi.lhs) == REAL:
            return And((Cmp("<=", phi.lhs, phi.rhs), Cmp("<=", phi.rhs, phi.lhs)))
        return phi
    if isinstance(phi, Not):
        a = phi.arg
        if isinstance(a, Cmp) and a.op == "=" and term_sort(a.lhs) == REAL:
            return Or((Cmp("<", a.lhs, a.rhs), Cmp("<", a.rhs, a.lhs)))
        return phi
    if isinstance(phi, Pred):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_expand_real_equalities(a) for a in phi.args))
    return type(phi)(phi.var, _expand_real_equalities(phi.body))


def _ackermann_axioms(phi):
    """Congruence axioms: same predicate symbol + equal arguments ⇒ equal truth."""
    atoms = []
    for p in pred_atoms(phi):
        if p not in atoms:
            atoms.append(p)
    axioms = []
    for i, p in enumerate(atoms):
        for q in atoms[i + 1 :]:
            if p.sym != q.sym or not p.args:
                continue
            args_eq = conj(Cmp("=", a, b) for a, b in zip(p.args, q.args))
            if args_eq == FALSE:
                continue
            same = disj((conj((p, q)), conj((Not(p), Not(q)))))
            axioms.append(disj((literal_nnf(neg(args_eq)), same)))
    return axioms


def _pick_atom(phi):
    if isinstance(phi, (Pred, Cmp)):
        return phi
    if isinstance(phi, Not):
        return _pick_atom(phi.arg)
    for a in phi.args:
        r = _pick_atom(a)
        if r is not None:
            return r
    return None


def _assign(phi, atom, value: bool):
    if phi == atom:
        return TRUE if value else FALSE
    if isinstance(phi, (Pred, Cmp)):
        return phi
    if isinstance(phi, Not):
        return neg(_assign(phi.arg, atom, value))
    return type(phi)(tuple(_assign(a, atom, value) for a in phi.args))


def check_sat_qf(phi, predicates_as_booleans: bool = True) -> Model | None:
    """Complete satisfiability check for quantifier-free formulas.

    Distinct predicate atoms are treated as booleans constrained by
    congruence axioms.  Returns a model (variable valuation plus truth
    assignment of the predicate atoms) or None for unsatisfiable.
    """
    phi = simplify(literal_nnf(phi))
    if not predicates_as_booleans and pred_atoms(phi):
        raise ValueError("predicate atoms present")
    phi = conj([phi] + _ackermann_axioms(phi))
    phi = simplify(_expand_real_equalities(phi))
    fvs = free_vars(phi)

    def search(f, lits):
        if f == FALSE:
            return None
        if f == TRUE:
            return _theory_model(lits, fvs)
        atom = _pick_atom(f)
        for value in (True, False):
            lit = atom if value else literal_nnf(neg(atom))
            new_lits = lits + [lit]
            if isinstance(atom, Cmp) and _theory_model(new_lits, fvs) is None:
                continue
            r = search(simplify(_assign(f, atom, value)), new_lits)
            if r is not None:
                return r
        return None

    return search(phi, [])


def _theory_model(lits, fvs) -> Model | None:
    """Feasibility of a literal conjunction; returns a total model or None."""
    real_lits, id_lits, atoms = [], [], {}
    for lit in lits:
        a = lit.arg if isinstance(lit, Not) else lit
        if isinstance(a, Pred):
            atoms[a] = not isinstance(lit, Not)
            continue
        sort = term_sort(a.lhs)
        (real_lits if sort == REAL else id_lits).append(lit)
    rvars = {v for v in fvs if v.sort == REAL}
    for lit in real_lits:
        a = lit.arg if isinstance(lit, Not) else lit
        rvars |= {v for v in term_vars(a.lhs) | term_vars(a.rhs) if v.sort == REAL}
    rmodel = _solve_lra(real_lits, rvars)
    if rmodel is None:
        return None
    imodel = _solve_eq(id_lits, {v for v in fvs if v.sort == ID})
    if imodel is None:
        return None
    valuation = {**rmodel, **imodel}
    for v in fvs:
        valuation.setdefault(v, Fraction(0) if v.sort == REAL else EqValue(0))
    return Model(valuation, atoms)


# -- linear rational arithmetic: Fourier-Motzkin with back-substitution


def _solve_lra(lits, variables) -> dict | None:
    ineqs = []  # (coeffs, const, strict): sum + const <= 0 (or < 0)
    eqs = []
    for lit in lits:
        assert not isinstance(lit, Not), "Real disequalities expanded earlier"
        a = lit
        cl, kl = linearize(a.lhs)
        cr, kr = linearize(a.rhs)
        coeffs, const = lin_add(cl, kl, scale(cr, Fraction(-1)), -kr)
        if a.op == "=":
            eqs.append((coeffs, const))
        else:
            ineqs.append((coeffs, const, a.op == "<"))
    # Gaussian elimination of equalities
    defs = []  # (var, coeffs, const): var = expr
    while eqs:
        coeffs, const = eqs.pop()
        if not coeffs:
            if const != 0:
                return None
            continue
        v = sorted(coeffs, key=lambda u: (u.name, u.stamp or 0))[0]
        a = coeffs.pop(v)
        expr = (scale(coeffs, Fraction(-1) / a), -const / a)
        defs.append((v, expr))
        eqs = [_subst_lin(c, k, v, expr) for c, k in eqs]
        ineqs = [(*_subst_lin(c, k, v, expr), s) for c, k, s in ineqs]
        defs = [(u, _subst_lin(c, k, v, expr)) for u, (c, k) in defs]
    # Fourier-Motzkin
    order = sorted({v for c, _k, _s in ineqs for v in c}, key=lambda u: (u.name, u.stamp or 0))
    stack = []
    system = ineqs
    for v in order:
        lowers, uppers, rest = [], [], []
        for c, k, s in system:
            a = c.get(v, Fraction(0))
            if a > 0:
                uppers.append((c, k, s))
            elif a < 0:
                lowers.append((c, k, s))
            else:
                rest.append((c, k, s))
        stack.append((v, lowers, uppers))
        for cl_, kl_, sl in lowers:
            for cu, ku, su in uppers:
                al, au = -cl_[v], cu[v]
                # combine: scale lower by au, upper by al, add; v cancels
                c = dict((u, x * au) for u, x in cl_.items())
                for u, x in cu.items():
                    c[u] = c.get(u, Fraction(0)) + x * al
                    if c[u] == 0:
                        del c[u]
                c.pop(v, None)
                rest.append((c, kl_ * au + ku * al, sl or su))
        system = []
        for c, k, s in rest:
            if not c:
                if k > 0 or (s and k == 0):
                    return None
            else:
                system.append((c, k, s))
    # back-substitute a sample point
    model: dict = {}
    for v, lowers, uppers in reversed(stack):
        lo = hi = None
        lo_strict = hi_strict = False
        for c, k, s in lowers:
            a = c[v]
            val = (k + sum(x * model[u] for u, x in c.items() if u != v)) / (-a)
            if lo is None or val > lo or (val == lo and s):
                lo, lo_strict = val, s
        for c, k, s in uppers:
            a = c[v]
            val = -(k + sum(x * model[u] for u, x in c.items() if u != v)) / a
            if hi is None or val < hi or (val == hi and s):
                hi, hi_strict = val, s
        if lo is None and hi is None:
            model[v] = Fraction(0)
        elif lo is None:
            model[v] = hi - 1 if hi_strict else hi
        elif hi is None:
            model[v] = lo + 1 if lo_strict else lo
        else:
            if lo > hi or (lo == hi and (lo_strict or hi_strict)):
                return None
            model[v] = (lo + hi) / 2 if (lo_strict or hi_strict) else lo
    for v, (c, k) in reversed(defs):
        model[v] = sum((x * model[u] for u, x in c.items()), Fraction(0)) + k
    for v in variables:
        model.setdefault(v, Fraction(0))
    return model


def _subst_lin(coeffs, const, v, expr):
    a = coeffs.get(v)
    if a is None:
        return coeffs, const
    ec, ek = expr
    out = {u: x for u, x in coeffs.items() if u != v}
    for u, x in ec.items():
        out[u] = out.get(u, Fraction(0)) + a * x
        if out[u] == 0:
            del out[u]
    return out, const + a * ek


# -- equality over an infinite domain: congruence closure


def _solve_eq(lits, variables) -> dict | None:
    terms: list[Term] = []

    def note(t):
        if t not in terms:
            terms.append(t)
        if isinstance(t, App):
            for a in t.args:
                note(a)

    eqs, neqs = [], []
    for lit in lits:
        a = lit.arg if isinstance(lit, Not) else lit
        note(a.lhs)
        note(a.rhs)
        (neqs if isinstance(lit, Not) else eqs).append((a.lhs, a.rhs))
    for v in variables:
        note(v)
    parent: dict = {t: t for t in terms}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for lhs, rhs in eqs:
        union(lhs, rhs)
    # congruence for fresh! applications
    changed = True
    apps = [t for t in terms if isinstance(t, App)]
    while changed:
        changed = False
        for i, s in enumerate(apps):
            for t in apps[i + 1 :]:
                if s.fn == t.fn and len(s.args) == len(t.args) and find(s) != find(t):
                    if all(find(a) == find(b) for a, b in zip(s.args, t.args)):
                        union(s, t)
                        changed = True
    # implicit constraints
    for t in apps:
        if t.fn == "fresh!":
            for a in t.args:
                neqs.append((t, a))
    classes: dict = {}
    for t in terms:
        classes.setdefault(find(t), []).append(t)
    value: dict = {}
    used = set()
    for root, members in classes.items():
        consts = {m.value for m in members if isinstance(m, Const)}
        if len(consts) > 1:
            return None
        if consts:
            value[root] = consts.pop()
            used.add(value[root])
    for lhs, rhs in neqs:
        if find(lhs) == find(rhs):
            return None
    i = 0
    for root in sorted(classes, key=lambda r: terms.index(r)):
        if root in value:
            continue
        while EqValue(i) in used:
            i += 1
        value[root] = EqValue(i)
        used.add(EqValue(i))
        i += 1
    return {v: value[find(v)] for v in variables if v in parent}


# ---------------------------------------------------------------------------
# quantified refutation (sound, possibly incomplete)


UNSAT, SAT, UNKNOWN = "unsat", "sat", "unknown"

ZERO_TERM_POOL = {REAL: [ZERO], ID: [Const(EqValue(0), ID)]}


def try_refute(phi, inst_limit: int = 24, max_instances: int = 512) -> str:
    """Decide satisfiability of a (possibly quantified) formula.

    Exact for predicate-free formulas (full QE) and for formulas whose
    quantifiers are all positive existentials.  Otherwise universal
    quantifiers are instantiated over ground candidate terms, which makes
    'unsat' sound and turns 'sat' into 'unknown'.
    """
    phi = simplify(nnf(phi))
    if phi == TRUE:
        return SAT
    if phi == FALSE:
        return UNSAT
    if not pred_atoms(phi):
        ground = eliminate_quantifiers(phi)
        return UNSAT if check_sat_qf(ground) is None else SAT
    counter = [0]
    approx = [False]
    skolemized = _skolemize_outer(phi, counter)
    pool = {REAL: _ground_terms(skolemized, REAL), ID: _ground_terms(skolemized, ID)}
    if ZERO not in pool[REAL]:
        pool[REAL] = pool[REAL] + [ZERO]
    budget = [max_instances]
    ground = _ground_approx(skolemized, pool, counter, approx, inst_limit, budget)
    if check_sat_qf(ground) is None:
        return UNSAT
    return UNKNOWN if approx[0] else SAT


def _ground_terms(phi, sort) -> list[Term]:
    out, seen = [], set()

    def note(t):
        if term_sort(t) == sort and t not in seen and _is_ground_candidate(t):
            seen.add(t)
            out.append(t)

    def walk(f, bound):
        if isinstance(f, Pred):
            for a in f.args:
                if not (term_vars(a) & bound):
                    note(a)
        elif isinstance(f, Cmp):
            for a in (f.lhs, f.rhs):
                if not (term_vars(a) & bound):
                    note(a)
        elif isinstance(f, Not):
            walk(f.arg, bound)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a, bound)
        else:
            walk(f.body, bound | {f.var})

    walk(phi, frozenset())
    return out


def _is_ground_candidate(t):
    return not isinstance(t, App) or t.fn != "fresh!"


def _skolemize_outer(phi, counter):
    """Replace positive existentials not under a universal by fresh constants."""
    if isinstance(phi, (Pred, Cmp, Not, Forall)):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_skolemize_outer(a, counter) for a in phi.args))
    counter[0] += 1
    sk = Var(f"!sk{counter[0]}", phi.var.sort)
    return _skolemize_outer(substitute(phi.body, {phi.var: sk}), counter)


def _ground_approx(phi, pool, counter, approx, inst_limit, budget):
    if isinstance(phi, (Pred, Cmp, Not)):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_ground_approx(a, pool, counter, approx, inst_limit, budget) for a in phi.args))
    if isinstance(phi, Exists):
        counter[0] += 1
        sk = Var(f"!sk{counter[0]}", phi.var.sort)
        return _ground_approx(substitute(phi.body, {phi.var: sk}), pool, counter, approx, inst_limit, budget)
    # Forall: instantiate over ground candidates from the whole query; the
    # budget keeps nested universals from multiplying out of control
    approx[0] = True
    limit = inst_limit if budget[0] > 0 else 1
    cands = pool.get(phi.var.sort, [])[:limit]
    if not cands:
        cands = [Const(EqValue(0), ID) if phi.var.sort == ID else rconst(0)]
    budget[0] -= len(cands)
    parts = []
    for t in cands:
        parts.append(_ground_approx(substitute(phi.body, {phi.var: t}), pool, counter, approx, inst_limit, budget))
    return conj(parts)


def entails(phi, psi, inst_limit: int = 24) -> str:
    """Three-valued entailment phi ⊨ psi via refutation of phi ∧ ¬psi."""
    r = try_refute(conj((phi, nnf(neg(psi)))), inst_limit)
    if r == UNSAT:
        return "yes"
    if r == SAT:
        return "no"
    return UNKNOWN
