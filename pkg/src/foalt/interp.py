"""Witness substitution and generalized interpolant sequences.

For a spurious event sequence, computes witness terms for the universal
quantifiers of the shared Θ/Υ prefix, then chains a strongest-consequence
projection over the witness-substituted Θ matrix to obtain a step-indexed
interpolant sequence (I₀,…,Iₙ) with positive predicate occurrences, and
validates the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .automaton import Foaa
from .logic import (
    And,
    Cmp,
    FALSE,
    Exists,
    Not,
    Or,
    Pred,
    PredSym,
    TRUE,
    Var,
    conj,
    disj,
    free_vars,
    is_positive,
    neg,
    nnf,
    pred_atoms,
    pred_syms,
    simplify,
    stamp,
    substitute,
    term_vars,
)
from .symbolic import SymbolicPath, build_path, path_formula
from .theory import (
    UNKNOWN,
    check_sat_qf,
    eliminate_quantifiers,
    lin_add,
    linearize,
    literal_nnf,
    qe_exists,
    scale,
    substitute_virtual,
    term_of_linear,
    try_refute,
    witness_for_universal,
)


class InterpolationError(Exception):
    pass


@dataclass
class WitnessAssignment:
    """Extended terms for the universal positions of the prefix, in prefix
    order (substitution must be applied innermost-out, i.e. reversed)."""

    items: tuple  # of (Var, ExtendedTerm)


@dataclass
class Gli:
    formulas: tuple  # (I₀, …, Iₙ)
    allowed_vars: tuple  # per index, frozenset of variables


def compute_witnesses(sp: SymbolicPath) -> WitnessAssignment:
    """Witnesses making the Υ (and hence Θ) matrix unsatisfiable after
    substitution; requires Υ(α) to be unsatisfiable."""
    matrix = literal_nnf(sp.upsilon_matrix)
    items = []
    current = matrix
    for q, v in reversed(sp.prefix):
        if q == "E":
            current, _ = qe_exists(v, current)
        else:
            tau = witness_for_universal(v, current)
            items.append((v, tau))
            inner, _ = qe_exists(v, literal_nnf(neg(current)))
            current = simplify(literal_nnf(neg(inner)))
    if check_sat_qf(current, predicates_as_booleans=False) is not None:
        raise InterpolationError("event sequence is not spurious")
    return WitnessAssignment(tuple(reversed(items)))


def substitute_witnesses(phi, wa: WitnessAssignment):
    for v, tau in reversed(wa.items):
        phi = substitute_virtual(phi, v, tau)
    return phi


# ---------------------------------------------------------------------------
# strongest-consequence projection


MAX_DNF = 4096


def _dnf(phi) -> list:
    """Disjunctive normal form of a quantifier-free formula as literal lists."""

    def walk(f):
        if f == TRUE:
            return [[]]
        if f == FALSE:
            return []
        if isinstance(f, (Pred, Cmp, Not)):
            return [[f]]
        if isinstance(f, Or):
            out = []
            for a in f.args:
                out.extend(walk(a))
            return out
        cubes = [[]]
        for a in f.args:
            branch = walk(a)
            cubes = [c + b for c in cubes for b in branch]
            if len(cubes) > MAX_DNF:
                raise InterpolationError("projection blow-up")
        return cubes

    return walk(literal_nnf(phi))


def _ackermann_dropped(phi, keep_preds):
    atoms = []
    for p in pred_atoms(phi):
        if p not in atoms:
            atoms.append(p)
    axioms = []
    for i, p in enumerate(atoms):
        for q in atoms[i + 1 :]:
            if p.sym != q.sym or p.sym in keep_preds or not p.args:
                continue
            args_eq = conj(Cmp("=", a, b) for a, b in zip(p.args, q.args))
            if args_eq == FALSE:
                continue
            same = disj((conj((p, q)), conj((Not(p), Not(q)))))
            axioms.append(disj((literal_nnf(neg(args_eq)), same)))
    return axioms


def _rewrite_args(lits, keep_vars):
    """Use the equality literals of a conjunct to re-express predicate-atom
    arguments over kept variables."""
    from .logic import ID, REAL

    # Id: union-find preferring kept representatives
    parent: dict = {}

    def find(t):
        parent.setdefault(t, t)
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    # Real: gaussian definitions dropped-var -> linear expr
    real_eqs = []
    for lit in lits:
        if isinstance(lit, Cmp) and lit.op == "=":
            from .logic import term_sort

            if term_sort(lit.lhs) == ID:
                union(lit.lhs, lit.rhs)
            else:
                cl, kl = linearize(lit.lhs)
                cr, kr = linearize(lit.rhs)
                real_eqs.append(lin_add(cl, kl, scale(cr, Fraction(-1)), -kr))
    defs = {}
    changed = True
    while changed:
        changed = False
        for coeffs, const in real_eqs:
            c2, k2 = _apply_defs(coeffs, const, defs)
            dropped = [v for v in c2 if v not in keep_vars and v not in defs]
            if len(dropped) == 1 and all(u in keep_vars for u in c2 if u != dropped[0]):
                v = dropped[0]
                a = c2[v]
                expr = (scale({u: x for u, x in c2.items() if u != v}, Fraction(-1) / a), -k2 / a)
                defs[v] = expr
                changed = True
    # choose Id representatives: prefer kept var or constant
    rep: dict = {}
    classes: dict = {}
    for t in parent:
        classes.setdefault(find(t), []).append(t)
    for root, members in classes.items():
        best = None
        for m in members:
            if isinstance(m, Var) and m in keep_vars:
                best = m
                break
            if not isinstance(m, Var) and not (term_vars(m) - keep_vars):
                best = best or m
        for m in members:
            if best is not None:
                rep[m] = best

    def fix_term(t):
        if t in rep:
            return rep[t]
        if isinstance(t, Var) and t.sort == REAL:
            c, k = _apply_defs({t: Fraction(1)}, Fraction(0), defs)
            if all(u in keep_vars for u in c):
                return term_of_linear(c, k)
            return t
        if isinstance(t, Var):
            return t
        try:
            c, k = linearize(t)
        except Exception:
            return t
        c2, k2 = _apply_defs(c, k, defs)
        if all(u in keep_vars for u in c2):
            return term_of_linear(c2, k2)
        return t

    out = []
    for lit in lits:
        atom = lit.arg if isinstance(lit, Not) else lit
        if isinstance(atom, Pred):
            fixed = Pred(atom.sym, tuple(fix_term(a) for a in atom.args))
            out.append(Not(fixed) if isinstance(lit, Not) else fixed)
        else:
            out.append(lit)
    return out


def _apply_defs(coeffs, const, defs):
    coeffs = dict(coeffs)
    changed = True
    while changed:
        changed = False
        for v in list(coeffs):
            if v in defs:
                a = coeffs.pop(v)
                ec, ek = defs[v]
                for u, x in ec.items():
                    coeffs[u] = coeffs.get(u, Fraction(0)) + a * x
                    if coeffs[u] == 0:
                        del coeffs[u]
                const += a * ek
                changed = True
    return coeffs, const


def project(phi, keep_preds: frozenset, keep_vars: frozenset):
    """Strongest consequence of a quantifier-free ``phi`` over the kept
    predicate symbols and variables: congruence axioms for dropped
    predicates, boolean elimination of dropped atoms, quantifier
    elimination of dropped data variables.  Positivity of kept atoms is
    preserved."""
    phi = conj([literal_nnf(phi)] + _ackermann_dropped(phi, keep_preds))
    disjuncts = []
    for lits in _dnf(phi):
        cube = conj(lits)
        if check_sat_qf(cube) is None:
            continue
        lits = _rewrite_args(lits, keep_vars)
        kept = []
        for lit in lits:
            atom = lit.arg if isinstance(lit, Not) else lit
            if isinstance(atom, Pred):
                if (
                    atom.sym in keep_preds
                    and not isinstance(lit, Not)
                    and all(term_vars(a) <= keep_vars for a in atom.args)
                ):
                    kept.append(lit)
                # dropped (or negative, or out-of-vocabulary) atoms are
                # existentially eliminated, i.e. simply dropped
            else:
                kept.append(lit)
        out = conj(kept)
        preds_part = [l for l in kept if isinstance(l, Pred)]
        data_part = [l for l in kept if not isinstance(l, Pred)]
        data = conj(data_part)
        for v in sorted(free_vars(data) - keep_vars, key=lambda u: (u.name, u.stamp or 0)):
            data, _ = qe_exists(v, data)
        out = simplify(conj([data] + preds_part))
        if out == TRUE:
            return TRUE
        if out not in disjuncts:
            disjuncts.append(out)
    return simplify(disj(disjuncts))


# ---------------------------------------------------------------------------
# interpolant sequence


def _allowed_vars(a: Foaa, sp: SymbolicPath, k: int) -> frozenset:
    out = set()
    for i in range(1, k + 1):
        for v in a.input_vars:
            out.add(Var(v.name, v.sort, i))
    for (q, v), step in zip(sp.prefix, sp.xi):
        if q == "E" and step <= k:
            out.add(v)
    return frozenset(out)


def compute_gli(a: Foaa, sp: SymbolicPath, wa: WitnessAssignment) -> Gli:
    """Chain projections over the witness-substituted Θ matrix."""
    n = len(sp.alpha)
    base = substitute_witnesses(sp.base_matrix, wa)
    steps = [substitute_witnesses(conj(g), wa) for g in sp.step_groups]
    final = substitute_witnesses(conj(sp.final_group), wa)

    formulas = []
    allowed = []
    keep0 = frozenset(PredSym(s.sym.name, s.sym.arity, 0) for s in a.states)
    vars0 = _allowed_vars(a, sp, 0)
    current = project(base, keep0, vars0)
    formulas.append(current)
    allowed.append(vars0)
    for k in range(1, n + 1):
        keep = frozenset(PredSym(s.sym.name, s.sym.arity, k) for s in a.states)
        vars_k = _allowed_vars(a, sp, k)
        current = project(conj((current, steps[k - 1])), keep, vars_k)
        formulas.append(current)
        allowed.append(vars_k)
    if check_sat_qf(conj((formulas[n], final))) is not None:
        raise InterpolationError("projection did not produce an interpolant (final stage satisfiable)")
    g = Gli(tuple(formulas), tuple(allowed))
    for k, i_k in enumerate(g.formulas):
        if not is_positive(i_k, pred_syms(i_k)):
            raise InterpolationError(f"negative predicate occurrence in I_{k}")
    return g


# ---------------------------------------------------------------------------
# validation


def _final_axiom_unsat(a: Foaa, phi, step: int) -> bool:
    """Exact check of I ∧ ⋀_{q∉F} ∀y⃗. q⁽ˢ⁾(y⃗) → ⊥ being unsatisfiable,
    via monotone substitution (positive formulas only)."""
    finals = {PredSym(s.sym.name, s.sym.arity, step) for s in a.states if s.final}

    def repl(atom: Pred):
        return TRUE if atom.sym in finals else FALSE

    from .symbolic import _replace_atoms

    grounded = simplify(_replace_atoms(phi, repl))
    ground = eliminate_quantifiers(grounded)
    return check_sat_qf(ground, predicates_as_booleans=False) is None


def validate_gli(a: Foaa, alpha, g: Gli, solver=None):
    """Check the interpolant-sequence conditions; True, False, or 'unknown'."""
    n = len(alpha)
    if len(g.formulas) != n + 1:
        return False
    statuses = []
    names = a.input_names()
    # (1) positivity and vocabulary bounds
    for k, i_k in enumerate(g.formulas):
        syms = pred_syms(i_k)
        if not is_positive(i_k, syms):
            return False
        if any(s.stamp != k for s in syms):
            return False
        if k < len(g.allowed_vars) and not free_vars(i_k) <= g.allowed_vars[k]:
            return False
    # (3) final stage inconsistent with the final-state axioms (exact)
    if not _final_axiom_unsat(a, g.formulas[n], n):
        return False

    # (2) initial entailment and one-step chain
    sp = None

    def fallback_pieces():
        nonlocal sp
        if sp is None:
            sp = build_path(a, alpha)
            wa = compute_witnesses(sp)
            base = substitute_witnesses(sp.base_matrix, wa)
            steps = [substitute_witnesses(conj(gr), wa) for gr in sp.step_groups]
            fallback_pieces.cache = (base, steps)
        return fallback_pieces.cache

    init = stamp(a.initial, 0, names)
    statuses.append(_entailment_status(init, g.formulas[0], solver, lambda: fallback_pieces()[0]))
    for k in range(1, n + 1):
        axioms = _step_axioms(a, alpha[k - 1], k)
        lhs = conj([g.formulas[k - 1]] + axioms)
        statuses.append(
            _entailment_status(lhs, g.formulas[k], solver, lambda k=k: conj((g.formulas[k - 1], fallback_pieces()[1][k - 1])))
        )
    if any(s == "no" for s in statuses):
        return False
    if any(s == UNKNOWN for s in statuses):
        return UNKNOWN
    return True


def _step_axioms(a: Foaa, event: str, k: int) -> list:
    from .logic import Forall

    names = a.input_names()
    axioms = []
    for s in a.states:
        r = a.rule_for(s.sym, event)
        params = r.params if r else tuple(Var(f"y{j+1}", srt) for j, srt in enumerate(s.sorts))
        body = stamp(r.body, k, names) if r else FALSE
        head = Pred(PredSym(s.sym.name, s.sym.arity, k - 1), params)
        impl = disj((Not(head), body))
        for p in reversed(params):
            impl = Forall(p, impl)
        axioms.append(impl)
    return axioms


def _entailment_status(lhs, rhs, solver, fallback_lhs):
    """Status of lhs ⊨ ∃(new vars of rhs). rhs."""
    new = free_vars(rhs) - free_vars(lhs)
    closed = rhs
    for v in sorted(new, key=lambda u: (u.name, u.stamp or 0)):
        closed = Exists(v, closed)
    # sound quantifier-free check first: the witness-instantiated step
    # conjuncts are entailed by the axioms, so lhs' ∧ ¬rhs unsat implies
    # the entailment
    try:
        qf = conj((fallback_lhs(), nnf(neg(rhs))))
        if check_sat_qf(qf) is None:
            return "yes"
    except Exception:
        pass
    query = conj((lhs, nnf(neg(closed))))
    if solver is not None:
        r = solver.check(query)
    else:
        r = try_refute(query)
    if r == "unsat":
        return "yes"
    if r == "sat":
        return "no"
    return UNKNOWN
