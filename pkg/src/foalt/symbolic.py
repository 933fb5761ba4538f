"""Symbolic execution over event sequences.

Builds the path and acceptance formulas of an event sequence, the
path-quantifier-eliminated form Θ and the predicate-free form Υ (fused in
one pass sharing a single prenex prefix), and decides per-sequence
satisfiability and word membership through quantifier elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .automaton import Foaa
from .logic import (
    And,
    Const,
    EqValue,
    FALSE,
    ID,
    Not,
    Or,
    Pred,
    PredSym,
    Prenex,
    REAL,
    TRUE,
    Var,
    conj,
    disj,
    free_vars,
    fresh_name,
    neg,
    prenex,
    rename_apart,
    simplify,
    stamp,
    substitute,
    term_vars,
)
from .theory import check_sat_qf, eliminate_quantifiers, evaluate


class SymbolicError(Exception):
    pass


@dataclass
class SymbolicPath:
    """Θ(α) and Υ(α) sharing one quantifier prefix.

    ``prefix``/``xi``: the common prenex prefix and, per position, the step
    at which the quantifier entered.  ``base_matrix`` is the stamped initial
    condition's matrix; ``step_groups[i]`` are the implications added at
    step i+1; ``final_group`` the final-state conjuncts.  ``expansions``
    maps each predicate-atom occurrence to its Υ-expansion.
    """

    alpha: tuple
    prefix: tuple  # of ('E'|'A', Var)
    xi: tuple  # of int, same length as prefix
    base_matrix: object
    step_groups: tuple  # of tuple of formulas (implications per step)
    final_group: tuple
    upsilon_matrix: object

    @property
    def theta_matrix(self):
        parts = [self.base_matrix]
        for g in self.step_groups:
            parts.extend(g)
        parts.extend(self.final_group)
        return conj(parts)

    @property
    def theta(self) -> Prenex:
        return Prenex(self.prefix, self.theta_matrix)

    @property
    def upsilon(self) -> Prenex:
        return Prenex(self.prefix, self.upsilon_matrix)


def _check_alpha(a: Foaa, alpha):
    for e in alpha:
        if e not in a.events:
            raise SymbolicError(f"unknown event '{e}'")


def path_formula(a: Foaa, alpha) -> object:
    """The stamped one-rule-per-occurrence-free encoding of all executions:
    initial condition at step 0 plus one universal implication per
    (state, event) pair at each step."""
    _check_alpha(a, alpha)
    names = a.input_names()
    parts = [stamp(a.initial, 0, names)]
    for i, event in enumerate(alpha, start=1):
        for s in a.states:
            r = a.rule_for(s.sym, event)
            params = r.params if r else tuple(Var(f"y{j+1}", srt) for j, srt in enumerate(s.sorts))
            body = stamp(r.body, i, names) if r else FALSE
            head = Pred(PredSym(s.sym.name, s.sym.arity, i - 1), params)
            impl = disj((Not(head), body))
            for p in reversed(params):
                impl = _forall(p, impl)
            parts.append(impl)
    return conj(parts)


def acceptance_formula(a: Foaa, alpha) -> object:
    n = len(alpha)
    parts = [path_formula(a, alpha)]
    for s in a.states:
        if s.final:
            continue
        params = tuple(Var(f"y{j+1}", srt) for j, srt in enumerate(s.sorts))
        impl = Not(Pred(PredSym(s.sym.name, s.sym.arity, n), params))
        for p in reversed(params):
            impl = _forall(p, impl)
        parts.append(impl)
    return conj(parts)


def _forall(v, body):
    from .logic import Forall

    return Forall(v, body)


# ---------------------------------------------------------------------------
# fused Θ / Υ construction


def build_path(a: Foaa, alpha) -> SymbolicPath:
    _check_alpha(a, alpha)
    names = a.input_names()
    n = len(alpha)
    finals = a.final_syms()

    init = rename_apart(stamp(a.initial, 0, names))
    pn = prenex(init)
    prefix = list(pn.prefix)
    xi = [0] * len(prefix)
    used = {v.name for _, v in prefix} | {v.name for v in free_vars(pn.matrix)}
    base = pn.matrix

    occurrences: list[list[Pred]] = [[] for _ in range(n + 1)]
    matrices: dict[Pred, object] = {}  # occurrence -> its instantiated body matrix

    def note_atoms(phi, step):
        for atom in _atoms_in(phi):
            if atom not in matrices and atom not in occurrences[step]:
                occurrences[step].append(atom)

    note_atoms(base, 0)
    step_groups = []
    for i in range(1, n + 1):
        group = []
        for atom in occurrences[i - 1]:
            base_sym = PredSym(atom.sym.name, atom.sym.arity, None)
            r = a.rule_for(base_sym, alpha[i - 1])
            if r is None:
                body = FALSE
            else:
                body = stamp(r.body, i, names)
                body = substitute(body, dict(zip(r.params, atom.args)))
            body = _rename_bound(body, used)
            bp = prenex(body)
            prefix.extend(bp.prefix)
            xi.extend([i] * len(bp.prefix))
            used |= {v.name for _, v in bp.prefix}
            matrices[atom] = bp.matrix
            note_atoms(bp.matrix, i)
            group.append(disj((Not(atom), bp.matrix)))
        step_groups.append(tuple(group))

    final_group = []
    for atom in occurrences[n]:
        if PredSym(atom.sym.name, atom.sym.arity, None) not in finals:
            final_group.append(Not(atom))

    # Υ: replace each occurrence by its expanded body, final step by ⊤/⊥
    expansion: dict[Pred, object] = {}

    def expand(atom: Pred, step: int):
        if atom in expansion:
            return expansion[atom]
        if step == n:
            out = TRUE if PredSym(atom.sym.name, atom.sym.arity, None) in finals else FALSE
        else:
            out = _replace_atoms(matrices[atom], lambda at: expand(at, step + 1))
        expansion[atom] = out
        return out

    upsilon = simplify(_replace_atoms(base, lambda at: expand(at, 0)))

    return SymbolicPath(tuple(alpha), tuple(prefix), tuple(xi), base, tuple(step_groups), tuple(final_group), upsilon)


def _atoms_in(phi):
    out = []

    def walk(f):
        if isinstance(f, Pred):
            out.append(f)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        elif isinstance(f, Not):
            walk(f.arg)
        elif hasattr(f, "body"):
            walk(f.body)

    walk(phi)
    return out


def _replace_atoms(phi, fn):
    if isinstance(phi, Pred):
        return fn(phi)
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_replace_atoms(a, fn) for a in phi.args))
    if isinstance(phi, Not):
        return neg(_replace_atoms(phi.arg, fn))
    if hasattr(phi, "body"):
        return type(phi)(phi.var, _replace_atoms(phi.body, fn))
    return phi


def _rename_bound(phi, used: set):
    """Rename bound variables apart from every name in ``used`` (grows used)."""
    out = rename_apart(phi, used)
    _collect_bound(out, used)
    return out


def _collect_bound(phi, used: set):
    if isinstance(phi, (And, Or)):
        for a in phi.args:
            _collect_bound(a, used)
    elif isinstance(phi, Not):
        _collect_bound(phi.arg, used)
    elif hasattr(phi, "body"):
        used.add(phi.var.name)
        _collect_bound(phi.body, used)


# ---------------------------------------------------------------------------
# per-sequence satisfiability and membership


@dataclass
class Accepting:
    word: list  # DataWord


class Spurious:
    def __repr__(self):
        return "Spurious"


SPURIOUS = Spurious()


def _input_vars_at(a: Foaa, step: int):
    return [Var(v.name, v.sort, step) for v in a.input_vars]


def check_event_sequence(a: Foaa, alpha):
    """Accepting(word) with a satisfying valuation of Υ(α), or Spurious."""
    sp = build_path(a, alpha)
    ground = eliminate_quantifiers(sp.upsilon.close())
    model = check_sat_qf(ground, predicates_as_booleans=False)
    if model is None:
        return SPURIOUS
    word = []
    for i, event in enumerate(alpha, start=1):
        nu = {}
        for v, sv in zip(a.input_vars, _input_vars_at(a, i)):
            if sv in model.valuation:
                nu[v] = model.valuation[sv]
            else:
                nu[v] = Fraction(0) if v.sort == REAL else _fresh_eq_value(model, word)
        word.append((event, nu))
    return Accepting(word)


def _fresh_eq_value(model, word):
    used = {v for v in model.valuation.values() if isinstance(v, EqValue)}
    for _e, nu in word:
        used |= {v for v in nu.values() if isinstance(v, EqValue)}
    i = 0
    while EqValue(i) in used:
        i += 1
    return EqValue(i)


def member(a: Foaa, word) -> bool:
    """Word membership: Υ of the event projection evaluated at the word's data."""
    alpha = [e for e, _nu in word]
    sp = build_path(a, alpha)
    bindings = {}
    for i, (_e, nu) in enumerate(word, start=1):
        for v in a.input_vars:
            if v not in nu:
                raise SymbolicError(f"letter {i} missing a value for {v.name}")
            bindings[Var(v.name, v.sort, i)] = Const(nu[v], v.sort)
    phi = substitute(sp.upsilon.close(), bindings)
    return evaluate(phi, {})
