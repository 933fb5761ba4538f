"""Brute-force reference semantics over bounded domains.

``minimal_models`` enumerates the minimal interpretations of a formula with
quantifiers ranging over a finite value domain; ``accepts_explicit`` runs
the level-by-level execution-forest search.  Both serve as referees in
property tests and are deliberately simple.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .automaton import Foaa
from .logic import (
    And,
    Cmp,
    Const,
    Exists,
    FALSE,
    Forall,
    Not,
    Or,
    Pred,
    TRUE,
    Var,
    substitute,
)
from .theory import eval_term

MAX_INTERPRETATIONS = 2**20


class DomainTooLarge(Exception):
    pass


@dataclass(frozen=True)
class Config:
    sym_name: str
    values: tuple

    def __repr__(self):
        return self.sym_name + ("(" + ",".join(map(repr, self.values)) + ")" if self.values else "")


Cube = frozenset  # of Config


def _domain_values(dom, sort):
    if isinstance(dom, dict):
        return dom.get(sort, [])
    return [v for v in dom if _sort_matches(v, sort)]


def _sort_matches(value, sort):
    from fractions import Fraction

    from .logic import EqValue, REAL

    return isinstance(value, Fraction) if sort == REAL else isinstance(value, EqValue)


def ground(phi, dom, nu=None):
    """Expand quantifiers over ``dom`` and fold data literals; the result is
    a boolean combination of ground predicate atoms."""
    nu = nu or {}
    if isinstance(phi, Pred):
        return Pred(phi.sym, tuple(Const(*_valued(eval_term(a, nu))) for a in phi.args))
    if isinstance(phi, Cmp):
        lv, rv = eval_term(phi.lhs, nu), eval_term(phi.rhs, nu)
        if phi.op == "=":
            ok = lv == rv
        elif phi.op == "<=":
            ok = lv <= rv
        else:
            ok = lv < rv
        return TRUE if ok else FALSE
    if isinstance(phi, Not):
        inner = ground(phi.arg, dom, nu)
        if inner == TRUE:
            return FALSE
        if inner == FALSE:
            return TRUE
        return Not(inner)
    if isinstance(phi, (And, Or)):
        parts = [ground(a, dom, nu) for a in phi.args]
        return _fold(parts, isinstance(phi, Or))
    values = _domain_values(dom, phi.var.sort)
    parts = [ground(phi.body, dom, {**nu, phi.var: v}) for v in values]
    return _fold(parts, isinstance(phi, Exists))


def _fold(parts, is_or):
    out = []
    for p in parts:
        if is_or:
            if p == TRUE:
                return TRUE
            if p != FALSE:
                out.append(p)
        else:
            if p == FALSE:
                return FALSE
            if p != TRUE:
                out.append(p)
    if not out:
        return FALSE if is_or else TRUE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out)) if is_or else And(tuple(out))


def _valued(v):
    from fractions import Fraction

    from .logic import ID, REAL

    return v, (REAL if isinstance(v, Fraction) else ID)


def _ground_atoms(phi) -> list:
    out = []

    def walk(f):
        if isinstance(f, Pred):
            if f not in out:
                out.append(f)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)

    walk(phi)
    return out


def _eval_bool(phi, truth: dict) -> bool:
    if phi == TRUE:
        return True
    if phi == FALSE:
        return False
    if isinstance(phi, Pred):
        return truth[phi]
    if isinstance(phi, Not):
        return not _eval_bool(phi.arg, truth)
    if isinstance(phi, And):
        return all(_eval_bool(a, truth) for a in phi.args)
    return any(_eval_bool(a, truth) for a in phi.args)


def _is_positive_ground(phi) -> bool:
    if isinstance(phi, (Pred,)) or phi in (TRUE, FALSE):
        return True
    if isinstance(phi, Not):
        return False
    return all(_is_positive_ground(a) for a in phi.args)


def _config(atom: Pred) -> Config:
    return Config(repr(atom.sym), tuple(a.value for a in atom.args))


def minimal_models(phi, dom, nu=None) -> set:
    """Minimal models of ``phi`` (quantifiers over ``dom``) as a set of cubes."""
    g = ground(phi, dom, nu)
    if g == TRUE:
        return {Cube()}
    if g == FALSE:
        return set()
    if _is_positive_ground(g):
        sets = _dnf_sets(g)
    else:
        sets = _enumerate_models(g)
    minimal = []
    for s in sorted(sets, key=len):
        if not any(m <= s for m in minimal):
            minimal.append(s)
    return set(minimal)


def all_models(phi, dom, nu=None) -> set:
    """Every model over the atoms occurring in the grounded formula."""
    g = ground(phi, dom, nu)
    if g == TRUE:
        return {Cube()}
    if g == FALSE:
        return set()
    return set(_enumerate_models(g))


def _dnf_sets(g) -> set:
    def walk(f):
        if f == TRUE:
            return [frozenset()]
        if f == FALSE:
            return []
        if isinstance(f, Pred):
            return [frozenset((_config(f),))]
        if isinstance(f, Or):
            out = []
            for a in f.args:
                out.extend(walk(a))
            return out
        sets = [frozenset()]
        for a in f.args:
            branch = walk(a)
            sets = [s | b for s in sets for b in branch]
            if len(sets) > MAX_INTERPRETATIONS:
                raise DomainTooLarge(f"{len(sets)} disjuncts")
        return sets

    return set(walk(g))


def _enumerate_models(g) -> list:
    atoms = _ground_atoms(g)
    if 2 ** len(atoms) > MAX_INTERPRETATIONS:
        raise DomainTooLarge(f"{len(atoms)} ground atoms")
    out = []
    for bits in product((False, True), repeat=len(atoms)):
        truth = dict(zip(atoms, bits))
        if _eval_bool(g, truth):
            out.append(frozenset(_config(a) for a, b in truth.items() if b))
    return out


# ---------------------------------------------------------------------------
# explicit acceptance (execution-forest search)


def accepts_explicit(a: Foaa, word, dom, use_all_models: bool = False) -> bool:
    """Level-by-level execution search: does some execution over ``word``
    accept, choosing children cubes from the (minimal) models of each rule
    body under the letter's valuation?"""
    n = len(word)
    finals = {repr(s.sym) for s in a.states if s.final}
    models = all_models if use_all_models else minimal_models
    by_name = {repr(s.sym): s.sym for s in a.states}
    memo: dict = {}

    def step_ok(cube: Cube, step: int) -> bool:
        key = (cube, step)
        if key in memo:
            return memo[key]
        if step == n:
            out = all(c.sym_name in finals for c in cube)
        else:
            event, nu = word[step]
            choice_sets = []
            out = True
            for c in sorted(cube, key=repr):
                r = a.rule_for(by_name[c.sym_name], event)
                if r is None:
                    out = False
                    break
                bindings = dict(zip(r.params, [Const(v, p.sort) for p, v in zip(r.params, c.values)]))
                for iv in a.input_vars:
                    bindings[iv] = Const(nu[iv], iv.sort)
                body = substitute(r.body, bindings)
                cubes = models(body, dom)
                if not cubes:
                    out = False
                    break
                choice_sets.append(sorted(cubes, key=lambda s: (len(s), sorted(map(repr, s)))))
            if out:
                out = any(
                    step_ok(frozenset().union(*combo) if combo else frozenset(), step + 1)
                    for combo in product(*choice_sets)
                )
        memo[key] = out
        return out

    initial_cubes = models(a.initial, dom)
    return any(step_ok(c, 0) for c in sorted(initial_cubes, key=lambda s: (len(s), sorted(map(repr, s)))))
