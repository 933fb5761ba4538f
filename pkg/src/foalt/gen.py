"""Random test-corpus generators.

Small equality-theory automata (quantifier-free bodies, constants v0/v1),
timed automata, and register automata, all driven by a seeded
``random.Random`` so runs replicate exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .automaton import Foaa, Rule, State
from .frontends import RegisterAutomaton, TimedAutomaton, TimedEdge
from .logic import (
    And,
    Cmp,
    Const,
    EqValue,
    ID,
    Not,
    Or,
    Pred,
    PredSym,
    TRUE,
    Var,
    conj,
    disj,
)

EQ_INPUT = Var("x", ID)
EQ_EVENTS = ("a", "b")


def random_eq_automaton(rng: random.Random) -> Foaa:
    """An EQ automaton with ≤3 states of arity ≤2 and quantifier-free
    positive bodies whose constants are drawn from {v0, v1}."""
    n_states = rng.randint(1, 3)
    states = []
    syms = []
    for i in range(n_states):
        arity = rng.randint(0, 2)
        sym = PredSym(f"q{i}", arity)
        syms.append(sym)
        states.append(State(sym, tuple([ID] * arity), rng.random() < 0.5))
    if not any(s.final for s in states) and rng.random() < 0.7:
        i = rng.randrange(n_states)
        states[i] = State(syms[i], states[i].sorts, True)
    events = EQ_EVENTS[: rng.randint(1, 2)]

    def rand_term(params):
        choices = list(params) + [EQ_INPUT, Const(EqValue(0), ID), Const(EqValue(1), ID)]
        return rng.choice(choices)

    def rand_body(params, depth):
        kind = rng.randrange(6 if depth > 0 else 4)
        if kind in (0, 1):  # predicate atom
            sym = rng.choice(syms)
            return Pred(sym, tuple(rand_term(params) for _ in range(sym.arity)))
        if kind == 2:  # data literal
            atom = Cmp("=", rand_term(params), rand_term(params))
            return Not(atom) if rng.random() < 0.5 else atom
        if kind == 3:
            return TRUE if rng.random() < 0.5 else rand_body(params, depth)
        args = tuple(rand_body(params, depth - 1) for _ in range(2))
        return And(args) if kind == 4 else Or(args)

    rules = []
    for s in states:
        params = tuple(Var(f"y{j+1}", ID) for j in range(s.sym.arity))
        for e in events:
            if rng.random() < 0.8:
                rules.append(Rule(s.sym, params, e, rand_body(params, 2)))

    init_state = rng.choice(states)
    initial = Pred(
        init_state.sym,
        tuple(rng.choice([Const(EqValue(0), ID), Const(EqValue(1), ID)]) for _ in range(init_state.sym.arity)),
    )
    return Foaa("EQ", tuple(events), (EQ_INPUT,), tuple(states), initial, tuple(rules))


def random_eq_word(rng: random.Random, events, max_len: int = 4, domain_size: int = 3):
    n = rng.randint(0, max_len)
    return [
        (rng.choice(list(events)), {EQ_INPUT: EqValue(rng.randrange(domain_size))})
        for _ in range(n)
    ]


# ---------------------------------------------------------------------------
# timed automata


def random_timed_automaton(rng: random.Random) -> TimedAutomaton:
    """≤3 states, ≤2 clocks, ≤4 edges, guards with small integer bounds."""
    n_states = rng.randint(1, 3)
    states = tuple(f"s{i}" for i in range(n_states))
    clocks = tuple(f"x{i+1}" for i in range(rng.randint(1, 2)))
    events = ("a", "b")[: rng.randint(1, 2)]
    initial = frozenset({rng.choice(states)})
    finals = frozenset(s for s in states if rng.random() < 0.5)
    edges = []
    for _ in range(rng.randint(0, 4)):
        guard = _random_guard(rng, clocks)
        resets = frozenset(c for c in clocks if rng.random() < 0.4)
        edges.append(TimedEdge(rng.choice(states), rng.choice(events), rng.choice(states), resets, guard))
    return TimedAutomaton(tuple(events), states, initial, finals, clocks, tuple(edges))


def _random_guard(rng: random.Random, clocks):
    from .logic import REAL

    parts = []
    for c in clocks:
        r = rng.random()
        if r < 0.35:
            x, k = Var(c, REAL), Const(Fraction(rng.randint(0, 4)), REAL)
            atom = Cmp("<=", x, k) if rng.random() < 0.5 else Cmp("<=", k, x)
            parts.append(Not(atom) if rng.random() < 0.25 else atom)
    return conj(parts)


def random_timed_word(rng: random.Random, events, max_len: int = 4):
    n = rng.randint(0, max_len)
    out = []
    tau = Fraction(0)
    for _ in range(n):
        tau += Fraction(rng.randint(1, 6), rng.choice([1, 2]))
        out.append((rng.choice(list(events)), tau))
    return out


# ---------------------------------------------------------------------------
# register automata


def random_register_automaton(rng: random.Random, r: int = 2) -> RegisterAutomaton:
    n_states = rng.randint(1, 3)
    states = tuple(f"s{i}" for i in range(n_states))
    init_vals = []
    used = set()
    for _ in range(r):
        if rng.random() < 0.6:
            init_vals.append(EqValue(-1))
        else:
            v = rng.randrange(2)
            while EqValue(v) in used:
                v += 1
            used.add(EqValue(v))
            init_vals.append(EqValue(v))
    transitions = tuple(
        (rng.choice(states), rng.randint(1, r), rng.choice(states)) for _ in range(rng.randint(0, 4))
    )
    finals = frozenset(s for s in states if rng.random() < 0.5)
    return RegisterAutomaton(r, tuple(init_vals), states, states[0], finals, transitions)


def random_register_word(rng: random.Random, max_len: int = 4, domain_size: int = 3):
    return [EqValue(rng.randrange(domain_size)) for _ in range(rng.randint(0, max_len))]
