"""First-order alternating automata: model, textual format, boolean closure.

File format (UTF-8 S-expressions, ``;`` comments)::

    (theory LRA|EQ)
    (events a b ...)
    (input (x Real) ...)
    (state q (Real ...) [:final])
    (initial <formula>)
    (rule q ((y Real) ...) a <formula>)

Formulas use SMT-LIB term syntax; predicate atoms are applications of the
declared state symbols.  Multiple rules for one (state, event) pair are
joined by disjunction.  A missing rule means the state dies on that event
(body false).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .logic import (
    And,
    Const,
    EqValue,
    FALSE,
    ID,
    Not,
    Or,
    FormulaError,
    ParseEnv,
    Pred,
    PredSym,
    REAL,
    Sort,
    Var,
    conj,
    disj,
    dual,
    free_vars,
    is_positive,
    nnf,
    parse_formula,
    pred_syms,
    rename_apart,
    substitute,
)
from .sexp import Atom, SList, SexpError, parse_all


class AutomatonError(Exception):
    pass


@dataclass(frozen=True)
class State:
    sym: PredSym
    sorts: tuple
    final: bool


@dataclass(frozen=True)
class Rule:
    sym: PredSym
    params: tuple  # of Var
    event: str
    body: object


@dataclass(frozen=True)
class Foaa:
    theory: str  # 'LRA' | 'EQ'
    events: tuple
    input_vars: tuple  # of Var
    states: tuple  # of State
    initial: object
    rules: tuple  # of Rule, at most one per (sym, event)

    @property
    def data_sort(self) -> Sort:
        return REAL if self.theory == "LRA" else ID

    def state_map(self) -> dict:
        return {s.sym: s for s in self.states}

    def final_syms(self) -> frozenset:
        return frozenset(s.sym for s in self.states if s.final)

    def nonfinal_syms(self) -> frozenset:
        return frozenset(s.sym for s in self.states if not s.final)

    def rule_for(self, sym: PredSym, event: str) -> Rule | None:
        for r in self.rules:
            if r.sym == sym and r.event == event:
                return r
        return None

    def input_names(self) -> frozenset:
        return frozenset(v.name for v in self.input_vars)


# ---------------------------------------------------------------------------
# parsing


def parse(text: str) -> Foaa:
    try:
        forms = parse_all(text)
    except SexpError as e:
        raise AutomatonError(str(e))
    theory = None
    events: list[str] = []
    input_vars: list[Var] = []
    states: list[State] = []
    initial_form = None
    rule_forms = []
    for form in forms:
        if not isinstance(form, SList) or not len(form) or not isinstance(form[0], Atom):
            raise AutomatonError(f"expected a (keyword ...) form, got {form!r}")
        kw = form[0].text
        if kw == "theory":
            if len(form) != 2 or form[1].text not in ("LRA", "EQ"):
                raise AutomatonError(f"{form[0].line}: theory must be LRA or EQ")
            theory = form[1].text
        elif kw == "events":
            events.extend(a.text for a in form[1:])
        elif kw == "input":
            for b in form[1:]:
                if not (isinstance(b, SList) and len(b) == 2):
                    raise AutomatonError(f"{form[0].line}: input binding must be (name Sort)")
                input_vars.append(Var(b[0].text, _sort_of(b[1], theory)))
        elif kw == "state":
            if len(form) < 3:
                raise AutomatonError(f"{form[0].line}: state needs a name and a sort list")
            name = form[1].text
            sorts = tuple(_sort_of(s, theory) for s in form[2])
            final = any(isinstance(a, Atom) and a.text == ":final" for a in form[3:])
            states.append(State(PredSym(name, len(sorts)), sorts, final))
        elif kw == "initial":
            if len(form) != 2:
                raise AutomatonError(f"{form[0].line}: initial takes one formula")
            initial_form = form[1]
        elif kw == "rule":
            rule_forms.append(form)
        else:
            raise AutomatonError(f"{form[0].line}: unknown form '{kw}'")
    if theory is None:
        raise AutomatonError("missing (theory ...)")
    if initial_form is None:
        raise AutomatonError("missing (initial ...)")
    data_sort = REAL if theory == "LRA" else ID
    for v in input_vars:
        if v.sort != data_sort:
            raise AutomatonError(f"input variable {v.name} has wrong sort for theory {theory}")
    preds = {s.sym.name: s.sym for s in states}
    pred_sorts = {s.sym.name: s.sorts for s in states}
    base_env = ParseEnv(data_sort, {}, preds, pred_sorts)
    try:
        initial = rename_apart(nnf(parse_formula(initial_form, base_env)))
    except FormulaError as e:
        raise AutomatonError(str(e))
    if free_vars(initial):
        raise AutomatonError("initial formula must be a sentence")

    raw_rules: dict = {}
    for form in rule_forms:
        if len(form) != 5 or not isinstance(form[2], SList):
            raise AutomatonError(f"{form[0].line}: rule must be (rule q ((y Sort)...) event body)")
        qname = form[1].text
        if qname not in preds:
            raise AutomatonError(f"{form[0].line}: unknown state '{qname}'")
        sym = preds[qname]
        params = []
        for b in form[2]:
            if not (isinstance(b, SList) and len(b) == 2):
                raise AutomatonError(f"{form[0].line}: rule binding must be (name Sort)")
            params.append(Var(b[0].text, _sort_of(b[1], theory)))
        if len(params) != sym.arity:
            raise AutomatonError(f"{form[0].line}: rule for '{qname}' needs {sym.arity} parameters")
        event = form[3].text
        if event not in events:
            raise AutomatonError(f"{form[0].line}: unknown event '{event}'")
        env = ParseEnv(data_sort, {v.name: v for v in input_vars}, preds, pred_sorts)
        for p in params:
            if p.name in env.vars:
                raise AutomatonError(f"{form[0].line}: rule parameter '{p.name}' shadows an input variable")
            env.vars[p.name] = p
        try:
            body = nnf(parse_formula(form[4], env))
        except FormulaError as e:
            raise AutomatonError(str(e))
        body = rename_apart(body, {v.name for v in input_vars} | {p.name for p in params})
        if not is_positive(body, frozenset(preds.values())):
            raise AutomatonError(f"{form[0].line}: rule body for '{qname}' is not positive in the state predicates")
        key = (sym, event)
        if key in raw_rules:
            prev = raw_rules[key]
            body = substitute(body, dict(zip(params, prev.params)))
            raw_rules[key] = Rule(sym, prev.params, event, disj((prev.body, body)))
        else:
            raw_rules[key] = Rule(sym, tuple(params), event, body)

    a = Foaa(theory, tuple(events), tuple(input_vars), tuple(states), initial, tuple(raw_rules.values()))
    problems = validate(a)
    if problems:
        raise AutomatonError("; ".join(problems))
    return a


def _sort_of(node, theory):
    if not isinstance(node, Atom):
        raise AutomatonError("expected a sort name")
    if node.text == "Real":
        return REAL
    if node.text == "Id":
        return ID
    raise AutomatonError(f"{node.line}: unknown sort '{node.text}'")


def validate(a: Foaa) -> list[str]:
    """Well-formedness diagnostics; empty list means the automaton is valid."""
    out = []
    syms = frozenset(s.sym for s in a.states)
    data_sort = a.data_sort
    if len({s.sym for s in a.states}) != len(a.states):
        out.append("duplicate state declarations")
    for v in a.input_vars:
        if v.sort != data_sort:
            out.append(f"input variable {v.name} has non-theory sort")
    if free_vars(a.initial):
        out.append("initial not a sentence")
    if not is_positive(a.initial, syms):
        out.append("initial formula not positive")
    if not pred_syms(a.initial) <= syms:
        out.append("initial formula uses undeclared predicates")
    input_names = a.input_names()
    seen = set()
    for r in a.rules:
        if (r.sym, r.event) in seen:
            out.append(f"duplicate rule for ({r.sym.name}, {r.event})")
        seen.add((r.sym, r.event))
        if r.sym not in syms:
            out.append(f"rule for undeclared state {r.sym.name}")
        if r.event not in a.events:
            out.append(f"rule for unknown event {r.event}")
        if any(p.name in input_names for p in r.params):
            out.append("params shadow input vars")
        if not is_positive(r.body, syms):
            out.append(f"rule body for ({r.sym.name}, {r.event}) not positive")
        if not pred_syms(r.body) <= syms:
            out.append(f"rule body for ({r.sym.name}, {r.event}) uses undeclared predicates")
        allowed = set(a.input_vars) | set(r.params)
        if not free_vars(r.body) <= allowed:
            out.append(f"rule body for ({r.sym.name}, {r.event}) has stray free variables")
    return out


# ---------------------------------------------------------------------------
# printing


def print_automaton(a: Foaa) -> str:
    lines = [f"(theory {a.theory})"]
    lines.append("(events " + " ".join(a.events) + ")")
    if a.input_vars:
        lines.append("(input " + " ".join(f"({v.name} {v.sort.name})" for v in a.input_vars) + ")")
    for s in a.states:
        final = " :final" if s.final else ""
        lines.append(f"(state {s.sym.name} (" + " ".join(x.name for x in s.sorts) + f"){final})")
    lines.append(f"(initial {a.initial!r})")
    for r in a.rules:
        params = " ".join(f"({p.name} {p.sort.name})" for p in r.params)
        lines.append(f"(rule {r.sym.name} ({params}) {r.event} {r.body!r})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# boolean closure (disjoint renaming, intersection, complement, union)


def _rename_states(a: Foaa, taken: frozenset) -> Foaa:
    mapping = {}
    for s in a.states:
        name = s.sym.name
        if name in taken:
            i = 1
            while f"{name}#{i}" in taken:
                i += 1
            name = f"{name}#{i}"
        mapping[s.sym] = PredSym(name, s.sym.arity)

    def ren(phi):
        if isinstance(phi, Pred):
            return Pred(mapping[phi.sym], phi.args)
        if isinstance(phi, Not):
            return Not(ren(phi.arg))
        if isinstance(phi, (And, Or)):
            return type(phi)(tuple(ren(x) for x in phi.args))
        if hasattr(phi, "var"):
            return type(phi)(phi.var, ren(phi.body))
        return phi

    states = tuple(State(mapping[s.sym], s.sorts, s.final) for s in a.states)
    rules = tuple(Rule(mapping[r.sym], r.params, r.event, ren(r.body)) for r in a.rules)
    return replace(a, states=states, initial=ren(a.initial), rules=rules)


def _check_compatible(a1: Foaa, a2: Foaa):
    if a1.theory != a2.theory:
        raise AutomatonError("theory mismatch")
    if a1.events != a2.events:
        raise AutomatonError("event alphabet mismatch")
    if a1.input_vars != a2.input_vars:
        raise AutomatonError("input variable mismatch")


def _disjoint(a1: Foaa, a2: Foaa) -> tuple[Foaa, Foaa]:
    names1 = frozenset(s.sym.name for s in a1.states)
    names2 = frozenset(s.sym.name for s in a2.states)
    if names1 & names2:
        a2 = _rename_states(a2, names1 | names2)
    return a1, a2


def intersect(a1: Foaa, a2: Foaa) -> Foaa:
    _check_compatible(a1, a2)
    a1, a2 = _disjoint(a1, a2)
    return Foaa(
        a1.theory,
        a1.events,
        a1.input_vars,
        a1.states + a2.states,
        conj((a1.initial, a2.initial)),
        a1.rules + a2.rules,
    )


def union(a1: Foaa, a2: Foaa) -> Foaa:
    _check_compatible(a1, a2)
    a1, a2 = _disjoint(a1, a2)
    return Foaa(
        a1.theory,
        a1.events,
        a1.input_vars,
        a1.states + a2.states,
        disj((a1.initial, a2.initial)),
        a1.rules + a2.rules,
    )


def complete_rules(a: Foaa) -> Foaa:
    """Materialize missing (state, event) rules with body false."""
    rules = list(a.rules)
    for s in a.states:
        for e in a.events:
            if a.rule_for(s.sym, e) is None:
                params = tuple(Var(f"y{i+1}", srt) for i, srt in enumerate(s.sorts))
                rules.append(Rule(s.sym, params, e, FALSE))
    return replace(a, rules=tuple(rules))


def complement(a: Foaa) -> Foaa:
    """Dual automaton: dual initial/bodies, complemented final states."""
    a = complete_rules(a)
    states = tuple(State(s.sym, s.sorts, not s.final) for s in a.states)
    rules = tuple(Rule(r.sym, r.params, r.event, dual(r.body)) for r in a.rules)
    return replace(a, states=states, initial=dual(a.initial), rules=rules)


# ---------------------------------------------------------------------------
# data words


def parse_value(text: str, sort: Sort):
    if sort == ID:
        if text == "#":
            return EqValue(-1)
        if text and text[0] == "v" and text[1:].isdigit():
            return EqValue(int(text[1:]))
        raise AutomatonError(f"bad Id value '{text}' (expected v0, v1, ...)")
    try:
        return Fraction(text)
    except ValueError:
        raise AutomatonError(f"bad Real value '{text}'")


def parse_word(text: str, a: Foaa) -> list:
    """Parse the textual data-word form ``a{x=1.5};b{x=0}`` (empty = ε)."""
    word = []
    text = text.strip()
    if not text:
        return word
    by_name = {v.name: v for v in a.input_vars}
    for letter in text.split(";"):
        letter = letter.strip()
        if "{" in letter:
            if not letter.endswith("}"):
                raise AutomatonError(f"bad letter '{letter}'")
            event, rest = letter.split("{", 1)
            assigns = rest[:-1]
        else:
            event, assigns = letter, ""
        event = event.strip()
        if event not in a.events:
            raise AutomatonError(f"unknown event '{event}'")
        nu = {}
        if assigns.strip():
            for pair in assigns.split(","):
                if "=" not in pair:
                    raise AutomatonError(f"bad assignment '{pair}'")
                name, val = pair.split("=", 1)
                name = name.strip()
                if name not in by_name:
                    raise AutomatonError(f"unknown input variable '{name}'")
                v = by_name[name]
                nu[v] = parse_value(val.strip(), v.sort)
        missing = [v.name for v in a.input_vars if v not in nu]
        if missing:
            raise AutomatonError(f"letter '{event}' missing values for {', '.join(missing)}")
        word.append((event, nu))
    return word


def format_word(word) -> str:
    letters = []
    for event, nu in word:
        assigns = ",".join(f"{v.name}={Const(val, v.sort)!r}" for v, val in sorted(nu.items(), key=lambda kv: kv[0].name))
        letters.append(f"{event}{{{assigns}}}" if assigns else event)
    return ";".join(letters)
