"""Multisorted first-order formulas with uninterpreted predicate atoms.

Terms and formulas are immutable dataclasses compared structurally; every
operation returns new values.  The concrete syntax follows the SMT-LIB 2
term grammar (``and``, ``or``, ``not``, ``=>``, ``exists``, ``forall``,
``=``, ``<=``, ``<``, ``+``, ``-``, numerals and decimals); predicate atoms
are uninterpreted applications.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .sexp import Atom, SList, SexpError


# ---------------------------------------------------------------------------
# sorts and values


@dataclass(frozen=True)
class Sort:
    name: str

    def __repr__(self):
        return self.name


REAL = Sort("Real")
ID = Sort("Id")  # uninterpreted infinite domain (equality theory)
BOOL = Sort("Bool")


@dataclass(frozen=True)
class EqValue:
    """Canonical member ``v0, v1, ...`` of the equality-theory universe.

    Index -1 is the reserved placeholder value written ``#``.
    """

    index: int

    def __repr__(self):
        return "#" if self.index < 0 else f"v{self.index}"


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort
    stamp: int | None = None

    def __repr__(self):
        return self.name if self.stamp is None else f"{self.name}@{self.stamp}"


@dataclass(frozen=True)
class Const:
    value: object  # Fraction (Real) or EqValue (Id)
    sort: Sort

    def __repr__(self):
        return format_value(self.value)


@dataclass(frozen=True)
class App:
    fn: str  # '+', '-', '*', or 'fresh!' (witness-internal fresh value)
    args: tuple

    def __repr__(self):
        return "(" + self.fn + "".join(" " + repr(a) for a in self.args) + ")"


Term = Var | Const | App


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(v)


def rconst(x) -> Const:
    return Const(Fraction(x), REAL)


ZERO = rconst(0)


# ---------------------------------------------------------------------------
# predicate symbols and formulas


@dataclass(frozen=True)
class PredSym:
    name: str
    arity: int
    stamp: int | None = None

    def __repr__(self):
        return self.name if self.stamp is None else f"{self.name}@{self.stamp}"


@dataclass(frozen=True)
class Pred:
    sym: PredSym
    args: tuple

    def __repr__(self):
        if not self.args:
            return f"({self.sym!r})"
        return "(" + repr(self.sym) + "".join(" " + repr(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Cmp:
    op: str  # '=', '<=', '<'
    lhs: Term
    rhs: Term

    def __repr__(self):
        return f"({self.op} {self.lhs!r} {self.rhs!r})"


@dataclass(frozen=True)
class Not:
    arg: object

    def __repr__(self):
        return f"(not {self.arg!r})"


@dataclass(frozen=True)
class And:
    args: tuple

    def __repr__(self):
        if not self.args:
            return "true"
        return "(and" + "".join(" " + repr(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Or:
    args: tuple

    def __repr__(self):
        if not self.args:
            return "false"
        return "(or" + "".join(" " + repr(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: object

    def __repr__(self):
        return f"(exists (({self.var!r} {self.var.sort.name})) {self.body!r})"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: object

    def __repr__(self):
        return f"(forall (({self.var!r} {self.var.sort.name})) {self.body!r})"


Formula = Pred | Cmp | Not | And | Or | Exists | Forall

TRUE = And(())
FALSE = Or(())


def conj(parts) -> Formula:
    out = []
    for p in parts:
        if p == TRUE:
            continue
        if p == FALSE:
            return FALSE
        if isinstance(p, And):
            out.extend(p.args)
        else:
            out.append(p)
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(parts) -> Formula:
    out = []
    for p in parts:
        if p == FALSE:
            continue
        if p == TRUE:
            return TRUE
        if isinstance(p, Or):
            out.extend(p.args)
        else:
            out.append(p)
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(phi) -> Formula:
    if phi == TRUE:
        return FALSE
    if phi == FALSE:
        return TRUE
    if isinstance(phi, Not):
        return phi.arg
    return Not(phi)


# ---------------------------------------------------------------------------
# structural queries


def term_vars(t: Term) -> frozenset[Var]:
    if isinstance(t, Var):
        return frozenset((t,))
    if isinstance(t, Const):
        return frozenset()
    out = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


def free_vars(phi) -> frozenset[Var]:
    if isinstance(phi, Pred):
        out = frozenset()
        for a in phi.args:
            out |= term_vars(a)
        return out
    if isinstance(phi, Cmp):
        return term_vars(phi.lhs) | term_vars(phi.rhs)
    if isinstance(phi, Not):
        return free_vars(phi.arg)
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= free_vars(a)
        return out
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def pred_syms(phi) -> frozenset[PredSym]:
    if isinstance(phi, Pred):
        return frozenset((phi.sym,))
    if isinstance(phi, Cmp):
        return frozenset()
    if isinstance(phi, Not):
        return pred_syms(phi.arg)
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= pred_syms(a)
        return out
    return pred_syms(phi.body)


def pred_atoms(phi) -> list[Pred]:
    """All predicate-atom occurrences, in syntactic order."""
    out: list[Pred] = []

    def walk(f):
        if isinstance(f, Pred):
            out.append(f)
        elif isinstance(f, Cmp):
            pass
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        else:
            walk(f.body)

    walk(phi)
    return out


def is_quantifier_free(phi) -> bool:
    if isinstance(phi, (Pred, Cmp)):
        return True
    if isinstance(phi, Not):
        return is_quantifier_free(phi.arg)
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(a) for a in phi.args)
    return False


def is_positive(phi, preds: frozenset | None = None) -> bool:
    """True iff every atom over ``preds`` (default: all) has even negation parity."""

    def walk(f, parity):
        if isinstance(f, Pred):
            return parity or (preds is not None and f.sym not in preds)
        if isinstance(f, Cmp):
            return True
        if isinstance(f, Not):
            return walk(f.arg, not parity)
        if isinstance(f, (And, Or)):
            return all(walk(a, parity) for a in f.args)
        return walk(f.body, parity)

    return walk(phi, True)


# ---------------------------------------------------------------------------
# substitution


def fresh_name(base: str, used) -> str:
    if base not in used:
        return base
    i = 1
    while f"{base}~{i}" in used:
        i += 1
    return f"{base}~{i}"


def subst_term(t: Term, bindings: dict) -> Term:
    if isinstance(t, Var):
        return bindings.get(t, t)
    if isinstance(t, Const):
        return t
    return App(t.fn, tuple(subst_term(a, bindings) for a in t.args))


def substitute(phi, bindings: dict):
    """Capture-avoiding simultaneous substitution of free variables."""
    if not bindings:
        return phi
    if isinstance(phi, Pred):
        return Pred(phi.sym, tuple(subst_term(a, bindings) for a in phi.args))
    if isinstance(phi, Cmp):
        return Cmp(phi.op, subst_term(phi.lhs, bindings), subst_term(phi.rhs, bindings))
    if isinstance(phi, Not):
        return Not(substitute(phi.arg, bindings))
    if isinstance(phi, And):
        return And(tuple(substitute(a, bindings) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(substitute(a, bindings) for a in phi.args))
    if isinstance(phi, (Exists, Forall)):
        v = phi.var
        inner = {k: t for k, t in bindings.items() if k != v}
        if not inner:
            return phi
        clash = any(v in term_vars(t) for k, t in inner.items() if k in free_vars(phi.body))
        body = phi.body
        if clash:
            used = {u.name for t in inner.values() for u in term_vars(t)}
            used |= {u.name for u in free_vars(body)}
            v2 = Var(fresh_name(v.name, used), v.sort, v.stamp)
            body = substitute(body, {v: v2})
            v = v2
        return type(phi)(v, substitute(body, inner))
    raise TypeError(f"not a formula: {phi!r}")


def rename_apart(phi, used: set | None = None):
    """Rename bound variables so every quantifier binds a unique name."""
    used = set(used) if used is not None else {v.name for v in free_vars(phi)}

    def walk(f):
        if isinstance(f, (Pred, Cmp)):
            return f
        if isinstance(f, Not):
            return Not(walk(f.arg))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(walk(a) for a in f.args))
        v = f.var
        name = fresh_name(v.name, used)
        used.add(name)
        body = f.body
        if name != v.name:
            v2 = Var(name, v.sort, v.stamp)
            body = substitute(body, {v: v2})
            v = v2
        return type(f)(v, walk(body))

    return walk(phi)


# ---------------------------------------------------------------------------
# normal forms


def nnf(phi):
    """Negation normal form: negations pushed onto atoms; ``=>`` expanded upstream."""
    if isinstance(phi, (Pred, Cmp)):
        return phi
    if isinstance(phi, And):
        return conj(nnf(a) for a in phi.args)
    if isinstance(phi, Or):
        return disj(nnf(a) for a in phi.args)
    if isinstance(phi, Exists):
        return Exists(phi.var, nnf(phi.body))
    if isinstance(phi, Forall):
        return Forall(phi.var, nnf(phi.body))
    # negation
    f = phi.arg
    if isinstance(f, (Pred, Cmp)):
        return neg(f)
    if isinstance(f, Not):
        return nnf(f.arg)
    if isinstance(f, And):
        return disj(nnf(Not(a)) for a in f.args)
    if isinstance(f, Or):
        return conj(nnf(Not(a)) for a in f.args)
    if isinstance(f, Exists):
        return Forall(f.var, nnf(Not(f.body)))
    return Exists(f.var, nnf(Not(f.body)))


@dataclass(frozen=True)
class Prenex:
    prefix: tuple  # of ('E'|'A', Var)
    matrix: object

    def close(self):
        out = self.matrix
        for q, v in reversed(self.prefix):
            out = Exists(v, out) if q == "E" else Forall(v, out)
        return out

    def __repr__(self):
        head = "".join(("∃" if q == "E" else "∀") + repr(v) for q, v in self.prefix)
        return f"{head}. {self.matrix!r}" if head else repr(self.matrix)


def prenex(phi) -> Prenex:
    """Prenex normal form of an NNF formula; bound variables renamed apart."""
    phi = rename_apart(nnf(phi))

    def walk(f):
        if isinstance(f, (Pred, Cmp, Not)):
            return [], f
        if isinstance(f, (And, Or)):
            prefix, parts = [], []
            for a in f.args:
                p, m = walk(a)
                prefix.extend(p)
                parts.append(m)
            return prefix, (conj(parts) if isinstance(f, And) else disj(parts))
        q = "E" if isinstance(f, Exists) else "A"
        p, m = walk(f.body)
        return [(q, f.var)] + p, m

    prefix, matrix = walk(phi)
    return Prenex(tuple(prefix), matrix)


# ---------------------------------------------------------------------------
# dualization


def negate_literal(a: Cmp):
    if a.op == "=":
        return Not(a)
    if a.op == "<=":
        return Cmp("<", a.rhs, a.lhs)
    return Cmp("<=", a.rhs, a.lhs)


def dual(phi):
    """Dual formula: swap and/or and exists/forall, negate data literals,
    keep predicate atoms.  Input must be positive (NNF with no negated
    predicate atoms)."""
    phi = nnf(phi)

    def walk(f):
        if isinstance(f, Pred):
            return f
        if isinstance(f, Cmp):
            return negate_literal(f)
        if isinstance(f, Not):
            if isinstance(f.arg, Cmp):
                return f.arg
            raise ValueError(f"dual of non-positive formula: {f!r}")
        if isinstance(f, And):
            return disj(walk(a) for a in f.args)
        if isinstance(f, Or):
            return conj(walk(a) for a in f.args)
        if isinstance(f, Exists):
            return Forall(f.var, walk(f.body))
        return Exists(f.var, walk(f.body))

    return walk(phi)


# ---------------------------------------------------------------------------
# time stamping


def stamp_term(t: Term, i: int, input_names: frozenset) -> Term:
    if isinstance(t, Var):
        if t.name in input_names:
            if t.stamp is not None:
                raise ValueError(f"already stamped: {t!r}")
            return Var(t.name, t.sort, i)
        return t
    if isinstance(t, Const):
        return t
    return App(t.fn, tuple(stamp_term(a, i, input_names) for a in t.args))


def stamp(phi, i: int, input_names=frozenset()):
    """Stamp every input variable and predicate symbol with step ``i``."""
    input_names = frozenset(input_names)

    def walk(f, bound):
        if isinstance(f, Pred):
            if f.sym.stamp is not None:
                raise ValueError(f"already stamped: {f.sym!r}")
            sym = PredSym(f.sym.name, f.sym.arity, i)
            return Pred(sym, tuple(stamp_term(a, i, input_names - bound) for a in f.args))
        if isinstance(f, Cmp):
            names = input_names - bound
            return Cmp(f.op, stamp_term(f.lhs, i, names), stamp_term(f.rhs, i, names))
        if isinstance(f, Not):
            return Not(walk(f.arg, bound))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(walk(a, bound) for a in f.args))
        return type(f)(f.var, walk(f.body, bound | {f.var.name}))

    return walk(phi, frozenset())


def unstamp_preds(phi):
    """Drop predicate-symbol stamps (used when turning interpolants into labels)."""
    if isinstance(phi, Pred):
        return Pred(PredSym(phi.sym.name, phi.sym.arity, None), phi.args)
    if isinstance(phi, Cmp):
        return phi
    if isinstance(phi, Not):
        return Not(unstamp_preds(phi.arg))
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(unstamp_preds(a) for a in phi.args))
    return type(phi)(phi.var, unstamp_preds(phi.body))


# ---------------------------------------------------------------------------
# simplification (boolean units and ground literal folding)


def simplify(phi):
    if isinstance(phi, Pred):
        return phi
    if isinstance(phi, Cmp):
        return _fold_cmp(phi)
    if isinstance(phi, Not):
        a = simplify(phi.arg)
        return neg(a)
    if isinstance(phi, And):
        parts, seen = [], set()
        for a in phi.args:
            s = simplify(a)
            if s == FALSE:
                return FALSE
            if s == TRUE or s in seen:
                continue
            if isinstance(s, And):
                for x in s.args:
                    if x not in seen:
                        seen.add(x)
                        parts.append(x)
                continue
            seen.add(s)
            parts.append(s)
        return parts[0] if len(parts) == 1 else And(tuple(parts))
    if isinstance(phi, Or):
        parts, seen = [], set()
        for a in phi.args:
            s = simplify(a)
            if s == TRUE:
                return TRUE
            if s == FALSE or s in seen:
                continue
            if isinstance(s, Or):
                for x in s.args:
                    if x not in seen:
                        seen.add(x)
                        parts.append(x)
                continue
            seen.add(s)
            parts.append(s)
        return parts[0] if len(parts) == 1 else Or(tuple(parts))
    body = simplify(phi.body)
    if body in (TRUE, FALSE) or phi.var not in free_vars(body):
        return body
    return type(phi)(phi.var, body)


def _fold_cmp(a: Cmp):
    lhs, rhs = a.lhs, a.rhs
    if lhs == rhs:
        return FALSE if a.op == "<" else TRUE
    if a.op == "=":
        # the fresh-value construct differs from each of its arguments
        for s, t in ((lhs, rhs), (rhs, lhs)):
            if isinstance(s, App) and s.fn == "fresh!" and t in s.args:
                return FALSE
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        if a.op == "=":
            return TRUE if lhs.value == rhs.value else FALSE
        if a.op == "<=":
            return TRUE if lhs.value <= rhs.value else FALSE
        return TRUE if lhs.value < rhs.value else FALSE
    return a


# ---------------------------------------------------------------------------
# concrete syntax (SMT-LIB term grammar)


class FormulaError(Exception):
    def __init__(self, message, node=None):
        loc = f"{node.line}:{node.col}: " if node is not None and node.line else ""
        super().__init__(loc + message)
        self.message = message


@dataclass
class ParseEnv:
    """Name environment for formula parsing."""

    data_sort: Sort
    vars: dict  # name -> Var
    preds: dict  # name -> PredSym
    pred_sorts: dict  # name -> tuple[Sort, ...]


def parse_term(sx, env: ParseEnv) -> Term:
    if isinstance(sx, Atom):
        t = sx.text
        if t in env.vars:
            return env.vars[t]
        if env.data_sort == ID:
            if t == "#":
                return Const(EqValue(-1), ID)
            if len(t) > 1 and t[0] == "v" and t[1:].isdigit():
                return Const(EqValue(int(t[1:])), ID)
        try:
            return Const(Fraction(t), REAL)
        except ValueError:
            raise FormulaError(f"unknown term '{t}'", sx)
    if not len(sx):
        raise FormulaError("empty term", sx)
    head = sx[0]
    if not isinstance(head, Atom):
        raise FormulaError("term head must be a symbol", sx)
    op = head.text
    args = [parse_term(a, env) for a in sx[1:]]
    if op == "+" and args:
        return App("+", tuple(args))
    if op == "-" and args:
        return App("-", tuple(args))
    if op in ("*", "/") and len(args) == 2:
        # linear only: at least one side must be constant
        if not any(isinstance(a, Const) for a in args):
            raise FormulaError(f"nonlinear '{op}' application", sx)
        if op == "/" and not isinstance(args[1], Const):
            raise FormulaError("division by non-constant", sx)
        return App(op, tuple(args))
    raise FormulaError(f"unknown function '{op}'", sx)


def term_sort(t: Term) -> Sort:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, Const):
        return t.sort
    return ID if t.fn == "fresh!" else REAL


def parse_formula(sx, env: ParseEnv):
    if isinstance(sx, Atom):
        t = sx.text
        if t == "true":
            return TRUE
        if t == "false":
            return FALSE
        if t in env.preds:
            sym = env.preds[t]
            if sym.arity != 0:
                raise FormulaError(f"predicate '{t}' expects {sym.arity} arguments", sx)
            return Pred(sym, ())
        raise FormulaError(f"unknown formula '{t}'", sx)
    if not len(sx):
        raise FormulaError("empty formula", sx)
    head = sx[0]
    if not isinstance(head, Atom):
        raise FormulaError("formula head must be a symbol", sx)
    op = head.text
    if op == "and":
        return conj(parse_formula(a, env) for a in sx[1:])
    if op == "or":
        return disj(parse_formula(a, env) for a in sx[1:])
    if op == "not":
        if len(sx) != 2:
            raise FormulaError("'not' takes one argument", sx)
        return neg(parse_formula(sx[1], env))
    if op == "=>":
        if len(sx) < 3:
            raise FormulaError("'=>' takes at least two arguments", sx)
        parts = [parse_formula(a, env) for a in sx[1:]]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = disj((neg(p), out))
        return out
    if op in ("exists", "forall"):
        if len(sx) != 3 or not isinstance(sx[1], SList):
            raise FormulaError(f"'{op}' takes a binding list and a body", sx)
        bound = []
        for b in sx[1]:
            if not (isinstance(b, SList) and len(b) == 2 and isinstance(b[0], Atom) and isinstance(b[1], Atom)):
                raise FormulaError("binding must be (name Sort)", sx)
            sort = parse_sort(b[1])
            bound.append(Var(b[0].text, sort))
        inner = ParseEnv(env.data_sort, dict(env.vars), env.preds, env.pred_sorts)
        for v in bound:
            inner.vars[v.name] = v
        out = parse_formula(sx[2], inner)
        for v in reversed(bound):
            out = Exists(v, out) if op == "exists" else Forall(v, out)
        return out
    if op in ("=", "<=", "<", ">=", ">"):
        if len(sx) != 3:
            raise FormulaError(f"'{op}' takes two arguments", sx)
        lhs, rhs = parse_term(sx[1], env), parse_term(sx[2], env)
        if term_sort(lhs) != term_sort(rhs):
            raise FormulaError(f"sort mismatch in '{op}'", sx)
        if op != "=" and term_sort(lhs) != REAL:
            raise FormulaError(f"'{op}' requires Real arguments", sx)
        if op == ">=":
            return Cmp("<=", rhs, lhs)
        if op == ">":
            return Cmp("<", rhs, lhs)
        return Cmp(op, lhs, rhs)
    if op in env.preds:
        sym = env.preds[op]
        args = tuple(parse_term(a, env) for a in sx[1:])
        if len(args) != sym.arity:
            raise FormulaError(f"predicate '{op}' expects {sym.arity} arguments", sx)
        sorts = env.pred_sorts.get(op)
        if sorts is not None:
            for a, s in zip(args, sorts):
                if term_sort(a) != s:
                    raise FormulaError(f"argument sort mismatch for '{op}'", sx)
        return Pred(sym, args)
    raise FormulaError(f"unknown connective or predicate '{op}'", sx)


def parse_sort(atom) -> Sort:
    if atom.text == "Real":
        return REAL
    if atom.text == "Id":
        return ID
    raise FormulaError(f"unknown sort '{atom.text}'", atom)


def to_text(phi) -> str:
    """Render in the concrete input syntax (inverse of parse_formula)."""
    return repr(phi)
