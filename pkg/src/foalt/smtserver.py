"""An SMT-LIB 2 solver process speaking over stdin/stdout.

Installed as the ``foalt-smt`` console script and used as the default
external solver.  Satisfiability is decided by the built-in engine:
complete for quantifier-free assertions, refutation-based (may answer
``unknown``) for quantified ones.
"""

from __future__ import annotations

import sys
from fractions import Fraction

from .logic import (
    And,
    BOOL,
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
    PredSym,
    REAL,
    TRUE,
    Var,
    conj,
    disj,
    neg,
    pred_atoms,
)
from .sexp import Atom, SList, SexpError, parse_one
from .theory import SAT, UNKNOWN, UNSAT, check_sat_qf, try_refute


class SmtError(Exception):
    pass


class Session:
    def __init__(self):
        self.reset()

    def reset(self):
        self.sorts = {"Real": REAL, "Bool": BOOL}
        self.consts = {}  # name -> Var
        self.preds = {}  # name -> (PredSym, arg sorts)
        self.assertions = []
        self.last_model = None

    # -- command dispatch

    def execute(self, sx) -> str | None:
        if not isinstance(sx, SList) or not sx.items or not isinstance(sx.items[0], Atom):
            raise SmtError("malformed command")
        head = sx.items[0].text
        args = sx.items[1:]
        if head in ("set-logic", "set-option", "set-info"):
            return None
        if head == "declare-sort":
            self.sorts[args[0].text] = ID
            return None
        if head == "declare-const":
            return self._declare(args[0].text, [], args[1])
        if head == "declare-fun":
            return self._declare(args[0].text, list(args[1].items), args[2])
        if head == "assert":
            self.assertions.append(self._formula(args[0], {}))
            return None
        if head == "check-sat":
            return self._check_sat()
        if head == "get-model":
            return self._get_model()
        if head == "reset":
            self.reset()
            return None
        if head == "echo":
            return args[0].text
        if head == "exit":
            raise SystemExit(0)
        raise SmtError(f"unsupported command '{head}'")

    def _declare(self, name, arg_sorts, ret) -> None:
        ret_sort = self._sort(ret)
        if not arg_sorts and ret_sort != BOOL:
            self.consts[name] = Var(name, ret_sort)
        elif ret_sort == BOOL:
            sorts = tuple(self._sort(a) for a in arg_sorts)
            self.preds[name] = (PredSym(name, len(sorts)), sorts)
        else:
            raise SmtError("only constants and boolean-valued functions are supported")
        return None

    def _sort(self, sx):
        name = sx.text if isinstance(sx, Atom) else None
        if name not in self.sorts:
            raise SmtError(f"unknown sort {name!r}")
        return self.sorts[name]

    # -- terms and formulas

    def _term(self, sx, scope):
        if isinstance(sx, Atom):
            t = sx.text
            if t in scope:
                return scope[t]
            if t in self.consts:
                return self.consts[t]
            num = _numeral(t)
            if num is not None:
                return Const(num, REAL)
            raise SmtError(f"unknown term symbol '{t}'")
        head = sx.items[0].text
        args = sx.items[1:]
        if head in ("+", "-", "*", "/"):
            terms = [self._term(a, scope) for a in args]
            vals = [t.value for t in terms if isinstance(t, Const) and isinstance(t.value, Fraction)]
            if len(vals) == len(terms):
                return Const(_fold_arith(head, vals), REAL)
            from .logic import App

            return App(head, tuple(terms))
        raise SmtError(f"unsupported term head '{head}'")

    def _formula(self, sx, scope):
        if isinstance(sx, Atom):
            t = sx.text
            if t == "true":
                return TRUE
            if t == "false":
                return FALSE
            if t in self.preds:
                return Pred(self.preds[t][0], ())
            raise SmtError(f"unknown formula symbol '{t}'")
        head = sx.items[0].text
        args = sx.items[1:]
        if head == "not":
            return neg(self._formula(args[0], scope))
        if head == "and":
            return conj(self._formula(a, scope) for a in args)
        if head == "or":
            return disj(self._formula(a, scope) for a in args)
        if head == "=>":
            parts = [self._formula(a, scope) for a in args]
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = disj((neg(p), out))
            return out
        if head in ("exists", "forall"):
            bindings = dict(scope)
            bound = []
            for b in args[0].items:
                v = Var(b.items[0].text, self._sort(b.items[1]))
                bindings[v.name] = v
                bound.append(v)
            out = self._formula(args[1], bindings)
            for v in reversed(bound):
                out = Exists(v, out) if head == "exists" else Forall(v, out)
            return out
        if head in ("<", "<=", ">", ">=", "="):
            terms = [self._term(a, scope) for a in args]
            if head == ">":
                return Cmp("<", terms[1], terms[0])
            if head == ">=":
                return Cmp("<=", terms[1], terms[0])
            return conj(Cmp(head, a, b) for a, b in zip(terms, terms[1:]))
        if head == "distinct":
            terms = [self._term(a, scope) for a in args]
            return conj(
                Not(Cmp("=", terms[i], terms[j]))
                for i in range(len(terms))
                for j in range(i + 1, len(terms))
            )
        if head in self.preds:
            sym, _sorts = self.preds[head]
            return Pred(sym, tuple(self._term(a, scope) for a in args))
        raise SmtError(f"unknown formula head '{head}'")

    # -- queries

    def _check_sat(self) -> str:
        phi = conj(self.assertions)
        self.last_model = None
        from .logic import is_quantifier_free

        if is_quantifier_free(phi):
            model = check_sat_qf(phi)
            if model is not None:
                self.last_model = model
                return SAT
            return UNSAT
        return try_refute(phi)

    def _get_model(self) -> str:
        if self.last_model is None:
            raise SmtError("no model available")
        lines = []
        for v, val in sorted(self.last_model.valuation.items(), key=lambda it: repr(it[0])):
            sort = "Real" if isinstance(val, Fraction) else "Id"
            lines.append(f"  (define-fun {_quote(repr(v))} () {sort} {_value(val)})")
        return "(\n" + "\n".join(lines) + "\n)"


def _numeral(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return None


def _fold_arith(op, vals):
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for v in vals[1:]:
            out -= v
        return out
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    out = vals[0]
    for v in vals[1:]:
        out /= v
    return out


def _quote(name: str) -> str:
    import re

    return name if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) else f"|{name}|"


def _value(val) -> str:
    if isinstance(val, EqValue):
        return _quote(repr(val))
    if val.denominator == 1:
        return str(val.numerator) if val >= 0 else f"(- {-val.numerator})"
    s = f"(/ {abs(val.numerator)} {val.denominator})"
    return s if val >= 0 else f"(- {s})"


def _read_commands(stream):
    """Yield complete toplevel s-expressions from a character stream."""
    buf = []
    depth = 0
    in_bars = False
    in_comment = False
    while True:
        ch = stream.read(1)
        if ch == "":
            break
        if in_comment:
            if ch == "\n":
                in_comment = False
            continue
        if ch == "|":
            in_bars = not in_bars
        elif not in_bars:
            if ch == ";":
                in_comment = True
                continue
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
        buf.append(ch)
        if depth == 0 and buf and "".join(buf).strip():
            text = "".join(buf).strip()
            if text.startswith("("):
                yield text
                buf = []
            elif ch.isspace():
                buf = []


def main() -> int:
    session = Session()
    for text in _read_commands(sys.stdin):
        try:
            out = session.execute(parse_one(text))
        except SystemExit:
            return 0
        except (SmtError, SexpError, IndexError, AttributeError) as e:
            out = f'(error "{e}")'
        if out is not None:
            sys.stdout.write(out + "\n")
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
