"""Client for an external SMT-LIB 2 solver process.

The binary comes from ``--solver``/``FOALT_SOLVER`` and defaults to the
shipped ``foalt-smt``.  One process per session, reused across queries
with ``(reset)``; a query that exceeds its timeout kills the process and
degrades to Unknown.
"""

from __future__ import annotations

import os
import re
import select
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .logic import (
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
    Var,
    free_vars,
    pred_atoms,
    term_sort,
)
from .theory import SAT, UNKNOWN, UNSAT


DEFAULT_BINARY = "foalt-smt"


def solver_binary(explicit: str | None = None) -> str:
    return explicit or os.environ.get("FOALT_SOLVER") or DEFAULT_BINARY


@dataclass
class SolverQuery:
    logic: str
    declarations: list
    assertion: object
    timeout_ms: int = 2000


@dataclass
class SolverAnswer:
    status: str  # 'sat' | 'unsat' | 'unknown'
    reason: str | None = None


# ---------------------------------------------------------------------------
# SMT-LIB printing


def _mangle(name: str) -> str:
    return name if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) else f"|{name}|"


def term_to_smt(t) -> str:
    if isinstance(t, Var):
        return _mangle(repr(t))
    if isinstance(t, Const):
        if isinstance(t.value, EqValue):
            return _mangle(_eq_const_name(t.value))
        return _fraction_to_smt(t.value)
    if t.fn == "fresh!":
        raise ValueError("witness-internal term in a solver query")
    return "(" + t.fn + "".join(" " + term_to_smt(a) for a in t.args) + ")"


def _fraction_to_smt(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator) if v >= 0 else f"(- {-v.numerator})"
    body = f"(/ {abs(v.numerator)} {v.denominator})"
    return body if v >= 0 else f"(- {body})"


def _eq_const_name(v: EqValue) -> str:
    return "vinit" if v.index < 0 else repr(v)


def formula_to_smt(phi) -> str:
    if phi == TRUE:
        return "true"
    if phi == FALSE:
        return "false"
    if isinstance(phi, Pred):
        name = _mangle(repr(phi.sym))
        if not phi.args:
            return name
        return "(" + name + "".join(" " + term_to_smt(a) for a in phi.args) + ")"
    if isinstance(phi, Cmp):
        return f"({phi.op} {term_to_smt(phi.lhs)} {term_to_smt(phi.rhs)})"
    if isinstance(phi, Not):
        return f"(not {formula_to_smt(phi.arg)})"
    if isinstance(phi, And):
        return "(and" + "".join(" " + formula_to_smt(a) for a in phi.args) + ")"
    if isinstance(phi, Or):
        return "(or" + "".join(" " + formula_to_smt(a) for a in phi.args) + ")"
    kind = "exists" if isinstance(phi, Exists) else "forall"
    v = phi.var
    return f"({kind} (({_mangle(repr(v))} {v.sort.name})) {formula_to_smt(phi.body)})"


def build_query(phi, timeout_ms: int = 2000) -> SolverQuery:
    """Declarations and logic inferred from the formula."""
    decls = []
    uses_id = False
    uses_real = False
    uses_uf = False
    eq_consts = _eq_values(phi)
    pred_decls = {}
    for atom in pred_atoms(phi):
        uses_uf = True
        sorts = tuple(term_sort(a) for a in atom.args)
        pred_decls[repr(atom.sym)] = sorts
    for v in sorted(free_vars(phi), key=repr):
        decls.append(f"(declare-const {_mangle(repr(v))} {v.sort.name})")
        uses_id |= v.sort == ID
        uses_real |= v.sort == REAL
    for name, sorts in sorted(pred_decls.items()):
        arglist = " ".join(s.name for s in sorts)
        decls.append(f"(declare-fun {_mangle(name)} ({arglist}) Bool)")
        uses_id |= ID in sorts
        uses_real |= REAL in sorts
    uses_id |= bool(eq_consts)
    uses_real |= _mentions_real(phi)
    if uses_id:
        decls.insert(0, "(declare-sort Id 0)")
        names = [_mangle(_eq_const_name(v)) for v in sorted(eq_consts, key=lambda e: e.index)]
        for n in names:
            decls.append(f"(declare-const {n} Id)")
        if len(names) > 1:
            decls.append(f"(assert (distinct {' '.join(names)}))")
    if uses_uf:
        logic = "UFLRA" if uses_real else "UF"
    else:
        logic = "LRA" if uses_real else "UF"
    return SolverQuery(logic, decls, phi, timeout_ms)


def _eq_values(phi) -> set:
    out = set()

    def walk_t(t):
        if isinstance(t, Const) and isinstance(t.value, EqValue):
            out.add(t.value)
        elif hasattr(t, "args") and not isinstance(t, (Pred, Cmp)):
            for a in t.args:
                walk_t(a)

    def walk(f):
        if isinstance(f, Pred):
            for a in f.args:
                walk_t(a)
        elif isinstance(f, Cmp):
            walk_t(f.lhs)
            walk_t(f.rhs)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        else:
            walk(f.body)

    walk(phi)
    return out


def _mentions_real(phi) -> bool:
    if isinstance(phi, Pred):
        return any(term_sort(a) == REAL for a in phi.args)
    if isinstance(phi, Cmp):
        return term_sort(phi.lhs) == REAL
    if isinstance(phi, Not):
        return _mentions_real(phi.arg)
    if isinstance(phi, (And, Or)):
        return any(_mentions_real(a) for a in phi.args)
    return phi.var.sort == REAL or _mentions_real(phi.body)


# ---------------------------------------------------------------------------
# sessions


class SolverSession:
    """One external solver process, reused across check() calls."""

    def __init__(self, binary: str | None = None, timeout: float = 2.0, log=None):
        self.binary = solver_binary(binary)
        self.timeout = timeout
        self.log = log
        self.proc = None
        self.queries = 0

    def _launch(self) -> bool:
        cmd = [self.binary]
        if os.path.basename(self.binary) in ("z3",):
            cmd.append("-in")
        try:
            self.proc = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError:
            self.proc = None
            return False
        return True

    def close(self):
        if self.proc is not None:
            try:
                self.proc.kill()
            except OSError:
                pass
            self.proc = None

    def check(self, phi, timeout: float | None = None) -> str:
        """'sat' | 'unsat' | 'unknown' for the satisfiability of phi."""
        timeout = self.timeout if timeout is None else timeout
        q = build_query(phi, int(timeout * 1000))
        if self.proc is None or self.proc.poll() is not None:
            if not self._launch():
                return UNKNOWN
            first = True
        else:
            first = False
        script = [] if first else ["(reset)"]
        script.append(f"(set-logic {q.logic})")
        script.extend(q.declarations)
        script.append(f"(assert {formula_to_smt(q.assertion)})")
        script.append("(check-sat)")
        text = "\n".join(script) + "\n"
        if self.log is not None:
            self.log.write(text)
            self.log.flush()
        try:
            self.proc.stdin.write(text)
            self.proc.stdin.flush()
        except (OSError, ValueError):
            self.close()
            return UNKNOWN
        line = self._read_line(timeout)
        self.queries += 1
        if self.log is not None and line is not None:
            self.log.write(f"; -> {line}\n")
        if line in (SAT, UNSAT, UNKNOWN):
            return line
        self.close()
        return UNKNOWN

    def _read_line(self, timeout: float) -> str | None:
        import time

        deadline = time.monotonic() + timeout
        buf = []
        fd = self.proc.stdout.fileno()
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                return None
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                self.close()
                return None
            chunk = os.read(fd, 4096).decode()
            if chunk == "":
                self.close()
                return None
            buf.append(chunk)
            if "\n" in chunk:
                return "".join(buf).splitlines()[0].strip()


def query(q: SolverQuery, binary: str | None = None) -> SolverAnswer:
    """One-shot query with a fresh session."""
    s = SolverSession(binary, timeout=q.timeout_ms / 1000.0)
    try:
        phi = q.assertion
        status = s.check(phi)
        return SolverAnswer(status, None if status != UNKNOWN else "timeout-or-io")
    finally:
        s.close()
