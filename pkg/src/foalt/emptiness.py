"""Lazy-annotation emptiness checking.

Unfolds the automaton's event tree breadth-first, labels nodes with
positive state formulas, seals spurious paths by conjoining interpolant
sequences, and stops expanding nodes whose labels are entailed by an
earlier uncovered node.  Returns Empty with an auditable certificate,
NonEmpty with a verified data word, or Unknown on budget exhaustion.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .automaton import Foaa
from .interp import Gli, compute_gli, compute_witnesses, validate_gli
from .logic import (
    And,
    Exists,
    FALSE,
    Not,
    Or,
    Pred,
    TRUE,
    conj,
    free_vars,
    neg,
    nnf,
    simplify,
    unstamp_preds,
)
from .symbolic import SPURIOUS, build_path, check_event_sequence, member
from .theory import UNKNOWN, check_sat_qf, eliminate_quantifiers, entails


class EmptinessError(Exception):
    pass


@dataclass
class Node:
    alpha: tuple  # event sequence from the root
    label: object  # positive closed formula over the state predicates
    order: int  # creation index
    covered_by: tuple | None = None  # alpha of the covering node
    expanded: bool = False
    generation: int = 0  # bumped on refinement


@dataclass
class Unfolding:
    automaton: Foaa
    nodes: dict = field(default_factory=dict)  # alpha -> Node

    def node(self, alpha) -> Node:
        return self.nodes[tuple(alpha)]

    def children(self, alpha):
        return [n for n in self.nodes.values() if len(n.alpha) == len(alpha) + 1 and n.alpha[: len(alpha)] == tuple(alpha)]

    def leaves(self):
        return [n for n in self.nodes.values() if not n.expanded]

    def ancestors_or_self(self, alpha):
        return [self.nodes[tuple(alpha[:i])] for i in range(len(alpha), -1, -1)]

    def is_covered(self, alpha) -> bool:
        return any(n.covered_by is not None for n in self.ancestors_or_self(alpha))

    def dump(self) -> str:
        lines = []
        for n in sorted(self.nodes.values(), key=lambda n: n.order):
            name = " ".join(n.alpha) if n.alpha else "ε"
            cov = " ".join(n.covered_by) if n.covered_by else ("ε" if n.covered_by == () else "-")
            lines.append(f"{name} | {n.label!r} | covered-by: {cov}")
        return "\n".join(lines) + "\n"


@dataclass
class Empty:
    certificate: Unfolding


@dataclass
class NonEmpty:
    witness: list  # DataWord


@dataclass
class Unknown:
    reason: str
    partial: Unfolding


@dataclass
class Budget:
    max_nodes: int = 10000
    wall_seconds: float = 60.0
    solver_timeout: float = 2.0


@dataclass
class Stats:
    nodes_expanded: int = 0
    nodes_visited: int = 0
    refinements: int = 0
    solver_time: float = 0.0


def new_unfolding(a: Foaa) -> Unfolding:
    u = Unfolding(a)
    u.nodes[()] = Node((), simplify(a.initial), 0)
    return u


def expand(u: Unfolding, leaf, event=None) -> Unfolding:
    """Add the children of a leaf (all events when none is given), labeled ⊤."""
    leaf = tuple(leaf)
    node = u.node(leaf)
    if u.is_covered(leaf):
        raise EmptinessError("cannot expand a covered node")
    if node.label == FALSE:
        return u
    events = [event] if event is not None else list(u.automaton.events)
    for e in events:
        child = leaf + (e,)
        if child in u.nodes:
            raise EmptinessError(f"node already present: {' '.join(child)}")
        u.nodes[child] = Node(child, TRUE, len(u.nodes))
    node.expanded = True
    return u


def _unstamp_close(phi):
    """Lemma-style label: strip step indices and ∃-close the data variables."""
    out = unstamp_preds(phi)
    for v in sorted(free_vars(out), key=lambda u: (u.name, u.stamp or 0)):
        out = Exists(v, out)
    return simplify(out)


def refine(u: Unfolding, alpha, g: Gli) -> Unfolding:
    """Conjoin the ∃-closed unstamped interpolants along the path to alpha;
    coverage pairs whose covering node changed are re-checked."""
    alpha = tuple(alpha)
    if validate_gli(u.automaton, alpha, g) is not True:
        raise EmptinessError("refusing to refine with a non-validated interpolant sequence")
    changed = []
    for k in range(len(alpha) + 1):
        node = u.node(alpha[:k])
        j_k = _unstamp_close(g.formulas[k])
        if j_k == TRUE:
            continue
        new_label = simplify(conj((node.label, j_k)))
        if new_label != node.label:
            node.label = new_label
            node.generation += 1
            changed.append(node.alpha)
    _recheck_coverage(u, changed)
    return u


def _recheck_coverage(u: Unfolding, changed):
    changed = set(map(tuple, changed))
    for n in u.nodes.values():
        if n.covered_by is not None and tuple(n.covered_by) in changed:
            coverer = u.node(n.covered_by)
            if _label_entails(n.label, coverer.label) != "yes":
                n.covered_by = None


def _label_entails(phi, psi, solver=None, stats: Stats | None = None) -> str:
    # fast syntactic paths first
    if psi == TRUE or phi == FALSE or phi == psi:
        return "yes"
    if _conjunct_subset(phi, psi):
        return "yes"
    t0 = time.monotonic()
    try:
        out = _entails_closed(phi, psi)
        if out != "yes" and solver is not None:
            r = solver.check(conj((phi, nnf(neg(psi)))))
            out = "yes" if r == "unsat" else ("no" if r == "sat" else UNKNOWN)
    finally:
        if stats is not None:
            stats.solver_time += time.monotonic() - t0
    return out


MAX_ENTAIL_COMBOS = 4096


def _entails_closed(phi, psi) -> str:
    """Entailment between ∃-closed positive labels: instantiate psi's
    existentials over ground terms of phi's matrix, accepting the first
    instance refuted by the quantifier-free engine.  Sound, not complete."""
    from itertools import product

    from .logic import ID, REAL, is_quantifier_free
    from .theory import ZERO_TERM_POOL, literal_nnf

    pv, m = _strip_exists(phi)
    qv, n = _strip_exists(psi)
    if not (is_quantifier_free(m) and is_quantifier_free(n)):
        return UNKNOWN
    from .theory import _ground_terms

    pools = {}
    for v in qv:
        cands = _ground_terms(m, v.sort)
        for extra in ZERO_TERM_POOL.get(v.sort, []):
            if extra not in cands:
                cands.append(extra)
        pools[v] = cands
    total = 1
    for v in qv:
        total *= max(1, len(pools[v]))
    if not qv:
        combos = [()]
    elif total > MAX_ENTAIL_COMBOS:
        combos = []
    else:
        combos = product(*(pools[v] for v in qv))
    from .logic import substitute

    for combo in combos:
        inst = substitute(n, dict(zip(qv, combo)))
        if check_sat_qf(conj((m, literal_nnf(neg(inst))))) is None:
            return "yes"
    return UNKNOWN


def _strip_exists(phi):
    prefix = []
    while isinstance(phi, Exists):
        prefix.append(phi.var)
        phi = phi.body
    return prefix, phi


def _conjunct_subset(phi, psi) -> bool:
    """phi ⊨ psi when psi's matrix conjuncts are a subset of phi's under an
    identical existential prefix."""
    pv, pm = _strip_exists(phi)
    qv, qm = _strip_exists(psi)
    if pv[: len(qv)] != qv and pv != qv:
        return False
    pc = set(pm.args) if isinstance(pm, And) else {pm}
    qc = set(qm.args) if isinstance(qm, And) else {qm}
    return qc <= pc


def check_coverage(u: Unfolding, alpha, solver=None, stats: Stats | None = None):
    """An uncovered node whose label is entailed by the label of some
    ancestor-or-self of alpha; records and returns the covering node.

    Covering nodes may be proper ancestors (the loop-closing case) but
    never lie inside the candidate's own subtree, which would make the
    cover justify itself."""
    alpha = tuple(alpha)
    for cand in u.ancestors_or_self(alpha):
        if cand.covered_by is not None:
            return u.node(cand.covered_by)
        if cand.label == TRUE:
            continue
        for beta in sorted(u.nodes.values(), key=lambda n: n.order):
            if beta.alpha == cand.alpha or beta.covered_by is not None:
                continue
            if beta.alpha[: len(cand.alpha)] == cand.alpha:
                continue  # inside the candidate's subtree
            if u.is_covered(beta.alpha):
                continue
            if _label_entails(cand.label, beta.label, solver, stats) == "yes":
                cand.covered_by = beta.alpha
                _drop_self_justifying(u)
                return beta
    return None


def _drop_self_justifying(u: Unfolding):
    """Covers whose covering node has itself become covered are invalid."""
    changed = True
    while changed:
        changed = False
        for n in u.nodes.values():
            if n.covered_by is not None and u.is_covered(n.covered_by):
                n.covered_by = None
                changed = True


def prune_covered_subtrees(u: Unfolding) -> Unfolding:
    """Certificate view: drop every node strictly below a covered node
    (such nodes were never explored and carry no obligations)."""
    out = Unfolding(u.automaton)
    for alpha, n in u.nodes.items():
        if any(u.nodes[alpha[:i]].covered_by is not None for i in range(len(alpha))):
            continue
        out.nodes[alpha] = n
    return out


def is_safe(u: Unfolding, node=None) -> bool:
    """Every label is inconsistent with the final-state axioms; exact for
    the positive labels the algorithm produces."""
    finals = u.automaton.final_syms()
    nodes = [u.node(node)] if node is not None else list(u.nodes.values())
    for n in nodes:
        if not _label_safe(n.label, finals):
            return False
    return True


def _label_safe(label, finals) -> bool:
    from .symbolic import _replace_atoms

    grounded = simplify(_replace_atoms(label, lambda at: TRUE if at.sym in finals else FALSE))
    ground = eliminate_quantifiers(grounded)
    return check_sat_qf(ground, predicates_as_booleans=False) is None


def is_closed(u: Unfolding) -> bool:
    """Every leaf is covered or sealed (⊥)."""
    return all(n.expanded or n.label == FALSE or u.is_covered(n.alpha) for n in u.leaves())


def check_emptiness(a: Foaa, budget: Budget | None = None, solver=None, stats: Stats | None = None):
    """Breadth-first lazy-annotation emptiness; Verdict plus certificate."""
    from .automaton import validate

    errors = validate(a)
    if errors:
        raise EmptinessError("; ".join(errors))
    budget = budget or Budget()
    stats = stats if stats is not None else Stats()
    deadline = time.monotonic() + budget.wall_seconds
    u = new_unfolding(a)
    queue = deque([()])
    while queue:
        if time.monotonic() > deadline:
            return Unknown("budget", u)
        alpha = queue.popleft()
        node = u.node(alpha)
        if node.expanded or node.label == FALSE or u.is_covered(alpha):
            continue
        stats.nodes_visited += 1
        if check_coverage(u, alpha, solver, stats) is not None:
            continue
        outcome = check_event_sequence(a, list(alpha))
        if outcome is not SPURIOUS:
            word = outcome.word
            if not member(a, word):
                raise EmptinessError("internal error: extracted witness fails membership")
            return NonEmpty(word)
        sp = build_path(a, list(alpha))
        wa = compute_witnesses(sp)
        g = compute_gli(a, sp, wa)
        refine(u, alpha, g)
        stats.refinements += 1
        # refinement may have freed formerly covered subtrees
        for n in u.leaves():
            if not n.expanded and n.label != FALSE and not u.is_covered(n.alpha):
                if n.alpha not in queue and n.alpha != alpha:
                    queue.append(n.alpha)
        if node.label == FALSE or check_coverage(u, alpha, solver, stats) is not None:
            continue
        if len(u.nodes) + len(a.events) > budget.max_nodes:
            return Unknown("budget", u)
        expand(u, alpha)
        stats.nodes_expanded += 1
        for child in u.children(alpha):
            queue.append(child.alpha)
    cert = prune_covered_subtrees(u)
    if not is_safe(cert):
        raise EmptinessError("internal error: certificate is not safe")
    if not is_closed(cert):
        raise EmptinessError("internal error: certificate is not closed")
    return Empty(cert)
