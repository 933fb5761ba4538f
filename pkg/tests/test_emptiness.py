import pytest

from foalt.emptiness import (
    Budget,
    Empty,
    EmptinessError,
    NonEmpty,
    Stats,
    Unknown,
    check_coverage,
    check_emptiness,
    expand,
    is_closed,
    is_safe,
    new_unfolding,
    prune_covered_subtrees,
    refine,
)
from foalt.interp import compute_gli, compute_witnesses
from foalt.logic import FALSE, TRUE
from foalt.symbolic import build_path, member

from conftest import load


def test_example1_is_empty(example1):
    stats = Stats()
    verdict = check_emptiness(example1, stats=stats)
    assert isinstance(verdict, Empty)
    assert stats.nodes_expanded >= 1 and stats.refinements >= 1
    cert = verdict.certificate
    assert is_safe(cert)
    assert is_closed(cert)


def test_chain_is_empty(chain):
    verdict = check_emptiness(chain)
    assert isinstance(verdict, Empty)


def test_nonempty_witness_is_member_checked(nonempty):
    verdict = check_emptiness(nonempty)
    assert isinstance(verdict, NonEmpty)
    assert member(nonempty, verdict.witness)


def test_eqpair_witness_has_distinct_values(eqpair):
    verdict = check_emptiness(eqpair)
    assert isinstance(verdict, NonEmpty)
    (_, nu1), (_, nu2) = verdict.witness
    (v1,) = nu1.values()
    (v2,) = nu2.values()
    assert v1 != v2
    assert member(eqpair, verdict.witness)


def test_budget_exhaustion_returns_unknown(example1):
    verdict = check_emptiness(example1, Budget(max_nodes=1, wall_seconds=60.0))
    assert isinstance(verdict, (Unknown, Empty))
    if isinstance(verdict, Unknown):
        assert verdict.reason == "budget"


def test_zero_wall_budget_returns_unknown(example1):
    verdict = check_emptiness(example1, Budget(wall_seconds=0.0))
    assert isinstance(verdict, Unknown)


# ---------------------------------------------------------------------------
# unfolding operations


def test_new_unfolding_root_label_is_initial(example1):
    u = new_unfolding(example1)
    root = u.node(())
    assert root.alpha == () and not root.expanded
    assert root.covered_by is None


def test_expand_adds_all_events_with_top_labels(example1):
    u = new_unfolding(example1)
    expand(u, ())
    assert u.node(()).expanded
    children = u.children(())
    assert {n.alpha for n in children} == {("a1",), ("a2",)}
    assert all(n.label == TRUE for n in children)


def test_expand_twice_raises(example1):
    u = new_unfolding(example1)
    expand(u, ())
    with pytest.raises(EmptinessError):
        expand(u, (), "a1")


def test_refine_seals_spurious_path(example1):
    u = new_unfolding(example1)
    expand(u, ())
    expand(u, ("a1",))
    alpha = ("a1", "a2")
    sp = build_path(example1, list(alpha))
    wa = compute_witnesses(sp)
    g = compute_gli(example1, sp, wa)
    refine(u, alpha, g)
    assert u.node(alpha).label == FALSE
    # interior labels got strengthened
    assert u.node(("a1",)).label != TRUE


def test_coverage_by_ancestor(example1):
    u = new_unfolding(example1)
    expand(u, ())
    alpha = ("a1", "a2")
    expand(u, ("a1",))
    sp = build_path(example1, list(alpha))
    g = compute_gli(example1, sp, compute_witnesses(sp))
    refine(u, alpha, g)
    # after refinement a1's label entails the root's (both describe a
    # non-negative tracked value), so a1 is covered by the root
    beta = check_coverage(u, ("a1",))
    assert beta is not None
    assert u.is_covered(("a1",))


def test_dump_format(example1):
    verdict = check_emptiness(example1)
    text = verdict.certificate.dump()
    lines = text.strip().splitlines()
    assert lines[0].startswith("ε | ")
    assert all(" | covered-by: " in line for line in lines)


def test_pruned_certificate_repasses_audit(example1, chain):
    for a in (example1, chain):
        verdict = check_emptiness(a)
        cert = prune_covered_subtrees(verdict.certificate)
        assert is_safe(cert)
        assert is_closed(cert)


def test_invalid_automaton_is_rejected(example1):
    from dataclasses import replace

    bad = replace(example1, events=())
    with pytest.raises(EmptinessError):
        check_emptiness(bad)
