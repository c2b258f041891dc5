"""Graph-validator behavior, checked against independent oracles."""

from __future__ import annotations

import random

from diligence.engine import EdgeSpec, validate_graph

from helpers import as_tuples, graph_of, random_valid_graph
from oracles import kahn_topo_order, oracle_graph_ok, reachable_from


def codes(report):
    return {v.code for v in report.violations}


def test_single_trigger_no_terminal_is_rejected():
    report = validate_graph(graph_of([("t", "Trigger")], []))
    assert not report.ok
    assert "unreachable-terminal" in codes(report)


def test_two_node_cycle_is_named():
    g = graph_of(
        [("a", "Trigger"), ("b", "Transform")],
        [("a", "b"), ("b", "a")],
    )
    report = validate_graph(g)
    assert not report.ok
    cycle_violations = [v for v in report.violations if v.code == "cycle"]
    assert cycle_violations, report.violations
    assert "cycle detected: a,b" in cycle_violations[0].message


def test_linear_pipeline_passes():
    g = graph_of(
        [("t", "Trigger"), ("x", "Transform"), ("r", "Render")],
        [("t", "x"), ("x", "r")],
    )
    assert validate_graph(g).ok


def test_duplicate_node_id_rejected():
    g = graph_of(
        [("t", "Trigger"), ("x", "Transform"), ("x", "Transform"), ("r", "Render")],
        [("t", "x"), ("x", "r")],
    )
    assert "duplicate-node-id" in codes(validate_graph(g))


def test_multiple_triggers_rejected():
    g = graph_of(
        [("t", "Trigger"), ("u", "Trigger"), ("r", "Render")],
        [("t", "r"), ("u", "r")],
    )
    assert "multiple-triggers" in codes(validate_graph(g))


def test_edge_to_unknown_node_rejected():
    g = graph_of(
        [("t", "Trigger"), ("r", "Render")],
        [("t", "r"), ("t", "ghost")],
    )
    assert "unknown-endpoint" in codes(validate_graph(g))


def test_router_needs_two_distinct_labeled_branches():
    base_nodes = [
        ("t", "Trigger"),
        ("sw", "Router"),
        ("a", "Transform"),
        ("b", "Transform"),
        ("r", "Render"),
    ]
    ok = graph_of(
        base_nodes,
        [("t", "sw"), ("sw", "a", "Yes"), ("sw", "b", "No"), ("a", "r"), ("b", "r")],
    )
    assert validate_graph(ok).ok

    one_branch = graph_of(
        [("t", "Trigger"), ("sw", "Router"), ("a", "Transform"), ("r", "Render")],
        [("t", "sw"), ("sw", "a", "Yes"), ("a", "r")],
    )
    assert "router-branch-count" in codes(validate_graph(one_branch))

    unlabeled = graph_of(
        base_nodes,
        [("t", "sw"), ("sw", "a", "Yes"), ("sw", "b"), ("a", "r"), ("b", "r")],
    )
    assert "unlabeled-router-edge" in codes(validate_graph(unlabeled))

    dupe_labels = graph_of(
        base_nodes,
        [("t", "sw"), ("sw", "a", "Yes"), ("sw", "b", "Yes"), ("a", "r"), ("b", "r")],
    )
    assert "duplicate-branch-label" in codes(validate_graph(dupe_labels))


def test_label_on_plain_edge_rejected():
    g = graph_of(
        [("t", "Trigger"), ("r", "Render")],
        [("t", "r", "Yes")],
    )
    assert "unexpected-branch-label" in codes(validate_graph(g))


def test_unreachable_node_rejected():
    g = graph_of(
        [("t", "Trigger"), ("x", "Transform"), ("island", "Transform"), ("r", "Render")],
        [("t", "x"), ("x", "r"), ("island", "r")],
    )
    assert "unreachable-from-trigger" in codes(validate_graph(g))


def test_random_valid_graphs_pass_and_match_oracle():
    rng = random.Random(20240811)
    for _ in range(50):
        g = random_valid_graph(rng)
        nodes, edges = as_tuples(g)
        assert oracle_graph_ok(nodes, edges), (nodes, edges)
        report = validate_graph(g)
        assert report.ok, report.violations


def test_mutated_graphs_match_oracle_verdict():
    """Edge reversals and additions: validator verdict equals oracle verdict."""
    rng = random.Random(987123)
    checked = disagreements = 0
    for _ in range(120):
        g = random_valid_graph(rng)
        edges = list(g.edges)
        if rng.random() < 0.5 and edges:
            victim = rng.randrange(len(edges))
            e = edges[victim]
            edges[victim] = EdgeSpec(e.to_id, e.from_id, e.branch_label)
        else:
            ids = [n.id for n in g.nodes]
            edges.append(EdgeSpec(rng.choice(ids), rng.choice(ids)))
        mutated = graph_of(
            [(n.id, n.kind.value) for n in g.nodes],
            [(e.from_id, e.to_id, e.branch_label) for e in edges],
        )
        nodes_t, edges_t = as_tuples(mutated)
        expected = oracle_graph_ok(nodes_t, edges_t)
        actual = validate_graph(mutated).ok
        checked += 1
        if expected != actual:
            disagreements += 1
    assert checked == 120
    assert disagreements == 0


def test_validator_acyclicity_agrees_with_kahn_on_random_mutations():
    rng = random.Random(55)
    for _ in range(100):
        g = random_valid_graph(rng)
        ids = [n.id for n in g.nodes]
        edges = [(e.from_id, e.to_id, None) for e in g.edges]
        # Random reversal to provoke cycles.
        if edges:
            i = rng.randrange(len(edges))
            frm, to, _ = edges[i]
            edges[i] = (to, frm, None)
        acyclic = kahn_topo_order(ids, edges) is not None
        mutated = graph_of([(n.id, n.kind.value) for n in g.nodes], edges)
        report = validate_graph(mutated)
        has_cycle_violation = any(v.code == "cycle" for v in report.violations)
        assert has_cycle_violation == (not acyclic)
        # Sanity: reachability oracle agrees with the unreachable violations.
        if acyclic:
            reach = reachable_from(ids, edges, "t")
            unreachable_reported = {
                v.subject
                for v in report.violations
                if v.code == "unreachable-from-trigger"
            }
            assert unreachable_reported == set(ids) - reach
