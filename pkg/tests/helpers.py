"""Shared builders for engine tests: quick graphs, stub handlers, generators."""

from __future__ import annotations

import random

from diligence.engine import (
    EdgeSpec,
    FailurePolicy,
    NodeKind,
    NodeSpec,
    WorkflowGraph,
)

KIND_BY_NAME = {k.value: k for k in NodeKind}


def graph_of(nodes: list[tuple], edges: list[tuple]) -> WorkflowGraph:
    """Build a graph from terse tuples.

    Node tuples: (id, kind_name) or (id, kind_name, policy) or
    (id, kind_name, policy, run_on_degraded). Edge tuples: (from, to) or
    (from, to, label).
    """
    specs = []
    for entry in nodes:
        node_id, kind = entry[0], KIND_BY_NAME[entry[1]]
        policy = FailurePolicy(entry[2]) if len(entry) > 2 else FailurePolicy.STRICT
        flagged = entry[3] if len(entry) > 3 else False
        specs.append(
            NodeSpec(
                id=node_id,
                kind=kind,
                handler_key=f"h_{node_id}",
                policy=policy,
                run_on_degraded=flagged,
            )
        )
    edge_specs = [
        EdgeSpec(e[0], e[1], e[2] if len(e) > 2 else None) for e in edges
    ]
    return WorkflowGraph(nodes=specs, edges=edge_specs)


def echo_handlers(graph: WorkflowGraph, router_labels: dict[str, str] | None = None):
    """One deterministic handler per node: emits its id plus sorted input keys.

    Router nodes return the label configured for them (default: first declared
    label in edge order).
    """
    router_labels = dict(router_labels or {})
    handlers = {}
    for node in graph.nodes:
        if node.kind is NodeKind.ROUTER:
            label = router_labels.get(node.id)
            if label is None:
                out = graph.out_edges(node.id)
                label = out[0].branch_label if out else ""

            def make_router(lb):
                return lambda inputs: lb

            handlers[node.handler_key] = make_router(label)
        else:

            def make_echo(nid):
                return lambda inputs: {"node": nid, "saw": sorted(inputs.artifacts)}

            handlers[node.handler_key] = make_echo(node.id)
    return handlers


def as_tuples(graph: WorkflowGraph):
    """Plain (nodes, edges) tuples for the oracle module."""
    nodes = [(n.id, n.kind.value) for n in graph.nodes]
    edges = [(e.from_id, e.to_id, e.branch_label) for e in graph.edges]
    return nodes, edges


def assert_causal_ordering(graph: WorkflowGraph, ctx) -> None:
    """Every node starts no earlier than its last non-skipped predecessor ends."""
    from diligence.engine import NodeState

    for node in graph.nodes:
        status = ctx.statuses[node.id]
        if status.started_at is None:
            continue
        for pred in graph.predecessors(node.id):
            pred_status = ctx.statuses[pred]
            if pred_status.state is NodeState.SKIPPED:
                continue
            assert pred_status.finished_at is not None, (node.id, pred)
            assert status.started_at >= pred_status.finished_at, (
                f"{node.id} started at {status.started_at} before predecessor "
                f"{pred} finished at {pred_status.finished_at}"
            )


def intervals_overlap(a_status, b_status) -> bool:
    if None in (a_status.started_at, a_status.finished_at):
        return False
    if None in (b_status.started_at, b_status.finished_at):
        return False
    return (
        a_status.started_at < b_status.finished_at
        and b_status.started_at < a_status.finished_at
    )


def random_valid_graph(rng: random.Random, max_extra: int = 9) -> WorkflowGraph:
    """Small random DAG that satisfies every structural rule by construction.

    Layout: trigger -> chain/skip-level transforms -> render sink; extra
    forward edges sprinkled in, and every sink wired to the render node.
    """
    n_mid = rng.randint(1, max_extra)
    names = [f"n{i}" for i in range(n_mid)]
    nodes = [("t", "Trigger")] + [(m, "Transform") for m in names] + [("r", "Render")]
    order = ["t"] + names + ["r"]
    edges: list[tuple] = []
    # Spanning connectivity: each node gets an in-edge from an earlier node.
    for i, node in enumerate(order[1:], start=1):
        frm = order[rng.randrange(0, i)]
        edges.append((frm, node))
    # Extra forward edges.
    for _ in range(rng.randint(0, 2 * n_mid)):
        i, j = sorted(rng.sample(range(len(order)), 2))
        edges.append((order[i], order[j]))
    # Every node must reach the render sink.
    reaches: set[str] = {"r"}
    changed = True
    while changed:
        changed = False
        for frm, to, *_ in edges:
            if to in reaches and frm not in reaches:
                reaches.add(frm)
                changed = True
    for node in order:
        if node not in reaches:
            edges.append((node, "r"))
            reaches.add(node)
    # Dedupe while keeping order.
    seen = set()
    unique = []
    for e in edges:
        key = (e[0], e[1])
        if key not in seen:
            seen.add(key)
            unique.append(e)
    return graph_of(nodes, unique)
