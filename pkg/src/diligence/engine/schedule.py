"""Readiness computation and conditional-route application.

``ready_set`` implements the any-of join: a pending node fires once every
predecessor is terminal via success or skip, with at least one success among
them, so a join fed by mutually exclusive router branches still executes.

``apply_route`` marks everything reachable only through a router's untaken
branches as Skipped, in one transitive closure, so downstream joins see those
branches as settled rather than forever pending.
"""

from __future__ import annotations

from diligence.engine.model import NodeState, RunContext, WorkflowGraph
from diligence.errors import RoutingError


def ready_set(graph: WorkflowGraph, ctx: RunContext) -> set[str]:
    """Pending nodes whose predecessors have all settled, with >=1 success.

    The Trigger has no predecessors; it is ready exactly when the run carries
    a trigger payload.
    """
    ready: set[str] = set()
    trigger = graph.trigger_id()
    for node in graph.nodes:
        if ctx.state_of(node.id) is not NodeState.PENDING:
            continue
        if node.id == trigger:
            if ctx.trigger_payload is not None:
                ready.add(node.id)
            continue
        preds = graph.predecessors(node.id)
        if not preds:
            # Non-trigger orphan: validation rejects these graphs, but the
            # scheduler itself never fires them.
            continue
        states = [ctx.state_of(p) for p in preds]
        if all(s in (NodeState.SUCCEEDED, NodeState.SKIPPED) for s in states) and any(
            s is NodeState.SUCCEEDED for s in states
        ):
            ready.add(node.id)
    return ready


def live_set(graph: WorkflowGraph, routes: dict[str, str]) -> set[str]:
    """Nodes still reachable from the Trigger given the routing decisions taken.

    Edges leaving a routed Router are followed only along the taken label;
    every other edge is followed unconditionally.
    """
    trigger = graph.trigger_id()
    live: set[str] = set()
    stack = [trigger]
    while stack:
        cur = stack.pop()
        if cur in live:
            continue
        live.add(cur)
        taken = routes.get(cur)
        for edge in graph.out_edges(cur):
            if taken is not None and edge.branch_label != taken:
                continue
            stack.append(edge.to_id)
    return live


def apply_route(
    router_id: str, taken_label: str, graph: WorkflowGraph, ctx: RunContext
) -> RunContext:
    """Record a router decision and skip all nodes routed out by it.

    A node is skipped iff, after accounting for every routing decision taken
    so far, no path from the Trigger reaches it; nodes that remain reachable
    via the taken branch or any other live path are untouched.
    """
    labels = {e.branch_label for e in graph.out_edges(router_id)}
    if taken_label not in labels:
        raise RoutingError(
            f"router {router_id!r} returned unknown branch label {taken_label!r}; "
            f"declared labels: {sorted(lb for lb in labels if lb is not None)}"
        )
    with ctx.lock:
        ctx.routes[router_id] = taken_label
        live = live_set(graph, ctx.routes)
        for node in graph.nodes:
            if node.id in live:
                continue
            if ctx.state_of(node.id) is NodeState.PENDING:
                ctx.mark_skipped(
                    node.id,
                    f"routed out: {router_id} took branch {taken_label!r}",
                )
    return ctx
