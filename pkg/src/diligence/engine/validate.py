"""Structural validation of workflow graphs.

Violations are data, not exceptions: callers get a full report naming every
offending node or edge and the rule it breaks.
"""

from __future__ import annotations

from diligence.engine.model import NodeKind, WorkflowGraph
from diligence.validation import ValidationReport


def _find_cycle(graph: WorkflowGraph) -> list[str] | None:
    """Return one cycle as an ordered node list, or None if the graph is acyclic."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n.id: WHITE for n in graph.nodes}
    parent: dict[str, str] = {}

    for root in color:
        if color[root] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(root, 0)]
        color[root] = GREY
        while stack:
            node, idx = stack[-1]
            succs = graph.successors(node)
            if idx < len(succs):
                stack[-1] = (node, idx + 1)
                nxt = succs[idx]
                if color.get(nxt, BLACK) == GREY:
                    # Walk parents back from `node` to `nxt` to name the cycle.
                    cycle = [nxt]
                    cur = node
                    while cur != nxt:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.reverse()
                    # Rotate so the list starts at its lexicographically
                    # smallest member; keeps the message stable across runs.
                    pivot = cycle.index(min(cycle))
                    return cycle[pivot:] + cycle[:pivot]
                if color.get(nxt) == WHITE:
                    color[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return None


def validate_graph(graph: WorkflowGraph) -> ValidationReport:
    report = ValidationReport()

    # Node identity rules.
    seen_ids: set[str] = set()
    for n in graph.nodes:
        if not n.id:
            report.add("empty-node-id", "node id must be a non-empty string")
        elif n.id in seen_ids:
            report.add("duplicate-node-id", "node id declared more than once", n.id)
        seen_ids.add(n.id)

    triggers = graph.trigger_ids()
    if len(triggers) == 0:
        report.add("missing-trigger", "graph has no Trigger node")
    elif len(triggers) > 1:
        report.add(
            "multiple-triggers",
            f"graph must have exactly one Trigger node, found {len(triggers)}",
            ",".join(sorted(triggers)),
        )

    # Edge endpoint and router-labeling rules.
    for e in graph.edges:
        subject = f"{e.from_id}->{e.to_id}"
        if e.from_id not in seen_ids:
            report.add("unknown-endpoint", f"edge source {e.from_id!r} is not a node", subject)
            continue
        if e.to_id not in seen_ids:
            report.add("unknown-endpoint", f"edge target {e.to_id!r} is not a node", subject)
            continue
        from_kind = graph.node(e.from_id).kind
        if from_kind is NodeKind.ROUTER:
            if e.branch_label is None:
                report.add(
                    "unlabeled-router-edge",
                    "every edge leaving a Router must carry a branch label",
                    subject,
                )
        elif e.branch_label is not None:
            report.add(
                "unexpected-branch-label",
                f"edge from non-Router carries branch label {e.branch_label!r}",
                subject,
            )

    for n in graph.nodes:
        if n.kind is not NodeKind.ROUTER:
            continue
        out = graph.out_edges(n.id)
        if len(out) < 2:
            report.add(
                "router-branch-count",
                f"Router must have at least 2 outgoing edges, found {len(out)}",
                n.id,
            )
        labels = [e.branch_label for e in out if e.branch_label is not None]
        dupes = sorted({lb for lb in labels if labels.count(lb) > 1})
        for lb in dupes:
            report.add(
                "duplicate-branch-label",
                f"branch label {lb!r} used on more than one edge",
                n.id,
            )

    # Bail out before graph-walk rules if identities are already broken:
    # adjacency maps ignore edges with unknown endpoints anyway.
    cycle = _find_cycle(graph)
    if cycle is not None:
        report.add("cycle", f"cycle detected: {','.join(cycle)}", ",".join(cycle))

    # Reachability rules only make sense with a unique trigger and no cycle
    # confusion; still run them when possible so reports are maximal.
    if len(triggers) == 1:
        trigger = triggers[0]
        reachable = {trigger} | graph.descendants(trigger)
        for n in graph.nodes:
            if n.id not in reachable:
                report.add(
                    "unreachable-from-trigger",
                    "node cannot be reached from the Trigger",
                    n.id,
                )

    terminal_kinds = {NodeKind.RENDER, NodeKind.DELIVER}
    for n in graph.nodes:
        if n.kind in terminal_kinds:
            continue
        reach = graph.descendants(n.id)
        if not any(graph.node(d).kind in terminal_kinds for d in reach):
            report.add(
                "unreachable-terminal",
                "node reaches no Render or Deliver node",
                n.id,
            )

    return report
