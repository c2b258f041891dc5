"""Declarative graph-definition files.

Format: a JSON document with ``nodes[]{id,kind,handler}`` and
``edges[]{from,to,branch}``. Nodes accept two optional knobs: ``policy``
("strict" | "degrade", default strict) and ``run_on_degraded`` (bool,
default false). Unknown keys are ignored for forward compatibility.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from diligence.engine.model import EdgeSpec, FailurePolicy, NodeKind, NodeSpec, WorkflowGraph
from diligence.errors import GraphDefinitionError

_KINDS = {k.value: k for k in NodeKind}
_POLICIES = {p.value: p for p in FailurePolicy}


def _require(mapping: dict[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise GraphDefinitionError(f"{where}: missing required field {key!r}")
    return mapping[key]


def parse_graph(data: Any, source: str = "<memory>") -> WorkflowGraph:
    if not isinstance(data, dict):
        raise GraphDefinitionError(f"{source}: graph document must be an object")
    raw_nodes = data.get("nodes")
    raw_edges = data.get("edges")
    if not isinstance(raw_nodes, list):
        raise GraphDefinitionError(f"{source}: 'nodes' must be a list")
    if not isinstance(raw_edges, list):
        raise GraphDefinitionError(f"{source}: 'edges' must be a list")

    nodes: list[NodeSpec] = []
    for i, raw in enumerate(raw_nodes):
        where = f"{source}: nodes[{i}]"
        if not isinstance(raw, dict):
            raise GraphDefinitionError(f"{where}: node entry must be an object")
        node_id = _require(raw, "id", where)
        kind_name = _require(raw, "kind", where)
        handler = _require(raw, "handler", where)
        if kind_name not in _KINDS:
            raise GraphDefinitionError(
                f"{where}: unknown kind {kind_name!r}; expected one of "
                f"{sorted(_KINDS)}"
            )
        policy_name = raw.get("policy", FailurePolicy.STRICT.value)
        if policy_name not in _POLICIES:
            raise GraphDefinitionError(
                f"{where}: unknown policy {policy_name!r}; expected one of "
                f"{sorted(_POLICIES)}"
            )
        nodes.append(
            NodeSpec(
                id=str(node_id),
                kind=_KINDS[kind_name],
                handler_key=str(handler),
                policy=_POLICIES[policy_name],
                run_on_degraded=bool(raw.get("run_on_degraded", False)),
            )
        )

    edges: list[EdgeSpec] = []
    for i, raw in enumerate(raw_edges):
        where = f"{source}: edges[{i}]"
        if not isinstance(raw, dict):
            raise GraphDefinitionError(f"{where}: edge entry must be an object")
        edges.append(
            EdgeSpec(
                from_id=str(_require(raw, "from", where)),
                to_id=str(_require(raw, "to", where)),
                branch_label=raw.get("branch"),
            )
        )

    return WorkflowGraph(nodes=nodes, edges=edges)


def load_graph(path: str | Path) -> WorkflowGraph:
    path = Path(path)
    if not path.is_file():
        raise GraphDefinitionError(f"graph file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphDefinitionError(f"{path}: not valid JSON ({exc})") from exc
    return parse_graph(data, source=str(path))


def dump_graph(graph: WorkflowGraph) -> dict[str, Any]:
    nodes = []
    for n in graph.nodes:
        entry: dict[str, Any] = {"id": n.id, "kind": n.kind.value, "handler": n.handler_key}
        if n.policy is not FailurePolicy.STRICT:
            entry["policy"] = n.policy.value
        if n.run_on_degraded:
            entry["run_on_degraded"] = True
        nodes.append(entry)
    edges = []
    for e in graph.edges:
        entry = {"from": e.from_id, "to": e.to_id}
        if e.branch_label is not None:
            entry["branch"] = e.branch_label
        edges.append(entry)
    return {"nodes": nodes, "edges": edges}
