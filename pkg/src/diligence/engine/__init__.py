"""Workflow engine: typed DAG model, validation, scheduling, concurrent execution."""

from diligence.engine.model import (
    EdgeSpec,
    FailurePolicy,
    NodeInputs,
    NodeKind,
    NodeSpec,
    NodeState,
    NodeStatus,
    RunContext,
    TraceEvent,
    WorkflowGraph,
)
from diligence.engine.execute import execute_run
from diligence.engine.graphfile import dump_graph, load_graph, parse_graph
from diligence.engine.schedule import apply_route, ready_set
from diligence.engine.validate import validate_graph

__all__ = [
    "EdgeSpec",
    "FailurePolicy",
    "NodeInputs",
    "NodeKind",
    "NodeSpec",
    "NodeState",
    "NodeStatus",
    "RunContext",
    "TraceEvent",
    "WorkflowGraph",
    "execute_run",
    "dump_graph",
    "load_graph",
    "parse_graph",
    "apply_route",
    "ready_set",
    "validate_graph",
]
