"""Core workflow-graph and run-state types.

A workflow is a directed acyclic graph of typed nodes. Each run owns a
RunContext that accumulates node statuses, output artifacts, and an ordered
trace of every state transition. All RunContext mutation goes through its
methods, which serialize writes behind a single lock so worker threads can
report completions safely.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Mapping, Optional

from diligence.errors import DiligenceError


class NodeKind(Enum):
    TRIGGER = "Trigger"
    TRANSFORM = "Transform"
    AGENT = "Agent"
    FETCH = "Fetch"
    ROUTER = "Router"
    RENDER = "Render"
    DELIVER = "Deliver"


class FailurePolicy(Enum):
    """What a node's failure does to the rest of the run.

    STRICT: the run fails and every transitive dependent is skipped.
    DEGRADE: the node is Failed but the run continues; dependents that cannot
    fire are skipped with a degradation cause, and dependents flagged
    ``run_on_degraded`` still execute with whatever inputs survived.
    """

    STRICT = "strict"
    DEGRADE = "degrade"


class NodeState(Enum):
    PENDING = "Pending"
    READY = "Ready"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"
    SKIPPED = "Skipped"


_LEGAL_TRANSITIONS: frozenset[tuple[NodeState, NodeState]] = frozenset(
    {
        (NodeState.PENDING, NodeState.READY),
        (NodeState.READY, NodeState.RUNNING),
        (NodeState.RUNNING, NodeState.SUCCEEDED),
        (NodeState.RUNNING, NodeState.FAILED),
        (NodeState.PENDING, NodeState.SKIPPED),
    }
)

TERMINAL_STATES: frozenset[NodeState] = frozenset(
    {NodeState.SUCCEEDED, NodeState.FAILED, NodeState.SKIPPED}
)


@dataclass(frozen=True)
class NodeSpec:
    """One processing node.

    ``run_on_degraded`` opts the node into executing even when no predecessor
    succeeded, provided the shortfall was caused by a degrade-policy failure
    upstream (this is how the financial-fallback join observes a dead registry
    branch instead of being skipped along with it).
    """

    id: str
    kind: NodeKind
    handler_key: str
    policy: FailurePolicy = FailurePolicy.STRICT
    run_on_degraded: bool = False


@dataclass(frozen=True)
class EdgeSpec:
    from_id: str
    to_id: str
    branch_label: Optional[str] = None


@dataclass
class WorkflowGraph:
    nodes: list[NodeSpec]
    edges: list[EdgeSpec]

    def __post_init__(self) -> None:
        self._by_id: dict[str, NodeSpec] = {n.id: n for n in self.nodes}
        self._succ: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        self._pred: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        self._out_edges: dict[str, list[EdgeSpec]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            if e.from_id in self._succ and e.to_id in self._pred:
                self._succ[e.from_id].append(e.to_id)
                self._pred[e.to_id].append(e.from_id)
                self._out_edges[e.from_id].append(e)

    def node(self, node_id: str) -> NodeSpec:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise DiligenceError(f"unknown node id: {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def successors(self, node_id: str) -> list[str]:
        return list(self._succ.get(node_id, []))

    def predecessors(self, node_id: str) -> list[str]:
        return list(self._pred.get(node_id, []))

    def out_edges(self, node_id: str) -> list[EdgeSpec]:
        return list(self._out_edges.get(node_id, []))

    def trigger_ids(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind is NodeKind.TRIGGER]

    def trigger_id(self) -> str:
        triggers = self.trigger_ids()
        if len(triggers) != 1:
            raise DiligenceError(
                f"graph must have exactly one Trigger node, found {len(triggers)}"
            )
        return triggers[0]

    def descendants(self, node_id: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self._succ.get(node_id, []))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self._succ.get(cur, []))
        return seen

    def ancestors(self, node_id: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self._pred.get(node_id, []))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self._pred.get(cur, []))
        return seen


@dataclass
class NodeStatus:
    state: NodeState = NodeState.PENDING
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class TraceEvent:
    run_id: str
    node_id: str
    transition: str
    t: float


@dataclass(frozen=True)
class NodeInputs:
    """Immutable view handed to a node handler.

    ``artifacts`` holds the outputs of every ancestor that had succeeded when
    the node was dispatched, keyed by node id; ancestors that were skipped or
    failed are simply absent. Handlers must not mutate anything they receive.
    """

    node_id: str
    run_id: str
    trigger_payload: Any
    artifacts: Mapping[str, Any]
    annotate: Callable[[str], None]

    def require(self, node_id: str) -> Any:
        from diligence.errors import MissingArtifactError

        if node_id not in self.artifacts:
            raise MissingArtifactError(
                f"node {self.node_id!r} requires artifact from {node_id!r}, "
                f"which is not present in this run"
            )
        return self.artifacts[node_id]


class RunContext:
    """Per-run state: statuses, artifacts, routing decisions, and trace.

    Writes are serialized through ``_lock``; worker threads call the mutator
    methods, never the underlying dicts. Artifacts are written exactly once,
    on the owning node's Succeeded transition.
    """

    def __init__(self, run_id: str, graph: WorkflowGraph, trigger_payload: Any = None):
        self.run_id = run_id
        self.graph = graph
        self.trigger_payload = trigger_payload
        self.artifacts: dict[str, Any] = {}
        self.statuses: dict[str, NodeStatus] = {n.id: NodeStatus() for n in graph.nodes}
        self.trace: list[TraceEvent] = []
        self.routes: dict[str, str] = {}
        self.degrade_tainted: set[str] = set()
        self.run_failed: bool = False
        self.failure_reason: Optional[str] = None
        self._lock = threading.RLock()

    # -- reading ---------------------------------------------------------

    @property
    def lock(self) -> threading.RLock:
        return self._lock

    def state_of(self, node_id: str) -> NodeState:
        return self.statuses[node_id].state

    def counts(self) -> dict[NodeState, int]:
        out: dict[NodeState, int] = {s: 0 for s in NodeState}
        for st in self.statuses.values():
            out[st.state] += 1
        return out

    def unfinished(self) -> list[str]:
        return [
            nid
            for nid, st in self.statuses.items()
            if st.state not in TERMINAL_STATES
        ]

    def inputs_view(self, node_id: str) -> Mapping[str, Any]:
        """Artifacts of ancestors that have succeeded so far, as a frozen map."""
        with self._lock:
            anc = self.graph.ancestors(node_id)
            return MappingProxyType(
                {nid: self.artifacts[nid] for nid in anc if nid in self.artifacts}
            )

    def snapshot_statuses(self) -> dict[str, NodeStatus]:
        """Consistent point-in-time copy of every node status."""
        with self._lock:
            return {
                nid: NodeStatus(st.state, st.started_at, st.finished_at, st.error)
                for nid, st in self.statuses.items()
            }

    def trace_lines(self) -> list[dict[str, Any]]:
        with self._lock:
            return [
                {"run_id": ev.run_id, "node_id": ev.node_id, "transition": ev.transition, "t": ev.t}
                for ev in self.trace
            ]

    # -- writing ---------------------------------------------------------

    def _record(self, node_id: str, transition: str) -> None:
        self.trace.append(
            TraceEvent(self.run_id, node_id, transition, time.monotonic())
        )

    def _set_state(self, node_id: str, new: NodeState) -> None:
        status = self.statuses[node_id]
        if (status.state, new) not in _LEGAL_TRANSITIONS:
            raise DiligenceError(
                f"illegal transition for node {node_id!r}: "
                f"{status.state.value} -> {new.value}"
            )
        status.state = new
        self._record(node_id, new.value)

    def annotate(self, node_id: str, note: str) -> None:
        """Append an audit note to the trace without changing state."""
        with self._lock:
            self._record(node_id, f"audit:{note}")

    def mark_ready(self, node_id: str) -> None:
        with self._lock:
            self._set_state(node_id, NodeState.READY)

    def mark_running(self, node_id: str) -> None:
        with self._lock:
            self._set_state(node_id, NodeState.RUNNING)

    def mark_started(self, node_id: str, started_at: float) -> None:
        with self._lock:
            self.statuses[node_id].started_at = started_at

    def mark_succeeded(self, node_id: str, artifact: Any, finished_at: float) -> None:
        with self._lock:
            if node_id in self.artifacts:
                raise DiligenceError(f"artifact already recorded for node {node_id!r}")
            self.statuses[node_id].finished_at = finished_at
            self._set_state(node_id, NodeState.SUCCEEDED)
            self.artifacts[node_id] = artifact

    def mark_failed(self, node_id: str, error: str, finished_at: float) -> None:
        with self._lock:
            st = self.statuses[node_id]
            st.finished_at = finished_at
            st.error = error
            self._set_state(node_id, NodeState.FAILED)

    def mark_skipped(self, node_id: str, cause: str, *, tainted: bool = False) -> None:
        with self._lock:
            self.statuses[node_id].error = cause
            self._set_state(node_id, NodeState.SKIPPED)
            if tainted:
                self.degrade_tainted.add(node_id)

    def mark_run_failed(self, reason: str) -> None:
        with self._lock:
            self.run_failed = True
            if self.failure_reason is None:
                self.failure_reason = reason
