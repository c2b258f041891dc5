"""Concurrent run loop.

Each tick computes the dispatchable set under the context lock, launches every
member on a worker pool, then sleeps until at least one worker finishes.
Workers report their own completion (success, failure, routing) atomically,
so the next tick always observes a settled picture.

Failure semantics: a strict node failure fails the run and skips every
transitive dependent; a degrade-policy failure taints its dependents instead —
they are skipped with a degradation cause unless flagged ``run_on_degraded``,
in which case they execute with whatever upstream artifacts survived.
"""

from __future__ import annotations

import time
import uuid
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from functools import partial
from typing import Any, Callable, Mapping

from diligence.engine.model import (
    TERMINAL_STATES,
    FailurePolicy,
    NodeInputs,
    NodeKind,
    NodeSpec,
    NodeState,
    RunContext,
    WorkflowGraph,
)
from diligence.engine.schedule import apply_route, ready_set
from diligence.engine.validate import validate_graph
from diligence.errors import GraphDefinitionError, RoutingError, TransportError

Handler = Callable[[NodeInputs], Any]


def _fail_node(
    graph: WorkflowGraph,
    ctx: RunContext,
    node: NodeSpec,
    error: str,
    finished_at: float,
    *,
    force_strict: bool = False,
) -> None:
    with ctx.lock:
        ctx.mark_failed(node.id, error, finished_at)
        strict = force_strict or node.policy is FailurePolicy.STRICT
        if strict:
            ctx.mark_run_failed(f"node {node.id!r} failed: {error}")
            for dep in graph.descendants(node.id):
                if ctx.state_of(dep) is NodeState.PENDING:
                    ctx.mark_skipped(dep, f"upstream failure: {node.id}")
        else:
            ctx.degrade_tainted.add(node.id)
            ctx.annotate(node.id, "degraded: run continues without this branch")


def _run_node(
    graph: WorkflowGraph, ctx: RunContext, node: NodeSpec, handler: Handler, inputs: NodeInputs
) -> None:
    """Worker body: execute the handler, then report the outcome atomically."""
    ctx.mark_started(node.id, time.monotonic())
    attempts = 2 if node.kind is NodeKind.FETCH else 1
    result: Any = None
    error: str | None = None
    for attempt in range(1, attempts + 1):
        try:
            result = handler(inputs)
            error = None
            break
        except TransportError as exc:
            error = f"{type(exc).__name__}: {exc}"
            if attempt < attempts:
                ctx.annotate(node.id, f"retry: transport error on attempt {attempt} ({exc})")
        except Exception as exc:  # noqa: BLE001 - handler faults become node failures
            error = f"{type(exc).__name__}: {exc}"
            break
    finished = time.monotonic()

    if error is not None:
        _fail_node(graph, ctx, node, error, finished)
        return

    if node.kind is NodeKind.ROUTER:
        labels = {e.branch_label for e in graph.out_edges(node.id)}
        if not isinstance(result, str) or result not in labels:
            routing = RoutingError(
                f"router {node.id!r} returned {result!r}, which is not a declared "
                f"branch label {sorted(lb for lb in labels if lb is not None)}"
            )
            _fail_node(
                graph, ctx, node, f"RoutingError: {routing}", finished, force_strict=True
            )
            return
        with ctx.lock:
            ctx.mark_succeeded(node.id, result, finished)
            apply_route(node.id, result, graph, ctx)
        return

    ctx.mark_succeeded(node.id, result, finished)


def _dispatch_batch(graph: WorkflowGraph, ctx: RunContext) -> set[str]:
    """Compute what to launch this tick; caller holds the context lock.

    Dead-end pending nodes (all predecessors settled, none succeeded, or a
    degrade failure blocking the join) are skipped here, to a fixpoint, so a
    degraded branch never deadlocks the run.
    """
    trigger = graph.trigger_id()
    while True:
        ready = ready_set(graph, ctx)
        degraded_dispatch: set[str] = set()
        dead: list[tuple[str, str, bool]] = []
        for node in graph.nodes:
            if ctx.state_of(node.id) is not NodeState.PENDING:
                continue
            if node.id in ready or node.id == trigger:
                continue
            preds = graph.predecessors(node.id)
            if not preds:
                continue
            if not all(ctx.state_of(p) in TERMINAL_STATES for p in preds):
                continue
            tainted = sorted(p for p in preds if p in ctx.degrade_tainted)
            if tainted and node.run_on_degraded:
                degraded_dispatch.add(node.id)
            elif tainted:
                dead.append((node.id, f"upstream degraded: {', '.join(tainted)}", True))
            else:
                dead.append((node.id, "no live inputs: every predecessor was skipped", False))
        if dead:
            for node_id, cause, taint in dead:
                ctx.mark_skipped(node_id, cause, tainted=taint)
            continue  # settling skips may unblock or dead-end further nodes
        return ready | degraded_dispatch


def execute_run(
    graph: WorkflowGraph,
    handlers: Mapping[str, Handler],
    trigger_payload: Any,
    *,
    run_id: str | None = None,
    max_workers: int = 8,
    on_context: Callable[[RunContext], None] | None = None,
) -> RunContext:
    """Run the graph to completion and return the final context.

    Raises GraphDefinitionError when the graph is invalid or a handler key is
    unbound; handler exceptions never propagate — they become node failures.
    ``on_context`` is invoked with the fresh context before the first
    dispatch, so callers can observe a run while it executes.
    """
    report = validate_graph(graph)
    if not report.ok:
        report.raise_if_failed(GraphDefinitionError)
    missing = sorted(
        {n.handler_key for n in graph.nodes if n.handler_key not in handlers}
    )
    if missing:
        raise GraphDefinitionError(f"unbound handler keys: {', '.join(missing)}")
    if trigger_payload is None:
        raise GraphDefinitionError("cannot execute: no trigger payload supplied")

    ctx = RunContext(run_id or uuid.uuid4().hex, graph, trigger_payload)
    if on_context is not None:
        on_context(ctx)
    in_flight: dict[Future, str] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        while True:
            with ctx.lock:
                batch = _dispatch_batch(graph, ctx)
                for node_id in sorted(batch):
                    ctx.mark_ready(node_id)
                    ctx.mark_running(node_id)
            for node_id in sorted(batch):
                node = graph.node(node_id)
                inputs = NodeInputs(
                    node_id=node_id,
                    run_id=ctx.run_id,
                    trigger_payload=ctx.trigger_payload,
                    artifacts=ctx.inputs_view(node_id),
                    annotate=partial(ctx.annotate, node_id),
                )
                future = pool.submit(
                    _run_node, graph, ctx, node, handlers[node.handler_key], inputs
                )
                in_flight[future] = node_id
            if not in_flight:
                break
            done, _ = wait(list(in_flight), return_when=FIRST_COMPLETED)
            for future in done:
                in_flight.pop(future)
                future.result()  # engine bugs surface here; handler faults do not

    stalled = ctx.unfinished()
    if stalled:
        ctx.mark_run_failed(
            f"scheduler stalled with unfinished nodes: {', '.join(sorted(stalled))}"
        )
    return ctx
