"""
The pipeline stage graph.

Stages are the nodes of a directed graph; an edge means a run may move from
one stage to the next. Self-loops mark the stages that may repeat (the sketch
check loop and the compile-repair loop). Every stage may end the run.

"""
from networkx import DiGraph

from zk_coder.constants import (
    CODE_GEN,
    COMPILE_LOOP,
    EXTRACT,
    PIPELINE_STAGES,
    RETRIEVE,
    SEMANTIC_CHECK,
    SEMANTIC_REPAIR,
    SKETCH_CHECK_LOOP,
    SKETCH_GEN,
    TERMINAL,
    TEST_GEN,
)


TRANSITIONS = (
    (SKETCH_GEN, SKETCH_CHECK_LOOP),
    (SKETCH_CHECK_LOOP, SKETCH_CHECK_LOOP),
    (SKETCH_CHECK_LOOP, EXTRACT),
    # A sketch that never passes the checker still reaches code generation, without hints.
    (SKETCH_CHECK_LOOP, CODE_GEN),
    (EXTRACT, RETRIEVE),
    (EXTRACT, CODE_GEN),
    (RETRIEVE, CODE_GEN),
    (CODE_GEN, COMPILE_LOOP),
    (CODE_GEN, TEST_GEN),
    (COMPILE_LOOP, COMPILE_LOOP),
    (COMPILE_LOOP, TEST_GEN),
    (TEST_GEN, SEMANTIC_CHECK),
    (SEMANTIC_CHECK, SEMANTIC_REPAIR),
)

# Runs without a sketch stage start at code generation.
ENTRY_STAGES = (SKETCH_GEN, CODE_GEN)


def stage_graph():
    graph = DiGraph()
    graph.add_nodes_from(PIPELINE_STAGES)
    graph.add_edges_from(TRANSITIONS)
    graph.add_edges_from((stage, TERMINAL) for stage in PIPELINE_STAGES if stage != TERMINAL)
    for stage in ENTRY_STAGES:
        graph.nodes[stage]["entry"] = True
    return graph


STAGE_GRAPH = stage_graph()


def entry_stages(graph=STAGE_GRAPH):
    return tuple(node for node, entry in graph.nodes(data="entry") if entry)


def terminal_nodes(graph=STAGE_GRAPH):
    return (
        node
        for node, out_degree in graph.out_degree()
        if out_degree == 0
    )


def can_transition(current, stage, graph=STAGE_GRAPH):
    if current is None:
        return stage in entry_stages(graph)
    return graph.has_edge(current, stage)


def is_valid_path(stages, graph=STAGE_GRAPH):
    """
    True iff `stages` is a walk through the stage graph from an entry stage to
    Terminal, repeating only the stages with a self-loop.

    """
    if not stages or stages[0] not in entry_stages(graph) or stages[-1] not in set(terminal_nodes(graph)):
        return False
    return all(graph.has_edge(a, b) for a, b in zip(stages, stages[1:]))
