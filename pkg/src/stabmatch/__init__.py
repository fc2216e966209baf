"""Deterministic simulator and verifier for a self-stabilizing maximal
matching protocol under sequential, synchronous and distributed daemons."""

from .graph import Graph, GraphFormatError, check_distance2_unique, generate, read_graph, write_graph
from .protocol import (
    Configuration,
    ConfigFormatError,
    PredicateClass,
    ProcessState,
    Rule,
    RuleSemantics,
    STANDARD,
    classify,
    command_target,
    enabled_rule,
    enabled_rules,
    normalize,
    parse_configuration,
    pr_married,
    random_configuration,
)
from .scheduler import (
    DaemonPolicy,
    Move,
    SchedulerState,
    StepRecord,
    Trace,
    TraceCounters,
    TraceFormatError,
    apply_step,
    count_rounds,
    default_step_cap,
    parse_trace,
    run,
    select,
    trace_counters,
    trace_from_schedule,
    write_trace,
)
from .verifier import (
    AuditReport,
    CorruptTraceError,
    SearchResult,
    audit_trace,
    check_maximal,
    exhaustive_search,
    extract_matching,
    is_stable,
    witness_trace,
)

__version__ = "0.1.0"
