"""Tree clocks and vector clocks over concurrent execution traces."""

from .trace import Event, Trace, TraceParseError, parse_trace, serialize_trace, validate_trace
from .vclock import ClockContractError, Epoch, VectorClock, WorkCounter, vt_join, vt_leq
from .treeclock import TreeClock, pruning_violations
from .analyses import (
    HB,
    MAZ,
    ORDERS,
    SHB,
    AnalysisRun,
    Engine,
    RaceReport,
    run_analysis,
    run_hb,
    run_maz,
    run_shb,
    race_event_indices,
    unordered_conflicting_pairs,
)
from .metrics import CSV_COLUMNS, MetricsRecord, collect, vc_work, verify_bounds, vtwork
from .tracegen import PATTERNS, STAR_STYLES, GenSpec, SplitMix64, generate

__all__ = [
    "Event",
    "Trace",
    "TraceParseError",
    "parse_trace",
    "serialize_trace",
    "validate_trace",
    "ClockContractError",
    "Epoch",
    "VectorClock",
    "WorkCounter",
    "vt_join",
    "vt_leq",
    "TreeClock",
    "pruning_violations",
    "HB",
    "SHB",
    "MAZ",
    "ORDERS",
    "AnalysisRun",
    "Engine",
    "RaceReport",
    "run_analysis",
    "run_hb",
    "run_shb",
    "run_maz",
    "race_event_indices",
    "unordered_conflicting_pairs",
    "CSV_COLUMNS",
    "MetricsRecord",
    "collect",
    "vc_work",
    "verify_bounds",
    "vtwork",
    "PATTERNS",
    "STAR_STYLES",
    "GenSpec",
    "SplitMix64",
    "generate",
]
