"""Concurrent multiversioning workbench.

Version-list data structures (doubly- and singly-linked), a range-tracking
reclamation engine, four pluggable version-reclamation schemes, multiversion
hash map and BST subjects, validation oracles, and a benchmark harness with
an HTTP service facade.
"""

from .atomics import AtomicCounter, AtomicRef, run_steps
from .bench import (
    BenchSession,
    ConfigError,
    RunMetrics,
    WorkloadConfig,
    emit_results,
    run_benchmark,
    run_many,
)
from .cells import VersionCell, consistent_scan_and_head, finalize_stamp
from .oracle import (
    ShadowLog,
    check_all_rtxs,
    check_rtx,
    explore_interleavings,
    needed_set_oracle,
)
from .pdl import PdlList, PdlNode
from .runtime import MvRuntime, RtxHandle, Worker
from .schemes import make_scheme
from .ssl import SslList, SslNode, needed_predicate
from .structures import MvBst, MvHashMap, discover_cells, reachable_stats
from .timestamps import (
    EMPTY,
    NEG_INF,
    PAD,
    TBD,
    AnnouncementBoard,
    AnnScan,
    AnnScanCell,
    GlobalClock,
)
from .tracker import DeprecatedItem, RangeTracker

__all__ = [
    "AtomicCounter", "AtomicRef", "run_steps",
    "BenchSession", "ConfigError", "RunMetrics", "WorkloadConfig",
    "emit_results", "run_benchmark", "run_many",
    "VersionCell", "consistent_scan_and_head", "finalize_stamp",
    "ShadowLog", "check_all_rtxs", "check_rtx", "explore_interleavings",
    "needed_set_oracle",
    "PdlList", "PdlNode",
    "MvRuntime", "RtxHandle", "Worker",
    "make_scheme",
    "SslList", "SslNode", "needed_predicate",
    "MvBst", "MvHashMap", "discover_cells", "reachable_stats",
    "EMPTY", "NEG_INF", "PAD", "TBD",
    "AnnouncementBoard", "AnnScan", "AnnScanCell", "GlobalClock",
    "DeprecatedItem", "RangeTracker",
]
