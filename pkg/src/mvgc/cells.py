"""Versioned CAS cells: a current value plus its version list.

A successful cas appends exactly one version, stamped TBD at append and
finalised by a recorded-once CAS from TBD to a clock read; any observer that
meets a TBD stamp performs the same finalising CAS before using it. Because
appends publish before stamping and the clock is monotone, finalised stamps
are non-decreasing along each list and only the head can ever be TBD.

Every cell is seeded with one real version holding its initial payload, so a
never-updated cell has version-list length one; the sentinel also carries the
initial payload as the fallback for reads preceding every version.
"""

from __future__ import annotations

import threading
from typing import Any, Tuple

from .atomics import AtomicRef, run_steps
from .pdl import PdlList, PdlNode
from .ssl import SslList, SslNode
from .timestamps import TBD

_stamp_lock = threading.Lock()


def finalize_stamp(node, clock) -> int:
    """Resolve a TBD stamp to a clock read, exactly once across all helpers."""
    if node.ts != TBD:
        return node.ts
    v = clock.read()
    with _stamp_lock:
        if node.ts == TBD:
            node.ts = v
    return node.ts


class VersionCell:
    """A CAS object whose superseded values stay readable by timestamp."""

    __slots__ = ("runtime", "initial", "list", "reclaim_busy")

    def __init__(self, runtime, initial: Any):
        self.runtime = runtime
        self.initial = initial
        if runtime.scheme.uses_pdl:
            self.list = PdlList(initial)
        else:
            self.list = SslList(initial)
        self.reclaim_busy = AtomicRef(False)
        first = self._make_node(runtime.clock.read(), initial)
        ok = self.list.try_append(self.list.head_node(), first)
        assert ok
        if runtime.log is not None:
            runtime.log.register_cell(self)
            runtime.log.record_append(self, first)

    def _make_node(self, ts: int, val: Any):
        return PdlNode(ts, val) if isinstance(self.list, PdlList) else SslNode(ts, val)

    def head_node(self):
        """Current head with its stamp finalised (helping if required)."""
        node = self.list.head.get()
        finalize_stamp(node, self.runtime.clock)
        return node

    def peek(self) -> Any:
        return self.head_node().val

    def read_at(self, t: int) -> Any:
        """Payload of the last version with finalised stamp <= t.

        t must come from an rtx that is still announced. The walk starts
        from one finalised head snapshot (re-reading the head could surface
        a newer, still-unstamped node whose TBD marker compares below t) and
        finalises any TBD stamp it meets before comparing.
        """
        node = self.head_node()
        while True:
            if node.ts == TBD:
                finalize_stamp(node, self.runtime.clock)
            if node.ts <= t:
                return node.val
            node = node.left.get()

    def cas(self, worker, expected: Any, new: Any) -> bool:
        return run_steps(self._cas_steps(worker, expected, new))

    def _cas_steps(self, worker, expected: Any, new: Any):
        """Append a version holding ``new`` if the current value is
        ``expected``; False means a lost race or stale expectation and the
        caller retries at the data-structure level. The scheme hook runs in
        the final segment, outside the modeled cell protocol."""
        yield "read-head"
        x = self.list.head.get()
        yield "cas-stamp-old"
        finalize_stamp(x, self.runtime.clock)
        if x.val != expected:
            return False
        y = self._make_node(TBD, new)
        ok = yield from self.list._try_append_steps(x, y)
        if not ok:
            return False
        yield "cas-stamp-new"
        finalize_stamp(y, self.runtime.clock)
        if self.runtime.log is not None:
            self.runtime.log.record_append(self, y)
        self.runtime.scheme.on_overwrite(worker, self, x, y)
        return True


def consistent_scan_and_head(scan_cell, cell: VersionCell) -> Tuple:
    """Snapshot of (installed AnnScan, cell head) usable as compact input.

    Reads the installed scan, the head, then re-checks the scan cell; retries
    until the scan did not change in between, so the pair is consistent.
    """
    while True:
        scan = scan_cell.installed()
        head = cell.head_node()
        if scan_cell.installed() is scan:
            return scan, head
