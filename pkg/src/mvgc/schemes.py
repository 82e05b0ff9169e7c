"""Pluggable reclamation schemes deciding when superseded versions unlink.

Four schemes share one hook surface:

  ebr    epoch-based: retire on overwrite, splice whole bags once the epoch
         has advanced twice past them; cheap, but a stalled epoch retains
         every intermediate version.
  steam  compact the updated list on every overwrite against a cached
         announcement scan refreshed at a fixed cadence.
  dlrt   range tracker over doubly-linked lists; expired versions are
         spliced individually by node handle.
  slrt   range tracker over singly-linked lists; expired (cell, interval)
         triplets trigger whole-list compaction.

Unlinked versions stay readable by in-flight traversals; storage reuse is
the host garbage collector's job once nothing references them.
"""

from __future__ import annotations

from typing import Any, Iterable, List, Optional

from .atomics import AtomicRef
from .cells import VersionCell, consistent_scan_and_head
from .tracker import DeprecatedItem, RangeTracker

EBR_ADVANCE_EVERY = 128
STEAM_SCAN_CADENCE_S = 0.001


class Scheme:
    """Hook surface; concrete schemes override what they use."""

    kind = "none"
    uses_pdl = False

    def __init__(self, runtime):
        self.runtime = runtime

    def on_op_begin(self, worker) -> None:
        pass

    def on_op_end(self, worker) -> None:
        pass

    def on_overwrite(self, worker, cell: VersionCell, old, new) -> None:
        pass

    def drain(self, worker, cells: Iterable[VersionCell]) -> None:
        """Quiescent full drain; test/bench support, not a hot path."""

    def retained_items(self) -> int:
        return 0

    def epoch_lag(self) -> int:
        return 0


class NullScheme(Scheme):
    """No reclamation at all; used for raw-cell tests."""


class EbrScheme(Scheme):
    """Epoch-based reclamation adapted to version lists.

    Operations pin the current epoch while they run. Overwritten versions
    retire into the worker's current-epoch bag; once the global epoch has
    moved two past a bag, each retired version is spliced out by a bounded
    head-traversal. A per-cell busy flag keeps at most one splicer in a cell
    at a time (losers requeue their item), which rules out the crossover
    races that concurrent left-CASes could otherwise cause.
    """

    kind = "ebr"

    def __init__(self, runtime, advance_every: int = EBR_ADVANCE_EVERY):
        super().__init__(runtime)
        self.epoch = AtomicRef(0)
        self.advance_every = advance_every
        self.pins: List[Optional[int]] = [None] * runtime.participants
        self.bags: List[dict] = [dict() for _ in range(runtime.participants)]

    def on_op_begin(self, worker) -> None:
        # Validated pin (same shape as the announce protocol): an in-flight
        # advance may have scanned this slot before the write landed, so the
        # pin only counts once the epoch is re-read unchanged. Guarantees the
        # epoch moves at most one past a pinned value.
        while True:
            e = self.epoch.get()
            self.pins[worker.slot] = e
            if self.epoch.get() == e:
                return

    def on_op_end(self, worker) -> None:
        self.pins[worker.slot] = None

    def on_overwrite(self, worker, cell, old, new) -> None:
        bag = self.bags[worker.slot]
        bag.setdefault(self.epoch.get(), []).append((cell, old))
        if worker.ops % self.advance_every == 0:
            self.try_advance()
            self._collect(worker.slot)

    def try_advance(self) -> bool:
        e = self.epoch.get()
        for pin in self.pins:
            if pin is not None and pin < e:
                return False
        return self.epoch.compare_and_swap(e, e + 1)

    def _collect(self, slot: int) -> None:
        e = self.epoch.get()
        bag = self.bags[slot]
        ripe = [be for be in bag if be <= e - 2]
        for be in ripe:
            for cell, node in bag.pop(be):
                self._splice(slot, cell, node)

    def _splice(self, slot: int, cell: VersionCell, node) -> None:
        if not cell.reclaim_busy.compare_and_swap(False, True):
            # Another worker is splicing this cell; try again next epoch.
            bag = self.bags[slot]
            bag.setdefault(self.epoch.get(), []).append((cell, node))
            return
        try:
            sentinel = cell.list.sentinel
            cur = cell.list.head.get()
            while cur is not sentinel:
                nxt = cur.left.get()
                if nxt is node:
                    cur.left.compare_and_swap(node, node.left.get())
                    return
                cur = nxt
        finally:
            cell.reclaim_busy.set(False)

    def epoch_lag(self) -> int:
        e = self.epoch.get()
        oldest = None
        for bag in self.bags:
            for be, items in bag.items():
                if items and (oldest is None or be < oldest):
                    oldest = be
        return 0 if oldest is None else e - oldest

    def drain(self, worker, cells) -> None:
        for slot in range(self.runtime.participants):
            self.pins[slot] = None
        for _ in range(2):
            self.try_advance()
        for slot in range(self.runtime.participants):
            self._collect(slot)

    def retained_items(self) -> int:
        return sum(len(items) for bag in self.bags for items in bag.values())


class SteamLfScheme(Scheme):
    """Compact the overwritten list immediately, against a cached scan."""

    kind = "steam"

    def __init__(self, runtime, scan_cadence_s: float = STEAM_SCAN_CADENCE_S):
        super().__init__(runtime)
        self.scan_cadence_s = scan_cadence_s

    def on_overwrite(self, worker, cell, old, new) -> None:
        scan_cell = self.runtime.scan_cell
        if scan_cell.installed().age() > self.scan_cadence_s:
            scan_cell.scan_announce()
        scan, head = consistent_scan_and_head(scan_cell, cell)
        cell.list.compact(scan.A, scan.t, head, worker.compact_stats)

    def drain(self, worker, cells) -> None:
        # Dusty corners: untouched lists keep stale versions until their next
        # overwrite, so the drain overwrites every multi-version cell once.
        self.runtime.scan_cell.scan_announce()
        for cell in cells:
            if len(cell.list.reachable_nodes()) > 1:
                cur = cell.peek()
                cell.cas(worker, cur, cur)


class DlRtScheme(Scheme):
    """Range tracking over PDL lists; expired versions removed by handle."""

    kind = "dlrt"
    uses_pdl = True

    def __init__(self, runtime, batch_threshold: Optional[int] = None):
        super().__init__(runtime)
        self.tracker = RangeTracker(runtime.scan_cell, runtime.participants,
                                    batch_threshold)

    def on_overwrite(self, worker, cell, old, new) -> None:
        item = DeprecatedItem((cell, old), old.ts, new.ts)
        self._remove_expired(worker, self.tracker.deprecate(worker, item))

    def _remove_expired(self, worker, expired) -> None:
        for item in expired:
            cell, node = item.handle
            cell.list.remove(node, worker.remove_stats)

    def drain(self, worker, cells) -> None:
        self._remove_expired(worker, self.tracker.flush_all(worker))

    def retained_items(self) -> int:
        return self.tracker.retained_count()


class SlRtScheme(Scheme):
    """Range tracking over SSL lists; expired triplets trigger compaction."""

    kind = "slrt"

    def __init__(self, runtime, batch_threshold: Optional[int] = None):
        super().__init__(runtime)
        self.tracker = RangeTracker(runtime.scan_cell, runtime.participants,
                                    batch_threshold)

    def on_overwrite(self, worker, cell, old, new) -> None:
        item = DeprecatedItem(cell, old.ts, new.ts)
        self._compact_expired(worker, self.tracker.deprecate(worker, item))

    def _compact_expired(self, worker, expired) -> None:
        # A cell may be deprecated once per overwrite; compact each only once.
        seen = set()
        for item in expired:
            cell = item.handle
            if id(cell) in seen:
                continue
            seen.add(id(cell))
            scan, head = consistent_scan_and_head(self.runtime.scan_cell, cell)
            cell.list.compact(scan.A, scan.t, head, worker.compact_stats)

    def drain(self, worker, cells) -> None:
        self._compact_expired(worker, self.tracker.flush_all(worker))

    def retained_items(self) -> int:
        return self.tracker.retained_count()


SCHEME_KINDS = ("ebr", "steam", "dlrt", "slrt")


def make_scheme(kind: str, runtime, **options) -> Scheme:
    if kind == "ebr":
        return EbrScheme(runtime, **options)
    if kind == "steam":
        return SteamLfScheme(runtime, **options)
    if kind == "dlrt":
        return DlRtScheme(runtime, **options)
    if kind == "slrt":
        return SlRtScheme(runtime, **options)
    if kind == "none":
        return NullScheme(runtime)
    raise ValueError(f"unknown scheme kind: {kind!r}")
