"""Range tracker: maps deprecated (item, interval) records to reclaim verdicts.

Workers hand superseded versions to the tracker tagged with the half-open
timestamp interval [lo, hi) during which they were current. An item expires
once no announced timestamp can lie in its interval; expired items are handed
back to the caller for unlinking.

Items accumulate in a per-worker batch; when a batch reaches the threshold it
is pushed on a shared FIFO of batches, a few batches are popped, and the
popped items are partitioned against a fresh announcement scan. Retained
items are merged and re-enqueued, so every deprecated item is always in
exactly one place: a local batch, the queue, or already returned.
"""

from __future__ import annotations

from bisect import bisect_left
from collections import deque
from typing import Any, List, Optional

from .atomics import AtomicCounter
from .timestamps import AnnScan, AnnScanCell


class DeprecatedItem:
    """An opaque handle plus its [lo, hi) interval; hi was at most the global
    clock when the item was deprecated."""

    __slots__ = ("handle", "lo", "hi")

    def __init__(self, handle: Any, lo: int, hi: int):
        if not 1 <= lo <= hi:
            raise ValueError(f"bad interval [{lo}, {hi})")
        self.handle = handle
        self.lo = lo
        self.hi = hi

    def __repr__(self):
        return f"DeprecatedItem([{self.lo},{self.hi}))"


def item_expired(item: DeprecatedItem, scan: AnnScan) -> bool:
    """True iff no timestamp the scan accounts for lies in [lo, hi).

    Announcements not in scan.A are >= scan.t, so the check is sound only
    when hi <= scan.t; otherwise the item is conservatively retained.
    """
    if item.hi > scan.t:
        return False
    j = bisect_left(scan.A, item.lo)
    return not (j < len(scan.A) and scan.A[j] < item.hi)


class RangeTracker:
    """Per-worker batching, shared FIFO, and scan-based expiry.

    The pop cadence strictly alternates 1,2,1,2 (an average of 1.5 batches
    per push); the batch threshold defaults to 4x the participant count.
    """

    def __init__(self, scan_cell: AnnScanCell, participants: int,
                 batch_threshold: Optional[int] = None):
        self.scan_cell = scan_cell
        self.batch_threshold = batch_threshold or 4 * participants
        self._locals: List[list] = [[] for _ in range(participants)]
        self._queue = deque()
        self._alternator = AtomicCounter()

    def deprecate(self, worker, item: DeprecatedItem) -> List[DeprecatedItem]:
        """Record a superseded version; returns any items that expired.

        Below the batch threshold this is a local append. At the threshold
        the batch is flushed: already-expired items are dropped against the
        installed scan before the push, then popped batches are partitioned
        against a fresh scan.
        """
        batch = self._locals[worker.slot]
        batch.append(item)
        if len(batch) < self.batch_threshold:
            return []
        self._locals[worker.slot] = []
        return self._flush(batch)

    def _flush(self, batch: list) -> List[DeprecatedItem]:
        expired: List[DeprecatedItem] = []
        installed = self.scan_cell.installed()
        keep = []
        for it in batch:
            (expired if item_expired(it, installed) else keep).append(it)
        if keep:
            keep.sort(key=lambda it: it.hi, reverse=True)
            self._queue.append(keep)
        pops = 1 if self._alternator.fetch_inc() % 2 == 0 else 2
        popped = []
        for _ in range(pops):
            try:
                popped.append(self._queue.popleft())
            except IndexError:
                break
        scan = self.scan_cell.scan_announce()
        retained: List[DeprecatedItem] = []
        for b in popped:
            for it in b:
                (expired if item_expired(it, scan) else retained).append(it)
        if retained:
            retained.sort(key=lambda it: it.hi, reverse=True)
            self._queue.append(retained)
        return expired

    def flush_all(self, worker) -> List[DeprecatedItem]:
        """Quiescent drain: push everything, empty the queue, partition
        against one fresh scan. Requires no concurrent deprecate calls."""
        for slot, batch in enumerate(self._locals):
            if batch:
                self._locals[slot] = []
                self._queue.append(batch)
        popped = []
        while True:
            try:
                popped.append(self._queue.popleft())
            except IndexError:
                break
        scan = self.scan_cell.scan_announce()
        expired: List[DeprecatedItem] = []
        retained: List[DeprecatedItem] = []
        for b in popped:
            for it in b:
                (expired if item_expired(it, scan) else retained).append(it)
        if retained:
            retained.sort(key=lambda it: it.hi, reverse=True)
            self._queue.append(retained)
        return expired

    def retained_count(self) -> int:
        """Items still held (locals + queue); meaningful at quiescence."""
        n = sum(len(b) for b in self._locals)
        n += sum(len(b) for b in list(self._queue))
        return n
