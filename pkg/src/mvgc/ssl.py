"""Singly-linked version list with append, search, and whole-list compaction.

Nodes are appended at the head with non-decreasing timestamps; the permanent
sentinel (ts = NEG_INF) anchors the tail. There is no per-node remove:
``compact`` merge-walks the list against a sorted announcement array and
splices out every node that is not needed with respect to that scan.

A node x is needed w.r.t. (A, t) iff
  (1) x.ts > t, or
  (2) x is the last appended node with ts <= t, or
  (3) x is the last appended node with ts <= A[i] for some i.

Safety of concurrent compacts relies on all (A, t) arguments being taken
from the installed-scan cell, whose CAS installs give the scans a total
order.
"""

from __future__ import annotations

from typing import Any, Iterable, List, Optional, Sequence

from .atomics import AtomicRef, run_steps
from .timestamps import NEG_INF, PAD


class SslNode:
    __slots__ = ("ts", "val", "left", "seq")

    def __init__(self, ts: int, val: Any):
        self.ts = ts
        self.val = val
        self.left = AtomicRef(None)
        self.seq = -1

    def __repr__(self):
        return f"SslNode(ts={self.ts}, val={self.val!r}, seq={self.seq})"


class CompactStats:
    """Nodes visited per compact call, for the traversal-cost metric."""

    __slots__ = ("compacts", "visited_total")

    def __init__(self):
        self.compacts = 0
        self.visited_total = 0

    def record(self, visited: int) -> None:
        self.compacts += 1
        self.visited_total += visited

    def merge(self, other: "CompactStats") -> None:
        self.compacts += other.compacts
        self.visited_total += other.visited_total

    def average_traversal(self) -> float:
        return self.visited_total / self.compacts if self.compacts else 0.0


class SslList:
    __slots__ = ("sentinel", "head", "_next_seq", "on_append")

    def __init__(self, sentinel_val: Any = None):
        self.sentinel = SslNode(NEG_INF, sentinel_val)
        self.sentinel.seq = 0
        self.head = AtomicRef(self.sentinel)
        self._next_seq = 1
        self.on_append = None

    def peek_head(self) -> Any:
        return self.head.get().val

    def head_node(self) -> SslNode:
        return self.head.get()

    def search(self, k: int) -> Any:
        """Payload of the last appended node with ts <= k, as of the head
        read. The caller must keep k announced while the search runs."""
        x = self.head.get()
        while x.ts > k:
            x = x.left.get()
        return x.val

    def try_append(self, x: SslNode, y: SslNode) -> bool:
        return run_steps(self._try_append_steps(x, y))

    def compact(self, A: Sequence[int], t: int, h: SslNode,
                stats: Optional[CompactStats] = None) -> None:
        return run_steps(self._compact_steps(A, t, h, stats))

    def _publish(self, y: SslNode) -> None:
        y.seq = self._next_seq
        self._next_seq += 1
        if self.on_append is not None:
            self.on_append(y)

    def _try_append_steps(self, x: SslNode, y: SslNode):
        y.left.set(x)
        yield "cas-head"
        return self.head.compare_and_swap(x, y, on_success=lambda: self._publish(y))

    def _compact_steps(self, A: Sequence[int], t: int, h: SslNode,
                       stats: Optional[CompactStats] = None):
        """Splice every node appended before h that is unneeded w.r.t.
        (A, t). A must be ascending; (A, t, h) must come from a consistent
        (installed scan, head) snapshot. Wait-free.

        Walks the list and A newest-to-oldest like a sorted merge. When the
        node after cur is unneeded, one CAS splices the whole unneeded block;
        a losing CAS retries until the link already reaches at or below the
        needed target. Each yield announces the access the next resume does.
        """
        padded = [PAD]
        padded.extend(A)
        i = len(padded) - 1
        cur = h
        visited = 0  # link dereferences = nodes traversed
        while cur is not self.sentinel:
            visited += 1
            yield "read-next"
            nxt = cur.left.get()
            if cur.ts > t:
                cur = nxt
                continue
            while padded[i] >= cur.ts:
                i -= 1
            if padded[i] >= nxt.ts:
                cur = nxt
                continue
            visited += 1
            yield "read-new-next"
            new_next = nxt.left.get()
            while padded[i] < new_next.ts:
                visited += 1
                yield "read-advance-new-next"
                new_next = new_next.left.get()
            while True:
                yield "cas-splice"
                if cur.left.compare_and_swap(nxt, new_next):
                    break
                yield "read-reread-next"
                nxt = cur.left.get()
                if nxt.ts <= new_next.ts:
                    break
            visited += 1
            yield "read-cur-advance"
            cur = cur.left.get()
        if stats is not None:
            stats.record(visited)

    def reachable_nodes(self) -> list:
        """Nodes reachable from head, newest first, sentinel excluded."""
        out = []
        x = self.head.get()
        while x is not self.sentinel:
            out.append(x)
            x = x.left.get()
        return out


def needed_indices(history_ts: Sequence[int], A: Iterable[int], t: int) -> set:
    """Indices into an append history (oldest first) of the needed nodes.

    Direct evaluation of the three needed clauses; shared by the compaction
    oracle and the needed predicate.
    """
    needed = set()
    thresholds = set(A)
    thresholds.add(t)
    for idx, ts in enumerate(history_ts):
        if ts > t:
            needed.add(idx)
    for cutoff in thresholds:
        best = None
        for idx, ts in enumerate(history_ts):
            if ts <= cutoff:
                best = idx
        if best is not None:
            needed.add(best)
    return needed


def needed_predicate(history_ts: Sequence[int], A: Iterable[int], t: int,
                     index: int) -> bool:
    """True iff the node at append position ``index`` is needed w.r.t (A, t)."""
    return index in needed_indices(history_ts, A, t)
