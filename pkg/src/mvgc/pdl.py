"""Doubly-linked version list with O(1) right-end append and handle removal.

The list is sorted by timestamp, appended at the right end, anchored by a
permanent sentinel (ts = NEG_INF) at the left end. ``head`` points at the
most recently appended node. A remove marks its node and splices the nearest
unmarked neighbours around it; it never helps other removes beyond that, so
left/right pointers may be transiently inconsistent while traversals remain
correct.

Concurrency-sensitive operations are implemented as step generators (one
yield per shared-memory step) so the interleaving explorer can schedule them;
the public methods drive the generators to completion.
"""

from __future__ import annotations

from typing import Any, Optional

from .atomics import AtomicRef, run_steps
from .timestamps import NEG_INF


class PdlNode:
    """List node; ``ts``/``val`` are fixed at stamping, ``mark`` only ever
    flips false -> true, ``right`` is CAS-initialised from None exactly once.
    ``seq`` is the append order index, assigned under the head-CAS."""

    __slots__ = ("ts", "val", "mark", "left", "right", "seq")

    def __init__(self, ts: int, val: Any):
        self.ts = ts
        self.val = val
        self.mark = False
        self.left = AtomicRef(None)
        self.right = AtomicRef(None)
        self.seq = -1

    def __repr__(self):
        return f"PdlNode(ts={self.ts}, val={self.val!r}, seq={self.seq})"


class RemoveStats:
    """Accumulates the marked-adjacent chain length c per remove call."""

    __slots__ = ("removes", "chain_total")

    def __init__(self):
        self.removes = 0
        self.chain_total = 0

    def record(self, chain: int) -> None:
        self.removes += 1
        self.chain_total += chain

    def merge(self, other: "RemoveStats") -> None:
        self.removes += other.removes
        self.chain_total += other.chain_total

    def average_chain(self) -> float:
        return self.chain_total / self.removes if self.removes else 0.0


class PdlList:
    """The list object: a head pointer plus the permanent sentinel."""

    __slots__ = ("sentinel", "head", "_next_seq", "on_append")

    def __init__(self, sentinel_val: Any = None):
        self.sentinel = PdlNode(NEG_INF, sentinel_val)
        self.sentinel.seq = 0
        self.head = AtomicRef(self.sentinel)
        self._next_seq = 1
        self.on_append = None  # optional hook, called under the head-CAS

    def peek_head(self) -> Any:
        return self.head.get().val

    def head_node(self) -> PdlNode:
        return self.head.get()

    def search(self, k: int) -> Any:
        """Payload of the last appended node with ts <= k (wait-free)."""
        x = self.head.get()
        while x.ts > k:
            x = x.left.get()
        return x.val

    def try_append(self, x: PdlNode, y: PdlNode) -> bool:
        return run_steps(self._try_append_steps(x, y))

    def remove(self, x: PdlNode, stats: Optional[RemoveStats] = None) -> None:
        return run_steps(self._remove_steps(x, stats))

    def _publish(self, y: PdlNode) -> None:
        # Runs inside the head-CAS critical section so seq matches list order.
        y.seq = self._next_seq
        self._next_seq += 1
        if self.on_append is not None:
            self.on_append(y)

    def _try_append_steps(self, x: PdlNode, y: PdlNode):
        """Append fresh node y after x, which was read from head.

        Requires y.ts >= x.ts and y never appended before. Returns False iff
        a concurrent append won the head-CAS, in which case the list is
        unchanged by this call apart from helping. Each yield announces the
        shared-memory access the next resume performs.
        """
        yield "read-left"
        w = x.left.get()
        if w is not None:
            # Help a predecessor append that paused between its head-CAS and
            # setting x's right pointer.
            yield "cas-help-right"
            w.right.compare_and_swap(None, x)
        y.left.set(x)  # y is private until the head-CAS publishes it
        yield "cas-head"
        ok = self.head.compare_and_swap(x, y, on_success=lambda: self._publish(y))
        if not ok:
            return False
        yield "cas-set-right"
        x.right.compare_and_swap(None, y)
        return True

    def _remove_steps(self, x: PdlNode, stats: Optional[RemoveStats] = None):
        """Unlink x, which must be appended, not the sentinel, not the
        current head, and removed at most once. Lock-free; the step count is
        O(c) in the length of the marked-adjacent chain around x."""
        yield "write-mark"
        x.mark = True
        yield "read-left"
        left = x.left.get()
        yield "read-right"
        right = x.right.get()
        chain = 1
        while True:
            while True:
                yield "read-scan-left"
                if not left.mark:
                    break
                left = left.left.get()
                chain += 1
            while True:
                yield "read-scan-right"
                if not right.mark:
                    break
                right = right.right.get()
                chain += 1
            yield "read-right-left"
            right_left = right.left.get()
            yield "read-left-right"
            left_right = left.right.get()
            yield "read-revalidate"
            if left.mark or right.mark:
                continue
            yield "cas-left"
            if not right.left.compare_and_swap(right_left, left):
                continue
            yield "cas-right"
            if not left.right.compare_and_swap(left_right, right):
                continue
            break
        if stats is not None:
            stats.record(chain)

    def reachable_nodes(self) -> list:
        """Nodes reachable from head via left links, newest first, sentinel
        excluded. Meaningful at quiescence."""
        out = []
        x = self.head.get()
        while x is not self.sentinel:
            out.append(x)
            x = x.left.get()
        return out
