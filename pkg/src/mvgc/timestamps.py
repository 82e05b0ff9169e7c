"""Global logical clock, per-slot announcement board, and consistent scans.

Timestamps are signed 64-bit logical times. Valid operational timestamps are
>= 1; a handful of reserved encodings below 1 mark special states:

    NEG_INF  sentinel key of the permanent oldest list node
    PAD      front padding of a scan's announcement array
    EMPTY    a free announcement slot
    TBD      a version appended but not yet stamped
"""

from __future__ import annotations

import time
from typing import Iterable

from .atomics import AtomicRef

NEG_INF = -(2 ** 63)
PAD = -1
EMPTY = -2
TBD = -3

BACKOFF_CAP = 1024


class GlobalClock:
    """Monotone logical clock advanced by CAS with adaptive backoff.

    A tick first waits a variable delay; if the clock already advanced it
    uses the incremented value without issuing a CAS. The delay doubles when
    contention is observed and halves after an uncontended CAS.
    """

    def __init__(self, start: int = 1):
        self._value = AtomicRef(start)
        self._backoff = 0

    def read(self) -> int:
        return self._value.get()

    def tick(self) -> int:
        from .atomics import run_steps
        return run_steps(self._tick_steps())

    def _tick_steps(self):
        yield "read-start"
        start = self._value.get()
        for _ in range(self._backoff):
            pass
        yield "read-after-delay"
        cur = self._value.get()
        if cur > start:
            self._backoff = min(BACKOFF_CAP, max(1, self._backoff * 2))
            return cur
        yield "cas-tick"
        if self._value.compare_and_swap(start, start + 1):
            self._backoff //= 2
            return start + 1
        self._backoff = min(BACKOFF_CAP, max(1, self._backoff * 2))
        yield "read-final"
        return self._value.get()


class AnnouncementBoard:
    """Fixed array of announcement slots, one per registered participant.

    Each slot is written only by its owner and read by everyone; slot
    assignment under the GIL makes the per-slot write atomic.
    """

    def __init__(self, participants: int):
        if participants < 1:
            raise ValueError("participants must be >= 1")
        self.participants = participants
        self._slots = [EMPTY] * participants

    def read_slot(self, slot: int) -> int:
        return self._slots[slot]

    def slots_snapshot(self) -> list:
        return [self._slots[i] for i in range(self.participants)]

    def announce(self, slot: int, clock: GlobalClock) -> int:
        """Reserve the current time in ``slot`` (A1-A3 protocol).

        Loops: read the clock, write it to the slot, re-read the clock; the
        value is good only if the clock did not move in between. Lock-free:
        repeats only while the clock advances.
        """
        while True:
            t = clock.read()                 # A1
            self._slots[slot] = t            # A2
            if clock.read() == t:            # A3
                return t

    def unannounce(self, slot: int) -> None:
        self._slots[slot] = EMPTY


class AnnScan:
    """An immutable (sorted announcements, clock threshold) pair.

    ``t`` is read before the slots are copied, so with a monotone clock every
    announcement observed afterwards is either in ``A`` or at least ``t``.
    """

    __slots__ = ("A", "t", "a_set", "created_at")

    def __init__(self, A: Iterable[int], t: int):
        self.A = tuple(A)
        self.t = t
        self.a_set = frozenset(self.A)
        self.created_at = time.monotonic()

    def __repr__(self):
        return f"AnnScan(A={list(self.A)}, t={self.t})"

    def age(self) -> float:
        return time.monotonic() - self.created_at


class AnnScanCell:
    """Shared cell holding the most recently installed AnnScan.

    ``scan_announce`` makes at most two install attempts and otherwise
    returns whatever scan a concurrent caller installed meanwhile, which is
    guaranteed to have been produced after this call began.
    """

    def __init__(self, clock: GlobalClock, board: AnnouncementBoard):
        self._clock = clock
        self._board = board
        self._cell = AtomicRef(AnnScan((), clock.read()))

    def installed(self) -> AnnScan:
        return self._cell.get()

    def scan_announce(self) -> AnnScan:
        for _ in range(2):
            old = self._cell.get()
            t = self._clock.read()
            values = []
            for slot in range(self._board.participants):
                v = self._board.read_slot(slot)
                if v == EMPTY:
                    continue
                # Stale-announcement filter: an in-flight re-announcement of
                # an old value will fail its own A3 check and must be
                # ignored, or scan monotonicity breaks.
                if v < old.t and v not in old.a_set:
                    continue
                values.append(v)
            new = AnnScan(sorted(set(values)), t)
            if self._cell.compare_and_swap(old, new):
                return new
        return self._cell.get()
