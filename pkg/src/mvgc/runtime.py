"""Shared runtime: clock, announcement board, scan cell, scheme, workers.

A runtime is created with a fixed participant count; each thread registers
once and gets a Worker holding its announcement slot and local stat sinks.
Read-only transactions announce a timestamp for their whole lifetime and
advance the clock past it, so later updates stamp strictly above it.
"""

from __future__ import annotations

from typing import Optional

from .oracle import ShadowLog
from .pdl import RemoveStats
from .schemes import make_scheme
from .ssl import CompactStats
from .timestamps import AnnouncementBoard, AnnScanCell, GlobalClock


class RtxHandle:
    __slots__ = ("slot", "t", "open")

    def __init__(self, slot: int, t: int):
        self.slot = slot
        self.t = t
        self.open = True


class Worker:
    """Per-thread participant: owns one announcement slot and local stats."""

    __slots__ = ("runtime", "slot", "ops", "_op_depth",
                 "remove_stats", "compact_stats")

    def __init__(self, runtime: "MvRuntime", slot: int):
        self.runtime = runtime
        self.slot = slot
        self.ops = 0
        self._op_depth = 0
        self.remove_stats = RemoveStats()
        self.compact_stats = CompactStats()

    def begin_op(self) -> None:
        self._op_depth += 1
        if self._op_depth == 1:
            self.ops += 1
            self.runtime.scheme.on_op_begin(self)

    def end_op(self) -> None:
        self._op_depth -= 1
        if self._op_depth == 0:
            self.runtime.scheme.on_op_end(self)

    def rtx_begin(self) -> RtxHandle:
        """Announce a timestamp and push the clock past it.

        The returned handle's t stays announced until rtx_end, so every
        update issued afterwards stamps strictly above t and snapshot reads
        at t are stable.
        """
        rt = self.runtime
        self.begin_op()
        t = rt.board.announce(self.slot, rt.clock)
        rt.clock.tick()
        if rt.log is not None:
            rt.log.record_event("announce", self.slot, t)
        return RtxHandle(self.slot, t)

    def rtx_end(self, handle: RtxHandle) -> None:
        if not handle.open:
            return
        handle.open = False
        self.runtime.board.unannounce(handle.slot)
        if self.runtime.log is not None:
            self.runtime.log.record_event("unannounce", handle.slot, handle.t)
        self.end_op()


class MvRuntime:
    """Everything the version cells and schemes share for one run."""

    def __init__(self, participants: int, scheme: str = "slrt", *,
                 shadow_log: bool = False, **scheme_options):
        self.participants = participants
        self.clock = GlobalClock(1)
        self.board = AnnouncementBoard(participants)
        self.scan_cell = AnnScanCell(self.clock, self.board)
        self.log: Optional[ShadowLog] = ShadowLog() if shadow_log else None
        self.scheme = make_scheme(scheme, self, **scheme_options)
        self._next_slot = 0

    def register(self) -> Worker:
        if self._next_slot >= self.participants:
            raise RuntimeError("all participant slots taken")
        worker = Worker(self, self._next_slot)
        self._next_slot += 1
        return worker

    def merged_remove_stats(self, workers) -> RemoveStats:
        out = RemoveStats()
        for w in workers:
            out.merge(w.remove_stats)
        return out

    def merged_compact_stats(self, workers) -> CompactStats:
        out = CompactStats()
        for w in workers:
            out.merge(w.compact_stats)
        return out
