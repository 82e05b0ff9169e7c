"""Small atomic primitives used by the lock-free structures.

CPython attribute loads/stores are atomic under the GIL; compare-and-swap
needs a read-modify-write, so it is guarded by a per-instance lock. No lock
is ever held across more than one shared-memory step, which keeps the
algorithms built on top lock-free at the algorithm level.
"""

from __future__ import annotations

import threading
from typing import Any, Callable, Generator, Optional


class AtomicRef:
    """A mutable cell supporting atomic get/set/compare_and_swap.

    Comparison uses ``==``, which degrades to identity for objects without
    ``__eq__``; callers relying on CAS for linking pass fresh node objects,
    so there is no ABA hazard.
    """

    __slots__ = ("_value", "_lock")

    def __init__(self, value: Any = None):
        self._value = value
        self._lock = threading.Lock()

    def get(self) -> Any:
        return self._value

    def set(self, value: Any) -> None:
        self._value = value

    def compare_and_swap(self, expected: Any, new: Any,
                         on_success: Optional[Callable[[], None]] = None) -> bool:
        """Atomically replace ``expected`` with ``new``.

        ``on_success`` runs while the lock is still held; it is used by the
        version lists to assign append sequence numbers in list order.
        """
        with self._lock:
            if self._value == expected:
                self._value = new
                if on_success is not None:
                    on_success()
                return True
            return False


class AtomicCounter:
    """Monotone counter with an atomic fetch-and-increment."""

    __slots__ = ("_value", "_lock")

    def __init__(self, start: int = 0):
        self._value = start
        self._lock = threading.Lock()

    def get(self) -> int:
        return self._value

    def fetch_inc(self) -> int:
        with self._lock:
            v = self._value
            self._value = v + 1
            return v


def run_steps(gen: Generator) -> Any:
    """Drive a step generator to completion and return its result.

    Concurrency-sensitive operations are written as generators that yield
    once per shared-memory step; normal callers drive them with this helper,
    while the interleaving explorer schedules them one step at a time.
    """
    try:
        while True:
            next(gen)
    except StopIteration as stop:
        return stop.value
