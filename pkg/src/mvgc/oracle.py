"""Test-side ground truth: brute-force oracles, shadow logging, and a
deterministic step-interleaving explorer for small exhaustive concurrency
cases.

Step granularity: operations expose generators yielding once per shared
memory access, except that a loop-condition read is fused with the hop it
guards. Running all steps of one machine in program order reproduces the
sequential operation, which keeps the explorer's machines the single source
of truth for the algorithms they exercise.
"""

from __future__ import annotations

import random
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

from .ssl import needed_indices


def needed_set_oracle(history: Sequence[Tuple[Any, int]], A: Iterable[int],
                      t: int) -> set:
    """Identities of the needed nodes in an append history.

    ``history`` is (identity, ts) pairs in append order; direct clause
    evaluation, no list mechanics involved.
    """
    ts_seq = [ts for _, ts in history]
    idxs = needed_indices(ts_seq, A, t)
    return {history[i][0] for i in idxs}


class RtxRecord:
    """One read-only transaction: its timestamp and every (cell, payload)
    it read."""

    __slots__ = ("t", "reads")

    def __init__(self, t: int, reads: list):
        self.t = t
        self.reads = reads


class ShadowLog:
    """Append history per cell plus rtx read records and announce events.

    Appends are recorded with nodes whose seq fields were assigned under the
    head-CAS, so per-cell order is recoverable even when the record calls
    themselves race.
    """

    def __init__(self):
        self.cells = []
        self._appends = {}
        self.rtx_records: List[RtxRecord] = []
        self.events = []

    def register_cell(self, cell) -> None:
        self._appends[id(cell)] = []
        self.cells.append(cell)

    def record_append(self, cell, node) -> None:
        self._appends[id(cell)].append(node)

    def appends_for(self, cell) -> list:
        return sorted(self._appends[id(cell)], key=lambda n: n.seq)

    def record_rtx(self, t: int, reads: list) -> None:
        self.rtx_records.append(RtxRecord(t, reads))

    def record_event(self, kind: str, slot: int, ts: int) -> None:
        self.events.append((kind, slot, ts))

    def appended_ids(self) -> set:
        out = set()
        for nodes in self._appends.values():
            out.update(id(n) for n in nodes)
        return out


class Verdict:
    __slots__ = ("ok", "detail")

    def __init__(self, ok: bool, detail: Any = None):
        self.ok = ok
        self.detail = detail

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return "Verdict(ok)" if self.ok else f"Verdict(FAIL: {self.detail})"


def check_rtx(log: ShadowLog, record: RtxRecord) -> Verdict:
    """Validate one rtx against the shadow log.

    Each read must equal the payload of the last logged append to that cell
    with stamp <= t; a cell with no such append must have returned its
    initial payload.
    """
    for cell, got in record.reads:
        expected = cell.initial
        for node in log.appends_for(cell):
            if node.ts <= record.t:
                expected = node.val
        if got != expected:
            return Verdict(False, (cell, record.t, expected, got))
    return Verdict(True)


def check_all_rtxs(log: ShadowLog) -> Verdict:
    for record in log.rtx_records:
        v = check_rtx(log, record)
        if not v:
            return v
    return Verdict(True)


class ExplorationResult:
    __slots__ = ("schedules", "violations", "exhaustive")

    def __init__(self, schedules: int, violations: list, exhaustive: bool):
        self.schedules = schedules
        self.violations = violations
        self.exhaustive = exhaustive

    @property
    def ok(self) -> bool:
        return not self.violations

    def __repr__(self):
        mode = "exhaustive" if self.exhaustive else "sampled"
        return (f"ExplorationResult({mode}, schedules={self.schedules}, "
                f"violations={len(self.violations)})")


def format_schedule(schedule: Sequence[int]) -> str:
    """Plain-text serialization of a schedule (machine index per step)."""
    return " ".join(str(i) for i in schedule)


def parse_schedule(text: str) -> Tuple[int, ...]:
    return tuple(int(tok) for tok in text.split())


def _prestart(machines):
    """Run each machine to its first announcement (performs no access).

    Step generators announce before they act: every yield names the shared
    access the following resume performs, so the scheduler always knows each
    machine's upcoming step kind.
    """
    n = len(machines)
    done = [False] * n
    results: list = [None] * n
    upcoming: list = [None] * n
    for i, gen in enumerate(machines):
        try:
            upcoming[i] = next(gen)
        except StopIteration as stop:  # machine with no shared accesses
            done[i] = True
            results[i] = stop.value
    return done, results, upcoming


def replay_schedule(setup: Callable[[], Tuple[Any, list]],
                    schedule: Sequence[int],
                    watch: Optional[Callable] = None):
    """Re-execute a schedule from a fresh setup; returns (state, results,
    done-flags). ``watch(state, machine_index, step_label)`` runs after every
    executed access."""
    state, machines = setup()
    done, results, upcoming = _prestart(machines)
    for idx in schedule:
        if done[idx]:
            raise ValueError(f"schedule steps finished machine {idx}")
        label = upcoming[idx]
        try:
            upcoming[idx] = next(machines[idx])
        except StopIteration as stop:
            done[idx] = True
            results[idx] = stop.value
        if watch is not None:
            watch(state, idx, label)
    return state, results, done

def _is_read_step(label) -> bool:
    return label is not None and label.startswith("read")


def _replay_lex(setup, forced: Sequence[int], watch: Optional[Callable]):
    """Deterministic replay: follow ``forced`` choices, then at every later
    position run the lowest-numbered machine the pruning rule allows.

    Two adjacent read steps by different machines commute (they read the
    same values in either order and mutate nothing), so of each such pair
    only the ascending machine order is explored; the descending twin is
    redundant. Records per position the executed (machine, label), the live
    set, and every machine's announced next access, from which the caller
    derives the lexicographically next unpruned schedule.
    """
    state, machines = setup()
    n = len(machines)
    done, results, upcoming = _prestart(machines)
    taken: List[int] = []
    performed: List[str] = []
    live_sets: List[Tuple[int, ...]] = []
    announced: List[tuple] = []
    pos = 0
    n_forced = len(forced)
    prev_choice = -1
    prev_was_read = False
    while True:
        live = tuple(i for i in range(n) if not done[i])
        if not live:
            break
        if pos < n_forced:
            choice = forced[pos]
        else:
            choice = live[0]
            if prev_was_read and prev_choice in live:
                for c in live:
                    if c >= prev_choice or not _is_read_step(upcoming[c]):
                        choice = c
                        break
        live_sets.append(live)
        announced.append(tuple(upcoming))
        taken.append(choice)
        label = upcoming[choice]
        try:
            upcoming[choice] = next(machines[choice])
        except StopIteration as stop:
            done[choice] = True
            results[choice] = stop.value
            upcoming[choice] = None
        performed.append(label)
        if watch is not None:
            watch(state, choice, label)
        prev_choice = choice
        prev_was_read = _is_read_step(label)
        pos += 1
    return state, results, taken, performed, live_sets, announced


def explore_interleavings(setup: Callable[[], Tuple[Any, list]],
                          check: Callable[[Any, list], None],
                          *,
                          exhaustive_step_limit: int = 24,
                          samples: int = 2000,
                          seed: int = 0,
                          watch: Optional[Callable] = None) -> ExplorationResult:
    """Run ``check(state, results)`` after every complete schedule of the
    machines produced by ``setup``.

    Schedules are enumerated exhaustively when the total sequential step
    count is within ``exhaustive_step_limit``; otherwise ``samples`` random
    schedules are drawn. State cannot be snapshotted mid-run, so enumeration
    replays whole schedules from a fresh setup in lexicographic order,
    deriving each successor from the live/announced sets the previous replay
    recorded; adjacent read-read pairs of different machines are explored in
    ascending machine order only (the swap is state-identical). A violation
    is recorded with its replayable schedule.
    """
    state, machines = setup()
    total_steps = 0
    for gen in machines:
        try:
            next(gen)
        except StopIteration:
            continue
        try:
            while True:
                next(gen)
                total_steps += 1
        except StopIteration:
            total_steps += 1

    violations: list = []

    def run_check(st, results, taken) -> None:
        try:
            check(st, results)
        except AssertionError as exc:
            violations.append((format_schedule(taken), str(exc)))

    if total_steps <= exhaustive_step_limit:
        n_schedules = 0
        forced: Tuple[int, ...] = ()
        while True:
            st, results, taken, performed, live_sets, announced = \
                _replay_lex(setup, forced, watch)
            n_schedules += 1
            run_check(st, results, taken)

            advanced = False
            for p in range(len(taken) - 1, -1, -1):
                cur = taken[p]
                prune_reads_below = -1
                if p > 0 and _is_read_step(performed[p - 1]) \
                        and taken[p - 1] in live_sets[p]:
                    prune_reads_below = taken[p - 1]
                for c in live_sets[p]:
                    if c <= cur:
                        continue
                    if c < prune_reads_below and _is_read_step(announced[p][c]):
                        continue  # descending read-read pair; twin covers it
                    forced = tuple(taken[:p]) + (c,)
                    advanced = True
                    break
                if advanced:
                    break
            if not advanced:
                return ExplorationResult(n_schedules, violations, exhaustive=True)

    rng = random.Random(seed)
    for _ in range(samples):
        st, machines = setup()
        done, results, upcoming = _prestart(machines)
        schedule: List[int] = []
        while not all(done):
            idx = rng.choice([i for i, d in enumerate(done) if not d])
            schedule.append(idx)
            label = upcoming[idx]
            try:
                upcoming[idx] = next(machines[idx])
            except StopIteration as stop:
                done[idx] = True
                results[idx] = stop.value
                upcoming[idx] = None
            if watch is not None:
                watch(st, idx, label)
        run_check(st, results, schedule)
    return ExplorationResult(samples, violations, exhaustive=False)


class ReferenceList:
    """Sequential reference for keyed version lists: append order with
    removals, floor lookups by key."""

    def __init__(self, sentinel_val: Any = None):
        self.sentinel_val = sentinel_val
        self.entries: List[list] = []  # [key, val, removed]

    def append(self, key: int, val: Any) -> int:
        self.entries.append([key, val, False])
        return len(self.entries) - 1

    def remove(self, index: int) -> None:
        self.entries[index][2] = True

    def floor(self, k: int) -> Any:
        out = self.sentinel_val
        for key, val, removed in self.entries:
            if not removed and key <= k:
                out = val
        return out

    def live_in_order(self) -> list:
        return [(key, val) for key, val, removed in self.entries if not removed]
