"""Acceptance suite: one test per criterion, one printed verdict line each.

Criteria 4, 5, and 8 share one stress pass (module-scoped fixture) over all
eight (structure, scheme) combinations with shadow logging enabled.
"""

import os
import random
import threading
import time

import pytest

from mvgc.bench import WorkloadConfig, run_benchmark
from mvgc.oracle import (
    check_all_rtxs,
    explore_interleavings,
    needed_set_oracle,
)
from mvgc.pdl import PdlList, PdlNode
from mvgc.runtime import MvRuntime
from mvgc.ssl import SslList, SslNode
from mvgc.structures import (
    MvBst,
    MvHashMap,
    discover_cells,
    reachable_node_ids,
    reachable_stats,
)
from mvgc.tracker import DeprecatedItem, RangeTracker

from conftest import fine_switching

SCHEMES = ("ebr", "steam", "dlrt", "slrt")
STRUCTURES = ("hash", "bst")

STRESS_WORKERS = 8
STRESS_OPS = 100_000
STRESS_PHASES = 4
STRESS_KEYS = 256


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {number} [{name}]: {status} {detail}".rstrip())
    assert ok, f"criterion {number} ({name}) failed: {detail}"


# --- criterion 1 -------------------------------------------------------------

def test_criterion_1_compact_oracle_equivalence():
    rng = random.Random(0xC0FFEE)
    failures = 0
    start = time.monotonic()
    for _ in range(1000):
        length = rng.randint(1, 64)
        ts_seq = []
        ts = 1
        for _ in range(length):
            ts += rng.choice([0, 0, 1, 1, 2, 5])
            ts_seq.append(ts)
        hi = ts + 2
        A = sorted(set(rng.sample(range(1, hi + 1), rng.randint(0, min(10, hi)))))
        t = rng.choice([0, rng.randint(1, hi), hi])
        lst = SslList()
        nodes = []
        for stamp in ts_seq:
            node = SslNode(stamp, None)
            assert lst.try_append(lst.head_node(), node)
            nodes.append(node)
        history = [(id(n), n.ts) for n in nodes]
        lst.compact(A, t, lst.head_node())
        reachable = {id(n) for n in lst.reachable_nodes()}
        if reachable != needed_set_oracle(history, A, t):
            failures += 1
    elapsed = time.monotonic() - start
    report(1, "compact oracle equivalence", failures == 0 and elapsed < 10,
           f"1000 cases, {failures} failures, {elapsed:.1f}s (< 10s)")


# --- criterion 2 -------------------------------------------------------------

def _pdl_sequence(rng: random.Random) -> bool:
    lst = PdlList("bottom")
    entries = []  # (node, key, val, removed)
    key = 0
    for _ in range(rng.randint(5, 30)):
        op = rng.random()
        head = lst.head_node()
        if op < 0.55 or not entries:
            key += rng.randint(0, 3)
            node = PdlNode(key, (key, len(entries)))
            if not lst.try_append(head, node):
                return False
            entries.append([node, key, node.val, False])
        elif op < 0.8:
            live = [e for e in entries if not e[3] and e[0] is not head]
            if live:
                entry = live[rng.randrange(len(live))]
                entry[3] = True
                lst.remove(entry[0])
        else:
            probe = rng.randint(-1, key + 2)
            expected = "bottom"
            for _, k, v, removed in entries:
                if not removed and k <= probe:
                    expected = v
            if lst.search(probe) != expected:
                return False
    expected_nodes = [e[0] for e in entries if not e[3]]
    if lst.reachable_nodes() != list(reversed(expected_nodes)):
        return False
    for probe in range(-1, key + 2):
        expected = "bottom"
        for _, k, v, removed in entries:
            if not removed and k <= probe:
                expected = v
        if lst.search(probe) != expected:
            return False
    return True


def test_criterion_2_pdl_oracle_equivalence():
    rng = random.Random(0xBEEF)
    failures = 0
    start = time.monotonic()
    for _ in range(10_000):
        if not _pdl_sequence(rng):
            failures += 1
    elapsed = time.monotonic() - start
    report(2, "PDL oracle equivalence", failures == 0 and elapsed < 30,
           f"10000 sequences, {failures} failures, {elapsed:.1f}s (< 30s)")


# --- criterion 3 -------------------------------------------------------------

def _build_pdl(keys):
    lst = PdlList("bottom")
    nodes = []
    for k in keys:
        node = PdlNode(k, f"v{k}")
        assert lst.try_append(lst.head_node(), node)
        nodes.append(node)
    return lst, nodes


def _build_ssl(keys):
    lst = SslList("bottom")
    nodes = []
    for k in keys:
        node = SslNode(k, f"v{k}")
        assert lst.try_append(lst.head_node(), node)
        nodes.append(node)
    return lst, nodes


def test_criterion_3_exhaustive_interleavings():
    start = time.monotonic()
    outcomes = []

    # (a) two concurrent removes of adjacent nodes
    def setup_removes():
        lst, (a, b, c) = _build_pdl([1, 2, 3])
        return (lst, a, b), [lst._remove_steps(a), lst._remove_steps(b)]

    def check_removes(state, results):
        lst, a, b = state
        assert [n.ts for n in lst.reachable_nodes()] == [3]
        assert a.mark and b.mark

    res = explore_interleavings(setup_removes, check_removes,
                                exhaustive_step_limit=30)
    outcomes.append(("removes", res))

    # (b) two concurrent tryAppends on one head
    def setup_appends():
        lst, _ = _build_pdl([1])
        x = lst.head_node()
        y1, y2 = PdlNode(2, "y1"), PdlNode(2, "y2")
        return (lst, y1, y2), [lst._try_append_steps(x, y1),
                               lst._try_append_steps(x, y2)]

    def check_appends(state, results):
        lst, y1, y2 = state
        assert sorted(results) == [False, True]
        winner = y1 if results[0] else y2
        assert lst.head_node() is winner
        assert len(lst.reachable_nodes()) == 2

    res = explore_interleavings(setup_appends, check_appends)
    outcomes.append(("appends", res))

    # (c) two concurrent compacts with identical (A, t); a spliced node must
    # never reappear after it first leaves the reachable set
    def setup_compacts():
        lst, nodes = _build_ssl([1, 2, 4, 5, 7])
        h = lst.head_node()
        state = (lst, nodes, set())
        return state, [lst._compact_steps([3], 6, h),
                       lst._compact_steps([3], 6, h)]

    def watch_compacts(state, idx, label):
        if label is None or not label.startswith("cas"):
            return
        lst, nodes, gone = state
        reachable = {id(n) for n in lst.reachable_nodes()}
        for n in nodes:
            if id(n) in gone:
                assert id(n) not in reachable, f"node ts={n.ts} reappeared"
            elif id(n) not in reachable:
                gone.add(id(n))

    def check_compacts(state, results):
        lst, nodes, gone = state
        assert [n.ts for n in lst.reachable_nodes()] == [7, 5, 2]

    res = explore_interleavings(setup_compacts, check_compacts,
                                watch=watch_compacts, exhaustive_step_limit=30)
    outcomes.append(("compacts", res))

    elapsed = time.monotonic() - start
    bad = [(name, r.violations[:2]) for name, r in outcomes
           if not r.ok or not r.exhaustive]
    detail = ", ".join(f"{name}={r.schedules}" for name, r in outcomes)
    report(3, "exhaustive interleavings",
           not bad and elapsed < 120,
           f"schedules: {detail}, {elapsed:.1f}s (< 2min){bad or ''}")


# --- criteria 4, 5, 8: shared stress pass ------------------------------------

def _run_stress(structure: str, scheme: str) -> dict:
    runtime = MvRuntime(STRESS_WORKERS + 1, scheme, shadow_log=True)
    main = runtime.register()
    if structure == "hash":
        subject = MvHashMap(runtime, STRESS_KEYS, hash_seed=7)
    else:
        subject = MvBst(runtime)
    prefill = random.Random(40).sample(range(1, 2 * STRESS_KEYS + 1), STRESS_KEYS)
    for k in prefill:
        subject.insert(main, k, k)
    workers = [runtime.register() for _ in range(STRESS_WORKERS)]
    per_worker = STRESS_OPS // STRESS_WORKERS
    per_phase = per_worker // STRESS_PHASES
    key_range = 2 * STRESS_KEYS

    def loop(widx: int, phase: int) -> None:
        w = workers[widx]
        rng = random.Random((widx + 1) * 10_000 + phase)
        for _ in range(per_phase):
            u = rng.random()
            key = rng.randint(1, key_range)
            if u < 0.50:
                if rng.random() < 0.5:
                    subject.insert(w, key, key)
                else:
                    subject.delete(w, key)
            elif u < 0.99:
                subject.lookup(w, key)
            else:
                subject.range_rtx(w, rng.randint(1, key_range - 16), 16)

    start = time.monotonic()
    monotone_violations = 0
    prev_reach = None
    prev_appended = None
    with fine_switching():
        for phase in range(STRESS_PHASES):
            threads = [threading.Thread(target=loop, args=(i, phase))
                       for i in range(STRESS_WORKERS)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            reach = reachable_node_ids(subject)
            appended = runtime.log.appended_ids()
            if prev_reach is not None:
                resurrected = reach - prev_reach - (appended - prev_appended)
                monotone_violations += len(resurrected)
            prev_reach, prev_appended = reach, appended
    elapsed = time.monotonic() - start

    verdict = check_all_rtxs(runtime.log)
    chain = runtime.merged_remove_stats(workers + [main])
    runtime.scheme.drain(main, discover_cells(subject))
    drained_avg = reachable_stats(subject).avg_list_length()
    return {
        "elapsed": elapsed,
        "rtx_count": len(runtime.log.rtx_records),
        "checker_ok": bool(verdict),
        "checker_detail": verdict.detail,
        "monotone_violations": monotone_violations,
        "chain_removes": chain.removes,
        "chain_total": chain.chain_total,
        "drained_avg": drained_avg,
    }


@pytest.fixture(scope="module")
def stress_records():
    records = {}
    for structure in STRUCTURES:
        for scheme in SCHEMES:
            records[(structure, scheme)] = _run_stress(structure, scheme)
    return records


def test_criterion_4_stress_snapshot_checker(stress_records):
    problems = []
    details = []
    for combo, rec in sorted(stress_records.items()):
        details.append(f"{combo[0]}/{combo[1]}:{rec['elapsed']:.0f}s")
        if not rec["checker_ok"]:
            problems.append((combo, "checkRtx", rec["checker_detail"]))
        if rec["monotone_violations"]:
            problems.append((combo, "resurrected",
                             rec["monotone_violations"]))
        if rec["elapsed"] >= 300:
            problems.append((combo, "too slow", rec["elapsed"]))
        if rec["rtx_count"] == 0:
            problems.append((combo, "no rtxs exercised", 0))
    report(4, "stress + snapshot checker", not problems,
           f"{STRESS_OPS} ops x {len(stress_records)} combos "
           f"({', '.join(details)}) {problems or ''}")


def test_criterion_5_full_drain_exactness(stress_records):
    wrong = {combo: rec["drained_avg"]
             for combo, rec in stress_records.items()
             if rec["drained_avg"] != 1.0}
    report(5, "full-drain exactness", not wrong,
           f"avg list length after drain == 1.0 for all combos {wrong or ''}")


def test_criterion_8_remove_chain_statistic(stress_records):
    removes = sum(r["chain_removes"] for r in stress_records.values())
    total = sum(r["chain_total"] for r in stress_records.values())
    avg = total / removes if removes else 0.0
    report(8, "remove chain statistic", removes > 0 and avg <= 1.2,
           f"average c = {avg:.4f} over {removes} removes (<= 1.2)")


# --- criterion 6 -------------------------------------------------------------

def test_criterion_6_ebr_blowup():
    start = time.monotonic()
    cores = os.cpu_count() or 2
    workers = max(8, min(16, 4 * cores))
    rtx_threads = max(2, workers // 4)
    averages = {}
    for scheme in ("ebr", "slrt"):
        cfg = WorkloadConfig(structure="hash", scheme=scheme, n=512,
                             update_threads=workers - rtx_threads,
                             large_rtx_threads=rtx_threads, rtx_size=512,
                             dist="zipf", duration_s=1.5, warmup_s=0.2,
                             seed=11)
        averages[scheme] = run_benchmark(cfg).avg_list_len
    elapsed = time.monotonic() - start
    ratio = averages["ebr"] / averages["slrt"]
    report(6, "EBR blowup vs SL-RT", ratio >= 3.0 and elapsed < 120,
           f"avg list length ebr={averages['ebr']:.2f} "
           f"slrt={averages['slrt']:.2f} ratio={ratio:.1f} (>= 3), "
           f"{elapsed:.0f}s (< 2min)")


# --- criterion 7 -------------------------------------------------------------

def test_criterion_7_indirection_dusty_corners():
    start = time.monotonic()
    reach = {}
    for scheme in ("steam", "slrt"):
        cfg = WorkloadConfig(structure="bst", scheme=scheme, n=400,
                             update_threads=4, small_rtx_threads=4,
                             rtx_size=16, dist="zipf", duration_s=1.5,
                             warmup_s=0.2, seed=12)
        reach[scheme] = run_benchmark(cfg).reach_nodes
    elapsed = time.monotonic() - start
    ratio = reach["steam"] / reach["slrt"]
    report(7, "indirection / dusty corners", ratio >= 1.3 and elapsed < 120,
           f"reachable nodes steam={reach['steam']} slrt={reach['slrt']} "
           f"ratio={ratio:.2f} (>= 1.3), {elapsed:.0f}s (< 2min)")


# --- criterion 9 -------------------------------------------------------------

def test_criterion_9_range_tracker_safety():
    rng = random.Random(0x5AFE)
    runtime = MvRuntime(2, "none")
    worker = runtime.register()
    pinner = runtime.register()
    runtime.clock._value.set(50)
    t_star = runtime.board.announce(pinner.slot, runtime.clock)
    runtime.clock._value.set(500)
    tracker = RangeTracker(runtime.scan_cell, 2)
    early_returns = 0
    returned = []
    for i in range(10_000):
        lo = rng.randint(1, t_star)
        hi = rng.randint(t_star + 1, 500)
        out = tracker.deprecate(worker, DeprecatedItem(i, lo, hi))
        early_returns += len(out)
        returned.extend(out)
    runtime.board.unannounce(pinner.slot)
    final = tracker.flush_all(worker)
    all_back = {it.handle for it in returned} | {it.handle for it in final}
    ok = early_returns == 0 and all_back == set(range(10_000)) \
        and tracker.retained_count() == 0
    report(9, "range tracker safety", ok,
           f"{early_returns} early returns (== 0); "
           f"{len(all_back)}/10000 returned after unpin")
