"""Benchmark and stress harness over the multiversion structures.

Workloads mirror the usual grid: update workers (inserts and deletes in
equal numbers), small and large range-rtx workers, or a mixed mode where
every worker does 50% updates / 49% lookups / 1% rtxs. Keys are drawn
uniformly or Zipfian(theta) from [1, 2n]. Throughput counters accumulate
per worker and are summed only after the run stops; all space measurement
happens at quiescence.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import threading
import time
from bisect import bisect_right
from dataclasses import dataclass, field
from random import Random
from typing import List, Optional

from .runtime import MvRuntime, Worker
from .structures import MvBst, MvHashMap, discover_cells, reachable_stats

SMALL_RTX_SIZE = 16

STRUCTURES = ("hash", "bst")
SCHEMES = ("ebr", "steam", "dlrt", "slrt")
DISTS = ("uniform", "zipf")


class ConfigError(ValueError):
    pass


@dataclass
class WorkloadConfig:
    structure: str = "hash"
    scheme: str = "slrt"
    n: int = 10_000
    update_threads: int = 8
    small_rtx_threads: int = 0
    large_rtx_threads: int = 0
    mixed: bool = False
    rtx_size: int = 256
    dist: str = "uniform"
    zipf_theta: float = 0.99
    duration_s: float = 2.0
    warmup_s: float = 0.5
    seed: int = 1
    # When set, each worker runs a fixed op count instead of a timed loop;
    # single-worker runs are then fully deterministic under one seed.
    ops_per_worker: Optional[int] = None

    @property
    def key_range(self) -> int:
        return 2 * self.n

    @property
    def total_workers(self) -> int:
        return self.update_threads + self.small_rtx_threads + self.large_rtx_threads

    def validate(self) -> None:
        if self.structure not in STRUCTURES:
            raise ConfigError(f"structure must be one of {STRUCTURES}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.dist not in DISTS:
            raise ConfigError(f"dist must be one of {DISTS}")
        if self.n < 1:
            raise ConfigError("size must be >= 1")
        for name in ("update_threads", "small_rtx_threads", "large_rtx_threads"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.total_workers < 1:
            raise ConfigError("at least one worker thread is required")
        if not 0 < self.rtx_size < self.key_range:
            raise ConfigError("rtx-size must be positive and below the key range")
        if self.duration_s < 0 or self.warmup_s < 0:
            raise ConfigError("durations must be >= 0")
        if self.zipf_theta <= 0:
            raise ConfigError("zipf-theta must be > 0")
        if self.ops_per_worker is not None and self.ops_per_worker < 1:
            raise ConfigError("ops-per-worker must be >= 1")


EMIT_FIELDS = (
    "structure", "scheme", "n", "threads_u", "threads_rs", "threads_rl",
    "rtx_size", "dist", "seed", "dur_s", "upd_ops_s", "rtx_ops_s",
    "lkp_ops_s", "reach_nodes", "avg_list_len", "avg_chain_c",
    "avg_compact_trav", "retained_items",
)


@dataclass
class RunMetrics:
    structure: str
    scheme: str
    n: int
    threads_u: int
    threads_rs: int
    threads_rl: int
    rtx_size: int
    dist: str
    seed: int
    dur_s: float
    upd_ops_s: float
    rtx_ops_s: float
    lkp_ops_s: float
    reach_nodes: int
    avg_list_len: float
    avg_chain_c: float
    avg_compact_trav: float
    retained_items: int
    epoch_lag: int = 0
    update_ops: int = 0
    rtx_ops: int = 0
    lookup_ops: int = 0

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in EMIT_FIELDS}


class ZipfSampler:
    """Zipf(theta) over 1..n via a precomputed CDF and inverse sampling."""

    def __init__(self, n: int, theta: float):
        total = 0.0
        cdf = []
        for i in range(1, n + 1):
            total += 1.0 / (i ** theta)
            cdf.append(total)
        self.cdf = [c / total for c in cdf]

    def draw(self, rng: Random) -> int:
        return bisect_right(self.cdf, rng.random()) + 1


class _Counters:
    __slots__ = ("updates", "lookups", "rtxs")

    def __init__(self):
        self.updates = 0
        self.lookups = 0
        self.rtxs = 0


class BenchSession:
    """One built workload: runtime, structure, prefill, worker loops.

    Kept separate from run_benchmark so tests can run phases, drain, and
    re-measure on the live structure.
    """

    def __init__(self, config: WorkloadConfig):
        config.validate()
        self.config = config
        self.runtime = MvRuntime(config.total_workers + 1, config.scheme)
        self.main_worker = self.runtime.register()
        if config.structure == "hash":
            self.structure = MvHashMap(self.runtime, config.n, hash_seed=config.seed)
        else:
            self.structure = MvBst(self.runtime)
        self.workers = [self.runtime.register() for _ in range(config.total_workers)]
        self.counters = [_Counters() for _ in range(config.total_workers)]
        self._zipf = ZipfSampler(config.key_range, config.zipf_theta) \
            if config.dist == "zipf" else None
        self.prefill()

    def prefill(self) -> None:
        rng = Random(self.config.seed)
        keys = rng.sample(range(1, self.config.key_range + 1), self.config.n)
        for k in keys:
            self.structure.insert(self.main_worker, k, k)

    def _draw_key(self, rng: Random) -> int:
        if self._zipf is not None:
            return self._zipf.draw(rng)
        return rng.randint(1, self.config.key_range)

    def _roles(self) -> List[str]:
        cfg = self.config
        if cfg.mixed:
            return ["mixed"] * cfg.total_workers
        return (["update"] * cfg.update_threads
                + ["small_rtx"] * cfg.small_rtx_threads
                + ["large_rtx"] * cfg.large_rtx_threads)

    def _worker_loop(self, idx: int, role: str, rng: Random,
                     deadline: Optional[float], op_budget: Optional[int]) -> None:
        cfg = self.config
        worker = self.workers[idx]
        counters = self.counters[idx]
        structure = self.structure
        done_ops = 0
        while True:
            if op_budget is not None:
                if done_ops >= op_budget:
                    return
            elif time.monotonic() >= deadline:
                return
            done_ops += 1
            if role == "update":
                self._do_update(worker, rng, counters)
            elif role == "small_rtx":
                self._do_rtx(worker, rng, counters, min(SMALL_RTX_SIZE, cfg.rtx_size))
            elif role == "large_rtx":
                self._do_rtx(worker, rng, counters, cfg.rtx_size)
            else:  # mixed: 50% updates, 49% lookups, 1% rtxs
                u = rng.random()
                if u < 0.50:
                    self._do_update(worker, rng, counters)
                elif u < 0.99:
                    structure.lookup(worker, self._draw_key(rng))
                    counters.lookups += 1
                else:
                    self._do_rtx(worker, rng, counters, cfg.rtx_size)

    def _do_update(self, worker: Worker, rng: Random, counters: _Counters) -> None:
        key = self._draw_key(rng)
        if rng.random() < 0.5:
            self.structure.insert(worker, key, key)
        else:
            self.structure.delete(worker, key)
        counters.updates += 1

    def _do_rtx(self, worker: Worker, rng: Random, counters: _Counters,
                size: int) -> None:
        lo = rng.randint(1, max(1, self.config.key_range - size))
        self.structure.range_rtx(worker, lo, size)
        counters.rtxs += 1

    def run_phase(self, duration_s: float, op_budget: Optional[int] = None) -> float:
        """Run all workers for one phase; returns the elapsed wall time."""
        roles = self._roles()
        rngs = [Random((self.config.seed << 16) ^ (idx + 1))
                for idx in range(len(roles))]
        deadline = None if op_budget is not None else time.monotonic() + duration_s
        threads = [
            threading.Thread(
                target=self._worker_loop,
                args=(idx, role, rngs[idx], deadline, op_budget),
                daemon=True,
            )
            for idx, role in enumerate(roles)
        ]
        start = time.monotonic()
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        return time.monotonic() - start

    def measure(self, elapsed: float) -> RunMetrics:
        cfg = self.config
        stats = reachable_stats(self.structure)
        removes = self.runtime.merged_remove_stats(self.workers + [self.main_worker])
        compacts = self.runtime.merged_compact_stats(self.workers + [self.main_worker])
        updates = sum(c.updates for c in self.counters)
        lookups = sum(c.lookups for c in self.counters)
        rtxs = sum(c.rtxs for c in self.counters)
        elapsed = max(elapsed, 1e-9)
        return RunMetrics(
            structure=cfg.structure,
            scheme=cfg.scheme,
            n=cfg.n,
            threads_u=cfg.update_threads,
            threads_rs=cfg.small_rtx_threads,
            threads_rl=cfg.large_rtx_threads,
            rtx_size=cfg.rtx_size,
            dist=cfg.dist,
            seed=cfg.seed,
            dur_s=cfg.duration_s,
            upd_ops_s=updates / elapsed,
            rtx_ops_s=rtxs / elapsed,
            lkp_ops_s=lookups / elapsed,
            reach_nodes=stats.version_nodes,
            avg_list_len=stats.avg_list_length(),
            avg_chain_c=removes.average_chain(),
            avg_compact_trav=compacts.average_traversal(),
            retained_items=self.runtime.scheme.retained_items(),
            epoch_lag=self.runtime.scheme.epoch_lag(),
            update_ops=updates,
            rtx_ops=rtxs,
            lookup_ops=lookups,
        )

    def drain(self) -> None:
        """Quiescent full drain of pending reclamation (test/bench support)."""
        cells = discover_cells(self.structure)
        self.runtime.scheme.drain(self.main_worker, cells)


def run_benchmark(config: WorkloadConfig) -> RunMetrics:
    """Prefill, warm up, run the timed phase, and measure at quiescence."""
    config.validate()
    session = BenchSession(config)
    if config.ops_per_worker is None and config.warmup_s > 0:
        session.run_phase(config.warmup_s)
        for counters in session.counters:
            counters.updates = counters.lookups = counters.rtxs = 0
    elapsed = session.run_phase(config.duration_s, op_budget=config.ops_per_worker)
    return session.measure(elapsed)


def run_many(config: WorkloadConfig, runs: int) -> List[RunMetrics]:
    """Repeat a workload; run i uses seed + i so runs stay independent."""
    out = []
    for i in range(runs):
        cfg = WorkloadConfig(**{**config.__dict__, "seed": config.seed + i})
        out.append(run_benchmark(cfg))
    return out


def emit_results(rows, fmt: str, path: str) -> None:
    """Write one record per run; CSV header is fixed, JSON mirrors it."""
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    dicts = [row.as_row() if isinstance(row, RunMetrics) else dict(row)
             for row in rows]
    for d in dicts:
        missing = set(EMIT_FIELDS) - set(d)
        if missing:
            raise ConfigError(f"result row missing fields: {sorted(missing)}")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=EMIT_FIELDS, extrasaction="ignore")
        writer.writeheader()
        for d in dicts:
            writer.writerow(d)
        text = buf.getvalue()
    else:
        text = json.dumps([{k: d[k] for k in EMIT_FIELDS} for d in dicts],
                          indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write results to {path}: {exc}") from exc
