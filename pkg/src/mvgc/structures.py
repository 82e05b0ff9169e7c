"""Multiversion data structures built over version cells.

MvHashMap: fixed separate-chaining table at load factor ~0.5. Each bucket is
one version cell holding an immutable sorted (key, value) chain; updates path
copy the chain and CAS the bucket, so cells never point at other cells.

MvBst: unbalanced external binary search tree. Internal nodes carry an
immutable router key and two version cells pointing at subtrees, so child
cells point (indirectly) at nodes containing further version cells: one stale
child version can keep a whole detached subtree reachable. Structural
updates coordinate through per-node flag/mark states with helping, which
keeps inserts and deletes lock-free and linearizable while version cells
record every child-pointer change.
"""

from __future__ import annotations

from typing import Any, Iterable, List, Optional, Tuple

from .atomics import AtomicRef
from .cells import VersionCell

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer; full-avalanche 64-bit mix."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def _chain_find(chain: tuple, key: int) -> Optional[Any]:
    for k, v in chain:
        if k == key:
            return v
        if k > key:
            return None
    return None


def _chain_insert(chain: tuple, key: int, value: Any) -> tuple:
    out = []
    placed = False
    for k, v in chain:
        if not placed and key < k:
            out.append((key, value))
            placed = True
        out.append((k, v))
    if not placed:
        out.append((key, value))
    return tuple(out)


def _chain_remove(chain: tuple, key: int) -> tuple:
    return tuple((k, v) for k, v in chain if k != key)


class MvHashMap:
    """Separate-chaining hash map with immutable path-copied chains."""

    def __init__(self, runtime, expected_keys: int, hash_seed: int = 0):
        self.runtime = runtime
        self.bucket_count = max(1, 2 * expected_keys)
        self.hash_seed = hash_seed
        self.buckets = [VersionCell(runtime, ()) for _ in range(self.bucket_count)]

    def _bucket(self, key: int) -> VersionCell:
        return self.buckets[mix64(key ^ self.hash_seed) % self.bucket_count]

    def insert(self, worker, key: int, value: Any) -> bool:
        """False if the key is present (value unchanged, no version added)."""
        worker.begin_op()
        try:
            cell = self._bucket(key)
            while True:
                chain = cell.peek()
                if _chain_find(chain, key) is not None:
                    return False
                if cell.cas(worker, chain, _chain_insert(chain, key, value)):
                    return True
        finally:
            worker.end_op()

    def delete(self, worker, key: int) -> bool:
        """False if the key is absent; no version appended on a no-op."""
        worker.begin_op()
        try:
            cell = self._bucket(key)
            while True:
                chain = cell.peek()
                if _chain_find(chain, key) is None:
                    return False
                if cell.cas(worker, chain, _chain_remove(chain, key)):
                    return True
        finally:
            worker.end_op()

    def lookup(self, worker, key: int) -> Optional[Any]:
        worker.begin_op()
        try:
            return _chain_find(self._bucket(key).peek(), key)
        finally:
            worker.end_op()

    def range_rtx(self, worker, a: int, s: int) -> List[Tuple[int, Any]]:
        """Snapshot of all present keys in the open interval (a, a+s)."""
        handle = worker.rtx_begin()
        reads: list = []
        cache: dict = {}
        out: List[Tuple[int, Any]] = []
        try:
            for key in range(a + 1, a + s):
                cell = self._bucket(key)
                chain = cache.get(id(cell))
                if chain is None:
                    chain = cell.read_at(handle.t)
                    cache[id(cell)] = chain
                    reads.append((cell, chain))
                v = _chain_find(chain, key)
                if v is not None:
                    out.append((key, v))
        finally:
            worker.rtx_end(handle)
        if self.runtime.log is not None:
            self.runtime.log.record_rtx(handle.t, reads)
        return out

    def root_cells(self) -> list:
        return list(self.buckets)

    @staticmethod
    def cells_in_payload(payload) -> tuple:
        return ()


# --- external BST -----------------------------------------------------------

KEY_INF1 = 1 << 62        # dummy leaf bound; all real keys are below it
KEY_INF2 = (1 << 62) + 1

CLEAN = "clean"
IFLAG = "iflag"
DFLAG = "dflag"
MARK = "mark"


class Leaf:
    __slots__ = ("key", "value")

    def __init__(self, key: int, value: Any):
        self.key = key
        self.value = value

    def __repr__(self):
        return f"Leaf({self.key})"


class Internal:
    """Router node: immutable key, two child version cells, and the
    flag/mark coordination word guarding structural changes below it."""

    __slots__ = ("key", "left", "right", "update")

    def __init__(self, key: int, left: VersionCell, right: VersionCell):
        self.key = key
        self.left = left
        self.right = right
        self.update = AtomicRef((CLEAN, None))

    def __repr__(self):
        return f"Internal({self.key})"


class _IInfo:
    __slots__ = ("p", "l", "new_internal", "cell")

    def __init__(self, p: Internal, l, new_internal: Internal, cell: VersionCell):
        self.p = p
        self.l = l
        self.new_internal = new_internal
        self.cell = cell


class _DInfo:
    __slots__ = ("gp", "p", "l", "pupdate", "gpcell")

    def __init__(self, gp: Internal, p: Internal, l, pupdate, gpcell: VersionCell):
        self.gp = gp
        self.p = p
        self.l = l
        self.pupdate = pupdate
        self.gpcell = gpcell


class MvBst:
    """Leaf-oriented BST: every key lives in a leaf, internal keys route
    (k < key goes left). Two dummy leaves above every real key anchor the
    root, which is never removed."""

    def __init__(self, runtime):
        self.runtime = runtime
        self.root = Internal(
            KEY_INF2,
            VersionCell(runtime, Leaf(KEY_INF1, None)),
            VersionCell(runtime, Leaf(KEY_INF2, None)),
        )

    def _search(self, key: int):
        """Descend to the leaf for key, tracking parent/grandparent and the
        coordination words read on the way down (read before the child)."""
        gp = None
        gpupdate = None
        gpcell = None
        p = None
        pupdate = None
        pcell = None
        l = self.root
        while isinstance(l, Internal):
            gp, gpupdate, gpcell = p, pupdate, pcell
            p = l
            pupdate = p.update.get()
            pcell = p.left if key < p.key else p.right
            l = pcell.peek()
        return gp, p, l, gpupdate, pupdate, gpcell, pcell

    def insert(self, worker, key: int, value: Any) -> bool:
        if key >= KEY_INF1:
            raise ValueError("key out of range")
        worker.begin_op()
        try:
            while True:
                _, p, l, _, pupdate, _, pcell = self._search(key)
                if l.key == key:
                    return False
                if pupdate[0] != CLEAN:
                    self._help(worker, pupdate)
                    continue
                new_leaf = Leaf(key, value)
                if key < l.key:
                    children = (new_leaf, l)
                    router = l.key
                else:
                    children = (l, new_leaf)
                    router = key
                ni = Internal(router,
                              VersionCell(self.runtime, children[0]),
                              VersionCell(self.runtime, children[1]))
                op = _IInfo(p, l, ni, pcell)
                if p.update.compare_and_swap(pupdate, (IFLAG, op)):
                    self._help_insert(worker, op)
                    return True
                self._help(worker, p.update.get())
        finally:
            worker.end_op()

    def delete(self, worker, key: int) -> bool:
        worker.begin_op()
        try:
            while True:
                gp, p, l, gpupdate, pupdate, gpcell, _ = self._search(key)
                if l.key != key:
                    return False
                if gpupdate[0] != CLEAN:
                    self._help(worker, gpupdate)
                    continue
                if pupdate[0] != CLEAN:
                    self._help(worker, pupdate)
                    continue
                op = _DInfo(gp, p, l, pupdate, gpcell)
                if gp.update.compare_and_swap(gpupdate, (DFLAG, op)):
                    if self._help_delete(worker, op):
                        return True
                else:
                    self._help(worker, gp.update.get())
        finally:
            worker.end_op()

    def _help(self, worker, state) -> None:
        kind, op = state
        if kind == IFLAG:
            self._help_insert(worker, op)
        elif kind == MARK:
            self._help_marked(worker, op)
        elif kind == DFLAG:
            self._help_delete(worker, op)

    def _help_insert(self, worker, op: _IInfo) -> None:
        op.cell.cas(worker, op.l, op.new_internal)
        op.p.update.compare_and_swap((IFLAG, op), (CLEAN, op))

    def _help_delete(self, worker, op: _DInfo) -> bool:
        if (op.p.update.compare_and_swap(op.pupdate, (MARK, op))
                or op.p.update.get() == (MARK, op)):
            self._help_marked(worker, op)
            return True
        self._help(worker, op.p.update.get())
        op.gp.update.compare_and_swap((DFLAG, op), (CLEAN, op))
        return False

    def _help_marked(self, worker, op: _DInfo) -> None:
        # p is marked forever, so its child cells are frozen; splice the
        # sibling subtree into the grandparent's cell.
        pl = op.p.left.peek()
        other = op.p.right.peek() if pl is op.l else pl
        op.gpcell.cas(worker, op.p, other)
        op.gp.update.compare_and_swap((DFLAG, op), (CLEAN, op))

    def lookup(self, worker, key: int) -> Optional[Any]:
        worker.begin_op()
        try:
            node = self.root
            while isinstance(node, Internal):
                cell = node.left if key < node.key else node.right
                node = cell.peek()
            return node.value if node.key == key else None
        finally:
            worker.end_op()

    def range_rtx(self, worker, a: int, s: int) -> List[Tuple[int, Any]]:
        """Snapshot of all present keys in the open interval (a, a+s)."""
        handle = worker.rtx_begin()
        reads: list = []
        out: List[Tuple[int, Any]] = []
        try:
            stack = [self.root]
            while stack:
                node = stack.pop()
                if isinstance(node, Leaf):
                    if a < node.key < a + s and node.key < KEY_INF1:
                        out.append((node.key, node.value))
                    continue
                if a < node.key:
                    payload = node.left.read_at(handle.t)
                    reads.append((node.left, payload))
                    stack.append(payload)
                if node.key < a + s:
                    payload = node.right.read_at(handle.t)
                    reads.append((node.right, payload))
                    stack.append(payload)
        finally:
            worker.rtx_end(handle)
        if self.runtime.log is not None:
            self.runtime.log.record_rtx(handle.t, reads)
        out.sort()
        return out

    def root_cells(self) -> list:
        return [self.root.left, self.root.right]

    @staticmethod
    def cells_in_payload(payload) -> tuple:
        if isinstance(payload, Internal):
            return (payload.left, payload.right)
        return ()


# --- reachability measurement ------------------------------------------------

class ReachStats:
    __slots__ = ("cells", "version_nodes")

    def __init__(self, cells: int, version_nodes: int):
        self.cells = cells
        self.version_nodes = version_nodes

    def avg_list_length(self) -> float:
        return self.version_nodes / self.cells if self.cells else 0.0

    def __repr__(self):
        return (f"ReachStats(cells={self.cells}, nodes={self.version_nodes}, "
                f"avg={self.avg_list_length():.3f})")


def discover_cells(structure) -> list:
    """All version cells reachable from the structure roots through every
    retained version's payload (stale subtrees included). Quiescent only."""
    seen: dict = {}
    todo = list(structure.root_cells())
    while todo:
        cell = todo.pop()
        if id(cell) in seen:
            continue
        seen[id(cell)] = cell
        x = cell.list.head.get()
        while x is not cell.list.sentinel:
            todo.extend(structure.cells_in_payload(x.val))
            x = x.left.get()
    return list(seen.values())


def reachable_stats(structure) -> ReachStats:
    """Stop-the-world space measurement: reachable version nodes and the
    average version-list length over all discovered cells. Read-only, so
    back-to-back runs agree."""
    cells = discover_cells(structure)
    nodes = 0
    for cell in cells:
        nodes += len(cell.list.reachable_nodes())
    return ReachStats(cells=len(cells), version_nodes=nodes)


def reachable_node_ids(structure) -> set:
    """Identity set of reachable version nodes; used by the no-resurrection
    checks between quiescent phases."""
    out = set()
    for cell in discover_cells(structure):
        out.update(id(n) for n in cell.list.reachable_nodes())
    return out
