"""Doubly-linked version list: unit cases, oracle equivalence, interleavings."""

import random

from hypothesis import given, settings, strategies as st

from mvgc.atomics import run_steps
from mvgc.oracle import ReferenceList, explore_interleavings
from mvgc.pdl import PdlList, PdlNode, RemoveStats
from mvgc.timestamps import NEG_INF


def build(keys, sentinel_val="bottom"):
    lst = PdlList(sentinel_val)
    nodes = []
    for k in keys:
        node = PdlNode(k, f"v{k}.{len(nodes)}")
        assert lst.try_append(lst.head_node(), node)
        nodes.append(node)
    return lst, nodes


class TestPeekHead:
    def test_fresh_list_returns_sentinel_payload(self):
        lst = PdlList("bottom")
        assert lst.peek_head() == "bottom"

    def test_after_append(self):
        lst, nodes = build([3])
        assert lst.peek_head() == nodes[0].val


class TestSearch:
    def test_between_keys(self):
        lst, nodes = build([3, 8])
        assert lst.search(5) == nodes[0].val

    def test_exact_key(self):
        lst, nodes = build([3, 8])
        assert lst.search(8) == nodes[1].val

    def test_below_all_keys_returns_sentinel_payload(self):
        lst, _ = build([3, 8])
        assert lst.search(0) == "bottom"


class TestTryAppend:
    def test_fresh_list_append(self):
        lst = PdlList()
        y = PdlNode(1, "a")
        assert lst.try_append(lst.sentinel, y)
        assert lst.head_node() is y
        assert y.left.get() is lst.sentinel
        assert lst.sentinel.right.get() is y

    def test_stale_head_fails(self):
        lst, nodes = build([1])
        y = PdlNode(2, "b")
        assert not lst.try_append(lst.sentinel, y)
        assert lst.head_node() is nodes[0]

    def test_helps_unfinished_predecessor_append(self):
        lst = PdlList()
        x = PdlNode(1, "a")
        gen = lst._try_append_steps(lst.sentinel, x)
        label = next(gen)
        while label != "cas-set-right":  # stop once the head-CAS executed
            label = next(gen)
        assert lst.head_node() is x
        assert lst.sentinel.right.get() is None  # append left unfinished
        y = PdlNode(2, "b")
        assert lst.try_append(x, y)  # helps set sentinel.right first
        assert lst.sentinel.right.get() is x
        assert x.right.get() is y


class TestRemove:
    def test_interior_remove(self):
        lst, (a, b, c) = build([1, 2, 3])
        lst.remove(b)
        assert [n.ts for n in lst.reachable_nodes()] == [3, 1]
        assert c.left.get() is a
        assert a.right.get() is c
        assert b.mark

    def test_remove_chain_stats(self):
        lst, (a, b, c) = build([1, 2, 3])
        stats = RemoveStats()
        lst.remove(a, stats)
        assert stats.removes == 1
        assert stats.chain_total >= 1

    def test_sequential_removes_one_by_one(self):
        lst, nodes = build([1, 2, 3, 4, 5])
        order = [nodes[2], nodes[1], nodes[3], nodes[0]]
        for node in order:
            lst.remove(node)
        assert [n.ts for n in lst.reachable_nodes()] == [5]

    def test_search_traverses_half_removed_state(self):
        # A remove that completed only its left-CAS (the paused-remove state):
        # searches must still reach every unmarked node.
        lst, (a, b, c) = build([1, 2, 3])
        gen = lst._remove_steps(b)
        label = next(gen)
        while label != "cas-right":  # stop once cas-left executed
            label = next(gen)
        assert c.left.get() is a          # left-CAS done
        assert a.right.get() is b         # right-CAS still pending
        assert lst.search(1) == a.val
        assert lst.search(2) == a.val     # b is marked and gone from AL
        assert lst.search(3) == c.val
        run_steps(gen)
        assert a.right.get() is c


class TestConcurrentRemoves:
    def test_adjacent_removes_all_interleavings(self):
        def setup():
            lst, (a, b, c) = build([1, 2, 3])
            return (lst, a, b, c), [lst._remove_steps(a), lst._remove_steps(b)]

        def check(state, results):
            lst, a, b, c = state
            reachable = lst.reachable_nodes()
            assert [n.ts for n in reachable] == [3], \
                f"AL after removes: {[n.ts for n in reachable]}"

        result = explore_interleavings(setup, check, exhaustive_step_limit=24)
        assert result.exhaustive
        assert result.schedules > 1000
        assert result.ok, result.violations[:3]

    def test_concurrent_appends_exactly_one_wins(self):
        def setup():
            lst = PdlList()
            y1 = PdlNode(1, "y1")
            y2 = PdlNode(1, "y2")
            s = lst.sentinel
            return (lst, y1, y2), [
                lst._try_append_steps(s, y1),
                lst._try_append_steps(s, y2),
            ]

        def check(state, results):
            lst, y1, y2 = state
            assert sorted(results) == [False, True]
            winner = y1 if results[0] else y2
            assert lst.head_node() is winner
            assert [n.ts for n in lst.reachable_nodes()] == [1]

        result = explore_interleavings(setup, check)
        assert result.exhaustive
        assert result.ok, result.violations[:3]


def _random_sequential_case(rng):
    lst = PdlList("bottom")
    ref = ReferenceList("bottom")
    live = []  # (node, ref index), excluding current head
    key = 0
    for _ in range(rng.randint(1, 40)):
        op = rng.random()
        head = lst.head_node()
        if op < 0.5 or not live:
            key += rng.randint(0, 3)
            node = PdlNode(key, f"v{key}.{rng.random():.4f}")
            assert lst.try_append(head, node)
            idx = ref.append(key, node.val)
            if head is not lst.sentinel:
                live.append(None)  # placeholder to keep indexing simple
            live.append((node, idx))
        elif op < 0.75:
            # remove any node that is not the current head
            candidates = [e for e in live if e is not None and e[0] is not head]
            if candidates:
                node, idx = candidates[rng.randrange(len(candidates))]
                live[live.index((node, idx))] = None
                lst.remove(node)
                ref.remove(idx)
        else:
            probe = rng.randint(-1, key + 2)
            assert lst.search(probe) == ref.floor(probe)
    return lst, ref


def test_sequential_equivalence_random_ops():
    rng = random.Random(2024)
    for _ in range(300):
        lst, ref = _random_sequential_case(rng)
        assert [v for _, v in reversed(ref.live_in_order())] == \
            [n.val for n in lst.reachable_nodes()]
        for probe in range(-1, 25):
            assert lst.search(probe) == ref.floor(probe)


@given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=12),
       st.integers(min_value=0, max_value=40))
@settings(max_examples=60, deadline=None)
def test_search_matches_floor_lookup(increments, probe):
    lst = PdlList("bottom")
    ref = ReferenceList("bottom")
    key = 1
    for inc in increments:
        key += inc
        node = PdlNode(key, f"v{key}")
        lst.try_append(lst.head_node(), node)
        ref.append(key, node.val)
    assert lst.search(probe) == ref.floor(probe)


def test_left_cas_monotone_and_no_resurrection():
    # Quiescent exactness under randomized interleaved appends/removes, with
    # append-index assertions on every left link.
    rng = random.Random(7)
    for _ in range(100):
        lst, nodes = build(sorted(rng.randint(1, 9) for _ in range(8)))
        removed = set()
        for node in rng.sample(nodes, 5):
            if node is lst.head_node():
                continue
            lst.remove(node)
            removed.add(id(node))
        reachable = lst.reachable_nodes()
        assert all(id(n) not in removed for n in reachable)
        seqs = [n.seq for n in reachable] + [0]
        assert seqs == sorted(seqs, reverse=True)  # ordered by append index
        expected = [n for n in reversed(nodes) if id(n) not in removed]
        assert reachable == expected
