"""Append-only origin log, frontier files, reconstruction, pruning."""

import pytest

from treefront.fronts import EMPTY_SOLUTION
from treefront.store import (
    RECORD_SIZE,
    TAG_INTRODUCE,
    TAG_JOIN,
    TAG_SKIPPED,
    PruneStats,
    Record,
    SolutionStore,
    StoreError,
)

E = EMPTY_SOLUTION


def make_store(tmp_path, d=2):
    return SolutionStore(tmp_path / "store", d=d)


class TestRecords:
    def test_record_size(self):
        assert RECORD_SIZE == 16
        assert len(Record.join(3, 5).pack()) == 16

    def test_join_round_trips_bit_exactly(self):
        rec = Record.join(3, 5)
        again, mark = Record.unpack(rec.pack())
        assert again == rec
        assert mark is False
        assert again.child_ids() == (3, 5)

    def test_mark_bit_survives(self):
        rec = Record.introduce(E, 42)
        again, mark = Record.unpack(rec.pack(mark=True))
        assert again == rec
        assert mark is True

    def test_skipped_packs_node_and_mask(self):
        rec = Record.skipped(7, node=12, mask=0b1010)
        assert rec.tag == TAG_SKIPPED
        assert rec.b & 0xFFFFFFFF == 12
        assert rec.b >> 32 == 0b1010
        assert rec.child_ids() == (7,)


class TestOriginLog:
    def test_first_append_is_id_zero(self, tmp_path):
        with make_store(tmp_path) as store:
            assert store.append(Record.introduce(E, 1)) == 0
            assert store.append(Record.introduce(E, 2)) == 1

    def test_record_k_lives_at_offset_16k(self, tmp_path):
        store = make_store(tmp_path)
        recs = [Record.introduce(E, 10 + i) for i in range(5)]
        store.append_batch(recs)
        store.flush()
        raw = (tmp_path / "store" / "origin.bin").read_bytes()
        for k, rec in enumerate(recs):
            segment = raw[k * RECORD_SIZE : (k + 1) * RECORD_SIZE]
            assert Record.unpack(segment)[0] == rec
            assert store.read_record(k) == rec
        store.close()

    def test_log_bytes(self, tmp_path):
        with make_store(tmp_path) as store:
            store.append_batch([Record.introduce(E, 1)] * 3)
            assert store.log_bytes() == 48

    def test_reopen_existing(self, tmp_path):
        store = make_store(tmp_path)
        store.append(Record.introduce(E, 9))
        store.flush()
        store.close()
        again = SolutionStore(tmp_path / "store", create=False)
        assert again.count == 1
        assert again.read_record(0) == Record.introduce(E, 9)
        again.close()

    def test_d_mismatch_rejected(self, tmp_path):
        make_store(tmp_path, d=2).close()
        with pytest.raises(StoreError, match="d="):
            SolutionStore(tmp_path / "store", d=3)

    def test_truncated_log_rejected(self, tmp_path):
        store = make_store(tmp_path)
        store.append(Record.introduce(E, 1))
        store.flush()
        store.close()
        path = tmp_path / "store" / "origin.bin"
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(StoreError, match="truncated"):
            SolutionStore(tmp_path / "store", create=False)

    def test_meta_round_trip(self, tmp_path):
        store = make_store(tmp_path)
        store.set_meta(problem="stcut", n=7)
        store.close()
        again = SolutionStore(tmp_path / "store", create=False)
        assert again.meta["problem"] == "stcut"
        assert again.meta["n"] == 7
        again.close()


class TestFrontiers:
    def test_write_read_identity(self, tmp_path):
        with make_store(tmp_path) as store:
            front = [((1, 5), 0), ((2, 4), 3), ((9, 1), E)]
            store.write_frontier(4, "00aa", front)
            assert store.read_frontier(4, "00aa") == front

    def test_empty_front_elided(self, tmp_path):
        with make_store(tmp_path) as store:
            store.write_frontier(4, "00aa", [((1, 1), 0)])
            store.write_frontier(4, "00aa", [])
            assert not store.frontier_path(4, "00aa").exists()
            assert store.read_frontier(4, "00aa") == []

    def test_list_frontier_files_sorted(self, tmp_path):
        with make_store(tmp_path) as store:
            store.write_frontier(2, "0b", [((1, 1), 0)])
            store.write_frontier(1, "0a", [((1, 1), 0)])
            names = [p.name for p in store.list_frontier_files()]
            assert names == sorted(names)


class TestReconstruct:
    def test_empty_sentinel(self, tmp_path):
        with make_store(tmp_path) as store:
            assert store.reconstruct(E) == ()

    def test_single_introduce(self, tmp_path):
        with make_store(tmp_path) as store:
            sid = store.append(Record.introduce(E, 5))
            assert store.reconstruct(sid) == (5,)

    def test_join_is_union(self, tmp_path):
        with make_store(tmp_path) as store:
            a = store.append(Record.introduce(E, 1))
            b = store.append(Record.introduce(a, 2))
            c = store.append(Record.introduce(E, 7))
            j = store.append(Record.join(b, c))
            assert store.reconstruct(j) == (1, 2, 7)

    def test_skipped_applies_resolver(self, tmp_path):
        with make_store(tmp_path) as store:
            base = store.append(Record.introduce(E, 1))
            sk = store.append(Record.skipped(base, node=9, mask=0b0110))
            seen = {}

            def resolver(node, mask):
                seen["args"] = (node, mask)
                return (20, 30)

            assert store.reconstruct(sk, resolver) == (1, 20, 30)
            assert seen["args"] == (9, 0b0110)

    def test_skipped_without_resolver_raises(self, tmp_path):
        with make_store(tmp_path) as store:
            sk = store.append(Record.skipped(E, node=9, mask=1))
            with pytest.raises(StoreError, match="resolver"):
                store.reconstruct(sk)

    def test_deep_chain_no_recursion_limit(self, tmp_path):
        with make_store(tmp_path) as store:
            sid = E
            for v in range(1, 3001):
                sid = store.append(Record.introduce(sid, v))
            assert store.reconstruct(sid) == tuple(range(1, 3001))


class TestPrune:
    def test_three_records_one_reachable(self, tmp_path):
        with make_store(tmp_path) as store:
            keep = store.append(Record.introduce(E, 7))
            store.append(Record.introduce(E, 8))
            store.append(Record.introduce(keep, 9))
            store.write_frontier(1, "00", [((1, 1), keep)])
            stats = store.prune()
            assert isinstance(stats, PruneStats)
            assert stats.records_before == 3
            assert stats.reachable == 1
            assert stats.bytes_after == 16
            assert store.log_bytes() == 16
            [(vec, sid)] = store.read_frontier(1, "00")
            assert store.reconstruct(sid) == (7,)

    def test_all_reachable_unchanged(self, tmp_path):
        with make_store(tmp_path) as store:
            a = store.append(Record.introduce(E, 1))
            b = store.append(Record.introduce(a, 2))
            store.write_frontier(1, "00", [((1, 1), b)])
            before = [store.read_record(i) for i in range(2)]
            stats = store.prune()
            assert stats.reachable == 2
            assert [store.read_record(i) for i in range(2)] == before
            [(_, sid)] = store.read_frontier(1, "00")
            assert store.reconstruct(sid) == (1, 2)

    def test_diamond_base_stored_once(self, tmp_path):
        with make_store(tmp_path) as store:
            store.append(Record.introduce(E, 99))  # garbage
            base = store.append(Record.introduce(E, 5))
            left = store.append(Record.introduce(base, 6))
            right = store.append(Record.introduce(base, 7))
            store.write_frontier(2, "0f", [((1, 2), left), ((2, 1), right)])
            before = [
                store.reconstruct(sid) for _, sid in store.read_frontier(2, "0f")
            ]
            stats = store.prune()
            assert stats.reachable == 3  # base shared, not duplicated
            assert store.log_bytes() == 48
            after = [
                store.reconstruct(sid) for _, sid in store.read_frontier(2, "0f")
            ]
            assert after == before == [(5, 6), (5, 7)]

    def test_extra_roots_survive(self, tmp_path):
        with make_store(tmp_path) as store:
            a = store.append(Record.introduce(E, 1))
            store.append(Record.introduce(E, 2))
            stats = store.prune(extra_roots=[a])
            assert stats.reachable == 1
            assert store.reconstruct(stats.idmap[a]) == (1,)
