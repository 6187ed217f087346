"""Disk-backed solution store: provenance log, frontier files, pruning.

Solutions are never materialized as vertex/edge sets during the DP.
Each table entry carries a solution id pointing into ``origin.bin``, an
append-only log of 16-byte records (two little-endian 64-bit words)::

    word A   bits 63..62  tag        00 INTRODUCE  (a = base id, b = element)
                                     01 JOIN       (a = left id, b = right id)
                                     10 SKIPPED-INTRO (a = base id,
                                        b = node id | bag-position mask << 32)
                                     11 RELOCATED  (a = new id; tombstone)
             bit  61      mark bit   0 at rest, set transiently while pruning
             bits 60..0   id payload
    word B   64-bit payload (element / right id / node+mask / zero)

Record ``k`` lives at byte offset ``16*k`` and its id is ``k``.  The id
``EMPTY`` (2**62 - 1) denotes the empty solution; since the payload
field is 61 bits wide it is stored as the all-ones 61-bit pattern, and
real ids must stay below 2**61 - 1.

Frontier files ``frontiers/node<t>_key<hex>.sp`` hold one table's front
as fixed-width records (id, then d signed fixed-point values) in front
order; empty fronts are elided (no file).

``prune`` compacts the log in place with O(1) auxiliary disk: a mark
phase flags records reachable from the live frontier ids, then a
relocation phase moves marked records from slots >= n into the unmarked
slots below n (leaving RELOCATED tombstones behind), rewrites child
pointers, clears marks, truncates to n records and rewrites the live
frontier files.  Appends keep references pointing at strictly smaller
ids; relocation preserves acyclicity but not that monotonicity, so
reconstruction never relies on it.
"""

from __future__ import annotations

import json
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .fronts import EMPTY_SOLUTION as EMPTY
from .fronts import Front

TAG_INTRODUCE = 0
TAG_JOIN = 1
TAG_SKIPPED = 2
TAG_RELOCATED = 3

_MARK_BIT = 1 << 61
_PAYLOAD_MASK = (1 << 61) - 1
_EMPTY_PAYLOAD = (1 << 61) - 1
MAX_ID = _EMPTY_PAYLOAD - 1

_WORDS = struct.Struct("<QQ")
RECORD_SIZE = _WORDS.size


def _encode_id(sid: int) -> int:
    if sid == EMPTY:
        return _EMPTY_PAYLOAD
    if not 0 <= sid <= MAX_ID:
        raise ValueError(f"solution id {sid} out of the 61-bit payload range")
    return sid


def _decode_id(payload: int) -> int:
    return EMPTY if payload == _EMPTY_PAYLOAD else payload


@dataclass(frozen=True)
class Record:
    tag: int
    a: int  # id payload (decoded)
    b: int  # raw word B

    @staticmethod
    def introduce(base: int, element: int) -> "Record":
        return Record(TAG_INTRODUCE, base, element)

    @staticmethod
    def join(left: int, right: int) -> "Record":
        return Record(TAG_JOIN, left, _encode_id(right))

    @staticmethod
    def skipped(base: int, node: int, mask: int) -> "Record":
        if not 0 <= node < 1 << 32 or not 0 <= mask < 1 << 32:
            raise ValueError("node id and bag mask must fit 32 bits")
        return Record(TAG_SKIPPED, base, node | mask << 32)

    @staticmethod
    def relocated(new_id: int) -> "Record":
        return Record(TAG_RELOCATED, new_id, 0)

    def child_ids(self) -> tuple[int, ...]:
        if self.tag in (TAG_INTRODUCE, TAG_SKIPPED):
            return (self.a,)
        if self.tag == TAG_JOIN:
            return (self.a, _decode_id(self.b))
        return ()

    def with_children(self, kids: tuple[int, ...]) -> "Record":
        if self.tag in (TAG_INTRODUCE, TAG_SKIPPED):
            return Record(self.tag, kids[0], self.b)
        if self.tag == TAG_JOIN:
            return Record(self.tag, kids[0], _encode_id(kids[1]))
        return self

    def pack(self, mark: bool = False) -> bytes:
        word_a = self.tag << 62 | _encode_id(self.a)
        if mark:
            word_a |= _MARK_BIT
        return _WORDS.pack(word_a, self.b)

    @staticmethod
    def unpack(raw: bytes) -> tuple["Record", bool]:
        word_a, word_b = _WORDS.unpack(raw)
        tag = word_a >> 62
        mark = bool(word_a & _MARK_BIT)
        return Record(tag, _decode_id(word_a & _PAYLOAD_MASK), word_b), mark


@dataclass
class PruneStats:
    records_before: int = 0
    reachable: int = 0
    bytes_after: int = 0
    frontier_files: int = 0
    idmap: dict[int, int] = field(default_factory=dict)


class StoreError(RuntimeError):
    pass


class SolutionStore:
    """One solve's solution store rooted at a directory."""

    def __init__(self, root: str | Path, d: int | None = None, create: bool = True):
        self.root = Path(root)
        self.frontier_dir = self.root / "frontiers"
        meta_path = self.root / "meta.json"
        if create:
            self.frontier_dir.mkdir(parents=True, exist_ok=True)
        if meta_path.exists():
            self.meta = json.loads(meta_path.read_text())
            if d is not None and self.meta.get("d") != d:
                raise StoreError(
                    f"store was created with d={self.meta.get('d')}, reopened with d={d}"
                )
        else:
            if d is None:
                raise StoreError("new store needs the objective count d")
            self.meta = {"d": d}
            self._write_meta()
        self.d = int(self.meta["d"])
        flags = os.O_RDWR | (os.O_CREAT if create else 0)
        self._fd = os.open(self.root / "origin.bin", flags, 0o644)
        size = os.fstat(self._fd).st_size
        if size % RECORD_SIZE:
            raise StoreError("origin.bin truncated mid-record")
        self._count = size // RECORD_SIZE
        self._tail = bytearray()  # appended but unflushed records
        self._lock = threading.Lock()
        self._frontier_struct = struct.Struct(f"<Q{self.d}q")

    # -- meta ---------------------------------------------------------

    def _write_meta(self) -> None:
        (self.root / "meta.json").write_text(json.dumps(self.meta, sort_keys=True) + "\n")

    def set_meta(self, **kw) -> None:
        self.meta.update(kw)
        self._write_meta()

    # -- origin log ---------------------------------------------------

    @property
    def count(self) -> int:
        return self._count

    def log_bytes(self) -> int:
        return self._count * RECORD_SIZE

    def append(self, rec: Record) -> int:
        return self.append_batch([rec])

    def append_batch(self, recs: list[Record]) -> int:
        """Append records atomically; returns the first id of the
        contiguous range assigned to them."""
        if not recs:
            return self._count
        blob = b"".join(r.pack() for r in recs)
        with self._lock:
            first = self._count
            self._tail += blob
            self._count += len(recs)
        return first

    def flush(self) -> None:
        with self._lock:
            if self._tail:
                os.pwrite(self._fd, bytes(self._tail), self._flushed_bytes())
                self._tail.clear()

    def _flushed_bytes(self) -> int:
        return self._count * RECORD_SIZE - len(self._tail)

    def _read_raw(self, sid: int) -> bytes:
        off = sid * RECORD_SIZE
        with self._lock:
            flushed = self._flushed_bytes()
            if off >= flushed:
                k = off - flushed
                return bytes(self._tail[k : k + RECORD_SIZE])
        raw = os.pread(self._fd, RECORD_SIZE, off)
        if len(raw) != RECORD_SIZE:
            raise StoreError(f"record {sid} out of range")
        return raw

    def read_record(self, sid: int) -> Record:
        if not 0 <= sid < self._count:
            raise StoreError(f"record {sid} out of range (count {self._count})")
        rec, _ = Record.unpack(self._read_raw(sid))
        return rec

    def close(self) -> None:
        self.flush()
        os.close(self._fd)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- frontier files -----------------------------------------------

    def frontier_path(self, node: int, key_hex: str) -> Path:
        return self.frontier_dir / f"node{node}_key{key_hex}.sp"

    def write_frontier(self, node: int, key_hex: str, front: Front) -> None:
        path = self.frontier_path(node, key_hex)
        if not front:
            path.unlink(missing_ok=True)  # empty fronts are elided
            return
        pack = self._frontier_struct.pack
        with open(path, "wb") as fh:
            for vec, sid in front:
                fh.write(pack(_encode_id(sid), *vec))

    def read_frontier(self, node: int, key_hex: str) -> Front:
        return self.read_frontier_file(self.frontier_path(node, key_hex))

    def read_frontier_file(self, path: Path) -> Front:
        if not path.exists():
            return []
        raw = path.read_bytes()
        rs = self._frontier_struct
        if len(raw) % rs.size:
            raise StoreError(f"frontier file {path.name} truncated mid-record")
        front: Front = []
        for off in range(0, len(raw), rs.size):
            fields = rs.unpack_from(raw, off)
            front.append((tuple(fields[1:]), _decode_id(fields[0])))
        return front

    def delete_frontier(self, node: int, key_hex: str) -> None:
        self.frontier_path(node, key_hex).unlink(missing_ok=True)

    def list_frontier_files(self) -> list[Path]:
        return sorted(self.frontier_dir.glob("node*_key*.sp"))

    # -- reconstruction -------------------------------------------------

    def reconstruct(
        self,
        sid: int,
        skipped_resolver=None,
        memo: dict | None = None,
    ) -> tuple[int, ...]:
        """Expand a solution id into its sorted element tuple.

        ``skipped_resolver(node_id, mask)`` decodes a SKIPPED-INTRO
        record's bag-position mask into element ids; solvers provide a
        closure over the decomposition's bags.
        """
        if memo is None:
            memo = {}
        self.flush()
        stack = [sid]
        while stack:
            x = stack[-1]
            if x == EMPTY or x in memo:
                stack.pop()
                continue
            rec = self.read_record(x)
            if rec.tag == TAG_RELOCATED:
                if rec.a == EMPTY or rec.a in memo:
                    memo[x] = memo.get(rec.a, frozenset())
                    stack.pop()
                else:
                    stack.append(rec.a)
                continue
            kids = rec.child_ids()
            missing = [k for k in kids if k != EMPTY and k not in memo]
            if missing:
                stack.extend(missing)
                continue
            parts = [memo.get(k, frozenset()) for k in kids]
            if rec.tag == TAG_INTRODUCE:
                memo[x] = parts[0] | {rec.b}
            elif rec.tag == TAG_JOIN:
                memo[x] = parts[0] | parts[1]
            else:  # SKIPPED-INTRO
                node = rec.b & 0xFFFFFFFF
                mask = rec.b >> 32
                if skipped_resolver is None:
                    raise StoreError(
                        "SKIPPED-INTRO record needs a resolver to decode its bag mask"
                    )
                memo[x] = parts[0] | set(skipped_resolver(node, mask))
            stack.pop()
        if sid == EMPTY:
            return ()
        return tuple(sorted(memo[sid]))

    def reconstruct_frontier(self, path: Path, skipped_resolver=None):
        """Yield (vector, sorted element tuple) per entry, in file order."""
        memo: dict = {}
        for vec, sid in self.read_frontier_file(path):
            yield vec, self.reconstruct(sid, skipped_resolver, memo)

    # -- pruning --------------------------------------------------------

    def prune(self, live_files: list[Path] | None = None, extra_roots=()) -> PruneStats:
        """Two-phase in-place compaction keeping only records reachable
        from the live frontier files (all existing ones by default) plus
        ``extra_roots``.  Returns statistics and the old->new id map;
        live frontier files are rewritten with updated ids."""
        self.flush()
        if live_files is None:
            live_files = self.list_frontier_files()
        roots: list[int] = []
        for path in live_files:
            roots.extend(sid for _, sid in self.read_frontier_file(path))
        roots.extend(extra_roots)
        stats = PruneStats(records_before=self._count)

        # phase 1: mark reachable records
        reachable = 0
        stack = [r for r in sorted(set(roots)) if r != EMPTY]
        while stack:
            x = stack.pop()
            raw = self._read_raw(x)
            rec, mark = Record.unpack(raw)
            if mark:
                continue
            os.pwrite(self._fd, rec.pack(mark=True), x * RECORD_SIZE)
            reachable += 1
            stack.extend(k for k in rec.child_ids() if k != EMPTY)
        n = reachable
        stats.reachable = n
        stats.bytes_after = n * RECORD_SIZE

        # phase 2: relocate marked records >= n into unmarked slots < n,
        # rewriting child pointers and clearing marks as we go
        free: list[int] = []
        for slot in range(n):
            _, mark = Record.unpack(self._read_raw(slot))
            if not mark:
                free.append(slot)
        free.reverse()  # pop() yields ascending slots
        newid: dict[int, int] = {}
        for root_id in sorted(set(roots)):
            if root_id == EMPTY:
                continue
            walk = [(root_id, False)]
            while walk:
                x, expanded = walk.pop()
                if x in newid:
                    continue
                rec, mark = Record.unpack(self._read_raw(x))
                if not expanded:
                    walk.append((x, True))
                    walk.extend(
                        (k, False) for k in rec.child_ids() if k != EMPTY
                    )
                    continue
                moved = rec.with_children(
                    tuple(newid[k] if k != EMPTY else EMPTY for k in rec.child_ids())
                )
                if x < n:
                    target = x
                else:
                    target = free.pop()
                    os.pwrite(self._fd, Record.relocated(target).pack(), x * RECORD_SIZE)
                os.pwrite(self._fd, moved.pack(), target * RECORD_SIZE)
                newid[x] = target

        os.ftruncate(self._fd, n * RECORD_SIZE)
        self._count = n
        stats.idmap = newid

        for path in live_files:
            front = self.read_frontier_file(path)
            remapped = [
                (vec, newid[sid] if sid != EMPTY else EMPTY) for vec, sid in front
            ]
            pack = self._frontier_struct.pack
            with open(path, "wb") as fh:
                for vec, sid in remapped:
                    fh.write(pack(_encode_id(sid), *vec))
            stats.frontier_files += 1
        return stats
