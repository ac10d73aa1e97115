"""Copy-on-write segmented tree of neighbor blocks.

A neighbor set is an immutable value: a small prefix block plus a
path-copied balanced tree of blocks.  Keys divisible by the block size B
are heads; a head's block holds the head itself and every following member
below the next head.  Members smaller than the first head live in the
prefix block.  Blocks store members difference encoded, each value a
base-128 varint: the first member absolute, the rest as offsets from it.

Updates build a new value sharing every untouched node with the old one,
so readers holding an old root never see a change.  A mutable wrapper
(`CowRootContainer`) adapts the value type to the common container
interface by keeping per-vertex root history.
"""

from __future__ import annotations

import hashlib

from ..errors import BlockCodecError
from ..versioning import COW_ELEMENT_WORDS

# -- varint delta codec ----------------------------------------------------


def encode_block(keys) -> bytes:
    """First member absolute, the rest as deltas from the first member."""
    buf = bytearray()
    v0 = keys[0]
    x = v0
    while x >= 0x80:
        buf.append((x & 0x7F) | 0x80)
        x >>= 7
    buf.append(x)
    for k in keys[1:]:
        x = k - v0
        while x >= 0x80:
            buf.append((x & 0x7F) | 0x80)
            x >>= 7
        buf.append(x)
    return bytes(buf)


def decode_block(data: bytes) -> list[int]:
    vals: list[int] = []
    i = 0
    n = len(data)
    first = None
    while i < n:
        x = 0
        shift = 0
        while True:
            if i >= n:
                raise BlockCodecError("truncated varint in neighbor block")
            b = data[i]
            i += 1
            x |= (b & 0x7F) << shift
            if not b & 0x80:
                break
            shift += 7
        if first is None:
            first = x
            vals.append(x)
        else:
            vals.append(first + x)
    if first is None:
        raise BlockCodecError("empty neighbor block")
    return vals


# -- persistent AVL tree -----------------------------------------------------


class TreeNode:
    __slots__ = ("key", "value", "left", "right", "height")

    def __init__(self, key, value, left, right, height):
        self.key = key
        self.value = value
        self.left = left
        self.right = right
        self.height = height


def _h(node) -> int:
    return node.height if node is not None else 0


def _mk(key, value, left, right) -> TreeNode:
    return TreeNode(key, value, left, right, 1 + max(_h(left), _h(right)))


def _balance(key, value, left, right) -> TreeNode:
    hl, hr = _h(left), _h(right)
    if hl > hr + 1:
        if _h(left.left) >= _h(left.right):
            return _mk(left.key, left.value, left.left, _mk(key, value, left.right, right))
        lr = left.right
        return _mk(
            lr.key,
            lr.value,
            _mk(left.key, left.value, left.left, lr.left),
            _mk(key, value, lr.right, right),
        )
    if hr > hl + 1:
        if _h(right.right) >= _h(right.left):
            return _mk(right.key, right.value, _mk(key, value, left, right.left), right.right)
        rl = right.left
        return _mk(
            rl.key,
            rl.value,
            _mk(key, value, left, rl.left),
            _mk(right.key, right.value, rl.right, right.right),
        )
    return _mk(key, value, left, right)


def tree_insert(node: TreeNode | None, key, value) -> TreeNode:
    """Insert or replace; returns a new root, sharing untouched subtrees."""
    if node is None:
        return _mk(key, value, None, None)
    if key == node.key:
        return _mk(key, value, node.left, node.right)
    if key < node.key:
        return _balance(node.key, node.value, tree_insert(node.left, key, value), node.right)
    return _balance(node.key, node.value, node.left, tree_insert(node.right, key, value))


def tree_delete(node: TreeNode | None, key) -> TreeNode | None:
    if node is None:
        return None
    if key < node.key:
        return _balance(node.key, node.value, tree_delete(node.left, key), node.right)
    if key > node.key:
        return _balance(node.key, node.value, node.left, tree_delete(node.right, key))
    if node.left is None:
        return node.right
    if node.right is None:
        return node.left
    skey, sval, right2 = _pop_min(node.right)
    return _balance(skey, sval, node.left, right2)


def _pop_min(node: TreeNode):
    if node.left is None:
        return node.key, node.value, node.right
    k, v, left2 = _pop_min(node.left)
    return k, v, _balance(node.key, node.value, left2, node.right)


def tree_get(node: TreeNode | None, key):
    while node is not None:
        if key == node.key:
            return node.value
        node = node.left if key < node.key else node.right
    return None


def tree_pred(node: TreeNode | None, key):
    """(k, value) with the greatest k <= key, or None."""
    best = None
    while node is not None:
        if node.key == key:
            return node.key, node.value
        if node.key < key:
            best = (node.key, node.value)
            node = node.right
        else:
            node = node.left
    return best


def tree_items(node: TreeNode | None):
    stack = []
    while node is not None or stack:
        while node is not None:
            stack.append(node)
            node = node.left
        node = stack.pop()
        yield node.key, node.value
        node = node.right


def tree_from_pairs(pairs) -> TreeNode | None:
    """Balanced build from sorted (key, value) pairs."""
    pairs = list(pairs)

    def build(lo, hi):
        if lo >= hi:
            return None
        mid = (lo + hi) // 2
        k, v = pairs[mid]
        return _mk(k, v, build(lo, mid), build(mid + 1, hi))

    return build(0, len(pairs))


def tree_size(node: TreeNode | None) -> int:
    return 0 if node is None else 1 + tree_size(node.left) + tree_size(node.right)


def tree_check(node: TreeNode | None, lo=None, hi=None) -> None:
    if node is None:
        return
    assert (lo is None or node.key > lo) and (hi is None or node.key < hi)
    assert abs(_h(node.left) - _h(node.right)) <= 1, "tree out of balance"
    assert node.height == 1 + max(_h(node.left), _h(node.right))
    tree_check(node.left, lo, node.key)
    tree_check(node.right, node.key, hi)


# -- immutable neighbor set ---------------------------------------------------


def _pack(keys: list[int], encode: bool):
    return encode_block(keys) if encode else tuple(keys)


def _unpack(block) -> list[int]:
    return decode_block(block) if isinstance(block, bytes) else list(block)


def _bisect(vals: list[int], key: int) -> int:
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) >> 1
        if vals[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


class CowNeighbors:
    """Immutable neighbor set; every update returns a fresh value."""

    __slots__ = ("B", "encode", "prefix", "root", "count")

    def __init__(self, B: int, encode: bool, prefix, root, count: int):
        self.B = B
        self.encode = encode
        self.prefix = prefix  # packed block of members below the first head, or None
        self.root = root      # TreeNode: head -> packed block
        self.count = count

    @classmethod
    def empty(cls, B: int, encode: bool = True) -> "CowNeighbors":
        return cls(B, encode, None, None, 0)

    @classmethod
    def from_sorted(cls, keys, B: int, encode: bool = True) -> "CowNeighbors":
        keys = list(keys)
        pre: list[int] = []
        blocks: list[tuple[int, list[int]]] = []
        for k in keys:
            if k % B == 0:
                blocks.append((k, [k]))
            elif blocks:
                blocks[-1][1].append(k)
            else:
                pre.append(k)
        root = tree_from_pairs((h, _pack(vals, encode)) for h, vals in blocks)
        return cls(B, encode, _pack(pre, encode) if pre else None, root, len(keys))

    # -- reads -------------------------------------------------------------

    def contains(self, key: int) -> bool:
        if key % self.B == 0:
            return tree_get(self.root, key) is not None
        holder = tree_pred(self.root, key)
        block = holder[1] if holder is not None else self.prefix
        if block is None:
            return False
        vals = _unpack(block)
        pos = _bisect(vals, key)
        return pos < len(vals) and vals[pos] == key

    def scan(self) -> list[int]:
        out: list[int] = []
        if self.prefix is not None:
            out.extend(_unpack(self.prefix))
        for _head, block in tree_items(self.root):
            out.extend(_unpack(block))
        return out

    # -- updates -----------------------------------------------------------

    def insert(self, key: int) -> "CowNeighbors":
        B = self.B
        if key % B == 0:
            if tree_get(self.root, key) is not None:
                return self
            # carve members >= key out of whichever block held that range
            holder = tree_pred(self.root, key)
            if holder is not None:
                hkey, block = holder
                vals = _unpack(block)
                pos = _bisect(vals, key)
                moved = vals[pos:]
                root = tree_insert(self.root, hkey, _pack(vals[:pos], self.encode))
            elif self.prefix is not None:
                vals = _unpack(self.prefix)
                pos = _bisect(vals, key)
                moved = vals[pos:]
                root = self.root
                new_prefix = _pack(vals[:pos], self.encode) if pos else None
                root = tree_insert(root, key, _pack([key] + moved, self.encode))
                return CowNeighbors(B, self.encode, new_prefix, root, self.count + 1)
            else:
                moved = []
                root = self.root
            root = tree_insert(root, key, _pack([key] + moved, self.encode))
            return CowNeighbors(B, self.encode, self.prefix, root, self.count + 1)
        holder = tree_pred(self.root, key)
        if holder is not None:
            hkey, block = holder
            vals = _unpack(block)
            pos = _bisect(vals, key)
            if pos < len(vals) and vals[pos] == key:
                return self
            vals.insert(pos, key)
            root = tree_insert(self.root, hkey, _pack(vals, self.encode))
            return CowNeighbors(B, self.encode, self.prefix, root, self.count + 1)
        vals = _unpack(self.prefix) if self.prefix is not None else []
        pos = _bisect(vals, key)
        if pos < len(vals) and vals[pos] == key:
            return self
        vals.insert(pos, key)
        return CowNeighbors(B, self.encode, _pack(vals, self.encode), self.root, self.count + 1)

    def delete(self, key: int) -> "CowNeighbors":
        B = self.B
        if key % B == 0:
            block = tree_get(self.root, key)
            if block is None:
                return self
            residue = _unpack(block)[1:]
            root = tree_delete(self.root, key)
            prefix = self.prefix
            if residue:
                # fold the survivors into the block that now owns their range
                holder = tree_pred(root, key)
                if holder is not None:
                    hkey, hblock = holder
                    vals = _unpack(hblock) + residue
                    root = tree_insert(root, hkey, _pack(vals, self.encode))
                else:
                    vals = (_unpack(prefix) if prefix is not None else []) + residue
                    prefix = _pack(vals, self.encode)
            return CowNeighbors(B, self.encode, prefix, root, self.count - 1)
        holder = tree_pred(self.root, key)
        if holder is not None:
            hkey, block = holder
            vals = _unpack(block)
            pos = _bisect(vals, key)
            if pos >= len(vals) or vals[pos] != key:
                return self
            del vals[pos]
            root = tree_insert(self.root, hkey, _pack(vals, self.encode))
            return CowNeighbors(B, self.encode, self.prefix, root, self.count - 1)
        if self.prefix is None:
            return self
        vals = _unpack(self.prefix)
        pos = _bisect(vals, key)
        if pos >= len(vals) or vals[pos] != key:
            return self
        del vals[pos]
        prefix = _pack(vals, self.encode) if vals else None
        return CowNeighbors(B, self.encode, prefix, self.root, self.count - 1)

    def apply_many(self, items) -> "CowNeighbors":
        """Fold (key, is_delete) ops in order; rebuilds wholesale when the
        batch is large relative to the set."""
        items = list(items)
        if len(items) * 4 >= max(self.count, 1):
            members = set(self.scan())
            for key, is_delete in items:
                if is_delete:
                    members.discard(key)
                else:
                    members.add(key)
            return CowNeighbors.from_sorted(sorted(members), self.B, self.encode)
        value = self
        for key, is_delete in items:
            value = value.delete(key) if is_delete else value.insert(key)
        return value

    # -- introspection -------------------------------------------------------

    def check_invariants(self) -> None:
        tree_check(self.root)
        first_head = None
        for head, _block in tree_items(self.root):
            if first_head is None:
                first_head = head
            assert head % self.B == 0, "non-prefix block with unaligned head"
        seen = 0
        if self.prefix is not None:
            vals = _unpack(self.prefix)
            assert vals == sorted(set(vals))
            assert first_head is None or vals[-1] < first_head
            assert all(v % self.B != 0 for v in vals), "head hiding in the prefix"
            seen += len(vals)
        prev_last = None
        for head, block in tree_items(self.root):
            vals = _unpack(block)
            assert vals[0] == head
            assert vals == sorted(set(vals))
            if prev_last is not None:
                assert prev_last < head
            prev_last = vals[-1]
            seen += len(vals)
        assert seen == self.count

    def structural_digest(self) -> str:
        h = hashlib.sha256()
        if self.prefix is not None:
            h.update(b"P" + _as_bytes(self.prefix))
        for head, block in tree_items(self.root):
            h.update(head.to_bytes(8, "little") + _as_bytes(block))
        return h.hexdigest()

    def memory_profile(self) -> dict[str, int]:
        blocks = 0
        encoded = 0
        for _head, block in tree_items(self.root):
            blocks += 1
            encoded += len(block) if isinstance(block, bytes) else len(block) * 8
        if self.prefix is not None:
            blocks += 1
            encoded += len(self.prefix) if isinstance(self.prefix, bytes) else len(self.prefix) * 8
        return {
            "payload_words": self.count * COW_ELEMENT_WORDS,
            "slack_words": 0,  # blocks have no empty slots
            "version_extra_words": 0,
            "index_words": tree_size(self.root) * 5 + 2,  # node fields + header
            "bloom_bytes": 0,
            "encoded_bytes": encoded,
        }


def _as_bytes(block) -> bytes:
    if isinstance(block, bytes):
        return block
    return b"".join(v.to_bytes(8, "little") for v in block)


# -- mutable adapter for the shared container interface ----------------------


class RootVersion:
    __slots__ = ("ts", "value", "prev")

    def __init__(self, ts: int | None, value: CowNeighbors, prev):
        self.ts = ts
        self.value = value
        self.prev = prev


class CowRootContainer:
    """Per-vertex holder of copy-on-write neighbor values.

    Versioning here is per whole set: each commit pushes a new immutable
    root onto the vertex's history, so readers resolve their timestamp to
    one root and then read without any per-element checks.
    """

    sorted_scan = True
    flavor = "cow"
    kind = "cow"

    __slots__ = ("versioned", "counters", "head", "value")

    def __init__(self, cfg):
        empty = CowNeighbors.empty(cfg.block_size, cfg.encode_blocks)
        self.versioned = cfg.versioned
        self.counters = cfg.counters
        if self.versioned:
            self.head = RootVersion(0, empty, None)
        else:
            self.value = empty

    def _current(self) -> CowNeighbors:
        return self.head.value if self.versioned else self.value

    def _at(self, ts: int | None) -> CowNeighbors | None:
        if not self.versioned:
            return self.value
        if ts is None:  # current value, provisional root included
            return self.head.value
        v = self.head
        while v is not None:
            if v.ts is not None and v.ts <= ts:
                return v.value
            v = v.prev
        return None

    def mutate(self, key: int, is_delete: bool, log) -> int:
        base = self._current()
        value = base.delete(key) if is_delete else base.insert(key)
        delta = value.count - base.count
        rv = RootVersion(None, value, self.head)
        self.head = rv
        log.new_root.append((self, rv))
        return delta

    def _rollback_root(self, rv: RootVersion) -> None:
        assert self.head is rv
        self.head = rv.prev

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        base = self.value
        self.value = base.delete(key) if is_delete else base.insert(key)
        return self.value.count - base.count

    def contains(self, key: int, ts: int | None = None) -> bool:
        value = self._at(ts)
        return value is not None and value.contains(key)

    def scan(self, ts: int | None = None) -> list[int]:
        value = self._at(ts)
        return value.scan() if value is not None else []

    def visible_count(self, ts: int | None = None) -> int:
        value = self._at(ts)
        return value.count if value is not None else 0

    def physical_entries(self) -> int:
        return self._current().count

    def physical_keys(self) -> int:
        return self._current().count

    def bulk_load_sorted(self, keys, ts: int | None = None) -> None:
        value = CowNeighbors.from_sorted(
            keys, self._current().B, self._current().encode
        )
        if self.versioned:
            self.head = RootVersion(ts if ts is not None else 0, value, None)
        else:
            self.value = value

    def compact(self, watermark: int) -> int:
        if not self.versioned:
            return 0
        anchor = None
        v = self.head
        while v is not None:
            if v.ts is not None and v.ts <= watermark:
                anchor = v
                break
            v = v.prev
        if anchor is None:
            return 0
        reclaimed = 0
        v = anchor.prev
        while v is not None:
            reclaimed += 1
            v = v.prev
        anchor.prev = None
        return reclaimed

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        """Whole-set snapshots are this family's versions: push duplicate
        roots above base_ts.  Readers pin one root, so their work is
        unchanged by construction."""
        if not self.versioned:
            return 0
        value = self._current()
        for step in range(1, per_key):
            self.head = RootVersion(base_ts + step, value, self.head)
        return int(value.count * pct / 100)

    def check_invariants(self) -> None:
        self._current().check_invariants()
        if self.versioned:
            last = None
            v = self.head
            while v is not None:
                if v.ts is not None:
                    if last is not None:
                        assert v.ts < last
                    last = v.ts
                v = v.prev

    def memory_profile(self) -> dict[str, int]:
        profile = dict(self._current().memory_profile())
        if self.versioned:
            roots = 0
            v = self.head
            while v is not None:
                roots += 1
                v = v.prev
            profile["version_extra_words"] = (roots - 1) * 3  # ts, value ref, link
        return profile
