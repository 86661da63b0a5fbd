"""Binary Merkle tree over 32-byte digests.

An unpaired node at the end of a level is promoted unchanged to the next
level (not duplicated), so a single leaf is its own root.
"""

import hashlib
from dataclasses import dataclass

from .codec import DecodeError


def node_hash(left, right):
    return hashlib.sha256(left + right).digest()


@dataclass(frozen=True)
class MerklePath:
    leaf_index: int
    # (sibling digest, sibling_is_right) from the leaf upwards
    siblings: tuple

    def to_bytes(self):
        out = self.leaf_index.to_bytes(4, "big") + len(self.siblings).to_bytes(4, "big")
        for digest, is_right in self.siblings:
            out += bytes([1 if is_right else 0]) + digest
        return out

    @classmethod
    def read(cls, r):
        index = r.u32()
        siblings = []
        for _ in range(r.count(limit=64)):
            flag = r.u8()
            if flag not in (0, 1):
                raise DecodeError("bad sibling flag")
            siblings.append((r.raw(32), bool(flag)))
        return cls(index, tuple(siblings))


def _levels(leaves):
    if not leaves:
        raise ValueError("empty leaves")
    levels = [list(leaves)]
    while len(levels[-1]) > 1:
        cur = levels[-1]
        nxt = [node_hash(cur[i], cur[i + 1]) for i in range(0, len(cur) - 1, 2)]
        if len(cur) % 2:
            nxt.append(cur[-1])
        levels.append(nxt)
    return levels


def merkle_root(leaves):
    return _levels(leaves)[-1][0]


def inclusion_proof(leaves, index):
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range for {len(leaves)} leaves")
    siblings = []
    i = index
    for level in _levels(leaves)[:-1]:
        sib = i ^ 1
        if sib < len(level):
            siblings.append((level[sib], sib > i))
        i //= 2
    return MerklePath(index, tuple(siblings))


def verify_inclusion(root, leaf, path):
    acc = leaf
    for digest, is_right in path.siblings:
        acc = node_hash(acc, digest) if is_right else node_hash(digest, acc)
    return acc == root
