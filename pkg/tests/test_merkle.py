import hashlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from rcbdc.codec import Reader
from rcbdc.merkle import MerklePath, inclusion_proof, merkle_root, node_hash, verify_inclusion


def leaf(i):
    return hashlib.sha256(i.to_bytes(4, "big")).digest()


def test_small_trees():
    a, b, c = leaf(0), leaf(1), leaf(2)
    assert merkle_root([a]) == a
    assert merkle_root([a, b]) == node_hash(a, b)
    assert inclusion_proof([a, b], 0) == MerklePath(0, ((b, True),))
    # the unpaired c is promoted, not hashed with itself
    assert merkle_root([a, b, c]) == node_hash(node_hash(a, b), c)


def test_errors():
    with pytest.raises(ValueError):
        merkle_root([])
    with pytest.raises(IndexError):
        inclusion_proof([leaf(0)], 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 1024), st.integers(0, 2**31))
def test_every_leaf_verifies_and_tamper_fails(n, seed):
    rng = random.Random(seed)
    leaves = [leaf(i + seed) for i in range(n)]
    root = merkle_root(leaves)
    for i in rng.sample(range(n), min(n, 16)):
        path = inclusion_proof(leaves, i)
        assert verify_inclusion(root, leaves[i], path)
        assert len(path.siblings) <= max(1, (n - 1).bit_length())
        if path.siblings:
            j = rng.randrange(len(path.siblings))
            digest, is_right = path.siblings[j]
            k = rng.randrange(32)
            bad = digest[:k] + bytes([digest[k] ^ 1]) + digest[k + 1:]
            sibs = list(path.siblings)
            sibs[j] = (bad, is_right)
            assert not verify_inclusion(root, leaves[i], MerklePath(i, tuple(sibs)))


def test_path_bytes_round_trip():
    leaves = [leaf(i) for i in range(13)]
    path = inclusion_proof(leaves, 6)
    assert MerklePath.read(Reader(path.to_bytes())) == path
