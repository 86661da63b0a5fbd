import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from rcbdc.group import profile_params
from rcbdc.pedersen import Commitment, Opening, commit
from rcbdc.rangeproof import (BitOrProof, RangeProof, ValueOutOfRange, bit_randomness, check_bits,
                              extract_bit, prove_range, recombine, verify_range)


def test_zero_value(test_group, rng):
    o = Opening(0, 12345)
    assert verify_range(test_group, commit(test_group, o), prove_range(test_group, o, 16, rng), 16)


def test_value_five_bit_commitments(toy):
    o = Opening(5, 7)
    ss = bit_randomness(toy, o.randomness, 3, random.Random(5))
    proof = prove_range(toy, o, 3, random.Random(5))
    assert sum(s << i for i, s in enumerate(ss)) % toy.q == 7
    for i, (b, s) in enumerate(zip((1, 0, 1), ss)):
        assert proof.bit_commitments[i].point == commit(toy, Opening(b, s)).point
    assert recombine(toy, proof.bit_commitments) == commit(toy, o).point
    assert verify_range(toy, commit(toy, o), proof, 3)


def test_out_of_range_values_refused(toy, test_group, rng):
    with pytest.raises(ValueOutOfRange):
        prove_range(toy, Opening(8, 1), 3, rng)
    with pytest.raises(ValueOutOfRange):
        prove_range(test_group, Opening(test_group.q - 1, 5), 32, rng)
    with pytest.raises(ValueError):
        check_bits(toy, 4)


def test_completeness_random_values(test_group):
    rng = random.Random(77)
    for _ in range(1000):
        o = Opening(rng.randrange(1 << 32), rng.randrange(1, test_group.q))
        assert verify_range(test_group, commit(test_group, o), prove_range(test_group, o, 32, rng), 32)


def test_all_toy_values_accept(toy):
    rng = random.Random(2)
    for x in range(8):
        for r in range(11):
            o = Opening(x, r)
            assert verify_range(toy, commit(toy, o), prove_range(toy, o, 3, rng), 3)


def test_negative_encoding_and_tampering_rejected(test_group, rng):
    q = test_group.q
    honest = Opening(5, 99)
    proof = prove_range(test_group, honest, 16, rng)
    assert not verify_range(test_group, commit(test_group, Opening(q - 1, 99)), proof, 16)
    assert not verify_range(test_group, commit(test_group, Opening(1 << 16, 99)), proof, 16)
    ds = list(proof.bit_commitments)
    ds[3] = Commitment(ds[3].point * test_group.g % test_group.p)
    assert not verify_range(test_group, commit(test_group, honest), replace(proof, bit_commitments=tuple(ds)), 16)
    prs = list(proof.or_proofs)
    prs[0] = replace(prs[0], z0=(prs[0].z0 + 1) % q)
    assert not verify_range(test_group, commit(test_group, honest), replace(proof, or_proofs=tuple(prs)), 16)
    assert not verify_range(test_group, commit(test_group, honest), proof, 15)


def test_proof_not_reusable_for_other_target(test_group, rng):
    a, b = Opening(5, 10), Opening(5, 11)
    proof = prove_range(test_group, a, 8, rng)
    assert not verify_range(test_group, commit(test_group, b), proof, 8)


def _accepting(toy, d, t0, t1, e0, e1):
    # interactive transcript: solve h^z0 d^e0 = t0 and h^z1 (d/g)^e1 = t1 for z
    hlog = {pow(toy.h, s, toy.p): s for s in range(toy.q)}
    y1 = d * pow(toy.g, -1, toy.p) % toy.p
    z0 = (hlog[t0] - e0 * hlog[d]) % toy.q
    z1 = (hlog[t1] - e1 * hlog[y1]) % toy.q
    pr = BitOrProof(t0, t1, e0, e1, z0, z1)
    assert pow(toy.h, z0, toy.p) * pow(d, e0, toy.p) % toy.p == t0
    assert pow(toy.h, z1, toy.p) * pow(y1, e1, toy.p) % toy.p == t1
    return pr


def test_bit_proof_special_soundness_exhaustive(toy):
    # two accepting transcripts with shared (t0, t1) always yield an opening
    # of d to a bit, which is what makes the recombined value lie in [0, 2^n)
    subgroup = sorted({pow(toy.g, i, toy.p) for i in range(toy.q)})
    for d in subgroup:
        for t0 in subgroup:
            for t1 in subgroup:
                base = _accepting(toy, d, t0, t1, 0, 0)
                for e in range(1, toy.q):
                    for other in (_accepting(toy, d, t0, t1, e, 0), _accepting(toy, d, t0, t1, 0, e)):
                        bit, s = extract_bit(toy, d, base, other)
                        assert d == commit(toy, Opening(bit, s)).point
                assert extract_bit(toy, d, base, base) is None


def test_out_of_range_acceptance_exposes_trapdoor(toy):
    # every commitment also opens in range; an accepting proof for a known
    # out-of-range opening therefore gives two openings and hence log_g(h)
    rng = random.Random(3)
    for x in range(8, 11):
        for r in range(11):
            c = commit(toy, Opening(x, r))
            with pytest.raises(ValueOutOfRange):
                prove_range(toy, Opening(x, r), 3, rng)
            for x2 in range(8):
                r2 = next(s for s in range(11) if commit(toy, Opening(x2, s)) == c)
                assert verify_range(toy, c, prove_range(toy, Opening(x2, r2), 3, rng), 3)
                assert (x - x2) * pow(r2 - r, -1, 11) % 11 == toy.trapdoor


@settings(max_examples=50, deadline=None)
@given(st.integers(0, (1 << 16) - 1), st.integers(1, 2**40), st.integers(0, 2**32))
def test_serialization_round_trip(value, r, seed):
    params = profile_params("test")
    proof = prove_range(params, Opening(value, r), 16, random.Random(seed))
    data = proof.to_bytes(params)
    assert RangeProof.from_bytes(data, params) == proof
    assert len(proof.bit_commitments) == len(proof.or_proofs) == 16
