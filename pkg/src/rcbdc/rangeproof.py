"""Bit-decomposition range proof that a committed value lies in [0, 2^n).

The prover commits to each bit, d_i = g^{b_i} h^{s_i}, choosing the bit
randomness so that sum(2^i s_i) equals the original randomness.  Then
prod(d_i^{2^i}) reproduces the target commitment exactly and the verifier
needs no extra equality proof.  Each d_i carries a Fiat-Shamir OR proof
that it opens to 0 or to 1 (knowledge of log_h d_i or of log_h(d_i / g)).
"""

import hashlib
from dataclasses import dataclass

from .codec import Reader, Writer
from .group import mod_inv, random_scalar
from .pedersen import Commitment

DEFAULT_BITS = 32


class ValueOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class BitOrProof:
    t0: int
    t1: int
    e0: int
    e1: int
    z0: int
    z1: int


@dataclass(frozen=True)
class RangeProof:
    bit_commitments: tuple
    or_proofs: tuple

    @property
    def n_bits(self):
        return len(self.bit_commitments)

    def write(self, w: Writer, params):
        w.u32(len(self.bit_commitments))
        for d, pr in zip(self.bit_commitments, self.or_proofs):
            w.uint(d.point, params.element_size)
            w.uint(pr.t0, params.element_size).uint(pr.t1, params.element_size)
            for v in (pr.e0, pr.e1, pr.z0, pr.z1):
                w.uint(v, params.scalar_size)

    @classmethod
    def read(cls, r: Reader, params):
        n = r.count(limit=params.q.bit_length())
        ds, proofs = [], []
        es, ss = params.element_size, params.scalar_size
        for _ in range(n):
            ds.append(Commitment(r.uint(es)))
            t0, t1 = r.uint(es), r.uint(es)
            proofs.append(BitOrProof(t0, t1, *(r.uint(ss) for _ in range(4))))
        return cls(tuple(ds), tuple(proofs))

    def to_bytes(self, params):
        w = Writer()
        self.write(w, params)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data, params):
        r = Reader(data)
        proof = cls.read(r, params)
        r.expect_end()
        return proof


def check_bits(params, n_bits):
    """Values must stay far below q; we require at least 2^n < q."""
    if n_bits < 1:
        raise ValueError("n_bits must be positive")
    if (1 << n_bits) >= params.q:
        raise ValueError(f"2^{n_bits} is not below q (q has {params.q.bit_length()} bits)")


def _bit_challenge(params, target, index, d, t0, t1):
    es = params.element_size
    h = hashlib.sha256(b"rcbdc/range")
    h.update(params.digest)
    h.update(params.element_bytes(target.point))
    h.update(index.to_bytes(4, "big"))
    for x in (d, t0, t1):
        h.update(x.to_bytes(es, "big"))
    return int.from_bytes(h.digest(), "big") % params.q


def _prove_bit(params, target, index, bit, s, d, rng):
    q, p = params.q, params.p
    ys = (d, d * mod_inv(params.g, params) % p)
    w = random_scalar(params, rng)
    e_sim = random_scalar(params, rng)
    z_sim = random_scalar(params, rng)
    t = [0, 0]
    t[bit] = params.exp(params.h, w)
    t[1 - bit] = params.exp(params.h, z_sim) * params.exp(ys[1 - bit], e_sim) % p
    e = _bit_challenge(params, target, index, d, t[0], t[1])
    e_real = (e - e_sim) % q
    z_real = (w - s * e_real) % q
    es, zs = [0, 0], [0, 0]
    es[bit], zs[bit] = e_real, z_real
    es[1 - bit], zs[1 - bit] = e_sim, z_sim
    return BitOrProof(t[0], t[1], es[0], es[1], zs[0], zs[1])


def _verify_bit(params, target, index, d, pr):
    q, p = params.q, params.p
    if not all(0 <= v < q for v in (pr.e0, pr.e1, pr.z0, pr.z1)):
        return False
    if (pr.e0 + pr.e1) % q != _bit_challenge(params, target, index, d, pr.t0, pr.t1):
        return False
    y1 = d * mod_inv(params.g, params) % p
    if params.exp(params.h, pr.z0) * params.exp(d, pr.e0) % p != pr.t0:
        return False
    return params.exp(params.h, pr.z1) * params.exp(y1, pr.e1) % p == pr.t1


def bit_randomness(params, randomness, n_bits, rng):
    """Random s_0..s_{n-2}; s_{n-1} solved so sum(2^i s_i) == randomness (mod q)."""
    q = params.q
    if n_bits == 1:
        return [randomness % q]
    inv_top = pow(1 << (n_bits - 1), -1, q)
    while True:
        head = [random_scalar(params, rng) for _ in range(n_bits - 1)]
        partial = sum(s << i for i, s in enumerate(head))
        last = (randomness - partial) * inv_top % q
        # a zero blinding factor would expose the top bit
        if last:
            return head + [last]


def prove_range(params, opening, n_bits, rng):
    check_bits(params, n_bits)
    value = opening.value
    if not 0 <= value < (1 << n_bits):
        raise ValueOutOfRange(f"value {value} outside [0, 2^{n_bits})")
    target = Commitment(params.exp(params.g, value) * params.exp(params.h, opening.randomness) % params.p)
    bits = [(value >> i) & 1 for i in range(n_bits)]
    ss = bit_randomness(params, opening.randomness, n_bits, rng)
    ds, proofs = [], []
    for i, (b, s) in enumerate(zip(bits, ss)):
        d = (params.g if b else 1) * params.exp(params.h, s) % params.p
        ds.append(Commitment(d))
        proofs.append(_prove_bit(params, target, i, b, s, d, rng))
    return RangeProof(tuple(ds), tuple(proofs))


def recombine(params, bit_commitments):
    """prod(d_i^{2^i}) by Horner's rule on squarings."""
    acc = 1
    for d in reversed(bit_commitments):
        acc = acc * acc % params.p * d.point % params.p
    return acc


def verify_range(params, c, proof, n_bits):
    if proof.n_bits != n_bits or len(proof.or_proofs) != n_bits:
        return False
    if not params.contains(c.point):
        return False
    if any(not 0 < d.point < params.p for d in proof.bit_commitments):
        return False
    if recombine(params, proof.bit_commitments) != c.point:
        return False
    return all(
        _verify_bit(params, c, i, d.point, pr)
        for i, (d, pr) in enumerate(zip(proof.bit_commitments, proof.or_proofs))
    )


def extract_bit(params, d, first, second):
    """Special-soundness extractor for one bit.

    Given two accepting transcripts for the same commitment d and the same
    (t0, t1) but different challenge splits, return (bit, s) with
    d == g^bit h^s.  Returns None when the transcripts do not differ.
    """
    q = params.q
    if first.e0 != second.e0:
        s = (first.z0 - second.z0) * pow(second.e0 - first.e0, -1, q) % q
        return 0, s
    if first.e1 != second.e1:
        s = (first.z1 - second.z1) * pow(second.e1 - first.e1, -1, q) % q
        return 1, s
    return None

