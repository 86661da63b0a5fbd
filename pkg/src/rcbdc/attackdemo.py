"""Redemption forgery against counter-mode encryption of amounts, at toy width.

A bank stores X = f(k, 0) xor q1 for an amount q1.  A redeemer who may pick
any key k' decrypts X to q1' = f(k', 0) xor X and wins whenever q1' > q1.
With f behaving like a random b-bit function the win probability is
(2^b - q1 - 1) / 2^b.  A Pedersen commitment offers no such move: without
the trapdoor log_g(h) no second opening can be found.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .pedersen import Opening, commit


@dataclass(frozen=True)
class ToyCipherConfig:
    bits: int = 16
    counter: int = 0

    def __post_init__(self):
        if not 8 <= self.bits <= 32:
            raise ValueError("toy block width must be 8..32 bits")

    @property
    def mask(self):
        return (1 << self.bits) - 1


def toy_prf(config, key, counter=None):
    """f(k; counter): SHA-256 of key and counter, truncated to ``bits`` bits."""
    counter = config.counter if counter is None else counter
    digest = hashlib.sha256(key + counter.to_bytes(8, "big")).digest()
    return int.from_bytes(digest[:4], "big") & config.mask


def encrypt(config, key, value):
    return toy_prf(config, key) ^ value


def theoretical_rate(config, q1):
    n = 1 << config.bits
    return (n - q1 - 1) / n


def forgery_trial(config, q1, trials, seed):
    """Fraction of random re-keyings that decrypt X to an amount above q1."""
    if not 0 <= q1 <= config.mask:
        raise ValueError("q1 must fit in the block width")
    rng = np.random.default_rng(seed)
    keys = rng.bytes(16 * (trials + 1))
    x = encrypt(config, keys[:16], q1)
    wins = 0
    for i in range(1, trials + 1):
        if toy_prf(config, keys[16 * i:16 * (i + 1)]) ^ x > q1:
            wins += 1
    return wins / trials


def exhaustive_rate(config, q1, x):
    """Win fraction over all possible pads for a fixed ciphertext x."""
    pads = np.arange(1 << config.bits, dtype=np.int64)
    return float(np.count_nonzero((pads ^ x) > q1)) / len(pads)


def pedersen_second_openings(params, opening, value_range):
    """All (x', r') != opening with the same commitment and x' in ``value_range``.

    Exhaustive over r' in Z_q, so only meaningful for tiny groups.
    """
    target = commit(params, opening)
    found = []
    for x in value_range:
        for r in range(params.q):
            if (x, r) != (opening.value, opening.randomness) and commit(params, Opening(x, r)) == target:
                found.append(Opening(x, r))
    return found


def pedersen_substitution_trial(params, opening, bits, trials, rng):
    """The re-keying move against a commitment: fresh r', search every x' < 2^bits.

    For each random r' the committed point c h^{-r'} is looked up in a table
    of g^x'; a hit with x' > value would be a forgery.  Returns the hits.
    """
    c = commit(params, opening).point
    table = {}
    acc = 1
    for x in range(1 << bits):
        table.setdefault(acc, x)
        acc = acc * params.g % params.p
    hits = []
    for _ in range(trials):
        r = rng.randrange(params.q)
        y = c * pow(params.exp(params.h, r), -1, params.p) % params.p
        x = table.get(y)
        if x is not None and x > opening.value:
            hits.append(Opening(x, r))
    return hits
