"""Prime-order subgroup arithmetic and parameter generation.

Every protocol object lives in the order-q subgroup of Z_p^*, with q | p - 1.
Two generators are public: ``g`` and ``h``.  Nobody may know log_g(h); by
default ``h`` is derived by hashing into the subgroup so that no trapdoor
exists at all.  A "ceremony" mode with a recorded trapdoor is kept for tests
that need to exhibit what a trapdoor holder can do.
"""

import functools
import hashlib
from dataclasses import dataclass, field

import gmpy2

from .codec import DecodeError, Reader, Writer

MILLER_RABIN_ROUNDS = 40  # error <= 4^-40 = 2^-80

PARAM_MAGIC = b"RCGP"
PARAM_VERSION = 1
PROFILE_IDS = {"custom": 0, "toy": 1, "test": 2, "prod": 3}
H_MODES = {"hash": 0, "ceremony": 1}

# below this modulus size plain powmod beats the comb-table bookkeeping
_FIXED_BASE_MIN_BITS = 512
_WINDOW = 8


class GroupGenerationError(RuntimeError):
    """No valid (p, q) pair was found within the retry budget."""


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int
    h: int
    profile: str = "custom"
    h_mode: str = "hash"
    trapdoor: int | None = field(default=None, repr=False, compare=False)

    @property
    def element_size(self):
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_size(self):
        return (self.q.bit_length() + 7) // 8

    def contains(self, x):
        """Subgroup membership: 0 < x < p and x^q == 1 (mod p)."""
        return 0 < x < self.p and gmpy2.powmod(x, self.q, self.p) == 1

    def exp(self, base, e):
        """base^e mod p, using a precomputed comb table when base is g or h."""
        if base in (self.g, self.h) and self.p.bit_length() >= _FIXED_BASE_MIN_BITS:
            return _comb_table(base, self.p, self.q).pow(e % self.q)
        return int(gmpy2.powmod(base, e, self.p))

    def to_bytes(self):
        w = self.element_size
        out = Writer().raw(PARAM_MAGIC).u8(PARAM_VERSION)
        out.u8(PROFILE_IDS[self.profile]).u8(H_MODES[self.h_mode]).u16(w)
        for v in (self.p, self.q, self.g, self.h):
            out.uint(v, w)
        body = out.getvalue()
        return body + hashlib.sha256(body).digest()

    @classmethod
    def from_bytes(cls, data):
        if len(data) < 32:
            raise DecodeError("parameter record too short")
        body, digest = data[:-32], data[-32:]
        if hashlib.sha256(body).digest() != digest:
            raise DecodeError("parameter record digest mismatch")
        r = Reader(body)
        if r.raw(4) != PARAM_MAGIC:
            raise DecodeError("bad parameter magic")
        if r.u8() != PARAM_VERSION:
            raise DecodeError("unsupported parameter version")
        profile = {v: k for k, v in PROFILE_IDS.items()}.get(r.u8())
        h_mode = {v: k for k, v in H_MODES.items()}.get(r.u8())
        if profile is None or h_mode is None:
            raise DecodeError("unknown profile or h mode")
        w = r.u16()
        p, q, g, h = (r.uint(w) for _ in range(4))
        r.expect_end()
        params = cls(p, q, g, h, profile=profile, h_mode=h_mode)
        validate_params(params)
        return params

    @functools.cached_property
    def digest(self):
        return hashlib.sha256(self.to_bytes()).digest()

    def element_bytes(self, x):
        return int(x).to_bytes(self.element_size, "big")

    def scalar_bytes(self, x):
        return int(x).to_bytes(self.scalar_size, "big")


def is_probable_prime(n):
    return n > 1 and bool(gmpy2.is_prime(n, MILLER_RABIN_ROUNDS))


def validate_params(params):
    p, q, g, h = params.p, params.q, params.g, params.h
    if not (is_probable_prime(p) and is_probable_prime(q)):
        raise ValueError("p and q must be prime")
    if (p - 1) % q:
        raise ValueError("q must divide p - 1")
    for name, x in (("g", g), ("h", h)):
        if x == 1 or not params.contains(x):
            raise ValueError(f"{name} is not a generator of the order-q subgroup")


class _Stream:
    """Deterministic byte stream keyed by a seed (SHA-256 in counter mode)."""

    def __init__(self, seed, label):
        self._key = hashlib.sha256(b"rcbdc/stream/" + label + b"/" + seed).digest()
        self._ctr = 0

    def bits(self, n):
        nbytes = (n + 7) // 8
        out = b""
        while len(out) < nbytes:
            out += hashlib.sha256(self._key + self._ctr.to_bytes(8, "big")).digest()
            self._ctr += 1
        return int.from_bytes(out[:nbytes], "big") >> (8 * nbytes - n)


def project_to_subgroup(x, p, q):
    """Map any unit of Z_p^* into the order-q subgroup via the cofactor."""
    return int(gmpy2.powmod(x, (p - 1) // q, p))


def _hash_to_int(data, bits):
    out = b""
    ctr = 0
    while len(out) * 8 < bits:
        out += hashlib.sha256(ctr.to_bytes(4, "big") + data).digest()
        ctr += 1
    return int.from_bytes(out, "big")


def derive_h(p, q, g, domain_tag, max_tries=1000):
    """Second generator by hash-to-subgroup, so nobody knows log_g(h)."""
    for ctr in range(max_tries):
        tag = domain_tag if ctr == 0 else domain_tag + ctr.to_bytes(4, "big")
        cand = _hash_to_int(tag, p.bit_length() + 64) % p
        if cand == 0:
            continue
        h = project_to_subgroup(cand, p, q)
        if h not in (1, g):
            return h
    raise GroupGenerationError("hash-to-subgroup did not find h")


def q_bits_for(p_bits):
    """Subgroup order size: 256 bits for production moduli, p_bits - 8 below that."""
    return min(256, p_bits - 8)


def generate_group_params(p_bits, seed, *, profile="custom", max_attempts=None):
    """Deterministically derive (p, q, g, h) from ``seed``.

    Raises GroupGenerationError when no pair is found within the budget,
    which also covers bit lengths too small to hold a q of the chosen size.
    """
    if not seed:
        raise ValueError("seed must be nonempty")
    if isinstance(seed, str):
        seed = seed.encode()
    q_bits = q_bits_for(p_bits)
    if q_bits < 2:
        raise GroupGenerationError(f"p_bits={p_bits} leaves no room for a prime subgroup order")
    if max_attempts is None:
        max_attempts = 64 * p_bits
    stream = _Stream(seed, b"pq")
    lo, hi = 1 << (p_bits - 1), 1 << p_bits
    for _ in range(16 * q_bits + 64):
        q = stream.bits(q_bits) | (1 << (q_bits - 1)) | 1
        if not is_probable_prime(q):
            continue
        step = 2 * q
        for _ in range(max_attempts):
            x = stream.bits(p_bits) | (1 << (p_bits - 1))
            p = x - (x % step) + 1
            if lo <= p < hi and is_probable_prime(p):
                break
        else:
            continue
        gstream = _Stream(seed, b"g")
        for _ in range(1000):
            g = project_to_subgroup(gstream.bits(p_bits + 64) % p, p, q)
            if g > 1:
                break
        else:
            continue
        h = derive_h(p, q, g, b"rcbdc/h/" + seed)
        return GroupParams(p, q, g, h, profile=profile)
    raise GroupGenerationError(f"no (p, q) pair for p_bits={p_bits} within the retry budget")


def toy_params():
    """The hand-checkable group p=23, q=11, g=2 with h=8=g^3 (ceremony trapdoor 3)."""
    return GroupParams(23, 11, 2, 8, profile="toy", h_mode="ceremony", trapdoor=3)


def ceremony_params(params, trapdoor):
    """Replace h by g^trapdoor, recording the trapdoor."""
    trapdoor %= params.q
    if trapdoor == 0:
        raise ValueError("trapdoor must be nonzero mod q")
    h = int(gmpy2.powmod(params.g, trapdoor, params.p))
    return GroupParams(params.p, params.q, params.g, h, profile=params.profile,
                       h_mode="ceremony", trapdoor=trapdoor)


PROFILE_BITS = {"test": 64, "prod": 2048}


@functools.lru_cache(maxsize=None)
def profile_params(name):
    if name == "toy":
        return toy_params()
    if name not in PROFILE_BITS:
        raise ValueError(f"unknown profile {name!r}")
    return generate_group_params(PROFILE_BITS[name], b"rcbdc-" + name.encode(), profile=name)


def mod_exp(base, e, params):
    return params.exp(base, e)


def mod_mul(a, b, params):
    return a * b % params.p


def mod_inv(a, params):
    if a % params.p == 0:
        raise ZeroDivisionError("0 has no inverse mod p")
    return int(gmpy2.invert(a, params.p))


def random_scalar(params, rng):
    """Uniform draw from Z_q^* = [1, q)."""
    return rng.randrange(1, params.q)


class _CombTable:
    """Fixed-base exponentiation with one table row per 8-bit exponent window."""

    def __init__(self, base, p, q):
        self.p = gmpy2.mpz(p)
        rows = (q.bit_length() + _WINDOW - 1) // _WINDOW
        self.rows = []
        b = gmpy2.mpz(base)
        for _ in range(rows):
            row = [gmpy2.mpz(1)] * (1 << _WINDOW)
            for j in range(1, 1 << _WINDOW):
                row[j] = row[j - 1] * b % self.p
            self.rows.append(row)
            b = row[-1] * b % self.p
        self._mask = (1 << _WINDOW) - 1

    def pow(self, e):
        acc = gmpy2.mpz(1)
        p = self.p
        for row in self.rows:
            if not e:
                break
            d = e & self._mask
            if d:
                acc = acc * row[d] % p
            e >>= _WINDOW
        return int(acc)


@functools.lru_cache(maxsize=16)
def _comb_table(base, p, q):
    return _CombTable(base, p, q)
