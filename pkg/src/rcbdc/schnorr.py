"""Schnorr signatures over a configurable base of the prime-order subgroup.

Payer keys use base g.  The balance proof of a concealed transaction uses
base h with private key alpha = sum(input randomness) - sum(output randomness):
when the committed values balance, prod(inputs) / prod(outputs) equals h^alpha,
so that quotient serves directly as the verification key.
"""

import hashlib
from dataclasses import dataclass, field

from .codec import Reader, Writer
from .group import random_scalar

# domain-separation prefixes for the challenge hash
PAYER = b"\x01"
BALANCE = b"\x02"
CONFIRM = b"\x03"
AUTHORIZE = b"\x04"


@dataclass(frozen=True)
class SchnorrKeyPair:
    base: int
    private: int = field(repr=False)
    public: int


@dataclass(frozen=True)
class Signature:
    s: int
    e: int

    def to_bytes(self, params):
        return params.scalar_bytes(self.s) + params.scalar_bytes(self.e)

    @classmethod
    def read(cls, reader: Reader, params):
        return cls(reader.uint(params.scalar_size), reader.uint(params.scalar_size))

    def write(self, writer: Writer, params):
        writer.uint(self.s, params.scalar_size).uint(self.e, params.scalar_size)


class ZeroBalanceKey(ValueError):
    """alpha came out as 0; one output randomness must be resampled."""


def challenge_hash(params, t, message, domain=PAYER):
    digest = hashlib.sha256(domain + params.element_bytes(t) + message).digest()
    return int.from_bytes(digest, "big") % params.q


def keypair_from_private(params, base, private):
    private %= params.q
    if private == 0:
        raise ValueError("private key must be nonzero")
    return SchnorrKeyPair(base, private, params.exp(base, private))


def keygen(params, base, rng):
    if base == 1 or not params.contains(base):
        raise ValueError("base must be a non-identity subgroup element")
    return keypair_from_private(params, base, random_scalar(params, rng))


def sign(params, keypair, message, rng, *, domain=PAYER, challenge=challenge_hash):
    """Return (s, e) with t = base^k, e = H(t || m) mod q, s = k - x e mod q.

    ``challenge`` replaces the hash; tests use it to inject e for hand vectors.
    """
    k = random_scalar(params, rng)
    t = params.exp(keypair.base, k)
    e = challenge(params, t, message, domain)
    s = (k - keypair.private * e) % params.q
    return Signature(s, e)


def verify(params, base, public, message, sig, *, domain=PAYER, challenge=challenge_hash):
    q = params.q
    if not (0 <= sig.s < q and 0 <= sig.e < q):
        return False
    if not 0 < public < params.p:
        return False
    t = params.exp(base, sig.s) * params.exp(public, sig.e) % params.p
    return challenge(params, t, message, domain) == sig.e


def balance_key(params, input_randomness, output_randomness):
    """Signing key alpha = (sum r_i - sum r'_j) mod q on base h."""
    if not input_randomness and not output_randomness:
        raise ValueError("need randomness on at least one side")
    alpha = (sum(input_randomness) - sum(output_randomness)) % params.q
    if alpha == 0:
        raise ZeroBalanceKey("balance key is zero")
    return SchnorrKeyPair(params.h, alpha, params.exp(params.h, alpha))
