"""Evolving per-transaction keys and the bank's identity registry.

A wallet derives a fresh Schnorr keypair for every transaction from one
master seed.  The bank keeps the pubkey -> identity mapping and releases an
identity only against a token signed by a configured authorizer key.
"""

import hashlib
import hmac
import json
import os
import threading
from dataclasses import dataclass, field

from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .codec import DecodeError, Reader, Writer
from .schnorr import AUTHORIZE, keypair_from_private, sign, verify

KEYSTORE_MAGIC = b"RCKS"
KEYSTORE_VERSION = 1
SCRYPT_N = 1 << 14


class Unauthorized(PermissionError):
    pass


class UnknownPubkey(KeyError):
    pass


@dataclass
class MasterSecret:
    seed: bytes
    counter: int = 0

    def __post_init__(self):
        if len(self.seed) != 32:
            raise ValueError("master seed must be 32 bytes")

    @classmethod
    def generate(cls):
        return cls(os.urandom(32))

    def next_keypair(self, params):
        """Keypair for the current counter; the counter then advances."""
        index = self.counter
        self.counter += 1
        return index, derive_keypair(params, self, index)


def derive_private(q, seed, index):
    if index < 0:
        raise ValueError("index must be non-negative")
    msg = index.to_bytes(8, "big")
    salt = 0
    while True:
        mac = hmac.new(seed, msg if salt == 0 else msg + salt.to_bytes(4, "big"), hashlib.sha256)
        x = int.from_bytes(mac.digest(), "big") % q
        if x:
            return x
        salt += 1


def derive_keypair(params, master, index):
    return keypair_from_private(params, params.g, derive_private(params.q, master.seed, index))


def _token_message(params, pubkey, purpose):
    return b"rcbdc/disclose" + params.element_bytes(pubkey) + purpose.encode()


def make_token(params, authorizer_keypair, pubkey, purpose, rng):
    """Authorizer's signature over (pubkey, purpose)."""
    return sign(params, authorizer_keypair, _token_message(params, pubkey, purpose), rng,
                domain=AUTHORIZE)


@dataclass(frozen=True)
class AccessEntry:
    pubkey: int
    purpose: str
    outcome: str


@dataclass
class IdentityRegistry:
    params: object
    authorizer_pubkey: int
    entries: dict = field(default_factory=dict)
    access_log: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def register(self, pubkey, identity, index):
        with self._lock:
            if pubkey in self.entries:
                raise ValueError("pubkey already registered")
            self.entries[pubkey] = (identity, index)

    def disclose(self, pubkey, token, purpose="lawful-request"):
        """Return the identity behind ``pubkey``; every attempt is logged."""
        with self._lock:
            ok = verify(self.params, self.params.g, self.authorizer_pubkey,
                        _token_message(self.params, pubkey, purpose), token, domain=AUTHORIZE)
            if not ok:
                self.access_log.append(AccessEntry(pubkey, purpose, "unauthorized"))
                raise Unauthorized("authorization token rejected")
            if pubkey not in self.entries:
                self.access_log.append(AccessEntry(pubkey, purpose, "unknown-pubkey"))
                raise UnknownPubkey(pubkey)
            self.access_log.append(AccessEntry(pubkey, purpose, "disclosed"))
            return self.entries[pubkey][0]

    def to_json(self):
        return json.dumps({
            "authorizer": hex(self.authorizer_pubkey),
            "entries": [[hex(pk), ident, idx] for pk, (ident, idx) in sorted(self.entries.items())],
            "access_log": [[hex(a.pubkey), a.purpose, a.outcome] for a in self.access_log],
        }, indent=2)

    @classmethod
    def from_json(cls, params, text):
        raw = json.loads(text)
        reg = cls(params, int(raw["authorizer"], 16))
        for pk, ident, idx in raw["entries"]:
            reg.entries[int(pk, 16)] = (ident, idx)
        reg.access_log = [AccessEntry(int(pk, 16), purpose, outcome)
                          for pk, purpose, outcome in raw["access_log"]]
        return reg


def _kdf(passphrase, salt):
    return hashlib.scrypt(passphrase.encode(), salt=salt, n=SCRYPT_N, r=8, p=1, dklen=32)


def seal_master(master, passphrase):
    """Encrypt the seed and counter under a passphrase-derived AES-GCM key."""
    salt, nonce = os.urandom(16), os.urandom(12)
    header = Writer().raw(KEYSTORE_MAGIC).u8(KEYSTORE_VERSION).raw(salt).raw(nonce).getvalue()
    plain = Writer().raw(master.seed).u64(master.counter).getvalue()
    return header + AESGCM(_kdf(passphrase, salt)).encrypt(nonce, plain, header)


def open_master(blob, passphrase):
    r = Reader(blob)
    if r.raw(4) != KEYSTORE_MAGIC or r.u8() != KEYSTORE_VERSION:
        raise DecodeError("not a version-1 keystore")
    salt, nonce = r.raw(16), r.raw(12)
    header = blob[:4 + 1 + 16 + 12]
    # raises cryptography's InvalidTag on a wrong passphrase or tampering
    plain = AESGCM(_kdf(passphrase, salt)).decrypt(nonce, r.raw(r.remaining), header)
    pr = Reader(plain)
    master = MasterSecret(pr.raw(32), pr.u64())
    pr.expect_end()
    return master
