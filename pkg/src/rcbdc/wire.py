"""Framed binary messages exchanged between wallet, bank and central bank.

Frame layout: magic "RCWM", version u8, type u8, sender role u8, sequence
u64, payload length u32, payload.  Payloads reuse the canonical encodings of
transactions, openings, signatures and Merkle paths.
"""

from dataclasses import dataclass

from .codec import DecodeError, Reader, Writer
from .ledger import ConfirmationRecord
from .merkle import MerklePath
from .pedersen import Commitment, Opening
from .schnorr import Signature
from .txbuild import ConcealedTx, OpeningPacket, OutputRecord

WIRE_MAGIC = b"RCWM"
WIRE_VERSION = 1
HEADER_SIZE = 4 + 1 + 1 + 1 + 8 + 4
MAX_PAYLOAD = 1 << 26

USER, BANK, CENTRAL_BANK = "user-wallet", "bank", "central-bank"
ROLE_IDS = {USER: 1, BANK: 2, CENTRAL_BANK: 3}
_ROLES = {v: k for k, v in ROLE_IDS.items()}


class MalformedFrame(DecodeError):
    pass


class VersionMismatch(DecodeError):
    pass


def _write_str(w, s):
    w.blob(s.encode())


def _read_str(r):
    try:
        return r.blob().decode()
    except UnicodeDecodeError as exc:
        raise DecodeError("bad utf-8 string") from exc


def _write_opening(w, params, o):
    w.uint(o.value, params.scalar_size).uint(o.randomness, params.scalar_size)


def _read_opening(r, params):
    return Opening(r.uint(params.scalar_size), r.uint(params.scalar_size))


@dataclass(frozen=True)
class PaymentRequest:
    """Wallet to bank: spend these UTXOs and pay these (value, pubkey) outputs."""

    sender: str
    seq: int
    payer: str
    spend: tuple
    payouts: tuple

    def write_payload(self, w, params):
        _write_str(w, self.payer)
        w.u32(len(self.spend))
        for uid in self.spend:
            w.raw(uid)
        w.u32(len(self.payouts))
        for v, pk in self.payouts:
            w.u64(v).uint(pk, params.element_size)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        payer = _read_str(r)
        spend = tuple(r.raw(32) for _ in range(r.count()))
        payouts = tuple((r.u64(), r.uint(params.element_size)) for _ in range(r.count()))
        return cls(sender, seq, payer, spend, payouts)


@dataclass(frozen=True)
class TxProposal:
    """Bank to wallet: the transaction to sign plus the payer's openings."""

    sender: str
    seq: int
    payer: str
    tx: ConcealedTx
    packet: OpeningPacket

    def write_payload(self, w, params):
        _write_str(w, self.payer)
        self.tx.write(w, params)
        self.packet.write(w, params)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        return cls(sender, seq, _read_str(r), ConcealedTx.read(r, params), OpeningPacket.read(r, params))


@dataclass(frozen=True)
class SignedComponent:
    sender: str
    seq: int
    payer: str
    message_digest: bytes
    pubkey: int
    signature: Signature

    def write_payload(self, w, params):
        _write_str(w, self.payer)
        w.raw(self.message_digest).uint(self.pubkey, params.element_size)
        self.signature.write(w, params)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        payer = _read_str(r)
        digest = r.raw(32)
        return cls(sender, seq, payer, digest, r.uint(params.element_size), Signature.read(r, params))


@dataclass(frozen=True)
class SubmitTx:
    sender: str
    seq: int
    tx: ConcealedTx

    def write_payload(self, w, params):
        self.tx.write(w, params)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        return cls(sender, seq, ConcealedTx.read(r, params))


@dataclass(frozen=True)
class Confirmation:
    """Receipt for one output; the opening is attached by the bank, never by the central bank
    except for freshly minted outputs."""

    sender: str
    seq: int
    confirmation: ConfirmationRecord
    path: MerklePath
    output: OutputRecord
    opening: Opening | None = None

    def write_payload(self, w, params):
        self.confirmation.write(w, params)
        w.blob(self.path.to_bytes())
        w.raw(self.output.to_bytes(params))
        if self.opening is None:
            w.u8(0)
        else:
            _write_opening(w.u8(1), params, self.opening)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        conf = ConfirmationRecord.read(r, params)
        pr = Reader(r.blob())
        path = MerklePath.read(pr)
        pr.expect_end()
        es = params.element_size
        output = OutputRecord(Commitment(r.uint(es)), r.uint(es))
        flag = r.u8()
        if flag not in (0, 1):
            raise DecodeError("bad opening flag")
        return cls(sender, seq, conf, path, output, _read_opening(r, params) if flag else None)


@dataclass(frozen=True)
class Rejection:
    """Central bank to bank: a submitted transaction was refused."""

    sender: str
    seq: int
    tx_id: bytes
    reason: str

    def write_payload(self, w, params):
        w.raw(self.tx_id)
        _write_str(w, self.reason)

    @classmethod
    def read_payload(cls, r, params, sender, seq):
        return cls(sender, seq, r.raw(32), _read_str(r))


MESSAGE_TYPES = {
    PaymentRequest: 1,
    TxProposal: 2,
    SignedComponent: 3,
    SubmitTx: 4,
    Confirmation: 5,
    Rejection: 6,
}
_BY_ID = {v: k for k, v in MESSAGE_TYPES.items()}


def encode(msg, params):
    payload = Writer()
    msg.write_payload(payload, params)
    body = payload.getvalue()
    w = Writer().raw(WIRE_MAGIC).u8(WIRE_VERSION).u8(MESSAGE_TYPES[type(msg)])
    w.u8(ROLE_IDS[msg.sender]).u64(msg.seq).u32(len(body)).raw(body)
    return w.getvalue()


def peek_header(data):
    """(type class, sender role, seq, payload length) without decoding the payload."""
    if len(data) < HEADER_SIZE:
        raise MalformedFrame(f"frame shorter than the {HEADER_SIZE}-byte header")
    r = Reader(data[:HEADER_SIZE])
    if r.raw(4) != WIRE_MAGIC:
        raise MalformedFrame("bad magic")
    version = r.u8()
    if version != WIRE_VERSION:
        raise VersionMismatch(f"frame version {version}, expected {WIRE_VERSION}")
    kind = _BY_ID.get(r.u8())
    role = _ROLES.get(r.u8())
    if kind is None or role is None:
        raise MalformedFrame("unknown message type or sender role")
    seq, length = r.u64(), r.u32()
    if length > MAX_PAYLOAD:
        raise MalformedFrame("payload too large")
    return kind, role, seq, length


def decode(data, params):
    kind, role, seq, length = peek_header(data)
    if len(data) != HEADER_SIZE + length:
        raise MalformedFrame(f"payload length {len(data) - HEADER_SIZE}, header says {length}")
    r = Reader(data[HEADER_SIZE:])
    try:
        msg = kind.read_payload(r, params, role, seq)
        r.expect_end()
    except MalformedFrame:
        raise
    except DecodeError as exc:
        raise MalformedFrame(str(exc)) from exc
    return msg


def carried_openings(msg):
    """Every Opening a message exposes to its recipient."""
    if isinstance(msg, TxProposal):
        return list(msg.packet.inputs.values()) + list(msg.packet.outputs.values())
    if isinstance(msg, Confirmation) and msg.opening is not None:
        return [msg.opening]
    return []
