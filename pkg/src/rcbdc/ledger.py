"""Central-bank ledger: live UTXO set, append-only log, Merkle confirmations.

The log is the source of truth; the live set is an index rebuilt from it on
restore.  ``apply_tx`` either confirms a transaction or raises ``TxRejected``
leaving the state untouched.
"""

import hashlib
import random
from dataclasses import dataclass, field

from .codec import DecodeError, Reader, Writer
from .group import GroupParams
from .merkle import inclusion_proof, merkle_root, verify_inclusion
from .pedersen import Commitment, Opening, commit, open_check, random_opening
from .rangeproof import DEFAULT_BITS, check_bits, prove_range
from .schnorr import CONFIRM, Signature, keygen, keypair_from_private, sign, verify
from .txbuild import ConcealedTx, OpeningPacket, OutputRecord, central_verify, check_balance

UNKNOWN_INPUT = "unknown-input"
VERIFY_FAILED = "verify-failed"
DUPLICATE_TX = "duplicate-tx-id"

SNAPSHOT_MAGIC = b"RCSN"
LOG_MAGIC = b"RCLG"
FORMAT_VERSION = 1


class TxRejected(Exception):
    def __init__(self, reason, report=None):
        super().__init__(reason)
        self.reason = reason
        self.report = report


class CorruptSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class UtxoRecord:
    utxo_id: bytes
    commitment: Commitment
    owner_pubkey: int
    created_tx_id: bytes
    index: int

    def to_bytes(self, params):
        return (self.utxo_id + params.element_bytes(self.commitment.point)
                + params.element_bytes(self.owner_pubkey) + self.created_tx_id
                + self.index.to_bytes(4, "big"))


@dataclass(frozen=True)
class ConfirmationRecord:
    tx_id: bytes
    merkle_root: bytes
    root_signature: Signature

    def write(self, w, params):
        w.raw(self.tx_id).raw(self.merkle_root)
        self.root_signature.write(w, params)

    @classmethod
    def read(cls, r, params):
        return cls(r.raw(32), r.raw(32), Signature.read(r, params))

    def to_bytes(self, params):
        w = Writer()
        self.write(w, params)
        return w.getvalue()


@dataclass
class LedgerState:
    params: GroupParams
    cb_keypair: object
    n_bits: int = DEFAULT_BITS
    live_utxos: dict = field(default_factory=dict)
    log: list = field(default_factory=list)
    supply: int = 0
    # openings of minted outputs, the only openings the central bank ever holds
    minted_openings: dict = field(default_factory=dict)
    rng: random.Random = field(default_factory=random.SystemRandom, repr=False)

    @property
    def confirmed_ids(self):
        return {conf.tx_id for _, conf in self.log}

    def view(self):
        """Read-only copy of the live set, safe to hand to a concurrent verifier."""
        return dict(self.live_utxos)


def utxo_id_for(tx_id, index):
    return hashlib.sha256(b"rcbdc/utxo" + tx_id + index.to_bytes(4, "big")).digest()


def leaf_hash(params, output_record, index):
    # the position is hashed in so a path cannot be relabelled to another index
    return hashlib.sha256(b"rcbdc/leaf" + index.to_bytes(4, "big") + output_record.to_bytes(params)).digest()


def output_leaves(params, tx):
    return [leaf_hash(params, out, j) for j, out in enumerate(tx.outputs)]


def _confirmation_message(tx_id, root):
    return b"rcbdc/confirm" + tx_id + root


def _confirm(state, tx, tx_id):
    root = merkle_root(output_leaves(state.params, tx)) if tx.outputs else hashlib.sha256(b"").digest()
    sig = sign(state.params, state.cb_keypair, _confirmation_message(tx_id, root), state.rng,
               domain=CONFIRM)
    return ConfirmationRecord(tx_id, root, sig)


def _new_records(tx, tx_id):
    return [UtxoRecord(utxo_id_for(tx_id, j), out.commitment, out.owner_pubkey, tx_id, j)
            for j, out in enumerate(tx.outputs)]


def new_ledger(params, *, n_bits=DEFAULT_BITS, rng=None, cb_keypair=None):
    check_bits(params, n_bits)
    rng = rng or random.SystemRandom()
    cb_keypair = cb_keypair or keygen(params, params.g, rng)
    return LedgerState(params, cb_keypair, n_bits=n_bits, rng=rng)


def issue(state, payouts):
    """Mint new money as a log entry with no inputs; returns (tx, confirmation, packet)."""
    params = state.params
    openings = [random_opening(params, v, state.rng) for v, _ in payouts]
    outputs = tuple(OutputRecord(commit(params, o), pk) for o, (_, pk) in zip(openings, payouts))
    proofs = tuple(prove_range(params, o, state.n_bits, state.rng) for o in openings)
    tx = ConcealedTx((), outputs, proofs)
    tx_id = tx.tx_id(params)
    conf = _confirm(state, tx, tx_id)
    for rec, o in zip(_new_records(tx, tx_id), openings):
        state.live_utxos[rec.utxo_id] = rec
        state.minted_openings[rec.utxo_id] = o
    state.log.append((tx, conf))
    state.supply += sum(v for v, _ in payouts)
    return tx, conf, OpeningPacket({}, dict(enumerate(openings)))


def mint_genesis(params, payouts, rng, *, n_bits=DEFAULT_BITS, cb_keypair=None):
    """Fresh ledger whose log entry 0 issues ``payouts``; returns (state, packet)."""
    state = new_ledger(params, n_bits=n_bits, rng=rng, cb_keypair=cb_keypair)
    _, _, packet = issue(state, payouts)
    return state, packet


def apply_tx(state, tx):
    """Verify and atomically apply ``tx``; raises TxRejected on any failure."""
    params = state.params
    if any(inp.utxo_id not in state.live_utxos for inp in tx.inputs):
        raise TxRejected(UNKNOWN_INPUT)
    tx_id = tx.tx_id(params)
    if tx_id in state.confirmed_ids:
        raise TxRejected(DUPLICATE_TX)
    report = central_verify(state.live_utxos, params, tx, n_bits=state.n_bits)
    if not report.accepted:
        raise TxRejected(VERIFY_FAILED, report)
    conf = _confirm(state, tx, tx_id)
    # nothing below can fail, so the update is all-or-nothing
    for inp in tx.inputs:
        del state.live_utxos[inp.utxo_id]
    for rec in _new_records(tx, tx_id):
        state.live_utxos[rec.utxo_id] = rec
    state.log.append((tx, conf))
    return conf


def confirmation_path(params, tx, index):
    return inclusion_proof(output_leaves(params, tx), index)


def verify_confirmation(params, cb_pubkey, output_record, opening, path, confirmation):
    """Payee-side check that an output was confirmed and opens to ``opening``."""
    if not open_check(params, output_record.commitment, opening):
        return False
    if not verify_inclusion(confirmation.merkle_root, leaf_hash(params, output_record, path.leaf_index), path):
        return False
    msg = _confirmation_message(confirmation.tx_id, confirmation.merkle_root)
    return verify(params, params.g, cb_pubkey, msg, confirmation.root_signature, domain=CONFIRM)


def replay_live_set(params, log):
    live = {}
    for tx, conf in log:
        for inp in tx.inputs:
            live.pop(inp.utxo_id, None)
        for rec in _new_records(tx, conf.tx_id):
            live[rec.utxo_id] = rec
    return live


def live_set_digest(params, live):
    h = hashlib.sha256(b"rcbdc/live")
    for uid in sorted(live):
        h.update(live[uid].to_bytes(params))
    return h.digest()


def audit(state):
    """Offline re-check of the log: every spend balances and every root is signed."""
    params = state.params
    for tx, conf in state.log:
        if tx.tx_id(params) != conf.tx_id:
            return False
        if tx.inputs and not check_balance(params, tx)[0]:
            return False
        root = merkle_root(output_leaves(params, tx)) if tx.outputs else hashlib.sha256(b"").digest()
        if root != conf.merkle_root:
            return False
        if not verify(params, params.g, state.cb_keypair.public,
                      _confirmation_message(conf.tx_id, root), conf.root_signature, domain=CONFIRM):
            return False
    return replay_live_set(params, state.log) == state.live_utxos


def _write_entries(w, params, log):
    w.u32(len(log))
    for tx, conf in log:
        w.blob(tx.to_bytes(params) + conf.to_bytes(params))


def _read_entries(r, params):
    entries = []
    for _ in range(r.count()):
        rec = Reader(r.blob())
        tx = ConcealedTx.read(rec, params)
        conf = ConfirmationRecord.read(rec, params)
        rec.expect_end()
        entries.append((tx, conf))
    return entries


def snapshot(state, sink):
    """Serialize the full state (including the confirmation key) to a binary stream."""
    params = state.params
    w = Writer().raw(SNAPSHOT_MAGIC).u8(FORMAT_VERSION)
    w.blob(params.to_bytes()).u16(state.n_bits)
    w.uint(state.cb_keypair.private, params.scalar_size)
    w.u64(state.supply)
    _write_entries(w, params, state.log)
    w.u32(len(state.minted_openings))
    for uid in sorted(state.minted_openings):
        o = state.minted_openings[uid]
        w.raw(uid).uint(o.value, params.scalar_size).uint(o.randomness, params.scalar_size)
    w.raw(live_set_digest(params, state.live_utxos))
    body = w.getvalue()
    sink.write(body + hashlib.sha256(body).digest())


def restore(source, *, rng=None):
    data = source.read()
    if len(data) < 32 or hashlib.sha256(data[:-32]).digest() != data[-32:]:
        raise CorruptSnapshot("snapshot digest mismatch")
    try:
        r = Reader(data[:-32])
        if r.raw(4) != SNAPSHOT_MAGIC or r.u8() != FORMAT_VERSION:
            raise CorruptSnapshot("not a version-1 snapshot")
        params = GroupParams.from_bytes(r.blob())
        n_bits = r.u16()
        cb = keypair_from_private(params, params.g, r.uint(params.scalar_size))
        supply = r.u64()
        log = _read_entries(r, params)
        minted = {}
        for _ in range(r.count()):
            uid = r.raw(32)
            minted[uid] = Opening(r.uint(params.scalar_size), r.uint(params.scalar_size))
        expected = r.raw(32)
        r.expect_end()
    except DecodeError as exc:
        raise CorruptSnapshot(str(exc)) from exc
    live = replay_live_set(params, log)
    if live_set_digest(params, live) != expected:
        raise CorruptSnapshot("replayed live set does not match recorded digest")
    return LedgerState(params, cb, n_bits=n_bits, live_utxos=live, log=log, supply=supply,
                       minted_openings=minted, rng=rng or random.SystemRandom())


def write_log(state, sink):
    """Append-only log file: header (params digest, genesis tx id) then length-prefixed entries."""
    params = state.params
    genesis = state.log[0][1].tx_id if state.log else bytes(32)
    w = Writer().raw(LOG_MAGIC).u8(FORMAT_VERSION).raw(params.digest).raw(genesis)
    sink.write(w.getvalue())
    for tx, conf in state.log:
        append_log_record(sink, params, tx, conf)


def append_log_record(sink, params, tx, conf):
    sink.write(Writer().blob(tx.to_bytes(params) + conf.to_bytes(params)).getvalue())


def read_log(source, params):
    """Return (genesis tx id, [(tx, confirmation), ...]) from a log stream."""
    r = Reader(source.read())
    if r.raw(4) != LOG_MAGIC or r.u8() != FORMAT_VERSION:
        raise DecodeError("not a version-1 log")
    if r.raw(32) != params.digest:
        raise DecodeError("log written for different group parameters")
    genesis = r.raw(32)
    entries = []
    while r.remaining:
        rec = Reader(r.blob())
        tx = ConcealedTx.read(rec, params)
        conf = ConfirmationRecord.read(rec, params)
        rec.expect_end()
        entries.append((tx, conf))
    return genesis, entries
