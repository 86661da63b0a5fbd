"""Concealed UTXO transactions: construction, payer review, central-bank checks.

A transaction carries input commitments C, output commitments C' with their
owners, one range proof per output, the bank's balance signature keyed on
alpha over base h, and one payer signature per distinct input owner.  The
central bank never sees an opening: it checks the balance signature against
z = prod(C) / prod(C'), which equals h^alpha exactly when the values balance.
"""

import hashlib
from collections import Counter
from dataclasses import dataclass, field, replace

from .codec import DecodeError, Reader, Writer
from .pedersen import Commitment, Opening, combine, commit, open_check, random_opening
from .rangeproof import DEFAULT_BITS, RangeProof, ValueOutOfRange, check_bits, prove_range, verify_range
from .schnorr import BALANCE, PAYER, Signature, ZeroBalanceKey, balance_key, sign, verify
from .group import random_scalar

TX_MAGIC = b"RCTX"
TX_VERSION = 1


class UnbalancedAmounts(ValueError):
    pass


@dataclass(frozen=True)
class InputRef:
    utxo_id: bytes
    owner_pubkey: int
    commitment: Commitment


@dataclass(frozen=True)
class OutputRecord:
    commitment: Commitment
    owner_pubkey: int

    def to_bytes(self, params):
        return params.element_bytes(self.commitment.point) + params.element_bytes(self.owner_pubkey)


@dataclass(frozen=True)
class ConcealedTx:
    inputs: tuple
    outputs: tuple
    range_proofs: tuple
    balance_sig: Signature | None = None
    payer_sigs: tuple = ()

    def _write_inputs(self, w, params):
        w.u32(len(self.inputs))
        for inp in self.inputs:
            if len(inp.utxo_id) != 32:
                raise ValueError("utxo_id must be a 32-byte digest")
            w.raw(inp.utxo_id)
            w.uint(inp.owner_pubkey, params.element_size)
            w.uint(inp.commitment.point, params.element_size)

    def _write_outputs(self, w, params):
        w.u32(len(self.outputs))
        for out in self.outputs:
            w.raw(out.to_bytes(params))

    def body_bytes(self, params):
        """Canonical encoding of everything except the signatures."""
        w = Writer().raw(TX_MAGIC).u8(TX_VERSION).raw(params.digest)
        self._write_inputs(w, params)
        self._write_outputs(w, params)
        w.u32(len(self.range_proofs))
        for rp in self.range_proofs:
            rp.write(w, params)
        return w.getvalue()

    def signed_message(self, params):
        w = Writer().raw(b"rcbdc/tx-message").raw(params.digest)
        self._write_inputs(w, params)
        self._write_outputs(w, params)
        return hashlib.sha256(w.getvalue()).digest()

    def tx_id(self, params):
        return hashlib.sha256(b"rcbdc/tx-id" + self.body_bytes(params)).digest()

    def write(self, w, params):
        w.blob(self.body_bytes(params))
        if self.balance_sig is None:
            w.u8(0)
        else:
            w.u8(1)
            self.balance_sig.write(w, params)
        w.u32(len(self.payer_sigs))
        for pub, sig in self.payer_sigs:
            w.uint(pub, params.element_size)
            sig.write(w, params)

    def to_bytes(self, params):
        w = Writer()
        self.write(w, params)
        return w.getvalue()

    @classmethod
    def read(cls, r, params):
        body = Reader(r.blob())
        if body.raw(4) != TX_MAGIC or body.u8() != TX_VERSION:
            raise DecodeError("not a version-1 transaction")
        if body.raw(32) != params.digest:
            raise DecodeError("transaction built for different group parameters")
        es = params.element_size
        inputs = tuple(
            InputRef(body.raw(32), body.uint(es), Commitment(body.uint(es)))
            for _ in range(body.count())
        )
        outputs = tuple(
            OutputRecord(Commitment(body.uint(es)), body.uint(es)) for _ in range(body.count())
        )
        proofs = tuple(RangeProof.read(body, params) for _ in range(body.count()))
        body.expect_end()
        flag = r.u8()
        if flag not in (0, 1):
            raise DecodeError("bad balance-signature flag")
        bsig = Signature.read(r, params) if flag else None
        psigs = tuple((r.uint(es), Signature.read(r, params)) for _ in range(r.count()))
        return cls(inputs, outputs, proofs, bsig, psigs)

    @classmethod
    def from_bytes(cls, data, params):
        r = Reader(data)
        tx = cls.read(r, params)
        r.expect_end()
        return tx

    def input_owners(self):
        return {inp.owner_pubkey for inp in self.inputs}

    def with_payer_sigs(self, sigs):
        """Return a copy carrying ``sigs`` as (pubkey, Signature) pairs, sorted by key."""
        return replace(self, payer_sigs=tuple(sorted(sigs, key=lambda kv: kv[0])))


@dataclass(frozen=True)
class OpeningPacket:
    """Openings keyed by input / output position; never sent to the central bank."""

    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def write(self, w, params):
        for table in (self.inputs, self.outputs):
            w.u32(len(table))
            for pos in sorted(table):
                o = table[pos]
                w.u32(pos).uint(o.value, params.scalar_size).uint(o.randomness, params.scalar_size)

    @classmethod
    def read(cls, r, params):
        ss = params.scalar_size
        tables = []
        for _ in range(2):
            tables.append({r.u32(): Opening(r.uint(ss), r.uint(ss)) for _ in range(r.count())})
        return cls(*tables)


@dataclass(frozen=True)
class VerifyReport:
    payer_sig_ok: bool
    range_ok: bool
    balance_ok: bool
    z: int

    @property
    def accepted(self):
        return self.payer_sig_ok and self.range_ok and self.balance_ok


def assemble_concealed_tx(params, spend_openings, output_openings, owners, rng, *,
                          n_bits=DEFAULT_BITS, with_range_proofs=True):
    """Commit, prove ranges and sign with alpha, without checking the amounts.

    ``build_concealed_tx`` is the honest entry point; this lower layer is also
    what a dishonest bank would run on unbalanced amounts.
    """
    output_openings = list(output_openings)
    r_in = [o.randomness for _, o in spend_openings]
    while True:
        try:
            kp = balance_key(params, r_in, [o.randomness for o in output_openings])
            break
        except ZeroBalanceKey:
            if not output_openings:
                raise
            last = output_openings[-1]
            output_openings[-1] = Opening(last.value, random_scalar(params, rng))
    outputs = tuple(OutputRecord(commit(params, o), pk) for o, pk in zip(output_openings, owners))
    proofs = ()
    if with_range_proofs:
        proofs = tuple(prove_range(params, o, n_bits, rng) for o in output_openings)
    tx = ConcealedTx(tuple(ref for ref, _ in spend_openings), outputs, proofs)
    tx = replace(tx, balance_sig=sign(params, kp, tx.signed_message(params), rng, domain=BALANCE))
    packet = OpeningPacket(
        {i: o for i, (_, o) in enumerate(spend_openings)},
        dict(enumerate(output_openings)),
    )
    return tx, packet


def build_concealed_tx(params, spend_openings, payouts, rng, *, n_bits=DEFAULT_BITS,
                       with_range_proofs=True):
    """Bank-side construction of a concealed transaction.

    spend_openings: list of (InputRef, Opening) for the UTXOs being spent.
    payouts: list of (value, owner_pubkey).
    Returns (tx without payer signatures, OpeningPacket).
    """
    check_bits(params, n_bits)
    total_in = sum(o.value for _, o in spend_openings)
    total_out = sum(v for v, _ in payouts)
    if total_in != total_out:
        raise UnbalancedAmounts(f"inputs sum to {total_in}, payouts to {total_out}")
    for v, _ in payouts:
        if not 0 <= v < (1 << n_bits):
            raise ValueOutOfRange(f"payout {v} outside [0, 2^{n_bits})")
    outs = [random_opening(params, v, rng) for v, _ in payouts]
    return assemble_concealed_tx(params, spend_openings, outs, [pk for _, pk in payouts], rng,
                                 n_bits=n_bits, with_range_proofs=with_range_proofs)


def payer_review(params, tx, packet, intent, *, payer_keys=None, spend=None):
    """Payer-side check before signing.

    Every input owned by one of ``payer_keys`` (all inputs when None) must be
    opened by the packet, and nothing else; when ``spend`` is given the owned
    inputs must be exactly those UTXO ids.  The opened outputs must match
    ``intent`` as a multiset of (value, owner_pubkey), and the owned inputs
    must cover exactly the intended total.
    """
    if payer_keys is None:
        owned = set(range(len(tx.inputs)))
    else:
        keys = set(payer_keys)
        owned = {i for i, inp in enumerate(tx.inputs) if inp.owner_pubkey in keys}
    if set(packet.inputs) != owned:
        return False
    if spend is not None and Counter(tx.inputs[i].utxo_id for i in owned) != Counter(spend):
        return False
    for i, o in packet.inputs.items():
        if not open_check(params, tx.inputs[i].commitment, o):
            return False
    opened = []
    for j, o in packet.outputs.items():
        if not 0 <= j < len(tx.outputs):
            return False
        out = tx.outputs[j]
        if not open_check(params, out.commitment, o):
            return False
        opened.append((o.value, out.owner_pubkey))
    if Counter(opened) != Counter((v, pk) for v, pk in intent):
        return False
    return sum(o.value for o in packet.inputs.values()) == sum(v for v, _ in intent)


def payer_sign(params, tx, payer_keypair, rng):
    return sign(params, payer_keypair, tx.signed_message(params), rng, domain=PAYER)


def check_authorization(ledger_view, params, tx):
    """Inputs live and unmodified, and exactly one valid signature per input owner."""
    if not tx.inputs:
        return False
    ids = [inp.utxo_id for inp in tx.inputs]
    if len(set(ids)) != len(ids):
        return False
    for inp in tx.inputs:
        rec = ledger_view.get(inp.utxo_id)
        if rec is None or rec.owner_pubkey != inp.owner_pubkey or rec.commitment != inp.commitment:
            return False
    signers = [pub for pub, _ in tx.payer_sigs]
    if len(set(signers)) != len(signers) or set(signers) != tx.input_owners():
        return False
    msg = tx.signed_message(params)
    return all(verify(params, params.g, pub, msg, sig, domain=PAYER) for pub, sig in tx.payer_sigs)


def check_ranges(params, tx, n_bits=DEFAULT_BITS):
    if len(tx.range_proofs) != len(tx.outputs):
        return False
    return all(verify_range(params, out.commitment, rp, n_bits)
               for out, rp in zip(tx.outputs, tx.range_proofs))


def check_balance(params, tx):
    """Return (ok, z) where z = prod(inputs) / prod(outputs) is the balance public key."""
    z = combine(params, [i.commitment for i in tx.inputs], [o.commitment for o in tx.outputs])
    if tx.balance_sig is None:
        return False, z
    ok = verify(params, params.h, z, tx.signed_message(params), tx.balance_sig, domain=BALANCE)
    return ok, z


def central_verify(ledger_view, params, tx, *, n_bits=DEFAULT_BITS):
    """Run the three central-bank checks; failures are flags, never exceptions."""
    payer_ok = check_authorization(ledger_view, params, tx)
    range_ok = check_ranges(params, tx, n_bits)
    balance_ok, z = check_balance(params, tx)
    return VerifyReport(payer_ok, range_ok, balance_ok, z)
