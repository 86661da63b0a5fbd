"""Coinjoin aggregation of concealed transactions and k-counterparty-anonymity.

Each payer's balanced transaction (a component) is merged with others into
one transaction whose input and output order is shuffled, so component
boundaries disappear.  Because the balance key is additive in the blinding
randomness, the bank can sign the aggregate with alpha = sum of component
alphas.  Every distinct input owner signs the aggregate.
"""

import threading
from dataclasses import dataclass, field

from .group import random_scalar
from .pedersen import Opening, commit
from .rangeproof import DEFAULT_BITS, prove_range
from .schnorr import BALANCE, ZeroBalanceKey, balance_key, sign
from .txbuild import ConcealedTx, OpeningPacket, OutputRecord, payer_review


class EmptyBatch(ValueError):
    pass


class UnknownPayer(KeyError):
    pass


@dataclass(frozen=True)
class TxComponent:
    """One payer's balanced transaction plus the openings the bank retains."""

    payer: str
    tx: ConcealedTx
    packet: OpeningPacket

    def alpha(self, params):
        r_in = sum(o.randomness for o in self.packet.inputs.values())
        r_out = sum(o.randomness for o in self.packet.outputs.values())
        return (r_in - r_out) % params.q


@dataclass(frozen=True)
class Aggregate:
    tx: ConcealedTx
    packets: dict
    # position in the aggregate -> (component index, position in component)
    input_origin: tuple
    output_origin: tuple


@dataclass(frozen=True)
class PayerView:
    payer: str
    tx: ConcealedTx
    packet: OpeningPacket


def aggregate(params, components, rng, *, n_bits=DEFAULT_BITS):
    """Merge balanced components into one transaction pending payer signatures."""
    if not components:
        raise EmptyBatch("no components to aggregate")
    ins = [(ci, i) for ci, comp in enumerate(components) for i in range(len(comp.tx.inputs))]
    outs = [(ci, j) for ci, comp in enumerate(components) for j in range(len(comp.tx.outputs))]
    rng.shuffle(ins)
    rng.shuffle(outs)

    out_openings = [components[ci].packet.outputs[j] for ci, j in outs]
    in_randomness = [components[ci].packet.inputs[i].randomness for ci, i in ins]
    outputs = [components[ci].tx.outputs[j] for ci, j in outs]
    proofs = [components[ci].tx.range_proofs[j] if components[ci].tx.range_proofs else None
              for ci, j in outs]
    while True:
        try:
            kp = balance_key(params, in_randomness, [o.randomness for o in out_openings])
            break
        except ZeroBalanceKey:
            if not out_openings:
                raise
            # fresh blinding for the last output, which needs a new proof too
            last = out_openings[-1]
            out_openings[-1] = Opening(last.value, random_scalar(params, rng))
            outputs[-1] = OutputRecord(commit(params, out_openings[-1]), outputs[-1].owner_pubkey)
            proofs[-1] = None
    proofs = [rp if rp is not None else prove_range(params, o, n_bits, rng)
              for rp, o in zip(proofs, out_openings)]

    tx = ConcealedTx(
        tuple(components[ci].tx.inputs[i] for ci, i in ins),
        tuple(outputs),
        tuple(proofs),
    )
    tx = ConcealedTx(tx.inputs, tx.outputs, tx.range_proofs,
                     sign(params, kp, tx.signed_message(params), rng, domain=BALANCE))

    packets = {}
    for ci, comp in enumerate(components):
        packet = packets.setdefault(comp.payer, OpeningPacket({}, {}))
        for pos, (cj, i) in enumerate(ins):
            if cj == ci:
                packet.inputs[pos] = comp.packet.inputs[i]
        for pos, (cj, j) in enumerate(outs):
            if cj == ci:
                packet.outputs[pos] = out_openings[pos]
    return Aggregate(tx, packets, tuple(ins), tuple(outs))


def extract_view(agg, payer):
    if payer not in agg.packets:
        raise UnknownPayer(payer)
    return PayerView(payer, agg.tx, agg.packets[payer])


def review_view(params, view, intent, payer_keys, *, spend=None):
    """Payer check on an aggregate: no extra inputs under the payer's keys, all outputs present."""
    return payer_review(params, view.tx, view.packet, intent, payer_keys=payer_keys, spend=spend)


def anonymity_of(tx, *, count_change_as_payee=True):
    """k = min(distinct payer keys, distinct payee keys)."""
    payers = {inp.owner_pubkey for inp in tx.inputs}
    payees = {out.owner_pubkey for out in tx.outputs}
    if not count_change_as_payee:
        payees -= payers
    return min(len(payers), len(payees))


@dataclass(frozen=True)
class BatchPolicy:
    mode: str
    period: float = 0.0
    k_min: int = 0
    timeout: float = 0.0

    def __post_init__(self):
        if self.mode == "fixed":
            if self.period <= 0:
                raise ValueError("fixed-window policy needs a positive period")
        elif self.mode == "threshold":
            if self.k_min < 1 or self.timeout <= 0:
                raise ValueError("threshold policy needs k_min >= 1 and a positive timeout")
        else:
            raise ValueError(f"unknown batch mode {self.mode!r}")

    @classmethod
    def fixed(cls, period):
        return cls("fixed", period=period)

    @classmethod
    def threshold(cls, k_min, timeout):
        return cls("threshold", k_min=k_min, timeout=timeout)

    @classmethod
    def from_config(cls, cfg):
        """Build from a node-config mapping, e.g. {"mode": "threshold", "k_min": 3, "timeout": 10}."""
        mode = cfg["mode"]
        if mode == "fixed":
            return cls.fixed(float(cfg["period"]))
        return cls.threshold(int(cfg["k_min"]), float(cfg["timeout"]))


@dataclass
class Batcher:
    """Pending Coinjoin batch: many submitters, one flusher."""

    policy: BatchPolicy
    window_opened_at: float | None = None
    components: list = field(default_factory=list)
    flushed_k: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.policy.mode == "fixed" and self.window_opened_at is None:
            self.window_opened_at = 0.0

    def submit(self, component, now):
        with self._lock:
            if self.window_opened_at is None:
                self.window_opened_at = now
            self.components.append(component)

    def distinct_payers(self):
        return len({c.payer for c in self.components})

    def poll(self, now):
        """Return the components to aggregate if the policy fires, else None.

        A fixed window that closes empty returns [] and reopens.
        """
        with self._lock:
            pol = self.policy
            if pol.mode == "fixed":
                if now < self.window_opened_at + pol.period:
                    return None
                out, self.components = self.components, []
                self.window_opened_at = now
            else:
                if self.window_opened_at is None:
                    return None
                timed_out = now >= self.window_opened_at + pol.timeout
                if self.distinct_payers() < pol.k_min and not timed_out:
                    return None
                out, self.components = self.components, []
                self.window_opened_at = None
            self.flushed_k.append(len({c.payer for c in out}))
            return out
