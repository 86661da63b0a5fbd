"""Scripted end-to-end runs over wallets, one bank and the central bank.

Every interaction between roles is an encoded frame on an in-process queue,
so the transcript holds exactly the bytes each role received.  Script lines:

    MINT <user> <value>
    PAY <payer> <payee>:<value> [<payee>:<value> ...]
    BATCH <payer> <payee>:<value> ... | <payer> <payee>:<value> ...
    REPLAY
    DOUBLESPEND <payer> <payee>:<value> ...
    FORGE <payer> <payee>:<value> ... [missing|forged]
    EXPECT-REJECT <reason>
    EXPECT-ACCEPT

Rejections are recorded and never stop the run.
"""

import csv
import hashlib
import heapq
import io
import random
from dataclasses import dataclass, field

from .codec import Writer
from .coinjoin import Batcher, BatchPolicy, TxComponent, aggregate, anonymity_of, extract_view
from .group import profile_params
from .ledger import (TxRejected, apply_tx, audit, confirmation_path, issue, live_set_digest,
                     new_ledger, utxo_id_for, verify_confirmation)
from .pseudonym import IdentityRegistry, MasterSecret
from .schnorr import PAYER, keygen, sign
from .txbuild import InputRef, build_concealed_tx, payer_review, payer_sign
from .wire import (BANK, CENTRAL_BANK, USER, Confirmation, PaymentRequest, Rejection, SignedComponent,
                   SubmitTx, TxProposal, carried_openings, decode, encode)

CB_NAME = "cb"
BANK_NAME = "bank"


class ScriptError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    profile: str = "test"
    seed: int = 0
    latency: float = 0.0
    n_bits: int = 16
    params: object = None

    def group(self):
        return self.params if self.params is not None else profile_params(self.profile)


@dataclass
class Transcript:
    rows: list = field(default_factory=list)
    # (time, src, dst, frame bytes)
    frames: list = field(default_factory=list)
    receipts: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    final_root: bytes = b""
    audit_ok: bool = False
    params: object = None
    ledger: object = None
    registry: object = None

    def log(self, time, event, src="", dst="", msg_type="", seq="", detail=""):
        self.rows.append((len(self.rows), f"{time:.6f}", event, src, dst, msg_type, seq, detail))

    def to_csv(self):
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(("step", "time", "event", "src", "dst", "msg_type", "seq", "detail"))
        out.writerows(self.rows)
        return buf.getvalue()

    def frame_log(self):
        w = Writer()
        for t, src, dst, frame in self.frames:
            w.blob(f"{t:.6f}".encode()).blob(src.encode()).blob(dst.encode()).blob(frame)
        return w.getvalue()

    def digest(self):
        return hashlib.sha256(self.to_csv().encode() + self.frame_log() + self.final_root).hexdigest()

    def outcomes(self):
        """Central-bank decisions in order: 'accepted' or the rejection reason."""
        return [row[7].split(";")[0] for row in self.rows if row[2] == "decision"]

    def frames_to(self, name):
        return [frame for _, _, dst, frame in self.frames if dst == name]

    def openings_delivered_to(self, name):
        found = []
        for frame in self.frames_to(name):
            found.extend(carried_openings(decode(frame, self.params)))
        return found


class InProcessTransport:
    """Delivery queue ordered by arrival time, FIFO among equal times."""

    def __init__(self, params, transcript, latency=0.0):
        self.params = params
        self.transcript = transcript
        self.latency = latency
        self.now = 0.0
        self._queue = []
        self._counter = 0
        self._seq = {}

    def next_seq(self, name):
        self._seq[name] = self._seq.get(name, 0) + 1
        return self._seq[name]

    def send(self, src, dst, msg):
        frame = encode(msg, self.params)
        t = self.now + self.latency
        self.transcript.frames.append((t, src, dst, frame))
        self.transcript.log(self.now, "send", src, dst, type(msg).__name__, msg.seq, f"{len(frame)}B")
        heapq.heappush(self._queue, (t, self._counter, src, dst, frame))
        self._counter += 1

    def run(self, nodes):
        while self._queue:
            t, _, src, dst, frame = heapq.heappop(self._queue)
            self.now = t
            nodes[dst].handle(decode(frame, self.params), src)


@dataclass
class _Pending:
    payers: tuple
    tx: object
    packets: dict
    out_openings: dict
    sigs: dict = field(default_factory=dict)


class Wallet:
    role = USER

    def __init__(self, world, name):
        self.world = world
        self.name = name
        seed = hashlib.sha256(b"rcbdc/wallet" + str(world.seed).encode() + b"/" + name.encode()).digest()
        self.master = MasterSecret(seed)
        self.keys = {}
        # utxo_id -> (InputRef, Opening)
        self.coins = {}
        self.pending = None
        self.in_flight = {}
        # coins handed to the last signed spend, kept for retries and replays
        self.last_spent = {}

    def fresh_pubkey(self):
        index, kp = self.master.next_keypair(self.world.params)
        self.keys[kp.public] = kp
        self.world.bank.registry.register(kp.public, self.name, index)
        return kp.public

    def balance(self):
        return sum(o.value for _, o in self.coins.values())

    def select(self, total):
        chosen, acc = [], 0
        for uid in sorted(self.coins):
            if acc >= total:
                break
            chosen.append(uid)
            acc += self.coins[uid][1].value
        return (chosen, acc) if acc >= total else (None, acc)

    def request(self, payouts, spend=None):
        """Ask the bank to pay ``payouts`` [(value, pubkey)], adding change to a fresh key."""
        w = self.world
        total = sum(v for v, _ in payouts)
        if spend is None:
            spend, acc = self.select(total)
            if spend is None:
                w.transcript.log(w.transport.now, "insufficient-funds", self.name, "", "", "",
                                 f"have={acc};need={total}")
                return False
        else:
            acc = sum(self.last_spent[uid][1].value for uid in spend)
        payouts = list(payouts)
        if acc > total:
            payouts.append((acc - total, self.fresh_pubkey()))
        self.pending = (tuple(spend), tuple(payouts))
        msg = PaymentRequest(USER, w.transport.next_seq(self.name), self.name, tuple(spend), tuple(payouts))
        w.transport.send(self.name, BANK_NAME, msg)
        return True

    def handle(self, msg, src):
        w = self.world
        if isinstance(msg, TxProposal):
            spend, intent = self.pending
            ok = payer_review(w.params, msg.tx, msg.packet, intent, payer_keys=self.keys, spend=spend)
            w.transcript.log(w.transport.now, "review", self.name, "", "", "", f"ok={int(ok)}")
            if not ok:
                return
            owners = sorted({msg.tx.inputs[i].owner_pubkey for i in msg.packet.inputs})
            digest = msg.tx.signed_message(w.params)
            for pk in owners:
                sig = payer_sign(w.params, msg.tx, self.keys[pk], w.rng)
                reply = SignedComponent(USER, w.transport.next_seq(self.name), self.name, digest, pk, sig)
                w.transport.send(self.name, BANK_NAME, reply)
            self.last_spent = {uid: self.coins.get(uid) or self.last_spent[uid] for uid in spend}
            self.in_flight = {uid: self.coins.pop(uid) for uid in spend if uid in self.coins}
        elif isinstance(msg, Confirmation):
            ok = verify_confirmation(w.params, w.cb_pubkey, msg.output, msg.opening, msg.path,
                                     msg.confirmation)
            uid = utxo_id_for(msg.confirmation.tx_id, msg.path.leaf_index)
            w.transcript.log(w.transport.now, "receipt", self.name, "", "", "",
                             f"ok={int(ok)};value={msg.opening.value};utxo={uid.hex()[:16]}")
            w.transcript.receipts.append((self.name, ok, msg))
            if ok and msg.output.owner_pubkey in self.keys:
                ref = InputRef(uid, msg.output.owner_pubkey, msg.output.commitment)
                self.coins[uid] = (ref, msg.opening)
        elif isinstance(msg, Rejection):
            # the spend did not happen; the coins are ours again
            self.coins.update(self.in_flight)
            self.in_flight = {}


class Bank:
    role = BANK

    def __init__(self, world, authorizer_pubkey):
        self.world = world
        self.registry = IdentityRegistry(world.params, authorizer_pubkey)
        # openings for every client UTXO this bank has seen, spent or not
        self.openings = {}
        self.live_hint = {}
        self.pending = {}
        self.submitted = {}
        self.last_submitted = None
        self.batcher = None
        self.batch_requests = {}

    def owner_of(self, pubkey):
        return self.registry.entries[pubkey][0]

    def _spend_openings(self, spend):
        return [(self.live_hint[uid], self.openings[uid]) for uid in spend]

    def _propose(self, payers, tx, packets):
        w = self.world
        digest = tx.signed_message(w.params)
        out_openings = {}
        for packet in packets.values():
            out_openings.update(packet.outputs)
        self.pending[digest] = _Pending(tuple(payers), tx, packets, out_openings)
        for payer in payers:
            msg = TxProposal(BANK, w.transport.next_seq(BANK_NAME), payer, tx, packets[payer])
            w.transport.send(BANK_NAME, payer, msg)

    def build(self, req):
        w = self.world
        return build_concealed_tx(w.params, self._spend_openings(req.spend), list(req.payouts), w.rng,
                                  n_bits=w.n_bits)

    def handle(self, msg, src):
        w = self.world
        if isinstance(msg, PaymentRequest):
            if any(uid not in self.openings for uid in msg.spend):
                w.transcript.log(w.transport.now, "bank-refused", BANK_NAME, msg.payer, "", "",
                                 "unknown-coin")
                return
            tx, packet = self.build(msg)
            if self.batcher is None:
                self._propose([msg.payer], tx, {msg.payer: packet})
                return
            self.batcher.submit(TxComponent(msg.payer, tx, packet), w.transport.now)
            batch = self.batcher.poll(w.transport.now)
            if batch:
                self.flush(batch)
        elif isinstance(msg, SignedComponent):
            pend = self.pending.get(msg.message_digest)
            if pend is None:
                return
            pend.sigs[msg.pubkey] = msg.signature
            if set(pend.sigs) == pend.tx.input_owners():
                del self.pending[msg.message_digest]
                self.submit(pend.tx.with_payer_sigs(pend.sigs.items()), pend)
        elif isinstance(msg, Confirmation):
            pend = self.submitted.get(msg.confirmation.tx_id)
            opening = msg.opening
            if opening is None and pend is not None:
                opening = pend.out_openings[msg.path.leaf_index]
            uid = utxo_id_for(msg.confirmation.tx_id, msg.path.leaf_index)
            self.openings[uid] = opening
            self.live_hint[uid] = InputRef(uid, msg.output.owner_pubkey, msg.output.commitment)
            fwd = Confirmation(BANK, w.transport.next_seq(BANK_NAME), msg.confirmation, msg.path,
                               msg.output, opening)
            w.transport.send(BANK_NAME, self.owner_of(msg.output.owner_pubkey), fwd)
        elif isinstance(msg, Rejection):
            pend = self.submitted.get(msg.tx_id)
            if pend is not None:
                for payer in pend.payers:
                    w.transport.send(BANK_NAME, payer,
                                     Rejection(BANK, w.transport.next_seq(BANK_NAME), msg.tx_id, msg.reason))

    def flush(self, batch):
        w = self.world
        self.batcher = None
        agg = aggregate(w.params, batch, w.rng, n_bits=w.n_bits)
        payers = [c.payer for c in batch]
        w.transcript.log(w.transport.now, "aggregate", BANK_NAME, "", "", "",
                         f"components={len(batch)};k={anonymity_of(agg.tx)}")
        self._propose(payers, agg.tx, {p: extract_view(agg, p).packet for p in payers})

    def submit(self, tx, pend):
        w = self.world
        self.submitted[tx.tx_id(w.params)] = pend
        self.last_submitted = (tx, pend)
        w.transport.send(BANK_NAME, CB_NAME, SubmitTx(BANK, w.transport.next_seq(BANK_NAME), tx))


class CentralBank:
    role = CENTRAL_BANK

    def __init__(self, world, state):
        self.world = world
        self.state = state

    def _confirm_outputs(self, tx, conf, openings=None):
        w = self.world
        for j, out in enumerate(tx.outputs):
            msg = Confirmation(CENTRAL_BANK, w.transport.next_seq(CB_NAME), conf,
                               confirmation_path(w.params, tx, j), out,
                               openings[j] if openings is not None else None)
            w.transport.send(CB_NAME, BANK_NAME, msg)

    def mint(self, payouts):
        tx, conf, packet = issue(self.state, payouts)
        self.world.transcript.log(self.world.transport.now, "mint", CB_NAME, "", "", "",
                                  f"tx={conf.tx_id.hex()[:16]};total={sum(v for v, _ in payouts)}")
        self._confirm_outputs(tx, conf, packet.outputs)

    def handle(self, msg, src):
        w = self.world
        if not isinstance(msg, SubmitTx):
            return
        tx = msg.tx
        tx_id = tx.tx_id(w.params)
        try:
            conf = apply_tx(self.state, tx)
        except TxRejected as exc:
            rep = exc.report
            flags = "report=none" if rep is None else (
                f"payer_sig_ok={int(rep.payer_sig_ok)};range_ok={int(rep.range_ok)};"
                f"balance_ok={int(rep.balance_ok)}")
            w.transcript.log(w.transport.now, "decision", CB_NAME, "", "", "",
                             f"{exc.reason};tx={tx_id.hex()[:16]};{flags}")
            w.transport.send(CB_NAME, src, Rejection(CENTRAL_BANK, w.transport.next_seq(CB_NAME),
                                                     tx_id, exc.reason))
            return
        w.transcript.log(w.transport.now, "decision", CB_NAME, "", "", "",
                         f"accepted;tx={tx_id.hex()[:16]};payer_sig_ok=1;range_ok=1;balance_ok=1;"
                         f"k={anonymity_of(tx)}")
        self._confirm_outputs(tx, conf)


class World:
    def __init__(self, config):
        self.config = config
        self.seed = config.seed
        self.params = config.group()
        self.n_bits = config.n_bits
        self.rng = random.Random(config.seed)
        self.transcript = Transcript(params=self.params)
        self.transport = InProcessTransport(self.params, self.transcript, config.latency)
        state = new_ledger(self.params, n_bits=config.n_bits, rng=self.rng)
        self.cb_pubkey = state.cb_keypair.public
        self.authorizer = keygen(self.params, self.params.g, self.rng)
        self.cb = CentralBank(self, state)
        self.bank = Bank(self, self.authorizer.public)
        self.wallets = {}

    def wallet(self, name):
        if name in (CB_NAME, BANK_NAME):
            raise ScriptError(f"{name!r} is a reserved node name")
        if name not in self.wallets:
            self.wallets[name] = Wallet(self, name)
        return self.wallets[name]

    def nodes(self):
        return {CB_NAME: self.cb, BANK_NAME: self.bank, **self.wallets}

    def settle(self):
        self.transport.run(self.nodes())

    def payouts(self, specs):
        out = []
        for spec in specs:
            name, _, value = spec.partition(":")
            if not value.isdigit():
                raise ScriptError(f"bad payout {spec!r}, expected name:value")
            out.append((int(value), self.wallet(name).fresh_pubkey()))
        return out


def parse_script(text):
    commands = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        op = op.upper()
        if op not in {"MINT", "PAY", "BATCH", "REPLAY", "DOUBLESPEND", "FORGE", "EXPECT-REJECT",
                      "EXPECT-ACCEPT"}:
            raise ScriptError(f"line {lineno}: unknown command {op}")
        commands.append((lineno, op, args))
    return commands


def _forge(world, payer, specs, mode):
    """Bank spends a client's coins without the client's signature."""
    w = world
    wallet = w.wallet(payer)
    payouts = w.payouts(specs)
    spend, acc = wallet.select(sum(v for v, _ in payouts))
    if spend is None:
        w.transcript.log(w.transport.now, "insufficient-funds", payer)
        return
    if acc > sum(v for v, _ in payouts):
        payouts.append((acc - sum(v for v, _ in payouts), w.wallet("mallory").fresh_pubkey()))
    tx, packet = build_concealed_tx(w.params, w.bank._spend_openings(spend), payouts, w.rng,
                                    n_bits=w.n_bits)
    sigs = []
    if mode == "forged":
        msg = tx.signed_message(w.params)
        for pk in sorted(tx.input_owners()):
            impostor = keygen(w.params, w.params.g, w.rng)
            sigs.append((pk, sign(w.params, impostor, msg, w.rng, domain=PAYER)))
    pend = _Pending((payer,), tx, {payer: packet}, dict(packet.outputs))
    w.transcript.log(w.transport.now, "forge", BANK_NAME, "", "", "", mode)
    w.bank.submit(tx.with_payer_sigs(sigs), pend)


def run_scenario(config, script):
    """Run ``script`` (text or parsed commands) and return the Transcript."""
    commands = parse_script(script) if isinstance(script, str) else script
    w = World(config)
    tr = w.transcript
    for lineno, op, args in commands:
        tr.log(w.transport.now, "command", "", "", "", "", f"{lineno}:{op} {' '.join(args)}".strip())
        if op == "MINT":
            if len(args) != 2 or not args[1].isdigit():
                raise ScriptError(f"line {lineno}: MINT <user> <value>")
            w.cb.mint([(int(args[1]), w.wallet(args[0]).fresh_pubkey())])
        elif op == "PAY":
            w.wallet(args[0]).request(w.payouts(args[1:]))
        elif op == "BATCH":
            groups = [g.split() for g in " ".join(args).split("|")]
            if len({g[0] for g in groups}) != len(groups):
                raise ScriptError(f"line {lineno}: one group per payer in a batch")
            w.bank.batcher = Batcher(BatchPolicy.threshold(len({g[0] for g in groups}), float("inf")))
            for g in groups:
                w.wallet(g[0]).request(w.payouts(g[1:]))
        elif op == "REPLAY":
            if w.bank.last_submitted is None:
                raise ScriptError(f"line {lineno}: nothing to replay")
            tx, pend = w.bank.last_submitted
            w.bank.submit(tx, pend)
        elif op == "DOUBLESPEND":
            wallet = w.wallet(args[0])
            if not wallet.last_spent:
                raise ScriptError(f"line {lineno}: {args[0]} has spent nothing yet")
            wallet.request(w.payouts(args[1:]), spend=tuple(wallet.last_spent))
        elif op == "FORGE":
            mode = "forged"
            if args and args[-1] in ("missing", "forged"):
                mode = args.pop()
            _forge(w, args[0], args[1:], mode)
        w.settle()
        if op == "BATCH" and w.bank.batcher is not None:
            # some payer could not fund its part; aggregate whoever did
            leftover = w.bank.batcher.components
            w.bank.batcher = None
            if leftover:
                w.bank.flush(leftover)
                w.settle()
        if op in ("EXPECT-REJECT", "EXPECT-ACCEPT"):
            outcomes = tr.outcomes()
            last = outcomes[-1] if outcomes else None
            want = "accepted" if op == "EXPECT-ACCEPT" else (args[0] if args else None)
            ok = last == want
            tr.expectations.append((lineno, want, last, ok))
            tr.log(w.transport.now, "expect", "", "", "", "", f"want={want};got={last};ok={int(ok)}")
    tr.final_root = live_set_digest(w.params, w.cb.state.live_utxos)
    tr.audit_ok = audit(w.cb.state)
    tr.ledger = w.cb.state
    tr.registry = w.bank.registry
    tr.log(w.transport.now, "final", CB_NAME, "", "", "",
           f"live_root={tr.final_root.hex()};audit_ok={int(tr.audit_ok)}")
    return tr
