"""Command-line entry point.

mint, pay and batch work on a workspace directory (--out): each appends a
line to the workspace script and replays it from scratch under the stored
seed, rewriting the transcript, frame log, ledger snapshot and receipts.
"""

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import anonmodel, attackdemo, bench
from .codec import Reader
from .group import GroupParams, generate_group_params, profile_params
from .ledger import ConfirmationRecord, snapshot, verify_confirmation
from .merkle import MerklePath
from .pedersen import Commitment, Opening
from .pseudonym import MasterSecret, seal_master
from .scenario import ScenarioConfig, parse_script, run_scenario
from .schnorr import keygen
from .txbuild import OutputRecord


def _params(args):
    if args.params:
        return GroupParams.from_bytes(Path(args.params).read_bytes())
    return profile_params(args.profile)


def _emit(args, text):
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_params_gen(args):
    if args.bits:
        params = generate_group_params(args.bits, str(args.seed).encode())
    else:
        params = profile_params(args.profile)
    if not args.out:
        raise SystemExit("params-gen needs --out")
    Path(args.out).write_bytes(params.to_bytes())
    print(f"p: {params.p.bit_length()} bits, q: {params.q.bit_length()} bits, digest {params.digest.hex()}")


def cmd_keygen(args):
    params = _params(args)
    if args.passphrase:
        master = MasterSecret(random.Random(args.seed).randbytes(32)) if args.seed else MasterSecret.generate()
        Path(args.out or "keystore.bin").write_bytes(seal_master(master, args.passphrase))
        print(f"sealed master seed to {args.out or 'keystore.bin'}")
        return
    rng = random.Random(args.seed) if args.seed else random.SystemRandom()
    kp = keygen(params, params.g, rng)
    _emit(args, json.dumps({"public": hex(kp.public), "private": hex(kp.private)}, indent=2) + "\n")


def _workspace(args):
    if not args.out:
        raise SystemExit("mint/pay/batch need --out WORKSPACE_DIR")
    ws = Path(args.out)
    ws.mkdir(parents=True, exist_ok=True)
    meta = ws / "workspace.json"
    if not meta.exists():
        meta.write_text(json.dumps({"profile": args.profile, "params": args.params,
                                    "seed": args.seed or 0, "n_bits": args.n_bits}))
    return ws, json.loads(meta.read_text())


def _receipt_json(params, cb_pubkey, msg):
    return {
        "params": params.to_bytes().hex(),
        "cb_pubkey": hex(cb_pubkey),
        "commitment": hex(msg.output.commitment.point),
        "owner": hex(msg.output.owner_pubkey),
        "value": msg.opening.value,
        "randomness": hex(msg.opening.randomness),
        "path": msg.path.to_bytes().hex(),
        "confirmation": msg.confirmation.to_bytes(params).hex(),
    }


def _replay_workspace(ws, meta, line):
    script = ws / "script.txt"
    text = (script.read_text() if script.exists() else "") + line + "\n"
    parse_script(text)
    params = (GroupParams.from_bytes(Path(meta["params"]).read_bytes()) if meta["params"]
              else profile_params(meta["profile"]))
    config = ScenarioConfig(seed=meta["seed"], n_bits=meta["n_bits"], params=params)
    tr = run_scenario(config, text)
    script.write_text(text)
    write_transcript(tr, ws)
    with open(ws / "ledger.snap", "wb") as f:
        snapshot(tr.ledger, f)
    rdir = ws / "receipts"
    rdir.mkdir(exist_ok=True)
    for i, (name, ok, msg) in enumerate(tr.receipts):
        if ok:
            path = rdir / f"{i:04d}-{name}.json"
            path.write_text(json.dumps(_receipt_json(params, tr.ledger.cb_keypair.public, msg), indent=2))
    print(tr.rows[-1][7])
    for row in tr.rows:
        if row[2] in ("decision", "insufficient-funds", "aggregate"):
            print(f"{row[2]}: {row[7]}")
    return tr


def write_transcript(tr, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "transcript.csv").write_text(tr.to_csv())
    (directory / "frames.bin").write_bytes(tr.frame_log())


def cmd_mint(args):
    ws, meta = _workspace(args)
    _replay_workspace(ws, meta, f"MINT {args.user} {args.value}")


def cmd_pay(args):
    ws, meta = _workspace(args)
    _replay_workspace(ws, meta, f"PAY {args.payer} {' '.join(args.payouts)}")


def cmd_batch(args):
    ws, meta = _workspace(args)
    _replay_workspace(ws, meta, "BATCH " + " | ".join(args.groups))


def cmd_verify_confirmation(args):
    raw = json.loads(Path(args.receipt).read_text())
    params = GroupParams.from_bytes(bytes.fromhex(raw["params"]))
    r = Reader(bytes.fromhex(raw["path"]))
    path = MerklePath.read(r)
    r.expect_end()
    conf = ConfirmationRecord.read(Reader(bytes.fromhex(raw["confirmation"])), params)
    output = OutputRecord(Commitment(int(raw["commitment"], 16)), int(raw["owner"], 16))
    opening = Opening(raw["value"], int(raw["randomness"], 16))
    ok = verify_confirmation(params, int(raw["cb_pubkey"], 16), output, opening, path, conf)
    print("true" if ok else "false")
    return 0 if ok else 1


def cmd_simulate(args):
    sim = anonmodel.simulate_waiting(args.lam, args.k_max, args.trials, args.seed or 0)
    if args.out and args.out != "-":
        with open(args.out, "w") as f:
            sim.to_csv(f)
    else:
        sim.to_csv(sys.stdout)


def cmd_model(args):
    lines = []
    if args.curve == "tail":
        lines.append("lamT,k,prob_at_least,achieved_k")
        for mu in range(args.step, args.mu_max + 1, args.step):
            for k in args.k:
                lines.append(f"{mu},{k},{anonmodel.prob_at_least(1.0, mu, k):.10f},"
                             f"{anonmodel.achieved_k(1.0, mu)}")
    else:
        lines.append("k,p50,p90,p99,p999")
        for k in range(2, args.k_max + 1):
            qs = [anonmodel.waiting_quantile(args.lam, k, p) for p in (0.5, 0.9, 0.99, 0.999)]
            lines.append(f"{k}," + ",".join(f"{x:.6f}" for x in qs))
    _emit(args, "\n".join(lines) + "\n")


def cmd_bench(args):
    params = _params(args)
    rows = bench.run_bench(params, sizes=tuple(args.sizes), reps=args.reps, seed=args.seed or 0)
    if args.out and args.out != "-":
        with open(args.out, "w") as f:
            bench.write_csv(rows, f)
    else:
        bench.write_csv(rows, sys.stdout)


def cmd_attack_demo(args):
    config = attackdemo.ToyCipherConfig(args.bits)
    rate = attackdemo.forgery_trial(config, args.q1, args.trials, args.seed or 0)
    print(f"empirical forgery rate: {rate:.6f}")
    print(f"theoretical rate:       {attackdemo.theoretical_rate(config, args.q1):.6f}")


def cmd_scenario(args):
    config = ScenarioConfig(profile=args.profile, seed=args.seed or 0, latency=args.latency,
                            n_bits=args.n_bits, params=_params(args) if args.params else None)
    tr = run_scenario(config, Path(args.script).read_text())
    if args.out:
        write_transcript(tr, args.out)
    else:
        sys.stdout.write(tr.to_csv())
    failed = [e for e in tr.expectations if not e[3]]
    print(f"expectations: {len(tr.expectations) - len(failed)}/{len(tr.expectations)} met; "
          f"digest {tr.digest()}", file=sys.stderr)
    return 1 if failed else 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", default=argparse.SUPPRESS, help="group parameter file")
    common.add_argument("--profile", choices=("toy", "test", "prod"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="rcbdc", description="Concealed-UTXO retail CBDC toolkit")
    parser.add_argument("--params", default=None, help="group parameter file")
    parser.add_argument("--profile", choices=("toy", "test", "prod"), default="test")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=fn)
        return p

    p = add("params-gen", cmd_params_gen, help="write group parameters")
    p.add_argument("--bits", type=int, default=None, help="generate a custom group of this size")

    p = add("keygen", cmd_keygen, help="Schnorr keypair, or a sealed master seed with --passphrase")
    p.add_argument("--passphrase", default=os.environ.get("RCBDC_PASSPHRASE"))

    for name, fn in (("mint", cmd_mint), ("pay", cmd_pay), ("batch", cmd_batch)):
        p = add(name, fn)
        p.add_argument("--n-bits", type=int, default=16)
        if name == "mint":
            p.add_argument("user")
            p.add_argument("value", type=int)
        elif name == "pay":
            p.add_argument("payer")
            p.add_argument("payouts", nargs="+", help="payee:value")
        else:
            p.add_argument("groups", nargs="+", help='"payer payee:value ..." per component')

    p = add("verify-confirmation", cmd_verify_confirmation)
    p.add_argument("receipt")

    p = add("simulate", cmd_simulate, help="Monte Carlo waiting times, CSV")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--k-max", type=int, default=100)
    p.add_argument("--trials", type=int, default=10_000)

    p = add("model", cmd_model, help="analytic anonymity curves, CSV")
    p.add_argument("--curve", choices=("tail", "wait"), default="tail")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--k", type=int, nargs="+", default=[20, 50, 80])
    p.add_argument("--mu-max", type=int, default=200)
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--k-max", type=int, default=100)

    p = add("bench", cmd_bench, help="verification and build timings, CSV")
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64])
    p.add_argument("--reps", type=int, default=20)

    p = add("attack-demo", cmd_attack_demo, help="counter-mode redemption forgery at toy width")
    p.add_argument("--bits", type=int, default=16)
    p.add_argument("--q1", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100_000)

    p = add("scenario", cmd_scenario, help="run a scenario script")
    p.add_argument("script")
    p.add_argument("--latency", type=float, default=0.0)
    p.add_argument("--n-bits", type=int, default=16)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args) or 0


if __name__ == "__main__":
    sys.exit(main())
