"""Timing of central-bank verification and bank-side construction against m + n."""

import gc
import random
import time
from dataclasses import dataclass

import numpy as np

from .ledger import UtxoRecord, utxo_id_for
from .pedersen import commit, random_opening
from .schnorr import keygen
from .txbuild import InputRef, build_concealed_tx, check_authorization, check_balance, payer_sign


@dataclass(frozen=True)
class BenchRow:
    operation: str
    size: int
    mean_ns: float


def _setup(params, m, n, rng):
    payer = keygen(params, params.g, rng)
    payee = keygen(params, params.g, rng)
    view, spend = {}, []
    for i in range(m):
        o = random_opening(params, rng.randrange(1, 1000), rng)
        uid = utxo_id_for(b"\x00" * 32, i)
        c = commit(params, o)
        view[uid] = UtxoRecord(uid, c, payer.public, b"\x00" * 32, i)
        spend.append((InputRef(uid, payer.public, c), o))
    total = sum(o.value for _, o in spend)
    values = [total // n] * n
    values[-1] += total - sum(values)
    return payer, view, spend, [(v, payee.public) for v in values]


def _mean_ns(fn, reps, batches=5):
    """Mean time per call of the fastest of ``batches`` runs of ``reps`` calls."""
    fn()
    # like timeit, keep the collector out of the measurement
    enabled = gc.isenabled()
    gc.disable()
    try:
        best = _best_batch(fn, reps, batches)
    finally:
        if enabled:
            gc.enable()
    return best


def _best_batch(fn, reps, batches):
    best = None
    for _ in range(batches):
        start = time.perf_counter_ns()
        for _ in range(reps):
            fn()
        elapsed = (time.perf_counter_ns() - start) / reps
        best = elapsed if best is None else min(best, elapsed)
    return best


def run_bench(params, sizes=(2, 4, 8, 16, 32, 64), reps=20, seed=0, n_bits=32):
    """Rows of (operation, m + n, mean ns) with m = n = size / 2, range proofs excluded."""
    rng = random.Random(seed)
    rows = []
    for size in sizes:
        m = max(1, size // 2)
        n = max(1, size - m)
        payer, view, spend, payouts = _setup(params, m, n, rng)
        tx, _ = build_concealed_tx(params, spend, payouts, rng, n_bits=n_bits, with_range_proofs=False)
        tx = tx.with_payer_sigs([(payer.public, payer_sign(params, tx, payer, rng))])

        def verify():
            assert check_authorization(view, params, tx) and check_balance(params, tx)[0]

        def build():
            build_concealed_tx(params, spend, payouts, rng, n_bits=n_bits, with_range_proofs=False)

        rows.append(BenchRow("cb_verify", m + n, _mean_ns(verify, reps)))
        rows.append(BenchRow("bank_build", m + n, _mean_ns(build, reps)))
    return rows


def write_csv(rows, sink):
    sink.write("operation,size,mean_ns\n")
    for r in rows:
        sink.write(f"{r.operation},{r.size},{r.mean_ns:.0f}\n")


@dataclass(frozen=True)
class ShapeFit:
    slope: float
    intercept: float
    r_squared: float
    # exponent of the log-log fit: 1 for linear growth, 0 for constant cost
    exponent: float


def fit_shape(sizes, times):
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(times, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2)
    exponent = np.polyfit(np.log(x), np.log(y), 1)[0]
    return ShapeFit(float(slope), float(intercept), float(r2), float(exponent))
