import io

import pytest

from rcbdc.bench import fit_shape, run_bench, write_csv


def test_bench_rows(test_group):
    rows = run_bench(test_group, sizes=(2, 4), reps=2, n_bits=16)
    assert [(r.operation, r.size) for r in rows] == [
        ("cb_verify", 2), ("bank_build", 2), ("cb_verify", 4), ("bank_build", 4)]
    assert all(r.mean_ns > 0 for r in rows)
    buf = io.StringIO()
    write_csv(rows, buf)
    assert buf.getvalue().splitlines()[0] == "operation,size,mean_ns"


def test_fit_shape():
    linear = fit_shape([2, 4, 8, 16], [20, 40, 80, 160])
    assert linear.r_squared == pytest.approx(1.0) and linear.exponent == pytest.approx(1.0)
    flat = fit_shape([2, 4, 8, 16], [100, 101, 100, 102])
    assert abs(flat.exponent) < 0.05
