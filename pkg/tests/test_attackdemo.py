import random

import pytest

from rcbdc.attackdemo import (ToyCipherConfig, encrypt, exhaustive_rate, forgery_trial,
                              pedersen_second_openings, pedersen_substitution_trial, theoretical_rate)
from rcbdc.pedersen import Opening


def test_rate_at_16_bits():
    cfg = ToyCipherConfig(16)
    rate = forgery_trial(cfg, 1000, 100_000, seed=0)
    assert rate == pytest.approx(theoretical_rate(cfg, 1000), abs=0.005)


def test_rate_edges():
    cfg = ToyCipherConfig(8)
    assert forgery_trial(cfg, cfg.mask, 2000, seed=1) == 0.0
    assert theoretical_rate(cfg, cfg.mask) == 0.0
    assert forgery_trial(cfg, 0, 2000, seed=1) == pytest.approx(255 / 256, abs=0.01)
    with pytest.raises(ValueError):
        forgery_trial(cfg, 256, 10, seed=0)
    with pytest.raises(ValueError):
        ToyCipherConfig(4)


def test_rate_falls_with_amount():
    cfg = ToyCipherConfig(12)
    rates = [forgery_trial(cfg, q1, 20_000, seed=2) for q1 in (0, 1000, 2000, 3000, 4000)]
    assert rates == sorted(rates, reverse=True)


@pytest.mark.parametrize("q1", [0, 17, 128, 200, 255])
def test_exhaustive_matches_theory(q1):
    cfg = ToyCipherConfig(8)
    x = encrypt(cfg, b"k" * 16, q1)
    assert exhaustive_rate(cfg, q1, x) == theoretical_rate(cfg, q1)


def test_pedersen_contrast(toy, test_group):
    # toy group: second openings exist, and any one of them reveals the trapdoor
    found = pedersen_second_openings(toy, Opening(2, 5), range(toy.q))
    assert len(found) == toy.q - 1
    for o in found:
        assert (2 - o.value) * pow(o.randomness - 5, -1, toy.q) % toy.q == 3
    hits = pedersen_substitution_trial(test_group, Opening(1000, 12345), 16, 2000, random.Random(0))
    assert hits == []
