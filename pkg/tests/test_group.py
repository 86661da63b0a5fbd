import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from rcbdc.codec import DecodeError
from rcbdc.group import (GroupGenerationError, GroupParams, ceremony_params, derive_h,
                         generate_group_params, mod_exp, mod_inv, mod_mul, profile_params,
                         project_to_subgroup, random_scalar, validate_params)


def naive_pow(b, e, m):
    acc = 1
    b %= m
    while e:
        if e & 1:
            acc = acc * b % m
        b = b * b % m
        e >>= 1
    return acc


def test_toy_group_is_valid(toy):
    validate_params(toy)
    powers = {pow(2, i, 23) for i in range(1, 12)}
    assert len(powers) == 11 and pow(2, 11, 23) == 1


def test_toy_arithmetic_vectors(toy):
    assert mod_exp(2, 10, toy) == 12
    assert mod_inv(3, toy) == 8
    assert mod_exp(17, 0, toy) == 1
    assert mod_mul(6, 12, toy) == 3
    with pytest.raises(ZeroDivisionError):
        mod_inv(0, toy)


def test_projection_of_five():
    assert project_to_subgroup(5, 23, 11) == 2


def test_generation_is_deterministic():
    a = generate_group_params(16, b"A")
    b = generate_group_params(16, b"A")
    assert a.to_bytes() == b.to_bytes()
    validate_params(a)


def test_generation_fails_for_tiny_moduli():
    with pytest.raises(GroupGenerationError):
        generate_group_params(8, b"A")


def test_derive_h_deterministic_and_in_subgroup(test_group):
    p, q, g = test_group.p, test_group.q, test_group.g
    h1 = derive_h(p, q, g, b"tag")
    assert h1 == derive_h(p, q, g, b"tag")
    assert pow(h1, q, p) == 1 and h1 not in (1, g)
    assert derive_h(p, q, g, b"other") != h1


def test_profiles(test_group):
    assert test_group.p.bit_length() == 64 and test_group.q.bit_length() == 56
    assert (test_group.p - 1) % test_group.q == 0
    assert test_group.h_mode == "hash" and test_group.trapdoor is None


def test_prod_profile_sizes():
    prod = profile_params("prod")
    assert prod.p.bit_length() == 2048 and prod.q.bit_length() == 256
    validate_params(prod)


def test_param_file_round_trip(test_group, toy):
    for params in (test_group, toy):
        data = params.to_bytes()
        assert GroupParams.from_bytes(data) == params
    data = bytearray(test_group.to_bytes())
    data[10] ^= 1
    with pytest.raises(DecodeError):
        GroupParams.from_bytes(bytes(data))
    with pytest.raises(DecodeError):
        GroupParams.from_bytes(test_group.to_bytes()[:-1])


def test_ceremony_records_trapdoor(test_group):
    c = ceremony_params(test_group, 12345)
    assert c.h == pow(c.g, 12345, c.p) and c.trapdoor == 12345


def test_random_scalar_range_and_reproducibility(toy):
    a = [random_scalar(toy, random.Random(7)) for _ in range(5)]
    b = [random_scalar(toy, random.Random(7)) for _ in range(5)]
    assert a == b
    rng = random.Random(1)
    assert all(1 <= random_scalar(toy, rng) < toy.q for _ in range(1000))


def test_random_scalar_uniform_chi_square(toy):
    rng = random.Random(99)
    counts = Counter(random_scalar(toy, rng) for _ in range(100_000))
    assert sorted(counts) == list(range(1, 11))
    assert chisquare([counts[i] for i in range(1, 11)]).pvalue > 0.001


@given(st.integers(0, 10**6))
def test_powers_of_g_stay_in_subgroup(x):
    params = profile_params("test")
    y = params.exp(params.g, x)
    assert pow(y, params.q, params.p) == 1


@given(st.integers(2, 2**16 - 1), st.integers(0, 2**20), st.integers(3, 2**16))
def test_mod_exp_matches_naive(b, e, m):
    params = GroupParams(m, 2, 1, 1)
    assert mod_exp(b, e, params) == naive_pow(b, e, m)


@given(st.integers(0, 2**256))
def test_comb_table_matches_powmod(e):
    prod = profile_params("prod")
    assert prod.exp(prod.g, e) == pow(prod.g, e % prod.q, prod.p)
    assert prod.exp(prod.h, e) == pow(prod.h, e % prod.q, prod.p)
