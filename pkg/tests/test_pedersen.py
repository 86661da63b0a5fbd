import random
from collections import Counter

from hypothesis import given, strategies as st

from rcbdc.pedersen import Commitment, Opening, combine, commit, homomorphic_add, open_check


def test_commit_vectors(toy):
    assert commit(toy, Opening(5, 7)).point == 16
    assert commit(toy, Opening(0, 0)).point == 1
    assert commit(toy, Opening(10, 4)).point == 1
    assert commit(toy, Opening(6, 1)).point == 6
    assert commit(toy, Opening(4, 2)).point == 12


def test_open_check_vectors(toy):
    assert open_check(toy, Commitment(16), Opening(5, 7))
    assert not open_check(toy, Commitment(16), Opening(6, 7))


def test_combine_vectors(toy):
    c_in = [commit(toy, Opening(10, 4))]
    c_out = [commit(toy, Opening(6, 1)), commit(toy, Opening(4, 2))]
    assert combine(toy, c_in, c_out) == 8
    assert combine(toy, c_out, c_out) == 1
    assert combine(toy, [Commitment(16)], []) == 16
    assert combine(toy, [], []) == 1


def test_homomorphic_add_vector(toy):
    s = homomorphic_add(toy, commit(toy, Opening(2, 3)), commit(toy, Opening(4, 5)))
    assert s.point == 3 == commit(toy, Opening(6, 8)).point
    c = commit(toy, Opening(5, 7))
    assert homomorphic_add(toy, c, commit(toy, Opening(0, 0))) == c


def test_homomorphism_randomized(test_group):
    rng = random.Random(5)
    q = test_group.q
    for _ in range(10_000):
        a = Opening(rng.randrange(q), rng.randrange(1, q))
        b = Opening(rng.randrange(q), rng.randrange(1, q))
        total = Opening((a.value + b.value) % q, (a.randomness + b.randomness) % q)
        s = homomorphic_add(test_group, commit(test_group, a), commit(test_group, b))
        assert open_check(test_group, s, total)


@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))
def test_homomorphism_exhaustive_toy(x1, r1, x2, r2):
    from rcbdc.group import toy_params
    toy = toy_params()
    lhs = commit(toy, Opening((x1 + x2) % 11, (r1 + r2) % 11))
    assert lhs == homomorphic_add(toy, commit(toy, Opening(x1, r1)), commit(toy, Opening(x2, r2)))


def test_binding_breaks_only_with_the_trapdoor(toy):
    # In a group of order 11 every element has an opening for every value, so
    # a second opening always exists; what binding guarantees is that any
    # second opening reveals a = log_g(h), which the committer lacks.
    for x in range(11):
        for r in range(11):
            c = commit(toy, Opening(x, r))
            for x2 in range(11):
                for r2 in range(11):
                    if (x2, r2) != (x, r) and commit(toy, Opening(x2, r2)) == c:
                        assert r2 != r
                        a = (x - x2) * pow(r2 - r, -1, 11) % 11
                        assert a == toy.trapdoor


def test_hiding_collisions_follow_randomness(toy, test_group):
    rng = random.Random(3)
    rs = [rng.randrange(1, 11) for _ in range(10_000)]
    by_r = {}
    for r in rs:
        by_r.setdefault(commit(toy, Opening(4, r)).point, set()).add(r)
    assert all(len(v) == 1 for v in by_r.values())
    points = Counter(commit(test_group, Opening(4, rng.randrange(1, test_group.q))).point
                     for _ in range(10_000))
    assert max(points.values()) == 1


def test_wrong_value_never_opens(test_group):
    rng = random.Random(8)
    for _ in range(1000):
        o = Opening(rng.randrange(1000), rng.randrange(1, test_group.q))
        c = commit(test_group, o)
        assert not open_check(test_group, c, Opening(o.value + rng.randrange(1, 1000), o.randomness))
