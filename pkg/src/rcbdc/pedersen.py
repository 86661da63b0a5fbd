"""Pedersen commitments c = g^x h^r mod p and their homomorphic combination."""

from dataclasses import dataclass

from .group import mod_inv, random_scalar


@dataclass(frozen=True)
class Opening:
    """Secret behind a commitment: committed value and blinding randomness."""

    value: int
    randomness: int


@dataclass(frozen=True)
class Commitment:
    point: int

    def to_bytes(self, params):
        return params.element_bytes(self.point)


def commit(params, opening):
    gx = params.exp(params.g, opening.value % params.q)
    hr = params.exp(params.h, opening.randomness % params.q)
    return Commitment(gx * hr % params.p)


def open_check(params, c, opening):
    return commit(params, opening).point == c.point


def random_opening(params, value, rng):
    return Opening(value, random_scalar(params, rng))


def combine(params, numerators, denominators):
    """prod(numerators) / prod(denominators) mod p, empty products being 1."""
    p = params.p
    num = 1
    for c in numerators:
        num = num * c.point % p
    den = 1
    for c in denominators:
        den = den * c.point % p
    return num * mod_inv(den, params) % p


def homomorphic_add(params, c1, c2):
    """Commitment to the componentwise sum of the two openings."""
    return Commitment(c1.point * c2.point % params.p)
