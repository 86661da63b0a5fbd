import pytest
from hypothesis import given, settings, strategies as st

from rcbdc.codec import DecodeError
from rcbdc.group import profile_params
from rcbdc.scenario import ScenarioConfig, run_scenario
from rcbdc.schnorr import Signature
from rcbdc.wire import (BANK, CENTRAL_BANK, HEADER_SIZE, MESSAGE_TYPES, USER, MalformedFrame,
                        PaymentRequest, Rejection, SignedComponent, VersionMismatch, decode, encode,
                        peek_header)

SCRIPT = """
MINT alice 20
MINT bob 9
MINT carol 7
PAY alice bob:13 carol:4
EXPECT-ACCEPT
DOUBLESPEND alice dave:1
EXPECT-REJECT unknown-input
BATCH bob dave:5 | carol eve:2
"""

PARAMS = profile_params("test")
roles = st.sampled_from([USER, BANK, CENTRAL_BANK])
seqs = st.integers(0, 2**64 - 1)
elements = st.integers(1, PARAMS.p - 1)
scalars = st.integers(0, PARAMS.q - 1)


@pytest.fixture(scope="module")
def transcript():
    return run_scenario(ScenarioConfig(seed=11, n_bits=8), SCRIPT)


def test_scenario_frames_round_trip(transcript):
    kinds = set()
    for _, _, _, frame in transcript.frames:
        msg = decode(frame, PARAMS)
        kinds.add(type(msg))
        assert encode(msg, PARAMS) == frame
    assert kinds == set(MESSAGE_TYPES)


@settings(max_examples=300)
@given(roles, seqs, st.text(max_size=20), st.lists(st.binary(min_size=32, max_size=32), max_size=5),
       st.lists(st.tuples(st.integers(0, 2**64 - 1), elements), max_size=5))
def test_payment_request_round_trip(role, seq, payer, spend, payouts):
    msg = PaymentRequest(role, seq, payer, tuple(spend), tuple(payouts))
    assert decode(encode(msg, PARAMS), PARAMS) == msg


@settings(max_examples=300)
@given(roles, seqs, st.text(max_size=20), st.binary(min_size=32, max_size=32), elements, scalars, scalars)
def test_signed_component_round_trip(role, seq, payer, digest, pk, e, s):
    msg = SignedComponent(role, seq, payer, digest, pk, Signature(e, s))
    assert decode(encode(msg, PARAMS), PARAMS) == msg


@settings(max_examples=300)
@given(roles, seqs, st.binary(min_size=32, max_size=32), st.text(max_size=40))
def test_rejection_round_trip(role, seq, tx_id, reason):
    msg = Rejection(role, seq, tx_id, reason)
    assert decode(encode(msg, PARAMS), PARAMS) == msg


def test_bad_frames(transcript):
    frame = transcript.frames[0][3]
    for cut in (0, HEADER_SIZE - 1, HEADER_SIZE, len(frame) - 1):
        with pytest.raises(MalformedFrame):
            decode(frame[:cut], PARAMS)
    with pytest.raises(MalformedFrame):
        decode(frame + b"\x00", PARAMS)
    with pytest.raises(MalformedFrame):
        decode(b"XXXX" + frame[4:], PARAMS)
    bumped = frame[:4] + bytes([frame[4] + 1]) + frame[5:]
    with pytest.raises(VersionMismatch):
        peek_header(bumped)
    assert issubclass(VersionMismatch, DecodeError)


@settings(max_examples=200)
@given(st.data())
def test_garbage_never_crashes(transcript, data):
    frame = bytearray(data.draw(st.sampled_from([f for _, _, _, f in transcript.frames])))
    for _ in range(data.draw(st.integers(1, 4))):
        i = data.draw(st.integers(0, len(frame) - 1))
        frame[i] = data.draw(st.integers(0, 255))
    try:
        decode(bytes(frame), PARAMS)
    except DecodeError:
        pass
