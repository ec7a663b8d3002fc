import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pingpong.adversary import AttackSpec
from pingpong.channel import (
    ChannelClosed,
    ClassicalMessage,
    FrameDecoder,
    MessageKind,
    NeedMoreData,
    ProtocolError,
    RunMode,
    decode_frame,
    encode_frame,
    loopback_pair,
    make_duplex_pair,
)
from pingpong.protocol import ProtocolConfig, run_session

run_indices = st.integers(0, 2**32 - 1)
messages = st.one_of(
    st.builds(ClassicalMessage.control_result, st.integers(0, 1), run_indices),
    st.builds(ClassicalMessage.abort, run_indices),
    st.builds(ClassicalMessage.done, run_indices),
    st.builds(ClassicalMessage.mode_announce, st.sampled_from(list(RunMode)), run_indices),
)


def test_encode_examples():
    assert encode_frame(ClassicalMessage.control_result(1, 3)) == bytes.fromhex("00000006 01 01 00000003")
    assert encode_frame(ClassicalMessage.abort(0)) == bytes.fromhex("00000005 02 00000000")
    assert encode_frame(ClassicalMessage.done(7)) == bytes.fromhex("00000005 03 00000007")
    assert encode_frame(ClassicalMessage.mode_announce(RunMode.CONTROL, 2)) == bytes.fromhex("00000006 04 01 00000002")


def test_decode_examples():
    assert decode_frame(bytes.fromhex("00000006010100000003")) == ClassicalMessage.control_result(1, 3)
    with pytest.raises(NeedMoreData):
        decode_frame(b"\x00\x00\x00")
    with pytest.raises(NeedMoreData):
        decode_frame(bytes.fromhex("0000000601010000"))
    with pytest.raises(ProtocolError):
        decode_frame(bytes.fromhex("00000005 7f 00000000"))
    with pytest.raises(ProtocolError):
        decode_frame((1 << 20 | 1).to_bytes(4, "big") + b"\x01")
    with pytest.raises(ProtocolError):
        decode_frame(bytes.fromhex("00000000"))
    with pytest.raises(ProtocolError):
        decode_frame(bytes.fromhex("00000006 01 02 00000003"))  # bit 2
    with pytest.raises(ProtocolError):
        decode_frame(bytes.fromhex("00000006 02 00 00000003"))  # Abort with extra byte
    with pytest.raises(ProtocolError):
        decode_frame(encode_frame(ClassicalMessage.done(1)) + b"\x00")


def test_message_validation():
    with pytest.raises(ValueError):
        ClassicalMessage(MessageKind.CONTROL_RESULT, 0, bit=2)
    with pytest.raises(ValueError):
        ClassicalMessage(MessageKind.ABORT, 0, bit=1)
    with pytest.raises(ValueError):
        ClassicalMessage.abort(-1)


@given(messages)
def test_roundtrip(msg):
    assert decode_frame(encode_frame(msg)) == msg


@given(st.lists(messages, max_size=20), st.data())
def test_stream_reassembly(msgs, data):
    stream = b"".join(encode_frame(m) for m in msgs)
    cuts = sorted(data.draw(st.lists(st.integers(0, len(stream)), max_size=10)))
    dec, out, prev = FrameDecoder(), [], 0
    for cut in [*cuts, len(stream)]:
        out.extend(dec.feed(stream[prev:cut]))
        prev = cut
    assert out == msgs and dec.pending == 0


def test_duplex_fifo():
    a, b = make_duplex_pair()
    m1, m2 = ClassicalMessage.abort(1), ClassicalMessage.done(2)
    a.send(m1)
    a.send(m2)
    assert b.recv() == m1 and b.recv() == m2
    b.send(m1)
    assert a.recv() == m1


def test_duplex_closed():
    a, b = make_duplex_pair()
    a.send(ClassicalMessage.done(0))
    a.close()
    assert b.recv() == ClassicalMessage.done(0)
    with pytest.raises(ChannelClosed):
        b.recv()
    with pytest.raises(ChannelClosed):
        a.send(ClassicalMessage.done(1))


def test_duplex_across_threads():
    a, b = make_duplex_pair()
    got = []
    t = threading.Thread(target=lambda: got.extend(b.recv() for _ in range(100)))
    t.start()
    for k in range(100):
        a.send(ClassicalMessage.done(k))
    t.join(5)
    assert [m.run_index for m in got] == list(range(100))


def test_loopback_stream():
    a, b = loopback_pair()
    try:
        msgs = [ClassicalMessage.control_result(k % 2, k) for k in range(50)]
        for m in msgs:
            a.send(m)
        assert [b.recv() for _ in msgs] == msgs
        b.send(ClassicalMessage.abort(3))
        assert a.recv() == ClassicalMessage.abort(3)
    finally:
        a.close()
    with pytest.raises(ChannelClosed):
        b.recv(timeout=2)
    b.close()


@pytest.mark.parametrize("attack", ["none", "full", "angle:0.4"])
def test_transport_equivalence(attack):
    cfg = ProtocolConfig(c=0.5, n_bits=40, seed=77)
    mem = run_session(cfg, AttackSpec.parse(attack), make_duplex_pair())
    pair = loopback_pair()
    try:
        net = run_session(cfg, AttackSpec.parse(attack), pair)
    finally:
        for end in pair:
            end.close()
    assert mem.to_json().encode() == net.to_json().encode()
