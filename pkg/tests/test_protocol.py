import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import within_sigmas
from pingpong import analysis, qstate
from pingpong.adversary import HOME, TRAVEL, AttackSpec
from pingpong.channel import RunMode
from pingpong.protocol import (
    DECODE,
    Mode,
    PingPongSession,
    ProtocolConfig,
    ProtocolStateError,
    alice_choose_mode,
    message_from_string,
    run_session,
)
from pingpong.qstate import BellOutcome

S = 1 / math.sqrt(2)


def test_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(c=1.5)
    with pytest.raises(ValueError):
        ProtocolConfig(n_bits=0)
    with pytest.raises(ValueError):
        ProtocolConfig(n_bits=3, message=(1, 0))
    with pytest.raises(ValueError):
        ProtocolConfig(n_bits=2, message=(1, 0), mode=Mode.KEY)


def test_bob_prepare():
    sess = PingPongSession(ProtocolConfig(seed=1))
    home, travel = sess.bob_prepare()
    assert (home, travel) == (HOME, TRAVEL)
    np.testing.assert_allclose(sess.reg.state.amps, [0, S, S, 0], atol=1e-15)
    np.testing.assert_allclose(sess.reg.reduced(TRAVEL), np.eye(2) / 2, atol=1e-15)
    with pytest.raises(ProtocolStateError):
        sess.bob_prepare()


def test_steps_need_a_pair():
    sess = PingPongSession(ProtocolConfig(seed=1))
    with pytest.raises(ProtocolStateError):
        sess.run_control()
    with pytest.raises(ProtocolStateError):
        sess.run_message(0)


def test_alice_choose_mode(rng):
    assert all(alice_choose_mode(rng, 0.0) is RunMode.MESSAGE for _ in range(1000))
    assert all(alice_choose_mode(rng, 1.0) is RunMode.CONTROL for _ in range(1000))
    n = 10_000
    k = sum(alice_choose_mode(rng, 0.5) is RunMode.CONTROL for _ in range(n))
    assert within_sigmas(k / n, 0.5, n)


def test_control_run_without_attack_never_detects():
    sess = PingPongSession(ProtocolConfig(seed=3))
    for _ in range(200):
        sess.bob_prepare()
        rec = sess.run_control()
        assert rec.control_i != rec.control_j
        assert rec.bell_outcome is None
    assert not sess.transcript.aborted


def test_control_run_full_info_detects_half():
    n, hits = 4000, 0
    for seed in range(n):
        sess = PingPongSession(ProtocolConfig(seed=seed), AttackSpec.full_info())
        sess.bob_prepare()
        rec = sess.run_control()
        hits += sess.transcript.aborted
        assert sess.transcript.aborted == (rec.control_i == rec.control_j)
        if sess.transcript.aborted:
            assert sess.transcript.detected_at_run == 0
    assert within_sigmas(hits / n, 0.5, n)


@pytest.mark.parametrize("bit,outcome", [(0, BellOutcome.PSI_PLUS), (1, BellOutcome.PSI_MINUS)])
def test_message_run_decodes(bit, outcome):
    sess = PingPongSession(ProtocolConfig(seed=9))
    sess.bob_prepare()
    rec = sess.run_message(bit, bit_index=0)
    assert rec.bell_outcome is outcome and rec.decoded == bit


def test_decode_map_total():
    assert set(DECODE) == set(BellOutcome)
    assert {DECODE[k] for k in BellOutcome} == {0, 1, None}


def brute_force_bob_distribution(theta: float, bit: int) -> dict[BellOutcome, float]:
    """Angle attack, coding, then Bob's Bell projection, by explicit matrices.

    Qubit order (travel, home, eve).
    """
    psi = np.zeros(8, complex)
    psi[0b010] = psi[0b100] = S
    c, s = math.cos(theta), math.sin(theta)
    rot = np.kron(np.kron([[c, -s], [s, c]], np.eye(2)), np.eye(2))
    cnot = np.zeros((8, 8))
    for i in range(8):
        cnot[i ^ ((i >> 2) & 1), i] = 1
    z = np.kron(np.kron(np.diag([1, (-1) ** bit]), np.eye(2)), np.eye(2))
    out = z @ cnot @ rot @ psi
    dist = {}
    for kind in BellOutcome:
        proj = np.kron(qstate.bell_vector(kind).conj(), np.eye(2))  # <bell|_(travel,home) (x) 1_eve
        dist[kind] = float(np.linalg.norm(proj @ out) ** 2)
    return dist


@pytest.mark.parametrize("bit", [0, 1])
def test_message_run_under_attack_matches_brute_force(bit):
    theta = math.pi / 4
    expected = brute_force_bob_distribution(theta, bit)
    n = 4000
    counts = {k: 0 for k in BellOutcome}
    for seed in range(n):
        sess = PingPongSession(ProtocolConfig(seed=seed), AttackSpec.angle(theta))
        sess.bob_prepare()
        counts[sess.run_message(bit, 0).bell_outcome] += 1
    for kind, p in expected.items():
        assert within_sigmas(counts[kind] / n, p, n) or (p == 0 and counts[kind] == 0)


def test_simulate_faithful_example():
    cfg = ProtocolConfig(c=0.0, n_bits=5, seed=1, message=message_from_string("10110"))
    tr = run_session(cfg)
    assert tr.decoded_bits == [1, 0, 1, 1, 0]
    assert (tr.message_runs, tr.control_runs, tr.aborted) == (5, 0, False)


def test_session_c_half_no_attack():
    tr = run_session(ProtocolConfig(c=0.5, n_bits=100, seed=11))
    assert not tr.aborted
    assert tr.message_runs == 100
    assert tr.decoded_bits == tr.message_bits
    total = tr.control_runs + tr.message_runs
    assert within_sigmas(tr.control_runs / total, 0.5, total)


def test_session_c_one_rejected():
    with pytest.raises(ValueError):
        run_session(ProtocolConfig(c=1.0, n_bits=1))


def test_key_mode():
    tr = run_session(ProtocolConfig(c=0.3, n_bits=64, seed=5, mode=Mode.KEY))
    assert tr.decoded_bits == tr.message_bits
    assert 0 < sum(tr.message_bits) < 64
    # the key does not depend on how many control runs were drawn
    tr2 = run_session(ProtocolConfig(c=0.6, n_bits=64, seed=5, mode=Mode.KEY))
    assert tr2.message_bits == tr.message_bits


def test_survival_geometric_under_full_info():
    # P(Eve survives k message runs) = s(c, d)^k
    c, n = 0.5, 3000
    survived = {1: 0, 2: 0, 3: 0}
    for seed in range(n):
        tr = run_session(ProtocolConfig(c=c, n_bits=3, seed=seed), AttackSpec.full_info())
        for k in survived:
            survived[k] += tr.message_runs >= k and not (tr.aborted and tr.message_runs < k)
    base = analysis.survival_per_message(c, 0.5)
    for k, count in survived.items():
        assert within_sigmas(count / n, base**k, n)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63 - 1), st.floats(0, 0.9), st.integers(1, 40))
def test_no_attack_is_exact(seed, c, n_bits):
    tr = run_session(ProtocolConfig(c=c, n_bits=n_bits, seed=seed))
    assert not tr.aborted and tr.detected_at_run is None
    assert tr.decoded_bits == tr.message_bits and tr.invalid_decodes == 0
    assert tr.message_runs == n_bits
    for e in tr.events:
        if e.run_mode is RunMode.CONTROL:
            assert e.control_i != e.control_j and e.bell_outcome is None
        else:
            assert e.bell_outcome is not None and e.bit_index is not None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63 - 1), st.sampled_from(["none", "full", "angle:0.3", "angle:0.785"]))
def test_transcript_determinism_and_consistency(seed, attack):
    cfg = ProtocolConfig(c=0.4, n_bits=12, seed=seed)
    a = run_session(cfg, AttackSpec.parse(attack))
    b = run_session(cfg, AttackSpec.parse(attack))
    assert a.to_json() == b.to_json()
    assert a.aborted == (a.detected_at_run is not None)
    if not a.aborted:
        assert a.message_runs == 12
    assert a.invalid_decodes == sum(1 for x in a.decoded_bits if x is None)


def test_full_info_leaves_bob_decoding_intact():
    for seed in range(200):
        tr = run_session(ProtocolConfig(c=0.3, n_bits=10, seed=seed), AttackSpec.full_info())
        assert tr.decoded_bits == tr.message_bits[: tr.message_runs]
        assert [g for _, g in tr.eve_guesses] == tr.message_bits[: tr.message_runs]


def test_control_fraction_long_run():
    tr = run_session(ProtocolConfig(c=0.25, n_bits=3000, seed=2))
    total = tr.control_runs + tr.message_runs
    assert within_sigmas(tr.control_runs / total, 0.25, total)
