"""The ping-pong protocol: Bob and Alice driven run by run.

Every run Bob prepares PsiPlus on (travel, home) and sends the travel qubit to
Alice. With probability ``c`` Alice measures it in the Z basis and announces the
result over the classical channel. Bob then measures the home qubit, and equal
results mean an eavesdropper is present, so the session aborts. Otherwise
Alice applies the identity (bit 0) or sigma_z (bit 1) and returns the qubit, and
Bob decodes it with a Bell measurement. A passed control run does not consume
a message bit.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import qstate
from .adversary import (
    BOUND_ONLY,
    HOME,
    TRAVEL,
    AttackSpec,
    EveState,
    eve_attack,
    eve_extract,
)
from .analysis import UNIFORM, Priors
from .channel import ClassicalMessage, DuplexEndpoint, MessageKind, RunMode, make_duplex_pair
from .qstate import BellOutcome, Register

DECODE = {
    BellOutcome.PSI_PLUS: 0,
    BellOutcome.PSI_MINUS: 1,
    BellOutcome.PHI_PLUS: None,
    BellOutcome.PHI_MINUS: None,
}

SEED_MASK = (1 << 64) - 1


class Mode(str, Enum):
    DIRECT = "direct"
    KEY = "key"


class ProtocolStateError(RuntimeError):
    """A protocol step was invoked out of order."""


@dataclass(frozen=True)
class ProtocolConfig:
    c: float = 0.5
    n_bits: int = 8
    mode: Mode = Mode.DIRECT
    seed: int = 0
    priors: Priors = UNIFORM
    # Direct mode only; drawn from the seeded generator when omitted.
    message: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c!r}")
        if self.n_bits < 1:
            raise ValueError(f"n_bits must be positive, got {self.n_bits}")
        if self.message is not None:
            msg = tuple(int(b) for b in self.message)
            if any(b not in (0, 1) for b in msg):
                raise ValueError("message must consist of bits 0/1")
            if len(msg) != self.n_bits:
                raise ValueError(f"message has {len(msg)} bits, n_bits={self.n_bits}")
            if self.mode is Mode.KEY:
                raise ValueError("key mode draws its own bits; do not pass a message")
            object.__setattr__(self, "message", msg)


@dataclass
class RunRecord:
    run_index: int
    run_mode: RunMode
    control_i: int | None = None
    control_j: int | None = None
    bell_outcome: BellOutcome | None = None
    bit_index: int | None = None
    decoded: int | None = None
    # guessed bit, "bound-only", or None without an attack / in control runs
    eve_guess: int | str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["run_mode"] = self.run_mode.value
        d["bell_outcome"] = self.bell_outcome.value if self.bell_outcome else None
        return d


@dataclass
class SessionTranscript:
    events: list[RunRecord] = field(default_factory=list)
    aborted: bool = False
    detected_at_run: int | None = None
    decoded_bits: list[int | None] = field(default_factory=list)
    message_bits: list[int] = field(default_factory=list)
    control_runs: int = 0
    message_runs: int = 0
    invalid_decodes: int = 0
    attack: str = "none"

    @property
    def eve_guesses(self) -> list[tuple[int, int]]:
        """(bit_index, guess) for every message run where Eve guessed a bit."""
        return [
            (e.bit_index, e.eve_guess)
            for e in self.events
            if e.run_mode is RunMode.MESSAGE and isinstance(e.eve_guess, int)
        ]

    @property
    def bits_ok(self) -> int:
        return sum(
            1 for k, b in enumerate(self.decoded_bits) if b is not None and b == self.message_bits[k]
        )

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "aborted": self.aborted,
            "detected_at_run": self.detected_at_run,
            "message_bits": list(self.message_bits),
            "decoded_bits": list(self.decoded_bits),
            "control_runs": self.control_runs,
            "message_runs": self.message_runs,
            "invalid_decodes": self.invalid_decodes,
            "events": [e.to_dict() for e in self.events],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def session_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent streams for mode choices, measurement outcomes and message/key bits."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK)
    return tuple(np.random.default_rng(child) for child in ss.spawn(3))


def alice_choose_mode(rng: np.random.Generator, c: float) -> RunMode:
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c!r}")
    # strict inequality keeps c=0 always Message and c=1 always Control
    return RunMode.CONTROL if rng.random() < c else RunMode.MESSAGE


def draw_bits(rng: np.random.Generator, n: int, priors: Priors = UNIFORM) -> list[int]:
    return [int(b) for b in (rng.random(n) < priors.p1)]


def coding_operator(bit: int) -> np.ndarray:
    return qstate.PAULI_Z if bit else qstate.IDENTITY


def prepare_pair() -> Register:
    return Register(qstate.make_bell(BellOutcome.PSI_PLUS), [TRAVEL, HOME])


def control_measurements(reg: Register, rng: np.random.Generator) -> tuple[int, int]:
    """Alice's Z result on the travel qubit, then Bob's on the home qubit."""
    i = reg.measure_z(TRAVEL, rng)
    j = reg.measure_z(HOME, rng)
    return i, j


class PingPongSession:
    """One protocol session between Alice and Bob, optionally with Eve.

    ``channel`` is an ``(alice_end, bob_end)`` pair of endpoints carrying the
    classical messages; an in-memory duplex is created when omitted.
    """

    def __init__(
        self,
        config: ProtocolConfig,
        attack: AttackSpec | None = None,
        channel: tuple[DuplexEndpoint, DuplexEndpoint] | None = None,
    ):
        self.config = config
        self.attack = attack or AttackSpec.none()
        self.mode_rng, self.quantum_rng, bits_rng = session_rngs(config.seed)
        if config.message is not None:
            self.message = list(config.message)
        else:
            self.message = draw_bits(bits_rng, config.n_bits, config.priors)
        self.alice_end, self.bob_end = channel if channel is not None else make_duplex_pair()
        self.eve = EveState(self.attack)
        self.reg: Register | None = None
        self.run_index = -1
        self.transcript = SessionTranscript(message_bits=list(self.message), attack=self.attack.label())
        self._travel_sent = False

    # p.1
    def bob_prepare(self) -> tuple[str, str]:
        if self.reg is not None:
            raise ProtocolStateError("previous pair has not been consumed by a run")
        self.run_index += 1
        self.reg = prepare_pair()
        self._travel_sent = False
        return HOME, TRAVEL

    # p.2 plus Eve on the forward leg
    def send_travel(self) -> None:
        self._require_pair()
        if self._travel_sent:
            raise ProtocolStateError("travel qubit already sent this run")
        eve_attack(self.reg, self.eve, self.run_index)
        self._travel_sent = True

    def _require_pair(self) -> None:
        if self.reg is None:
            raise ProtocolStateError("no prepared pair; call bob_prepare first")

    def _require_travel_at_alice(self) -> None:
        self._require_pair()
        if not self._travel_sent:
            self.send_travel()

    def run_control(self) -> RunRecord:
        self._require_travel_at_alice()
        run = self.run_index
        i = self.reg.measure_z(TRAVEL, self.quantum_rng)
        self.alice_end.send(ClassicalMessage.control_result(i, run))
        msg = self.bob_end.recv()
        if msg.kind is not MessageKind.CONTROL_RESULT or msg.run_index != run:
            raise ProtocolStateError(f"Bob expected ControlResult for run {run}, got {msg}")
        j = self.reg.measure_z(HOME, self.quantum_rng)
        rec = RunRecord(run, RunMode.CONTROL, control_i=msg.bit, control_j=j)
        self.reg = None
        self.eve.reset()
        self.transcript.events.append(rec)
        self.transcript.control_runs += 1
        if msg.bit == j:
            self.bob_end.send(ClassicalMessage.abort(run))
            ack = self.alice_end.recv()
            if ack.kind is not MessageKind.ABORT:
                raise ProtocolStateError(f"Alice expected Abort, got {ack}")
            self.transcript.aborted = True
            self.transcript.detected_at_run = run
        return rec

    def run_message(self, x: int, bit_index: int | None = None) -> RunRecord:
        self._require_travel_at_alice()
        run = self.run_index
        self.reg.apply(coding_operator(x), TRAVEL)
        self.eve.coded = True
        self.alice_end.send(ClassicalMessage.mode_announce(RunMode.MESSAGE, run))
        guess = eve_extract(self.reg, self.eve, self.quantum_rng)
        msg = self.bob_end.recv()
        if msg.kind is not MessageKind.MODE_ANNOUNCE or msg.run_index != run:
            raise ProtocolStateError(f"Bob expected ModeAnnounce for run {run}, got {msg}")
        outcome = self.reg.bell_measure(TRAVEL, HOME, self.quantum_rng)
        decoded = DECODE[outcome]
        rec = RunRecord(
            run,
            RunMode.MESSAGE,
            bell_outcome=outcome,
            bit_index=bit_index,
            decoded=decoded,
            eve_guess="bound-only" if guess is BOUND_ONLY else guess,
        )
        self.reg = None
        self.transcript.events.append(rec)
        self.transcript.message_runs += 1
        self.transcript.decoded_bits.append(decoded)
        if decoded is None:
            self.transcript.invalid_decodes += 1
        return rec

    def run(self) -> SessionTranscript:
        if self.config.c == 1.0:
            raise ValueError("c=1 never sends a message run; the session cannot terminate")
        n = 0
        while n < self.config.n_bits:
            self.bob_prepare()
            self.send_travel()
            if alice_choose_mode(self.mode_rng, self.config.c) is RunMode.CONTROL:
                self.run_control()
                if self.transcript.aborted:
                    return self.transcript
            else:
                self.run_message(self.message[n], bit_index=n)
                n += 1
        self.bob_end.send(ClassicalMessage.done(self.run_index))
        done = self.alice_end.recv()
        if done.kind is not MessageKind.DONE:
            raise ProtocolStateError(f"Alice expected Done, got {done}")
        return self.transcript


def run_session(
    config: ProtocolConfig,
    attack: AttackSpec | None = None,
    channel=None,
) -> SessionTranscript:
    return PingPongSession(config, attack, channel).run()


def message_from_string(bits: str) -> tuple[int, ...]:
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError(f"message must be a non-empty string of 0/1, got {bits!r}")
    return tuple(int(ch) for ch in bits)


def bits_to_string(bits: Sequence[int | None]) -> str:
    return "".join("?" if b is None else str(b) for b in bits)
