"""Eavesdropping attacks on the travel qubit.

Two attack families are built in.

``Angle(theta)``
    Rotate the travel qubit by ``theta`` and copy it into a one-qubit ancilla
    with a CNOT::

        |0,0> -> cos(theta)|0,0> + sin(theta)|1,1>
        |1,0> -> -sin(theta)|0,0> + cos(theta)|1,1>

    A control run catches it with probability ``sin(theta)**2``. Eve keeps the
    ancilla and forwards the travel qubit untouched, so her information is
    only reported through the analytic bound ``max_info(d)``. Because the
    travel qubit is half of a Bell pair, the travel+ancilla state Eve could
    measure is the same whichever operation Alice applied, even at
    ``theta = pi/4``.

``FullInfo``
    Eve prepares her own pair ``(e1, e2)`` in PhiPlus and swaps Bob's travel
    qubit into ``e1``, so Alice receives Eve's half of the pair instead. On the
    way back Eve Bell-measures ``(travel, e2)``: PhiPlus means Alice applied
    the identity and PhiMinus means she applied sigma_z. Eve then applies the
    same operation to Bob's qubit and sends it on. A control run catches this
    with probability 1/2, and Eve learns every message bit.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import qstate
from .qstate import BellOutcome, Register, Unitary

TRAVEL = "travel"
HOME = "home"


class AttackKind(str, Enum):
    NONE = "none"
    FULL_INFO = "full"
    ANGLE = "angle"


class _BoundOnly:
    """Sentinel: Eve's information for this run is accounted analytically."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOUND_ONLY"


BOUND_ONLY = _BoundOnly()


class AttackError(RuntimeError):
    pass


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind = AttackKind.NONE
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.kind is AttackKind.ANGLE:
            if not 0.0 <= self.theta <= math.pi / 4 + 1e-15:
                raise ValueError(f"attack angle must lie in [0, pi/4], got {self.theta!r}")
        elif self.theta != 0.0:
            raise ValueError(f"theta is only meaningful for angle attacks ({self.kind.value})")

    @classmethod
    def none(cls) -> "AttackSpec":
        return cls(AttackKind.NONE)

    @classmethod
    def full_info(cls) -> "AttackSpec":
        return cls(AttackKind.FULL_INFO)

    @classmethod
    def angle(cls, theta: float) -> "AttackSpec":
        return cls(AttackKind.ANGLE, float(theta))

    @classmethod
    def parse(cls, text: str) -> "AttackSpec":
        """Parse ``none``, ``full`` or ``angle:<radians>``."""
        text = text.strip().lower()
        if text in ("", "none"):
            return cls.none()
        if text in ("full", "fullinfo", "full-info"):
            return cls.full_info()
        m = re.fullmatch(r"angle:(.+)", text)
        if m:
            try:
                theta = float(m.group(1))
            except ValueError:
                raise ValueError(f"bad attack angle {m.group(1)!r}") from None
            return cls.angle(theta)
        raise ValueError(f"unknown attack {text!r} (expected none, full or angle:<radians>)")

    @property
    def active(self) -> bool:
        return self.kind is not AttackKind.NONE

    @property
    def ancilla_qubits(self) -> int:
        return {AttackKind.NONE: 0, AttackKind.ANGLE: 1, AttackKind.FULL_INFO: 2}[self.kind]

    @property
    def detection_probability(self) -> float:
        if self.kind is AttackKind.FULL_INFO:
            return 0.5
        return math.sin(self.theta) ** 2

    def label(self) -> str:
        if self.kind is AttackKind.ANGLE:
            return f"angle:{self.theta!r}"
        return self.kind.value


def _ancilla_labels(spec: AttackSpec) -> list[str]:
    return [f"eve{k}" for k in range(spec.ancilla_qubits)]


def attack_unitary(spec: AttackSpec) -> Unitary:
    """Attack operator on ``(travel, ancilla...)`` as qubits ``0..k``."""
    if spec.kind is AttackKind.NONE:
        raise AttackError("no attack unitary for AttackKind.NONE")
    if spec.kind is AttackKind.ANGLE:
        c, s = math.cos(spec.theta), math.sin(spec.theta)
        rot = np.array([[c, -s], [s, c]], dtype=complex)
        return Unitary(qstate.CNOT @ np.kron(rot, qstate.IDENTITY), (0, 1))
    return Unitary(np.kron(qstate.SWAP, qstate.IDENTITY), (0, 1, 2))


def ancilla_state(spec: AttackSpec) -> qstate.StateVector:
    if spec.kind is AttackKind.ANGLE:
        return qstate.basis_state("0")
    if spec.kind is AttackKind.FULL_INFO:
        return qstate.make_bell(BellOutcome.PHI_PLUS)
    raise AttackError("no ancilla for AttackKind.NONE")


@dataclass
class EveState:
    spec: AttackSpec
    attacked_run: int | None = None
    coded: bool = False
    extraction_log: list[tuple[int, object]] = field(default_factory=list)

    def reset(self) -> None:
        self.attacked_run = None
        self.coded = False


def eve_attack(reg: Register, eve: EveState, run_index: int) -> None:
    """Intercept the travel qubit on its way to Alice."""
    if not eve.spec.active:
        return
    if eve.attacked_run == run_index:
        raise AttackError(f"travel qubit already attacked in run {run_index}")
    labels = _ancilla_labels(eve.spec)
    reg.attach(ancilla_state(eve.spec), labels)
    u = attack_unitary(eve.spec)
    reg.apply(u.matrix, TRAVEL, *labels)
    eve.attacked_run = run_index
    eve.coded = False


def eve_extract(reg: Register, eve: EveState, rng: np.random.Generator):
    """Eve's measurement on the return leg of a message run.

    Returns the guessed bit for ``FullInfo``, ``BOUND_ONLY`` for angle attacks
    and ``None`` when there is no attack.
    """
    spec = eve.spec
    if not spec.active:
        return None
    if eve.attacked_run is None:
        raise AttackError("extraction without a prior attack in this run")
    if not eve.coded:
        raise AttackError("extraction attempted before Alice's coding step")
    run = eve.attacked_run
    if spec.kind is AttackKind.ANGLE:
        eve.extraction_log.append((run, BOUND_ONLY))
        eve.reset()
        return BOUND_ONLY

    e1, e2 = _ancilla_labels(spec)
    outcome = reg.bell_measure(TRAVEL, e2, rng)
    if outcome is BellOutcome.PHI_PLUS:
        guess = 0
    elif outcome is BellOutcome.PHI_MINUS:
        guess = 1
    else:
        raise AttackError(f"unexpected Bell outcome {outcome.value} on Eve's pair")
    if guess:
        reg.apply(qstate.PAULI_Z, e1)
    # Bob's original travel qubit goes back into the travel slot
    reg.apply(qstate.SWAP, TRAVEL, e1)
    eve.extraction_log.append((run, guess))
    eve.reset()
    return guess
