"""Small pure-state simulator for a handful of qubits.

Ordering convention (shared by every module in the package): qubit 0 is the
most significant bit of the amplitude index, so ``amps[int("q0q1...", 2)]`` is
the amplitude of the ket ``|q0 q1 ...>`` and ``np.kron(A, B)`` acts with ``A``
on the lower-numbered qubit. In the protocol the travel qubit is qubit 0 and
the home qubit is qubit 1, so ``sigma_z (x) 1`` is the coding operation on the
travel qubit.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

VALIDITY_TOL = 1e-9
EXACT_TOL = 1e-12
MAX_QUBITS = 8

SQRT1_2 = 1.0 / np.sqrt(2.0)

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class QuantumStateError(ValueError):
    """Raised for malformed states, operators or qubit indices."""


class BellOutcome(str, Enum):
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"


_BELL_VECTORS = {
    BellOutcome.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * SQRT1_2,
    BellOutcome.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * SQRT1_2,
    BellOutcome.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * SQRT1_2,
    BellOutcome.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * SQRT1_2,
}
BELL_ORDER = tuple(BellOutcome)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over ``num_qubits`` qubits."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else -1
        if n < 1 or 2**n != amps.size or n > MAX_QUBITS:
            raise QuantumStateError(f"bad state dimension {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise QuantumStateError("non-finite amplitude")
        nrm = float(np.vdot(amps, amps).real)
        if abs(nrm - 1.0) > VALIDITY_TOL:
            raise QuantumStateError(f"state not normalized (|psi|^2={nrm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def num_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amps.size

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.num_qubits)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amps={np.round(self.amps, 6)})"


@dataclass(frozen=True, eq=False)
class Unitary:
    """A unitary matrix together with the qubits it acts on.

    ``targets[0]`` is the most significant qubit of the matrix index.
    """

    matrix: np.ndarray
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        targets = tuple(int(t) for t in self.targets)
        if m.shape != (2 ** len(targets),) * 2:
            raise QuantumStateError(
                f"matrix shape {m.shape} does not match {len(targets)} target qubit(s)"
            )
        if len(set(targets)) != len(targets):
            raise QuantumStateError(f"repeated target qubit in {targets}")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=VALIDITY_TOL, rtol=0):
            raise QuantumStateError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", targets)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def basis_state(bits: str | Sequence[int]) -> StateVector:
    """Computational basis state, e.g. ``basis_state("01")`` is ``|0>|1>``."""
    bits = [int(b) for b in bits]
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int("".join(map(str, bits)), 2)] = 1.0
    return StateVector(amps)


def make_bell(kind: BellOutcome) -> StateVector:
    return StateVector(_BELL_VECTORS[BellOutcome(kind)].copy())


def bell_vector(kind: BellOutcome) -> np.ndarray:
    return _BELL_VECTORS[BellOutcome(kind)].copy()


def product(*states: StateVector) -> StateVector:
    amps = states[0].amps
    for s in states[1:]:
        amps = np.kron(amps, s.amps)
    return StateVector(amps)


def norm(s: StateVector) -> float:
    return float(np.linalg.norm(s.amps))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    return complex(np.vdot(a.amps, b.amps))


def _check_qubits(s: StateVector, qubits: Sequence[int]) -> None:
    for q in qubits:
        if not 0 <= q < s.num_qubits:
            raise QuantumStateError(f"qubit index {q} out of range for {s.num_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise QuantumStateError(f"qubit indices must be distinct, got {tuple(qubits)}")


def apply_unitary(s: StateVector, u: Unitary) -> StateVector:
    _check_qubits(s, u.targets)
    k = len(u.targets)
    gate = u.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(gate, s.tensor(), axes=(list(range(k, 2 * k)), list(u.targets)))
    # tensordot puts the gate's output axes first
    out = np.moveaxis(out, list(range(k)), list(u.targets))
    return StateVector(out.reshape(-1))


def apply_gate(s: StateVector, matrix: np.ndarray, *targets: int) -> StateVector:
    return apply_unitary(s, Unitary(matrix, targets))


def _renormalize(amps: np.ndarray, prob: float) -> np.ndarray:
    if prob <= 0.0:
        raise AssertionError("selected a zero-probability measurement branch")
    post = amps / np.sqrt(prob)
    drift = abs(float(np.vdot(post, post).real) - 1.0)
    if drift > VALIDITY_TOL:
        raise AssertionError(f"post-measurement norm drifted by {drift:.3e}")
    return post / np.linalg.norm(post)


def z_probabilities(s: StateVector, qubit: int) -> tuple[float, float]:
    _check_qubits(s, [qubit])
    t = np.moveaxis(s.tensor(), qubit, 0).reshape(2, -1)
    p = np.sum(np.abs(t) ** 2, axis=1)
    return float(p[0]), float(p[1])


def measure_z(
    s: StateVector, qubit: int, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Projective measurement of one qubit in the computational basis."""
    p0, _ = z_probabilities(s, qubit)
    outcome = 0 if rng.random() < p0 else 1
    t = np.moveaxis(s.tensor().copy(), qubit, 0)
    t[1 - outcome] = 0.0
    prob = p0 if outcome == 0 else 1.0 - p0
    post = np.moveaxis(t, 0, qubit).reshape(-1)
    return outcome, StateVector(_renormalize(post, prob))


def _bell_branches(s: StateVector, pair: tuple[int, int]) -> list[tuple[BellOutcome, float, np.ndarray]]:
    a, b = pair
    _check_qubits(s, [a, b])
    n = s.num_qubits
    rest = [q for q in range(n) if q not in (a, b)]
    t = np.transpose(s.tensor(), [a, b, *rest]).reshape(4, -1)
    branches = []
    for kind in BELL_ORDER:
        v = _BELL_VECTORS[kind]
        remainder = v.conj() @ t
        prob = float(np.vdot(remainder, remainder).real)
        # |kind>_(a,b) (x) remainder, put back in qubit order
        proj = np.outer(v, remainder).reshape((2,) * n)
        proj = np.transpose(proj, np.argsort([a, b, *rest])).reshape(-1)
        branches.append((kind, prob, proj))
    return branches


def bell_probabilities(s: StateVector, pair: tuple[int, int]) -> dict[BellOutcome, float]:
    return {kind: prob for kind, prob, _ in _bell_branches(s, pair)}


def bell_measure(
    s: StateVector, pair: tuple[int, int], rng: np.random.Generator
) -> tuple[BellOutcome, StateVector]:
    """Projective measurement of ``pair`` in the four-state Bell basis.

    Bell states are defined with ``pair[0]`` as the first ket slot, e.g.
    PsiMinus = (|01> - |10>)/sqrt(2) over (pair[0], pair[1]).
    """
    branches = _bell_branches(s, pair)
    r = rng.random()
    acc = 0.0
    chosen = branches[-1]
    for branch in branches:
        acc += branch[1]
        if r < acc:
            chosen = branch
            break
    # guards against r landing in rounding slack past the last nonzero branch
    if chosen[1] <= 0.0:
        chosen = max(branches, key=lambda br: br[1])
    kind, prob, proj = chosen
    return kind, StateVector(_renormalize(proj, prob))


def density_matrix(s: StateVector) -> np.ndarray:
    return np.outer(s.amps, s.amps.conj())


def reduced_density(s: StateVector, keep: int | Sequence[int]) -> np.ndarray:
    """Partial trace over every qubit not in ``keep``."""
    keep = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    _check_qubits(s, keep)
    if s.num_qubits < 2 and len(keep) == s.num_qubits:
        raise QuantumStateError("partial trace needs at least two qubits")
    rest = [q for q in range(s.num_qubits) if q not in keep]
    t = np.transpose(s.tensor(), [*keep, *rest]).reshape(2 ** len(keep), -1)
    return t @ t.conj().T


def check_density(rho: np.ndarray, tol: float = VALIDITY_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise QuantumStateError(f"density matrix must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        raise QuantumStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise QuantumStateError(f"density matrix trace {tr.real:.12g} != 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise QuantumStateError("density matrix has a negative eigenvalue")
    return rho


def entropy_from_eigenvalues(eigs: Sequence[float]) -> float:
    eigs = np.clip(np.asarray(eigs, dtype=float), 0.0, 1.0)
    nz = eigs[eigs > 0.0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr rho log2 rho in bits, with 0 log 0 = 0."""
    rho = check_density(rho)
    return entropy_from_eigenvalues(np.linalg.eigvalsh(rho))


class Register:
    """A joint state whose qubits are addressed by name.

    Used by the protocol and adversary to share one simulated state while
    keeping track of who holds which qubit.
    """

    def __init__(self, state: StateVector, labels: Sequence[str]):
        if len(labels) != state.num_qubits:
            raise QuantumStateError("one label per qubit required")
        if len(set(labels)) != len(labels):
            raise QuantumStateError(f"duplicate qubit labels {labels}")
        self.state = state
        self.labels: list[str] = list(labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise QuantumStateError(f"no qubit labelled {label!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def attach(self, state: StateVector, labels: Sequence[str]) -> None:
        """Append fresh qubits (in ``state``) to the register."""
        if len(labels) != state.num_qubits:
            raise QuantumStateError("one label per qubit required")
        if set(labels) & set(self.labels):
            raise QuantumStateError(f"labels {labels} already in use")
        self.state = product(self.state, state)
        self.labels.extend(labels)

    def apply(self, matrix: np.ndarray, *labels: str) -> None:
        self.state = apply_gate(self.state, matrix, *(self.index(l) for l in labels))

    def measure_z(self, label: str, rng: np.random.Generator) -> int:
        outcome, self.state = measure_z(self.state, self.index(label), rng)
        return outcome

    def bell_measure(self, a: str, b: str, rng: np.random.Generator) -> BellOutcome:
        outcome, self.state = bell_measure(self.state, (self.index(a), self.index(b)), rng)
        return outcome

    def reduced(self, *labels: str) -> np.ndarray:
        return reduced_density(self.state, [self.index(l) for l in labels])

    def amplitudes(self) -> Mapping[str, complex]:
        """Nonzero amplitudes keyed by ket string in register order."""
        n = self.state.num_qubits
        return {
            format(i, f"0{n}b"): complex(a)
            for i, a in enumerate(self.state.amps)
            if abs(a) > EXACT_TOL
        }
