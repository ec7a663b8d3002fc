"""Closed-form security quantities for the ping-pong protocol.

Notation: ``c`` is the probability of a control run, ``d`` the probability
that one control run exposes an attack, ``I0`` the most information (bits) an
attack with detection probability ``d`` can yield per message run, and ``s``
the probability that the eavesdropper stays undetected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import entropy_from_eigenvalues

NORM_TOL = 1e-9
PRIOR_TOL = 1e-12
INVERT_TOL = 1e-12

BB84_FULL_INFO_DETECTION = 0.25
BB84_DISCARD_PROBABILITY = 0.5


@dataclass(frozen=True)
class Priors:
    """Probabilities that Alice codes 0 (identity) or 1 (phase flip)."""

    p0: float = 0.5
    p1: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p1 <= 1.0):
            raise ValueError(f"priors must lie in [0, 1], got ({self.p0}, {self.p1})")
        if abs(self.p0 + self.p1 - 1.0) > PRIOR_TOL:
            raise ValueError(f"priors must sum to 1, got {self.p0 + self.p1!r}")

    @classmethod
    def from_p0(cls, p0: float) -> "Priors":
        return cls(p0, 1.0 - p0)

    @property
    def bias(self) -> float:
        return self.p0 - self.p1


UNIFORM = Priors()


@dataclass(frozen=True)
class SecurityPoint:
    c: float
    d: float
    I: float
    I0: float
    s: float


def _check_prob(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def detection_probability(alpha_sq: float, beta_sq: float) -> float:
    """Probability that a control run catches the attack: the weight of the
    flipped-travel branch."""
    _check_prob("alpha_sq", alpha_sq)
    _check_prob("beta_sq", beta_sq)
    if abs(alpha_sq + beta_sq - 1.0) > NORM_TOL:
        raise ValueError(f"|alpha|^2 + |beta|^2 must be 1, got {alpha_sq + beta_sq!r}")
    return float(beta_sq)


def coded_travel_density(d: float, priors: Priors = UNIFORM) -> np.ndarray:
    """The 2x2 post-attack, post-coding state in the {|0,chi0>, |1,chi1>} basis.

    Real non-negative alpha and beta are used; the spectrum does not depend on
    their phases.
    """
    d = _check_prob("d", d)
    a, b = math.sqrt(1.0 - d), math.sqrt(d)
    off = a * b * priors.bias
    return np.array([[1.0 - d, off], [off, d]], dtype=complex)


def eigenvalues(d: float, priors: Priors = UNIFORM) -> tuple[float, float]:
    """Spectrum (larger first) of the coded travel state for detection
    probability ``d``."""
    d = _check_prob("d", d)
    disc = 1.0 - (4.0 * d - 4.0 * d * d) * (1.0 - priors.bias**2)
    root = 0.5 * math.sqrt(max(disc, 0.0))
    return 0.5 + root, 0.5 - root


def max_info(d: float, priors: Priors = UNIFORM) -> float:
    """Upper bound on the bits an attacker extracts per message run."""
    return entropy_from_eigenvalues(eigenvalues(d, priors))


def binary_info(d: float) -> float:
    """Binary Shannon entropy h(d) in bits, with h(0) = h(1) = 0."""
    d = _check_prob("d", d)
    if d in (0.0, 1.0):
        return 0.0
    return -d * math.log2(d) - (1.0 - d) * math.log2(1.0 - d)


def invert_info(I0: float) -> float:
    """Smallest ``d`` in [0, 1/2] with ``binary_info(d) == I0`` (bisection)."""
    I0 = float(I0)
    if not 0.0 <= I0 <= 1.0:
        raise ValueError(f"I0 must lie in [0, 1], got {I0!r}")
    # h(d) rounds to exactly 1.0 within ~1e-8 of 1/2, so the top is pinned
    if I0 == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > INVERT_TOL:
        mid = 0.5 * (lo + hi)
        if binary_info(mid) < I0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) if I0 > 0.0 else 0.0


def transmission_rate(c: float) -> float:
    """Message bits per protocol run."""
    return 1.0 - _check_prob("c", c)


def survival_per_message(c: float, d: float) -> float:
    """Probability of eavesdropping one message run without being caught.

    Sums the geometric series over the number of control runs survived first.
    """
    c = _check_prob("c", c)
    d = _check_prob("d", d)
    if c == 1.0 and d == 0.0:
        raise ValueError("survival_per_message is undefined for c=1, d=0")
    return (1.0 - c) / (1.0 - c * (1.0 - d))


def survival_total(I: float, c: float, d: float) -> float:
    """Probability of eavesdropping ``I`` bits before the first detection."""
    if I < 0 or math.isnan(I):
        raise ValueError(f"I must be non-negative, got {I!r}")
    c = _check_prob("c", c)
    d = _check_prob("d", d)
    if d == 0.0:
        raise ValueError("d=0 yields no information (I0=0); I/I0 is undefined")
    if d == 1.0:
        raise ValueError("d must lie in (0, 1)")
    if I == 0:
        return 1.0
    base = survival_per_message(c, d)
    return base ** (I / binary_info(d))


def success_curve(c: float, d_list, I_max: float, steps: int) -> list[SecurityPoint]:
    """Survival probability over an evenly spaced grid of ``steps + 1``
    information values in [0, I_max], for each ``d`` in ``d_list``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if I_max < 0:
        raise ValueError("I_max must be non-negative")
    points = []
    for d in d_list:
        if not 0.0 < d <= 0.5:
            raise ValueError(f"curve detection probabilities must lie in (0, 1/2], got {d!r}")
        I0 = binary_info(d)
        for k in range(steps + 1):
            I = I_max * k / steps
            points.append(SecurityPoint(c=c, d=d, I=I, I0=I0, s=survival_total(I, c, d)))
    return points


def bb84_comparison() -> float:
    """BB84 detection probability for an attacker taking full information."""
    return BB84_FULL_INFO_DETECTION


def bb84_annotation() -> str:
    return (
        f"bb84_d={BB84_FULL_INFO_DETECTION} pingpong_d=0.5 "
        f"ratio={0.5 / BB84_FULL_INFO_DETECTION:g} "
        f"bb84_discard_probability={BB84_DISCARD_PROBABILITY}"
    )
