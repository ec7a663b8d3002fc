"""Seeded batch simulation and empirical estimates of d and s."""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .adversary import AttackKind, AttackSpec, EveState, eve_attack
from .protocol import (
    ProtocolConfig,
    SessionTranscript,
    control_measurements,
    prepare_pair,
    run_session,
)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood), a 64-bit avalanche mixer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(seed_base: int, index: int) -> int:
    """Per-trial seed: splitmix64(splitmix64(seed_base) ^ index).

    Depends only on (seed_base, index), so scheduling cannot change streams.
    """
    return splitmix64(splitmix64(seed_base & MASK64) ^ (index & MASK64))


def binomial_stderr(successes: int, n: int) -> float:
    if n == 0:
        return float("nan")
    p = successes / n
    return math.sqrt(p * (1.0 - p) / n)


def estimate_detection(attack: AttackSpec | None, runs: int, seed: int) -> tuple[float, float]:
    """Detection frequency over isolated control runs and its standard error."""
    if runs < 100:
        raise ValueError("estimate_detection needs at least 100 runs")
    attack = attack or AttackSpec.none()
    rng = np.random.default_rng(seed & MASK64)
    eve = EveState(attack)
    hits = 0
    for run in range(runs):
        reg = prepare_pair()
        eve_attack(reg, eve, run)
        i, j = control_measurements(reg, rng)
        eve.reset()
        hits += i == j
    return hits / runs, binomial_stderr(hits, runs)


def estimate_survival(
    attack: AttackSpec, c: float, target_bits: int, trials: int, seed: int
) -> float:
    """Fraction of sessions in which a full-information attacker reads
    ``target_bits`` message bits before being detected."""
    if attack.kind is not AttackKind.FULL_INFO:
        raise NotImplementedError(
            "survival is only simulated for the full-information attack; "
            "other attacks are bound-only (use analysis.survival_total)"
        )
    if trials < 1000:
        raise ValueError("estimate_survival needs at least 1000 trials")
    if target_bits == 0:
        return 1.0
    survived = 0
    for t in range(trials):
        cfg = ProtocolConfig(c=c, n_bits=target_bits, seed=trial_seed(seed, t))
        tr = run_session(cfg, attack)
        # each surviving full-info message run yields one bit to Eve
        survived += len(tr.eve_guesses) >= target_bits and not tr.aborted
    return survived / trials


@dataclass(frozen=True)
class BatchConfig:
    base: ProtocolConfig
    attack: AttackSpec | None = None
    trials: int = 100
    seed_base: int = 0
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass(frozen=True)
class TrialSummary:
    trial: int
    detected: bool
    control_runs: int
    message_runs: int
    bits_ok: int
    invalid_decodes: int

    @classmethod
    def from_transcript(cls, trial: int, tr: SessionTranscript) -> "TrialSummary":
        return cls(trial, tr.aborted, tr.control_runs, tr.message_runs, tr.bits_ok, tr.invalid_decodes)


@dataclass
class BatchStats:
    trials: int = 0
    detected_sessions: int = 0
    control_runs_total: int = 0
    detections_total: int = 0
    message_runs_total: int = 0
    decode_errors_total: int = 0
    survival_histogram: dict[int, int] = field(default_factory=dict)
    rows: list[TrialSummary] = field(default_factory=list)

    @property
    def empirical_d(self) -> float:
        if self.control_runs_total == 0:
            return float("nan")
        return self.detections_total / self.control_runs_total

    @property
    def empirical_d_stderr(self) -> float:
        return binomial_stderr(self.detections_total, self.control_runs_total)

    @property
    def decode_error_rate(self) -> float:
        if self.message_runs_total == 0:
            return 0.0
        return self.decode_errors_total / self.message_runs_total

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "detected_sessions": self.detected_sessions,
            "control_runs_total": self.control_runs_total,
            "detections_total": self.detections_total,
            "message_runs_total": self.message_runs_total,
            "empirical_d": self.empirical_d,
            "empirical_d_stderr": self.empirical_d_stderr,
            "decode_error_rate": self.decode_error_rate,
            "survival_histogram": {str(k): v for k, v in sorted(self.survival_histogram.items())},
        }


def _run_trials(config: BatchConfig, indices: range) -> list[TrialSummary]:
    out = []
    for t in indices:
        cfg = replace(config.base, seed=trial_seed(config.seed_base, t))
        out.append(TrialSummary.from_transcript(t, run_session(cfg, config.attack)))
    return out


def aggregate(rows: list[TrialSummary]) -> BatchStats:
    rows = sorted(rows, key=lambda r: r.trial)
    stats = BatchStats(rows=rows)
    hist: Counter[int] = Counter()
    for r in rows:
        stats.trials += 1
        stats.detected_sessions += r.detected
        stats.control_runs_total += r.control_runs
        stats.detections_total += r.detected
        stats.message_runs_total += r.message_runs
        stats.decode_errors_total += r.message_runs - r.bits_ok
        hist[r.message_runs] += 1
    stats.survival_histogram = dict(sorted(hist.items()))
    return stats


def run_batch(config: BatchConfig) -> BatchStats:
    n = config.trials
    if config.parallelism == 1 or n < 2 * config.parallelism:
        return aggregate(_run_trials(config, range(n)))
    step = math.ceil(n / config.parallelism)
    chunks = [range(k, min(k + step, n)) for k in range(0, n, step)]
    with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
        parts = pool.map(_run_trials, [config] * len(chunks), chunks)
        rows = [r for part in parts for r in part]
    return aggregate(rows)
