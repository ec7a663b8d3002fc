"""What each attack family can actually learn, next to the entropy bound.

For every attack the script builds Eve's reduced state for both codings and
reports the trace distance between them (1 = perfectly distinguishable,
0 = no information) together with d and max_info(d).
"""
import math

import numpy as np

from pingpong.adversary import TRAVEL, AttackSpec, EveState, eve_attack
from pingpong.analysis import max_info
from pingpong.protocol import coding_operator, prepare_pair


def eve_view(spec: AttackSpec, bit: int) -> np.ndarray:
    reg = prepare_pair()
    eve_attack(reg, EveState(spec), 0)
    reg.apply(coding_operator(bit), TRAVEL)
    eve_labels = [l for l in reg.labels if l.startswith("eve")]
    return reg.reduced(TRAVEL, *eve_labels)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


print(f"{'attack':>14} {'d':>8} {'max_info':>9} {'trace_dist':>11}")
specs = [AttackSpec.angle(k * math.pi / 16) for k in range(1, 5)] + [AttackSpec.full_info()]
for spec in specs:
    d = spec.detection_probability
    td = trace_distance(eve_view(spec, 0), eve_view(spec, 1))
    print(f"{spec.label()[:14]:>14} {d:8.4f} {max_info(d):9.4f} {td:11.4f}")
