"""Monte Carlo detection rate against sin^2(theta) for the angle attack family."""
import argparse
import math

from pingpong.adversary import AttackSpec
from pingpong.montecarlo import estimate_detection

ap = argparse.ArgumentParser()
ap.add_argument("--runs", type=int, default=10_000)
ap.add_argument("--points", type=int, default=9)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

print("theta,d_analytic,d_empirical,stderr,z")
for k in range(args.points):
    theta = k * (math.pi / 4) / (args.points - 1)
    d = math.sin(theta) ** 2
    rate, err = estimate_detection(AttackSpec.angle(theta), args.runs, args.seed + k)
    z = 0.0 if err == 0 else (rate - d) / err
    print(f"{theta:.6f},{d:.6f},{rate:.6f},{err:.6f},{z:+.2f}")
rate, err = estimate_detection(AttackSpec.full_info(), args.runs, args.seed + args.points)
print(f"full,0.500000,{rate:.6f},{err:.6f},{(rate - 0.5) / err:+.2f}")
