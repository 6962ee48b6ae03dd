"""
The random baseline every learner has to beat
=============================================

Four agents bidding and playing uniformly at random hit their bid with
probability exactly 1/(r+1) in round r: the bid is independent of the
trick outcome and uniform over the r+1 possible values. Simulation
should land on that line to within binomial noise.
"""

import numpy as np

from wizrl import agents, env

N_ROUNDS = 20_000
rng = np.random.default_rng(42)
mix = [agents.RandomAgent() for _ in range(4)]

print(f"{N_ROUNDS} rounds per round number, hits counted over all 4 seats\n")
print("round   measured   analytic   3-sigma band")
for r in (1, 2, 3, 5, 10, 15):
    hits = 0
    for _ in range(N_ROUNDS):
        first = int(rng.integers(4))
        hits += sum(env.run_round(mix, r, first, rng).hits)
    n = 4 * N_ROUNDS
    p = 1.0 / (r + 1)
    accuracy = hits / n
    band = 3 * (p * (1 - p) / n) ** 0.5
    flag = "ok" if abs(accuracy - p) <= band else "OUTSIDE"
    print(f"{r:5d}   {accuracy:.5f}    {p:.5f}    +/-{band:.5f}  {flag}")

# A crude rule-based player clears the baseline without any learning:
# it bids the rounded sum of per-card win-probability estimates.
mix = [agents.RuleBasedAgent() for _ in range(4)]
hits = 0
for _ in range(N_ROUNDS):
    first = int(rng.integers(4))
    hits += sum(env.run_round(mix, 1, first, rng).hits)
print(f"\nrule-based agents, round 1: {hits / (4 * N_ROUNDS):.4f}"
      f" (random baseline {0.5:.4f})")
