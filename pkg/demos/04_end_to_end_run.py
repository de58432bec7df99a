"""
A small end-to-end scenario search
==================================

Train the vector learner against the straight road for a few hundred
episodes, evaluate the frozen policy, and compare it with random
search. This is the full pipeline of the package in miniature; the
real experiment uses 1200 training and 100 evaluation episodes.
"""

import numpy as np

from drivestress.baselines import random_policy
from drivestress.eql import _master, train_eql
from drivestress.momdp import N_ACTIONS, ScenarioEnv, episode_seed, run_episode
from drivestress.stats import aggregate, compare

ROAD = 1
TRAIN_EPISODES = 300
EVAL_EPISODES = 50
SEED = 0

# %%
# Training: the factory builds one fresh single-episode environment per
# training episode, each on its own derived seed.

result = train_eql(lambda seed: ScenarioEnv(ROAD, seed), TRAIN_EPISODES, seed=SEED)
tail = result.curves[-50:]
found = sum(row["r1"] and row["r2"] for row in tail)
print(f"trained {TRAIN_EPISODES} episodes ({result.updates} updates); "
      f"joint violations in the last 50 training episodes: {found}")

# %%
# Evaluation: freeze the agent, fix an equal preference weight, keep a
# 5% exploration floor, and run held-out episodes. Random search gets
# the same evaluation worlds.

EVAL_MASTER = SEED + 5000
policy = result.agent.policy(np.array([0.5, 0.5]), epsilon=0.05)

def evaluate(p):
    return [run_episode(p, ROAD, episode_seed(_master(EVAL_MASTER), i))
            for i in range(EVAL_EPISODES)]

learned = evaluate(policy)
random = evaluate(random_policy(N_ACTIONS))

for name, records in (("learned", learned), ("random", random)):
    s = aggregate(records)
    print(f"{name:>8}: v_r1={s.v_r1:>3} v_r2={s.v_r2:>3} v_r1_r2={s.v_r1_r2:>3}"
          f"  of {s.n_episodes}")

# %%
# The comparison the evaluation chapter runs: Fisher's exact test on
# the joint-violation counts, reported with an odds ratio.

test = compare(learned, random, "v_r1_r2")
if test.odds_ratio is None:
    ratio = "undefined (no violations on either side)"
elif test.odds_ratio == float("inf"):
    ratio = "infinite (only the learned side found any)"
else:
    ratio = f"{test.odds_ratio:.3f}"
print(f"\njoint violations, learned vs random: odds ratio {ratio}, "
      f"p {test.significance}")
