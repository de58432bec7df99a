"""
Two objectives, one vector reward
=================================

Scenario quality is judged on two requirements: the vehicle under test
must not collide (R1), and it must finish its route inside a time
budget (R2). This script shows how the raw signals - time to collision
and route completion - become the vector reward the agent maximizes.
"""

import numpy as np

from drivestress.momdp import ScenarioEnv, aggregate_reward
from drivestress.objectives import reward_rc, reward_ttc

# %%
# The reward transforms. Time to collision is inverted and squashed so
# "closer to crashing" approaches 1, with an exact 1.0 on collision.
# Route completion is inverted so "stuck at the start" approaches 1.

print("ttc  ->  reward_ttc        rc  ->  reward_rc")
for t, r in [(20.0, 100.0), (10.0, 75.0), (5.0, 50.0), (1.0, 10.0), (0.0, 0.0)]:
    print(f"{t:>4.1f} -> {reward_ttc(t, collided=False):.4f}"
          f"        {r:>5.1f} -> {reward_rc(r):.4f}")
print("collision overrides:", reward_ttc(20.0, collided=True))
print("zero progress is defined as zero reward:", reward_rc(0.0))

# %%
# One agent step spans 40 simulator instants. The step reward takes the
# worst instant per objective (the max of each transform), so a single
# nearly-critical moment inside a step is worth as much as a sustained
# one.

env = ScenarioEnv(road_id=1, seed=5)
env.reset()

# action 26 walks a pedestrian across the road ahead of the vehicle
state, reward, done, info = env.step(26)
instants = info["instants"]
per_instant = np.array([
    [reward_ttc(s.ttc, s.collided), reward_rc(s.rc)] for s in instants])
print(f"\nstep produced {len(instants)} instants")
print("  worst instant per objective:", per_instant.max(axis=0))
print("  step reward:                ", reward)
assert np.array_equal(aggregate_reward(instants), reward)

# %%
# The rest of this episode resolves without incident: the vehicle dodges
# the pedestrian and still finishes the route inside its budget.

while not done:
    state, reward, done, info = env.step(26)
print(f"\npedestrian episode: terminal={info['terminal']}"
      f" r1={info['r1']} r2={info['r2']} final_rc={info['final_rc']:.2f}%")

# %%
# A different tactic shows the R2 mechanics. Action 10 drops a vehicle
# right beside the one under test and cuts into its lane, forcing it to
# brake instead of crash. Repeated every step, the traffic jam exhausts
# the time budget: a completion violation without any collision.

env = ScenarioEnv(road_id=1, seed=5)
env.reset()
done = False
while not done:
    state, reward, done, info = env.step(10)
print(f"cut-in episode:     terminal={info['terminal']}"
      f" r1={info['r1']} r2={info['r2']} final_rc={info['final_rc']:.2f}%")
