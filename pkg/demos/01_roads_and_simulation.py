"""
Roads, routes, and the simulated traffic world
==============================================

The testbed ships six built-in road layouts. Each layout pairs a lane
map with the route the vehicle under test has to follow. This script
walks the catalog, then runs one fully scripted scenario and watches
the world tick by tick.
"""

import numpy as np

from drivestress.objectives import default_budget, rc, ttc
from drivestress.roads import load_road
from drivestress.world import new_world, spawn_pedestrian, spawn_vehicle, tick

# %%
# The road catalog. Budget is the completion deadline implied by the
# route length and the road's speed limit: length / (0.5 * limit).

print("road  name                length  limit  budget")
for road_id in range(1, 7):
    road_map, route = load_road(road_id)
    budget = default_budget(route.total_length, road_map.speed_limit)
    print(f"{road_id:>4}  {road_map.name:<18} {route.total_length:>7.1f}"
          f"  {road_map.speed_limit:>5.1f}  {budget:>6.1f}s")

# %%
# A world holds the controlled vehicle, the actors we spawn against it,
# and the collision latch. Coordinates for spawns are relative to the
# vehicle under test: along its heading, and across it (positive = right).

world = new_world(1, seed=5)
print("\nworld on road 1:")
print("  av starts at", world.av_pos, "heading", world.av_heading)

vid = spawn_vehicle(world, along=20.0, cross=0.0, behavior="keep-lane")
pid = spawn_pedestrian(world, along=15.0, cross=10.0,
                       direction="90-perpendicular", speed=1.43)
print("  spawned vehicle", vid, "and pedestrian", pid)

# %%
# Tick the world for three agent steps' worth of simulation and watch
# the objective signals move. One tick is 50 ms; the controller inside
# the world brakes, follows, and changes lanes on its own.

for step in range(3):
    for _ in range(40):
        tick(world)
    print(f"  t={world.elapsed:5.2f}s  progress={rc(world):6.2f}%"
          f"  ttc={ttc(world):6.2f}s  collided={world.collision_latched}")

# %%
# Everything above is deterministic in (road, seed, actions): rebuild
# the same world, replay the same spawns, and the trajectory repeats.

again = new_world(1, seed=5)
spawn_vehicle(again, along=20.0, cross=0.0, behavior="keep-lane")
spawn_pedestrian(again, along=15.0, cross=10.0,
                 direction="90-perpendicular", speed=1.43)
for _ in range(120):
    tick(again)
assert np.allclose(again.av_pos, world.av_pos)
print("\nreplayed world matches:", again.av_pos, "==", world.av_pos)
