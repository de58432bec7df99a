import json
import math

import numpy as np
import pytest

from drivestress import roads
from drivestress.errors import ConfigError


@pytest.mark.parametrize("road_id", roads.ROAD_IDS)
def test_load_all_roads(road_id):
    road_map, route = roads.load_road(road_id)
    assert road_map.road_id == road_id
    assert road_map.lanes and all(lane.width == roads.LANE_WIDTH for lane in road_map.lanes)
    assert route.total_length > 40.0
    # every road has to be finishable inside the fixed episode horizon
    budget = route.total_length / (0.5 * road_map.speed_limit)
    assert budget <= 12.0 + 1e-9


def test_bad_road_id():
    with pytest.raises(ConfigError, match="road id out of range"):
        roads.load_road(7)
    with pytest.raises(ConfigError):
        roads.load_road(0)


def test_route_lengths_frozen():
    got = {rid: round(roads.load_road(rid)[1].total_length, 1) for rid in roads.ROAD_IDS}
    assert got == {1: 60.0, 2: 54.0, 3: 45.5, 4: 45.5, 5: 56.0, 6: 46.3}


def test_speed_limits_frozen():
    got = {rid: roads.load_road(rid)[0].speed_limit for rid in roads.ROAD_IDS}
    assert got == {1: 10.0, 2: 9.0, 3: 8.0, 4: 8.0, 5: 10.0, 6: 8.0}


def test_assets_match_builders():
    for rid in roads.ROAD_IDS:
        built_map, built_route = roads.build_layout(rid)
        loaded_map, loaded_route = roads.load_road(rid)
        assert built_map.name == loaded_map.name
        assert len(built_map.lanes) == len(loaded_map.lanes)
        for a, b in zip(built_map.lanes, loaded_map.lanes):
            assert a.lane_id == b.lane_id
            assert a.speed_limit == b.speed_limit
            np.testing.assert_allclose(a.points, b.points, atol=1e-9)
        np.testing.assert_allclose(built_route.waypoints, loaded_route.waypoints, atol=1e-9)


def test_asset_round_trip(tmp_path):
    road_map, route = roads.load_road(3)
    path = tmp_path / "road.json"
    roads.save_road_asset(path, road_map, route)
    again_map, again_route = roads.load_road_asset(path)
    assert again_map.road_id == road_map.road_id
    np.testing.assert_array_equal(again_route.waypoints, route.waypoints)
    for a, b in zip(road_map.lanes, again_map.lanes):
        np.testing.assert_array_equal(a.points, b.points)


def test_asset_rejects_bad_payload(tmp_path):
    road_map, route = roads.load_road(1)
    path = tmp_path / "road.json"
    roads.save_road_asset(path, road_map, route)
    payload = json.loads(path.read_text())
    payload["format"] = "something-else"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError):
        roads.load_road_asset(path)


def test_asset_rejects_out_of_bounds_route(tmp_path):
    road_map, route = roads.load_road(1)
    path = tmp_path / "road.json"
    roads.save_road_asset(path, road_map, route)
    payload = json.loads(path.read_text())
    payload["route"]["waypoints"][0] = [-500.0, 0.0]
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError):
        roads.load_road_asset(path)


def test_two_intersections_on_road5():
    road_map, route = roads.load_road(5)
    crossings = road_map.meta.get("intersections", [])
    assert len(crossings) >= 2
    # the marked crossings really are places where a transverse lane crosses the route
    for cx, cy in crossings:
        s, d = route.project((cx, cy))
        assert d < roads.LANE_WIDTH
        route_dir = np.array([math.cos(route.heading_at(s)), math.sin(route.heading_at(s))])
        hits = []
        for lane in road_map.lanes:
            ls, ld = lane.project((cx, cy))
            h = lane.heading_at(ls)
            if ld < roads.LANE_WIDTH and abs(np.dot(route_dir, [math.cos(h), math.sin(h)])) < 0.3:
                hits.append(lane.lane_id)
        assert hits, f"no transverse lane near crossing ({cx}, {cy})"


def test_nearest_lane_point_snapping():
    road_map, _ = roads.load_road(1)
    hit = road_map.nearest_lane_point((30.0, 1.0), max_dist=2.0)
    assert hit is not None
    lane, s, d = hit
    np.testing.assert_allclose(d, 1.0)
    np.testing.assert_allclose(lane.point_at(s)[1], 0.0, atol=1e-9)
    # beyond the snap radius there is no hit
    assert road_map.nearest_lane_point((30.0, 12.6), max_dist=2.0) is None


def test_route_curvature_lookahead():
    _, straight = roads.load_road(1)
    assert straight.max_curvature_ahead(10.0, 15.0) < 1e-6
    _, turn = roads.load_road(3)
    peak = max(turn.max_curvature_ahead(s, 15.0) for s in np.linspace(0, 40, 50))
    np.testing.assert_allclose(peak, 1.0 / 10.0, rtol=0.15)
