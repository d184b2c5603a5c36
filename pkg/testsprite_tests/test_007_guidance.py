import sys
import os
import logging
import math
import pytest
import numpy as np
import pandas as pd

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from guidance import (
    Mode, ThrusterCommand, RangeFilter, SensorModel, PiecewiseField, LakeWorld,
    AgentState, GuidanceSettings, pulse_from_thrust, thrust_from_pulse, filter_update,
    RangeFilterBank, ray_distance_to_boundary, beam_distance, avoidance_policy, step_agent,
    run_mission, run_fleet, build_mission, _beam_ranges,
    MAX_SPEED, TRAJECTORY_COLUMNS
)
from shapely.geometry import Polygon
from config import AVOIDANCE_CURRENT_LIMIT
from reproduction_checks import convex_lake_collisions, straight_sweep, seeded_replay
from errors import DomainError


@pytest.fixture
def lake():
    """Default 200 m x 120 m rectangular lake, still water."""
    return LakeWorld.rectangle(200.0, 120.0)


@pytest.mark.parametrize("fraction, pulse", [
    (0.0, 1500), (1.0, 2000), (-1.0, 1000), (0.5, 1750), (-0.25, 1375),
])
def test_pulse_from_thrust(fraction, pulse):
    assert pulse_from_thrust(fraction) == pulse


def test_pulse_range_and_inverse():
    with pytest.raises(DomainError):
        pulse_from_thrust(1.5)
    with pytest.raises(DomainError):
        thrust_from_pulse(2100)
    rng = np.random.default_rng(1)
    fractions = np.sort(rng.uniform(-1.0, 1.0, 500))
    pulses = [pulse_from_thrust(f) for f in fractions]
    assert pulses == sorted(pulses)
    for f, p in zip(fractions, pulses):
        assert abs(thrust_from_pulse(p) - f) <= 0.001 + 1e-12


def test_thruster_command_validation():
    assert ThrusterCommand.from_thrust(1.0, -1.0).fractions() == (1.0, -1.0)
    with pytest.raises(DomainError):
        ThrusterCommand(900, 1500)


def test_filter_examples():
    f = RangeFilter(window=5)
    for _ in range(5):
        filter_update(f, 100.0)
    assert f.last == 100.0

    f = RangeFilter(window=5)
    for value in (10.0, 20.0, 30.0, 40.0, 50.0):
        result = filter_update(f, value)
    assert result == pytest.approx(30.0)
    assert filter_update(f, None) == pytest.approx(30.0)
    assert RangeFilter(window=3).update(None) is None


def test_filter_matches_brute_force_mean():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        window = int(rng.integers(1, 8))
        f = RangeFilter(window=window)
        valid = []
        for _ in range(int(rng.integers(1, 25))):
            if rng.random() < 0.25:
                got = f.update(None)
            else:
                value = float(rng.uniform(0.1, 50.0))
                valid.append(value)
                got = f.update(value)
            if valid:
                assert got == pytest.approx(np.mean(valid[-window:]), abs=1e-9)
            else:
                assert got is None


def test_filter_rejects_bad_window():
    with pytest.raises(DomainError):
        RangeFilter(window=0)


@pytest.mark.parametrize("filtered, mode, expected_mode, expected_pulses", [
    (5.0, Mode.CRUISE, Mode.CRUISE, (2000, 2000)),
    (2.9, Mode.CRUISE, Mode.AVOID, (1000, 2000)),
    (3.5, Mode.AVOID, Mode.AVOID, (1000, 2000)),
    (4.1, Mode.AVOID, Mode.CRUISE, (2000, 2000)),
    (None, Mode.AVOID, Mode.AVOID, (1000, 2000)),
    (None, Mode.CRUISE, Mode.CRUISE, (2000, 2000)),
])
def test_avoidance_policy_table(filtered, mode, expected_mode, expected_pulses):
    new_mode, command = avoidance_policy(filtered, mode, threshold=3.0, hysteresis=1.0)
    assert new_mode is expected_mode
    assert (command.left_pulse, command.right_pulse) == expected_pulses


def test_avoidance_policy_requires_hysteresis_band():
    with pytest.raises(DomainError):
        avoidance_policy(5.0, Mode.CRUISE, threshold=1.0, hysteresis=1.0)
    with pytest.raises(DomainError):
        GuidanceSettings(threshold=2.0, hysteresis=0.0)


def test_ray_and_beam_distances(lake):
    boundary = lake.boundary
    assert ray_distance_to_boundary(boundary, (100.0, 60.0), 0.0) == pytest.approx(100.0)
    assert ray_distance_to_boundary(boundary, (100.0, 60.0), math.pi / 2) == pytest.approx(60.0)
    assert ray_distance_to_boundary(boundary, (100.0, 60.0), math.pi / 4) == pytest.approx(60.0 * math.sqrt(2))
    # the side rays of the cone see the nearer long wall first
    assert beam_distance(boundary, (100.0, 100.0), 0.0, 0.5236) == pytest.approx(20.0 / math.sin(0.5236), rel=1e-9)


def test_lake_geometry():
    with pytest.raises(DomainError):
        LakeWorld(boundary=((0, 0), (10, 10), (10, 0), (0, 10)))   # bow-tie
    with pytest.raises(DomainError):
        LakeWorld(boundary=((0, 0), (1, 0)))
    triangle = LakeWorld(boundary=((0, 0), (10, 0), (0, 10)))
    assert triangle.contains(2.0, 2.0)
    assert not triangle.contains(8.0, 8.0)
    assert not triangle.contains(5.0, 0.0)


def test_piecewise_field_lookup():
    grid = PiecewiseField(values=((1.0, 2.0), (3.0, 4.0)), cell_size=(10.0, 10.0))
    assert grid.value_at(5.0, 5.0) == 1.0
    assert grid.value_at(15.0, 5.0) == 2.0
    assert grid.value_at(5.0, 15.0) == 3.0
    assert grid.value_at(100.0, 100.0) == 4.0
    assert grid.value_at(-5.0, -5.0) == 1.0
    assert PiecewiseField.from_config([0.1, 0.0]).value_at(3.0, 4.0) == (0.1, 0.0)


def test_full_thrust_settles_at_two_knots(lake):
    agent = AgentState(position=(10.0, 60.0))
    full = ThrusterCommand.from_thrust(1.0, 1.0)
    for _ in range(1000):
        agent = step_agent(lake, agent, full, 0.01)
        assert agent.speed <= MAX_SPEED + 1e-12
    assert agent.speed == pytest.approx(1.028888, rel=0.01)


def test_neutral_thrust_drifts_with_current():
    world = LakeWorld.rectangle(200.0, 120.0, current_field=PiecewiseField.uniform((0.1, 0.0)))
    agent = AgentState(position=(50.0, 50.0), heading=1.0)
    moved = step_agent(world, agent, ThrusterCommand(), 0.1)
    assert moved.position[0] == pytest.approx(50.01, abs=1e-12)
    assert moved.position[1] == pytest.approx(50.0, abs=1e-12)
    assert moved.heading == pytest.approx(1.0)


def test_opposite_thrust_turns_in_place(lake):
    agent = AgentState(position=(50.0, 50.0), heading=0.0)
    moved = step_agent(lake, agent, ThrusterCommand.from_thrust(-1.0, 1.0), 0.1)
    assert moved.position == pytest.approx((50.0, 50.0))
    assert moved.heading == pytest.approx(0.1)


def test_zero_concentration_collects_nothing():
    world = LakeWorld.rectangle(200.0, 120.0, concentration_field=PiecewiseField.uniform(0.0))
    result = run_mission(world, AgentState(position=(100.0, 60.0)), 60.0, 0.1)
    assert result.collected == 0.0


def test_uniform_sweep_matches_analytic():
    collected, analytic = straight_sweep()
    assert abs(collected - analytic) / analytic <= 0.01


def test_trajectory_layout_and_speed_cap():
    world, agent, sensor, dynamics, settings = build_mission({'current': [0.05, 0.03]}, seed=3)
    result = run_mission(world, agent, 300.0, 0.1, sensor, dynamics, settings)
    traj = result.trajectory
    assert list(traj.columns) == TRAJECTORY_COLUMNS
    assert len(traj) == 3000
    assert (traj['speed'] <= MAX_SPEED + 1e-12).all()
    x = np.concatenate([[agent.position[0]], traj['x'].to_numpy()])
    y = np.concatenate([[agent.position[1]], traj['y'].to_numpy()])
    steps = np.hypot(np.diff(x), np.diff(y))
    assert np.all(steps <= (MAX_SPEED + math.hypot(0.05, 0.03)) * 0.1 + 1e-9)
    assert np.all(np.diff(traj['collected_cum'].to_numpy()) >= 0)


def test_collision_reverts_and_turns_about():
    world = LakeWorld.rectangle(20.0, 20.0)
    agent = AgentState(position=(18.0, 10.0), heading=0.0, speed=MAX_SPEED)
    sensor = SensorModel(noise_sigma=0.0, dropout_probability=0.0, beam_half_angle=0.0)
    settings = GuidanceSettings(threshold=0.2, hysteresis=0.1)
    result = run_mission(world, agent, 10.0, 0.5, sensor=sensor, settings=settings)
    assert result.collisions >= 1
    assert world.contains(*result.final_state.position)


def test_start_outside_lake_rejected(lake):
    with pytest.raises(DomainError):
        run_mission(lake, AgentState(position=(250.0, 60.0)), 10.0, 0.1)


def test_seeded_replay_is_identical():
    first = seeded_replay(11)
    second = seeded_replay(11)
    assert first.equals(second)
    assert pd.util.hash_pandas_object(first).sum() == pd.util.hash_pandas_object(second).sum()


def test_random_start_is_seeded():
    world = LakeWorld.rectangle(200.0, 120.0, seed=4)
    assert world.random_start() == world.random_start()
    (x, y), heading = world.random_start()
    assert 10.0 <= x <= 190.0 and 10.0 <= y <= 110.0
    assert 0.0 <= heading < 2 * math.pi


def test_no_collisions_in_convex_lake():
    """Default guidance never hits the shore of the rectangular lake over 100 seeded missions."""
    assert convex_lake_collisions(100) == 0


@pytest.fixture
def l_shaped_lake():
    """Non-convex lake: a 100 m square with its upper-right quarter removed."""
    return LakeWorld(boundary=((0, 0), (100, 0), (100, 50), (50, 50), (50, 100), (0, 100)))


@pytest.mark.parametrize("current", [(0.2, 0.0), (0.12, 0.16)])
def test_no_collisions_at_current_limit(current):
    """Guidance keeps clear of the shore in currents up to the avoidance limit."""
    assert math.hypot(*current) <= AVOIDANCE_CURRENT_LIMIT + 1e-9
    assert convex_lake_collisions(20, current=current) == 0


def test_strong_current_warns(caplog):
    world = LakeWorld.rectangle(200.0, 120.0, current_field=PiecewiseField.uniform((0.4, 0.3)))
    with caplog.at_level(logging.WARNING, logger='guidance'):
        run_mission(world, AgentState(position=(100.0, 60.0)), 1.0, 0.1)
    assert any('avoidance limit' in r.message for r in caplog.records)

    caplog.clear()
    calm = LakeWorld.rectangle(200.0, 120.0, current_field=PiecewiseField.uniform((0.12, 0.16)))
    with caplog.at_level(logging.WARNING, logger='guidance'):
        run_mission(calm, AgentState(position=(100.0, 60.0)), 1.0, 0.1)
    assert not any('avoidance limit' in r.message for r in caplog.records)


def test_filter_bank_matches_single_filters():
    rng = np.random.default_rng(8)
    singles = [RangeFilter(window=4) for _ in range(6)]
    bank = RangeFilterBank([RangeFilter(window=4) for _ in range(6)])
    for _ in range(40):
        readings = rng.uniform(0.5, 40.0, 6)
        readings[rng.random(6) < 0.3] = np.nan
        got = bank.update(readings)
        for f, reading, value in zip(singles, readings, got):
            expected = f.update(None if np.isnan(reading) else float(reading))
            if expected is None:
                assert np.isnan(value)
            else:
                assert value == pytest.approx(expected, abs=1e-9)
    for f, restored in zip(singles, bank.to_filters()):
        assert restored.last == pytest.approx(f.last, abs=1e-9)
        assert list(restored.buffer) == pytest.approx(list(f.buffer))


def test_filter_bank_requires_one_window():
    with pytest.raises(DomainError):
        RangeFilterBank([RangeFilter(window=3), RangeFilter(window=5)])


def test_fleet_beam_ranges_match_shapely(l_shaped_lake):
    rng = np.random.default_rng(2)
    points = []
    while len(points) < 50:
        x, y = rng.uniform(1.0, 99.0, 2)
        if l_shaped_lake.contains(x, y):
            points.append((x, y))
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    heading = rng.uniform(0.0, 2 * math.pi, len(points))
    half_angle = np.full(len(points), 0.3)
    fleet = _beam_ranges(l_shaped_lake.edges, x, y, heading, half_angle)
    for i, point in enumerate(points):
        expected = beam_distance(l_shaped_lake.polygon, point, heading[i], 0.3)
        assert fleet[i] == pytest.approx(expected, rel=1e-9)


def test_ray_accepts_shapely_polygon():
    polygon = Polygon([(0, 0), (200, 0), (200, 120), (0, 120)])
    assert ray_distance_to_boundary(polygon, (100.0, 60.0), math.pi) == pytest.approx(100.0)
    assert ray_distance_to_boundary(polygon, (100.0, 60.0), 0.0, max_range=50.0) == math.inf


def test_non_convex_lake_geometry(l_shaped_lake):
    assert l_shaped_lake.contains(25.0, 75.0)
    assert not l_shaped_lake.contains(75.0, 75.0)
    inside = l_shaped_lake.contains(np.array([25.0, 75.0, 75.0]), np.array([75.0, 25.0, 75.0]))
    assert list(inside) == [True, True, False]
    # the notch's inner corner stops a ray before the outer wall
    assert ray_distance_to_boundary(l_shaped_lake.boundary, (25.0, 75.0), 0.0) == pytest.approx(25.0)
    for seed in range(10):
        (x, y), _ = l_shaped_lake.random_start(margin=5.0, seed=seed)
        assert l_shaped_lake.contains(x, y)


def test_random_start_seed_override():
    world = LakeWorld.rectangle(200.0, 120.0, seed=4)
    assert world.random_start(seed=4) == world.random_start()
    assert world.random_start(seed=5) != world.random_start(seed=6)


def test_fleet_runs_independent_missions():
    world, _, _, dynamics, settings = build_mission({})
    starts = [world.random_start(seed=seed) for seed in range(3)]
    agents = [AgentState(position=p, heading=h) for p, h in starts]
    sensors = [SensorModel(seed=seed) for seed in range(3)]
    fleet = run_fleet(world, agents, 60.0, 0.1, sensors, dynamics, settings)
    assert len(fleet) == 3
    for agent, sensor, result in zip(agents, sensors, fleet):
        alone = run_mission(world, agent, 60.0, 0.1, sensor, dynamics, settings)
        assert len(result.trajectory) == 600
        assert result.collisions == alone.collisions
        assert result.collected == pytest.approx(alone.collected, rel=1e-9)
        assert result.final_state.position == pytest.approx(alone.final_state.position, abs=1e-6)


def test_fleet_validation(lake):
    agents = [AgentState(position=(50.0, 50.0)), AgentState(position=(150.0, 50.0))]
    with pytest.raises(DomainError):
        run_fleet(lake, agents, 10.0, 0.1, sensors=[SensorModel()])
    with pytest.raises(DomainError):
        run_fleet(lake, [], 10.0, 0.1)
    with pytest.raises(DomainError):
        run_fleet(lake, agents + [AgentState(position=(250.0, 50.0))], 10.0, 0.1)
    without_trace = run_fleet(lake, agents, 10.0, 0.1, record=False)
    assert [r.trajectory for r in without_trace] == [None, None]
