"""Planner: global Dijkstra vs an independent oracle, window sampling, scoring."""

import math
from itertools import product

import numpy as np
import pytest

from pnav.core import LaserScan, OccupancyGrid, Pose, Twist
from pnav.planner import (
    GlobalPlan,
    NoPathError,
    PlannerLimits,
    PlannerWeights,
    plan_global,
    sample_window,
    score_samples,
    select_command,
)
from pnav.power import fit_plant

PLANT = fit_plant()
LIMITS = PlannerLimits()


def empty_grid(w=10, h=10, res=1.0):
    return OccupancyGrid.empty(w, h, res)


def full_circle_scan(ranges, range_max=8.0):
    n = len(ranges)
    inc = 2 * math.pi / n
    return LaserScan(-math.pi, -math.pi + (n - 1) * inc, n, tuple(ranges), range_max)


CLEAR_SCAN = full_circle_scan([math.inf] * 36)


# -- global planner ---------------------------------------------------------------

def test_plan_start_equals_goal():
    g = empty_grid()
    plan = plan_global(g, Pose(4.5, 4.5, 0), (4.5, 4.5))
    assert len(plan.waypoints) == 1
    assert plan.length == 0.0


def test_plan_straight_line():
    g = empty_grid()
    plan = plan_global(g, Pose(1.5, 1.5, 0), (8.5, 1.5))
    assert plan.length == pytest.approx(7 * g.resolution)
    ys = {wy for _, wy in plan.waypoints}
    assert ys == {1.5}


def test_plan_rejects_occupied_endpoints():
    g = empty_grid()
    with pytest.raises(ValueError):
        plan_global(g, Pose(0.5, 0.5, 0), (5.5, 5.5))  # start on boundary ring
    with pytest.raises(ValueError):
        plan_global(g, Pose(5.5, 5.5, 0), (0.5, 9.5))


def test_plan_raises_when_goal_walled_off():
    text = "7 7 1.0\n#######\n#..#..#\n#..#..#\n#..#..#\n#..#..#\n#..#..#\n#######\n"
    g = OccupancyGrid.from_text(text)
    with pytest.raises(NoPathError):
        plan_global(g, Pose(1.5, 1.5, 0), (5.5, 5.5))


def dijkstra_oracle(grid, start_cell, goal_cell):
    """Dense relaxation (Bellman-Ford style) shortest path with the same metric."""
    res = grid.resolution
    moves = [(1, 0, res), (-1, 0, res), (0, 1, res), (0, -1, res),
             (1, 1, math.sqrt(2) * res), (1, -1, math.sqrt(2) * res),
             (-1, 1, math.sqrt(2) * res), (-1, -1, math.sqrt(2) * res)]
    dist = np.full((grid.height, grid.width), np.inf)
    sx, sy = start_cell
    dist[sy, sx] = 0.0
    changed = True
    while changed:
        changed = False
        for iy in range(grid.height):
            for ix in range(grid.width):
                if grid.is_occupied_cell(ix, iy) or not np.isfinite(dist[iy, ix]):
                    continue
                for dx, dy, cost in moves:
                    nx, ny = ix + dx, iy + dy
                    if grid.is_occupied_cell(nx, ny):
                        continue
                    nd = dist[iy, ix] + cost
                    if nd < dist[ny, nx] - 1e-15:
                        dist[ny, nx] = nd
                        changed = True
    gx, gy = goal_cell
    return float(dist[gy, gx])


def test_plan_length_matches_oracle_on_seeded_grids():
    rng = np.random.default_rng(321)
    done = 0
    while done < 20:
        w, h = int(rng.integers(8, 16)), int(rng.integers(8, 16))
        cells = rng.random((h, w)) < 0.25
        grid = OccupancyGrid(w, h, 0.5, cells)
        free_iy, free_ix = np.nonzero(~grid.cells)
        if len(free_ix) < 2:
            continue
        i, j = rng.choice(len(free_ix), 2, replace=False)
        start = grid.cell_center(int(free_ix[i]), int(free_iy[i]))
        goal = grid.cell_center(int(free_ix[j]), int(free_iy[j]))
        want = dijkstra_oracle(grid, (free_ix[i], free_iy[i]), (free_ix[j], free_iy[j]))
        try:
            plan = plan_global(grid, Pose(start[0], start[1], 0), goal)
        except NoPathError:
            assert math.isinf(want)
            done += 1
            continue
        assert plan.length == pytest.approx(want, abs=1e-9)
        done += 1


def test_plan_length_invariant_under_transposition():
    rng = np.random.default_rng(9)
    cells = rng.random((12, 9)) < 0.2
    grid = OccupancyGrid(9, 12, 0.5, cells)
    grid_t = OccupancyGrid(12, 9, 0.5, cells.T)
    free_iy, free_ix = np.nonzero(~grid.cells)
    start = (int(free_ix[0]), int(free_iy[0]))
    goal = (int(free_ix[-1]), int(free_iy[-1]))
    p = plan_global(grid, Pose(*grid.cell_center(*start), 0), grid.cell_center(*goal))
    p_t = plan_global(
        grid_t,
        Pose(*grid_t.cell_center(start[1], start[0]), 0),
        grid_t.cell_center(goal[1], goal[0]),
    )
    assert p.length == pytest.approx(p_t.length, abs=1e-9)


def test_remaining_length_decreases_along_plan():
    g = empty_grid()
    plan = plan_global(g, Pose(1.5, 1.5, 0), (8.5, 8.5))
    lens = [plan.remaining_length(wx, wy) for wx, wy in plan.waypoints]
    assert all(b <= a + 1e-9 for a, b in zip(lens, lens[1:]))
    assert lens[-1] == pytest.approx(0.0)


# -- window sampling -----------------------------------------------------------------

def test_full_window_when_acceleration_unconstrained():
    cmds = sample_window(Twist(0, 0), PlannerLimits(accel_v=10.0, accel_w=10.0), dt=1.0, counts=(5, 11))
    vs = sorted({c.v for c in cmds})
    ws = sorted({c.w for c in cmds})
    assert vs[0] == 0.0 and vs[-1] == LIMITS.vmax
    assert ws[0] == -LIMITS.wmax and ws[-1] == LIMITS.wmax
    assert len(cmds) == 55


def test_single_sample_is_window_center():
    cmds = sample_window(Twist(0.2, 0.1), LIMITS, dt=0.1, counts=(1, 1))
    assert len(cmds) == 1
    assert cmds[0].v == pytest.approx(0.2)
    assert cmds[0].w == pytest.approx(0.1)


def test_samples_respect_acceleration_limits():
    rng = np.random.default_rng(2)
    for _ in range(50):
        cur = Twist(float(rng.uniform(0, 0.5)), float(rng.uniform(-1, 1)))
        dt = float(rng.uniform(0.02, 0.2))
        for cmd in sample_window(cur, LIMITS, dt):
            assert 0.0 <= cmd.v <= LIMITS.vmax + 1e-12
            assert abs(cmd.w) <= LIMITS.wmax + 1e-12
            assert abs(cmd.v - cur.v) <= LIMITS.accel_v * dt + 1e-12
            assert abs(cmd.w - cur.w) <= LIMITS.accel_w * dt + 1e-12


# -- scoring ----------------------------------------------------------------------------

def score_default(samples, scan=CLEAR_SCAN, weights=PlannerWeights(), current=Twist(0.3, 0.0)):
    return score_samples(samples, Pose(1, 1, 0), (9.0, 1.0), scan, PLANT, weights, current=current)


def test_zero_power_weight_equals_three_term_objective():
    samples = sample_window(Twist(0.3, 0.0), LIMITS, dt=0.1)
    weights = PlannerWeights(0.4, 0.3, 0.2, 0.0)
    scored = score_default(samples, weights=weights)
    for s in scored:
        three_term = 0.4 * s.heading_score + 0.3 * s.dist_score + 0.2 * s.vel_score
        assert s.total == pytest.approx(three_term, abs=1e-12)


def test_speed_tie_between_vel_and_power():
    # two samples identical except v; goal dead ahead, no obstacles:
    # heading and clearance are degenerate, so with gamma == theta_p the
    # velocity and power criteria trade off exactly
    samples = [Twist(0.2, 0.0), Twist(0.4, 0.0)]
    weights = PlannerWeights(alpha=0.4, beta=0.3, gamma=0.15, theta_p=0.15)
    scored = score_samples(
        samples, Pose(0, 0, 0), (100.0, 0.0), CLEAR_SCAN, PLANT, weights, current=Twist(0.3, 0.0)
    )
    slow, fast = scored
    assert slow.power_score == 1.0 and fast.power_score == 0.0
    assert slow.vel_score == 0.0 and fast.vel_score == 1.0
    assert slow.total == pytest.approx(fast.total, abs=1e-9)


def test_wall_ahead_marks_samples_unsafe():
    ranges = [math.inf] * 36
    ranges[18] = 0.3  # dead ahead, inside safety radius after a short roll-out
    scan = full_circle_scan(ranges)
    samples = [Twist(0.5, 0.0)]
    scored = score_samples(
        samples, Pose(0, 0, 0), (9.0, 0.0), scan, PLANT, PlannerWeights(), current=Twist(0.5, 0.0)
    )
    assert scored[0].collision_free is False


def test_scores_are_normalized_unit_interval():
    samples = sample_window(Twist(0.25, 0.2), LIMITS, dt=0.1)
    for s in score_default(samples):
        for v in (s.heading_score, s.dist_score, s.vel_score, s.power_score):
            assert 0.0 <= v <= 1.0


# -- selection ----------------------------------------------------------------------------

def test_single_free_sample_wins():
    samples = [Twist(0.1, 0.0)]
    scored = score_default(samples)
    assert select_command(scored) == samples[0]


def test_all_blocked_stops():
    ranges = [0.1] * 36
    scan = full_circle_scan(ranges)
    samples = sample_window(Twist(0.3, 0.0), LIMITS, dt=0.1)
    scored = score_samples(
        samples, Pose(0, 0, 0), (9.0, 0.0), scan, PLANT, PlannerWeights(), current=Twist(0.3, 0.0)
    )
    assert select_command(scored) == Twist(0.0, 0.0)


def test_selection_matches_linear_scan_oracle():
    rng = np.random.default_rng(55)
    for _ in range(50):
        samples = sample_window(
            Twist(float(rng.uniform(0, 0.5)), float(rng.uniform(-1, 1))), LIMITS, dt=0.1
        )
        scored = score_default(samples, current=Twist(0.2, 0.0))
        free = [s for s in scored if s.collision_free]
        want = max(free, key=lambda s: (s.total, -abs(s.cmd.w), -s.cmd.v)).cmd if free else Twist(0, 0)
        assert select_command(scored) == want


def test_argmax_invariant_under_weight_scaling():
    rng = np.random.default_rng(14)
    samples = sample_window(Twist(0.3, 0.1), LIMITS, dt=0.1)
    base = PlannerWeights(0.4, 0.3, 0.2, 0.1)
    choice = select_command(score_default(samples, weights=base))
    for scale in (0.5, 2.0, 10.0):
        w = PlannerWeights(0.4 * scale, 0.3 * scale, 0.2 * scale, 0.1 * scale)
        assert select_command(score_default(samples, weights=w)) == choice


def test_raising_power_never_improves_rank():
    class RiggedModel:
        def __init__(self, bump):
            self.bump = bump

        def predict_batch(self, X):
            base = PLANT.predict_batch(X)
            base[7] += self.bump
            return base

    samples = sample_window(Twist(0.3, 0.0), LIMITS, dt=0.1)
    prev_rank = None
    for bump in (0.0, 2.0, 5.0, 20.0):
        scored = score_samples(
            samples, Pose(1, 1, 0), (9.0, 1.0), CLEAR_SCAN, RiggedModel(bump),
            PlannerWeights(), current=Twist(0.3, 0.0),
        )
        order = sorted(range(len(scored)), key=lambda i: -scored[i].total)
        rank = order.index(7)
        if prev_rank is not None:
            assert rank >= prev_rank
        prev_rank = rank
