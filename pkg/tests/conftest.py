"""Shared builders for synthetic network instances used across the suite."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

import tiersim as ts
from tiersim.geometry import Assignment
from tiersim.offload import TOL_CODE, TOL_FROM_CODE, destination_budgets, place_users
from tiersim.power import network_power_w
from tiersim.scenario import DEFAULT_PROFILES, BsClass, TierId, Tolerance
from tiersim.simulation import UserPopulation, draw_demands, spawn_users, substream
from tiersim.switching import Snapshot, make_snapshot


def build_config(
    *,
    sbs_specs=None,
    mbs_capacity=60.0,
    tier_set=ts.SCENARIO_TIER_SETS["v"],
    uav_capacity=30.0,
    haps_capacity=100.0,
    haps_availability=0.5,
    sat_capacity=200.0,
    **overrides,
):
    """A compact scenario: custom SBS roster on the default NTN skeleton.

    ``sbs_specs`` is a list of (bs_class, position, capacity); defaults to the
    shipped six-SBS ring.
    """
    base = ts.default_case_study()
    if sbs_specs is None:
        stations = list(base.stations)
        stations[0] = replace(stations[0], capacity=float(mbs_capacity))
    else:
        stations = [replace(base.stations[0], capacity=float(mbs_capacity))]
        for k, (cls, pos, cap) in enumerate(sbs_specs):
            stations.append(
                ts.BaseStation(
                    id=k + 1,
                    tier=TierId.TIER1_SBS,
                    bs_class=cls,
                    position=(float(pos[0]), float(pos[1])),
                    capacity=float(cap),
                    profile=DEFAULT_PROFILES[cls],
                )
            )
        next_id = len(sbs_specs) + 1
        for s in base.stations:
            if s.tier in (TierId.TIER1_SBS, TierId.TIER1_MBS):
                continue
            stations.append(replace(s, id=next_id))
            next_id += 1

    adjusted = []
    for s in stations:
        if s.tier == TierId.TIER2_UAV:
            s = replace(s, capacity=float(uav_capacity))
        elif s.tier == TierId.TIER3_HAPS:
            s = replace(
                s, capacity=float(haps_capacity), availability_fraction=float(haps_availability)
            )
        elif s.tier == TierId.TIER4_SAT:
            s = replace(s, capacity=float(sat_capacity))
        adjusted.append(s)
    stations = adjusted

    cfg = replace(base, stations=tuple(stations), tier_set=frozenset(tier_set), **overrides)
    assert ts.validate(cfg) == [], ts.validate(cfg)
    return cfg


def make_population(
    positions, demands=None, tolerances=None, speeds=None, area=(1000.0, 1000.0)
) -> UserPopulation:
    n = len(positions)
    xy = np.array(positions, dtype=float).reshape(n, 2)
    tolerances = tolerances or [Tolerance.TOLERANT] * n
    return UserPopulation(
        ids=np.arange(n, dtype=np.int64),
        xy=xy,
        waypoint=xy.copy(),
        speed_mps=np.array(speeds if speeds is not None else [0.0] * n, dtype=float),
        mobility=np.zeros(n, dtype=np.int8),
        tolerance=np.array([TOL_CODE[t] for t in tolerances], dtype=np.int8),
        demand=np.array(demands if demands is not None else [1] * n, dtype=np.int64),
        area_m=area,
    )


def manual_snapshot(config, server_ids, demands, tolerances=None, mbs_assigned=0) -> Snapshot:
    """A snapshot with a hand-chosen association (bypasses path-loss ranking)."""
    stations = config.usable_stations()
    sbs = tuple(s for s in stations if s.tier == TierId.TIER1_SBS)
    mbs = next(s for s in stations if s.tier == TierId.TIER1_MBS)

    users = make_population([(0.0, 0.0)] * len(server_ids), demands, tolerances)
    demand_by_station: dict[int, int] = {}
    for sid, d in zip(server_ids, demands):
        demand_by_station[sid] = demand_by_station.get(sid, 0) + int(d)
    if mbs_assigned:
        demand_by_station[mbs.id] = demand_by_station.get(mbs.id, 0) + int(mbs_assigned)

    assignment = Assignment(
        user_ids=users.ids.copy(),
        server_ids=np.array(server_ids, dtype=np.int64),
        demand_by_station=demand_by_station,
        capacity_by_station={s.id: s.capacity for s in stations},
    )
    return Snapshot(
        config=config, stations=stations, sbs=sbs, mbs=mbs, users=users, assignment=assignment
    )


def random_snapshot(rng: np.random.Generator, n_sbs: int = 6):
    """A randomized instance for oracle cross-checks: random SBS classes and
    capacities, random tier subset, random users and demands."""
    classes = [BsClass.RRH, BsClass.MICRO, BsClass.PICO, BsClass.FEMTO]
    sbs_specs = []
    for k in range(n_sbs):
        angle = 2 * math.pi * k / n_sbs
        pos = (500 + 300 * math.cos(angle), 500 + 300 * math.sin(angle))
        sbs_specs.append(
            (classes[int(rng.integers(len(classes)))], pos, int(rng.integers(5, 40)))
        )
    label = ("i", "ii", "iii", "iv", "v")[int(rng.integers(5))]
    cfg = build_config(
        sbs_specs=sbs_specs,
        mbs_capacity=int(rng.integers(20, 80)),
        tier_set=ts.SCENARIO_TIER_SETS[label],
        uav_capacity=int(rng.integers(5, 40)),
        haps_capacity=int(rng.integers(10, 80)),
        haps_availability=float(rng.choice([0.5, 1.0])),
        sat_capacity=int(rng.integers(20, 200)),
        demand_range=(1, int(rng.integers(2, 7))),
    )
    users = spawn_users(int(rng.integers(8, 60)), cfg, substream(int(rng.integers(1 << 30)), 0))
    draw_demands(users, cfg.demand_range, substream(int(rng.integers(1 << 30)), 2))
    return make_snapshot(cfg, users)


def oracle_exhaustive(snapshot: Snapshot, approach):
    """Independent plain recursive enumeration of the on/off space, built on
    the public placement and power operations only. Returns (key, power) where
    key = (counted power, active count, vector)."""
    config = snapshot.config
    sbs_ids = [s.id for s in snapshot.sbs]
    users = snapshot.users
    server = snapshot.assignment.server_ids
    best = None

    def leaf(on):
        nonlocal best
        off_ids = {sid for sid, o in zip(sbs_ids, on) if not o}
        off_users = [
            (int(users.ids[i]), int(users.demand[i]), TOL_FROM_CODE[int(users.tolerance[i])])
            for i in range(len(users.ids))
            if int(server[i]) in off_ids
        ]
        budgets = destination_budgets(
            snapshot.stations, snapshot.assignment, approach, config.tier_set
        )
        placement = place_users(off_users, budgets, approach)
        if not placement.feasible:
            return
        power = network_power_w(
            snapshot.stations,
            dict(zip(sbs_ids, on)),
            snapshot.assignment,
            placement,
            config,
        )
        key = (power.counted_total(config.count_ntn_power), sum(on), tuple(on))
        if best is None or key < best[0]:
            best = (key, power)

    def recurse(prefix):
        if len(prefix) == len(sbs_ids):
            leaf(prefix)
            return
        recurse(prefix + [False])
        recurse(prefix + [True])

    recurse([])
    assert best is not None
    return best
