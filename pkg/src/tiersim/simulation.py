"""Time-slot simulation driver: user spawning, mobility, traffic draws,
per-slot switching, metric accumulation, and the scenario/density sweep.

Randomness is split into three named sub-streams (user spawn, waypoint
mobility, demand draws) derived from the master seed, so results are a pure
function of (config, density, seed) and adding a consumer to one stream never
perturbs the others.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Sequence

import numpy as np

from .offload import TOL_CODE, Placement, is_violation, TIER_FROM_CODE
from .scenario import (
    SCENARIO_TIER_SETS,
    Approach,
    ScenarioConfig,
    ScenarioValidationError,
    Strategy,
    TierId,
    Tolerance,
    validate,
)
from .switching import Snapshot, SwitchDecision, a3, es_switch, greedy_switch, make_snapshot

MOBILITY_CODE = {m: i for i, m in enumerate(sorted({"pedestrian", "cyclist", "vehicular"}))}

# Sub-stream indices under the master seed.
_STREAM_SPAWN = 0
_STREAM_MOBILITY = 1
_STREAM_DEMAND = 2

VIOLATION_KEYS: tuple[tuple[Tolerance, TierId], ...] = (
    (Tolerance.INTOLERANT, TierId.TIER3_HAPS),
    (Tolerance.INTOLERANT, TierId.TIER4_SAT),
    (Tolerance.MID_TOLERANT, TierId.TIER4_SAT),
)

OFFLOAD_TIERS: tuple[TierId, ...] = (
    TierId.TIER1_MBS,
    TierId.TIER2_UAV,
    TierId.TIER3_HAPS,
    TierId.TIER4_SAT,
)


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


@dataclass
class UserPopulation:
    """Simulation-state arrays for one user population (index-aligned)."""

    ids: np.ndarray        # int64, 0..N-1
    xy: np.ndarray         # (N, 2) float64 positions, meters
    waypoint: np.ndarray   # (N, 2) float64 current waypoint targets
    speed_mps: np.ndarray  # float64
    mobility: np.ndarray   # int8 mobility class codes
    tolerance: np.ndarray  # int8 tolerance codes (offload.TOL_CODE)
    demand: np.ndarray     # int64 demand-units, redrawn each slot
    area_m: tuple[float, float]

    def __len__(self) -> int:
        return len(self.ids)


def spawn_users(density: int, config: ScenarioConfig, rng: np.random.Generator) -> UserPopulation:
    """Create ``density`` users uniformly over the area with classes drawn from
    the configured mix. Waypoints start at the spawn position, so the first
    mobility step draws fresh targets from the mobility stream."""
    if density < 1:
        raise ValueError(f"density must be >= 1, got {density}")
    w, h = config.area_m
    n = int(density)

    xy = rng.uniform(low=(0.0, 0.0), high=(w, h), size=(n, 2))

    weights = np.array([c.mix_weight for c in config.class_mix], dtype=float)
    weights = weights / weights.sum()
    class_idx = rng.choice(len(config.class_mix), size=n, p=weights)

    speeds = np.array([c.speed_mps for c in config.class_mix])
    mob_codes = np.array([MOBILITY_CODE[c.mobility.value] for c in config.class_mix], dtype=np.int8)
    tol_codes = np.array([TOL_CODE[c.tolerance] for c in config.class_mix], dtype=np.int8)

    return UserPopulation(
        ids=np.arange(n, dtype=np.int64),
        xy=xy,
        waypoint=xy.copy(),
        speed_mps=speeds[class_idx],
        mobility=mob_codes[class_idx],
        tolerance=tol_codes[class_idx],
        demand=np.zeros(n, dtype=np.int64),
        area_m=(w, h),
    )


def step_mobility(
    users: UserPopulation, slot_duration_s: float, rng: np.random.Generator
) -> UserPopulation:
    """Advance one slot of random-waypoint motion, in place.

    Each user heads toward its waypoint at class speed; on arrival it draws a
    new uniform waypoint and keeps moving until the slot's travel budget is
    spent. Positions never leave the area because waypoints are inside it.
    """
    w, h = users.area_m
    remaining = users.speed_mps * slot_duration_s
    active = remaining > 0.0

    while active.any():
        idx = np.nonzero(active)[0]
        vec = users.waypoint[idx] - users.xy[idx]
        dist = np.hypot(vec[:, 0], vec[:, 1])

        arrive = dist <= remaining[idx]
        go = ~arrive

        gi = idx[go]
        if len(gi):
            d = dist[go][:, None]
            users.xy[gi] += vec[go] / d * remaining[gi][:, None]
            remaining[gi] = 0.0

        ai = idx[arrive]
        if len(ai):
            users.xy[ai] = users.waypoint[ai]
            remaining[ai] -= dist[arrive]
            users.waypoint[ai] = rng.uniform(low=(0.0, 0.0), high=(w, h), size=(len(ai), 2))

        active = remaining > 1e-12
    return users


def draw_demands(
    users: UserPopulation, demand_range: tuple[int, int], rng: np.random.Generator
) -> np.ndarray:
    """Redraw per-user demands i.i.d. uniform over the integer range."""
    d_min, d_max = demand_range
    if not 0 < d_min <= d_max:
        raise ValueError(f"invalid demand range ({d_min}, {d_max})")
    users.demand = rng.integers(d_min, d_max + 1, size=len(users), dtype=np.int64)
    return users.demand


def dissatisfaction_counts(
    placement: Placement, users: UserPopulation
) -> dict[tuple[Tolerance, TierId], int]:
    """Dissatisfied-user counts per (tolerance class, destination tier).

    Exactly the violation pairs are reported: intolerant users on Tier-III or
    Tier-IV and mid-tolerant users on Tier-IV. Tolerant users never count.
    """
    counts = {key: 0 for key in VIOLATION_KEYS}
    tol_arr = users.tolerance
    for uid, tcode in zip(placement.user_ids, placement.dest_tier_codes):
        if tcode < 0:
            continue
        tier = TIER_FROM_CODE[tcode]
        tol = _TOL_ENUMS[int(tol_arr[uid])]
        if is_violation(tol, tier):
            counts[(tol, tier)] += 1
    return counts


_TOL_ENUMS = {code: tol for tol, code in TOL_CODE.items()}


@dataclass(frozen=True)
class SlotRecord:
    """Per-slot outcome: chosen vector, reference power, offload and
    dissatisfaction aggregates."""

    slot: int
    strategy_power_w: float          # counted power of the strategy's decision
    a3_power_w: float                # counted power of all-active on the same snapshot
    on_off: tuple[bool, ...]
    offloaded_demand: dict[TierId, int]
    dissatisfied: dict[tuple[Tolerance, TierId], int]
    total_demand: int
    mean_sbs_raw_load: float

    @property
    def dissatisfied_total(self) -> int:
        return sum(self.dissatisfied.values())

    @property
    def dissatisfied_tier3(self) -> int:
        return self.dissatisfied[(Tolerance.INTOLERANT, TierId.TIER3_HAPS)]

    @property
    def dissatisfied_tier4(self) -> int:
        return (
            self.dissatisfied[(Tolerance.INTOLERANT, TierId.TIER4_SAT)]
            + self.dissatisfied[(Tolerance.MID_TOLERANT, TierId.TIER4_SAT)]
        )


def cumulative_gain(records: Sequence[SlotRecord]) -> float:
    """Percent reduction of summed counted power versus the all-active
    reference over a run."""
    if not records:
        raise ValueError("cumulative_gain needs at least one slot record")
    ref = sum(r.a3_power_w for r in records)
    got = sum(r.strategy_power_w for r in records)
    return 100.0 * (ref - got) / ref


def _verify_slot(snapshot: Snapshot, decision: SwitchDecision, config: ScenarioConfig) -> None:
    """Internal consistency checks used by the acceptance suite."""
    placement = decision.placement
    total = int(snapshot.users.demand.sum())
    assigned = sum(snapshot.assignment.demand_by_station.values())
    if assigned != total:
        raise AssertionError(f"association lost demand: {assigned} != {total}")

    off_ids = {s.id for s, on in zip(snapshot.sbs, decision.on_off) if not on}
    off_demand = sum(snapshot.assignment.assigned_demand(sid) for sid in off_ids)
    placed = placement.placed_demand_total()
    if placed + placement.unplaced_demand_total() != off_demand:
        raise AssertionError("placement lost demand")
    if not placement.feasible:
        raise AssertionError("returned decision carries an infeasible placement")

    # Ledger non-negativity: placed never exceeds a destination's effective
    # capacity net of pre-assigned demand.
    for sid, units in placement.placed_demand_by_station.items():
        st = next(s for s in snapshot.stations if s.id == sid)
        residual0 = st.effective_capacity - snapshot.assignment.assigned_demand(sid)
        if units > residual0 + 1e-9:
            raise AssertionError(f"destination {sid} over capacity: {units} > {residual0}")

    b = decision.power
    lhs = b.grand_total
    rhs = b.terrestrial_total + b.ntn_dynamic_total + b.uav_static_total
    if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
        raise AssertionError("power breakdown does not add up")


def run(
    config: ScenarioConfig,
    density: int,
    seed: int,
    approach: Approach | str | None = None,
    strategy: Strategy | str | None = None,
    *,
    verify_invariants: bool = False,
) -> list[SlotRecord]:
    """Simulate one (config, density, seed) cell: mobility, demand draws,
    association, and the per-slot switching decision, with the all-active
    reference computed on the identical snapshot."""
    violations = validate(config)
    if violations:
        raise ScenarioValidationError(violations)
    approach = Approach(approach) if approach is not None else config.approach
    strategy = Strategy(strategy) if strategy is not None else config.strategy

    rng_spawn = substream(seed, _STREAM_SPAWN)
    rng_mob = substream(seed, _STREAM_MOBILITY)
    rng_dem = substream(seed, _STREAM_DEMAND)

    users = spawn_users(density, config, rng_spawn)
    sbs_capacity = np.array(
        [s.capacity for s in config.usable_stations() if s.tier == TierId.TIER1_SBS]
    )

    records: list[SlotRecord] = []
    for slot in range(config.slot_count):
        step_mobility(users, config.slot_duration_s, rng_mob)
        draw_demands(users, config.demand_range, rng_dem)
        snapshot = make_snapshot(config, users)

        reference = a3(snapshot)
        if strategy == Strategy.A3:
            decision = reference
        elif strategy == Strategy.ES:
            decision = es_switch(snapshot, approach)
        else:
            decision = greedy_switch(snapshot, approach)

        if verify_invariants:
            _verify_slot(snapshot, decision, config)

        counted = decision.power.counted_total(config.count_ntn_power)
        ref_counted = reference.power.counted_total(config.count_ntn_power)

        offloaded = {tier: 0 for tier in OFFLOAD_TIERS}
        for tier, units in decision.placement.demand_by_tier().items():
            offloaded[tier] += units

        sbs_demands = np.array(
            [snapshot.assignment.assigned_demand(s.id) for s in snapshot.sbs], dtype=float
        )
        records.append(
            SlotRecord(
                slot=slot,
                strategy_power_w=counted,
                a3_power_w=ref_counted,
                on_off=decision.on_off,
                offloaded_demand=offloaded,
                dissatisfied=dissatisfaction_counts(decision.placement, users),
                total_demand=int(users.demand.sum()),
                mean_sbs_raw_load=float((sbs_demands / sbs_capacity).mean()),
            )
        )
    return records


@dataclass(frozen=True)
class SweepRow:
    """Aggregated outcome of one (scenario, density, seed, approach, strategy) run."""

    scenario: str
    density: int
    seed: int
    approach: Approach
    strategy: Strategy
    gain_pct: float
    strategy_power_sum_w: float
    a3_power_sum_w: float
    dissat_total: int
    dissat_mean_per_slot: float
    dissat_tier3_total: int
    dissat_tier4_total: int
    mean_sbs_raw_load: float

    @property
    def key(self) -> tuple:
        return (self.scenario, self.density, self.seed, self.approach.value, self.strategy.value)


@dataclass(frozen=True)
class SweepAggregate:
    """Mean/stddev over seeds for one (scenario, density, approach, strategy) cell."""

    scenario: str
    density: int
    approach: Approach
    strategy: Strategy
    n_seeds: int
    gain_mean_pct: float
    gain_std_pct: float
    dissat_total_mean: float
    dissat_mean_per_slot: float
    dissat_tier3_mean: float
    dissat_tier4_mean: float
    mean_sbs_raw_load: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    aggregates: tuple[SweepAggregate, ...]
    slots: dict[tuple, list[SlotRecord]] | None = None


def row_from_records(
    records: Sequence[SlotRecord],
    scenario: str,
    density: int,
    seed: int,
    approach: Approach,
    strategy: Strategy,
) -> SweepRow:
    gain = cumulative_gain(records)
    dissat_total = sum(r.dissatisfied_total for r in records)
    return SweepRow(
        scenario=scenario,
        density=density,
        seed=seed,
        approach=approach,
        strategy=strategy,
        gain_pct=gain,
        strategy_power_sum_w=sum(r.strategy_power_w for r in records),
        a3_power_sum_w=sum(r.a3_power_w for r in records),
        dissat_total=dissat_total,
        dissat_mean_per_slot=dissat_total / len(records),
        dissat_tier3_total=sum(r.dissatisfied_tier3 for r in records),
        dissat_tier4_total=sum(r.dissatisfied_tier4 for r in records),
        mean_sbs_raw_load=float(np.mean([r.mean_sbs_raw_load for r in records])),
    )


def _sweep_task(args: tuple) -> tuple[SweepRow, list[SlotRecord] | None]:
    config, scenario, density, seed, approach, strategy, verify, keep_slots = args
    cfg = config.with_tier_set(SCENARIO_TIER_SETS[scenario])
    records = run(cfg, density, seed, approach, strategy, verify_invariants=verify)
    row = row_from_records(records, scenario, density, seed, approach, strategy)
    return row, (records if keep_slots else None)


def sweep(
    config: ScenarioConfig,
    *,
    scenarios: Sequence[str] | None = None,
    densities: Sequence[int] | None = None,
    seeds: Sequence[int] | None = None,
    approaches: Sequence[Approach | str] | None = None,
    strategies: Sequence[Strategy | str] | None = None,
    jobs: int = 1,
    verify_invariants: bool = False,
    keep_slots: bool = False,
) -> SweepResult:
    """Run the Cartesian product of tier-set scenarios, densities, seeds,
    approaches and strategies. Results are merged by key, so the output is
    independent of worker scheduling."""
    violations = validate(config)
    if violations:
        raise ScenarioValidationError(violations)

    scenarios = tuple(scenarios) if scenarios is not None else tuple(SCENARIO_TIER_SETS)
    unknown = [s for s in scenarios if s not in SCENARIO_TIER_SETS]
    if unknown:
        raise ValueError(f"unknown scenario labels {unknown}; known: {list(SCENARIO_TIER_SETS)}")
    densities = tuple(densities) if densities is not None else config.user_densities
    seeds = tuple(seeds) if seeds is not None else config.seeds
    approaches = tuple(
        Approach(a) for a in (approaches if approaches is not None else (config.approach,))
    )
    strategies = tuple(
        Strategy(s) for s in (strategies if strategies is not None else (config.strategy,))
    )

    tasks = [
        (config, sc, d, seed, ap, st, verify_invariants, keep_slots)
        for sc in scenarios
        for d in densities
        for seed in seeds
        for ap in approaches
        for st in strategies
    ]

    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=jobs) as pool:
            outcomes = pool.map(_sweep_task, tasks, chunksize=1)
    else:
        outcomes = [_sweep_task(t) for t in tasks]

    by_key: dict[tuple, SweepRow] = {}
    slot_map: dict[tuple, list[SlotRecord]] = {}
    for row, slots_ in outcomes:
        if row.key in by_key:
            raise AssertionError(f"duplicate sweep key {row.key}")
        by_key[row.key] = row
        if keep_slots and slots_ is not None:
            slot_map[row.key] = slots_

    rows = tuple(by_key[k] for k in sorted(by_key))

    aggregates: list[SweepAggregate] = []
    for sc in scenarios:
        for d in densities:
            for ap in approaches:
                for st in strategies:
                    cell = [
                        r
                        for r in rows
                        if (r.scenario, r.density, r.approach, r.strategy) == (sc, d, ap, st)
                    ]
                    if not cell:
                        continue
                    gains = np.array([r.gain_pct for r in cell])
                    aggregates.append(
                        SweepAggregate(
                            scenario=sc,
                            density=d,
                            approach=ap,
                            strategy=st,
                            n_seeds=len(cell),
                            gain_mean_pct=float(gains.mean()),
                            gain_std_pct=float(gains.std(ddof=1)) if len(cell) > 1 else 0.0,
                            dissat_total_mean=float(np.mean([r.dissat_total for r in cell])),
                            dissat_mean_per_slot=float(
                                np.mean([r.dissat_mean_per_slot for r in cell])
                            ),
                            dissat_tier3_mean=float(np.mean([r.dissat_tier3_total for r in cell])),
                            dissat_tier4_mean=float(np.mean([r.dissat_tier4_total for r in cell])),
                            mean_sbs_raw_load=float(np.mean([r.mean_sbs_raw_load for r in cell])),
                        )
                    )

    for row in rows:
        if not 0.0 <= row.gain_pct <= 100.0:
            raise AssertionError(f"gain out of range for {row.key}: {row.gain_pct}")

    return SweepResult(
        rows=rows,
        aggregates=tuple(aggregates),
        slots=slot_map if keep_slots else None,
    )
