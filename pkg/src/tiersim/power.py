"""Station and network power accounting.

Tier-I stations follow a linear supply-power model: a static term plus a
load-proportional dynamic term while active, and a fixed sleep draw while
switched off. HAPS and satellites are treated as already-operational
platforms, so offloading to them only adds a configurable per-demand-unit
increment; a UAV additionally pays a deployment (hover) term in any slot it
serves at least one user.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .geometry import Assignment
from .offload import Placement
from .scenario import BaseStation, PowerProfile, ScenarioConfig, TierId

_NTN_ORDER = (TierId.TIER2_UAV, TierId.TIER3_HAPS, TierId.TIER4_SAT)


@dataclass(frozen=True)
class NetworkPowerBreakdown:
    """Network power of one switching decision, split by origin.

    grand_total = terrestrial_total + ntn_dynamic_total + uav_static_total.
    """

    per_station_w: dict[int, float]
    terrestrial_total: float
    ntn_dynamic_total: float
    uav_static_total: float
    grand_total: float

    def counted_total(self, count_ntn_power: bool) -> float:
        """Power that enters the optimization objective and the gain metric."""
        return self.grand_total if count_ntn_power else self.terrestrial_total


def bs_power_w(profile: PowerProfile, active: bool, load: float) -> float:
    """Supply power of one Tier-I station at the given load fraction."""
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"load must be in [0, 1], got {load}")
    if active:
        return profile.n_trx * (profile.p0_static + profile.delta_p * profile.p_max_tx * load)
    return profile.n_trx * profile.p_sleep


def breakdown_from_demands(
    stations: Sequence[BaseStation],
    active_by_id: Mapping[int, bool],
    demand_by_id: Mapping[int, int],
    served_users_by_id: Mapping[int, int],
    config: ScenarioConfig,
) -> NetworkPowerBreakdown:
    """Power breakdown from per-station demand totals.

    ``stations`` must be the usable stations; Tier-I members are summed in
    ascending id order so results are bit-stable across call sites.
    """
    ordered = sorted(stations, key=lambda s: s.id)

    per_station: dict[int, float] = {}
    terrestrial = 0.0
    for s in ordered:
        if s.tier not in (TierId.TIER1_SBS, TierId.TIER1_MBS):
            continue
        active = bool(active_by_id.get(s.id, True))
        load = min(1.0, demand_by_id.get(s.id, 0) / s.capacity) if active else 0.0
        w = bs_power_w(s.profile, active, load)
        per_station[s.id] = w
        terrestrial += w

    ntn_dynamic = 0.0
    uav_static = 0.0
    for tier in _NTN_ORDER:
        for s in ordered:
            if s.tier != tier:
                continue
            units = demand_by_id.get(s.id, 0)
            w = config.ntn_dynamic_w_per_unit * units
            ntn_dynamic += w
            if tier == TierId.TIER2_UAV and served_users_by_id.get(s.id, 0) >= 1:
                w += config.uav_static_w
                uav_static += config.uav_static_w
            per_station[s.id] = w

    grand = terrestrial + ntn_dynamic + uav_static
    return NetworkPowerBreakdown(
        per_station_w=per_station,
        terrestrial_total=terrestrial,
        ntn_dynamic_total=ntn_dynamic,
        uav_static_total=uav_static,
        grand_total=grand,
    )


def network_power_w(
    stations: Sequence[BaseStation],
    sbs_on: Mapping[int, bool],
    assignment: Assignment,
    placement: Placement | None,
    config: ScenarioConfig,
) -> NetworkPowerBreakdown:
    """Total network power for one candidate switching decision.

    Loads are recomputed here from the association and the placement: an
    active SBS keeps its associated demand, a sleeping SBS contributes its
    users' demand through the placement instead, and the MBS serves its
    associated demand plus whatever was offloaded to it. Overload clamps at
    load 1. Raises if the placement references a station outside ``stations``.
    """
    by_id = {s.id: s for s in stations}

    demand_by_id: dict[int, int] = {}
    served_users: dict[int, int] = {}
    active_by_id: dict[int, bool] = {}

    for s in stations:
        if s.tier == TierId.TIER1_SBS:
            on = bool(sbs_on[s.id])
            active_by_id[s.id] = on
            demand_by_id[s.id] = assignment.assigned_demand(s.id) if on else 0
        elif s.tier == TierId.TIER1_MBS:
            active_by_id[s.id] = True
            demand_by_id[s.id] = assignment.assigned_demand(s.id)

    if placement is not None:
        for sid, units in placement.placed_demand_by_station.items():
            if sid not in by_id:
                raise ValueError(
                    f"placement references station {sid} outside the usable tier set"
                )
            demand_by_id[sid] = demand_by_id.get(sid, 0) + units
        for sid, n in placement.placed_users_by_station.items():
            served_users[sid] = served_users.get(sid, 0) + n

    return breakdown_from_demands(stations, active_by_id, demand_by_id, served_users, config)
