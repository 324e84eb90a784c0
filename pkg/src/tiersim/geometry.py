"""Free-space path loss, received-power ranking, and user-to-SBS association."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .scenario import BaseStation, TierId

if TYPE_CHECKING:
    from .simulation import UserPopulation

# Free-space path loss uses distance in meters and frequency in MHz:
# 20 log10(d) + 20 log10(f) - 27.55. Distances below 1 m clamp to 1 m to dodge
# the d -> 0 singularity.
_FSPL_OFFSET_DB = 27.55
MIN_DISTANCE_M = 1.0


def fspl_db(distance_m: float, freq_mhz: float) -> float:
    """Free-space path loss in dB for a distance in meters and carrier in MHz."""
    if freq_mhz <= 0:
        raise ValueError(f"freq_mhz must be positive, got {freq_mhz}")
    d = max(float(distance_m), MIN_DISTANCE_M)
    return 20.0 * math.log10(d) + 20.0 * math.log10(freq_mhz) - _FSPL_OFFSET_DB


def tx_power_dbm(p_max_tx_w: float) -> float:
    return 10.0 * math.log10(p_max_tx_w * 1000.0)


def received_power_dbm(bs: BaseStation, user_pos: tuple[float, float]) -> float:
    """Downlink received power at ``user_pos`` assuming full transmit power."""
    if bs.profile is None:
        raise ValueError(f"station {bs.id} has no power profile to transmit with")
    d = math.hypot(bs.position[0] - user_pos[0], bs.position[1] - user_pos[1])
    return tx_power_dbm(bs.profile.p_max_tx) - fspl_db(d, bs.carrier_freq_mhz)


@dataclass(frozen=True)
class Assignment:
    """Initial user-to-station association plus per-station demand aggregates.

    ``server_ids[i]`` is the serving station of ``user_ids[i]``. Demand sums
    are kept per station id; stations that attracted nobody are absent (and
    read as zero).
    """

    user_ids: np.ndarray
    server_ids: np.ndarray
    demand_by_station: dict[int, int]
    capacity_by_station: dict[int, float]

    def server_of(self, user_id: int) -> int:
        hits = np.nonzero(self.user_ids == user_id)[0]
        if len(hits) == 0:
            raise KeyError(f"user {user_id} not in assignment")
        return int(self.server_ids[hits[0]])

    def assigned_demand(self, station_id: int) -> int:
        return self.demand_by_station.get(station_id, 0)

    def raw_ratio(self, station_id: int) -> float:
        """Unclamped demand / capacity; > 1 means the station is overloaded."""
        cap = self.capacity_by_station.get(station_id)
        if cap is None:
            return 0.0
        return self.demand_by_station.get(station_id, 0) / cap


def associate(users: "UserPopulation", active_sbs: Sequence[BaseStation]) -> Assignment:
    """Associate every user with the SBS offering the strongest received power.

    Only Tier-I SBS nodes are valid initial-association candidates; the MBS
    and NTN layers receive traffic through offloading only. Ties go to the
    smallest station id. Capacity is ignored here: overload shows up as a raw
    ratio above 1 and is handled by clamping the power model's load term.
    """
    if len(active_sbs) == 0:
        raise ValueError("associate needs at least one candidate SBS")
    bad = [s.id for s in active_sbs if s.tier != TierId.TIER1_SBS]
    if bad:
        raise ValueError(f"initial association candidates must be SBSs, got {bad}")

    stations = sorted(active_sbs, key=lambda s: s.id)
    sx = np.array([s.position for s in stations], dtype=float)          # (S, 2)
    txp = np.array([tx_power_dbm(s.profile.p_max_tx) for s in stations])
    freq = np.array([s.carrier_freq_mhz for s in stations])

    diff = users.xy[:, None, :] - sx[None, :, :]                        # (N, S, 2)
    dist = np.maximum(np.hypot(diff[:, :, 0], diff[:, :, 1]), MIN_DISTANCE_M)
    fspl = 20.0 * np.log10(dist) + 20.0 * np.log10(freq)[None, :] - _FSPL_OFFSET_DB
    rx = txp[None, :] - fspl

    # argmax returns the first maximum, i.e. the smallest station id on ties.
    best = np.argmax(rx, axis=1)
    station_ids = np.array([s.id for s in stations], dtype=np.int64)
    server_ids = station_ids[best]

    sums = np.bincount(best, weights=users.demand.astype(float), minlength=len(stations))
    demand_by_station = {
        int(station_ids[j]): int(round(sums[j])) for j in range(len(stations)) if sums[j] > 0
    }
    capacity_by_station = {s.id: s.capacity for s in stations}

    return Assignment(
        user_ids=users.ids.copy(),
        server_ids=server_ids,
        demand_by_station=demand_by_station,
        capacity_by_station=capacity_by_station,
    )


def bs_load(assignment: Assignment, station: BaseStation) -> float:
    """Load fraction in [0, 1] used by the power model; clamped at 1."""
    return min(1.0, assignment.assigned_demand(station.id) / station.capacity)
