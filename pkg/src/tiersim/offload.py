"""Offload policy: tier priority orders, context-aware admissibility, and the
per-user placement engine for traffic of switched-off SBSs.

Two flavors exist. The energy-focused order prefers destinations that add the
least power (MBS first, then HAPS, satellite, and UAV last); delay tolerance
is never enforced, violations are merely counted. The delay-focused order
prefers low-latency destinations (MBS, then UAV, HAPS, satellite) and refuses
any placement that would dissatisfy a delay-sensitive user.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .geometry import Assignment
from .scenario import Approach, BaseStation, TierId, Tolerance

# Compact integer codes used in placement hot paths.
TIER_CODE: dict[TierId, int] = {
    TierId.TIER1_SBS: 0,
    TierId.TIER1_MBS: 1,
    TierId.TIER2_UAV: 2,
    TierId.TIER3_HAPS: 3,
    TierId.TIER4_SAT: 4,
}
TIER_FROM_CODE: dict[int, TierId] = {v: k for k, v in TIER_CODE.items()}

TOL_CODE: dict[Tolerance, int] = {
    Tolerance.INTOLERANT: 0,
    Tolerance.MID_TOLERANT: 1,
    Tolerance.TOLERANT: 2,
}
TOL_FROM_CODE: dict[int, Tolerance] = {v: k for k, v in TOL_CODE.items()}

_ENERGY_ORDER = (TierId.TIER1_MBS, TierId.TIER3_HAPS, TierId.TIER4_SAT, TierId.TIER2_UAV)
_DELAY_ORDER = (TierId.TIER1_MBS, TierId.TIER2_UAV, TierId.TIER3_HAPS, TierId.TIER4_SAT)


def tier_order(approach: Approach, tier_set: frozenset[TierId]) -> list[TierId]:
    """Ordered offload destination tiers for an approach, filtered to tier_set.

    The MBS is always the first destination; SBSs are never destinations.
    """
    full = _ENERGY_ORDER if approach == Approach.ENERGY_FOCUSED else _DELAY_ORDER
    return [t for t in full if t in tier_set]


def is_violation(tolerance: Tolerance, destination_tier: TierId) -> bool:
    """True when serving this tolerance class from this tier counts as a
    dissatisfied user: intolerant on Tier-III/IV, mid-tolerant on Tier-IV."""
    if tolerance == Tolerance.INTOLERANT:
        return destination_tier in (TierId.TIER3_HAPS, TierId.TIER4_SAT)
    if tolerance == Tolerance.MID_TOLERANT:
        return destination_tier == TierId.TIER4_SAT
    return False


def admissible(tolerance: Tolerance, destination_tier: TierId, approach: Approach) -> bool:
    """Whether a user of this tolerance class may be placed on this tier.

    The energy-focused approach admits everything and lets the metrics count
    the violations; the delay-focused approach refuses exactly the violation
    set.
    """
    if approach == Approach.ENERGY_FOCUSED:
        return True
    return not is_violation(tolerance, destination_tier)


@dataclass
class DestinationBudget:
    """One offload destination with its remaining capacity ledger."""

    station: BaseStation
    residual: float


def destination_budgets(
    stations: Sequence[BaseStation],
    assignment: Assignment | None,
    approach: Approach,
    tier_set: frozenset[TierId],
) -> list[DestinationBudget]:
    """Build the ordered destination ledger for one switching evaluation.

    Destinations are the MBS plus NTN stations, in tier_order; stations within
    a tier are ordered by id. Residual = capacity * availability minus any
    demand already assigned at association time (relevant for the MBS).
    """
    order = tier_order(approach, tier_set)
    budgets: list[DestinationBudget] = []
    for tier in order:
        for st in sorted((s for s in stations if s.tier == tier), key=lambda s: s.id):
            assigned = assignment.assigned_demand(st.id) if assignment is not None else 0
            budgets.append(DestinationBudget(st, max(0.0, st.effective_capacity - assigned)))
    return budgets


@dataclass
class Placement:
    """Where each off-SBS user landed, plus per-destination aggregates.

    Parallel lists are in processing order (demand descending, user id
    ascending). ``dest_station_ids[i]`` is -1 for users left unplaced because
    placement stopped at ``blocked_user_id``.
    """

    user_ids: list[int] = field(default_factory=list)
    demands: list[int] = field(default_factory=list)
    tolerance_codes: list[int] = field(default_factory=list)
    dest_station_ids: list[int] = field(default_factory=list)
    dest_tier_codes: list[int] = field(default_factory=list)
    placed_demand_by_station: dict[int, int] = field(default_factory=dict)
    placed_users_by_station: dict[int, int] = field(default_factory=dict)
    tier_by_station: dict[int, TierId] = field(default_factory=dict)
    blocked_user_id: int | None = None

    @property
    def feasible(self) -> bool:
        return self.blocked_user_id is None

    @property
    def by_user(self) -> dict[int, int]:
        """user id -> destination station id, placed users only."""
        return {
            u: s
            for u, s in zip(self.user_ids, self.dest_station_ids)
            if s >= 0
        }

    def placed_demand(self, station_id: int) -> int:
        return self.placed_demand_by_station.get(station_id, 0)

    def placed_users(self, station_id: int) -> int:
        return self.placed_users_by_station.get(station_id, 0)

    def demand_by_tier(self) -> dict[TierId, int]:
        out: dict[TierId, int] = {}
        for sid, units in self.placed_demand_by_station.items():
            tier = self.tier_by_station[sid]
            out[tier] = out.get(tier, 0) + units
        return out

    def placed_demand_total(self) -> int:
        return sum(self.placed_demand_by_station.values())

    def unplaced_demand_total(self) -> int:
        return sum(d for d, s in zip(self.demands, self.dest_station_ids) if s < 0)


def empty_placement() -> Placement:
    return Placement()


def admissibility_rows(
    approach: Approach, dest_tier_codes: Sequence[int]
) -> tuple[tuple[bool, ...], ...]:
    """Per tolerance code, one boolean per destination: may this class use it?"""
    rows = []
    for tol_code in range(3):
        tol = TOL_FROM_CODE[tol_code]
        rows.append(
            tuple(
                admissible(tol, TIER_FROM_CODE[tc], approach) for tc in dest_tier_codes
            )
        )
    return tuple(rows)


def first_fit(
    demands: Sequence[int],
    tol_codes: Sequence[int],
    residuals: list[float],
    adm_rows: Sequence[Sequence[bool]],
) -> tuple[list[int], int]:
    """Place users (already sorted) first-fit over the destination ledger.

    ``residuals`` is mutated in place. Returns (destination index per user,
    blocked position); blocked position is -1 when everyone was placed, else
    the index of the first user that fit nowhere (processing stops there).
    """
    n_dest = len(residuals)
    out = [-1] * len(demands)
    for i, d in enumerate(demands):
        row = adm_rows[tol_codes[i]]
        for j in range(n_dest):
            if row[j] and residuals[j] >= d:
                residuals[j] -= d
                out[i] = j
                break
        else:
            return out, i
    return out, -1


def place_users(
    off_users: Iterable[tuple[int, int, Tolerance]],
    destinations: list[DestinationBudget],
    approach: Approach,
) -> Placement:
    """Place users of switched-off SBSs onto the ordered destinations.

    Users are processed in descending demand (ties by ascending user id) and
    each is placed whole at the first destination with enough residual that is
    admissible for its tolerance class. If some user fits nowhere, processing
    stops and the returned Placement names it in ``blocked_user_id``.

    The ``destinations`` ledger is mutated in place as capacity is consumed.
    """
    triples = sorted(off_users, key=lambda t: (-t[1], t[0]))
    user_ids = [t[0] for t in triples]
    demands = [int(t[1]) for t in triples]
    tol_codes = [TOL_CODE[t[2]] for t in triples]

    dest_ids = [b.station.id for b in destinations]
    dest_tcodes = [TIER_CODE[b.station.tier] for b in destinations]
    adm_rows = admissibility_rows(approach, dest_tcodes)

    residuals = [b.residual for b in destinations]
    dest_idx, blocked_pos = first_fit(demands, tol_codes, residuals, adm_rows)
    for b, r in zip(destinations, residuals):
        b.residual = r

    return build_placement(
        user_ids, demands, tol_codes, dest_idx, blocked_pos, dest_ids, dest_tcodes
    )


def build_placement(
    user_ids: list[int],
    demands: list[int],
    tol_codes: list[int],
    dest_idx: list[int],
    blocked_pos: int,
    dest_ids: list[int],
    dest_tcodes: list[int],
) -> Placement:
    """Assemble a Placement from raw first-fit output."""
    placed_demand: dict[int, int] = {}
    placed_users: dict[int, int] = {}
    dest_station_ids = []
    dest_tier_codes = []
    for d, j in zip(demands, dest_idx):
        if j < 0:
            dest_station_ids.append(-1)
            dest_tier_codes.append(-1)
            continue
        sid = dest_ids[j]
        dest_station_ids.append(sid)
        dest_tier_codes.append(dest_tcodes[j])
        placed_demand[sid] = placed_demand.get(sid, 0) + d
        placed_users[sid] = placed_users.get(sid, 0) + 1

    return Placement(
        user_ids=user_ids,
        demands=demands,
        tolerance_codes=tol_codes,
        dest_station_ids=dest_station_ids,
        dest_tier_codes=dest_tier_codes,
        placed_demand_by_station=placed_demand,
        placed_users_by_station=placed_users,
        tier_by_station={sid: TIER_FROM_CODE[tc] for sid, tc in zip(dest_ids, dest_tcodes)},
        blocked_user_id=None if blocked_pos < 0 else user_ids[blocked_pos],
    )
