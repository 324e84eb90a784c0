"""Switching strategies over the SBS on/off space.

Three strategies operate on a per-slot snapshot (users, demands, association):

* ``a3``            keeps every station active (the reference baseline),
* ``es_switch``     exhaustively minimizes counted network power over all
                    2^n on/off vectors,
* ``greedy_switch`` switches SBSs off in ascending-load order while offload
                    capacity holds out and power keeps improving.

The exhaustive search enumerates every vector but skips full placement work
for vectors whose power lower bound already exceeds the best candidate; a
correctness-first plain enumeration (``plain=True``) evaluates each vector
through the public placement and power operations and must produce identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import chain, product
from typing import TYPE_CHECKING

import numpy as np

from .geometry import Assignment, associate
from .offload import (
    TIER_CODE,
    TOL_FROM_CODE,
    Placement,
    admissibility_rows,
    destination_budgets,
    empty_placement,
    place_users,
)
from .power import NetworkPowerBreakdown, breakdown_from_demands, bs_power_w, network_power_w
from .scenario import Approach, BaseStation, ScenarioConfig, TierId

if TYPE_CHECKING:
    from .simulation import UserPopulation

MAX_ES_SBS = 20


@dataclass(frozen=True)
class Snapshot:
    """One slot's immutable world state, shared by all strategies."""

    config: ScenarioConfig
    stations: tuple[BaseStation, ...]  # usable stations, ascending id
    sbs: tuple[BaseStation, ...]       # switchable subset, ascending id
    mbs: BaseStation
    users: "UserPopulation"
    assignment: Assignment


@dataclass(frozen=True)
class SwitchDecision:
    """Outcome of one strategy on one snapshot. Infeasible vectors never leave
    the search, so ``feasible`` is always True on returned decisions."""

    on_off: tuple[bool, ...]  # ascending SBS id order
    placement: Placement
    power: NetworkPowerBreakdown
    feasible: bool = True


def make_snapshot(config: ScenarioConfig, users: "UserPopulation") -> Snapshot:
    stations = config.usable_stations()
    sbs = tuple(s for s in stations if s.tier == TierId.TIER1_SBS)
    mbs = next(s for s in stations if s.tier == TierId.TIER1_MBS)
    assignment = associate(users, sbs)
    return Snapshot(
        config=config,
        stations=stations,
        sbs=sbs,
        mbs=mbs,
        users=users,
        assignment=assignment,
    )


def a3(snapshot: Snapshot) -> SwitchDecision:
    """All-active baseline: nothing sleeps, nothing is offloaded."""
    on = {s.id: True for s in snapshot.sbs}
    power = network_power_w(
        snapshot.stations, on, snapshot.assignment, None, snapshot.config
    )
    return SwitchDecision(
        on_off=tuple(True for _ in snapshot.sbs),
        placement=empty_placement(),
        power=power,
    )


@lru_cache(maxsize=8)
def _on_masks(n: int) -> np.ndarray:
    """All 2^n on/off vectors as a bool matrix, rows in tuple-lexicographic
    order (False < True)."""
    return np.array(list(product((False, True), repeat=n)), dtype=bool).reshape(2**n, n)


class _SlotContext:
    """Precomputed per-slot data shared by the candidate evaluations."""

    def __init__(self, snapshot: Snapshot, approach: Approach):
        config = snapshot.config
        self.snapshot = snapshot
        self.approach = approach
        self.config = config

        sbs = snapshot.sbs
        self.n = len(sbs)
        self.sbs_ids = [s.id for s in sbs]
        assignment = snapshot.assignment

        self.sbs_demand = np.array(
            [assignment.assigned_demand(s.id) for s in sbs], dtype=float
        )
        self.act = np.array(
            [
                bs_power_w(s.profile, True, min(1.0, assignment.assigned_demand(s.id) / s.capacity))
                for s in sbs
            ]
        )
        self.slp = np.array([bs_power_w(s.profile, False, 0.0) for s in sbs])

        mbs = snapshot.mbs
        self.mbs_assigned = assignment.assigned_demand(mbs.id)
        self.mbs_base = bs_power_w(
            mbs.profile, True, min(1.0, self.mbs_assigned / mbs.capacity)
        )

        # Users grouped per SBS, each group pre-sorted by (demand desc, id asc).
        # Tuples are (negated demand, user id, tolerance code) so that plain
        # tuple sorting of any concatenation reproduces the processing order.
        users = snapshot.users
        pos = np.searchsorted(np.array(self.sbs_ids), assignment.server_ids)
        order = np.lexsort((users.ids, -users.demand, pos))
        pos_s = pos[order]
        negd = (-users.demand[order]).tolist()
        uid = users.ids[order].tolist()
        tol = users.tolerance[order].tolist()
        bounds = np.searchsorted(pos_s, np.arange(self.n + 1))
        self.per_sbs_tuples: list[list[tuple[int, int, int]]] = [
            list(zip(negd[a:b], uid[a:b], tol[a:b]))
            for a, b in zip(bounds[:-1], bounds[1:])
        ]

        budgets = destination_budgets(
            snapshot.stations, assignment, approach, config.tier_set
        )
        self.dest_ids = [b.station.id for b in budgets]
        self.dest_tcodes = [TIER_CODE[b.station.tier] for b in budgets]
        self.dest_res0 = [b.residual for b in budgets]
        self.adm_rows = admissibility_rows(approach, self.dest_tcodes)
        self.dest_stations = [b.station for b in budgets]

        # Marginal power rates per destination unit, as counted by the
        # optimization objective. These feed the candidate lower bound only.
        ntn_rate = config.ntn_dynamic_w_per_unit if config.count_ntn_power else 0.0
        p = mbs.profile
        self.r_mbs = p.n_trx * p.delta_p * p.p_max_tx / mbs.capacity
        non_mbs_rates = [ntn_rate for tc in self.dest_tcodes if tc != TIER_CODE[TierId.TIER1_MBS]]
        self.r_next = min(non_mbs_rates) if non_mbs_rates else 0.0
        self.res_mbs = self.dest_res0[0] if self.dest_res0 else 0.0
        self.cap_total = float(sum(self.dest_res0))

        self.max_demand = int(users.demand.max()) if len(users.demand) else 0
        self.uav_static = config.uav_static_w if config.count_ntn_power else 0.0
        self.uav_threshold = math.inf
        acc = 0.0
        for tc, res in zip(self.dest_tcodes, self.dest_res0):
            if tc == TIER_CODE[TierId.TIER2_UAV]:
                if res < self.max_demand:
                    self.uav_threshold = math.inf  # cannot guarantee UAV engagement
                else:
                    self.uav_threshold = acc
                break
            acc += res

    def evaluate(self, on_row) -> tuple[float, NetworkPowerBreakdown, list[int]] | None:
        """Exact counted power of one on/off vector, or None when the offload
        placement is infeasible. Returns (objective, breakdown, off indices)."""
        off_idx = [k for k in range(self.n) if not on_row[k]]

        n_dest = len(self.dest_res0)
        units = [0] * n_dest
        ucount = [0] * n_dest
        if off_idx:
            if len(off_idx) == 1:
                merged = self.per_sbs_tuples[off_idx[0]]
            else:
                merged = sorted(chain.from_iterable(self.per_sbs_tuples[k] for k in off_idx))
            residuals = self.dest_res0.copy()
            adm = self.adm_rows
            for negd, _uid, tol in merged:
                d = -negd
                row = adm[tol]
                for j in range(n_dest):
                    if row[j] and residuals[j] >= d:
                        residuals[j] -= d
                        units[j] += d
                        ucount[j] += 1
                        break
                else:
                    return None

        demand_by_id: dict[int, int] = {}
        served: dict[int, int] = {}
        for k, sid in enumerate(self.sbs_ids):
            demand_by_id[sid] = int(self.sbs_demand[k]) if on_row[k] else 0
        mbs_id = self.snapshot.mbs.id
        demand_by_id[mbs_id] = self.mbs_assigned
        active = {sid: bool(on_row[k]) for k, sid in enumerate(self.sbs_ids)}
        for j, sid in enumerate(self.dest_ids):
            if units[j]:
                demand_by_id[sid] = demand_by_id.get(sid, 0) + units[j]
            if ucount[j]:
                served[sid] = ucount[j]

        breakdown = breakdown_from_demands(
            self.snapshot.stations, active, demand_by_id, served, self.config
        )
        return breakdown.counted_total(self.config.count_ntn_power), breakdown, off_idx

    def materialize(self, off_idx: list[int]) -> Placement:
        """Rebuild the full Placement of a winning vector via the public path."""
        if not off_idx:
            return empty_placement()
        triples = [
            (uid, -negd, TOL_FROM_CODE[tol])
            for negd, uid, tol in chain.from_iterable(
                self.per_sbs_tuples[k] for k in off_idx
            )
        ]
        budgets = destination_budgets(
            self.snapshot.stations, self.snapshot.assignment, self.approach, self.config.tier_set
        )
        placement = place_users(triples, budgets, self.approach)
        if not placement.feasible:
            raise AssertionError("winning vector failed to re-place deterministically")
        return placement

    def candidate_bounds(self, masks: np.ndarray) -> np.ndarray:
        """Lower bound on counted power for every vector (rows of ``masks``).

        The bound is exact when all off-SBS demand fits the MBS; beyond that
        it charges the cheapest admissible marginal rates, so it never exceeds
        the true counted power of a feasible vector (a small margin absorbs
        float reassociation).
        """
        static = masks @ (self.act - self.slp) + self.slp.sum()
        off_demand = (~masks) @ self.sbs_demand

        if self.r_mbs >= self.r_next:
            m_star = max(0.0, self.res_mbs - self.max_demand + 1)
        else:
            m_star = self.res_mbs
        overflow_cost = self.r_mbs * m_star + self.r_next * (off_demand - m_star)
        add = np.where(off_demand <= self.res_mbs, self.r_mbs * off_demand, overflow_cost)
        if self.uav_static > 0.0 and math.isfinite(self.uav_threshold):
            add = add + self.uav_static * (off_demand > self.uav_threshold)

        bound = static + self.mbs_base + add - 1e-6
        return np.where(off_demand > self.cap_total, np.inf, bound)


def _decision_from(ctx: _SlotContext, on_row, breakdown: NetworkPowerBreakdown,
                   off_idx: list[int]) -> SwitchDecision:
    return SwitchDecision(
        on_off=tuple(bool(v) for v in on_row),
        placement=ctx.materialize(off_idx),
        power=breakdown,
    )


def es_switch(snapshot: Snapshot, approach: Approach, *, plain: bool = False) -> SwitchDecision:
    """Exhaustive search: the feasible on/off vector of minimum counted power.

    Ties prefer fewer active SBSs, then the lexicographically smallest vector
    (OFF before ON). All-ON is always feasible, so a decision always exists.
    With ``plain=True`` every vector is evaluated through the public placement
    and power operations with no pruning; results are identical by contract.
    """
    n = len(snapshot.sbs)
    if n > MAX_ES_SBS:
        raise ValueError(
            f"exhaustive search over {n} SBSs would evaluate 2^{n} vectors; "
            "use greedy_switch for rosters above "
            f"{MAX_ES_SBS} switchable stations"
        )
    if plain:
        return _es_plain(snapshot, approach)

    ctx = _SlotContext(snapshot, approach)
    masks = _on_masks(n)
    bounds = ctx.candidate_bounds(masks)
    order = np.argsort(bounds, kind="stable")

    best_key: tuple[float, int, tuple[bool, ...]] | None = None
    best: tuple[NetworkPowerBreakdown, list[int]] | None = None
    active_counts = masks.sum(axis=1)

    for idx in order:
        if best_key is not None and bounds[idx] > best_key[0]:
            break
        if not np.isfinite(bounds[idx]):
            break
        row = masks[idx]
        result = ctx.evaluate(row.tolist())
        if result is None:
            continue
        objective, breakdown, off_idx = result
        key = (objective, int(active_counts[idx]), tuple(bool(v) for v in row))
        if best_key is None or key < best_key:
            best_key, best = key, (breakdown, off_idx)

    assert best_key is not None and best is not None  # all-ON is always feasible
    return _decision_from(ctx, best_key[2], best[0], best[1])


def _es_plain(snapshot: Snapshot, approach: Approach) -> SwitchDecision:
    config = snapshot.config
    sbs_ids = [s.id for s in snapshot.sbs]
    users = snapshot.users
    server = snapshot.assignment.server_ids

    best_key = None
    best_decision = None
    for on_row in product((False, True), repeat=len(sbs_ids)):
        off_ids = {sid for sid, on in zip(sbs_ids, on_row) if not on}
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
            continue
        power = network_power_w(
            snapshot.stations,
            {sid: on for sid, on in zip(sbs_ids, on_row)},
            snapshot.assignment,
            placement,
            config,
        )
        key = (power.counted_total(config.count_ntn_power), sum(on_row), on_row)
        if best_key is None or key < best_key:
            best_key = key
            best_decision = SwitchDecision(on_off=on_row, placement=placement, power=power)

    assert best_decision is not None
    return best_decision


def greedy_switch(snapshot: Snapshot, approach: Approach) -> SwitchDecision:
    """Load-sorted greedy: switch SBSs off in ascending raw-load order, keeping
    each switch-off only while the cumulative offload placement stays feasible
    and counted power does not increase; the first rejection reverts that SBS
    and stops.
    """
    ctx = _SlotContext(snapshot, approach)
    n = ctx.n
    assignment = snapshot.assignment

    ratios = [assignment.raw_ratio(sid) for sid in ctx.sbs_ids]
    visit = sorted(range(n), key=lambda k: (ratios[k], ctx.sbs_ids[k]))

    on_row = [True] * n
    result = ctx.evaluate(on_row)
    assert result is not None
    best_obj, best_breakdown, best_off = result

    for k in visit:
        on_row[k] = False
        trial = ctx.evaluate(on_row)
        if trial is None or trial[0] > best_obj:
            on_row[k] = True
            break
        best_obj, best_breakdown, best_off = trial

    return _decision_from(ctx, on_row, best_breakdown, best_off)
