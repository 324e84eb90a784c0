"""Station power model and network power breakdown."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tiersim as ts
from tiersim.geometry import associate
from tiersim.offload import destination_budgets, place_users
from tiersim.power import bs_power_w, network_power_w
from tiersim.scenario import DEFAULT_PROFILES, Approach, BsClass, TierId, Tolerance

from conftest import build_config, make_population

MACRO = DEFAULT_PROFILES[BsClass.MACRO]

# Sums of the shipped per-class parameters (6 SBSs + 1 MBS):
#   static: 130 + 2*84 + 2*56 + 6.8 + 4.8 = 421.6
#   sleep (SBSs only): 2*56 + 2*39 + 4.3 + 2.9 = 197.2
ALL_ON_STATIC_W = 421.6
ALL_OFF_W = 130.0 + 197.2


def test_macro_power_at_zero_load_is_static():
    assert bs_power_w(MACRO, True, 0.0) == pytest.approx(130.0)


def test_macro_power_at_full_load():
    # 130 + 4.7 * 20 = 224
    assert bs_power_w(MACRO, True, 1.0) == pytest.approx(224.0)


def test_macro_sleep_power():
    assert bs_power_w(MACRO, False, 0.0) == pytest.approx(75.0)
    assert bs_power_w(MACRO, False, 1.0) == pytest.approx(75.0)


def test_load_outside_unit_interval_rejected():
    with pytest.raises(ValueError):
        bs_power_w(MACRO, True, 1.5)
    with pytest.raises(ValueError):
        bs_power_w(MACRO, True, -0.1)


def test_sleep_below_static_for_all_default_profiles():
    for cls, profile in DEFAULT_PROFILES.items():
        assert bs_power_w(profile, False, 0.0) < bs_power_w(profile, True, 0.0), cls


def test_n_trx_scales_power():
    p2 = ts.PowerProfile(p0_static=10.0, delta_p=2.0, p_max_tx=5.0, p_sleep=4.0, n_trx=3)
    assert bs_power_w(p2, True, 0.5) == pytest.approx(3 * (10.0 + 2.0 * 5.0 * 0.5))
    assert bs_power_w(p2, False, 0.0) == pytest.approx(12.0)


# ---------------------------------------------------------------------------
# network_power_w
# ---------------------------------------------------------------------------

def _empty_snapshot_parts(config):
    users = make_population([(500.0, 400.0)], demands=[0])
    sbs = [s for s in config.usable_stations() if s.tier == TierId.TIER1_SBS]
    assignment = associate(users, sbs)
    return users, assignment


def test_all_active_static_sum():
    config = build_config()
    _, assignment = _empty_snapshot_parts(config)
    on = {s.id: True for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, None, config)
    assert b.grand_total == pytest.approx(ALL_ON_STATIC_W)
    assert b.ntn_dynamic_total == 0.0
    assert b.uav_static_total == 0.0


def test_all_sbs_sleeping_without_offload():
    config = build_config()
    _, assignment = _empty_snapshot_parts(config)
    on = {s.id: False for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, None, config)
    assert b.grand_total == pytest.approx(ALL_OFF_W)


def test_haps_offload_adds_linear_dynamic_term():
    config = build_config()
    users, assignment = _empty_snapshot_parts(config)
    budgets = destination_budgets(
        config.usable_stations(), assignment, Approach.ENERGY_FOCUSED, config.tier_set
    )
    haps_id = next(s.id for s in config.stations if s.tier == TierId.TIER3_HAPS)
    haps_budget = next(b for b in budgets if b.station.id == haps_id)
    placement = place_users(
        [(7, 4, Tolerance.TOLERANT), (8, 6, Tolerance.TOLERANT)],
        [haps_budget],
        Approach.ENERGY_FOCUSED,
    )
    assert placement.feasible

    on = {s.id: True for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, placement, config)
    assert b.ntn_dynamic_total == pytest.approx(10 * 0.5)
    assert b.uav_static_total == 0.0
    assert b.grand_total == pytest.approx(ALL_ON_STATIC_W + 5.0)


def test_uav_static_term_counts_once_when_serving():
    config = build_config()
    users, assignment = _empty_snapshot_parts(config)
    budgets = destination_budgets(
        config.usable_stations(), assignment, Approach.DELAY_FOCUSED, config.tier_set
    )
    uav_budget = next(b for b in budgets if b.station.tier == TierId.TIER2_UAV)
    placement = place_users(
        [(7, 2, Tolerance.INTOLERANT), (8, 3, Tolerance.INTOLERANT)],
        [uav_budget],
        Approach.DELAY_FOCUSED,
    )
    on = {s.id: True for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, placement, config)
    assert b.uav_static_total == pytest.approx(50.0)
    assert b.ntn_dynamic_total == pytest.approx(5 * 0.5)


def test_placement_outside_tier_set_rejected():
    config = build_config()
    users, assignment = _empty_snapshot_parts(config)
    full = build_config()
    budgets = destination_budgets(
        full.usable_stations(), assignment, Approach.ENERGY_FOCUSED, full.tier_set
    )
    sat_budget = next(b for b in budgets if b.station.tier == TierId.TIER4_SAT)
    placement = place_users(
        [(3, 2, Tolerance.TOLERANT)], [sat_budget], Approach.ENERGY_FOCUSED
    )
    narrowed = config.with_tier_set(ts.SCENARIO_TIER_SETS["i"])
    on = {s.id: True for s in narrowed.usable_stations() if s.tier == TierId.TIER1_SBS}
    with pytest.raises(ValueError):
        network_power_w(narrowed.usable_stations(), on, assignment, placement, narrowed)


def test_overloaded_station_clamps_at_full_load():
    config = build_config()
    sbs = [s for s in config.usable_stations() if s.tier == TierId.TIER1_SBS]
    users = make_population([sbs[0].position] * 30, demands=[4] * 30)
    assignment = associate(users, sbs)
    assert assignment.raw_ratio(sbs[0].id) > 1.0
    on = {s.id: True for s in sbs}
    b = network_power_w(config.usable_stations(), on, assignment, None, config)
    p = sbs[0].profile
    assert b.per_station_w[sbs[0].id] == pytest.approx(
        p.p0_static + p.delta_p * p.p_max_tx * 1.0
    )


@settings(max_examples=40, deadline=None)
@given(
    loads=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=2),
    bump=st.floats(0.0, 0.5),
)
def test_monotone_in_load(loads, bump):
    config = build_config()
    stations = config.usable_stations()
    sbs = [s for s in stations if s.tier == TierId.TIER1_SBS]
    on = {s.id: True for s in sbs}

    def total(load0):
        users = make_population(
            [sbs[0].position] * 1, demands=[int(load0 * sbs[0].capacity)]
        )
        assignment = associate(users, [sbs[0]])
        return network_power_w(stations, on, assignment, None, config).grand_total

    lo = min(loads[0], min(1.0, loads[0] + bump))
    hi = max(loads[0], min(1.0, loads[0] + bump))
    assert total(lo) <= total(hi) + 1e-12


def test_breakdown_additivity():
    config = build_config()
    users, assignment = _empty_snapshot_parts(config)
    budgets = destination_budgets(
        config.usable_stations(), assignment, Approach.ENERGY_FOCUSED, config.tier_set
    )
    placement = place_users(
        [(1, 4, Tolerance.TOLERANT), (2, 3, Tolerance.INTOLERANT), (3, 2, Tolerance.MID_TOLERANT)],
        budgets,
        Approach.ENERGY_FOCUSED,
    )
    on = {s.id: (s.id % 2 == 0) for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, placement, config)
    lhs = b.grand_total
    rhs = b.terrestrial_total + b.ntn_dynamic_total + b.uav_static_total
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_counted_total_flag_drops_ntn_terms():
    config = build_config()
    users, assignment = _empty_snapshot_parts(config)
    budgets = destination_budgets(
        config.usable_stations(), assignment, Approach.DELAY_FOCUSED, config.tier_set
    )
    placement = place_users(
        [(5, 4, Tolerance.TOLERANT)], budgets[1:2], Approach.DELAY_FOCUSED
    )
    on = {s.id: True for s in config.usable_stations() if s.tier == TierId.TIER1_SBS}
    b = network_power_w(config.usable_stations(), on, assignment, placement, config)
    assert b.counted_total(True) == b.grand_total
    assert b.counted_total(False) == b.terrestrial_total
