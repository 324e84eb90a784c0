"""tiersim: a deterministic multi-tier cell-switching simulator.

Models a terrestrial network (macro + small cells) extended with UAV, HAPS
and LEO satellite layers, switches small cells off to save energy, offloads
their users across tiers under energy- or delay-focused policies, and reports
power-consumption gains and per-tier user dissatisfaction.
"""

__version__ = "0.1.0"

from .geometry import Assignment, associate, bs_load, fspl_db, received_power_dbm
from .offload import (
    DestinationBudget,
    Placement,
    admissible,
    destination_budgets,
    place_users,
    tier_order,
)
from .power import NetworkPowerBreakdown, bs_power_w, network_power_w
from .scenario import (
    SCENARIO_TIER_SETS,
    Approach,
    BaseStation,
    BsClass,
    Mobility,
    PowerProfile,
    ScenarioConfig,
    Strategy,
    TierId,
    Tolerance,
    UserClassSpec,
    default_case_study,
    load_scenario,
    validate,
    write_scenario,
)
from .simulation import (
    SlotRecord,
    SweepResult,
    UserPopulation,
    cumulative_gain,
    dissatisfaction_counts,
    draw_demands,
    run,
    spawn_users,
    step_mobility,
    sweep,
)
from .switching import Snapshot, SwitchDecision, a3, es_switch, greedy_switch, make_snapshot

__all__ = [
    "__version__",
    "Approach",
    "Assignment",
    "BaseStation",
    "BsClass",
    "DestinationBudget",
    "Mobility",
    "NetworkPowerBreakdown",
    "Placement",
    "PowerProfile",
    "SCENARIO_TIER_SETS",
    "ScenarioConfig",
    "SlotRecord",
    "Snapshot",
    "Strategy",
    "SweepResult",
    "SwitchDecision",
    "TierId",
    "Tolerance",
    "UserClassSpec",
    "UserPopulation",
    "a3",
    "admissible",
    "associate",
    "bs_load",
    "bs_power_w",
    "cumulative_gain",
    "default_case_study",
    "destination_budgets",
    "dissatisfaction_counts",
    "draw_demands",
    "es_switch",
    "fspl_db",
    "greedy_switch",
    "load_scenario",
    "make_snapshot",
    "network_power_w",
    "place_users",
    "received_power_dbm",
    "run",
    "spawn_users",
    "step_mobility",
    "sweep",
    "tier_order",
    "validate",
    "write_scenario",
]
