"""Scenario configuration: domain types, the default urban case study, JSON I/O.

A scenario fully describes one experiment: the service area, the base-station
roster with per-class power profiles, which network tiers are allowed to take
offloaded traffic, the user class mix, traffic parameters, and the sweep grid
(densities, seeds). All types are immutable after construction, so configs can
be shared freely across parallel runs.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any


class TierId(str, Enum):
    """Network layer of a serving node. Only TIER1_SBS nodes are switchable."""

    TIER1_SBS = "tier1_sbs"
    TIER1_MBS = "tier1_mbs"
    TIER2_UAV = "tier2_uav"
    TIER3_HAPS = "tier3_haps"
    TIER4_SAT = "tier4_sat"


ALL_TIERS = frozenset(TierId)

NTN_TIERS = (TierId.TIER2_UAV, TierId.TIER3_HAPS, TierId.TIER4_SAT)

# Named tier subsets for the standard sweep: (i) terrestrial only, (ii) adds
# HAPS, (iii) adds UAV + HAPS, (iv) HAPS + satellite, (v) everything.
SCENARIO_TIER_SETS: dict[str, frozenset[TierId]] = {
    "i": frozenset({TierId.TIER1_SBS, TierId.TIER1_MBS}),
    "ii": frozenset({TierId.TIER1_SBS, TierId.TIER1_MBS, TierId.TIER3_HAPS}),
    "iii": frozenset(
        {TierId.TIER1_SBS, TierId.TIER1_MBS, TierId.TIER2_UAV, TierId.TIER3_HAPS}
    ),
    "iv": frozenset(
        {TierId.TIER1_SBS, TierId.TIER1_MBS, TierId.TIER3_HAPS, TierId.TIER4_SAT}
    ),
    "v": ALL_TIERS,
}


class BsClass(str, Enum):
    MACRO = "macro"
    RRH = "rrh"
    MICRO = "micro"
    PICO = "pico"
    FEMTO = "femto"
    UAV = "uav"
    HAPS = "haps"
    LEO = "leo"


class Mobility(str, Enum):
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    VEHICULAR = "vehicular"


class Tolerance(str, Enum):
    INTOLERANT = "intolerant"
    MID_TOLERANT = "mid_tolerant"
    TOLERANT = "tolerant"


class Approach(str, Enum):
    """Offloading flavor: minimize added power vs. keep latency-sensitive users low."""

    ENERGY_FOCUSED = "energy_focused"
    DELAY_FOCUSED = "delay_focused"


class Strategy(str, Enum):
    A3 = "a3"          # all stations stay active, no switching
    ES = "es"          # exhaustive search over SBS on/off vectors
    GREEDY = "greedy"  # load-sorted switch-off until offload capacity is exhausted


class ScenarioError(Exception):
    """Base class for scenario ingestion problems."""


class ScenarioFormatError(ScenarioError):
    """Scenario file is unreadable as a scenario document (bad JSON, bad field)."""


class ScenarioValidationError(ScenarioError):
    """Scenario parsed fine but violates one or more invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid scenario: " + "; ".join(self.violations))


class ScenarioWarning(UserWarning):
    """Non-fatal scenario issue, e.g. a station dropped for an excluded tier."""


@dataclass(frozen=True)
class PowerProfile:
    """Linear supply-power model of one station class.

    Active power is n_trx * (p0_static + delta_p * p_max_tx * load) with load
    clamped to [0, 1]; a sleeping station draws n_trx * p_sleep.
    """

    p0_static: float   # watts at zero load
    delta_p: float     # load-dependence slope (dimensionless)
    p_max_tx: float    # max transmit power, watts
    p_sleep: float     # watts in sleep mode
    n_trx: int = 1


@dataclass(frozen=True)
class BaseStation:
    """One serving node. NTN nodes carry a nominal altitude for reporting only."""

    id: int
    tier: TierId
    bs_class: BsClass
    position: tuple[float, float]       # meters in area coordinates
    capacity: float                     # demand-units per slot
    profile: PowerProfile | None = None  # required for Tier-I nodes
    availability_fraction: float = 1.0
    carrier_freq_mhz: float = 2000.0
    altitude_m: float = 0.0

    @property
    def effective_capacity(self) -> float:
        """Demand-units per slot actually usable as an offload destination."""
        return self.capacity * self.availability_fraction


@dataclass(frozen=True)
class UserClassSpec:
    mobility: Mobility
    speed_mps: float
    tolerance: Tolerance
    mix_weight: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete experiment description. Immutable; safe to share across workers."""

    area_m: tuple[float, float]
    stations: tuple[BaseStation, ...]
    tier_set: frozenset[TierId]
    user_densities: tuple[int, ...]
    demand_range: tuple[int, int]
    slot_count: int
    slot_duration_s: float
    seeds: tuple[int, ...]
    approach: Approach
    strategy: Strategy
    class_mix: tuple[UserClassSpec, ...]
    ntn_dynamic_w_per_unit: float
    uav_static_w: float
    count_ntn_power: bool = True

    def usable_stations(self) -> tuple[BaseStation, ...]:
        """Stations whose tier is enabled, in ascending id order."""
        usable = [s for s in self.stations if s.tier in self.tier_set]
        return tuple(sorted(usable, key=lambda s: s.id))

    def with_tier_set(self, tier_set: frozenset[TierId]) -> "ScenarioConfig":
        return replace(self, tier_set=frozenset(tier_set))


# Standard per-class supply-power parameters (watts; single transceiver).
DEFAULT_PROFILES: dict[BsClass, PowerProfile] = {
    BsClass.MACRO: PowerProfile(p0_static=130.0, delta_p=4.7, p_max_tx=20.0, p_sleep=75.0),
    BsClass.RRH: PowerProfile(p0_static=84.0, delta_p=2.8, p_max_tx=20.0, p_sleep=56.0),
    BsClass.MICRO: PowerProfile(p0_static=56.0, delta_p=2.6, p_max_tx=6.3, p_sleep=39.0),
    BsClass.PICO: PowerProfile(p0_static=6.8, delta_p=4.0, p_max_tx=0.13, p_sleep=4.3),
    BsClass.FEMTO: PowerProfile(p0_static=4.8, delta_p=8.0, p_max_tx=0.05, p_sleep=2.9),
}

DEFAULT_SPEEDS_MPS: dict[Mobility, float] = {
    Mobility.PEDESTRIAN: 1.4,
    Mobility.CYCLIST: 4.0,
    Mobility.VEHICULAR: 14.0,
}


def _default_class_mix() -> tuple[UserClassSpec, ...]:
    # Uniform mix over the nine mobility x tolerance pairs.
    mix = []
    for mob in Mobility:
        for tol in Tolerance:
            mix.append(
                UserClassSpec(
                    mobility=mob,
                    speed_mps=DEFAULT_SPEEDS_MPS[mob],
                    tolerance=tol,
                    mix_weight=1.0 / 9.0,
                )
            )
    return tuple(mix)


def default_case_study() -> ScenarioConfig:
    """The shipped urban topology: 1 km x 1 km, one MBS, six mixed-class SBSs
    on a symmetric ring, plus one UAV, one HAPS (50% available) and one LEO
    satellite.
    """
    width, height = 1000.0, 1000.0
    cx, cy = width / 2.0, height / 2.0

    stations: list[BaseStation] = [
        BaseStation(
            id=0,
            tier=TierId.TIER1_MBS,
            bs_class=BsClass.MACRO,
            position=(cx, cy),
            capacity=60.0,
            profile=DEFAULT_PROFILES[BsClass.MACRO],
        )
    ]

    # Six SBSs on a 300 m ring: two RRHs, two microcells, one picocell, one
    # femtocell, at 60 degree spacing.
    ring_classes = [
        BsClass.RRH,
        BsClass.RRH,
        BsClass.MICRO,
        BsClass.MICRO,
        BsClass.PICO,
        BsClass.FEMTO,
    ]
    for k, cls in enumerate(ring_classes):
        angle = math.radians(60.0 * k)
        stations.append(
            BaseStation(
                id=k + 1,
                tier=TierId.TIER1_SBS,
                bs_class=cls,
                position=(cx + 300.0 * math.cos(angle), cy + 300.0 * math.sin(angle)),
                capacity=20.0,
                profile=DEFAULT_PROFILES[cls],
            )
        )

    stations.append(
        BaseStation(
            id=7,
            tier=TierId.TIER2_UAV,
            bs_class=BsClass.UAV,
            position=(cx, cy),
            capacity=30.0,
            altitude_m=150.0,
        )
    )
    stations.append(
        BaseStation(
            id=8,
            tier=TierId.TIER3_HAPS,
            bs_class=BsClass.HAPS,
            position=(cx, cy),
            capacity=100.0,
            availability_fraction=0.5,
            altitude_m=20_000.0,
        )
    )
    stations.append(
        BaseStation(
            id=9,
            tier=TierId.TIER4_SAT,
            bs_class=BsClass.LEO,
            position=(cx, cy),
            capacity=200.0,
            altitude_m=550_000.0,
        )
    )

    return ScenarioConfig(
        area_m=(width, height),
        stations=tuple(stations),
        tier_set=ALL_TIERS,
        user_densities=(50, 100, 200, 400, 600, 800),
        demand_range=(1, 4),
        slot_count=500,
        slot_duration_s=60.0,
        seeds=tuple(range(1, 11)),
        approach=Approach.ENERGY_FOCUSED,
        strategy=Strategy.ES,
        class_mix=_default_class_mix(),
        ntn_dynamic_w_per_unit=0.5,
        uav_static_w=50.0,
    )


def validate(config: ScenarioConfig) -> list[str]:
    """Check every scenario invariant; returns one message per violated rule
    (empty list means the config is valid)."""
    v: list[str] = []

    w, h = config.area_m
    if not (w > 0 and h > 0):
        v.append(f"area_m: both dimensions must be positive, got {config.area_m}")

    ids = [s.id for s in config.stations]
    if len(ids) != len(set(ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        v.append(f"stations: duplicate station ids {dupes}")

    bad_cap = [s.id for s in config.stations if not s.capacity > 0]
    if bad_cap:
        v.append(f"stations: capacity must be positive (stations {bad_cap})")

    bad_avail = [
        s.id for s in config.stations if not 0.0 <= s.availability_fraction <= 1.0
    ]
    if bad_avail:
        v.append(
            f"stations: availability_fraction must be in [0, 1] (stations {bad_avail})"
        )

    bad_freq = [s.id for s in config.stations if not s.carrier_freq_mhz > 0]
    if bad_freq:
        v.append(f"stations: carrier_freq_mhz must be positive (stations {bad_freq})")

    tier1 = (TierId.TIER1_SBS, TierId.TIER1_MBS)
    missing_profile = [s.id for s in config.stations if s.tier in tier1 and s.profile is None]
    if missing_profile:
        v.append(f"stations: Tier-I stations need a power profile (stations {missing_profile})")

    bad_profiles = []
    for s in config.stations:
        p = s.profile
        if p is None:
            continue
        ok = (
            p.p0_static > p.p_sleep >= 0.0
            and p.delta_p > 0.0
            and p.p_max_tx > 0.0
            and p.n_trx >= 1
        )
        if not ok:
            bad_profiles.append(s.id)
    if bad_profiles:
        v.append(
            "stations: power profile must satisfy p0_static > p_sleep >= 0, "
            f"delta_p > 0, p_max_tx > 0, n_trx >= 1 (stations {bad_profiles})"
        )

    n_mbs = sum(1 for s in config.stations if s.tier == TierId.TIER1_MBS)
    if n_mbs != 1:
        v.append(f"stations: exactly one MBS required, found {n_mbs}")

    n_sbs = sum(1 for s in config.stations if s.tier == TierId.TIER1_SBS)
    if n_sbs < 1:
        v.append("stations: at least one SBS required for user association")

    if TierId.TIER1_SBS not in config.tier_set or TierId.TIER1_MBS not in config.tier_set:
        v.append("tier_set: must contain tier1_sbs and tier1_mbs")

    d_min, d_max = config.demand_range
    if not (0 < d_min <= d_max):
        v.append(f"demand_range: need 0 < d_min <= d_max, got ({d_min}, {d_max})")

    if config.slot_count < 1:
        v.append(f"slot_count: must be >= 1, got {config.slot_count}")
    if not config.slot_duration_s > 0:
        v.append(f"slot_duration_s: must be positive, got {config.slot_duration_s}")

    if not config.user_densities:
        v.append("user_densities: must not be empty")
    elif any(d < 1 for d in config.user_densities):
        v.append(f"user_densities: every density must be >= 1, got {config.user_densities}")

    if not config.seeds:
        v.append("seeds: must not be empty")
    elif any(s < 0 for s in config.seeds):
        v.append(f"seeds: must be non-negative integers, got {config.seeds}")

    if not config.class_mix:
        v.append("class_mix: must not be empty")
    else:
        total = sum(c.mix_weight for c in config.class_mix)
        if abs(total - 1.0) > 1e-9:
            v.append(f"class_mix: mix_weights must sum to 1, got {total!r}")
        if any(c.speed_mps < 0 for c in config.class_mix):
            v.append("class_mix: speed_mps must be >= 0")

    if config.ntn_dynamic_w_per_unit < 0:
        v.append(
            f"ntn_dynamic_w_per_unit: must be >= 0, got {config.ntn_dynamic_w_per_unit}"
        )
    if config.uav_static_w < 0:
        v.append(f"uav_static_w: must be >= 0, got {config.uav_static_w}")

    return v


# ---------------------------------------------------------------------------
# JSON (de)serialization.
# ---------------------------------------------------------------------------

def profile_to_dict(p: PowerProfile) -> dict[str, Any]:
    return {
        "p0_static": p.p0_static,
        "delta_p": p.delta_p,
        "p_max_tx": p.p_max_tx,
        "p_sleep": p.p_sleep,
        "n_trx": p.n_trx,
    }


def station_to_dict(s: BaseStation) -> dict[str, Any]:
    return {
        "id": s.id,
        "tier": s.tier.value,
        "bs_class": s.bs_class.value,
        "position": list(s.position),
        "capacity": s.capacity,
        "profile": None if s.profile is None else profile_to_dict(s.profile),
        "availability_fraction": s.availability_fraction,
        "carrier_freq_mhz": s.carrier_freq_mhz,
        "altitude_m": s.altitude_m,
    }


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    """Plain-JSON representation; inverse of :func:`config_from_dict`."""
    return {
        "area_m": list(config.area_m),
        "stations": [station_to_dict(s) for s in config.stations],
        "tier_set": sorted(t.value for t in config.tier_set),
        "user_densities": list(config.user_densities),
        "demand_range": list(config.demand_range),
        "slot_count": config.slot_count,
        "slot_duration_s": config.slot_duration_s,
        "seeds": list(config.seeds),
        "approach": config.approach.value,
        "strategy": config.strategy.value,
        "class_mix": [
            {
                "mobility": c.mobility.value,
                "speed_mps": c.speed_mps,
                "tolerance": c.tolerance.value,
                "mix_weight": c.mix_weight,
            }
            for c in config.class_mix
        ],
        "ntn_dynamic_w_per_unit": config.ntn_dynamic_w_per_unit,
        "uav_static_w": config.uav_static_w,
        "count_ntn_power": config.count_ntn_power,
    }


def _enum_value(enum_cls, raw, where: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ScenarioFormatError(
            f"{where}: unknown value {raw!r} (allowed: {allowed})"
        ) from None


def _profile_from_dict(raw: Any, where: str) -> PowerProfile:
    if not isinstance(raw, dict):
        raise ScenarioFormatError(f"{where}: profile must be an object")
    known = {"p0_static", "delta_p", "p_max_tx", "p_sleep", "n_trx"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioFormatError(f"{where}: unknown profile fields {sorted(unknown)}")
    try:
        return PowerProfile(
            p0_static=float(raw["p0_static"]),
            delta_p=float(raw["delta_p"]),
            p_max_tx=float(raw["p_max_tx"]),
            p_sleep=float(raw["p_sleep"]),
            n_trx=int(raw.get("n_trx", 1)),
        )
    except KeyError as e:
        raise ScenarioFormatError(f"{where}: missing profile field {e.args[0]!r}") from None


def _station_from_dict(raw: Any, index: int) -> BaseStation:
    where = f"stations[{index}]"
    if not isinstance(raw, dict):
        raise ScenarioFormatError(f"{where}: station must be an object")
    known = {
        "id",
        "tier",
        "bs_class",
        "position",
        "capacity",
        "profile",
        "availability_fraction",
        "carrier_freq_mhz",
        "altitude_m",
    }
    unknown = set(raw) - known
    if unknown:
        raise ScenarioFormatError(f"{where}: unknown fields {sorted(unknown)}")
    try:
        pos = raw["position"]
        profile = raw.get("profile")
        return BaseStation(
            id=int(raw["id"]),
            tier=_enum_value(TierId, raw["tier"], f"{where}.tier"),
            bs_class=_enum_value(BsClass, raw["bs_class"], f"{where}.bs_class"),
            position=(float(pos[0]), float(pos[1])),
            capacity=float(raw["capacity"]),
            profile=None if profile is None else _profile_from_dict(profile, f"{where}.profile"),
            availability_fraction=float(raw.get("availability_fraction", 1.0)),
            carrier_freq_mhz=float(raw.get("carrier_freq_mhz", 2000.0)),
            altitude_m=float(raw.get("altitude_m", 0.0)),
        )
    except KeyError as e:
        raise ScenarioFormatError(f"{where}: missing field {e.args[0]!r}") from None
    except (TypeError, ValueError, IndexError) as e:
        raise ScenarioFormatError(f"{where}: {e}") from None


_CONFIG_FIELDS = set(config_to_dict(default_case_study()).keys())


def config_from_dict(raw: dict[str, Any]) -> ScenarioConfig:
    """Build a config from a JSON-style dict; fields not present fall back to
    the default case study."""
    if not isinstance(raw, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise ScenarioFormatError(f"unknown scenario fields {sorted(unknown)}")

    base = default_case_study()
    kwargs: dict[str, Any] = {}

    if "area_m" in raw:
        a = raw["area_m"]
        kwargs["area_m"] = (float(a[0]), float(a[1]))
    if "stations" in raw:
        if not isinstance(raw["stations"], list):
            raise ScenarioFormatError("stations: must be an array of objects")
        kwargs["stations"] = tuple(
            _station_from_dict(s, i) for i, s in enumerate(raw["stations"])
        )
    if "tier_set" in raw:
        kwargs["tier_set"] = frozenset(
            _enum_value(TierId, t, "tier_set") for t in raw["tier_set"]
        )
    if "user_densities" in raw:
        kwargs["user_densities"] = tuple(int(d) for d in raw["user_densities"])
    if "demand_range" in raw:
        d = raw["demand_range"]
        kwargs["demand_range"] = (int(d[0]), int(d[1]))
    if "slot_count" in raw:
        kwargs["slot_count"] = int(raw["slot_count"])
    if "slot_duration_s" in raw:
        kwargs["slot_duration_s"] = float(raw["slot_duration_s"])
    if "seeds" in raw:
        kwargs["seeds"] = tuple(int(s) for s in raw["seeds"])
    if "approach" in raw:
        kwargs["approach"] = _enum_value(Approach, raw["approach"], "approach")
    if "strategy" in raw:
        kwargs["strategy"] = _enum_value(Strategy, raw["strategy"], "strategy")
    if "class_mix" in raw:
        mix = []
        for i, c in enumerate(raw["class_mix"]):
            where = f"class_mix[{i}]"
            if not isinstance(c, dict):
                raise ScenarioFormatError(f"{where}: must be an object")
            try:
                mix.append(
                    UserClassSpec(
                        mobility=_enum_value(Mobility, c["mobility"], f"{where}.mobility"),
                        speed_mps=float(c["speed_mps"]),
                        tolerance=_enum_value(Tolerance, c["tolerance"], f"{where}.tolerance"),
                        mix_weight=float(c["mix_weight"]),
                    )
                )
            except KeyError as e:
                raise ScenarioFormatError(f"{where}: missing field {e.args[0]!r}") from None
        kwargs["class_mix"] = tuple(mix)
    if "ntn_dynamic_w_per_unit" in raw:
        kwargs["ntn_dynamic_w_per_unit"] = float(raw["ntn_dynamic_w_per_unit"])
    if "uav_static_w" in raw:
        kwargs["uav_static_w"] = float(raw["uav_static_w"])
    if "count_ntn_power" in raw:
        kwargs["count_ntn_power"] = bool(raw["count_ntn_power"])

    return replace(base, **kwargs)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read and validate a JSON scenario file.

    Unspecified fields take their default_case_study values. Stations whose
    tier is excluded by the file's tier_set are dropped with a warning.

    Raises FileNotFoundError / OSError for I/O problems, ScenarioFormatError
    for malformed documents, and ScenarioValidationError when invariants fail.
    """
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None

    config = config_from_dict(raw)

    dropped = [s for s in config.stations if s.tier not in config.tier_set]
    if dropped:
        warnings.warn(
            f"{path}: dropping stations outside tier_set: "
            f"{[(s.id, s.tier.value) for s in dropped]}",
            ScenarioWarning,
            stacklevel=2,
        )
        config = replace(
            config,
            stations=tuple(s for s in config.stations if s.tier in config.tier_set),
        )

    violations = validate(config)
    if violations:
        raise ScenarioValidationError(violations)
    return config


def write_scenario(config: ScenarioConfig, path: str | Path) -> None:
    """Serialize a config as a JSON scenario document."""
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")
