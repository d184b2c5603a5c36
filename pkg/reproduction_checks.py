"""
Reproduction suite
==================
Runs every published figure the models are expected to reproduce and
every standing property check, returning a pass/fail table.  The
``all`` subcommand prints it and exits non-zero if any row fails.
"""

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from collection import RiverSite, expected_yield, observed_vs_expected
from config import (
    RIVER_DEFAULTS, STABILITY_DEFAULTS, LAKE_PRESETS, PUBLISHED_COLLECTION_RATE, PRINTED_PARTICLE_VOLUME_MM3,
    AVOIDANCE_CURRENT_LIMIT,
    PRINTED_THROUGHPUT_M3S, PRINTED_HOURLY_VOLUME_M3
)
from depletion import (
    LakeScenario, CostModel, simulate_depletion, calibrate_influx, geometric_decay,
    campaign_cost, bom_total, bom_mismatch_note, DAYS_PER_YEAR
)
from energy import (
    PowerPlant, IrradianceProfile, recharge_time, first_iteration_runtime, simulate_soc
)
from errors import ModelError
from guidance import (
    LakeWorld, AgentState, SensorModel, RangeFilter, VesselDynamics, GuidanceSettings, PiecewiseField,
    run_mission, run_fleet, build_mission, MAX_SPEED
)
from stability import (
    ForceCurve, MassBudget, water_force, trawl_torque, ballast_for_angle, equilibrium_angle,
    ballast_for_center_of_mass, buoyancy_margin
)
from trawl_model import TrawlSpec, ParticleSpec, trawl_volume, particle_capacity, fill_time

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

RESULT_COLUMNS = ['criterion', 'check', 'value', 'expected', 'status']


@dataclass
class CheckResult:
    criterion: int
    check: str
    value: str
    expected: str
    passed: bool

    def to_row(self):
        return {
            'criterion': self.criterion,
            'check': self.check,
            'value': self.value,
            'expected': self.expected,
            'status': 'PASS' if self.passed else 'FAIL',
        }


def _within(value: float, low: float, high: float) -> bool:
    return low <= value <= high


def check_capacity() -> List[CheckResult]:
    volume = trawl_volume(TrawlSpec())
    paper = particle_capacity(volume, rounding='paper')
    exact = particle_capacity(volume, rounding='exact')
    particle = ParticleSpec().rounded_volume_mm3('paper')
    return [
        CheckResult(1, 'rounded particle volume', f"{particle} mm^3", f"{PRINTED_PARTICLE_VOLUME_MM3} mm^3",
                    particle == PRINTED_PARTICLE_VOLUME_MM3),
        CheckResult(1, 'capacity paper mode', str(paper), '3816793', paper == 3816793),
        CheckResult(1, 'capacity exact mode', str(exact), '[3819700, 3819740]', _within(exact, 3819700, 3819740)),
    ]


def check_fill_time() -> List[CheckResult]:
    days = fill_time(3816793, PUBLISHED_COLLECTION_RATE)
    return [CheckResult(2, 'fill time at 220/h', f"{days:.2f} d", '722.9 d +/-0.1%',
                        abs(days - 722.9) <= 0.001 * 722.9)]


def check_ballast() -> List[CheckResult]:
    curve = ForceCurve()
    mass = ballast_for_angle(curve, STABILITY_DEFAULTS['target_angle'])
    back = equilibrium_angle(curve, mass)
    return [
        CheckResult(3, 'ballast at 80 deg', f"{mass:.4f} kg", '[6.9, 7.4] kg', _within(mass, 6.9, 7.4)),
        CheckResult(3, 'equilibrium round trip', f"{back:.6f} deg", '80 +/-0.01 deg', abs(back - 80.0) < 0.01),
    ]


def check_torque() -> List[CheckResult]:
    curve = ForceCurve()
    torque = trawl_torque(curve, 90.0)
    force = water_force(curve, 90.0)
    return [
        CheckResult(4, 'torque at 90 deg', f"{torque:.3f} N*m", '[210, 220] N*m', _within(torque, 210, 220)),
        CheckResult(4, 'force at 90 deg', f"{force:.3f} N", '[855, 870] N', _within(force, 855, 870)),
    ]


def check_center_of_mass() -> List[CheckResult]:
    mass = ballast_for_center_of_mass(-0.25, 10.0, 0.1, -0.5)
    return [CheckResult(5, 'center-of-mass ballast', f"{mass:.9g} kg", '14 kg', abs(mass - 14.0) < 1e-9)]


def check_buoyancy() -> List[CheckResult]:
    paper = buoyancy_margin(MassBudget())
    measured = buoyancy_margin(MassBudget(displacement_mode='from_circumference'))
    return [
        CheckResult(6, 'buoyancy margin paper constant', f"{paper:.6f} kg", '52.92 kg', abs(paper - 52.92) < 1e-9),
        CheckResult(6, 'buoyancy margin from circumference', f"{measured:.4f} kg", '[52.4, 52.7] kg',
                    _within(measured, 52.4, 52.7)),
    ]


def check_yield() -> List[CheckResult]:
    estimate = expected_yield(RiverSite(), rounding='paper')
    comparison = observed_vs_expected(RIVER_DEFAULTS['observed'], estimate.expected)
    band_ok = abs(estimate.band_lo - 3122) <= 1 and abs(estimate.band_hi - 3816) <= 1
    return [
        CheckResult(7, 'rounded throughput', f"{estimate.throughput_m3s} m^3/s", f"{PRINTED_THROUGHPUT_M3S} m^3/s",
                    estimate.throughput_m3s == PRINTED_THROUGHPUT_M3S),
        CheckResult(7, 'rounded hourly volume', f"{estimate.volume_m3} m^3", f"{PRINTED_HOURLY_VOLUME_M3} m^3",
                    estimate.volume_m3 == PRINTED_HOURLY_VOLUME_M3),
        CheckResult(7, 'expected yield paper mode', str(estimate.expected), '3469', estimate.expected == 3469),
        CheckResult(7, 'expectation band', f"[{estimate.band_lo}, {estimate.band_hi}]", '[3122, 3816] +/-1', band_ok),
        CheckResult(7, 'observed / expected', f"{comparison['ratio']:.4f}", '[1.27, 1.28]',
                    _within(comparison['ratio'], 1.27, 1.28)),
        CheckResult(7, 'observed range', str(list(comparison['observed_range'])), '[3550, 5326]',
                    comparison['observed_range'] == (3550, 5326)),
    ]


def check_depletion() -> List[CheckResult]:
    erie = LAKE_PRESETS['erie']
    weekly = LakeScenario.from_config({'preset': 'erie'})
    influx = calibrate_influx(weekly, erie['target_trawls'])
    weekly_trace = simulate_depletion(replace(weekly, daily_influx=influx))
    daily_trace = simulate_depletion(replace(weekly, daily_influx=influx, deployment_interval=1))
    daily_target = erie['daily_target_trawls']

    tiny = LakeScenario(surface_area=1.0, fixed_trawls=3, horizon=400)
    tiny_trace = simulate_depletion(tiny)
    oracle = np.array([geometric_decay(tiny, day + 1) for day in tiny_trace.records['day']])
    geometric_error = float(np.max(np.abs(tiny_trace.records['particles'].to_numpy() - oracle) /
                                   np.maximum(oracle, 1e-300)))

    records = weekly_trace.records
    before = np.concatenate([[weekly_trace.initial_particles], records['particles'].to_numpy()[:-1]])
    balance = records['particles'].to_numpy() - before - (records['influx'].to_numpy() - records['removed'].to_numpy())
    balance_error = float(np.max(np.abs(balance) / np.maximum(before, 1.0)))

    return [
        CheckResult(8, 'weekly calibration', f"{weekly_trace.trawl_count} trawls, influx {influx:.6g}/day",
                    '802 +/-1', abs(weekly_trace.trawl_count - erie['target_trawls']) <= 1),
        CheckResult(8, 'daily deployment cross-check', f"{daily_trace.trawl_count} trawls",
                    f"{daily_target} +/-25%", abs(daily_trace.trawl_count - daily_target) <= 0.25 * daily_target),
        CheckResult(8, 'weekly duration', f"{weekly_trace.stop_day / DAYS_PER_YEAR:.2f} yr", '15 yr +/-25%',
                    abs(weekly_trace.stop_day / DAYS_PER_YEAR - erie['target_years']) <= 0.25 * erie['target_years']),
        CheckResult(8, 'geometric-decay oracle', f"{geometric_error:.2e}", '<= 1e-9', geometric_error <= 1e-9),
        CheckResult(8, 'mass balance', f"{balance_error:.2e}", '<= 1e-6', balance_error <= 1e-6),
    ]


def check_cost() -> List[CheckResult]:
    cost = CostModel()
    weekly = campaign_cost(802, cost)
    daily = campaign_cost(2381, cost)
    total = bom_total(CostModel())
    note = bom_mismatch_note(total)
    return [
        CheckResult(9, 'weekly campaign cost', f"${weekly:,.0f}", '$810,000 +/-$100', abs(weekly - 810000) <= 100),
        CheckResult(9, 'daily campaign cost', f"${daily:,.0f}", '$2.4M +/-1%', abs(daily - 2.4e6) <= 0.01 * 2.4e6),
        CheckResult(9, 'itemized bill of materials', f"${total:,.0f}", '$1,167 with mismatch note',
                    total == 1167 and note is not None),
    ]


def check_energy() -> List[CheckResult]:
    plant = PowerPlant()
    irradiance = IrradianceProfile()
    hours = recharge_time(plant, irradiance)
    runtime = first_iteration_runtime()
    series = simulate_soc(plant, irradiance, days=4)
    soc = series.records['soc_wh'].to_numpy()
    steps = len(soc) // 4
    periodic = float(np.max(np.abs(soc[2 * steps:3 * steps] - soc[3 * steps:4 * steps])))
    return [
        CheckResult(10, 'recharge time', f"{hours:.3f} h", '<= 4.0 peak sun hours', hours <= 4.0),
        CheckResult(10, 'first-iteration runtime', f"{runtime:.4f} h", '1.25 h +/-1%', abs(runtime - 1.25) <= 0.0125),
        CheckResult(10, 'diel periodicity', f"{periodic:.2e} Wh", '0 after day 2', periodic <= 1e-9),
    ]


def _filter_oracle(rng: np.random.Generator, sequences: int = 10000, window: int = 5) -> float:
    worst = 0.0
    for _ in range(sequences):
        length = int(rng.integers(1, 20))
        values = rng.uniform(0.1, 50.0, length)
        dropouts = rng.random(length) < 0.2
        f = RangeFilter(window=window)
        valid: List[float] = []
        expected: Optional[float] = None
        for value, dropped in zip(values.tolist(), dropouts.tolist()):
            got = f.update(None if dropped else value)
            if not dropped:
                valid.append(value)
                expected = sum(valid[-window:]) / len(valid[-window:])
            if expected is None:
                if got is not None:
                    return float('inf')
            else:
                worst = max(worst, abs(got - expected))
    return worst


def convex_lake_collisions(missions: int = 100, steps: int = 10000, dt: float = 0.1,
                           current: Tuple[float, float] = (0.0, 0.0)) -> int:
    """Collisions summed over seeded missions in the default rectangular lake.

    Mission ``i`` starts from ``random_start(seed=i)`` with sensor seed ``i``;
    all of them run together as one fleet.
    """
    world, _, _, _, settings = build_mission({'current': list(current)})
    agents, sensors = [], []
    for seed in range(missions):
        start, heading = world.random_start(seed=seed)
        agents.append(AgentState(position=start, heading=heading, filter=RangeFilter()))
        sensors.append(SensorModel(seed=seed))
    results = run_fleet(world, agents, steps * dt, dt, sensors=sensors, settings=settings, record=False)
    return sum(result.collisions for result in results)


def straight_sweep(concentration: float = 0.104, duration: float = 3600.0, dt: float = 0.5):
    """Collected particles vs the analytic sweep for an unobstructed straight run."""
    world = LakeWorld.rectangle(10000.0, 1000.0, concentration_field=PiecewiseField.uniform(concentration))
    agent = AgentState(position=(100.0, 500.0), heading=0.0)
    result = run_mission(world, agent, duration, dt, record=False)
    analytic = concentration * VesselDynamics().mouth_area * MAX_SPEED * duration
    return result.collected, analytic


def seeded_replay(seed: int, duration: float = 120.0, dt: float = 0.1) -> pd.DataFrame:
    world, agent, sensor, dynamics, settings = build_mission(seed=seed)
    return run_mission(world, agent, duration, dt, sensor, dynamics, settings).trajectory


LIMIT_CURRENT = (0.6 * AVOIDANCE_CURRENT_LIMIT, 0.8 * AVOIDANCE_CURRENT_LIMIT)


def _threshold_bound(current_speed: float, dt: float = 0.1) -> float:
    return 2 * (MAX_SPEED + current_speed) * dt * RangeFilter().window


def check_guidance(missions: int = 100, current_missions: int = 20) -> List[CheckResult]:
    filter_error = _filter_oracle(np.random.default_rng(0))
    threshold = GuidanceSettings().threshold
    still = convex_lake_collisions(missions)
    drifting = convex_lake_collisions(current_missions, current=LIMIT_CURRENT)
    collected, analytic = straight_sweep()
    sweep_error = abs(collected - analytic) / analytic

    replay = seeded_replay(7).equals(seeded_replay(7))
    return [
        CheckResult(11, 'filter vs brute-force mean', f"{filter_error:.2e}", '<= 1e-9', filter_error <= 1e-9),
        CheckResult(11, f'collisions in {missions} missions, still water', str(still),
                    f"0 (threshold {threshold} >= {_threshold_bound(0.0):.3f})",
                    still == 0 and threshold >= _threshold_bound(0.0)),
        CheckResult(11, f'collisions in {current_missions} missions, {AVOIDANCE_CURRENT_LIMIT} m/s current',
                    str(drifting), f"0 (threshold {threshold} >= {_threshold_bound(AVOIDANCE_CURRENT_LIMIT):.3f})",
                    drifting == 0 and threshold >= _threshold_bound(AVOIDANCE_CURRENT_LIMIT)),
        CheckResult(11, 'uniform sweep collection', f"{sweep_error:.4%}", '<= 1%', sweep_error <= 0.01),
        CheckResult(11, 'seeded replay', str(replay), 'True', replay),
    ]


CHECKS: List[Callable[[], List[CheckResult]]] = [
    check_capacity, check_fill_time, check_ballast, check_torque, check_center_of_mass,
    check_buoyancy, check_yield, check_depletion, check_cost, check_energy, check_guidance,
]


def run_reproduction_suite(checks: Optional[List[Callable[[], List[CheckResult]]]] = None) -> pd.DataFrame:
    """Run ``checks`` (all by default) and return the pass/fail table.

    A check that raises a model error is reported as a failed row rather
    than aborting the suite.
    """
    rows = []
    for index, check in enumerate(checks or CHECKS, start=1):
        try:
            results = check()
        except ModelError as e:
            logger.warning(f"reproduction check {check.__name__} raised: {e.qualified()}")
            results = [CheckResult(index, check.__name__, e.qualified(), 'no error', False)]
        for result in results:
            logger.debug(f"{result.check}: {result.value} ({'PASS' if result.passed else 'FAIL'})")
            rows.append(result.to_row())
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def format_table(table: pd.DataFrame) -> str:
    return table.to_string(index=False)
