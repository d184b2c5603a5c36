"""
Command-line front end for the trawl simulator
==============================================
``python cli.py <subcommand> [--config scenario.json] [--out DIR]
[--seed N] [--mode paper|exact] [--verbose]``

Every subcommand writes ``<subcommand>.csv``, ``<subcommand>.summary.txt``
and the resolved scenario ``<subcommand>.config.json`` into ``--out``.

Exit codes: 0 success, 1 model error (or a failing reproduction check
under ``all``), 2 configuration error.
"""

from dataclasses import replace
from typing import Callable, Dict, List, Optional, Tuple
import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd

from collection import RiverSite, expected_yield, observed_vs_expected
from config import (
    CONCENTRATION_PRESETS, LAKE_DEFAULTS, TRAWL_DEFAULTS, FIRST_ITERATION_BATTERY, VALIDATION_RULES
)
from data_handlers import (
    load_scenario, resolve_scenario, write_csv, write_summary, save_resolved_config, format_value
)
from depletion import (
    LakeScenario, CostModel, simulate_depletion, calibrate_influx, summarize_trace,
    bom_mismatch_note
)
from energy import (
    PowerPlant, IrradianceProfile, simulate_soc, recharge_time, runtime_to_cutoff,
    first_iteration_runtime, battery_upgrade_factor, daily_energy_balance
)
from errors import ConfigError, ModelError
from guidance import build_mission, run_mission
from reproduction_checks import run_reproduction_suite, format_table
from stability import (
    ForceCurve, MassBudget, water_force, trawl_torque, ballast_for_angle, equilibrium_angle,
    ballast_for_center_of_mass, buoyancy_margin, bird_landing_margin, monotone_segments
)
from trawl_model import (
    TrawlSpec, ParticleSpec, trawl_volume, particle_capacity, fill_time, design_throughput,
    collection_rate
)

logger = logging.getLogger(__name__)

Outcome = Tuple[pd.DataFrame, Dict]


def run_capacity(cfg: Dict, mode: str) -> Outcome:
    section = cfg['trawl']
    spec = TrawlSpec.from_config({k: section[k] for k in TRAWL_DEFAULTS})
    particle = ParticleSpec(section['particle_diameter'])
    volume = trawl_volume(spec)
    capacity = particle_capacity(volume, particle, rounding=mode)
    duty = section['duty_hours']
    throughput = design_throughput(spec)

    rows = [{'scenario': 'measured_rate', 'concentration': float('nan'),
             'rate_per_hour': section['collection_rate'], 'duty_hours': duty,
             'fill_days': fill_time(capacity, section['collection_rate'], duty)}]
    for name, concentration in CONCENTRATION_PRESETS.items():
        rate = collection_rate(concentration, throughput)
        rows.append({'scenario': name, 'concentration': concentration, 'rate_per_hour': rate,
                     'duty_hours': duty, 'fill_days': fill_time(capacity, rate, duty)})
    table = pd.DataFrame(rows)

    fill_days = rows[0]['fill_days']
    summary = {
        'mode': mode,
        'trawl_volume_m3': volume,
        'particle_volume_mm3': particle.rounded_volume_mm3(mode),
        'capacity_particles': capacity,
        'collection_rate_per_hour': float(section['collection_rate']),
        'fill_days': fill_days,
        'fill_years': fill_days / 365.0,
        'design_throughput_m3_per_hour': throughput,
    }
    return table, summary


def run_ballast(cfg: Dict, mode: str) -> Outcome:
    section = cfg['stability']
    curve = ForceCurve.from_config(section)
    lever, g = section['lever_arm'], section['gravity']
    ballast = ballast_for_angle(curve, section['target_angle'], lever, g)
    equilibrium = equilibrium_angle(curve, ballast, lever, g)

    lo, hi = curve.valid_domain
    angles = np.append(np.arange(lo, hi, 5.0), hi)
    table = pd.DataFrame({
        'angle_deg': angles,
        'force_n': [water_force(curve, a) for a in angles],
        'torque_nm': [trawl_torque(curve, a, lever) for a in angles],
        'ballast_kg': [ballast_for_angle(curve, a, lever, g) for a in angles],
    })

    budget_kwargs = dict(misc=section['misc_mass'], per_buoy_displacement=section['per_buoy_displacement'],
                         displacement_mode=section['displacement_mode'])
    budget = MassBudget(**budget_kwargs)
    increasing = [f"{a:.2f}-{b:.2f}" for a, b, kind in monotone_segments(curve) if kind == 'increasing']
    summary = {
        'target_angle_deg': float(section['target_angle']),
        'ballast_kg': ballast,
        'equilibrium_angle_deg': equilibrium,
        'force_at_max_angle_n': water_force(curve, hi),
        'torque_at_max_angle_nm': trawl_torque(curve, hi, lever),
        'increasing_segments_deg': increasing,
        'center_of_mass_ballast_kg': ballast_for_center_of_mass(
            section['target_cm'], section['body_mass'], section['body_cm'], section['ballast_depth']),
        'total_mass_kg': budget.total_mass,
        'buoyancy_margin_kg': buoyancy_margin(budget),
        'bird_landing_margin_kg': bird_landing_margin(budget, section['bird_mass']),
    }
    return table, summary


def run_yield(cfg: Dict, mode: str) -> Outcome:
    section = cfg['river']
    site = RiverSite.from_config(section)
    estimate = expected_yield(site, mouth_area=section['mouth_area'], duration=section['duration'],
                              rounding=mode, band_fraction=section['band_fraction'], divisor=section['divisor'])
    comparison = observed_vs_expected(section['observed'], estimate.expected, section['visual_error'])
    row = estimate.to_row()
    row.update({
        'observed': section['observed'],
        'ratio': comparison['ratio'],
        'observed_lo': comparison['observed_range'][0],
        'observed_hi': comparison['observed_range'][1],
    })
    summary = {'mode': mode, 'divisor': section['divisor']}
    summary.update(row)
    return pd.DataFrame([row]), summary


def run_deplete(cfg: Dict, mode: str) -> Outcome:
    section = cfg['lake']
    scenario = LakeScenario(**{k: section[k] for k in LAKE_DEFAULTS})
    target = section['target_trawls']
    if target is not None:
        interval = section['calibration_interval'] or scenario.deployment_interval
        influx = calibrate_influx(replace(scenario, deployment_interval=interval), int(target))
        scenario = replace(scenario, daily_influx=influx)
    trace = simulate_depletion(scenario)

    cost = CostModel.from_config(cfg['cost'])
    summary = {'preset': section['preset'], 'calibration_target_trawls': target}
    summary.update(summarize_trace(trace, cost))
    summary['unit_cost_usd'] = cost.unit_total
    note = bom_mismatch_note(float(sum(cost.items.values())), cost.items)
    if note:
        summary['bill_of_materials_note'] = note
    return trace.records, summary


def run_energy(cfg: Dict, mode: str) -> Outcome:
    section = cfg['power']
    plant = PowerPlant.from_config(section)
    irradiance = IrradianceProfile.from_config(section)
    series = simulate_soc(plant, irradiance, days=section['days'], step=section['step_minutes'])
    soc = series.records['soc_wh']
    summary = {
        'peak_sun_hours': irradiance.peak_sun_hours,
        'shape': irradiance.shape,
        'recharge_time_h': recharge_time(plant, irradiance) if plant.panel_rating > 0 else float('inf'),
        'runtime_full_battery_h': runtime_to_cutoff(plant.battery_capacity, plant.load_draw)
        if plant.load_draw > 0 else float('inf'),
        'first_iteration_runtime_h': first_iteration_runtime(plant.load_draw) if plant.load_draw > 0 else float('inf'),
        'battery_upgrade_factor': battery_upgrade_factor(FIRST_ITERATION_BATTERY['capacity_mah']),
        'min_soc_wh': float(soc.min()),
        'final_soc_wh': float(soc.iloc[-1]),
        'spilled_wh': series.spilled_wh,
        'unserved_wh': series.unserved_wh,
        'empty_day': series.empty_day(),
    }
    summary.update(daily_energy_balance(plant, irradiance))
    return series.records, summary


def run_navigate(cfg: Dict, mode: str) -> Outcome:
    section = cfg['mission']
    world, agent, sensor, dynamics, settings = build_mission(section)
    result = run_mission(world, agent, section['duration'], section['dt'], sensor, dynamics, settings)
    summary = {'seed': section['seed']}
    summary.update(result.summary())
    return result.trajectory, summary


def run_all(cfg: Dict, mode: str) -> Outcome:
    table = run_reproduction_suite()
    print(format_table(table))
    passed = int((table['status'] == 'PASS').sum())
    return table, {'checks': len(table), 'passed': passed, 'failed': len(table) - passed}


RUNNERS: Dict[str, Callable[[Dict, str], Outcome]] = {
    'capacity': run_capacity,
    'ballast': run_ballast,
    'yield': run_yield,
    'deplete': run_deplete,
    'energy': run_energy,
    'navigate': run_navigate,
    'all': run_all,
}


def run(subcommand: str, config_path: Optional[str] = None, out_dir: str = '.',
        seed: Optional[int] = None, mode: str = 'paper') -> int:
    """Resolve the scenario, run one subcommand and write its outputs.

    Returns:
        Process exit code (0, 1 or 2).
    """
    if subcommand not in RUNNERS:
        print(f"config error: unknown subcommand '{subcommand}'", file=sys.stderr)
        return 2
    try:
        resolved = resolve_scenario(load_scenario(config_path), seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        table, summary = RUNNERS[subcommand](resolved, mode)
    except ModelError as e:
        print(f"error: {e.qualified()}", file=sys.stderr)
        return 1

    os.makedirs(out_dir, exist_ok=True)
    write_csv(table, os.path.join(out_dir, f"{subcommand}.csv"))
    write_summary(summary, os.path.join(out_dir, f"{subcommand}.summary.txt"))
    save_resolved_config(resolved, os.path.join(out_dir, f"{subcommand}.config.json"))
    logger.info(f"{subcommand}: outputs written to {out_dir}")

    if subcommand == 'all':
        return 0 if summary['failed'] == 0 else 1
    for key, value in summary.items():
        print(f"{key}: {format_value(value)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Manta trawl design and deployment simulator")
    parser.add_argument('subcommand', choices=VALIDATION_RULES['subcommands'])
    parser.add_argument('--config', default=None, help="Scenario JSON file (defaults used when omitted)")
    parser.add_argument('--out', default='output', help="Directory for CSV, summary and config echo")
    parser.add_argument('--seed', type=int, default=None, help="Seed for the guidance simulation")
    parser.add_argument('--mode', choices=VALIDATION_RULES['modes'], default='paper',
                        help="Rounding mode for capacity and yield")
    parser.add_argument('--verbose', action='store_true', help="Log at DEBUG level")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    return run(args.subcommand, args.config, args.out, args.seed, args.mode)


if __name__ == '__main__':
    sys.exit(main())
