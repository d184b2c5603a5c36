"""
Solar / battery energy budget
=============================
Battery state of charge over the diel cycle for a trawl that charges
during the day and trawls at night.  The load is a constant-power draw
(no voltage sag) and irradiance is an abstract profile whose daily
energy always equals ``panel_rating * peak_sun_hours``.

Windows are given in hours of the day and may wrap past midnight
(the default night shift runs 18:00-06:00).  Simulations start at
midnight.
"""

from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Tuple
import math
import logging

import pandas as pd

from config import (
    POWER_DEFAULTS, FIRST_ITERATION_BATTERY, UPGRADED_BATTERY_MAH, get_peak_sun_hours
)
from errors import DomainError, WindowOverlapError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

SHAPES = ('flat_window', 'half_sine')
SOC_COLUMNS = ['minute', 'soc_wh', 'mode', 'input_wh', 'output_wh', 'spilled_wh', 'unserved_wh']
MINUTES_PER_DAY = 24 * 60

_PLANT_FIELDS = ('battery_capacity', 'panel_rating', 'charge_efficiency', 'load_draw',
                 'operate_hours', 'charge_window', 'charge_start', 'operate_start',
                 'initial_soc_fraction')


@dataclass(frozen=True)
class PowerPlant:
    battery_capacity: float = POWER_DEFAULTS['battery_capacity']   # Wh
    panel_rating: float = POWER_DEFAULTS['panel_rating']           # W
    charge_efficiency: float = POWER_DEFAULTS['charge_efficiency']
    load_draw: float = POWER_DEFAULTS['load_draw']                 # W
    operate_hours: float = POWER_DEFAULTS['operate_hours']
    charge_window: float = POWER_DEFAULTS['charge_window']
    charge_start: float = POWER_DEFAULTS['charge_start']
    operate_start: float = POWER_DEFAULTS['operate_start']
    initial_soc_fraction: float = POWER_DEFAULTS['initial_soc_fraction']

    def __post_init__(self):
        for name in ('battery_capacity', 'panel_rating', 'load_draw'):
            if getattr(self, name) < 0:
                raise DomainError(f"PowerPlant.{name} must be non-negative", module='energy')
        if not 0 < self.charge_efficiency <= 1:
            raise DomainError(f"charge_efficiency must be in (0, 1], got {self.charge_efficiency}",
                              module='energy')
        for name in ('operate_hours', 'charge_window'):
            if not 0 <= getattr(self, name) <= 24:
                raise DomainError(f"PowerPlant.{name} must be within [0, 24] hours", module='energy')
        for name in ('charge_start', 'operate_start'):
            if not 0 <= getattr(self, name) < 24:
                raise DomainError(f"PowerPlant.{name} must be an hour of the day in [0, 24)", module='energy')
        if not 0 <= self.initial_soc_fraction <= 1:
            raise DomainError("initial_soc_fraction must be in [0, 1]", module='energy')

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'PowerPlant':
        merged = {k: POWER_DEFAULTS[k] for k in _PLANT_FIELDS}
        merged.update({k: v for k, v in (values or {}).items() if k in merged})
        return cls(**merged)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class IrradianceProfile:
    peak_sun_hours: float = POWER_DEFAULTS['peak_sun_hours']
    shape: str = POWER_DEFAULTS['shape']

    def __post_init__(self):
        if self.peak_sun_hours < 0:
            raise DomainError("peak_sun_hours must be non-negative", module='energy')
        if self.shape not in SHAPES:
            raise DomainError(f"Irradiance shape must be one of {SHAPES}, got '{self.shape}'", module='energy')

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'IrradianceProfile':
        values = values or {}
        hours = values.get('peak_sun_hours')
        if hours is None:
            preset = values.get('preset')
            hours = get_peak_sun_hours(preset) if preset else POWER_DEFAULTS['peak_sun_hours']
        return cls(peak_sun_hours=float(hours), shape=values.get('shape', POWER_DEFAULTS['shape']))


@dataclass
class SocSeries:
    records: pd.DataFrame
    initial_soc: float
    capacity: float

    @property
    def spilled_wh(self) -> float:
        return float(self.records['spilled_wh'].sum())

    @property
    def unserved_wh(self) -> float:
        return float(self.records['unserved_wh'].sum())

    def empty_day(self) -> Optional[int]:
        """First day (1-based) on which the battery runs flat, if it does."""
        flat = self.records[self.records['unserved_wh'] > 0]
        if flat.empty:
            return None
        return int(flat['minute'].iloc[0] // MINUTES_PER_DAY) + 1


def window_segments(start: float, length: float) -> List[Tuple[float, float, float]]:
    """Split a daily window into ``(from, to, phase_offset)`` pieces inside [0, 24] hours.

    ``phase_offset`` is the window time already elapsed at ``from``, so a
    wrapped window keeps a continuous phase across midnight.
    """
    if length <= 0:
        return []
    if length >= 24:
        return [(start, 24.0, 0.0), (0.0, start, 24.0 - start)] if start > 0 else [(0.0, 24.0, 0.0)]
    end = start + length
    if end <= 24:
        return [(start, end, 0.0)]
    return [(start, 24.0, 0.0), (0.0, end - 24.0, 24.0 - start)]


def _overlap(h0: float, h1: float, segments) -> List[Tuple[float, float]]:
    """Window phases ``(a, b)`` covered by the hour-of-day interval [h0, h1)."""
    phases = []
    for lo, hi, offset in segments:
        a, b = max(h0, lo), min(h1, hi)
        if b > a:
            phases.append((a - lo + offset, b - lo + offset))
    return phases


def check_windows(p: PowerPlant) -> None:
    """Raise :class:`WindowOverlapError` if charging and operating overlap."""
    charge = window_segments(p.charge_start, p.charge_window)
    operate = window_segments(p.operate_start, p.operate_hours)
    for c_lo, c_hi, _ in charge:
        for o_lo, o_hi, _ in operate:
            if max(c_lo, o_lo) < min(c_hi, o_hi):
                raise WindowOverlapError(
                    f"Charge window {p.charge_start:g}h+{p.charge_window:g}h overlaps "
                    f"operating window {p.operate_start:g}h+{p.operate_hours:g}h"
                )


def _window_energy(p: PowerPlant, irr: IrradianceProfile, a: float, b: float) -> float:
    """Panel energy (Wh, before efficiency) delivered between window phases a and b hours."""
    daily = p.panel_rating * irr.peak_sun_hours
    width = p.charge_window
    if irr.shape == 'flat_window':
        return daily * (b - a) / width
    # half-sine with peak daily*pi/(2W); integrates to exactly `daily` over the window
    return daily / 2.0 * (math.cos(math.pi * a / width) - math.cos(math.pi * b / width))


def recharge_time(p: PowerPlant, irr: Optional[IrradianceProfile] = None) -> float:
    """Peak sun hours needed to charge the battery from empty.

    Args:
        p: Power plant.
        irr: Optional site profile; a warning is logged when the recharge
            does not fit in its daily peak sun hours.
    """
    if p.panel_rating <= 0:
        raise DomainError("Panel rating must be positive to recharge", module='energy')
    hours = p.battery_capacity / (p.panel_rating * p.charge_efficiency)
    if irr is not None and hours > irr.peak_sun_hours:
        logger.warning(
            f"recharge_time: {hours:.2f} h exceeds the site's {irr.peak_sun_hours:g} peak sun hours"
        )
    return hours


def runtime_to_cutoff(capacity_wh: float, load_w: float) -> float:
    """Hours a full battery of ``capacity_wh`` runs a constant ``load_w`` load."""
    if load_w <= 0:
        raise DomainError(f"Load must be positive, got {load_w}", module='energy')
    if capacity_wh < 0:
        raise DomainError("Capacity must be non-negative", module='energy')
    return capacity_wh / load_w


def battery_capacity_wh(capacity_mah: float, voltage: float) -> float:
    return capacity_mah / 1000.0 * voltage


def first_iteration_runtime(load_w: float = POWER_DEFAULTS['load_draw']) -> float:
    """Runtime of the original 1,300 mAh pack."""
    capacity = battery_capacity_wh(FIRST_ITERATION_BATTERY['capacity_mah'], FIRST_ITERATION_BATTERY['voltage'])
    return runtime_to_cutoff(capacity, load_w)


def battery_upgrade_factor(old_mah: float = FIRST_ITERATION_BATTERY['capacity_mah'],
                           new_mah: float = UPGRADED_BATTERY_MAH) -> float:
    if old_mah <= 0 or new_mah < 0:
        raise DomainError("Battery capacities must be positive", module='energy')
    return new_mah / old_mah


def daily_energy_balance(p: PowerPlant, irr: IrradianceProfile) -> Dict[str, float]:
    """Generation, stored energy and consumption over one day (Wh)."""
    generated = p.panel_rating * irr.peak_sun_hours
    stored = generated * p.charge_efficiency
    consumed = p.load_draw * p.operate_hours
    return {
        'generated_wh': generated,
        'stored_wh': stored,
        'consumed_wh': consumed,
        'net_wh': stored - consumed,
    }


def simulate_soc(p: PowerPlant, irr: IrradianceProfile,
                 days: int = POWER_DEFAULTS['days'],
                 step: float = POWER_DEFAULTS['step_minutes']) -> SocSeries:
    """Step the battery through ``days`` full days from midnight.

    Each row covers one step and holds the state at its end (``minute``).
    Energy that cannot be stored at full charge is ``spilled_wh``; load
    that cannot be met at zero charge is ``unserved_wh``, so for every row
    ``soc - previous = input - output - spilled + unserved``.

    Raises:
        DomainError: If ``step`` does not divide the day.
        WindowOverlapError: If charging and operating windows overlap.
    """
    if step <= 0 or abs(MINUTES_PER_DAY / step - round(MINUTES_PER_DAY / step)) > 1e-9:
        raise DomainError(f"Step of {step} min does not divide 24 h", module='energy')
    if int(days) != days or days < 1:
        raise DomainError("days must be a whole number >= 1", module='energy')
    check_windows(p)
    if p.charge_window == 0 and irr.peak_sun_hours > 0:
        raise DomainError("A zero-length charge window cannot deliver peak sun hours", module='energy')

    charge = window_segments(p.charge_start, p.charge_window)
    operate = window_segments(p.operate_start, p.operate_hours)
    steps_per_day = int(round(MINUTES_PER_DAY / step))
    step_hours = step / 60.0
    capacity = p.battery_capacity
    soc = p.initial_soc_fraction * capacity
    initial = soc
    columns = {name: [] for name in SOC_COLUMNS}

    for k in range(int(days) * steps_per_day):
        h0 = (k % steps_per_day) * step_hours
        h1 = h0 + step_hours
        charge_phases = _overlap(h0, h1, charge)
        operate_phases = _overlap(h0, h1, operate)

        gained = sum(_window_energy(p, irr, a, b) for a, b in charge_phases) * p.charge_efficiency
        used = p.load_draw * sum(b - a for a, b in operate_phases)

        soc += gained
        spilled = max(soc - capacity, 0.0)
        soc -= spilled
        soc -= used
        unserved = max(-soc, 0.0)
        soc += unserved

        if charge_phases:
            mode = 'charge'
        elif operate_phases:
            mode = 'operate'
        else:
            mode = 'idle'
        columns['minute'].append((k + 1) * step)
        columns['soc_wh'].append(soc)
        columns['mode'].append(mode)
        columns['input_wh'].append(gained)
        columns['output_wh'].append(used)
        columns['spilled_wh'].append(spilled)
        columns['unserved_wh'].append(unserved)

    series = SocSeries(records=pd.DataFrame(columns, columns=SOC_COLUMNS), initial_soc=initial, capacity=capacity)
    logger.debug(
        f"simulate_soc: {days} days at {step:g} min, spilled {series.spilled_wh:.2f} Wh, "
        f"unserved {series.unserved_wh:.2f} Wh"
    )
    return series
