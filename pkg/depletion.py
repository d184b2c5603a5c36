"""
Lake-scale microplastic depletion under trawl deployment schedules
==================================================================

The lake surface layer is treated as one well-mixed box of
``surface_area * effective_depth`` (optionally shrunk to the hot-spot
``area_fraction`` while holding the whole initial load).  Each day:

1. ``C(t) = P(t) / V``
2. ``removal = N(t) * throughput * duty * C(t)``, capped at ``P(t)``
3. ``P(t+1) = P(t) - removal + influx``

A new trawl joins the fleet every ``deployment_interval`` days starting
on day 0, unless ``fixed_trawls`` pins the fleet size.  The run stops
when ``P <= stop_fraction * P(0)`` or the horizon is reached.

The published lake runs report their outputs (802 weekly trawls, 2,381
daily trawls, ~15 years) but never the influx, so
:func:`calibrate_influx` recovers an influx that reproduces one of them.
"""

from dataclasses import dataclass, field, replace, asdict
from typing import Dict, List, Optional, Tuple
import logging

import pandas as pd
from scipy.optimize import bisect

from config import (
    LAKE_DEFAULTS, BILL_OF_MATERIALS, COST_DEFAULTS, PRINTED_UNIT_TOTAL, get_lake_preset
)
from errors import CalibrationError, DomainError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

TRACE_COLUMNS = ['day', 'particles', 'concentration', 'trawls', 'removed', 'influx']
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class LakeScenario:
    surface_area: float = LAKE_DEFAULTS['surface_area']               # km^2
    effective_depth: float = LAKE_DEFAULTS['effective_depth']         # m
    initial_concentration: float = LAKE_DEFAULTS['initial_concentration']
    daily_influx: float = LAKE_DEFAULTS['daily_influx']
    deployment_interval: int = LAKE_DEFAULTS['deployment_interval']
    trawl_duty: float = LAKE_DEFAULTS['trawl_duty']
    trawl_throughput: float = LAKE_DEFAULTS['trawl_throughput']       # m^3/h
    horizon: int = LAKE_DEFAULTS['horizon']
    stop_fraction: float = LAKE_DEFAULTS['stop_fraction']
    fixed_trawls: Optional[int] = LAKE_DEFAULTS['fixed_trawls']
    area_fraction: float = LAKE_DEFAULTS['area_fraction']

    def __post_init__(self):
        for name in ('surface_area', 'effective_depth', 'initial_concentration', 'trawl_throughput'):
            if getattr(self, name) <= 0:
                raise DomainError(f"LakeScenario.{name} must be positive, got {getattr(self, name)}",
                                  module='depletion')
        if self.daily_influx < 0:
            raise DomainError("daily_influx must be non-negative", module='depletion')
        if int(self.deployment_interval) != self.deployment_interval or self.deployment_interval < 1:
            raise DomainError("deployment_interval must be a whole number of days >= 1", module='depletion')
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise DomainError("horizon must be a whole number of days >= 1", module='depletion')
        if not 0 < self.trawl_duty <= 24:
            raise DomainError("trawl_duty must be in (0, 24] hours/day", module='depletion')
        if not 0 < self.stop_fraction < 1:
            raise DomainError("stop_fraction must be in (0, 1)", module='depletion')
        if not 0 < self.area_fraction <= 1:
            raise DomainError("area_fraction must be in (0, 1]", module='depletion')
        if self.fixed_trawls is not None and self.fixed_trawls < 0:
            raise DomainError("fixed_trawls must be non-negative", module='depletion')

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'LakeScenario':
        values = dict(values or {})
        preset = values.pop('preset', None)
        merged = get_lake_preset(preset) if preset else dict(LAKE_DEFAULTS)
        merged.update({k: v for k, v in values.items() if k in LAKE_DEFAULTS})
        return cls(**merged)

    @property
    def lake_volume(self) -> float:
        """Volume (m^3) of the whole surface layer."""
        return self.surface_area * 1e6 * self.effective_depth

    @property
    def box_volume(self) -> float:
        """Volume (m^3) of the well-mixed box the particles occupy."""
        return self.lake_volume * self.area_fraction

    @property
    def initial_particles(self) -> float:
        return self.initial_concentration * self.lake_volume

    def trawls_on(self, day: int) -> int:
        if self.fixed_trawls is not None:
            return int(self.fixed_trawls)
        return day // int(self.deployment_interval) + 1

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class DepletionTrace:
    """Per-day records, end-of-day particle counts."""

    records: pd.DataFrame
    initial_particles: float
    converged: bool
    scenario: LakeScenario

    @property
    def stop_day(self) -> int:
        return int(len(self.records))

    @property
    def trawl_count(self) -> int:
        if self.records.empty:
            return 0
        return int(self.records['trawls'].iloc[-1])

    @property
    def years(self) -> float:
        return self.stop_day / DAYS_PER_YEAR

    @property
    def status(self) -> str:
        return 'converged' if self.converged else 'not converged'


@dataclass
class CostModel:
    items: Dict[str, float] = field(default_factory=lambda: dict(BILL_OF_MATERIALS))
    unit_total: float = COST_DEFAULTS['unit_total']
    itemized: bool = COST_DEFAULTS['itemized']
    campaign_multiplier: float = COST_DEFAULTS['campaign_multiplier']

    def __post_init__(self):
        if any(v < 0 for v in self.items.values()):
            raise DomainError("Bill of materials costs must be non-negative", module='depletion')
        if self.itemized:
            self.unit_total = bom_total(self)
        if self.unit_total < 0 or self.campaign_multiplier < 0:
            raise DomainError("Costs must be non-negative", module='depletion')

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'CostModel':
        values = dict(values or {})
        return cls(
            items=dict(values.get('items', BILL_OF_MATERIALS)),
            unit_total=float(values.get('unit_total', COST_DEFAULTS['unit_total'])),
            itemized=bool(values.get('itemized', COST_DEFAULTS['itemized'])),
            campaign_multiplier=float(values.get('campaign_multiplier', COST_DEFAULTS['campaign_multiplier'])),
        )


def _run(s: LakeScenario, keep_records: bool) -> Tuple[Optional[Dict[str, List]], int, int, bool]:
    volume = s.box_volume
    daily_filtered = s.trawl_throughput * s.trawl_duty
    p0 = s.initial_particles
    stop_level = s.stop_fraction * p0
    particles = p0
    columns = {name: [] for name in TRACE_COLUMNS} if keep_records else None
    trawls = 0
    for day in range(int(s.horizon)):
        trawls = s.trawls_on(day)
        concentration = particles / volume
        removed = min(trawls * daily_filtered * concentration, particles)
        particles = particles - removed + s.daily_influx
        if keep_records:
            columns['day'].append(day)
            columns['particles'].append(particles)
            columns['concentration'].append(particles / volume)
            columns['trawls'].append(trawls)
            columns['removed'].append(removed)
            columns['influx'].append(s.daily_influx)
        if particles <= stop_level:
            return columns, day + 1, trawls, True
    return columns, int(s.horizon), trawls, False


def simulate_depletion(s: LakeScenario) -> DepletionTrace:
    """Run the daily box model until the stop level or the horizon.

    Returns:
        A :class:`DepletionTrace`; ``converged`` is False when the
        horizon was reached first.
    """
    columns, stop_day, trawls, converged = _run(s, keep_records=True)
    records = pd.DataFrame(columns, columns=TRACE_COLUMNS)
    if converged:
        logger.debug(f"simulate_depletion: stop on day {stop_day} with {trawls} trawls")
    else:
        logger.warning(
            f"simulate_depletion: not converged after {s.horizon} days "
            f"({records['particles'].iloc[-1]:.4g} particles left, {trawls} trawls)"
        )
    return DepletionTrace(records=records, initial_particles=s.initial_particles,
                          converged=converged, scenario=s)


def geometric_decay(s: LakeScenario, days: int) -> float:
    """Closed-form particle count after ``days`` with a fixed fleet and no influx."""
    if s.fixed_trawls is None:
        raise DomainError("geometric_decay needs a scenario with fixed_trawls", module='depletion')
    ratio = 1.0 - s.fixed_trawls * s.trawl_throughput * s.trawl_duty / s.box_volume
    return s.initial_particles * max(ratio, 0.0) ** days


def calibrate_influx(s: LakeScenario, target_trawls: int, max_expansions: int = 64) -> float:
    """Daily influx at which the run stops with ``target_trawls`` deployed.

    The trawl count at stop is non-decreasing in influx; the upper bracket
    is grown by doubling (checking that monotonicity on the way) and the
    crossing is then located by bisection.

    Raises:
        CalibrationError: If the target cannot be bracketed.
    """
    if target_trawls < 1:
        raise CalibrationError(f"target_trawls must be >= 1, got {target_trawls}")

    def trawls_at_stop(influx: float) -> Optional[int]:
        _, _, trawls, converged = _run(replace(s, daily_influx=influx), keep_records=False)
        return trawls if converged else None

    base = trawls_at_stop(0.0)
    if base is None:
        raise CalibrationError(f"Scenario does not reach its stop level within {s.horizon} days even without influx")
    if base > target_trawls:
        raise CalibrationError(
            f"Target of {target_trawls} trawls is unreachable: {base} are already needed with zero influx"
        )
    if base == target_trawls:
        return 0.0

    lo, hi = 0.0, max(1.0, s.initial_particles * 1e-6)
    previous = base
    for _ in range(max_expansions):
        count = trawls_at_stop(hi)
        logger.debug(f"calibrate_influx: bracket influx={hi:.6g} -> {count} trawls")
        if count is None or count >= target_trawls:
            break
        if count < previous:
            raise CalibrationError(f"Trawl count fell from {previous} to {count} as influx grew to {hi:.6g}")
        previous = count
        lo, hi = hi, hi * 2.0
    else:
        raise CalibrationError(f"Could not bracket {target_trawls} trawls within {max_expansions} doublings")

    def residual(influx: float) -> float:
        count = trawls_at_stop(influx)
        if count is None:
            return float(target_trawls)
        return count - (target_trawls - 0.5)

    xtol = max(hi * 1e-10, 1e-12)
    influx = bisect(residual, lo, hi, xtol=xtol, maxiter=200)
    # the root sits within xtol of the step up to the target; the point just
    # past the bracket is the first influx known to reach it
    for candidate in (influx, influx + 2.0 * xtol):
        final = trawls_at_stop(candidate)
        if final == target_trawls:
            logger.debug(f"calibrate_influx: {candidate:.6g} particles/day -> {final} trawls")
            return float(candidate)
    if final is None or abs(final - target_trawls) > 1:
        raise CalibrationError(f"Calibration ended at {final} trawls, target {target_trawls}")
    logger.warning(f"calibrate_influx: no influx gives exactly {target_trawls} trawls, "
                   f"closest is {final} at {influx:.6g} particles/day")
    return float(influx + 2.0 * xtol)


def bom_total(cost: CostModel) -> float:
    """Sum of the itemized bill of materials.

    Logs a note when the sum differs from the printed unit total.
    """
    total = float(sum(cost.items.values()))
    note = bom_mismatch_note(total, cost.items)
    if note:
        logger.warning(note)
    return total


def bom_mismatch_note(total: float, items: Optional[Dict[str, float]] = None) -> Optional[str]:
    """Explain the gap between an itemized total and the printed $1,115, if any."""
    if items is not None and items != BILL_OF_MATERIALS:
        return None
    if abs(total - PRINTED_UNIT_TOTAL) < 0.005:
        return None
    return (f"Itemized bill of materials sums to ${total:,.2f}, not the printed "
            f"${PRINTED_UNIT_TOTAL:,.0f}; unit cost is taken from configuration")


def campaign_cost(n_trawls: int, cost: CostModel) -> float:
    """Material cost of deploying ``n_trawls`` units."""
    if n_trawls < 0:
        raise DomainError("Number of trawls must be non-negative", module='depletion')
    return n_trawls * cost.unit_total * cost.campaign_multiplier


def summarize_trace(trace: DepletionTrace, cost: Optional[CostModel] = None) -> Dict:
    """Stop day, duration, fleet size and campaign cost for a finished run."""
    cost = cost or CostModel()
    return {
        'status': trace.status,
        'stop_day': trace.stop_day,
        'years': round(trace.years, 3),
        'trawls': trace.trawl_count,
        'campaign_cost_usd': round(campaign_cost(trace.trawl_count, cost), 2),
        'daily_influx': trace.scenario.daily_influx,
        'initial_particles': trace.initial_particles,
        'final_particles': float(trace.records['particles'].iloc[-1]) if not trace.records.empty else trace.initial_particles,
    }
