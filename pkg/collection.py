"""
River flow-through yield estimation
===================================
Estimates how many particles a stationary trawl collects in a river by
scaling the river discharge down to the fraction that passes through
the trawl mouth, then compares the estimate with an observed count.

The measured site recorded a 1.2 ft x 106 ft cross-section (127.2 ft^2)
but the printed chain divides the discharge by 106 ft^2.  ``divisor``
selects between that ``'width'`` convention (default, reproduces the
printed numbers) and the true ``'cross_section'``.  The rounding mode is
independent of the divisor:

``paper``
    throughput rounded to 0.01 m^3/s and hourly volume to whole m^3
    before multiplying by concentration (0.61 m^3/s, 2196 m^3, 3469).
``exact``
    full precision throughout.
"""

from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple, Union
import math
import logging

from config import RIVER_DEFAULTS
from errors import DomainError
from units import Quantity, Unit, convert, dimension_of, parse_unit

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

DIVISORS = ('width', 'cross_section')
ROUNDING_MODES = ('paper', 'exact')

_AREA_UNIT_FOR_LENGTH = {
    Unit.METRE: Unit.SQUARE_METRE,
    Unit.FOOT: Unit.SQUARE_FOOT,
}


def _outward(low: float, high: float) -> Tuple[int, int]:
    return int(math.floor(round(low, 9))), int(math.ceil(round(high, 9)))


@dataclass(frozen=True)
class RiverSite:
    discharge: float = RIVER_DEFAULTS['discharge']
    mean_depth: float = RIVER_DEFAULTS['mean_depth']
    width: float = RIVER_DEFAULTS['width']
    concentration: float = RIVER_DEFAULTS['concentration']   # particles/m^3
    discharge_unit: str = RIVER_DEFAULTS['discharge_unit']
    length_unit: str = RIVER_DEFAULTS['length_unit']

    def __post_init__(self):
        for name in ('discharge', 'mean_depth', 'width', 'concentration'):
            if getattr(self, name) <= 0:
                raise DomainError(f"RiverSite.{name} must be positive, got {getattr(self, name)}",
                                  module='collection')
        if parse_unit(self.length_unit) not in _AREA_UNIT_FOR_LENGTH:
            raise DomainError(f"length_unit must be 'm' or 'ft', got '{self.length_unit}'",
                              module='collection')
        if dimension_of(self.discharge_unit) != "flow":
            raise DomainError(f"discharge_unit must be a flow unit, got '{self.discharge_unit}'",
                              module='collection')

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'RiverSite':
        merged = {k: RIVER_DEFAULTS[k] for k in
                  ('discharge', 'mean_depth', 'width', 'concentration', 'discharge_unit', 'length_unit')}
        merged.update({k: v for k, v in (values or {}).items() if k in merged})
        return cls(**merged)

    @property
    def area_unit(self) -> Unit:
        return _AREA_UNIT_FOR_LENGTH[parse_unit(self.length_unit)]

    def discharge_quantity(self) -> Quantity:
        return Quantity(self.discharge, self.discharge_unit)

    def cross_section_quantity(self) -> Quantity:
        return Quantity(cross_section(self.mean_depth, self.width), self.area_unit)

    def width_as_area(self) -> Quantity:
        """The width read as an area in the site's units (the printed chain's divisor)."""
        return Quantity(self.width, self.area_unit)


@dataclass(frozen=True)
class YieldEstimate:
    throughput_m3s: float
    volume_m3: float
    expected: int
    band_lo: int
    band_hi: int
    band_fraction: float
    expected_raw: float
    rounding: str

    def to_row(self) -> Dict:
        row = asdict(self)
        return {k: row[k] for k in ('throughput_m3s', 'volume_m3', 'expected', 'band_lo', 'band_hi')}


def cross_section(depth: float, width: float) -> float:
    """Rectangular cross-section area (same length unit squared)."""
    if depth <= 0 or width <= 0:
        raise DomainError("Depth and width must be positive", module='collection')
    return depth * width


def metric_site(site: RiverSite) -> RiverSite:
    """Return ``site`` with discharge in m^3/s and lengths in metres."""
    return RiverSite(
        discharge=convert(site.discharge_quantity(), Unit.CUBIC_METRE_PER_SECOND).value,
        mean_depth=convert(Quantity(site.mean_depth, site.length_unit), Unit.METRE).value,
        width=convert(Quantity(site.width, site.length_unit), Unit.METRE).value,
        concentration=site.concentration,
        discharge_unit=Unit.CUBIC_METRE_PER_SECOND.value,
        length_unit=Unit.METRE.value,
    )


def throughput(discharge: Quantity, divisor_area: Quantity, mouth_area: Quantity) -> Quantity:
    """Flow through the trawl mouth: ``(discharge / divisor_area) * mouth_area`` in m^3/s.

    Args:
        discharge: River discharge (any flow unit).
        divisor_area: Area the discharge is spread over.
        mouth_area: Trawl mouth area.
    """
    divisor_si = convert(divisor_area, Unit.SQUARE_METRE).value
    mouth_si = convert(mouth_area, Unit.SQUARE_METRE).value
    if divisor_si <= 0 or mouth_si <= 0:
        raise DomainError("Areas must be positive", module='collection')
    discharge_si = convert(discharge, Unit.CUBIC_METRE_PER_SECOND).value
    if discharge_si <= 0:
        raise DomainError("Discharge must be positive", module='collection')
    return Quantity(discharge_si / divisor_si * mouth_si, Unit.CUBIC_METRE_PER_SECOND)


def expected_yield(site: RiverSite, mouth_area: Union[Quantity, float] = None,
                   duration: float = RIVER_DEFAULTS['duration'], rounding: str = 'paper',
                   band_fraction: float = RIVER_DEFAULTS['band_fraction'],
                   divisor: str = 'width') -> YieldEstimate:
    """Expected particle count for a trawl held in the river for ``duration`` hours.

    Args:
        site: River measurements.
        mouth_area: Trawl mouth area; a bare float is read in the site's
            area unit.  Defaults to the measured 5.38 ft^2.
        duration: Collection time in hours.
        rounding: ``'paper'`` or ``'exact'``.
        band_fraction: Half-width of the expectation band.
        divisor: ``'width'`` or ``'cross_section'``.

    Returns:
        A :class:`YieldEstimate` whose band is rounded outward.
    """
    if rounding not in ROUNDING_MODES:
        raise DomainError(f"Rounding mode must be one of {ROUNDING_MODES}", module='collection')
    if divisor not in DIVISORS:
        raise DomainError(f"divisor must be one of {DIVISORS}", module='collection')
    if duration <= 0:
        raise DomainError(f"Duration must be positive, got {duration}", module='collection')
    if not 0 <= band_fraction < 1:
        raise DomainError("band_fraction must be in [0, 1)", module='collection')
    if mouth_area is None:
        mouth_area = Quantity(RIVER_DEFAULTS['mouth_area'], Unit.SQUARE_FOOT)
    elif not isinstance(mouth_area, Quantity):
        mouth_area = Quantity(mouth_area, site.area_unit)

    cross = site.cross_section_quantity()
    if convert(cross, Unit.SQUARE_METRE).value <= convert(mouth_area, Unit.SQUARE_METRE).value:
        raise DomainError("River cross-section must exceed the trawl mouth area", module='collection')
    divisor_area = site.width_as_area() if divisor == 'width' else cross

    flow = throughput(site.discharge_quantity(), divisor_area, mouth_area).value
    if rounding == 'paper':
        flow = round(flow, 2)
        volume = round(flow * 3600.0) * duration
    else:
        volume = flow * 3600.0 * duration
    expected_raw = volume * site.concentration
    expected = int(math.floor(round(expected_raw, 9)))
    band_lo, band_hi = _outward(expected * (1 - band_fraction), expected * (1 + band_fraction))
    logger.debug(
        f"expected_yield({rounding}, {divisor}): {flow:.6f} m3/s, {volume:.3f} m3 -> {expected} "
        f"[{band_lo}, {band_hi}]"
    )
    return YieldEstimate(
        throughput_m3s=flow,
        volume_m3=volume,
        expected=expected,
        band_lo=band_lo,
        band_hi=band_hi,
        band_fraction=band_fraction,
        expected_raw=expected_raw,
        rounding=rounding,
    )


def observed_vs_expected(observed: int, expected: float,
                         visual_error: float = RIVER_DEFAULTS['visual_error']) -> Dict:
    """Compare an observed count with the expectation.

    Returns:
        ``{'ratio': observed/expected, 'observed_range': (low, high)}``
        where the range spreads the observation by the visual counting
        error and is rounded outward to whole particles.
    """
    if expected <= 0:
        raise DomainError("Expected count must be positive", module='collection')
    if not 0 <= visual_error < 1:
        raise DomainError("visual_error must be in [0, 1)", module='collection')
    low, high = _outward(observed * (1 - visual_error), observed * (1 + visual_error))
    return {
        'ratio': observed / expected,
        'observed_range': (low, high),
    }
