"""
Scalar quantities and unit conversion
=====================================
Only the units the trawl models need are supported.  Each unit maps to
a dimension and a fixed factor to its SI unit; conversions go through
SI and both directions use the same stated constant, so a round trip
returns the original value to within floating-point rounding.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple, Union
import logging

from config import (
    FEET_TO_METRES, SQUARE_FEET_TO_SQUARE_METRES, CUBIC_FEET_TO_CUBIC_METRES,
    KNOTS_TO_METRES_PER_SECOND, PROTOCOL_SPEED_CAP_KNOTS
)
from errors import DomainError, IncompatibleUnitsError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())


class Unit(Enum):
    METRE = 'm'
    FOOT = 'ft'
    SQUARE_METRE = 'm2'
    SQUARE_FOOT = 'ft2'
    CUBIC_METRE = 'm3'
    CUBIC_FOOT = 'ft3'
    CUBIC_METRE_PER_SECOND = 'm3/s'
    CUBIC_FOOT_PER_SECOND = 'ft3/s'
    KNOT = 'knots'
    METRE_PER_SECOND = 'm/s'
    KILOGRAM = 'kg'
    NEWTON = 'N'
    NEWTON_METRE = 'N*m'
    WATT = 'W'
    WATT_HOUR = 'Wh'
    PARTICLES_PER_CUBIC_METRE = 'particles/m3'
    PARTICLES = 'particles'


# unit -> (dimension, factor to the SI unit of that dimension)
_UNIT_TABLE: Dict[Unit, Tuple[str, float]] = {
    Unit.METRE: ('length', 1.0),
    Unit.FOOT: ('length', FEET_TO_METRES),
    Unit.SQUARE_METRE: ('area', 1.0),
    Unit.SQUARE_FOOT: ('area', SQUARE_FEET_TO_SQUARE_METRES),
    Unit.CUBIC_METRE: ('volume', 1.0),
    Unit.CUBIC_FOOT: ('volume', CUBIC_FEET_TO_CUBIC_METRES),
    Unit.CUBIC_METRE_PER_SECOND: ('flow', 1.0),
    Unit.CUBIC_FOOT_PER_SECOND: ('flow', CUBIC_FEET_TO_CUBIC_METRES),
    Unit.KNOT: ('speed', KNOTS_TO_METRES_PER_SECOND),
    Unit.METRE_PER_SECOND: ('speed', 1.0),
    Unit.KILOGRAM: ('mass', 1.0),
    Unit.NEWTON: ('force', 1.0),
    Unit.NEWTON_METRE: ('torque', 1.0),
    Unit.WATT: ('power', 1.0),
    Unit.WATT_HOUR: ('energy', 1.0),
    Unit.PARTICLES_PER_CUBIC_METRE: ('concentration', 1.0),
    Unit.PARTICLES: ('count', 1.0),
}


def parse_unit(unit: Union[Unit, str]) -> Unit:
    """Accept a :class:`Unit` or its tag string (``'ft3/s'``, ``'knots'``...)."""
    if isinstance(unit, Unit):
        return unit
    try:
        return Unit(str(unit).strip())
    except ValueError:
        tags = [u.value for u in Unit]
        raise IncompatibleUnitsError(f"Unknown unit '{unit}'. Supported units: {tags}")


def dimension_of(unit: Union[Unit, str]) -> str:
    return _UNIT_TABLE[parse_unit(unit)][0]


@dataclass(frozen=True)
class Quantity:
    """An immutable value tagged with its unit."""

    value: float
    unit: Unit

    def __post_init__(self):
        object.__setattr__(self, 'unit', parse_unit(self.unit))
        object.__setattr__(self, 'value', float(self.value))

    def si(self) -> float:
        """Value expressed in the SI unit of this quantity's dimension."""
        return self.value * _UNIT_TABLE[self.unit][1]

    def __str__(self) -> str:
        return f"{self.value:g} {self.unit.value}"


def convert(q: Quantity, target: Union[Unit, str]) -> Quantity:
    """Convert ``q`` to ``target`` using the fixed conversion constants.

    Args:
        q: Quantity to convert.
        target: Unit (or unit tag) of the same dimension.

    Returns:
        A new :class:`Quantity` in ``target`` units.

    Raises:
        IncompatibleUnitsError: If the dimensions differ.
    """
    target_unit = parse_unit(target)
    source_dim, source_factor = _UNIT_TABLE[q.unit]
    target_dim, target_factor = _UNIT_TABLE[target_unit]
    if source_dim != target_dim:
        raise IncompatibleUnitsError(
            f"Cannot convert {q.unit.value} ({source_dim}) to {target_unit.value} ({target_dim})"
        )
    if q.unit is target_unit:
        return Quantity(q.value, target_unit)
    return Quantity(q.value * source_factor / target_factor, target_unit)


def to_si(value: float, unit: Union[Unit, str]) -> float:
    """Shortcut for boundary code: ``value`` in ``unit`` expressed in SI."""
    return Quantity(value, unit).si()


def speed_cap_check(v: Union[Quantity, float]) -> bool:
    """Return True when ``v`` respects the trawling protocol (strictly under 3 knots).

    Args:
        v: A speed :class:`Quantity`, or a bare float taken as knots.

    Raises:
        DomainError: For negative speeds.
        IncompatibleUnitsError: If ``v`` is not a speed.
    """
    if not isinstance(v, Quantity):
        v = Quantity(v, Unit.KNOT)
    knots = convert(v, Unit.KNOT).value
    if knots < 0:
        raise DomainError(f"Speed must be non-negative, got {v}", module='units')
    return knots < PROTOCOL_SPEED_CAP_KNOTS
