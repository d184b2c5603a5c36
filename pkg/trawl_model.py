"""
Trawl geometry, particle capacity and fill time
===============================================
The net is modelled as a rectangular pyramid behind a rigid mouth and
its capacity as naive volume division by a worst-case spherical
particle.  No packing factor is applied, so capacity is an
over-estimate.

Two rounding modes are offered:

``paper``
    Particle volume is rounded up to the nearest 0.5 mm^3 before
    dividing (the 5 mm sphere becomes 65.5 mm^3), which reproduces the
    printed 3,816,793 figure.

``exact``
    Full-precision particle volume; used by downstream models.
"""

from dataclasses import dataclass, asdict
from typing import Dict, Optional
import math
import logging

from config import (
    TRAWL_DEFAULTS, MICROPLASTIC_MAX_DIAMETER_MM, OPERATING_SPEED_KNOTS,
    KNOTS_TO_METRES_PER_SECOND
)
from errors import DomainError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

ROUNDING_MODES = ('paper', 'exact')
_MM3_PER_M3 = 1e9


@dataclass(frozen=True)
class TrawlSpec:
    mouth_width: float = TRAWL_DEFAULTS['mouth_width']
    mouth_height: float = TRAWL_DEFAULTS['mouth_height']
    net_length: float = TRAWL_DEFAULTS['net_length']
    pore_diameter: float = TRAWL_DEFAULTS['pore_diameter']      # micrometres
    frame_mass: float = TRAWL_DEFAULTS['frame_mass']
    printed_mass: float = TRAWL_DEFAULTS['printed_mass']
    panel_mass: float = TRAWL_DEFAULTS['panel_mass']
    ballast_mass: float = TRAWL_DEFAULTS['ballast_mass']
    buoy_circumference: float = TRAWL_DEFAULTS['buoy_circumference']
    buoy_count: int = TRAWL_DEFAULTS['buoy_count']

    def __post_init__(self):
        for name in ('mouth_width', 'mouth_height', 'net_length', 'pore_diameter',
                     'buoy_circumference'):
            if getattr(self, name) <= 0:
                raise DomainError(f"TrawlSpec.{name} must be positive, got {getattr(self, name)}",
                                  module='trawl_model')
        for name in ('frame_mass', 'printed_mass', 'panel_mass', 'ballast_mass'):
            if getattr(self, name) < 0:
                raise DomainError(f"TrawlSpec.{name} must be non-negative", module='trawl_model')
        if self.buoy_count < 1:
            raise DomainError("TrawlSpec.buoy_count must be at least 1", module='trawl_model')
        pore_m = self.pore_diameter * 1e-6
        if pore_m >= min(self.mouth_width, self.mouth_height):
            raise DomainError(
                f"Pore diameter {self.pore_diameter} um does not fit the "
                f"{self.mouth_width} x {self.mouth_height} m mouth",
                module='trawl_model',
            )

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'TrawlSpec':
        merged = dict(TRAWL_DEFAULTS)
        merged.update(values or {})
        return cls(**merged)

    @property
    def mouth_area(self) -> float:
        return self.mouth_width * self.mouth_height

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ParticleSpec:
    """Worst-case spherical microplastic."""

    diameter: float = MICROPLASTIC_MAX_DIAMETER_MM   # mm

    def __post_init__(self):
        if not 0 < self.diameter <= MICROPLASTIC_MAX_DIAMETER_MM:
            raise DomainError(
                f"Particle diameter must be in (0, {MICROPLASTIC_MAX_DIAMETER_MM}] mm, "
                f"got {self.diameter}",
                module='trawl_model',
            )

    @property
    def volume_mm3(self) -> float:
        radius = self.diameter / 2.0
        return 4.0 / 3.0 * math.pi * radius ** 3

    def rounded_volume_mm3(self, rounding: str = 'exact') -> float:
        _check_rounding(rounding)
        if rounding == 'paper':
            return math.ceil(self.volume_mm3 * 2.0) / 2.0
        return self.volume_mm3


def _check_rounding(rounding: str) -> None:
    if rounding not in ROUNDING_MODES:
        raise DomainError(f"Rounding mode must be one of {ROUNDING_MODES}, got '{rounding}'",
                          module='trawl_model')


def _floor_count(value: float) -> int:
    # round first so 65.5e-9 m^3 / 65.5 mm^3 is one particle, not 0.9999999
    return int(math.floor(round(value, 9)))


def trawl_volume(spec: TrawlSpec) -> float:
    """Net volume in m^3 as a rectangular pyramid: L*W*H/3."""
    return spec.net_length * spec.mouth_width * spec.mouth_height / 3.0


def particle_capacity(volume: float, particle: Optional[ParticleSpec] = None,
                      rounding: str = 'paper') -> int:
    """Number of whole particles that fit in ``volume`` m^3.

    Args:
        volume: Net volume in m^3, strictly positive.
        particle: Particle to pack; defaults to the 5 mm worst case.
        rounding: ``'paper'`` or ``'exact'`` (see module docstring).

    Returns:
        floor(volume / particle volume).
    """
    if volume <= 0:
        raise DomainError(f"Volume must be positive, got {volume}", module='trawl_model')
    particle = particle or ParticleSpec()
    particle_volume = particle.rounded_volume_mm3(rounding)
    capacity = _floor_count(volume * _MM3_PER_M3 / particle_volume)
    logger.debug(f"particle_capacity: {volume} m3 / {particle_volume} mm3 ({rounding}) = {capacity}")
    return capacity


def fill_time(capacity: float, rate: float, duty: float = 24.0) -> float:
    """Days needed to fill ``capacity`` particles at ``rate`` particles/hour.

    Args:
        capacity: Particle capacity of the net.
        rate: Collection rate, particles per hour of operation.
        duty: Operating hours per day, in (0, 24].
    """
    if rate <= 0:
        raise DomainError(f"Collection rate must be positive, got {rate}", module='trawl_model')
    if not 0 < duty <= 24:
        raise DomainError(f"Duty must be in (0, 24] hours/day, got {duty}", module='trawl_model')
    return capacity / (rate * duty)


def design_throughput(spec: Optional[TrawlSpec] = None,
                      speed_knots: float = OPERATING_SPEED_KNOTS) -> float:
    """Water filtered per hour (m^3/h) by the mouth moving at ``speed_knots``."""
    spec = spec or TrawlSpec()
    return spec.mouth_area * speed_knots * KNOTS_TO_METRES_PER_SECOND * 3600.0


def collection_rate(concentration: float, throughput_m3h: float) -> float:
    """Particles collected per hour of operation in uniformly mixed water."""
    if concentration < 0 or throughput_m3h < 0:
        raise DomainError("Concentration and throughput must be non-negative", module='trawl_model')
    return concentration * throughput_m3h


def fill_time_at_concentration(spec: TrawlSpec, concentration: float,
                               throughput_m3h: Optional[float] = None,
                               duty: float = 24.0, rounding: str = 'paper') -> float:
    """Days to fill ``spec`` when towing through water at ``concentration``.

    Concentrations are assumed constant over the whole fill, which the
    depletion model shows is optimistic for long deployments.
    """
    if throughput_m3h is None:
        throughput_m3h = design_throughput(spec)
    capacity = particle_capacity(trawl_volume(spec), ParticleSpec(), rounding)
    return fill_time(capacity, collection_rate(concentration, throughput_m3h), duty)
