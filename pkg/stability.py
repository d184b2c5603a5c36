"""
Hydrodynamic force curve, torque balance, ballast and buoyancy
==============================================================
The water force normal to the trawl face is the printed quintic
regression in tilt angle (degrees).  Torque about the waterline is
``lever * F(theta) * sin(theta)`` and the ballast weight resists with
``g * m * sin(theta)`` on the same lever, so at equilibrium the sine
factors cancel and ``m = lever * F(theta) / g``.

The printed quintic is not monotone over its whole valid domain: it has
a local maximum near 22.9 degrees and a local minimum near 31.1 degrees.
:func:`monotone_segments` exposes the split and :func:`equilibrium_angle`
solves on the highest-angle segment that brackets the target force.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import math
import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import bisect

from config import (
    STABILITY_DEFAULTS, TRAWL_DEFAULTS, WATER_DENSITY, GRAVITY, EQUILIBRIUM_TOLERANCE_DEG
)
from errors import DomainError, NoEquilibriumError, UnsolvableBallastError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

DISPLACEMENT_MODES = ('paper_constant', 'from_circumference')


@dataclass(frozen=True)
class ForceCurve:
    """Force (N) on the trawl face as a quintic in tilt angle (degrees)."""

    coefficients: Tuple[float, ...] = tuple(STABILITY_DEFAULTS['coefficients'])
    valid_domain: Tuple[float, float] = tuple(STABILITY_DEFAULTS['valid_domain'])

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        domain = tuple(float(d) for d in self.valid_domain)
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'valid_domain', domain)
        if len(coefficients) != 6:
            raise DomainError(f"A force curve needs 6 coefficients (c0..c5), got {len(coefficients)}",
                              module='stability')
        if len(domain) != 2 or not domain[0] < domain[1]:
            raise DomainError(f"Valid domain must be [min, max] with min < max, got {list(domain)}",
                              module='stability')
        samples = P.polyval(np.linspace(domain[0], domain[1], 751), coefficients)
        if np.any(samples <= 0):
            raise DomainError(
                f"Force curve is not positive over [{domain[0]}, {domain[1]}] degrees",
                module='stability',
            )

    @classmethod
    def from_config(cls, values: Optional[Dict] = None) -> 'ForceCurve':
        values = values or {}
        return cls(
            coefficients=tuple(values.get('coefficients', STABILITY_DEFAULTS['coefficients'])),
            valid_domain=tuple(values.get('valid_domain', STABILITY_DEFAULTS['valid_domain'])),
        )

    def contains(self, theta: float) -> bool:
        return self.valid_domain[0] <= theta <= self.valid_domain[1]


@dataclass(frozen=True)
class BallastProblem:
    trawl_mass_above: float = STABILITY_DEFAULTS['body_mass']
    lever_arm: float = STABILITY_DEFAULTS['lever_arm']
    gravity: float = GRAVITY
    curve: ForceCurve = field(default_factory=ForceCurve)

    def __post_init__(self):
        if self.lever_arm <= 0:
            raise DomainError(f"Lever arm must be positive, got {self.lever_arm}", module='stability')
        if self.gravity <= 0:
            raise DomainError(f"Gravity must be positive, got {self.gravity}", module='stability')

    def ballast_for(self, theta: float) -> float:
        return ballast_for_angle(self.curve, theta, self.lever_arm, self.gravity)

    def equilibrium_for(self, mass: float) -> float:
        return equilibrium_angle(self.curve, mass, self.lever_arm, self.gravity)


@dataclass
class MassBudget:
    """Component masses against buoy displacement."""

    frame: float = TRAWL_DEFAULTS['frame_mass']
    printed: float = TRAWL_DEFAULTS['printed_mass']
    panel: float = TRAWL_DEFAULTS['panel_mass']
    ballast: float = TRAWL_DEFAULTS['ballast_mass']
    misc: float = STABILITY_DEFAULTS['misc_mass']
    buoy_count: int = TRAWL_DEFAULTS['buoy_count']
    per_buoy_displacement: float = STABILITY_DEFAULTS['per_buoy_displacement']
    displacement_mode: str = STABILITY_DEFAULTS['displacement_mode']
    buoy_circumference: float = TRAWL_DEFAULTS['buoy_circumference']

    def __post_init__(self):
        for name in ('frame', 'printed', 'panel', 'ballast', 'misc', 'per_buoy_displacement'):
            if getattr(self, name) < 0:
                raise DomainError(f"MassBudget.{name} must be non-negative", module='stability')
        if self.displacement_mode not in DISPLACEMENT_MODES:
            raise DomainError(
                f"displacement_mode must be one of {DISPLACEMENT_MODES}, got '{self.displacement_mode}'",
                module='stability',
            )

    @property
    def total_mass(self) -> float:
        return self.frame + self.printed + self.panel + self.ballast + self.misc

    def displacement_per_buoy(self) -> float:
        if self.displacement_mode == 'from_circumference':
            return sphere_displacement(self.buoy_circumference)
        return self.per_buoy_displacement

    @classmethod
    def with_total(cls, total_mass: float, **kwargs) -> 'MassBudget':
        """Budget whose whole mass sits in ``misc``; handy for what-if margins."""
        return cls(frame=0.0, printed=0.0, panel=0.0, ballast=0.0, misc=total_mass, **kwargs)


def _check_angle(curve: ForceCurve, theta: float) -> None:
    if not curve.contains(theta):
        lo, hi = curve.valid_domain
        raise DomainError(
            f"Tilt angle {theta} deg is outside the force curve's valid domain [{lo}, {hi}] deg",
            module='stability',
        )


def water_force(curve: ForceCurve, theta: float) -> float:
    """Force (N) of the water on the trawl face at tilt ``theta`` degrees."""
    _check_angle(curve, theta)
    return float(P.polyval(theta, curve.coefficients))


def trawl_torque(curve: ForceCurve, theta: float, lever: float = STABILITY_DEFAULTS['lever_arm']) -> float:
    """Tipping moment (N*m): lever * F(theta) * sin(theta)."""
    if lever < 0:
        raise DomainError(f"Lever arm must be non-negative, got {lever}", module='stability')
    return lever * water_force(curve, theta) * math.sin(math.radians(theta))


def ballast_for_angle(curve: ForceCurve, theta: float,
                      lever: float = STABILITY_DEFAULTS['lever_arm'],
                      g: float = GRAVITY) -> float:
    """Ballast mass (kg) that holds the trawl at ``theta`` degrees.

    Balancing ``g*m*sin(theta)`` against ``lever*F(theta)*sin(theta)``
    cancels the sine, leaving ``m = lever * F(theta) / g``.
    """
    if lever <= 0 or g <= 0:
        raise DomainError("Lever arm and gravity must be positive", module='stability')
    return lever * water_force(curve, theta) / g


def monotone_segments(curve: ForceCurve) -> List[Tuple[float, float, str]]:
    """Split the valid domain at the curve's critical points.

    Returns:
        ``(start, end, 'increasing' | 'decreasing')`` tuples in angle order.
    """
    lo, hi = curve.valid_domain
    critical = P.polyroots(P.polyder(curve.coefficients))
    cuts = sorted(float(r.real) for r in np.atleast_1d(critical)
                  if abs(r.imag) < 1e-9 and lo < r.real < hi)
    edges = [lo] + cuts + [hi]
    segments = []
    for start, end in zip(edges[:-1], edges[1:]):
        slope = P.polyval((start + end) / 2.0, P.polyder(curve.coefficients))
        segments.append((start, end, 'increasing' if slope > 0 else 'decreasing'))
    return segments


def equilibrium_angle(curve: ForceCurve, m: float,
                      lever: float = STABILITY_DEFAULTS['lever_arm'],
                      g: float = GRAVITY,
                      xtol: float = EQUILIBRIUM_TOLERANCE_DEG) -> float:
    """Tilt angle at which ballast ``m`` balances the water torque.

    Solves ``F(theta) = g*m/lever`` by bisection on the highest-angle
    monotone segment whose force range contains the target.

    Raises:
        NoEquilibriumError: If no angle in the valid domain produces the
            required force.
    """
    if lever <= 0 or g <= 0:
        raise DomainError("Lever arm and gravity must be positive", module='stability')
    target = g * m / lever

    def residual(theta):
        return float(P.polyval(theta, curve.coefficients)) - target

    for start, end, _ in reversed(monotone_segments(curve)):
        f_start, f_end = residual(start), residual(end)
        if f_start == 0.0:
            return start
        if f_end == 0.0:
            return end
        if f_start * f_end < 0:
            theta = bisect(residual, start, end, xtol=xtol)
            logger.debug(f"equilibrium_angle: m={m} kg -> F*={target:.4f} N at {theta:.6f} deg")
            return float(theta)
    lo, hi = curve.valid_domain
    raise NoEquilibriumError(
        f"No equilibrium for {m} kg: required force {target:.3f} N is outside the curve's range "
        f"on [{lo}, {hi}] deg"
    )


def ballast_for_center_of_mass(target_cm: float, body_mass: float, body_cm: float,
                               ballast_depth: float) -> float:
    """Ballast (kg) at ``ballast_depth`` that moves the combined center of mass to ``target_cm``.

    Solves ``target = (M*y_body + w*y_ballast) / (M + w)`` for ``w``.
    Heights are metres relative to the waterline (negative is below).

    Raises:
        UnsolvableBallastError: Unless ``ballast_depth < target_cm <= body_cm``.
    """
    if body_mass <= 0:
        raise UnsolvableBallastError(f"Body mass must be positive, got {body_mass}")
    if not ballast_depth < target_cm <= body_cm:
        raise UnsolvableBallastError(
            f"Cannot reach center of mass {target_cm} m: a positive ballast at {ballast_depth} m "
            f"only moves a body centered at {body_cm} m into ({ballast_depth}, {body_cm}]"
        )
    return body_mass * (body_cm - target_cm) / (target_cm - ballast_depth)


def combined_center_of_mass(masses: Sequence[float], heights: Sequence[float]) -> float:
    """Mass-weighted height of a set of point masses."""
    total = float(np.sum(masses))
    if total <= 0:
        raise DomainError("Total mass must be positive", module='stability')
    return float(np.dot(masses, heights) / total)


def sphere_displacement(circumference: float, density: float = WATER_DENSITY) -> float:
    """Mass of water (kg) displaced by a fully submerged sphere of given circumference."""
    radius = circumference / (2.0 * math.pi)
    return density * 4.0 / 3.0 * math.pi * radius ** 3


def buoyancy_margin(budget: MassBudget) -> float:
    """Spare lift (kg): total buoy displacement minus total mass.

    A negative value is returned unchanged; it means the trawl sinks.
    """
    if budget.buoy_count < 1:
        raise DomainError("At least one buoy is required", module='stability')
    margin = budget.buoy_count * budget.displacement_per_buoy() - budget.total_mass
    if margin < 0:
        logger.warning(f"buoyancy_margin: negative margin {margin:.2f} kg, trawl would sink")
    return margin


def bird_landing_margin(budget: MassBudget, bird_mass: float = STABILITY_DEFAULTS['bird_mass']) -> float:
    """Margin left after a bird of ``bird_mass`` kg perches on the trawl."""
    return buoyancy_margin(budget) - bird_mass
