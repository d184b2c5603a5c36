"""
Autonomous trawl guidance simulation
====================================
A desk-scale 2D model of the self-driving trawl:

* an ultrasonic range sensor, ray-cast against the lake shoreline with
  Gaussian noise and random dropouts,
* a moving-average filter that holds its last output across dropouts,
* a two-mode (CRUISE / AVOID) avoidance policy with hysteresis,
* RC pulse-width thrust commands for the two thrusters,
* first-order drag kinematics tuned so full symmetric thrust settles at
  the 2-knot trawling speed, advected by the local current.

The shoreline is a shapely polygon.  Missions in the same lake run as a
fleet: every agent is advanced each tick on numpy arrays, with no
interaction between agents, so one mission or a hundred share a code path.

Positions are metres, headings radians counter-clockwise from +x.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Sequence, Tuple, Union
import math
import logging

import numpy as np
import pandas as pd
import shapely
from shapely.geometry import LineString, Polygon
from shapely.geometry import Point as ShorePoint
from shapely.validation import explain_validity

from config import (
    MISSION_DEFAULTS, PWM_LIMITS, OPERATING_SPEED_KNOTS, KNOTS_TO_METRES_PER_SECOND, AVOIDANCE_CURRENT_LIMIT
)
from errors import DomainError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())

XY = Tuple[float, float]

TRAJECTORY_COLUMNS = ['t', 'x', 'y', 'heading', 'speed', 'mode', 'filtered_range',
                      'left_us', 'right_us', 'collected_cum']
MAX_SPEED = OPERATING_SPEED_KNOTS * KNOTS_TO_METRES_PER_SECOND
TWO_PI = 2.0 * math.pi
_CONE = np.array([0.0, 1.0, -1.0])   # centre ray, then both edges


class Mode(Enum):
    CRUISE = 'CRUISE'
    AVOID = 'AVOID'


# ---------------------------------------------------------------------------
# Thrust commands
# ---------------------------------------------------------------------------

def pulse_from_thrust(fraction: float) -> int:
    """Map a thrust fraction in [-1, 1] to an RC pulse width in microseconds."""
    if not -1.0 <= fraction <= 1.0:
        raise DomainError(f"Thrust fraction must be in [-1, 1], got {fraction}", module='guidance')
    span = PWM_LIMITS['max'] - PWM_LIMITS['neutral']
    return int(math.floor(PWM_LIMITS['neutral'] + span * fraction + 0.5))


def thrust_from_pulse(pulse: float) -> float:
    """Inverse of :func:`pulse_from_thrust`."""
    if not PWM_LIMITS['min'] <= pulse <= PWM_LIMITS['max']:
        raise DomainError(
            f"Pulse width must be in [{PWM_LIMITS['min']}, {PWM_LIMITS['max']}] us, got {pulse}",
            module='guidance',
        )
    return (pulse - PWM_LIMITS['neutral']) / (PWM_LIMITS['max'] - PWM_LIMITS['neutral'])


@dataclass(frozen=True)
class ThrusterCommand:
    left_pulse: int = PWM_LIMITS['neutral']
    right_pulse: int = PWM_LIMITS['neutral']

    def __post_init__(self):
        for name in ('left_pulse', 'right_pulse'):
            value = getattr(self, name)
            if not PWM_LIMITS['min'] <= value <= PWM_LIMITS['max']:
                raise DomainError(f"{name} {value} us is outside the ESC range", module='guidance')

    @classmethod
    def from_thrust(cls, left: float, right: float) -> 'ThrusterCommand':
        return cls(pulse_from_thrust(left), pulse_from_thrust(right))

    def fractions(self) -> Tuple[float, float]:
        return thrust_from_pulse(self.left_pulse), thrust_from_pulse(self.right_pulse)


TURN_COMMAND = ThrusterCommand(PWM_LIMITS['min'], PWM_LIMITS['max'])


# ---------------------------------------------------------------------------
# Sensing and filtering
# ---------------------------------------------------------------------------

@dataclass
class RangeFilter:
    """Moving average over the last ``window`` valid readings."""

    window: int = MISSION_DEFAULTS['window']
    buffer: Deque[float] = field(default=None, repr=False)
    last: Optional[float] = None

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise DomainError(f"Filter window must be a positive integer, got {self.window}", module='guidance')
        if self.buffer is None:
            self.buffer = deque(maxlen=int(self.window))

    def update(self, reading: Optional[float]) -> Optional[float]:
        if reading is None:
            return self.last
        self.buffer.append(reading)
        self.last = sum(self.buffer) / len(self.buffer)
        return self.last


def filter_update(f: RangeFilter, reading: Optional[float]) -> Optional[float]:
    """Push ``reading`` (``None`` for a dropout) and return the filtered range."""
    return f.update(reading)


class RangeFilterBank:
    """:class:`RangeFilter` state for a fleet, one row per agent.

    Rows hold the newest reading last; NaN marks an empty slot in the
    buffer and, in the output, an agent that has no valid reading yet.
    """

    def __init__(self, filters: Sequence[RangeFilter]):
        windows = {int(f.window) for f in filters}
        if len(windows) != 1:
            raise DomainError(f"Fleet filters must share one window, got {sorted(windows)}", module='guidance')
        self.window = windows.pop()
        n = len(filters)
        self.buffer = np.full((n, self.window), np.nan)
        self.count = np.zeros(n, dtype=int)
        self.last = np.full(n, np.nan)
        for i, f in enumerate(filters):
            held = list(f.buffer)
            if held:
                self.buffer[i, self.window - len(held):] = held
            self.count[i] = len(held)
            if f.last is not None:
                self.last[i] = f.last

    def update(self, readings: np.ndarray) -> np.ndarray:
        """Push one reading per agent (NaN for a dropout) and return the filtered ranges."""
        valid = ~np.isnan(readings)
        if valid.any():
            rows = self.buffer[valid]
            rows[:, :-1] = rows[:, 1:]
            rows[:, -1] = readings[valid]
            self.buffer[valid] = rows
            self.count[valid] = np.minimum(self.count[valid] + 1, self.window)
            self.last[valid] = np.nansum(rows, axis=1) / self.count[valid]
        return self.last.copy()

    def to_filters(self) -> List[RangeFilter]:
        filters = []
        for row, last in zip(self.buffer, self.last):
            held = row[~np.isnan(row)].tolist()
            filters.append(RangeFilter(window=self.window, buffer=deque(held, maxlen=self.window),
                                       last=None if np.isnan(last) else float(last)))
        return filters


@dataclass
class SensorModel:
    max_range: float = MISSION_DEFAULTS['max_range']
    noise_sigma: float = MISSION_DEFAULTS['noise_sigma']
    dropout_probability: float = MISSION_DEFAULTS['dropout_probability']
    seed: int = MISSION_DEFAULTS['seed']
    beam_half_angle: float = MISSION_DEFAULTS['beam_half_angle']

    def __post_init__(self):
        if self.max_range <= 0:
            raise DomainError("Sensor max_range must be positive", module='guidance')
        if self.noise_sigma < 0:
            raise DomainError("Sensor noise_sigma must be non-negative", module='guidance')
        if not 0 <= self.dropout_probability < 1:
            raise DomainError("dropout_probability must be in [0, 1)", module='guidance')
        if not 0 <= self.beam_half_angle < math.pi / 2:
            raise DomainError("beam_half_angle must be in [0, pi/2)", module='guidance')

    def draw(self, n: int, rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Noise samples and dropout flags for ``n`` readings, from this sensor's seed by default."""
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        noise = rng.normal(0.0, self.noise_sigma, n) if self.noise_sigma > 0 else np.zeros(n)
        dropped = rng.random(n) < self.dropout_probability
        return noise, dropped


# ---------------------------------------------------------------------------
# Lake geometry and fields
# ---------------------------------------------------------------------------

def _as_polygon(boundary: Union[Polygon, Sequence[XY]]) -> Polygon:
    return boundary if isinstance(boundary, Polygon) else Polygon(boundary)


def ray_distance_to_boundary(boundary: Union[Polygon, Sequence[XY]], position: XY, heading: float,
                             max_range: Optional[float] = None) -> float:
    """Distance from ``position`` along ``heading`` to the shoreline.

    Returns ``inf`` when the ray meets no shoreline within ``max_range``
    (unbounded when ``None``).
    """
    polygon = _as_polygon(boundary)
    px, py = position
    if max_range is None:
        minx, miny, maxx, maxy = polygon.bounds
        max_range = max(math.hypot(cx - px, cy - py) for cx in (minx, maxx) for cy in (miny, maxy)) + 1.0
    ray = LineString([(px, py), (px + max_range * math.cos(heading), py + max_range * math.sin(heading))])
    hits = ray.intersection(polygon.exterior)
    if hits.is_empty:
        return math.inf
    return ShorePoint(px, py).distance(hits)


def beam_distance(boundary: Union[Polygon, Sequence[XY]], position: XY, heading: float,
                  half_angle: float = MISSION_DEFAULTS['beam_half_angle'],
                  max_range: Optional[float] = None) -> float:
    """Closest echo across the sensor cone (centre and both edges)."""
    polygon = _as_polygon(boundary)
    distance = ray_distance_to_boundary(polygon, position, heading, max_range)
    if half_angle > 0:
        distance = min(distance,
                       ray_distance_to_boundary(polygon, position, heading + half_angle, max_range),
                       ray_distance_to_boundary(polygon, position, heading - half_angle, max_range))
    return distance


def _beam_ranges(edges: Tuple[np.ndarray, np.ndarray], x: np.ndarray, y: np.ndarray,
                 heading: np.ndarray, half_angle: np.ndarray) -> np.ndarray:
    """:func:`beam_distance` for a fleet against the shoreline edge arrays."""
    starts, vectors = edges
    angles = heading[:, None] + half_angle[:, None] * _CONE
    dx = np.cos(angles)[:, :, None]
    dy = np.sin(angles)[:, :, None]
    ex, ey = vectors[:, 0], vectors[:, 1]
    wx = (starts[:, 0] - x[:, None])[:, None, :]
    wy = (starts[:, 1] - y[:, None])[:, None, :]
    denom = dx * ey - dy * ex
    with np.errstate(divide='ignore', invalid='ignore'):
        t = (wx * ey - wy * ex) / denom
        s = (wx * dy - wy * dx) / denom
    hit = (np.abs(denom) > 1e-15) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
    return np.where(hit, t, np.inf).min(axis=(1, 2))


@dataclass(frozen=True)
class PiecewiseField:
    """Piecewise-constant field on a regular grid, clamped at the edges.

    ``values`` is indexed ``[row][col]`` with row along y; each cell holds
    a scalar or an ``(x, y)`` vector.
    """

    values: Tuple
    origin: XY = (0.0, 0.0)
    cell_size: XY = (1.0, 1.0)

    def __post_init__(self):
        rows = tuple(tuple(tuple(v) if isinstance(v, (list, tuple)) else float(v) for v in row)
                     for row in self.values)
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise DomainError("Field values must be a non-empty rectangular grid", module='guidance')
        if self.cell_size[0] <= 0 or self.cell_size[1] <= 0:
            raise DomainError("Field cell size must be positive", module='guidance')
        try:
            grid = np.asarray(rows, dtype=float)
        except ValueError:
            raise DomainError("Field cells must all be scalars or all be [x, y] vectors", module='guidance')
        object.__setattr__(self, 'values', rows)
        object.__setattr__(self, '_grid', grid)

    @classmethod
    def uniform(cls, value) -> 'PiecewiseField':
        return cls(values=((value,),))

    @classmethod
    def from_config(cls, spec) -> 'PiecewiseField':
        """A bare scalar or ``[vx, vy]`` is uniform; a dict gives ``values``/``origin``/``cell_size``."""
        if isinstance(spec, dict):
            return cls(values=spec['values'], origin=tuple(spec.get('origin', (0.0, 0.0))),
                       cell_size=tuple(spec.get('cell_size', (1.0, 1.0))))
        return cls.uniform(tuple(spec) if isinstance(spec, (list, tuple)) else spec)

    def value_at(self, x: float, y: float):
        ny, nx = len(self.values), len(self.values[0])
        col = min(max(int((x - self.origin[0]) // self.cell_size[0]), 0), nx - 1)
        row = min(max(int((y - self.origin[1]) // self.cell_size[1]), 0), ny - 1)
        return self.values[row][col]

    def values_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`value_at`; vector fields give shape ``(n, 2)``."""
        grid = self._grid
        ny, nx = grid.shape[:2]
        if ny == 1 and nx == 1:
            return np.broadcast_to(grid[0, 0], (len(x),) + grid.shape[2:])
        col = np.clip(np.floor_divide(x - self.origin[0], self.cell_size[0]).astype(int), 0, nx - 1)
        row = np.clip(np.floor_divide(y - self.origin[1], self.cell_size[1]).astype(int), 0, ny - 1)
        return grid[row, col]

    def max_magnitude(self) -> float:
        grid = self._grid
        magnitude = np.hypot(grid[..., 0], grid[..., 1]) if grid.ndim == 3 else np.abs(grid)
        return float(magnitude.max())


@dataclass(frozen=True)
class LakeWorld:
    """A lake bounded by a simple polygon, with current and concentration fields."""

    boundary: Tuple[XY, ...]
    current_field: PiecewiseField = field(default_factory=lambda: PiecewiseField.uniform((0.0, 0.0)))
    concentration_field: PiecewiseField = field(
        default_factory=lambda: PiecewiseField.uniform(MISSION_DEFAULTS['concentration']))
    seed: int = MISSION_DEFAULTS['seed']

    def __post_init__(self):
        boundary = tuple((float(x), float(y)) for x, y in self.boundary)
        object.__setattr__(self, 'boundary', boundary)
        if len(boundary) < 3:
            raise DomainError("Lake boundary needs at least 3 vertices", module='guidance')
        polygon = Polygon(boundary)
        if not polygon.is_valid:
            raise DomainError(f"Lake boundary is not a simple polygon: {explain_validity(polygon)}",
                              module='guidance')
        shapely.prepare(polygon)
        coords = np.asarray(polygon.exterior.coords)
        object.__setattr__(self, 'polygon', polygon)
        object.__setattr__(self, 'edges', (coords[:-1], np.diff(coords, axis=0)))

    @classmethod
    def rectangle(cls, width: float, height: float, **kwargs) -> 'LakeWorld':
        if width <= 0 or height <= 0:
            raise DomainError("Lake dimensions must be positive", module='guidance')
        return cls(boundary=((0.0, 0.0), (width, 0.0), (width, height), (0.0, height)), **kwargs)

    def contains(self, x, y):
        """Strictly-inside test; points on the shoreline count as outside.

        Takes scalars (returns bool) or arrays (returns a bool array).
        """
        inside = shapely.contains_xy(self.polygon, x, y)
        return bool(inside) if np.ndim(inside) == 0 else inside

    def current_at(self, x: float, y: float) -> Tuple[float, float]:
        cx, cy = self.current_field.value_at(x, y)
        return cx, cy

    def currents_at(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values = self.current_field.values_at(x, y)
        return values[:, 0], values[:, 1]

    def concentration_at(self, x: float, y: float) -> float:
        return self.concentration_field.value_at(x, y)

    def max_current(self) -> float:
        return self.current_field.max_magnitude()

    def random_start(self, margin: float = 10.0, seed: Optional[int] = None) -> Tuple[XY, float]:
        """Draw a start position at least ``margin`` m inside the bounding box and a heading.

        The draw is seeded by ``seed``, or by the world's own seed.
        """
        rng = np.random.default_rng(self.seed if seed is None else seed)
        minx, miny, maxx, maxy = self.polygon.bounds
        for _ in range(1000):
            x = rng.uniform(minx + margin, maxx - margin)
            y = rng.uniform(miny + margin, maxy - margin)
            if self.contains(x, y):
                return (float(x), float(y)), float(rng.uniform(0.0, TWO_PI))
        raise DomainError(f"No start position found {margin} m inside the lake", module='guidance')


# ---------------------------------------------------------------------------
# Vehicle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VesselDynamics:
    max_speed: float = MAX_SPEED                                  # m/s at full symmetric thrust
    time_constant: float = MISSION_DEFAULTS['time_constant']      # s
    max_yaw_rate: float = MISSION_DEFAULTS['max_yaw_rate']        # rad/s
    mouth_area: float = MISSION_DEFAULTS['mouth_area']            # m^2

    def __post_init__(self):
        for name in ('max_speed', 'time_constant', 'max_yaw_rate', 'mouth_area'):
            if getattr(self, name) <= 0:
                raise DomainError(f"VesselDynamics.{name} must be positive", module='guidance')


@dataclass
class AgentState:
    position: XY
    heading: float = MISSION_DEFAULTS['heading']
    speed: float = 0.0
    mode: Mode = Mode.CRUISE
    filter: RangeFilter = field(default_factory=RangeFilter)

    def __post_init__(self):
        if not 0 <= self.speed <= MAX_SPEED + 1e-12:
            raise DomainError(f"Agent speed must be within [0, {MAX_SPEED:.4f}] m/s", module='guidance')


def _next_avoid(filtered: np.ndarray, avoid: np.ndarray, threshold: float, hysteresis: float) -> np.ndarray:
    # NaN (no filtered range yet) compares False, so the mode holds
    with np.errstate(invalid='ignore'):
        enter = ~avoid & (filtered < threshold)
        leave = avoid & (filtered > threshold + hysteresis)
    return (avoid | enter) & ~leave


def avoidance_policy(filtered: Optional[float], mode: Mode,
                     threshold: float = MISSION_DEFAULTS['threshold'],
                     hysteresis: float = MISSION_DEFAULTS['hysteresis'],
                     cruise_thrust: float = MISSION_DEFAULTS['cruise_thrust']) -> Tuple[Mode, ThrusterCommand]:
    """Two-mode avoidance with a hysteresis band.

    CRUISE switches to AVOID below ``threshold`` and turns in place
    (left reverse, right forward); AVOID returns to CRUISE above
    ``threshold + hysteresis``.  Without a filtered range the mode holds.
    """
    if not threshold > hysteresis > 0:
        raise DomainError(f"Need threshold > hysteresis > 0, got {threshold} and {hysteresis}", module='guidance')
    reading = np.array([np.nan if filtered is None else filtered], dtype=float)
    avoid = bool(_next_avoid(reading, np.array([mode is Mode.AVOID]), threshold, hysteresis)[0])
    if avoid:
        return Mode.AVOID, TURN_COMMAND
    pulse = pulse_from_thrust(cruise_thrust)
    return Mode.CRUISE, ThrusterCommand(pulse, pulse)


def _advance(x: np.ndarray, y: np.ndarray, heading: np.ndarray, speed: np.ndarray,
             left: np.ndarray, right: np.ndarray, current: Tuple[np.ndarray, np.ndarray],
             dt: float, dynamics: VesselDynamics):
    surge = (left + right) / 2.0
    turn = (right - left) / 2.0
    target = dynamics.max_speed * np.maximum(surge, 0.0)
    speed = target + (speed - target) * math.exp(-dt / dynamics.time_constant)
    heading = np.mod(heading + dynamics.max_yaw_rate * turn * dt, TWO_PI)
    cx, cy = current
    x = x + (speed * np.cos(heading) + cx) * dt
    y = y + (speed * np.sin(heading) + cy) * dt
    return x, y, heading, speed


def step_agent(world: LakeWorld, agent: AgentState, commands: ThrusterCommand, dt: float,
               dynamics: Optional[VesselDynamics] = None) -> AgentState:
    """Advance the agent by ``dt`` seconds.

    Forward speed relaxes exponentially (time constant ``tau``) toward
    ``max_speed * max(mean thrust, 0)``; yaw rate is proportional to the
    thrust difference.  The result may lie outside the lake; the caller
    resolves collisions.
    """
    if dt <= 0:
        raise DomainError(f"Time step must be positive, got {dt}", module='guidance')
    dynamics = dynamics or VesselDynamics()
    left, right = commands.fractions()
    x, y = agent.position
    nx, ny, heading, speed = _advance(
        np.array([x], dtype=float), np.array([y], dtype=float), np.array([agent.heading], dtype=float),
        np.array([agent.speed], dtype=float), np.array([left]), np.array([right]),
        world.current_at(x, y), dt, dynamics)
    return AgentState(position=(float(nx[0]), float(ny[0])), heading=float(heading[0]), speed=float(speed[0]),
                      mode=agent.mode, filter=agent.filter)


@dataclass
class MissionResult:
    trajectory: pd.DataFrame
    collected: float
    collisions: int
    final_state: AgentState

    def summary(self) -> Dict:
        return {
            'collected_particles': round(self.collected, 6),
            'collisions': self.collisions,
            'steps': int(len(self.trajectory)) if self.trajectory is not None else 0,
        }


@dataclass(frozen=True)
class GuidanceSettings:
    threshold: float = MISSION_DEFAULTS['threshold']
    hysteresis: float = MISSION_DEFAULTS['hysteresis']
    cruise_thrust: float = MISSION_DEFAULTS['cruise_thrust']

    def __post_init__(self):
        if not self.threshold > self.hysteresis > 0:
            raise DomainError("Need threshold > hysteresis > 0", module='guidance')
        pulse_from_thrust(self.cruise_thrust)


def run_fleet(world: LakeWorld, agents: Sequence[AgentState], duration: float, dt: float,
              sensors: Optional[Sequence[SensorModel]] = None,
              dynamics: Optional[VesselDynamics] = None,
              settings: Optional[GuidanceSettings] = None,
              record: bool = True) -> List[MissionResult]:
    """Run one independent mission per agent in the same lake.

    Every tick each agent senses, filters, decides and moves.  A step
    that would leave the lake counts as a collision: the agent stays
    where it was and turns about.  Particles collected per tick are
    ``C(position) * mouth_area * speed * dt``.  Agents never see each
    other; each has its own sensor and noise seed.

    Args:
        sensors: One per agent (default sensor for all when omitted).
        record: Keep the per-tick trajectories (off for bulk property runs).

    Returns:
        One :class:`MissionResult` per agent, in order.
    """
    if dt <= 0 or duration <= 0:
        raise DomainError("duration and dt must be positive", module='guidance')
    if not agents:
        raise DomainError("A fleet needs at least one agent", module='guidance')
    sensors = list(sensors) if sensors is not None else [SensorModel() for _ in agents]
    if len(sensors) != len(agents):
        raise DomainError(f"Got {len(sensors)} sensors for {len(agents)} agents", module='guidance')
    dynamics = dynamics or VesselDynamics()
    settings = settings or GuidanceSettings()

    x = np.array([a.position[0] for a in agents], dtype=float)
    y = np.array([a.position[1] for a in agents], dtype=float)
    outside = ~world.contains(x, y)
    if outside.any():
        start = agents[int(np.argmax(outside))].position
        raise DomainError(f"Agent starts outside the lake at {start}", module='guidance')
    if world.max_current() > AVOIDANCE_CURRENT_LIMIT + 1e-9:
        logger.warning(f"run_fleet: current of {world.max_current():.3f} m/s exceeds the "
                       f"{AVOIDANCE_CURRENT_LIMIT} m/s avoidance limit; shore collisions are expected")

    heading = np.array([a.heading for a in agents], dtype=float)
    speed = np.array([a.speed for a in agents], dtype=float)
    avoid = np.array([a.mode is Mode.AVOID for a in agents])
    bank = RangeFilterBank([a.filter for a in agents])
    max_range = np.array([s.max_range for s in sensors], dtype=float)
    half_angle = np.array([s.beam_half_angle for s in sensors], dtype=float)

    steps = int(round(duration / dt))
    draws = [s.draw(steps) for s in sensors]
    noise = np.stack([d[0] for d in draws], axis=1)
    dropped = np.stack([d[1] for d in draws], axis=1)

    turn_left, turn_right = TURN_COMMAND.fractions()
    cruise_pulse = pulse_from_thrust(settings.cruise_thrust)
    cruise = thrust_from_pulse(cruise_pulse)

    n = len(agents)
    collected = np.zeros(n)
    collisions = np.zeros(n, dtype=int)
    if record:
        trace = {name: np.empty((steps, n)) for name in ('x', 'y', 'heading', 'speed', 'filtered', 'collected')}
        avoid_trace = np.empty((steps, n), dtype=bool)

    for k in range(steps):
        true_range = _beam_ranges(world.edges, x, y, heading, half_angle)
        readings = np.clip(np.minimum(true_range, max_range) + noise[k], 1e-6, max_range)
        readings[dropped[k]] = np.nan
        filtered = bank.update(readings)
        avoid = _next_avoid(filtered, avoid, settings.threshold, settings.hysteresis)
        left = np.where(avoid, turn_left, cruise)
        right = np.where(avoid, turn_right, cruise)
        nx, ny, heading, speed = _advance(x, y, heading, speed, left, right, world.currents_at(x, y), dt, dynamics)
        hit = ~world.contains(nx, ny)
        if hit.any():
            collisions += hit
            logger.debug(f"run_fleet: {int(hit.sum())} collision(s) at t={(k + 1) * dt:.1f}s")
            nx = np.where(hit, x, nx)
            ny = np.where(hit, y, ny)
            heading = np.where(hit, np.mod(heading + math.pi, TWO_PI), heading)
        x, y = nx, ny
        collected += world.concentration_field.values_at(x, y) * dynamics.mouth_area * speed * dt
        if record:
            trace['x'][k] = x
            trace['y'][k] = y
            trace['heading'][k] = heading
            trace['speed'][k] = speed
            trace['filtered'][k] = filtered
            trace['collected'][k] = collected
            avoid_trace[k] = avoid

    if collisions.any():
        logger.debug(f"run_fleet: {int(collisions.sum())} collisions over {n} missions of {steps} steps")

    t = (np.arange(steps) + 1) * dt
    filters = bank.to_filters()
    results = []
    for i in range(n):
        trajectory = None
        if record:
            trajectory = pd.DataFrame({
                't': t,
                'x': trace['x'][:, i],
                'y': trace['y'][:, i],
                'heading': trace['heading'][:, i],
                'speed': trace['speed'][:, i],
                'mode': np.where(avoid_trace[:, i], Mode.AVOID.value, Mode.CRUISE.value),
                'filtered_range': trace['filtered'][:, i],
                'left_us': np.where(avoid_trace[:, i], TURN_COMMAND.left_pulse, cruise_pulse),
                'right_us': np.where(avoid_trace[:, i], TURN_COMMAND.right_pulse, cruise_pulse),
                'collected_cum': trace['collected'][:, i],
            }, columns=TRAJECTORY_COLUMNS)
        final = AgentState(position=(float(x[i]), float(y[i])), heading=float(heading[i]), speed=float(speed[i]),
                           mode=Mode.AVOID if avoid[i] else Mode.CRUISE, filter=filters[i])
        results.append(MissionResult(trajectory=trajectory, collected=float(collected[i]),
                                     collisions=int(collisions[i]), final_state=final))
    return results


def run_mission(world: LakeWorld, agent: AgentState, duration: float, dt: float,
                sensor: Optional[SensorModel] = None,
                dynamics: Optional[VesselDynamics] = None,
                settings: Optional[GuidanceSettings] = None,
                record: bool = True) -> MissionResult:
    """Sense, filter, decide and move every tick for ``duration`` seconds (a fleet of one)."""
    return run_fleet(world, [agent], duration, dt, [sensor or SensorModel()], dynamics, settings, record)[0]


def build_mission(values: Optional[Dict] = None, seed: Optional[int] = None):
    """Build ``(world, agent, sensor, dynamics, settings)`` from a mission config section."""
    cfg = dict(MISSION_DEFAULTS)
    cfg.update(values or {})
    if seed is not None:
        cfg['seed'] = seed
    world_kwargs = dict(
        current_field=PiecewiseField.from_config(cfg['current']),
        concentration_field=PiecewiseField.from_config(cfg['concentration']),
        seed=int(cfg['seed']),
    )
    if cfg.get('boundary'):
        world = LakeWorld(boundary=tuple(tuple(p) for p in cfg['boundary']), **world_kwargs)
    else:
        world = LakeWorld.rectangle(cfg['lake_width'], cfg['lake_height'], **world_kwargs)
    if cfg.get('start') is None:
        start, heading = world.random_start()
    else:
        start, heading = tuple(cfg['start']), cfg['heading']
    agent = AgentState(position=start, heading=heading, filter=RangeFilter(window=cfg['window']))
    sensor = SensorModel(max_range=cfg['max_range'], noise_sigma=cfg['noise_sigma'],
                         dropout_probability=cfg['dropout_probability'], seed=int(cfg['seed']),
                         beam_half_angle=cfg['beam_half_angle'])
    dynamics = VesselDynamics(time_constant=cfg['time_constant'], max_yaw_rate=cfg['max_yaw_rate'],
                              mouth_area=cfg['mouth_area'])
    settings = GuidanceSettings(threshold=cfg['threshold'], hysteresis=cfg['hysteresis'],
                                cruise_thrust=cfg['cruise_thrust'])
    return world, agent, sensor, dynamics, settings
