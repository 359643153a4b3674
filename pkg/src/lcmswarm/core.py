"""Geometry, light domains, configurations and per-model snapshot semantics.

Everything here is an immutable value; all operations are pure functions.
Positions are double-precision; POSITION_TOLERANCE is the default equality
tolerance used by checkers throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

POSITION_TOLERANCE = 1e-9

TWO_PI = 2.0 * math.pi


class ModelKind(Enum):
    """Robot capability model, ordered from weakest to strongest."""

    OBLOT = "OBLOT"  # oblivious and silent
    FSTA = "FSTA"    # internal light only (finite-state)
    FCOM = "FCOM"    # external light only (finite-communication)
    LUMI = "LUMI"    # full visible persistent light


class Multiplicity(Enum):
    """How much co-location information a snapshot reveals."""

    STRONG = "strong"  # exact robot counts per location
    WEAK = "weak"      # counts clamped to "one" or "more than one"
    NONE = "none"      # locations only


class ChiralityError(ValueError):
    """Raised when an operation requiring chirality is invoked without it."""


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates: ({self.x}, {self.y})")


ORIGIN = Point(0.0, 0.0)


def add(p: Point, q: Point) -> Point:
    return Point(p.x + q.x, p.y + q.y)


def sub(p: Point, q: Point) -> Point:
    return Point(p.x - q.x, p.y - q.y)


def scale(p: Point, k: float) -> Point:
    return Point(p.x * k, p.y * k)


def distance(p: Point, q: Point) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def midpoint(p: Point, q: Point) -> Point:
    return Point((p.x + q.x) / 2.0, (p.y + q.y) / 2.0)


def rotate(p: Point, angle: float, about: Point = ORIGIN) -> Point:
    """Rotate p by `angle` radians (counterclockwise positive) about a point."""
    c, s = math.cos(angle), math.sin(angle)
    dx, dy = p.x - about.x, p.y - about.y
    return Point(about.x + c * dx - s * dy, about.y + s * dx + c * dy)


def points_close(p: Point, q: Point, tol: float = POSITION_TOLERANCE) -> bool:
    return abs(p.x - q.x) <= tol and abs(p.y - q.y) <= tol


@dataclass(frozen=True, slots=True)
class LocalFrame:
    """A robot's private coordinate system.

    The origin is the observing robot's current position; rotation, scale and
    handedness are fixed per robot for the whole execution (fixed
    disorientation).  When system-wide chirality holds, every frame must be
    orientation-preserving (reflecting=False).
    """

    origin: Point
    rotation: float = 0.0
    scale: float = 1.0
    reflecting: bool = False

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"frame scale must be positive, got {self.scale}")
        if not math.isfinite(self.rotation):
            raise ValueError("frame rotation must be finite")


def to_local(frame: LocalFrame, p: Point) -> Point:
    """Express a global point in the frame's coordinates.

    Translate by -origin, rotate by -rotation, scale by 1/scale, then reflect
    across the local x-axis iff the frame is reflecting.  The frame origin
    always maps to (0, 0).
    """
    q = rotate(sub(p, frame.origin), -frame.rotation)
    q = scale(q, 1.0 / frame.scale)
    if frame.reflecting:
        q = Point(q.x, -q.y)
    return q


def from_local(frame: LocalFrame, p: Point) -> Point:
    """Inverse of to_local: map a frame-local point back to global coordinates."""
    q = Point(p.x, -p.y) if frame.reflecting else p
    q = rotate(scale(q, frame.scale), frame.rotation)
    return add(q, frame.origin)


@dataclass(frozen=True)
class LightTuple:
    """Joint value of a robot's declared light variables.

    values[i] is the color index of variable i and must lie in
    range(palette[i]).  An empty palette (one total color) carries no
    information and behaves like an unlit OBLOT robot.
    """

    values: tuple[int, ...]
    palette: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.palette):
            raise ValueError("light tuple arity does not match palette")
        for v, size in zip(self.values, self.palette):
            if not (isinstance(v, int) and 0 <= v < size):
                raise ValueError(f"color {v} outside palette of size {size}")

    @classmethod
    def off(cls, palette: tuple[int, ...]) -> "LightTuple":
        return cls((0,) * len(palette), palette)

    def replace(self, assignments: dict[int, int]) -> "LightTuple":
        """Return a copy with the given variables reassigned; others persist."""
        vals = list(self.values)
        for idx, v in assignments.items():
            vals[idx] = v
        return LightTuple(tuple(vals), self.palette)


def palette_size(palette: tuple[int, ...]) -> int:
    """Total number of colors a palette can express."""
    total = 1
    for size in palette:
        total *= size
    return total


@dataclass(frozen=True)
class Configuration:
    """Global world state: one (robot id, position, light) entry per robot.

    Robot ids are exactly 0..n-1.  Ids exist only at the harness level;
    algorithms never see them.
    """

    entries: tuple[tuple[int, Point, LightTuple], ...]

    def __post_init__(self):
        ids = [rid for rid, _, _ in self.entries]
        if ids != list(range(len(self.entries))):
            raise ValueError(f"robot ids must be exactly 0..n-1 in order, got {ids}")

    @property
    def n(self) -> int:
        return len(self.entries)

    def position(self, rid: int) -> Point:
        return self.entries[rid][1]

    def light(self, rid: int) -> LightTuple:
        return self.entries[rid][2]

    def occupied_locations(self) -> tuple[Point, ...]:
        """Distinct occupied locations (size m <= n)."""
        seen: dict[tuple[float, float], Point] = {}
        for _, p, _ in self.entries:
            seen.setdefault((p.x, p.y), p)
        return tuple(seen.values())


def make_configuration(
    positions: list[Point] | tuple[Point, ...],
    lights: list[LightTuple] | None = None,
    palette: tuple[int, ...] = (),
) -> Configuration:
    """Build a configuration with ids 0..n-1; lights default to all-off."""
    if lights is None:
        lights = [LightTuple.off(palette) for _ in positions]
    if len(lights) != len(positions):
        raise ValueError("positions and lights differ in length")
    return Configuration(tuple((i, p, lt) for i, (p, lt) in enumerate(zip(positions, lights))))


@dataclass(frozen=True)
class ObservedLocation:
    """One occupied location as seen by an observer, in its local frame.

    `lights` is a sorted multiset of light value-tuples, or None for models
    that cannot see other robots' lights.  `count` is the position
    multiplicity (subject to the snapshot's multiplicity mode).
    """

    point: Point
    count: int
    lights: tuple[tuple[int, ...], ...] | None


@dataclass(frozen=True)
class Snapshot:
    """A robot's model-filtered, locally-framed view of the configuration.

    The observer always sees itself at the local origin.  Light visibility:

    * OBLOT - no lights at all;
    * FSTA  - own light only (own_light);
    * FCOM  - all other robots' lights; own light excluded from the multiset
      at its own location; own_light absent;
    * LUMI  - every light including its own; own_light present.
    """

    observed: tuple[ObservedLocation, ...]
    own_light: tuple[int, ...] | None
    multiplicity_visible: bool

    def location_at(self, p: Point, tol: float = POSITION_TOLERANCE) -> ObservedLocation | None:
        for loc in self.observed:
            if points_close(loc.point, p, tol):
                return loc
        return None

    def others(self) -> tuple[ObservedLocation, ...]:
        """Observed locations excluding the local origin."""
        return tuple(loc for loc in self.observed if not points_close(loc.point, ORIGIN))


def snapshot(
    model: ModelKind,
    config: Configuration,
    observer: int,
    frame: LocalFrame,
    multiplicity: Multiplicity = Multiplicity.STRONG,
) -> Snapshot:
    """Perform the Look of `observer`: positions of all robots mapped through
    to_local, lights filtered per the model's visibility rule."""
    if not 0 <= observer < config.n:
        raise ValueError(f"unknown observer id {observer}")
    own_light = config.light(observer)

    groups: dict[tuple[float, float], list[tuple[int, LightTuple]]] = {}
    for rid, p, lt in config.entries:
        groups.setdefault((p.x, p.y), []).append((rid, lt))

    sees_others = model in (ModelKind.FCOM, ModelKind.LUMI)
    observed = []
    for key, members in groups.items():
        p = Point(key[0], key[1])
        lights: tuple[tuple[int, ...], ...] | None = None
        if sees_others:
            vals = [lt.values for rid, lt in members
                    if not (model is ModelKind.FCOM and rid == observer)]
            lights = tuple(sorted(vals))
        count = len(members)
        if multiplicity is Multiplicity.NONE:
            count = 1
        elif multiplicity is Multiplicity.WEAK:
            count = min(count, 2)
        observed.append(ObservedLocation(to_local(frame, p), count, lights))
    observed.sort(key=lambda loc: (loc.point.x, loc.point.y))

    own = own_light.values if model in (ModelKind.FSTA, ModelKind.LUMI) else None
    return Snapshot(tuple(observed), own, multiplicity is not Multiplicity.NONE)


@dataclass(frozen=True)
class CircularOrdering:
    """Clockwise ring over distinct occupied locations.

    Defined only under chirality.  The ring starts at the location that is
    lexicographically smallest in the coordinates it was computed from, which
    makes replays deterministic; only the cyclic structure is meaningful to
    algorithms.
    """

    locations: tuple[Point, ...]

    @property
    def m(self) -> int:
        return len(self.locations)

    def suc(self, i: int) -> int:
        return (i + 1) % self.m

    def pred(self, i: int) -> int:
        return (i - 1) % self.m

    def index_of(self, p: Point, tol: float = POSITION_TOLERANCE) -> int:
        for i, loc in enumerate(self.locations):
            if points_close(loc, p, tol):
                return i
        raise ValueError(f"point ({p.x}, {p.y}) is not an occupied location")


def order_locations(points: list[Point] | tuple[Point, ...]) -> CircularOrdering:
    """Order distinct points clockwise around their centroid.

    The start is the lexicographically smallest point.  A point coinciding
    with the centroid has no defined angle; it is placed right after the
    start (at most one such point can exist).
    """
    distinct: dict[tuple[float, float], Point] = {}
    for p in points:
        distinct.setdefault((p.x, p.y), p)
    locs = list(distinct.values())
    if not locs:
        raise ValueError("need at least one location")
    if len(locs) == 1:
        return CircularOrdering((locs[0],))

    cx = sum(p.x for p in locs) / len(locs)
    cy = sum(p.y for p in locs) / len(locs)
    start = min(locs, key=lambda p: (p.x, p.y))

    central = [p for p in locs if p.x == cx and p.y == cy]
    angular = [p for p in locs if not (p.x == cx and p.y == cy)]
    ang = {(p.x, p.y): math.atan2(p.y - cy, p.x - cx) for p in angular}
    start_ang = ang[(start.x, start.y)]

    def clockwise_key(p: Point) -> float:
        # Angular distance travelled clockwise from the start location.
        return (start_ang - ang[(p.x, p.y)]) % TWO_PI

    ring = sorted(angular, key=clockwise_key)
    if central:
        ring.insert(1, central[0])
    return CircularOrdering(tuple(ring))


def circular_order(config: Configuration, chirality: bool = True) -> CircularOrdering:
    """Unique clockwise ordering of the occupied locations; needs chirality."""
    if not chirality:
        raise ChiralityError("circular ordering is undefined without chirality")
    return order_locations([p for _, p, _ in config.entries])
