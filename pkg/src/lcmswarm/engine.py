"""Synchronous LCM execution: Look, Compute, Move in lockstep, with traces.

All robots activated in a round observe the same pre-round configuration;
light updates and movements commit simultaneously at the end of the round.
Runs are deterministic in their inputs and seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .core import (
    Configuration,
    LightTuple,
    LocalFrame,
    ModelKind,
    Multiplicity,
    Point,
    Snapshot,
    from_local,
    points_close,
    snapshot,
)
from .scheduler import SchedulePrefix, SchedulerKind, generate


class PaletteError(ValueError):
    """An algorithm emitted a light value outside its declared palette."""


@dataclass(frozen=True)
class StepResult:
    """Outcome of one Compute phase.

    `light` maps light-variable indices to new color values; unassigned
    variables persist, which is what lets external-light robots update state
    they cannot see.  `destination` is in the robot's local frame; the local
    origin means stay.  `events` are free-form annotations recorded in the
    trace (e.g. that a meta-simulator ran its inner algorithm).
    """

    light: Mapping[int, int] = field(default_factory=dict)
    destination: Point = Point(0.0, 0.0)
    events: tuple[str, ...] = ()


@dataclass(frozen=True)
class Algorithm:
    """A protocol: a palette declaration plus a pure step function.

    Step functions receive only a Snapshot; they never see robot ids, round
    numbers, or anything else, which enforces anonymity and uniformity by
    construction.
    """

    name: str
    palette: tuple[int, ...]
    step: Callable[[Snapshot], StepResult]
    model: ModelKind
    needs_chirality: bool = False
    robot_count: int | None = None  # exact swarm size required, if any
    min_robots: int = 1


@dataclass(frozen=True)
class FrameSpec:
    """The persistent part of a robot's local frame (fixed disorientation)."""

    rotation: float = 0.0
    scale: float = 1.0
    reflecting: bool = False


IDENTITY_FRAME = FrameSpec()


@dataclass(frozen=True)
class Rigidity:
    """Movement policy: rigid (delta None) or adversarially truncated.

    Under non-rigid movement a robot heading farther than delta may be
    stopped anywhere on its segment at distance at least delta; delta is
    never revealed to algorithms.
    """

    delta: float | None = None

    def __post_init__(self):
        if self.delta is not None and not self.delta > 0.0:
            raise ValueError("delta must be positive")

    @property
    def rigid(self) -> bool:
        return self.delta is None

    def describe(self) -> str:
        return "rigid" if self.rigid else repr(self.delta)


def apply_move(src: Point, dest: Point, rigidity: Rigidity, rng: random.Random) -> Point:
    """Resolve the Move phase for one robot.

    Rigid movement always reaches dest.  Non-rigid movement reaches dest when
    it is within delta; otherwise the seeded adversary picks a stop on the
    segment, clamped to at least delta from src (possibly dest itself).
    """
    if rigidity.rigid:
        return dest
    full = ((dest.x - src.x) ** 2 + (dest.y - src.y) ** 2) ** 0.5
    if full <= rigidity.delta:
        return dest
    travelled = max(rigidity.delta, rng.random() * full)
    t = travelled / full
    return Point(src.x + (dest.x - src.x) * t, src.y + (dest.y - src.y) * t)


@dataclass(frozen=True)
class TraceHeader:
    model: ModelKind
    kind: str
    n: int
    seed: int
    delta: float | None
    palette: tuple[int, ...]
    algo: str = ""
    inner: str = ""


@dataclass(frozen=True)
class TraceRound:
    eset: frozenset[int]
    config: Configuration
    events: dict[int, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    """Full record of an execution: initial configuration plus one entry per
    round holding the activation set and the post-round configuration."""

    header: TraceHeader
    initial: Configuration
    rounds: tuple[TraceRound, ...]

    def configs(self) -> list[Configuration]:
        return [self.initial] + [r.config for r in self.rounds]


def _check_result(result: StepResult, palette: tuple[int, ...], name: str) -> None:
    for idx, value in result.light.items():
        if not 0 <= idx < len(palette):
            raise PaletteError(f"{name}: no light variable {idx}")
        if not (isinstance(value, int) and 0 <= value < palette[idx]):
            raise PaletteError(f"{name}: value {value} outside palette of size {palette[idx]}")


def run_round(
    config: Configuration,
    eset: frozenset[int],
    algo: Algorithm,
    model: ModelKind,
    frames: dict[int, FrameSpec],
    rigidity: Rigidity,
    rng: random.Random,
    multiplicity: Multiplicity = Multiplicity.STRONG,
) -> tuple[Configuration, dict[int, tuple[str, ...]]]:
    """Execute one synchronous round for the robots in eset."""
    for rid in eset:
        if not 0 <= rid < config.n:
            raise ValueError(f"activation of unknown robot {rid}")

    # Look + Compute against the same pre-round configuration.
    results: dict[int, StepResult] = {}
    for rid in sorted(eset):
        pos = config.position(rid)
        spec = frames[rid]
        frame = LocalFrame(pos, spec.rotation, spec.scale, spec.reflecting)
        snap = snapshot(model, config, rid, frame, multiplicity)
        result = algo.step(snap)
        _check_result(result, algo.palette, algo.name)
        results[rid] = result

    # Move + light commit, simultaneously.
    entries = []
    events: dict[int, tuple[str, ...]] = {}
    for rid, pos, light in config.entries:
        if rid in results:
            result = results[rid]
            spec = frames[rid]
            frame = LocalFrame(pos, spec.rotation, spec.scale, spec.reflecting)
            dest = from_local(frame, result.destination)
            new_pos = pos if points_close(dest, pos, 0.0) else apply_move(pos, dest, rigidity, rng)
            new_light = light.replace(dict(result.light)) if result.light else light
            entries.append((rid, new_pos, new_light))
            if result.events:
                events[rid] = result.events
        else:
            entries.append((rid, pos, light))
    return Configuration(tuple(entries)), events


def run(
    config0: Configuration,
    schedule: SchedulePrefix | SchedulerKind | str,
    algo: Algorithm,
    *,
    rigidity: Rigidity = Rigidity(),
    rounds: int | None = None,
    seed: int = 0,
    frames: dict[int, FrameSpec] | None = None,
    multiplicity: Multiplicity = Multiplicity.STRONG,
    chirality: bool = True,
    model: ModelKind | None = None,
) -> Trace:
    """Run an execution and record its trace.

    `schedule` may be an explicit prefix or a scheduler kind, in which case a
    prefix is generated from the seed.  The same seed also drives the
    non-rigid movement adversary.
    """
    n = config0.n
    if isinstance(schedule, (SchedulerKind, str)):
        kind = SchedulerKind(schedule) if isinstance(schedule, str) else schedule
        if rounds is None:
            raise ValueError("rounds is required when generating a schedule")
        prefix = generate(kind, n, rounds, seed) if rounds else SchedulePrefix((), n)
        kind_name = kind.name
    else:
        prefix = schedule
        kind_name = "explicit"
        if prefix.n != n:
            raise ValueError(f"schedule is for n={prefix.n}, configuration has n={n}")
        if rounds is None:
            rounds = len(prefix)
        elif rounds > len(prefix):
            raise ValueError("schedule prefix shorter than requested rounds")

    model = model or algo.model
    if algo.robot_count is not None and n != algo.robot_count:
        raise ValueError(f"{algo.name} requires exactly {algo.robot_count} robots")
    if n < algo.min_robots:
        raise ValueError(f"{algo.name} requires at least {algo.min_robots} robots")
    if algo.needs_chirality and not chirality:
        raise ValueError(f"{algo.name} requires chirality")
    frames = frames or {}
    frames = {rid: frames.get(rid, IDENTITY_FRAME) for rid in range(n)}
    if chirality and any(spec.reflecting for spec in frames.values()):
        raise ValueError("chirality requires every frame to preserve orientation")
    for _, _, lt in config0.entries:
        if lt.palette != algo.palette:
            raise ValueError("initial lights do not match the algorithm's palette")

    rng = random.Random(seed)
    header = TraceHeader(model, kind_name, n, seed, rigidity.delta, algo.palette, algo.name)
    config = config0
    trace_rounds = []
    for k in range(rounds):
        config, events = run_round(
            config, prefix.sets[k], algo, model, frames, rigidity, rng, multiplicity
        )
        trace_rounds.append(TraceRound(prefix.sets[k], config, events))
    return Trace(header, config0, tuple(trace_rounds))


def replay(
    trace: Trace,
    algo: Algorithm,
    *,
    rigidity: Rigidity = Rigidity(),
    frames: dict[int, FrameSpec] | None = None,
    multiplicity: Multiplicity = Multiplicity.STRONG,
    tol: float = 1e-9,
) -> bool:
    """Re-execute a trace and compare configurations round by round.

    Returns True iff every position agrees within tol and every light matches
    exactly.  Raises on header mismatches (wrong algorithm, palette or
    movement policy) since those runs are incomparable, not divergent.
    """
    h = trace.header
    if h.algo and algo.name != h.algo:
        raise ValueError(f"header mismatch: trace was produced by {h.algo!r}")
    if algo.palette != h.palette:
        raise ValueError("header mismatch: palette differs")
    if algo.model != h.model:
        raise ValueError("header mismatch: model differs")
    if rigidity.delta != h.delta:
        raise ValueError("header mismatch: movement policy differs")

    n = trace.initial.n
    frames = frames or {}
    frames = {rid: frames.get(rid, IDENTITY_FRAME) for rid in range(n)}
    rng = random.Random(h.seed)
    config = trace.initial
    for recorded in trace.rounds:
        config, _ = run_round(
            config, recorded.eset, algo, h.model, frames, rigidity, rng, multiplicity
        )
        for rid, pos, light in config.entries:
            want_pos = recorded.config.position(rid)
            if not points_close(pos, want_pos, tol):
                return False
            if light != recorded.config.light(rid):
                return False
    return True


def _fmt(v: float) -> str:
    # Shortest representation that parses back to the identical double; the
    # write-read round-trip must be exact for replay and late-stage geometry
    # checks (a fixed 12-digit format loses deeply shrunk segments).
    return repr(v)


def write_trace(trace: Trace, path: str) -> None:
    """Serialize a trace; round 0 carries the initial configuration."""
    h = trace.header
    head = (
        f"model={h.model.value} kind={h.kind} n={h.n} seed={h.seed} "
        f"delta={'rigid' if h.delta is None else _fmt(h.delta)} "
        f"palette={';'.join(str(s) for s in h.palette)}"
    )
    if h.algo:
        head += f" algo={h.algo}"
    if h.inner:
        head += f" inner={h.inner}"
    lines = [head]

    def emit(config: Configuration, k: int, eset: frozenset[int], events: dict):
        lines.append(f"round={k} act=" + " ".join(str(r) for r in sorted(eset)))
        for rid, p, lt in config.entries:
            row = f"id={rid} pos={_fmt(p.x)},{_fmt(p.y)} light=" + ";".join(
                str(v) for v in lt.values
            )
            if rid in events:
                row += " ev=" + ",".join(events[rid])
            lines.append(row)

    emit(trace.initial, 0, frozenset(), {})
    for k, r in enumerate(trace.rounds, start=1):
        emit(r.config, k, r.eset, r.events)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace(path: str) -> Trace:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError(f"{path}:1: empty trace file")
    fields = dict(tok.split("=", 1) for tok in lines[0].split() if "=" in tok)
    try:
        model = ModelKind(fields["model"])
        n = int(fields["n"])
        seed = int(fields["seed"])
        delta = None if fields["delta"] == "rigid" else float(fields["delta"])
        palette = tuple(int(t) for t in fields["palette"].split(";") if t)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}:1: bad trace header: {exc}") from exc
    header = TraceHeader(
        model, fields.get("kind", "explicit"), n, seed, delta, palette,
        fields.get("algo", ""), fields.get("inner", ""),
    )

    blocks: list[tuple[int, frozenset[int], list[str]]] = []
    i = 1
    while i < len(lines):
        line = lines[i]
        if not line.startswith("round="):
            raise ValueError(f"{path}:{i + 1}: expected a round line, got {line!r}")
        head, _, act = line.partition(" act=")
        k = int(head.split("=", 1)[1])
        eset = frozenset(int(t) for t in act.split())
        body = lines[i + 1 : i + 1 + n]
        if len(body) < n:
            raise ValueError(f"{path}:{i + 1}: truncated round {k}")
        blocks.append((k, eset, body))
        i += 1 + n

    def parse_block(body: list[str], lineno: int) -> tuple[Configuration, dict]:
        entries = []
        events: dict[int, tuple[str, ...]] = {}
        for off, row in enumerate(body):
            toks = dict(tok.split("=", 1) for tok in row.split() if "=" in tok)
            try:
                rid = int(toks["id"])
                x, y = (float(t) for t in toks["pos"].split(","))
                vals = tuple(int(t) for t in toks["light"].split(";") if t)
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno + off}: bad robot line: {exc}") from exc
            entries.append((rid, Point(x, y), LightTuple(vals, palette)))
            if "ev" in toks:
                events[rid] = tuple(toks["ev"].split(","))
        entries.sort(key=lambda e: e[0])
        return Configuration(tuple(entries)), events

    if not blocks or blocks[0][0] != 0:
        raise ValueError(f"{path}: trace must start with round=0")
    initial, _ = parse_block(blocks[0][2], 2)
    rounds = []
    for k, eset, body in blocks[1:]:
        config, events = parse_block(body, 0)
        rounds.append(TraceRound(eset, config, events))
    return Trace(header, initial, tuple(rounds))
